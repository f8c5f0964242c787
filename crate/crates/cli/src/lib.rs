//! Experiment runner for the `quasilevel` library: JSON configs in, CSV,
//! JSON and SVG results plus a digest manifest out.

pub mod config;
pub mod error;
pub mod format;
pub mod run;
pub mod svg;

pub use config::{Command, ExperimentConfig, Parameters, PhaseSet};
pub use error::CliError;
pub use run::{run, RunManifest, RunOptions};
pub use svg::{render_svg, SvgStyle};
