//! Level lines of quasiperiodic potentials on the plane.
//!
//! A potential is the restriction of a trigonometric polynomial on the
//! N-torus to an affinely embedded plane. The crate builds such potentials
//! (including the n-fold star family with dihedral symmetry), traces their
//! level lines with marching squares, classifies the traced lines across
//! window scales and estimates the energy range in which open lines appear.
//!
//! Modules, bottom-up:
//!
//! - [`potential`]: periodic functions, embeddings, the star builder, symmetry checks.
//! - [`lattice`]: integer points close to rays and lines in R^N.
//! - [`contour`]: grid sampling, level tracing, crossing tests.
//! - [`topology`]: strip fits, sector curves and closed-line diameters.
//! - [`critical`]: open-line energy intervals and their collapse across scales.

pub mod contour;
pub mod critical;
pub mod error;
pub mod field;
pub mod lattice;
pub mod potential;
pub mod topology;

pub use contour::{
    component_diameters, multiscale_trace, trace_level, Axis, BoundaryPoint, Contour,
    ContourSet, Phase, SampledGrid, Side, Window, DEFAULT_NODE_CAP,
};
pub use critical::{
    collapse_analysis, default_phases, estimate_interval, probe_spanning, random_phases,
    CollapseVerdict, CriticalConfig, CriticalReport, ScaleInterval, SpanProbe,
};
pub use error::{Error, Result};
pub use field::{FnField, ScalarField};
pub use lattice::{dist_point_ray, find_integer_shift, shift_potential_by_lattice, LatticeShift, Ray};
pub use potential::{
    build_star_potential, check_dihedral_symmetry, evaluate, evaluate_grid, gradient_bound,
    phase_shift, DihedralDescriptor, Embedding, FrequencyTerm, PeriodicFunction, PotentialSpec,
    QuasiperiodicPotential, Rect, ScalarGrid, SymmetryReport,
};
pub use topology::{
    classify_line, extract_sector_curves, measure_d_of_eps, sector_equivariance_error,
    ClassifiedLine, ClassifyConfig, DiameterCurve, DiameterEntry, SectorCurve, Verdict,
};
