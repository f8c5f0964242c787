//! Experiment configuration files.
//!
//! ```json
//! {"potential": {"kind": "star", "n": 5, "amps": [1.0]},
//!  "command": "critical",
//!  "parameters": {"L_list": [50, 100, 200], "bracket": [-2, 4], "tol": 0.005},
//!  "seed": 7}
//! ```
//!
//! The shape of `parameters` depends on `command`. Unknown keys anywhere are
//! rejected.

use std::path::Path;

use quasilevel::{CriticalConfig, PotentialSpec, QuasiperiodicPotential, DEFAULT_NODE_CAP};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Trace,
    Classify,
    Critical,
    DCurve,
    LatticeApprox,
    SymmetryCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Trace => "trace",
            Command::Classify => "classify",
            Command::Critical => "critical",
            Command::DCurve => "d-curve",
            Command::LatticeApprox => "lattice-approx",
            Command::SymmetryCheck => "symmetry-check",
        }
    }
}

fn default_resolution() -> f64 {
    8.0
}

fn default_node_cap() -> usize {
    DEFAULT_NODE_CAP
}

fn default_phases() -> PhaseSet {
    PhaseSet::Default(4)
}

/// Phase vectors for a run: `{"default": k}` is the zero phase plus `k`
/// translation phases, `{"random": k}` draws `k` from the seeded generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum PhaseSet {
    Default(usize),
    Random(usize),
    Explicit(Vec<Vec<f64>>),
}

impl PhaseSet {
    pub fn resolve(&self, p: &QuasiperiodicPotential, seed: u64) -> Result<Vec<Vec<f64>>, CliError> {
        match self {
            PhaseSet::Default(k) => Ok(quasilevel::default_phases(p, *k)),
            PhaseSet::Random(k) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Ok(quasilevel::random_phases(p, *k, &mut rng))
            }
            PhaseSet::Explicit(list) => {
                if list.is_empty() {
                    return Err(CliError::config("phases: explicit list is empty", Some("phases")));
                }
                if list.iter().any(|a| a.len() != p.dim_n()) {
                    return Err(CliError::config(
                        format!("phases: every vector needs {} entries", p.dim_n()),
                        Some("phases"),
                    ));
                }
                Ok(list.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceParams {
    pub eps: f64,
    #[serde(rename = "L")]
    pub half_size: f64,
    #[serde(default)]
    pub center: [f64; 2],
    #[serde(default = "default_resolution")]
    pub resolution: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<Vec<f64>>,
    /// Overlay the symmetry sectors on the figure.
    #[serde(default)]
    pub sectors: bool,
    #[serde(default = "default_node_cap")]
    pub node_cap: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyParams {
    pub eps_list: Vec<f64>,
    /// Half size of the window in which seeds are traced.
    #[serde(rename = "seed_L")]
    pub seed_half_size: f64,
    #[serde(rename = "L_list")]
    pub half_sizes: Vec<f64>,
    #[serde(default = "default_phases")]
    pub phases: PhaseSet,
    #[serde(default)]
    pub center: [f64; 2],
    #[serde(default = "default_resolution")]
    pub resolution: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_seeds: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flatness: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_turn_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_exponent: Option<f64>,
    #[serde(default = "default_node_cap")]
    pub node_cap: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriticalParams {
    #[serde(rename = "L_list")]
    pub half_sizes: Vec<f64>,
    pub bracket: [f64; 2],
    pub tol: f64,
    #[serde(default = "default_phases")]
    pub phases: PhaseSet,
    #[serde(default)]
    pub center: [f64; 2],
    #[serde(default = "default_resolution")]
    pub resolution: f64,
    #[serde(default = "default_node_cap")]
    pub node_cap: usize,
}

impl CriticalParams {
    pub fn sampling(&self) -> CriticalConfig {
        CriticalConfig {
            resolution: self.resolution,
            center: self.center,
            node_cap: self.node_cap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DCurveParams {
    pub eps_list: Vec<f64>,
    #[serde(rename = "L_list")]
    pub half_sizes: Vec<f64>,
    #[serde(default)]
    pub center: [f64; 2],
    #[serde(default = "default_resolution")]
    pub resolution: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<Vec<f64>>,
    #[serde(default = "default_node_cap")]
    pub node_cap: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeParams {
    pub direction: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<Vec<f64>>,
    #[serde(default)]
    pub two_sided: bool,
    pub deltas: Vec<f64>,
    pub min_dist: f64,
    pub budget: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquivarianceParams {
    pub eps: f64,
    #[serde(rename = "L")]
    pub half_size: f64,
    #[serde(rename = "R")]
    pub inner_radius: f64,
    #[serde(default = "default_resolution")]
    pub resolution: f64,
}

fn default_samples() -> usize {
    10_000
}

fn default_symmetry_tol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetryParams {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_symmetry_tol")]
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equivariance: Option<EquivarianceParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Parameters {
    Trace(TraceParams),
    Classify(ClassifyParams),
    Critical(CriticalParams),
    DCurve(DCurveParams),
    LatticeApprox(LatticeParams),
    SymmetryCheck(SymmetryParams),
}

impl Parameters {
    fn parse(command: Command, value: serde_json::Value) -> Result<Self, serde_json::Error> {
        let value = match value {
            serde_json::Value::Null => serde_json::Value::Object(Default::default()),
            v => v,
        };
        use serde_json::from_value as de;
        Ok(match command {
            Command::Trace => Parameters::Trace(de(value)?),
            Command::Classify => Parameters::Classify(de(value)?),
            Command::Critical => Parameters::Critical(de(value)?),
            Command::DCurve => Parameters::DCurve(de(value)?),
            Command::LatticeApprox => Parameters::LatticeApprox(de(value)?),
            Command::SymmetryCheck => Parameters::SymmetryCheck(de(value)?),
        })
    }

    pub fn command(&self) -> Command {
        match self {
            Parameters::Trace(_) => Command::Trace,
            Parameters::Classify(_) => Command::Classify,
            Parameters::Critical(_) => Command::Critical,
            Parameters::DCurve(_) => Command::DCurve,
            Parameters::LatticeApprox(_) => Command::LatticeApprox,
            Parameters::SymmetryCheck(_) => Command::SymmetryCheck,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    potential: PotentialSpec,
    command: Command,
    #[serde(default)]
    parameters: serde_json::Value,
    #[serde(default)]
    seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfig", into = "RawConfig")]
pub struct ExperimentConfig {
    pub potential: PotentialSpec,
    pub parameters: Parameters,
    pub seed: u64,
}

impl TryFrom<RawConfig> for ExperimentConfig {
    type Error = serde_json::Error;

    fn try_from(raw: RawConfig) -> Result<Self, Self::Error> {
        Ok(Self {
            parameters: Parameters::parse(raw.command, raw.parameters)?,
            potential: raw.potential,
            seed: raw.seed,
        })
    }
}

impl From<ExperimentConfig> for RawConfig {
    fn from(c: ExperimentConfig) -> Self {
        RawConfig {
            command: c.parameters.command(),
            parameters: serde_json::to_value(&c.parameters).expect("parameters serialize"),
            potential: c.potential,
            seed: c.seed,
        }
    }
}

fn check(ok: bool, key: &str, what: &str) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::config(format!("{key}: {what}"), Some(key)))
    }
}

fn positive(v: f64, key: &str) -> Result<(), CliError> {
    check(v.is_finite() && v > 0.0, key, "must be positive and finite")
}

fn finite_all(vs: &[f64], key: &str) -> Result<(), CliError> {
    check(vs.iter().all(|v| v.is_finite()), key, "entries must be finite")
}

fn scales(vs: &[f64], key: &str, min: usize) -> Result<(), CliError> {
    check(
        vs.len() >= min && vs.iter().all(|v| v.is_finite() && *v > 0.0) && vs.windows(2).all(|w| w[1] > w[0]),
        key,
        &format!("needs at least {min} positive, strictly increasing entries"),
    )
}

impl ExperimentConfig {
    pub fn command(&self) -> Command {
        self.parameters.command()
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(CliError::from_parse)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::config(format!("cannot read {}: {e}", path.display()), None)
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Range checks beyond what the types enforce.
    pub fn validate(&self) -> Result<(), CliError> {
        match &self.parameters {
            Parameters::Trace(t) => {
                finite_all(&[t.eps], "eps")?;
                positive(t.half_size, "L")?;
                positive(t.resolution, "resolution")?;
                finite_all(&t.center, "center")?;
            }
            Parameters::Classify(c) => {
                check(!c.eps_list.is_empty(), "eps_list", "must not be empty")?;
                finite_all(&c.eps_list, "eps_list")?;
                positive(c.seed_half_size, "seed_L")?;
                scales(&c.half_sizes, "L_list", 3)?;
                positive(c.resolution, "resolution")?;
                finite_all(&c.center, "center")?;
                for (v, key) in [(c.flatness, "flatness"), (c.max_turn_deg, "max_turn_deg"), (c.min_exponent, "min_exponent")] {
                    if let Some(v) = v {
                        positive(v, key)?;
                    }
                }
            }
            Parameters::Critical(c) => {
                scales(&c.half_sizes, "L_list", 3)?;
                finite_all(&c.bracket, "bracket")?;
                check(c.bracket[0] < c.bracket[1], "bracket", "needs lo < hi")?;
                positive(c.tol, "tol")?;
                positive(c.resolution, "resolution")?;
                finite_all(&c.center, "center")?;
            }
            Parameters::DCurve(d) => {
                check(!d.eps_list.is_empty(), "eps_list", "must not be empty")?;
                finite_all(&d.eps_list, "eps_list")?;
                scales(&d.half_sizes, "L_list", 2)?;
                positive(d.resolution, "resolution")?;
                finite_all(&d.center, "center")?;
            }
            Parameters::LatticeApprox(l) => {
                check(!l.direction.is_empty(), "direction", "must not be empty")?;
                finite_all(&l.direction, "direction")?;
                if let Some(o) = &l.origin {
                    check(o.len() == l.direction.len(), "origin", "must match the direction's dimension")?;
                }
                check(!l.deltas.is_empty(), "deltas", "must not be empty")?;
                for &d in &l.deltas {
                    positive(d, "deltas")?;
                }
                check(l.min_dist.is_finite() && l.min_dist >= 0.0, "min_dist", "must be non-negative")?;
                check(l.budget > 0, "budget", "must be positive")?;
            }
            Parameters::SymmetryCheck(s) => {
                check(s.samples > 0, "samples", "must be positive")?;
                positive(s.tol, "tol")?;
                if let Some(e) = &s.equivariance {
                    finite_all(&[e.eps], "eps")?;
                    positive(e.half_size, "L")?;
                    positive(e.inner_radius, "R")?;
                    positive(e.resolution, "resolution")?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CRITICAL: &str = r#"{
        "potential": {"kind": "star", "n": 5, "amps": [1.0]},
        "command": "critical",
        "parameters": {"L_list": [10, 20, 40], "bracket": [-2, 4], "tol": 0.01},
        "seed": 3
    }"#;

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::from_json(CRITICAL).unwrap();
        match &c.parameters {
            Parameters::Critical(p) => {
                assert_eq!(p.phases, PhaseSet::Default(4));
                assert_eq!(p.resolution, 8.0);
                assert_eq!(p.node_cap, DEFAULT_NODE_CAP);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(c.command(), Command::Critical);
        assert_eq!(c.seed, 3);
    }

    #[test]
    fn unknown_keys_are_named() {
        let bad = CRITICAL.replace("\"tol\"", "\"epss\": 1, \"tol\"");
        let e = ExperimentConfig::from_json(&bad).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert_eq!(e.key(), Some("epss"));
        let top = CRITICAL.replace("\"seed\"", "\"sed\": 1, \"seed\"");
        assert_eq!(ExperimentConfig::from_json(&top).unwrap_err().key(), Some("sed"));
        let pot = CRITICAL.replace("\"n\": 5", "\"n\": 5, \"order\": 5");
        assert_eq!(ExperimentConfig::from_json(&pot).unwrap_err().key(), Some("order"));
    }

    #[test]
    fn ranges_are_checked() {
        let bad = CRITICAL.replace("[-2, 4]", "[4, -2]");
        assert_eq!(ExperimentConfig::from_json(&bad).unwrap_err().key(), Some("bracket"));
        let bad = CRITICAL.replace("[10, 20, 40]", "[10, 20]");
        assert_eq!(ExperimentConfig::from_json(&bad).unwrap_err().key(), Some("L_list"));
        let bad = CRITICAL.replace("\"critical\"", "\"plot\"");
        assert_eq!(ExperimentConfig::from_json(&bad).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn missing_parameters_use_defaults_where_possible() {
        let c = ExperimentConfig::from_json(
            r#"{"potential": {"kind": "star", "n": 5, "amps": [1]}, "command": "symmetry-check"}"#,
        )
        .unwrap();
        assert_eq!(
            c.parameters,
            Parameters::SymmetryCheck(SymmetryParams { samples: 10_000, tol: 1e-10, equivariance: None })
        );
    }
}
