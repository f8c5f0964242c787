//! Pipelines behind the subcommands, and the run manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use quasilevel::contour::trace_level_capped;
use quasilevel::{
    classify_line, collapse_analysis, component_diameters, extract_sector_curves,
    find_integer_shift, measure_d_of_eps, phase_shift, sector_equivariance_error,
    check_dihedral_symmetry, ClassifiedLine, ClassifyConfig, LatticeShift, QuasiperiodicPotential,
    Ray, SampledGrid, Window,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{
    ClassifyParams, CriticalParams, DCurveParams, ExperimentConfig, LatticeParams, Parameters,
    SymmetryParams, TraceParams,
};
use crate::error::CliError;
use crate::format::{json, num};
use crate::svg::{render_svg, SvgStyle};

/// Name of the generator behind every seeded draw.
pub const RNG_NAME: &str = "ChaCha8";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub name: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub tool_version: String,
    pub command: String,
    pub config: ExperimentConfig,
    pub rng: String,
    pub seed: u64,
    pub jobs: usize,
    pub started_at: String,
    pub finished_at: String,
    pub stages: Vec<StageTiming>,
    pub outputs: Vec<OutputDigest>,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// Worker threads; `None` uses every logical core.
    pub jobs: Option<usize>,
}

#[derive(Default)]
struct Stages(Vec<StageTiming>);

impl Stages {
    fn time<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        let seconds = t.elapsed().as_secs_f64();
        info!("stage {name}: {seconds:.3} s");
        self.0.push(StageTiming {
            name: name.into(),
            seconds,
        });
        out
    }
}

/// Named output files in the order they are written.
type Outputs = Vec<(&'static str, String)>;

/// Runs the configured pipeline, writes its outputs and the manifest into
/// `opts.out_dir`.
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunManifest, CliError> {
    cfg.validate()?;
    let started_at = chrono::Utc::now().to_rfc3339();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = opts.jobs {
        builder = builder.num_threads(j.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::config(format!("thread pool: {e}"), Some("jobs")))?;
    let jobs = pool.current_num_threads();

    let mut stages = Stages::default();
    let outputs = pool.install(|| -> Result<Outputs, CliError> {
        let p = stages.time("build-potential", || cfg.potential.build())?;
        match &cfg.parameters {
            Parameters::Trace(t) => trace(&p, t, &mut stages),
            Parameters::Classify(c) => classify(&p, c, cfg.seed, &mut stages),
            Parameters::Critical(c) => critical(&p, c, cfg.seed, &mut stages),
            Parameters::DCurve(d) => d_curve(&p, d, &mut stages),
            Parameters::LatticeApprox(l) => lattice(l, &mut stages),
            Parameters::SymmetryCheck(s) => symmetry(&p, s, &mut stages),
        }
    })?;

    let out_dir = &opts.out_dir;
    let digests = stages.time("write-outputs", || write_outputs(out_dir, &outputs))?;
    let manifest = RunManifest {
        tool: "quasilevel".into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        command: cfg.command().name().into(),
        config: cfg.clone(),
        rng: RNG_NAME.into(),
        seed: cfg.seed,
        jobs,
        started_at,
        finished_at: chrono::Utc::now().to_rfc3339(),
        stages: stages.0,
        outputs: digests,
    };
    let path = out_dir.join(MANIFEST_FILE);
    std::fs::write(&path, json(&manifest)).map_err(|e| CliError::io(&path, e))?;
    Ok(manifest)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write_outputs(dir: &Path, outputs: &Outputs) -> Result<Vec<OutputDigest>, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    outputs
        .iter()
        .map(|(name, text)| {
            let path = dir.join(name);
            std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
            Ok(OutputDigest {
                path: (*name).into(),
                sha256: sha256_hex(text.as_bytes()),
                bytes: text.len() as u64,
            })
        })
        .collect()
}

fn shifted(p: &QuasiperiodicPotential, phase: &Option<Vec<f64>>) -> Result<QuasiperiodicPotential, CliError> {
    match phase {
        Some(a) => Ok(phase_shift(p, a)?),
        None => Ok(p.clone()),
    }
}

#[derive(Serialize)]
struct TraceSummary {
    level: f64,
    window: Window,
    contours: usize,
    closed: usize,
    open: usize,
    spanning: bool,
    max_closed_diameter: f64,
}

fn trace(p: &QuasiperiodicPotential, t: &TraceParams, stages: &mut Stages) -> Result<Outputs, CliError> {
    let q = shifted(p, &t.phase)?;
    let w = Window::with_resolution(t.center, t.half_size, t.resolution)?;
    let cs = stages.time("trace", || trace_level_capped(&q, &w, t.eps, t.node_cap))?;
    let sectors = if t.sectors {
        Some(*q.symmetry().ok_or_else(|| {
            quasilevel::Error::Precondition("sector overlay needs a symmetric potential".into())
        })?)
    } else {
        None
    };
    let summary = TraceSummary {
        level: t.eps,
        window: w,
        contours: cs.contours.len(),
        closed: cs.closed().count(),
        open: cs.open().count(),
        spanning: cs.spanning,
        max_closed_diameter: component_diameters(&cs).into_iter().fold(0.0, f64::max),
    };
    let svg = stages.time("render", || render_svg(&cs, &SvgStyle { sectors, pixels: None }));
    Ok(vec![
        ("contours.csv", cs.to_csv_with(num)),
        ("contours.svg", svg),
        ("trace.json", json(&summary)),
    ])
}

#[derive(Serialize)]
struct LineRecord {
    phase: usize,
    eps: f64,
    #[serde(flatten)]
    line: ClassifiedLine,
}

#[derive(Serialize)]
struct ClassifyReport {
    phases: Vec<Vec<f64>>,
    counts: BTreeMap<&'static str, usize>,
    lines: Vec<LineRecord>,
}

fn verdict_name(v: &quasilevel::Verdict) -> &'static str {
    use quasilevel::Verdict::*;
    match v {
        Closed => "Closed",
        OpenRegular { .. } => "OpenRegular",
        OpenChaotic { .. } => "OpenChaotic",
        Indeterminate => "Indeterminate",
    }
}

fn classify(
    p: &QuasiperiodicPotential,
    c: &ClassifyParams,
    seed: u64,
    stages: &mut Stages,
) -> Result<Outputs, CliError> {
    let phases = c.phases.resolve(p, seed)?;
    let base = ClassifyConfig::default();
    let cfg = ClassifyConfig {
        resolution: c.resolution,
        center: c.center,
        node_cap: c.node_cap,
        flatness: c.flatness.unwrap_or(base.flatness),
        max_turn_deg: c.max_turn_deg.unwrap_or(base.max_turn_deg),
        min_exponent: c.min_exponent.unwrap_or(base.min_exponent),
    };
    let seed_window = Window::with_resolution(c.center, c.seed_half_size, c.resolution)?;
    let limit = c.max_seeds.unwrap_or(usize::MAX);
    let lines = stages.time("classify", || -> Result<Vec<LineRecord>, CliError> {
        let mut lines = Vec::new();
        'phases: for (k, a) in phases.iter().enumerate() {
            let q = phase_shift(p, a)?;
            let grid = SampledGrid::sample(&q, seed_window, c.node_cap)?;
            for &eps in &c.eps_list {
                let cs = grid.contours(eps);
                for seed_line in cs.open().filter(|l| l.is_spanning()) {
                    if lines.len() >= limit {
                        break 'phases;
                    }
                    let line = classify_line(&q, seed_line, &c.half_sizes, &cfg)?;
                    info!("phase {k}, eps {eps}: {}", verdict_name(&line.verdict));
                    lines.push(LineRecord { phase: k, eps, line });
                }
            }
        }
        Ok(lines)
    })?;
    let mut counts: BTreeMap<&'static str, usize> =
        ["Closed", "OpenRegular", "OpenChaotic", "Indeterminate"].into_iter().map(|k| (k, 0)).collect();
    for l in &lines {
        *counts.get_mut(verdict_name(&l.line.verdict)).expect("known verdict") += 1;
    }
    let report = ClassifyReport { phases, counts, lines };
    Ok(vec![("classify.json", json(&report))])
}

fn critical(
    p: &QuasiperiodicPotential,
    c: &CriticalParams,
    seed: u64,
    stages: &mut Stages,
) -> Result<Outputs, CliError> {
    let phases = c.phases.resolve(p, seed)?;
    let report = stages.time("critical", || {
        collapse_analysis(p, &c.half_sizes, (c.bracket[0], c.bracket[1]), &phases, c.tol, &c.sampling())
    })?;
    Ok(vec![
        ("critical.json", json(&report)),
        ("sweep.csv", report.sweep_csv_with(num)),
    ])
}

fn d_curve(p: &QuasiperiodicPotential, d: &DCurveParams, stages: &mut Stages) -> Result<Outputs, CliError> {
    let q = shifted(p, &d.phase)?;
    let curve = stages.time("d-curve", || {
        measure_d_of_eps(&q, d.center, &d.eps_list, &d.half_sizes, d.resolution, d.node_cap)
    })?;
    Ok(vec![
        ("d_curve.csv", curve.to_csv_with(num)),
        ("d_curve.json", json(&curve)),
    ])
}

#[derive(Serialize)]
struct LatticeRecord {
    delta: f64,
    found: bool,
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    shift: Option<LatticeShift>,
    #[serde(skip_serializing_if = "Option::is_none")]
    steps: Option<u64>,
}

fn lattice(l: &LatticeParams, stages: &mut Stages) -> Result<Outputs, CliError> {
    let origin = l.origin.clone().unwrap_or_else(|| vec![0.0; l.direction.len()]);
    let ray = Ray::new(origin, l.direction.clone(), l.two_sided)?;
    let records = stages.time("lattice-approx", || -> Result<Vec<LatticeRecord>, CliError> {
        l.deltas
            .iter()
            .map(|&delta| match find_integer_shift(&ray, delta, l.min_dist, l.budget) {
                Ok(s) => Ok(LatticeRecord { delta, found: true, shift: Some(s), steps: None }),
                // running out of budget is a result, not a failure
                Err(quasilevel::Error::NotFound { steps }) => {
                    Ok(LatticeRecord { delta, found: false, shift: None, steps: Some(steps) })
                }
                Err(e) => Err(e.into()),
            })
            .collect()
    })?;
    Ok(vec![("lattice.json", json(&records))])
}

#[derive(Serialize)]
struct EquivarianceReport {
    eps: f64,
    #[serde(rename = "L")]
    half_size: f64,
    #[serde(rename = "R")]
    inner_radius: f64,
    h: f64,
    curves: usize,
    max_error: f64,
    pass: bool,
}

#[derive(Serialize)]
struct SymmetryOutput {
    n: usize,
    samples: usize,
    tol: f64,
    max_rotation_err: f64,
    max_reflection_err: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    equivariance: Option<EquivarianceReport>,
    pass: bool,
}

fn symmetry(p: &QuasiperiodicPotential, s: &SymmetryParams, stages: &mut Stages) -> Result<Outputs, CliError> {
    let d = *p.symmetry().ok_or_else(|| {
        quasilevel::Error::Precondition("potential carries no dihedral symmetry".into())
    })?;
    let rep = stages.time("symmetry", || check_dihedral_symmetry(p, &d, s.samples, s.tol));
    let equivariance = match &s.equivariance {
        None => None,
        Some(e) => Some(stages.time("equivariance", || -> Result<EquivarianceReport, CliError> {
            let w = Window::with_resolution(d.center, e.half_size, e.resolution)?;
            let cs = quasilevel::trace_level(p, &w, e.eps)?;
            let curves = extract_sector_curves(&cs, &d, e.inner_radius)?;
            let err = sector_equivariance_error(&cs, &d, &curves);
            Ok(EquivarianceReport {
                eps: e.eps,
                half_size: e.half_size,
                inner_radius: e.inner_radius,
                h: w.h(),
                curves: curves.len(),
                max_error: err,
                pass: err <= w.h(),
            })
        })?),
    };
    let pass = rep.pass && equivariance.as_ref().map_or(true, |e| e.pass);
    let out = SymmetryOutput {
        n: d.n,
        samples: s.samples,
        tol: s.tol,
        max_rotation_err: rep.max_rotation_err,
        max_reflection_err: rep.max_reflection_err,
        equivariance,
        pass,
    };
    Ok(vec![("symmetry.json", json(&out))])
}
