//! Energy range of open level lines at a finite window scale.
//!
//! At scale `L` a level line counts as open when it joins two opposite
//! sides of the window `[−L, L]²`. For one phase that happens exactly on the
//! closed energy interval between two thresholds:
//!
//! - `t_high`: the largest energy at which `{V ≥ ε}` still connects the left
//!   side to the right side;
//! - `t_low`: the smallest energy at which `{V < ε}` connects them.
//!
//! Both crossing predicates are monotone in `ε`, so each threshold is found
//! by plain bisection on a grid that is sampled once and reused. The open
//! interval of a phase family is the hull of the per-phase intervals.

use log::warn;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::contour::{trace_level_capped, Axis, Phase, SampledGrid, Window, DEFAULT_NODE_CAP};
use crate::error::{Error, Result};
use crate::potential::{phase_shift, QuasiperiodicPotential};

/// Tag recorded in every report; bump when the verdict rules change.
pub const CRITERION_VERSION: &str = "span-collapse-v1";

/// Sampling set-up shared by the probes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalConfig {
    /// Grid nodes per unit length.
    pub resolution: f64,
    /// Window center in plane coordinates.
    pub center: [f64; 2],
    pub node_cap: usize,
}

impl Default for CriticalConfig {
    fn default() -> Self {
        Self {
            resolution: 8.0,
            center: [0.0, 0.0],
            node_cap: DEFAULT_NODE_CAP,
        }
    }
}

impl CriticalConfig {
    /// Window of half size `l`, halving the resolution (down to 4 nodes per
    /// unit) when the node cap would be exceeded.
    pub fn window(&self, l: f64) -> Result<Window> {
        let mut res = self.resolution;
        loop {
            let w = Window::with_resolution(self.center, l, res)?;
            if w.node_count() <= self.node_cap as u128 {
                if res != self.resolution {
                    warn!("window L = {l}: resolution lowered to {res} nodes/unit by the node cap");
                }
                return Ok(w);
            }
            if res / 2.0 < 4.0 {
                return Err(Error::ResourceCap {
                    nodes: w.node_count(),
                    cap: self.node_cap as u128,
                });
            }
            res /= 2.0;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanProbe {
    pub eps: f64,
    #[serde(rename = "L")]
    pub half_size: f64,
    pub phases: Vec<Vec<f64>>,
    pub spanning_any: bool,
    pub spanning_count: usize,
}

/// Traces `eps` at each phase and counts the phases with a spanning line.
pub fn probe_spanning(
    p: &QuasiperiodicPotential,
    eps: f64,
    half_size: f64,
    phases: &[Vec<f64>],
    cfg: &CriticalConfig,
) -> Result<SpanProbe> {
    if phases.is_empty() {
        return Err(Error::Precondition("phase list is empty".into()));
    }
    let w = cfg.window(half_size)?;
    let mut count = 0;
    for a in phases {
        let q = phase_shift(p, a)?;
        if trace_level_capped(&q, &w, eps, cfg.node_cap)?.spanning {
            count += 1;
        }
    }
    Ok(SpanProbe {
        eps,
        half_size,
        phases: phases.to_vec(),
        spanning_any: count > 0,
        spanning_count: count,
    })
}

/// Bisects a predicate that holds at `lo` and fails at `hi`.
///
/// Returns the midpoint of the final bracket and the number of probes,
/// which is `⌈log₂((hi − lo)/tol)⌉`.
pub fn bisect(mut lo: f64, mut hi: f64, tol: f64, mut pred: impl FnMut(f64) -> bool) -> (f64, usize) {
    let mut probes = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        probes += 1;
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi), probes)
}

/// Crossing thresholds of one phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseThresholds {
    pub t_high: f64,
    pub t_low: f64,
    pub probes: usize,
}

impl PhaseThresholds {
    pub fn interval(&self) -> (f64, f64) {
        (self.t_high.min(self.t_low), self.t_high.max(self.t_low))
    }
}

fn phase_thresholds(
    q: &QuasiperiodicPotential,
    w: Window,
    eps_lo: f64,
    eps_hi: f64,
    tol: f64,
    cap: usize,
) -> Result<PhaseThresholds> {
    let g = SampledGrid::sample(q, w, cap)?;
    let high = |e: f64| g.crosses(e, Phase::High, Axis::Horizontal);
    let low = |e: f64| g.crosses(e, Phase::Low, Axis::Horizontal);
    if !high(eps_lo) || low(eps_lo) {
        return Err(Error::BracketInvalid(format!(
            "at eps_lo = {eps_lo} the superlevel set must cross the window and the sublevel set must not"
        )));
    }
    if high(eps_hi) || !low(eps_hi) {
        return Err(Error::BracketInvalid(format!(
            "at eps_hi = {eps_hi} the sublevel set must cross the window and the superlevel set must not"
        )));
    }
    let (t_high, n1) = bisect(eps_lo, eps_hi, tol, high);
    let (t_low, n2) = bisect(eps_lo, eps_hi, tol, |e| !low(e));
    Ok(PhaseThresholds {
        t_high,
        t_low,
        probes: n1 + n2,
    })
}

/// Open-line interval at one scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleInterval {
    #[serde(rename = "L")]
    pub half_size: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub per_phase: Vec<PhaseThresholds>,
}

impl ScaleInterval {
    pub fn width(&self) -> f64 {
        self.eps2 - self.eps1
    }
}

/// Estimates `[ε₁(L), ε₂(L)]` to tolerance `tol` inside `[eps_lo, eps_hi]`.
///
/// The bracket must contain the whole transition for every phase: below
/// `eps_lo` everything is high, above `eps_hi` everything is low, as far as
/// crossings are concerned. Otherwise [`Error::BracketInvalid`].
pub fn estimate_interval(
    p: &QuasiperiodicPotential,
    half_size: f64,
    eps_lo: f64,
    eps_hi: f64,
    phases: &[Vec<f64>],
    tol: f64,
    cfg: &CriticalConfig,
) -> Result<ScaleInterval> {
    if phases.is_empty() {
        return Err(Error::Precondition("phase list is empty".into()));
    }
    if !(tol > 0.0) || !(eps_hi > eps_lo) {
        return Err(Error::Precondition(
            "need tol > 0 and eps_lo < eps_hi".into(),
        ));
    }
    let w = cfg.window(half_size)?;
    let mut per_phase = Vec::with_capacity(phases.len());
    for a in phases {
        let q = phase_shift(p, a)?;
        per_phase.push(phase_thresholds(&q, w, eps_lo, eps_hi, tol, cfg.node_cap)?);
    }
    let eps1 = per_phase
        .iter()
        .map(|t| t.interval().0)
        .fold(f64::INFINITY, f64::min);
    let eps2 = per_phase
        .iter()
        .map(|t| t.interval().1)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(ScaleInterval {
        half_size,
        eps1,
        eps2,
        per_phase,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CollapseVerdict {
    Collapses,
    PersistentInterval,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalReport {
    pub per_scale: Vec<ScaleInterval>,
    pub eps0_estimate: f64,
    pub eps0_uncertainty: f64,
    pub collapse_verdict: CollapseVerdict,
    pub tol_eps: f64,
    pub criterion_version: String,
}

impl CriticalReport {
    pub fn widths(&self) -> Vec<f64> {
        self.per_scale.iter().map(ScaleInterval::width).collect()
    }

    /// CSV with header `L,eps1,eps2,width`.
    pub fn sweep_csv_with(&self, fmt: impl Fn(f64) -> String) -> String {
        let mut out = String::from("L,eps1,eps2,width\n");
        for s in &self.per_scale {
            out.push_str(&format!(
                "{},{},{},{}\n",
                fmt(s.half_size),
                fmt(s.eps1),
                fmt(s.eps2),
                fmt(s.width())
            ));
        }
        out
    }
}

/// Verdict from the interval widths at increasing scales.
///
/// - `Collapses`: widths never grow, and the last one is either below
///   `2·tol` or at most half the first one while still shrinking strictly.
/// - `PersistentInterval`: the two largest scales agree within 10% and the
///   width exceeds `10·tol`.
pub fn collapse_verdict(widths: &[f64], tol: f64) -> CollapseVerdict {
    let n = widths.len();
    if n < 2 {
        return CollapseVerdict::Inconclusive;
    }
    let last = widths[n - 1];
    let prev = widths[n - 2];
    let non_increasing = widths.windows(2).all(|w| w[1] <= w[0]);
    let strictly = widths.windows(2).all(|w| w[1] < w[0]);
    if non_increasing && (last < 2.0 * tol || (strictly && last <= 0.5 * widths[0])) {
        return CollapseVerdict::Collapses;
    }
    if last > 10.0 * tol && (last - prev).abs() < 0.1 * prev {
        return CollapseVerdict::PersistentInterval;
    }
    CollapseVerdict::Inconclusive
}

/// Runs [`estimate_interval`] at each scale and summarizes.
pub fn collapse_analysis(
    p: &QuasiperiodicPotential,
    half_sizes: &[f64],
    bracket: (f64, f64),
    phases: &[Vec<f64>],
    tol: f64,
    cfg: &CriticalConfig,
) -> Result<CriticalReport> {
    if half_sizes.len() < 3 || half_sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition(
            "need at least 3 strictly increasing window sizes".into(),
        ));
    }
    let per_scale = half_sizes
        .iter()
        .map(|&l| estimate_interval(p, l, bracket.0, bracket.1, phases, tol, cfg))
        .collect::<Result<Vec<_>>>()?;
    // smallest width, later scales win ties
    let best = per_scale
        .iter()
        .rev()
        .min_by(|a, b| a.width().total_cmp(&b.width()))
        .expect("at least three scales");
    let widths: Vec<f64> = per_scale.iter().map(ScaleInterval::width).collect();
    Ok(CriticalReport {
        eps0_estimate: 0.5 * (best.eps1 + best.eps2),
        eps0_uncertainty: 0.5 * best.width() + tol,
        collapse_verdict: collapse_verdict(&widths, tol),
        tol_eps: tol,
        criterion_version: CRITERION_VERSION.to_string(),
        per_scale,
    })
}

/// Phase vector of the plane translation by `t`, reduced mod 1.
///
/// `V(r, a) = V(r + t)` for this `a`, so translated phases stay inside the
/// potential's own phase family.
pub fn translation_phase(p: &QuasiperiodicPotential, t: [f64; 2]) -> Vec<f64> {
    let emb = p.embedding();
    let (u, v) = emb.frame();
    u.iter()
        .zip(v)
        .map(|(ui, vi)| {
            let a = emb.scale() * (t[0] * ui + t[1] * vi);
            a - a.floor()
        })
        .collect()
}

const PHASE_SPREAD: f64 = 1000.0;
// plastic number: R2 low-discrepancy sequence in the plane
const PLASTIC: f64 = 1.324_717_957_244_746;

/// The zero phase followed by `extra` phases from integer translations
/// spread over `[−500, 500]²` by the R2 sequence.
pub fn default_phases(p: &QuasiperiodicPotential, extra: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; p.dim_n()]];
    let (a1, a2) = (1.0 / PLASTIC, 1.0 / (PLASTIC * PLASTIC));
    for k in 1..=extra {
        let s = [(0.5 + a1 * k as f64).fract(), (0.5 + a2 * k as f64).fract()];
        let t = [
            (PHASE_SPREAD * (s[0] - 0.5)).round(),
            (PHASE_SPREAD * (s[1] - 0.5)).round(),
        ];
        out.push(translation_phase(p, t));
    }
    out
}

/// Phases from `count` random integer translations in `[−10⁴, 10⁴]²`.
pub fn random_phases<R: Rng>(p: &QuasiperiodicPotential, count: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| {
            let t = [
                rng.gen_range(-10_000i64..=10_000) as f64,
                rng.gen_range(-10_000i64..=10_000) as f64,
            ];
            translation_phase(p, t)
        })
        .collect()
}
