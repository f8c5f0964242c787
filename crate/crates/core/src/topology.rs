//! Shape of traced level lines across window scales.
//!
//! - open lines are fitted by a strip (total least squares); a strip that
//!   stays put while the window grows marks a regular line, a strip whose
//!   width keeps growing marks a chaotic one;
//! - sector curves are the pieces of level lines inside one sector of a
//!   dihedral potential, outside a disc around the symmetry center;
//! - `D(ε)` is the largest closed-line diameter seen at level `ε`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contour::{diameter, Contour, ContourSet, SampledGrid, Window, DEFAULT_NODE_CAP};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::potential::DihedralDescriptor;

/// Tag recorded in every classification; bump when the rules change.
pub const CRITERION_VERSION: &str = "strip-growth-v1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyConfig {
    /// Grid nodes per unit length.
    pub resolution: f64,
    pub center: [f64; 2],
    pub node_cap: usize,
    /// Largest relative spread of strip widths for a regular line.
    pub flatness: f64,
    /// Largest direction change (degrees) between the two largest scales
    /// for a regular line.
    pub max_turn_deg: f64,
    /// Smallest log-log growth exponent of the width for a chaotic line.
    pub min_exponent: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            resolution: 8.0,
            center: [0.0, 0.0],
            node_cap: DEFAULT_NODE_CAP,
            flatness: 0.2,
            max_turn_deg: 2.0,
            min_exponent: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum Verdict {
    Closed,
    OpenRegular { direction: [f64; 2], strip_width: f64 },
    OpenChaotic { width_growth_exponent: f64 },
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifiedLine {
    #[serde(skip)]
    pub contour: Contour,
    #[serde(flatten)]
    pub verdict: Verdict,
    #[serde(rename = "scales")]
    pub scales_used: Vec<f64>,
    pub strip_widths: Vec<f64>,
    pub criterion_version: &'static str,
}

/// Total-least-squares line through a point set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripFit {
    pub centroid: [f64; 2],
    /// Unit vector along the line, with a non-negative x component.
    pub direction: [f64; 2],
    /// Largest perpendicular distance of a point from the line.
    pub half_width: f64,
}

pub fn fit_strip(points: &[[f64; 2]]) -> Option<StripFit> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let cx = points.iter().map(|p| p[0]).sum::<f64>() / n;
    let cy = points.iter().map(|p| p[1]).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in points {
        let (dx, dy) = (p[0] - cx, p[1] - cy);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    // principal axis of the 2x2 scatter matrix
    let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let (s, c) = theta.sin_cos();
    let mut dir = [c, s];
    if dir[0] < 0.0 || (dir[0] == 0.0 && dir[1] < 0.0) {
        dir = [-dir[0], -dir[1]];
    }
    let half_width = points
        .iter()
        .map(|p| ((p[0] - cx) * -dir[1] + (p[1] - cy) * dir[0]).abs())
        .fold(0.0, f64::max);
    Some(StripFit {
        centroid: [cx, cy],
        direction: dir,
        half_width,
    })
}

/// Least-squares slope of `log w` against `log L`. Widths are floored at
/// `floor` (or the smallest positive double) first.
pub fn growth_exponent(scales: &[f64], widths: &[f64], floor: f64) -> f64 {
    let floor = floor.max(f64::MIN_POSITIVE);
    let xs: Vec<f64> = scales.iter().map(|l| l.ln()).collect();
    let ys: Vec<f64> = widths.iter().map(|w| w.max(floor).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Applies the regular/chaotic rules to strip fits at increasing scales.
///
/// Widths below `floor` count as `floor` when judging flatness, so a
/// straight line traced on a grid is not judged by its rounding noise.
pub fn strip_verdict(scales: &[f64], fits: &[StripFit], floor: f64, cfg: &ClassifyConfig) -> Verdict {
    if fits.len() < 2 || fits.len() != scales.len() {
        return Verdict::Indeterminate;
    }
    let widths: Vec<f64> = fits.iter().map(|f| f.half_width).collect();
    let max_w = widths.iter().cloned().fold(0.0, f64::max);
    let min_w = widths.iter().cloned().fold(f64::INFINITY, f64::min);
    let [a, b] = [fits[fits.len() - 2].direction, fits[fits.len() - 1].direction];
    let turn = (a[0] * b[0] + a[1] * b[1]).abs().min(1.0).acos().to_degrees();
    let regular = max_w - min_w < cfg.flatness * max_w.max(floor) && turn < cfg.max_turn_deg;

    let exponent = growth_exponent(scales, &widths, floor);
    let growing = widths.windows(2).all(|w| w[1] > w[0]);
    let chaotic = growing && exponent > cfg.min_exponent;

    match (regular, chaotic) {
        (true, false) => Verdict::OpenRegular {
            direction: b,
            strip_width: widths[widths.len() - 1],
        },
        (false, true) => Verdict::OpenChaotic {
            width_growth_exponent: exponent,
        },
        _ => Verdict::Indeterminate,
    }
}

/// The contour with a vertex nearest to `anchor`, if that vertex lies
/// within `tol`.
fn match_contour<'c>(cs: &'c ContourSet, anchor: [f64; 2], tol: f64) -> Option<&'c Contour> {
    let mut best: Option<(f64, &Contour)> = None;
    for c in &cs.contours {
        for p in &c.points {
            let d = (p[0] - anchor[0]).hypot(p[1] - anchor[1]);
            if d <= tol && best.map_or(true, |(bd, _)| d < bd) {
                best = Some((d, c));
            }
        }
    }
    best.map(|(_, c)| c)
}

/// Follows the open line through `seed` across growing windows and
/// classifies it.
///
/// The seed vertex nearest the window center serves as an anchor; at each
/// scale the line is the traced contour passing within `2h` of it. A line
/// that closes at some scale is `Closed`; a line that cannot be found
/// again is `Indeterminate`.
pub fn classify_line<F: ScalarField + ?Sized>(
    field: &F,
    seed: &Contour,
    half_sizes: &[f64],
    cfg: &ClassifyConfig,
) -> Result<ClassifiedLine> {
    if seed.closed {
        return Err(Error::Precondition("seed contour must be open".into()));
    }
    if seed.points.is_empty() {
        return Err(Error::Precondition("seed contour is empty".into()));
    }
    if half_sizes.len() < 3 || half_sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition(
            "need at least 3 strictly increasing window sizes".into(),
        ));
    }
    let c = cfg.center;
    let anchor = *seed
        .points
        .iter()
        .min_by(|a, b| {
            let da = (a[0] - c[0]).hypot(a[1] - c[1]);
            let db = (b[0] - c[0]).hypot(b[1] - c[1]);
            da.total_cmp(&db)
        })
        .expect("non-empty seed");

    let mut fits = Vec::with_capacity(half_sizes.len());
    let mut h_max: f64 = 0.0;
    let mut verdict = None;
    for &l in half_sizes {
        let w = Window::with_resolution(c, l, cfg.resolution)?;
        let grid = SampledGrid::sample(field, w, cfg.node_cap)?;
        let cs = grid.contours(seed.level);
        h_max = h_max.max(w.h());
        match match_contour(&cs, anchor, 2.0 * w.h()) {
            None => {
                verdict = Some(Verdict::Indeterminate);
                break;
            }
            Some(line) if line.closed => {
                verdict = Some(Verdict::Closed);
                break;
            }
            Some(line) => fits.push(fit_strip(&line.points).expect("traced lines have two points")),
        }
    }
    let verdict =
        verdict.unwrap_or_else(|| strip_verdict(half_sizes, &fits, 2.0 * h_max, cfg));
    Ok(ClassifiedLine {
        contour: seed.clone(),
        verdict,
        scales_used: half_sizes[..fits.len().max(1).min(half_sizes.len())].to_vec(),
        strip_widths: fits.iter().map(|f| f.half_width).collect(),
        criterion_version: CRITERION_VERSION,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorCurve {
    pub points: Vec<[f64; 2]>,
    /// In `1..=2n`.
    pub sector_index: usize,
    pub min_dist_to_center: f64,
}

fn radius(p: [f64; 2], c: [f64; 2]) -> f64 {
    (p[0] - c[0]).hypot(p[1] - c[1])
}

/// Pieces of level lines inside single sectors, away from the center.
///
/// A piece is a maximal run of contour vertices lying in one open sector
/// with `R < |p − O| < ρ`, where `ρ = L − h` is the radius of the largest
/// disc that fits in the window. Clipping by a disc rather than the square
/// window keeps the extraction equivariant under the symmetry group. A
/// piece is kept when it comes within `1.5R` of the inner disc and leaves
/// through the outer circle.
pub fn extract_sector_curves(
    cs: &ContourSet,
    d: &DihedralDescriptor,
    r: f64,
) -> Result<Vec<SectorCurve>> {
    let w = &cs.window;
    let scale = 1.0 + w.center[0].abs().max(w.center[1].abs());
    if (w.center[0] - d.center[0]).abs() > 1e-9 * scale
        || (w.center[1] - d.center[1]).abs() > 1e-9 * scale
    {
        return Err(Error::Precondition(
            "window must be centered at the symmetry center".into(),
        ));
    }
    if !(r > 0.0 && w.half_size > 2.0 * r) {
        return Err(Error::Precondition("need 0 < 2R < L".into()));
    }
    let rho = w.half_size - w.h();
    let o = d.center;
    let mut out = Vec::new();
    for c in &cs.contours {
        let mut pts: &[[f64; 2]] = &c.points;
        let rotated;
        if c.closed {
            // drop the repeated point and start outside every piece
            let ring = &c.points[..c.points.len() - 1];
            let label = |p: [f64; 2]| {
                let rr = radius(p, o);
                if rr > r && rr < rho {
                    d.sector_of(p)
                } else {
                    None
                }
            };
            let Some(start) = ring.iter().position(|&p| label(p).is_none()) else {
                continue;
            };
            rotated = ring[start..]
                .iter()
                .chain(&ring[..=start])
                .copied()
                .collect::<Vec<_>>();
            pts = &rotated;
        }
        let labels: Vec<Option<usize>> = pts
            .iter()
            .map(|&p| {
                let rr = radius(p, o);
                if rr > r && rr < rho {
                    d.sector_of(p)
                } else {
                    None
                }
            })
            .collect();
        let mut k = 0;
        while k < pts.len() {
            let Some(s) = labels[k] else {
                k += 1;
                continue;
            };
            let start = k;
            while k < pts.len() && labels[k] == Some(s) {
                k += 1;
            }
            let run = &pts[start..k];
            let exits = (start > 0 && radius(pts[start - 1], o) >= rho)
                || (k < pts.len() && radius(pts[k], o) >= rho);
            let min_r = run.iter().map(|&p| radius(p, o)).fold(f64::INFINITY, f64::min);
            if exits && min_r - r <= 1.5 * r {
                out.push(SectorCurve {
                    points: run.to_vec(),
                    sector_index: s,
                    min_dist_to_center: min_r,
                });
            }
        }
    }
    Ok(out)
}

/// Segments of a contour set bucketed by grid cell.
struct SegmentIndex {
    origin: [f64; 2],
    cell: f64,
    cols: usize,
    rows: usize,
    offsets: Vec<u32>,
    segs: Vec<[[f64; 2]; 2]>,
}

impl SegmentIndex {
    fn new(cs: &ContourSet) -> Self {
        let r = cs.window.rect();
        let cell = cs.window.h();
        let cols = cs.window.nx.max(2) - 1;
        let rows = cs.window.ny.max(2) - 1;
        let mut all: Vec<(usize, [[f64; 2]; 2])> = Vec::new();
        let origin = [r.x_min, r.y_min];
        for c in &cs.contours {
            for s in c.points.windows(2) {
                let m = [0.5 * (s[0][0] + s[1][0]), 0.5 * (s[0][1] + s[1][1])];
                let i = (((m[0] - origin[0]) / cell).floor().max(0.0) as usize).min(cols - 1);
                let j = (((m[1] - origin[1]) / cell).floor().max(0.0) as usize).min(rows - 1);
                all.push((j * cols + i, [s[0], s[1]]));
            }
        }
        all.sort_by_key(|e| e.0);
        let mut offsets = vec![0u32; cols * rows + 1];
        for (b, _) in &all {
            offsets[b + 1] += 1;
        }
        for k in 0..cols * rows {
            offsets[k + 1] += offsets[k];
        }
        Self {
            origin,
            cell,
            cols,
            rows,
            offsets,
            segs: all.into_iter().map(|e| e.1).collect(),
        }
    }

    /// Distance from `p` to the nearest segment, searching up to `rings`
    /// cells away; infinite when nothing is that close.
    fn distance(&self, p: [f64; 2], rings: i64) -> f64 {
        let ci = ((p[0] - self.origin[0]) / self.cell).floor() as i64;
        let cj = ((p[1] - self.origin[1]) / self.cell).floor() as i64;
        let mut best = f64::INFINITY;
        for j in cj - rings..=cj + rings {
            for i in ci - rings..=ci + rings {
                if i < 0 || j < 0 || i >= self.cols as i64 || j >= self.rows as i64 {
                    continue;
                }
                let b = j as usize * self.cols + i as usize;
                for s in &self.segs[self.offsets[b] as usize..self.offsets[b + 1] as usize] {
                    best = best.min(point_segment_distance(p, s[0], s[1]));
                }
            }
        }
        best
    }
}

fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
    };
    (p[0] - a[0] - t * dx).hypot(p[1] - a[1] - t * dy)
}

/// Inverse of [`DihedralDescriptor::to_first_sector`].
fn from_first_sector(d: &DihedralDescriptor, p: [f64; 2], sector: usize) -> [f64; 2] {
    if sector % 2 == 1 {
        d.rotate(p, (sector as i64 - 1) / 2)
    } else {
        d.reflect(p, (sector / 2) % d.n)
    }
}

/// Largest distance from an image of a sector-curve vertex under the
/// symmetry group to the traced level set `cs`.
///
/// Every vertex is carried into each of the `2n` sectors; for an
/// equivariant extraction all images lie on traced lines up to grid error.
pub fn sector_equivariance_error(
    cs: &ContourSet,
    d: &DihedralDescriptor,
    curves: &[SectorCurve],
) -> f64 {
    let index = SegmentIndex::new(cs);
    curves
        .par_iter()
        .map(|c| {
            let mut worst: f64 = 0.0;
            for &p in &c.points {
                let q = d.to_first_sector(p, c.sector_index);
                for s in 1..=2 * d.n {
                    let img = from_first_sector(d, q, s);
                    worst = worst.max(index.distance(img, 4));
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiameterEntry {
    pub eps: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub saturated: bool,
    #[serde(rename = "L_max")]
    pub l_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiameterCurve {
    pub entries: Vec<DiameterEntry>,
}

impl DiameterCurve {
    /// CSV with header `eps,D,saturated,L_max`.
    pub fn to_csv_with(&self, fmt: impl Fn(f64) -> String) -> String {
        let mut out = String::from("eps,D,saturated,L_max\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{}\n",
                fmt(e.eps),
                fmt(e.d),
                e.saturated,
                fmt(e.l_max)
            ));
        }
        out
    }
}

/// Relative change below which a diameter counts as saturated.
pub const SATURATION_TOL: f64 = 0.05;

/// Largest closed-line diameter at each level, on windows of increasing
/// half size around `center`.
///
/// `D` is read off the largest window; it is saturated when it differs by
/// less than 5% from the value on the second largest window.
pub fn measure_d_of_eps<F: ScalarField + ?Sized>(
    field: &F,
    center: [f64; 2],
    eps_list: &[f64],
    half_sizes: &[f64],
    resolution: f64,
    node_cap: usize,
) -> Result<DiameterCurve> {
    if half_sizes.len() < 2 || half_sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition(
            "need at least 2 strictly increasing window sizes".into(),
        ));
    }
    if eps_list.iter().any(|e| !e.is_finite()) {
        return Err(Error::invalid("levels must be finite"));
    }
    let tail = &half_sizes[half_sizes.len() - 2..];
    let mut per_scale = Vec::with_capacity(2);
    for &l in tail {
        let w = Window::with_resolution(center, l, resolution)?;
        let grid = SampledGrid::sample(field, w, node_cap)?;
        let ds: Vec<f64> = eps_list
            .par_iter()
            .map(|&e| {
                grid.contours(e)
                    .closed()
                    .map(|c| diameter(&c.points))
                    .fold(0.0, f64::max)
            })
            .collect();
        per_scale.push(ds);
    }
    let l_max = tail[1];
    let entries = eps_list
        .iter()
        .enumerate()
        .map(|(k, &eps)| {
            let (prev, d) = (per_scale[0][k], per_scale[1][k]);
            DiameterEntry {
                eps,
                d,
                saturated: d > 0.0 && (d - prev).abs() < SATURATION_TOL * d,
                l_max,
            }
        })
        .collect();
    Ok(DiameterCurve { entries })
}
