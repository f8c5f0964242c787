//! Level lines `V = ε` inside a square window.
//!
//! The field is sampled on the window's nodes, and along every grid edge
//! the interior extremum of the field (if any) is located from its
//! derivatives. A cell's boundary loop is thus its four corners plus up to
//! four edge extrema. Level crossings on the loop are placed by linear
//! interpolation between neighbouring loop points, paired into segments
//! inside each cell, and linked into maximal polylines.
//!
//! Conventions shared by tracing and by the crossing tests:
//!
//! - a point is *high* when `v ≥ ε`, so a value exactly equal to `ε`
//!   behaves as `ε + η` for an infinitesimal `η > 0`;
//! - when a loop has more than two crossings, either its high arcs or its
//!   low arcs are joined inside the cell. Chords between the arcs' extreme
//!   points settle most cases; the rest are decided by the saddle value
//!   found by Newton's method, or by the value where the chords cross.
//!
//! Edge extrema catch ridges and valleys narrower than the grid spacing,
//! which plain node sampling misses at levels near their crest.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::potential::{node_coord, sample_field, Rect, ScalarGrid};

/// Default bound on grid size for a single trace.
pub const DEFAULT_NODE_CAP: usize = 200_000_000;

const NONE: u32 = u32::MAX;
const MAX_NEWTON: usize = 12;
const GOLDEN_STEPS: usize = 24;

/// Square viewport `[cx − L, cx + L] × [cy − L, cy + L]` sampled by
/// `nx × ny` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub center: [f64; 2],
    pub half_size: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Window {
    pub fn new(center: [f64; 2], half_size: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(half_size.is_finite() && half_size > 0.0) {
            return Err(Error::invalid("window half size must be positive"));
        }
        if !(center[0].is_finite() && center[1].is_finite()) {
            return Err(Error::invalid("window center must be finite"));
        }
        if nx < 2 || ny < 2 {
            return Err(Error::invalid("window needs at least 2 nodes per axis"));
        }
        Ok(Self {
            center,
            half_size,
            nx,
            ny,
        })
    }

    /// Window with `round(2L·resolution) + 1` nodes per axis, so the
    /// spacing is `1/resolution` whenever `2L·resolution` is an integer.
    pub fn with_resolution(center: [f64; 2], half_size: f64, resolution: f64) -> Result<Self> {
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(Error::invalid("resolution must be positive"));
        }
        let span = (2.0 * half_size * resolution).round();
        if !(span.is_finite() && span >= 1.0 && span < u32::MAX as f64) {
            return Err(Error::invalid("window resolution out of range"));
        }
        let n = span as usize + 1;
        Self::new(center, half_size, n, n)
    }

    pub fn rect(&self) -> Rect {
        let l = self.half_size;
        Rect {
            x_min: self.center[0] - l,
            x_max: self.center[0] + l,
            y_min: self.center[1] - l,
            y_max: self.center[1] + l,
        }
    }

    /// Grid spacing `(hx, hy)`.
    pub fn spacing(&self) -> (f64, f64) {
        self.rect().spacing(self.nx, self.ny)
    }

    /// The larger of the two spacings.
    pub fn h(&self) -> f64 {
        let (hx, hy) = self.spacing();
        hx.max(hy)
    }

    pub fn node_count(&self) -> u128 {
        self.nx as u128 * self.ny as u128
    }

    pub fn node(&self, i: usize, j: usize) -> [f64; 2] {
        let r = self.rect();
        let (hx, hy) = self.spacing();
        [node_coord(r.x_min, hx, i), node_coord(r.y_min, hy, j)]
    }

    fn cell_center(&self, i: usize, j: usize) -> [f64; 2] {
        let r = self.rect();
        let (hx, hy) = self.spacing();
        [
            r.x_min + (i as f64 + 0.5) * hx,
            r.y_min + (j as f64 + 0.5) * hy,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
            Side::Bottom => Side::Top,
            Side::Top => Side::Bottom,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub point: [f64; 2],
    pub side: Side,
}

/// A traced level line. Closed contours repeat their first point at the end;
/// open ones run between two window-boundary points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub level: f64,
    pub points: Vec<[f64; 2]>,
    pub closed: bool,
    pub boundary_endpoints: Vec<BoundaryPoint>,
}

impl Contour {
    /// Connects opposite window sides.
    pub fn is_spanning(&self) -> bool {
        match self.boundary_endpoints.as_slice() {
            [a, b] => a.side.opposite() == b.side,
            _ => false,
        }
    }

    pub fn length(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| dist(w[0], w[1]))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourSet {
    pub window: Window,
    pub level: f64,
    pub contours: Vec<Contour>,
    pub spanning: bool,
}

impl ContourSet {
    pub fn closed(&self) -> impl Iterator<Item = &Contour> {
        self.contours.iter().filter(|c| c.closed)
    }

    pub fn open(&self) -> impl Iterator<Item = &Contour> {
        self.contours.iter().filter(|c| !c.closed)
    }

    /// CSV with header `contour_id,point_index,x,y,closed,level`, numbers
    /// written by `fmt`.
    pub fn to_csv_with(&self, fmt: impl Fn(f64) -> String) -> String {
        let mut out = String::from("contour_id,point_index,x,y,closed,level\n");
        for (id, c) in self.contours.iter().enumerate() {
            let closed = if c.closed { 1 } else { 0 };
            let level = fmt(c.level);
            for (k, p) in c.points.iter().enumerate() {
                out.push_str(&format!(
                    "{id},{k},{},{},{closed},{level}\n",
                    fmt(p[0]),
                    fmt(p[1])
                ));
            }
        }
        out
    }
}

/// Which superlevel/sublevel set a crossing test follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    /// `{V ≥ ε}`
    High,
    /// `{V < ε}`
    Low,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    /// left side to right side
    Horizontal,
    /// bottom side to top side
    Vertical,
}

/// Interior extremum of the field along one grid edge, at fraction `t` of
/// the way from the edge's first node; `t` is NaN when there is none.
#[derive(Debug, Clone, Copy)]
struct EdgeExtremum {
    t: f64,
    v: f64,
}

const NO_EXTREMUM: EdgeExtremum = EdgeExtremum { t: f64::NAN, v: f64::NAN };

impl EdgeExtremum {
    #[inline]
    fn exists(&self) -> bool {
        !self.t.is_nan()
    }
}

/// Locates the critical point of the field restricted to the edge from
/// `start` along coordinate `axis` over length `len`, given the directional
/// derivatives `d0`, `d1` at its two nodes. Safeguarded Newton on the
/// derivative, bracketed by the sign change.
fn edge_extremum<F: ScalarField + ?Sized>(
    field: &F,
    start: [f64; 2],
    axis: usize,
    len: f64,
    d0: f64,
    d1: f64,
    step: f64,
) -> EdgeExtremum {
    if !((d0 > 0.0 && d1 < 0.0) || (d0 < 0.0 && d1 > 0.0)) {
        return NO_EXTREMUM;
    }
    let at = |s: f64| {
        let mut p = start;
        p[axis] += s;
        p
    };
    let rising = d0 > 0.0;
    let (mut lo, mut hi) = (0.0, len);
    let mut s = len * d0 / (d0 - d1);
    for _ in 0..60 {
        let p = at(s);
        let (g, h) = field.derivatives(p[0], p[1], step);
        let (gs, gss) = (g[axis], h[2 * axis]);
        if gs == 0.0 {
            break;
        }
        if (gs > 0.0) == rising {
            lo = s;
        } else {
            hi = s;
        }
        let mut next = s - gs / gss;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let done = (next - s).abs() <= 1e-12 * len || hi - lo <= 1e-12 * len;
        s = next;
        if done {
            break;
        }
    }
    let p = at(s);
    EdgeExtremum {
        t: s / len,
        v: field.value(p[0], p[1]),
    }
}

/// One point of a cell's boundary loop: its value, the connectivity unit it
/// belongs to, and the crossing id of the gap to the next point.
#[derive(Debug, Clone, Copy, Default)]
struct LoopPoint {
    v: f64,
    unit: u32,
    gap: u32,
}

struct UnionFind(Vec<u32>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n as u32).collect())
    }

    fn find(&mut self, mut a: u32) -> u32 {
        while self.0[a as usize] != a {
            let up = self.0[self.0[a as usize] as usize];
            self.0[a as usize] = up;
            a = up;
        }
        a
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi as usize] = lo;
        }
    }
}

/// A field sampled on a window's nodes, reusable for any number of levels.
pub struct SampledGrid<'a, F: ScalarField + ?Sized> {
    field: &'a F,
    window: Window,
    grid: ScalarGrid,
    extrema: Vec<EdgeExtremum>,
}

impl<'a, F: ScalarField + ?Sized> SampledGrid<'a, F> {
    pub fn sample(field: &'a F, window: Window, node_cap: usize) -> Result<Self> {
        if window.node_count() > node_cap as u128 {
            return Err(Error::ResourceCap {
                nodes: window.node_count(),
                cap: node_cap as u128,
            });
        }
        let grid = sample_field(field, &window.rect(), window.nx, window.ny)?;
        let extrema = Self::find_extrema(field, &window);
        Ok(Self {
            field,
            window,
            grid,
            extrema,
        })
    }

    fn find_extrema(field: &F, w: &Window) -> Vec<EdgeExtremum> {
        let (nx, ny) = (w.nx, w.ny);
        let (hx, hy) = w.spacing();
        let r = w.rect();
        let step = 1e-3 * hx.min(hy);
        let mut grads = vec![[0.0; 2]; nx * ny];
        grads.par_chunks_mut(nx).enumerate().for_each(|(j, row)| {
            let y = node_coord(r.y_min, hy, j);
            for (i, g) in row.iter_mut().enumerate() {
                *g = field.gradient(node_coord(r.x_min, hx, i), y, step);
            }
        });
        let nh = (nx - 1) * ny;
        let mut out = vec![NO_EXTREMUM; nh + nx * (ny - 1)];
        let (horizontal, vertical) = out.split_at_mut(nh);
        horizontal.par_chunks_mut(nx - 1).enumerate().for_each(|(j, row)| {
            let y = node_coord(r.y_min, hy, j);
            for (i, e) in row.iter_mut().enumerate() {
                let (d0, d1) = (grads[j * nx + i][0], grads[j * nx + i + 1][0]);
                *e = edge_extremum(field, [node_coord(r.x_min, hx, i), y], 0, hx, d0, d1, step);
            }
        });
        vertical.par_chunks_mut(nx).enumerate().for_each(|(j, row)| {
            let y = node_coord(r.y_min, hy, j);
            for (i, e) in row.iter_mut().enumerate() {
                let (d0, d1) = (grads[j * nx + i][1], grads[(j + 1) * nx + i][1]);
                *e = edge_extremum(field, [node_coord(r.x_min, hx, i), y], 1, hy, d0, d1, step);
            }
        });
        out
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn values(&self) -> &ScalarGrid {
        &self.grid
    }

    #[inline]
    fn v(&self, i: usize, j: usize) -> f64 {
        self.grid.values[j * self.window.nx + i]
    }

    /// Field value at the saddle point of cell `(i, j)`, when Newton's
    /// method started at the cell center converges to one inside the cell.
    fn saddle_value(&self, i: usize, j: usize) -> Option<f64> {
        let c = self.window.cell_center(i, j);
        let (hx, hy) = self.window.spacing();
        let step = 1e-3 * hx.min(hy);
        let mut r = c;
        for _ in 0..MAX_NEWTON {
            let (g, h) = self.field.derivatives(r[0], r[1], step);
            let det = h[0] * h[2] - h[1] * h[1];
            if !(det < 0.0) {
                return None;
            }
            let dx = -(h[2] * g[0] - h[1] * g[1]) / det;
            let dy = -(h[0] * g[1] - h[1] * g[0]) / det;
            r = [r[0] + dx, r[1] + dy];
            if (r[0] - c[0]).abs() > 0.5 * hx || (r[1] - c[1]).abs() > 0.5 * hy {
                return None;
            }
            if dx.abs() <= 1e-9 * hx && dy.abs() <= 1e-9 * hy {
                return Some(self.field.value(r[0], r[1]));
            }
        }
        None
    }

    /// The saddle value of the cell, or the field at its center.
    fn center_value(&self, i: usize, j: usize) -> f64 {
        self.saddle_value(i, j).unwrap_or_else(|| {
            let c = self.window.cell_center(i, j);
            self.field.value(c[0], c[1])
        })
    }

    /// Position of a loop unit: a node, or the extremum on an edge.
    fn unit_point(&self, unit: u32) -> [f64; 2] {
        let nx = self.window.nx;
        let nn = nx * self.window.ny;
        let u = unit as usize;
        if u < nn {
            return self.window.node(u % nx, u / nx);
        }
        let (a, b) = self.edge_nodes(u - nn);
        let (pa, pb) = (self.window.node(a.0, a.1), self.window.node(b.0, b.1));
        let t = self.extrema[u - nn].t;
        [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])]
    }

    /// Smallest (`sign = 1`) or largest (`sign = −1`) value on the chord
    /// from `a` to `b`, by golden-section search. Stops early once the
    /// chord is known to pass the level on the wrong side.
    fn chord_extreme(&self, a: [f64; 2], b: [f64; 2], sign: f64, stop: f64) -> f64 {
        let at = |t: f64| {
            let p = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
            sign * self.field.value(p[0], p[1])
        };
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut lo, mut hi) = (0.0, 1.0);
        let (mut t1, mut t2) = (hi - g * (hi - lo), lo + g * (hi - lo));
        let (mut f1, mut f2) = (at(t1), at(t2));
        for _ in 0..GOLDEN_STEPS {
            if f1.min(f2) < stop {
                break;
            }
            if f1 <= f2 {
                hi = t2;
                (t2, f2) = (t1, f1);
                t1 = hi - g * (hi - lo);
                f1 = at(t1);
            } else {
                lo = t1;
                (t1, f1) = (t2, f2);
                t2 = lo + g * (hi - lo);
                f2 = at(t2);
            }
        }
        sign * f1.min(f2)
    }

    /// Whether the high arcs of an ambiguous cell are joined inside it.
    ///
    /// With two arcs of each kind the chord between the two high peaks and
    /// the chord between the two low troughs cross, so the chord minimum of
    /// the first is at most the chord maximum of the second. A chord that
    /// stays on its own side settles the case; otherwise the saddle value
    /// decides, or without a saddle in the cell the value where the chords
    /// cross.
    fn joins_high(&self, i: usize, j: usize, eps: f64, lp: &[LoopPoint]) -> bool {
        let len = lp.len();
        let start = (0..len).find(|&m| (lp[m].v >= eps) != (lp[(m + len - 1) % len].v >= eps));
        let Some(start) = start else {
            return self.center_value(i, j) >= eps;
        };
        // extreme point of each arc, in loop order
        let mut reps: Vec<(bool, usize)> = Vec::with_capacity(4);
        for k in 0..len {
            let m = (start + k) % len;
            let high = lp[m].v >= eps;
            match reps.last_mut() {
                Some((h, best)) if *h == high => {
                    let better = if high { lp[m].v > lp[*best].v } else { lp[m].v < lp[*best].v };
                    if better {
                        *best = m;
                    }
                }
                _ => reps.push((high, m)),
            }
        }
        if reps.len() != 4 {
            return self.center_value(i, j) >= eps;
        }
        let pt = |k: usize| self.unit_point(lp[reps[k].1].unit);
        let (h1, l1, h2, l2) = if reps[0].0 { (0, 1, 2, 3) } else { (1, 0, 3, 2) };
        let (ph1, ph2, pl1, pl2) = (pt(h1), pt(h2), pt(l1), pt(l2));
        if self.chord_extreme(ph1, ph2, 1.0, eps) >= eps {
            return true;
        }
        if self.chord_extreme(pl1, pl2, -1.0, -eps) < eps {
            return false;
        }
        if let Some(s) = self.saddle_value(i, j) {
            return s >= eps;
        }
        // crossing of the two chords
        let d1 = [ph2[0] - ph1[0], ph2[1] - ph1[1]];
        let d2 = [pl2[0] - pl1[0], pl2[1] - pl1[1]];
        let den = d1[0] * d2[1] - d1[1] * d2[0];
        if den == 0.0 {
            return self.center_value(i, j) >= eps;
        }
        let t = ((pl1[0] - ph1[0]) * d2[1] - (pl1[1] - ph1[1]) * d2[0]) / den;
        let t = t.clamp(0.0, 1.0);
        self.field.value(ph1[0] + t * d1[0], ph1[1] + t * d1[1]) >= eps
    }

    fn edge_count_h(&self) -> usize {
        (self.window.nx - 1) * self.window.ny
    }

    /// The two nodes of a global edge id.
    fn edge_nodes(&self, edge: usize) -> ((usize, usize), (usize, usize)) {
        let nx = self.window.nx;
        let nh = self.edge_count_h();
        if edge < nh {
            let (i, j) = (edge % (nx - 1), edge / (nx - 1));
            ((i, j), (i + 1, j))
        } else {
            let e = edge - nh;
            let (i, j) = (e % nx, e / nx);
            ((i, j), (i, j + 1))
        }
    }

    /// Point of crossing `id = 2·edge + slot`. Slot 0 lies between the
    /// first node and the edge extremum (or the second node when there is
    /// none), slot 1 between the extremum and the second node.
    fn edge_point(&self, id: u32, eps: f64) -> [f64; 2] {
        let edge = (id / 2) as usize;
        let (a, b) = self.edge_nodes(edge);
        let (pa, pb) = (self.window.node(a.0, a.1), self.window.node(b.0, b.1));
        let (va, vb) = (self.v(a.0, a.1), self.v(b.0, b.1));
        let ext = self.extrema[edge];
        let ((p0, v0), (p1, v1)) = if ext.exists() {
            let pm = [pa[0] + ext.t * (pb[0] - pa[0]), pa[1] + ext.t * (pb[1] - pa[1])];
            if id % 2 == 0 {
                ((pa, va), (pm, ext.v))
            } else {
                ((pm, ext.v), (pb, vb))
            }
        } else {
            ((pa, va), (pb, vb))
        };
        let t = (eps - v0) / (v1 - v0);
        [p0[0] + t * (p1[0] - p0[0]), p0[1] + t * (p1[1] - p0[1])]
    }

    fn edge_side(&self, edge: usize) -> Option<Side> {
        let nx = self.window.nx;
        let ny = self.window.ny;
        let nh = self.edge_count_h();
        if edge < nh {
            let j = edge / (nx - 1);
            if j == 0 {
                Some(Side::Bottom)
            } else if j == ny - 1 {
                Some(Side::Top)
            } else {
                None
            }
        } else {
            let i = (edge - nh) % nx;
            if i == 0 {
                Some(Side::Left)
            } else if i == nx - 1 {
                Some(Side::Right)
            } else {
                None
            }
        }
    }

    /// Boundary loop of cell `(i, j)`, counter-clockwise from its lower left
    /// node, with edge extrema between the corners. Units are node indices,
    /// or `nodes + edge` for an extremum.
    fn cell_loop(&self, i: usize, j: usize, out: &mut [LoopPoint; 8]) -> usize {
        let nx = self.window.nx;
        let nn = (nx * self.window.ny) as u32;
        let nh = self.edge_count_h();
        let n0 = j * nx + i;
        let sides = [
            (j * (nx - 1) + i, true, n0),
            (nh + j * nx + i + 1, true, n0 + 1),
            ((j + 1) * (nx - 1) + i, false, n0 + nx + 1),
            (nh + j * nx + i, false, n0 + nx),
        ];
        let mut len = 0;
        for (edge, forward, node) in sides {
            let ext = self.extrema[edge];
            let e2 = 2 * edge as u32;
            if ext.exists() {
                out[len] = LoopPoint {
                    v: self.grid.values[node],
                    unit: node as u32,
                    gap: e2 + !forward as u32,
                };
                out[len + 1] = LoopPoint {
                    v: ext.v,
                    unit: nn + edge as u32,
                    gap: e2 + forward as u32,
                };
                len += 2;
            } else {
                out[len] = LoopPoint {
                    v: self.grid.values[node],
                    unit: node as u32,
                    gap: e2,
                };
                len += 1;
            }
        }
        len
    }

    /// Segments as pairs of crossing ids, in cell order.
    ///
    /// Around each cell the level crossings split the boundary into arcs
    /// that alternate high and low. With two crossings they pair up. With
    /// more, the arcs on the side of the deciding value are joined inside
    /// the cell, so every arc of the other side is cut off by a segment
    /// between its two ends.
    fn segments(&self, eps: f64) -> Vec<[u32; 2]> {
        let nx = self.window.nx;
        let ny = self.window.ny;
        let mut segs = Vec::new();
        let mut lp = [LoopPoint::default(); 8];
        let mut cross: Vec<(u32, bool)> = Vec::with_capacity(8);
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                let len = self.cell_loop(i, j, &mut lp);
                cross.clear();
                for m in 0..len {
                    let next = lp[(m + 1) % len].v >= eps;
                    if (lp[m].v >= eps) != next {
                        cross.push((lp[m].gap, next));
                    }
                }
                match cross.len() {
                    0 => {}
                    2 => segs.push([cross[0].0, cross[1].0]),
                    k => {
                        let joined_high = self.joins_high(i, j, eps, &lp[..len]);
                        for c in 0..k {
                            if cross[c].1 != joined_high {
                                segs.push([cross[c].0, cross[(c + 1) % k].0]);
                            }
                        }
                    }
                }
            }
        }
        segs
    }

    /// Traces every level line at `eps`.
    pub fn contours(&self, eps: f64) -> ContourSet {
        let segs = self.segments(eps);
        let n_ends = segs.len() * 2;
        let mut ends: Vec<(u32, u32)> = segs
            .iter()
            .enumerate()
            .flat_map(|(s, e)| [(e[0], 2 * s as u32), (e[1], 2 * s as u32 + 1)])
            .collect();
        ends.sort_unstable();
        let mut link = vec![NONE; n_ends];
        for w in ends.windows(2) {
            if w[0].0 == w[1].0 {
                link[w[0].1 as usize] = w[1].1;
                link[w[1].1 as usize] = w[0].1;
            }
        }
        let id_of = |end: u32| segs[(end / 2) as usize][(end % 2) as usize];

        let mut used = vec![false; segs.len()];
        let mut contours = Vec::new();

        // open lines start at dangling ends, which lie on the boundary
        for start in 0..n_ends as u32 {
            if link[start as usize] != NONE || used[(start / 2) as usize] {
                continue;
            }
            let mut pts = vec![self.edge_point(id_of(start), eps)];
            let mut end = start;
            loop {
                used[(end / 2) as usize] = true;
                let out = end ^ 1;
                pts.push(self.edge_point(id_of(out), eps));
                let next = link[out as usize];
                if next == NONE {
                    let bp = |e: u32, p: [f64; 2]| BoundaryPoint {
                        point: p,
                        side: self
                            .edge_side((id_of(e) / 2) as usize)
                            .expect("dangling end off the boundary"),
                    };
                    let first = bp(start, pts[0]);
                    let last = bp(out, *pts.last().unwrap());
                    contours.push(Contour {
                        level: eps,
                        points: pts,
                        closed: false,
                        boundary_endpoints: vec![first, last],
                    });
                    break;
                }
                end = next;
            }
        }

        for s in 0..segs.len() {
            if used[s] {
                continue;
            }
            let start = 2 * s as u32;
            let mut pts = vec![self.edge_point(id_of(start), eps)];
            let mut end = start;
            loop {
                used[(end / 2) as usize] = true;
                let out = end ^ 1;
                let next = link[out as usize];
                debug_assert_ne!(next, NONE);
                if next == start {
                    pts.push(pts[0]);
                    break;
                }
                pts.push(self.edge_point(id_of(out), eps));
                end = next;
            }
            contours.push(Contour {
                level: eps,
                points: pts,
                closed: true,
                boundary_endpoints: Vec::new(),
            });
        }

        let spanning = contours.iter().any(Contour::is_spanning);
        ContourSet {
            window: self.window,
            level: eps,
            contours,
            spanning,
        }
    }

    #[inline]
    fn in_phase(v: f64, eps: f64, phase: Phase) -> bool {
        match phase {
            Phase::High => v >= eps,
            Phase::Low => v < eps,
        }
    }

    /// Whether the superlevel (`High`) or sublevel (`Low`) set at `eps`
    /// connects the two window sides across `axis`.
    ///
    /// Connectivity matches the tracer: consecutive same-side points of a
    /// cell loop are joined, and so are all arcs of an ambiguous cell on
    /// the side of its deciding value.
    pub fn crosses(&self, eps: f64, phase: Phase, axis: Axis) -> bool {
        let nx = self.window.nx;
        let ny = self.window.ny;
        let nn = nx * ny;
        let nh = self.edge_count_h();
        let mut uf = UnionFind::new(nn + self.extrema.len());
        let mut lp = [LoopPoint::default(); 8];
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                let len = self.cell_loop(i, j, &mut lp);
                let mut flips = 0;
                let mut any = false;
                for m in 0..len {
                    let here = Self::in_phase(lp[m].v, eps, phase);
                    any |= here;
                    if here != Self::in_phase(lp[(m + 1) % len].v, eps, phase) {
                        flips += 1;
                    }
                }
                if !any {
                    continue;
                }
                if flips > 2 && self.joins_high(i, j, eps, &lp[..len]) == (phase == Phase::High) {
                    let mut first = None;
                    for p in &lp[..len] {
                        if Self::in_phase(p.v, eps, phase) {
                            match first {
                                None => first = Some(p.unit),
                                Some(f) => uf.union(f, p.unit),
                            }
                        }
                    }
                } else {
                    for m in 0..len {
                        let (a, b) = (lp[m], lp[(m + 1) % len]);
                        if Self::in_phase(a.v, eps, phase) && Self::in_phase(b.v, eps, phase) {
                            uf.union(a.unit, b.unit);
                        }
                    }
                }
            }
        }

        // units on each of the two sides, in phase
        let side_units = |far: bool| -> Vec<u32> {
            let mut units = Vec::new();
            let (count, node, edge): (usize, Box<dyn Fn(usize) -> usize>, Box<dyn Fn(usize) -> usize>) =
                match axis {
                    Axis::Horizontal => {
                        let i = if far { nx - 1 } else { 0 };
                        (ny, Box::new(move |j| j * nx + i), Box::new(move |j| nh + j * nx + i))
                    }
                    Axis::Vertical => {
                        let j = if far { ny - 1 } else { 0 };
                        (nx, Box::new(move |i| j * nx + i), Box::new(move |i| j * (nx - 1) + i))
                    }
                };
            for k in 0..count {
                let n = node(k);
                if Self::in_phase(self.grid.values[n], eps, phase) {
                    units.push(n as u32);
                }
                if k + 1 < count {
                    let e = edge(k);
                    let ext = self.extrema[e];
                    if ext.exists() && Self::in_phase(ext.v, eps, phase) {
                        units.push((nn + e) as u32);
                    }
                }
            }
            units
        };
        let mut near: Vec<u32> = side_units(false).into_iter().map(|u| uf.find(u)).collect();
        near.sort_unstable();
        side_units(true)
            .into_iter()
            .any(|u| near.binary_search(&uf.find(u)).is_ok())
    }

    /// Spanning test through set connectivity instead of line tracing:
    /// a level line joins two opposite sides exactly when the high and the
    /// low set both cross in that direction.
    pub fn spans_by_crossing(&self, eps: f64) -> bool {
        self.crosses(eps, Phase::High, Axis::Horizontal)
            == self.crosses(eps, Phase::Low, Axis::Horizontal)
    }
}

/// Samples `field` on `w` and traces the level `eps`.
pub fn trace_level<F: ScalarField + ?Sized>(field: &F, w: &Window, eps: f64) -> Result<ContourSet> {
    trace_level_capped(field, w, eps, DEFAULT_NODE_CAP)
}

pub fn trace_level_capped<F: ScalarField + ?Sized>(
    field: &F,
    w: &Window,
    eps: f64,
    node_cap: usize,
) -> Result<ContourSet> {
    if !eps.is_finite() {
        return Err(Error::invalid("level must be finite"));
    }
    Ok(SampledGrid::sample(field, *w, node_cap)?.contours(eps))
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Convex hull by Andrew's monotone chain, counter-clockwise.
fn convex_hull(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Largest pairwise distance among `points`.
pub fn diameter(points: &[[f64; 2]]) -> f64 {
    let hull = convex_hull(points);
    let mut best: f64 = 0.0;
    for (k, &a) in hull.iter().enumerate() {
        for &b in &hull[k + 1..] {
            best = best.max(dist(a, b));
        }
    }
    best
}

/// Diameters of the closed contours, in contour order.
pub fn component_diameters(cs: &ContourSet) -> Vec<f64> {
    cs.closed().map(|c| diameter(&c.points)).collect()
}

/// Traces one level on windows of increasing half size around `center`,
/// each sampled at `resolution` nodes per unit length.
pub fn multiscale_trace<F: ScalarField + ?Sized>(
    field: &F,
    center: [f64; 2],
    eps: f64,
    half_sizes: &[f64],
    resolution: f64,
    node_cap: usize,
) -> Result<Vec<ContourSet>> {
    if half_sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("window sizes must be strictly increasing"));
    }
    if !(resolution >= 4.0) {
        return Err(Error::invalid("resolution must be at least 4 nodes per unit"));
    }
    let windows = half_sizes
        .iter()
        .map(|&l| Window::with_resolution(center, l, resolution))
        .collect::<Result<Vec<_>>>()?;
    if let Some(w) = windows.iter().find(|w| w.node_count() > node_cap as u128) {
        return Err(Error::ResourceCap {
            nodes: w.node_count(),
            cap: node_cap as u128,
        });
    }
    windows
        .iter()
        .map(|w| trace_level_capped(field, w, eps, node_cap))
        .collect()
}
