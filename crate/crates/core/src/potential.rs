//! Periodic functions on the N-torus, plane embeddings and the quasiperiodic
//! potentials obtained by restricting one to the other.
//!
//! Frequencies are exact integer vectors in the torus lattice basis; all
//! irrationality lives in the embedding frame. Phase shifts keep their
//! integer part separately, so shifting by a lattice vector is bit-exact.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField;

const FRAME_TOL: f64 = 1e-12;
const SHIFT_LIMIT: f64 = 4.611_686_018_427_388e18; // 2^62

/// One Fourier mode `amp * cos(2π freq·z + phase)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencyTerm {
    pub freq: Vec<i64>,
    pub amp: f64,
    pub phase: f64,
}

/// Real trigonometric polynomial on R^N, periodic under Z^N.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicFunction {
    dim_n: usize,
    terms: Vec<FrequencyTerm>,
    constant: f64,
}

impl PeriodicFunction {
    /// Validates and normalizes the term list.
    ///
    /// Zero-frequency terms are folded into the constant, terms sharing a
    /// frequency are merged into a single mode, and modes with zero
    /// amplitude are dropped.
    pub fn new(dim_n: usize, terms: Vec<FrequencyTerm>, constant: f64) -> Result<Self> {
        if dim_n == 0 {
            return Err(Error::invalid("dim_n must be positive"));
        }
        if !constant.is_finite() {
            return Err(Error::invalid("constant must be finite"));
        }
        let mut constant = constant;
        let mut merged: Vec<FrequencyTerm> = Vec::with_capacity(terms.len());
        for t in terms {
            if t.freq.len() != dim_n {
                return Err(Error::DimensionMismatch {
                    expected: dim_n,
                    got: t.freq.len(),
                });
            }
            if !t.amp.is_finite() || !t.phase.is_finite() {
                return Err(Error::invalid("term amplitude and phase must be finite"));
            }
            if t.freq.iter().all(|&k| k == 0) {
                constant += t.amp * t.phase.cos();
                continue;
            }
            match merged.iter_mut().find(|m| m.freq == t.freq) {
                Some(m) => {
                    // a1 e^{iφ1} + a2 e^{iφ2}
                    let re = m.amp * m.phase.cos() + t.amp * t.phase.cos();
                    let im = m.amp * m.phase.sin() + t.amp * t.phase.sin();
                    let scale = m.amp.abs() + t.amp.abs();
                    m.amp = re.hypot(im);
                    m.phase = im.atan2(re);
                    if m.amp <= 1e-14 * scale {
                        m.amp = 0.0;
                    }
                }
                None => merged.push(t),
            }
        }
        merged.retain(|t| t.amp != 0.0);
        Ok(Self {
            dim_n,
            terms: merged,
            constant,
        })
    }

    pub fn dim_n(&self) -> usize {
        self.dim_n
    }

    pub fn terms(&self) -> &[FrequencyTerm] {
        &self.terms
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// Direct evaluation at an ambient point `z ∈ R^N`.
    pub fn eval(&self, z: &[f64]) -> f64 {
        debug_assert_eq!(z.len(), self.dim_n);
        let mut acc = self.constant;
        for t in &self.terms {
            let dot: f64 = t.freq.iter().zip(z).map(|(&k, &zi)| k as f64 * zi).sum();
            acc += t.amp * (TAU * dot + t.phase).cos();
        }
        acc
    }

    /// `Σ |amp|`, the largest possible deviation from the constant.
    pub fn amplitude_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.amp.abs()).sum()
    }

    /// Bound on `|∇f|` over all of R^N: `2π Σ |amp|·|freq|`.
    pub fn gradient_bound(&self) -> f64 {
        TAU * self
            .terms
            .iter()
            .map(|t| {
                let n2: f64 = t.freq.iter().map(|&k| (k as f64) * (k as f64)).sum();
                t.amp.abs() * n2.sqrt()
            })
            .sum::<f64>()
    }
}

/// Affine plane in R^N: `z(r) = b + a + scale·(x·u + y·v)`.
///
/// `u` and `v` are orthonormal. `scale` is a uniform dilation of the plane
/// coordinates (1 for explicit embeddings), so rotations and reflections of
/// the plane remain isometries.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    dim_n: usize,
    u: Vec<f64>,
    v: Vec<f64>,
    scale: f64,
    offset: Vec<f64>,
    shift_int: Vec<i64>,
    shift_frac: Vec<f64>,
}

impl Embedding {
    pub fn new(u: Vec<f64>, v: Vec<f64>, offset: Vec<f64>) -> Result<Self> {
        Self::with_scale(u, v, 1.0, offset)
    }

    pub fn with_scale(u: Vec<f64>, v: Vec<f64>, scale: f64, offset: Vec<f64>) -> Result<Self> {
        let n = u.len();
        if n == 0 {
            return Err(Error::invalid("frame vectors must be non-empty"));
        }
        for w in [&v, &offset] {
            if w.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: w.len(),
                });
            }
        }
        if u.iter().chain(&v).chain(&offset).any(|c| !c.is_finite()) {
            return Err(Error::invalid("embedding entries must be finite"));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::invalid("embedding scale must be positive"));
        }
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        if (dot(&u, &u).sqrt() - 1.0).abs() > FRAME_TOL
            || (dot(&v, &v).sqrt() - 1.0).abs() > FRAME_TOL
            || dot(&u, &v).abs() > FRAME_TOL
        {
            return Err(Error::invalid("frame_u and frame_v must be orthonormal"));
        }
        Ok(Self {
            dim_n: n,
            u,
            v,
            scale,
            offset,
            shift_int: vec![0; n],
            shift_frac: vec![0.0; n],
        })
    }

    pub fn dim_n(&self) -> usize {
        self.dim_n
    }

    pub fn frame(&self) -> (&[f64], &[f64]) {
        (&self.u, &self.v)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    /// Accumulated phase shift `a`.
    pub fn phase_shift(&self) -> Vec<f64> {
        self.shift_int
            .iter()
            .zip(&self.shift_frac)
            .map(|(&i, &f)| i as f64 + f)
            .collect()
    }

    /// Integer part of the accumulated phase shift.
    pub fn phase_shift_integer(&self) -> &[i64] {
        &self.shift_int
    }

    /// Fractional part of the accumulated phase shift, in `[0, 1)`.
    pub fn phase_shift_fraction(&self) -> &[f64] {
        &self.shift_frac
    }

    /// Ambient point `z(r)`.
    pub fn point(&self, x: f64, y: f64) -> Vec<f64> {
        (0..self.dim_n)
            .map(|k| {
                self.offset[k]
                    + (self.shift_int[k] as f64 + self.shift_frac[k])
                    + self.scale * (x * self.u[k] + y * self.v[k])
            })
            .collect()
    }

    fn shifted(&self, a: &[f64]) -> Result<Self> {
        if a.len() != self.dim_n {
            return Err(Error::DimensionMismatch {
                expected: self.dim_n,
                got: a.len(),
            });
        }
        let mut out = self.clone();
        for k in 0..self.dim_n {
            let ak = a[k];
            if !ak.is_finite() {
                return Err(Error::invalid("phase shift must be finite"));
            }
            let whole = ak.floor();
            if whole.abs() >= SHIFT_LIMIT {
                return Err(Error::Overflow);
            }
            let mut frac = out.shift_frac[k] + (ak - whole);
            let mut carry = whole as i64;
            if frac >= 1.0 {
                frac -= 1.0;
                carry += 1;
            }
            out.shift_frac[k] = frac;
            out.shift_int[k] = out.shift_int[k].checked_add(carry).ok_or(Error::Overflow)?;
            if out.shift_int[k].unsigned_abs() >= 1 << 62 {
                return Err(Error::Overflow);
            }
        }
        Ok(out)
    }
}

/// Point symmetry group D_n about `center`, axes at `axis_angle0 + πk/n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DihedralDescriptor {
    pub n: usize,
    pub center: [f64; 2],
    pub axis_angle0: f64,
}

impl DihedralDescriptor {
    pub fn new(n: usize, center: [f64; 2], axis_angle0: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::invalid("dihedral order must be at least 3"));
        }
        Ok(Self {
            n,
            center,
            axis_angle0,
        })
    }

    /// Angle of axis `l_{k+1}`.
    pub fn axis_angle(&self, k: usize) -> f64 {
        self.axis_angle0 + PI * k as f64 / self.n as f64
    }

    /// Rotation by `2πk/n` about the center.
    pub fn rotate(&self, p: [f64; 2], k: i64) -> [f64; 2] {
        let theta = TAU * k as f64 / self.n as f64;
        rotate_about(p, self.center, theta)
    }

    /// Mirror image across axis `l_{k+1}`.
    pub fn reflect(&self, p: [f64; 2], k: usize) -> [f64; 2] {
        reflect_across(p, self.center, self.axis_angle(k))
    }

    /// Index in `1..=2n` of the open sector containing `p`, or `None` on a
    /// ray or at the center.
    pub fn sector_of(&self, p: [f64; 2]) -> Option<usize> {
        let dx = p[0] - self.center[0];
        let dy = p[1] - self.center[1];
        if dx == 0.0 && dy == 0.0 {
            return None;
        }
        let width = PI / self.n as f64;
        let phi = (dy.atan2(dx) - self.axis_angle0).rem_euclid(TAU);
        let s = phi / width;
        let idx = s.floor();
        if (s - idx) * width < 1e-12 || (idx + 1.0 - s) * width < 1e-12 {
            return None;
        }
        Some((idx as usize % (2 * self.n)) + 1)
    }

    /// Maps a point of sector `sector` onto sector 1 with a group element:
    /// a rotation for odd sectors, a reflection for even ones.
    pub fn to_first_sector(&self, p: [f64; 2], sector: usize) -> [f64; 2] {
        let i = sector as i64;
        if i % 2 == 1 {
            self.rotate(p, -(i - 1) / 2)
        } else {
            self.reflect(p, (sector / 2) % self.n)
        }
    }
}

fn rotate_about(p: [f64; 2], c: [f64; 2], theta: f64) -> [f64; 2] {
    let (s, co) = theta.sin_cos();
    let dx = p[0] - c[0];
    let dy = p[1] - c[1];
    [c[0] + co * dx - s * dy, c[1] + s * dx + co * dy]
}

fn reflect_across(p: [f64; 2], c: [f64; 2], angle: f64) -> [f64; 2] {
    let (s, co) = (2.0 * angle).sin_cos();
    let dx = p[0] - c[0];
    let dy = p[1] - c[1];
    [c[0] + co * dx + s * dy, c[1] + s * dx - co * dy]
}

/// Plane wave in plane coordinates: `amp·cos(2π(k0 + x·kx + y·ky) + phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct PlaneWave {
    kx: f64,
    ky: f64,
    k0: f64,
    amp: f64,
    phase: f64,
}

/// `V(r) = f(z(r))` for a periodic `f` and an embedding `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiperiodicPotential {
    f: PeriodicFunction,
    emb: Embedding,
    symmetry: Option<DihedralDescriptor>,
    quasiperiods: Option<usize>,
    waves: Vec<PlaneWave>,
}

impl QuasiperiodicPotential {
    pub fn new(f: PeriodicFunction, emb: Embedding) -> Result<Self> {
        if f.dim_n() != emb.dim_n() {
            return Err(Error::DimensionMismatch {
                expected: f.dim_n(),
                got: emb.dim_n(),
            });
        }
        let waves = plane_waves(&f, &emb);
        Ok(Self {
            f,
            emb,
            symmetry: None,
            quasiperiods: None,
            waves,
        })
    }

    /// Declares a point symmetry; it is not verified here
    /// (see [`check_dihedral_symmetry`]).
    pub fn with_symmetry(mut self, d: DihedralDescriptor) -> Self {
        self.symmetry = Some(d);
        self
    }

    pub fn function(&self) -> &PeriodicFunction {
        &self.f
    }

    pub fn embedding(&self) -> &Embedding {
        &self.emb
    }

    pub fn symmetry(&self) -> Option<&DihedralDescriptor> {
        self.symmetry.as_ref()
    }

    /// Rank of the frequency module, when known exactly (star family).
    pub fn quasiperiods(&self) -> Option<usize> {
        self.quasiperiods
    }

    pub fn dim_n(&self) -> usize {
        self.f.dim_n()
    }

    /// Values lie in `[constant − Σ|amp|, constant + Σ|amp|]`.
    pub fn value_bounds(&self) -> (f64, f64) {
        let s = self.f.amplitude_sum();
        (self.f.constant() - s, self.f.constant() + s)
    }

    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let mut acc = self.f.constant();
        for w in &self.waves {
            acc += w.amp * (TAU * (w.k0 + x * w.kx + y * w.ky) + w.phase).cos();
        }
        acc
    }

    /// Plane gradient, analytic.
    pub fn gradient(&self, x: f64, y: f64) -> [f64; 2] {
        let mut g = [0.0; 2];
        for w in &self.waves {
            let s = -w.amp * TAU * (TAU * (w.k0 + x * w.kx + y * w.ky) + w.phase).sin();
            g[0] += s * w.kx;
            g[1] += s * w.ky;
        }
        g
    }

    /// Plane Hessian `[vxx, vxy, vyy]`, analytic.
    pub fn hessian(&self, x: f64, y: f64) -> [f64; 3] {
        let mut h = [0.0; 3];
        for w in &self.waves {
            let c = -w.amp * TAU * TAU * (TAU * (w.k0 + x * w.kx + y * w.ky) + w.phase).cos();
            h[0] += c * w.kx * w.kx;
            h[1] += c * w.kx * w.ky;
            h[2] += c * w.ky * w.ky;
        }
        h
    }

    /// Bound on `|∇f|` over the ambient space, the constant that controls
    /// shifts of the plane off itself.
    pub fn ambient_gradient_bound(&self) -> f64 {
        self.f.gradient_bound()
    }
}

impl ScalarField for QuasiperiodicPotential {
    #[inline]
    fn value(&self, x: f64, y: f64) -> f64 {
        self.eval(x, y)
    }

    fn gradient(&self, x: f64, y: f64, _step: f64) -> [f64; 2] {
        QuasiperiodicPotential::gradient(self, x, y)
    }

    fn derivatives(&self, x: f64, y: f64, _step: f64) -> ([f64; 2], [f64; 3]) {
        (self.gradient(x, y), self.hessian(x, y))
    }
}

fn plane_waves(f: &PeriodicFunction, emb: &Embedding) -> Vec<PlaneWave> {
    f.terms()
        .iter()
        .map(|t| {
            let mut kx = 0.0;
            let mut ky = 0.0;
            let mut k0 = 0.0;
            for (k, &m) in t.freq.iter().enumerate() {
                let m = m as f64;
                kx += m * emb.u[k];
                ky += m * emb.v[k];
                // integer part of the phase shift contributes whole periods
                k0 += m * (emb.offset[k] + emb.shift_frac[k]);
            }
            PlaneWave {
                kx: emb.scale * kx,
                ky: emb.scale * ky,
                k0: k0 - k0.floor(),
                amp: t.amp,
                phase: t.phase,
            }
        })
        .collect()
}

/// Euler's totient, the rank of the Z-module spanned by the n-th roots of unity.
fn totient(mut n: usize) -> usize {
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

/// Builds `V(r) = Σ_h amps[h−1] Σ_k cos(2π h e_k·r + global_phase)` with
/// `e_k = (cos 2πk/n, sin 2πk/n)`.
///
/// The torus is `T^n` with one coordinate per star vector; harmonic `h` of
/// star vector `k` has frequency `h·unit_k`. The plane sits inside the
/// hyperplane orthogonal to `(1, …, 1)`.
pub fn build_star_potential(
    n: usize,
    amps: &[f64],
    global_phase: f64,
) -> Result<QuasiperiodicPotential> {
    if n < 3 {
        return Err(Error::invalid("star order n must be at least 3"));
    }
    if amps.is_empty() || amps.iter().all(|&a| a == 0.0) {
        return Err(Error::invalid("amps must contain a nonzero amplitude"));
    }
    if amps.iter().any(|a| !a.is_finite()) || !global_phase.is_finite() {
        return Err(Error::invalid("amplitudes and phase must be finite"));
    }
    let mut terms = Vec::with_capacity(n * amps.len());
    for (h, &amp) in amps.iter().enumerate() {
        if amp == 0.0 {
            continue;
        }
        for k in 0..n {
            let mut freq = vec![0i64; n];
            freq[k] = h as i64 + 1;
            terms.push(FrequencyTerm {
                freq,
                amp,
                phase: global_phase,
            });
        }
    }
    let f = PeriodicFunction::new(n, terms, 0.0)?;

    let cols: (Vec<f64>, Vec<f64>) = (0..n)
        .map(|k| (TAU * k as f64 / n as f64).sin_cos())
        .map(|(s, c)| (c, s))
        .unzip();
    let norm = |w: &[f64]| w.iter().map(|c| c * c).sum::<f64>().sqrt();
    let (nu, nv) = (norm(&cols.0), norm(&cols.1));
    let u: Vec<f64> = cols.0.iter().map(|c| c / nu).collect();
    let v: Vec<f64> = cols.1.iter().map(|c| c / nv).collect();
    let scale = (n as f64 / 2.0).sqrt();
    let emb = Embedding::with_scale(u, v, scale, vec![0.0; n])?;

    let mut p = QuasiperiodicPotential::new(f, emb)?;
    p.symmetry = Some(DihedralDescriptor::new(n, [0.0, 0.0], 0.0)?);
    p.quasiperiods = Some(totient(n));
    Ok(p)
}

/// `V(r)`.
pub fn evaluate(p: &QuasiperiodicPotential, r: [f64; 2]) -> f64 {
    p.eval(r[0], r[1])
}

/// Axis-aligned rectangle sampled by `nx × ny` nodes including its corners.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let ok = [x_min, x_max, y_min, y_max].iter().all(|c| c.is_finite())
            && x_max > x_min
            && y_max > y_min;
        if !ok {
            return Err(Error::invalid("rectangle must be finite and non-degenerate"));
        }
        Ok(Self {
            x_min,
            x_max,
            y_min,
            y_max,
        })
    }

    #[inline]
    pub fn spacing(&self, nx: usize, ny: usize) -> (f64, f64) {
        (
            (self.x_max - self.x_min) / (nx - 1) as f64,
            (self.y_max - self.y_min) / (ny - 1) as f64,
        )
    }
}

/// Row-major samples: `values[j * nx + i]` holds node `(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGrid {
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
}

impl ScalarGrid {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// Node coordinates used by every grid in the crate.
#[inline]
pub(crate) fn node_coord(min: f64, spacing: f64, i: usize) -> f64 {
    min + i as f64 * spacing
}

pub(crate) fn checked_nodes(nx: usize, ny: usize) -> Result<usize> {
    if nx < 2 || ny < 2 {
        return Err(Error::invalid("grid needs at least 2 nodes per axis"));
    }
    nx.checked_mul(ny)
        .filter(|&n| n <= isize::MAX as usize / std::mem::size_of::<f64>())
        .ok_or(Error::ResourceCap {
            nodes: nx as u128 * ny as u128,
            cap: (isize::MAX as usize / std::mem::size_of::<f64>()) as u128,
        })
}

/// Samples any field on the nodes of `rect`, rows in parallel.
pub(crate) fn sample_field<F: ScalarField + ?Sized>(
    field: &F,
    rect: &Rect,
    nx: usize,
    ny: usize,
) -> Result<ScalarGrid> {
    let total = checked_nodes(nx, ny)?;
    let (hx, hy) = rect.spacing(nx, ny);
    let mut values = vec![0.0; total];
    values.par_chunks_mut(nx).enumerate().for_each(|(j, row)| {
        let y = node_coord(rect.y_min, hy, j);
        for (i, out) in row.iter_mut().enumerate() {
            *out = field.value(node_coord(rect.x_min, hx, i), y);
        }
    });
    Ok(ScalarGrid { nx, ny, values })
}

/// Values at the `nx × ny` nodes of `rect`, bit-identical to [`evaluate`].
pub fn evaluate_grid(
    p: &QuasiperiodicPotential,
    rect: &Rect,
    nx: usize,
    ny: usize,
) -> Result<ScalarGrid> {
    sample_field(p, rect, nx, ny)
}

/// `C = 2π Σ |amp|·|k|` where `k` is the plane wave vector of each term.
/// Bounds `|∇V|` everywhere on the plane.
pub fn gradient_bound(p: &QuasiperiodicPotential) -> f64 {
    TAU * p
        .waves
        .iter()
        .map(|w| w.amp.abs() * w.kx.hypot(w.ky))
        .sum::<f64>()
}

/// The potential of the shifted plane `Π(a)`: `V(r, a) = f(z(r) + a)`.
pub fn phase_shift(p: &QuasiperiodicPotential, a: &[f64]) -> Result<QuasiperiodicPotential> {
    let emb = p.emb.shifted(a)?;
    let waves = plane_waves(&p.f, &emb);
    Ok(QuasiperiodicPotential {
        f: p.f.clone(),
        emb,
        // a shifted plane generally loses the exact symmetry about the old center
        symmetry: if a.iter().all(|c| c.fract() == 0.0) {
            p.symmetry
        } else {
            None
        },
        quasiperiods: p.quasiperiods,
        waves,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub max_rotation_err: f64,
    pub max_reflection_err: f64,
    pub pass: bool,
}

pub const SYMMETRY_DISC_RADIUS: f64 = 100.0;
const SYMMETRY_SEED: u64 = 0x5eed_d1ed;

/// Samples `samples` points uniformly in the disc of radius 100 about the
/// center and compares `V` with its images under the rotation by `2π/n` and
/// under every axis reflection.
pub fn check_dihedral_symmetry(
    p: &QuasiperiodicPotential,
    d: &DihedralDescriptor,
    samples: usize,
    tol: f64,
) -> SymmetryReport {
    let mut rng = ChaCha8Rng::seed_from_u64(SYMMETRY_SEED);
    let mut rot: f64 = 0.0;
    let mut refl: f64 = 0.0;
    for _ in 0..samples.max(1) {
        let rad = SYMMETRY_DISC_RADIUS * rng.gen::<f64>().sqrt();
        let ang = TAU * rng.gen::<f64>();
        let r = [d.center[0] + rad * ang.cos(), d.center[1] + rad * ang.sin()];
        let v = evaluate(p, r);
        rot = rot.max((evaluate(p, d.rotate(r, 1)) - v).abs());
        for k in 0..d.n {
            refl = refl.max((evaluate(p, d.reflect(r, k)) - v).abs());
        }
    }
    SymmetryReport {
        max_rotation_err: rot,
        max_reflection_err: refl,
        pass: rot < tol && refl < tol,
    }
}

/// JSON description of a potential.
///
/// ```json
/// {"kind":"star","n":5,"amps":[1.0],"global_phase":0.0,"phase_shift":[0,0,0,0,0]}
/// {"kind":"explicit","dim_n":2,"terms":[{"freq":[1,0],"amp":1.0,"phase":0.0}],
///  "frame_u":[1,0],"frame_v":[0,1],"offset":[0,0]}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PotentialSpec {
    Star {
        n: usize,
        amps: Vec<f64>,
        #[serde(default)]
        global_phase: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        phase_shift: Option<Vec<f64>>,
    },
    Explicit {
        dim_n: usize,
        terms: Vec<FrequencyTerm>,
        frame_u: Vec<f64>,
        frame_v: Vec<f64>,
        offset: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        constant: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        phase_shift: Option<Vec<f64>>,
    },
}

impl PotentialSpec {
    pub fn build(&self) -> Result<QuasiperiodicPotential> {
        let (p, shift) = match self {
            PotentialSpec::Star {
                n,
                amps,
                global_phase,
                phase_shift,
            } => (build_star_potential(*n, amps, *global_phase)?, phase_shift),
            PotentialSpec::Explicit {
                dim_n,
                terms,
                frame_u,
                frame_v,
                offset,
                constant,
                phase_shift,
            } => {
                let f = PeriodicFunction::new(*dim_n, terms.clone(), constant.unwrap_or(0.0))?;
                let emb = Embedding::new(frame_u.clone(), frame_v.clone(), offset.clone())?;
                (QuasiperiodicPotential::new(f, emb)?, phase_shift)
            }
        };
        match shift {
            Some(a) => phase_shift(&p, a),
            None => Ok(p),
        }
    }
}
