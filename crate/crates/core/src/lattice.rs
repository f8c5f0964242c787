//! Integer points of Z^N close to a ray or a line.
//!
//! A line with irrational direction winds densely around the torus
//! R^N / Z^N, so it passes arbitrarily close to lattice points. The search
//! here walks the line and inspects the lattice points around each sample.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{phase_shift, QuasiperiodicPotential};

const COORD_LIMIT: f64 = 4.611_686_018_427_388e18; // 2^62

/// Ray (or full line when `two_sided`) in R^N.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    pub origin: Vec<f64>,
    pub dir: Vec<f64>,
    pub two_sided: bool,
}

impl Ray {
    /// Normalizes `dir`.
    pub fn new(origin: Vec<f64>, dir: Vec<f64>, two_sided: bool) -> Result<Self> {
        if origin.len() != dir.len() {
            return Err(Error::DimensionMismatch {
                expected: origin.len(),
                got: dir.len(),
            });
        }
        if origin.is_empty() || origin.iter().chain(&dir).any(|c| !c.is_finite()) {
            return Err(Error::invalid("ray coordinates must be finite and non-empty"));
        }
        let norm = dir.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::invalid("ray direction must be nonzero"));
        }
        Ok(Self {
            origin,
            dir: dir.iter().map(|c| c / norm).collect(),
            two_sided,
        })
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    /// Parameter of the closest point to `p`, clamped to `t ≥ 0` for rays.
    pub fn foot_parameter(&self, p: &[f64]) -> f64 {
        let t: f64 = p
            .iter()
            .zip(&self.origin)
            .zip(&self.dir)
            .map(|((pi, oi), di)| (pi - oi) * di)
            .sum();
        if self.two_sided {
            t
        } else {
            t.max(0.0)
        }
    }

    pub fn at(&self, t: f64) -> Vec<f64> {
        self.origin
            .iter()
            .zip(&self.dir)
            .map(|(o, d)| o + t * d)
            .collect()
    }
}

/// Euclidean distance from `p` to the ray.
pub fn dist_point_ray(p: &[f64], ray: &Ray) -> f64 {
    let t = ray.foot_parameter(p);
    p.iter()
        .zip(&ray.origin)
        .zip(&ray.dir)
        .map(|((pi, oi), di)| {
            let r = (pi - oi) - t * di;
            r * r
        })
        .sum::<f64>()
        .sqrt()
}

/// A lattice point together with its distances to the ray and its origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeShift {
    pub m: Vec<i64>,
    pub dist_to_ray: f64,
    pub dist_to_origin: f64,
}

impl LatticeShift {
    fn measure(m: Vec<i64>, ray: &Ray) -> Self {
        let p: Vec<f64> = m.iter().map(|&c| c as f64).collect();
        let dist_to_origin = p
            .iter()
            .zip(&ray.origin)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        Self {
            dist_to_ray: dist_point_ray(&p, ray),
            dist_to_origin,
            m,
        }
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.m.iter().map(|&c| c as f64).collect()
    }

    /// Vector from the lattice point to its foot on the ray.
    pub fn residual(&self, ray: &Ray) -> Vec<f64> {
        let p = self.as_f64();
        let foot = ray.at(ray.foot_parameter(&p));
        foot.iter().zip(&p).map(|(f, q)| f - q).collect()
    }
}

/// Walk parameter of the k-th sample: `0, ½, 1, …` for rays and
/// `0, ½, −½, 1, −1, …` for lines.
fn walk_parameter(k: u64, two_sided: bool) -> f64 {
    if !two_sided {
        return 0.5 * k as f64;
    }
    if k == 0 {
        return 0.0;
    }
    let mag = 0.5 * ((k + 1) / 2) as f64;
    if k % 2 == 1 {
        mag
    } else {
        -mag
    }
}

fn better(a: &LatticeShift, b: &LatticeShift) -> bool {
    match a.dist_to_origin.total_cmp(&b.dist_to_origin) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => a.m < b.m,
    }
}

/// Finds `m ∈ Z^N` with `dist_to_ray < delta` and `dist_to_origin > min_dist`.
///
/// The ray is sampled every ½ unit; each sample is rounded to the nearest
/// lattice point and its `3^N` neighborhood is tested. For `delta ≤ ½` no
/// qualifying point near the walked stretch can be missed. Among qualifying
/// points the one closest to the origin wins (ties by lexicographic `m`);
/// the walk continues just far enough to certify that choice.
///
/// [`Error::NotFound`] means the budget of `max_steps` samples ran out.
pub fn find_integer_shift(
    ray: &Ray,
    delta: f64,
    min_dist: f64,
    max_steps: u64,
) -> Result<LatticeShift> {
    if !(delta > 0.0) || !(min_dist >= 0.0) {
        return Err(Error::invalid("delta must be positive and min_dist non-negative"));
    }
    let n = ray.dim();
    if n > 12 {
        return Err(Error::invalid("neighborhood search supports N ≤ 12"));
    }
    let offsets = neighborhood(n);
    // a candidate lies within this distance of the sample it was found from
    let reach = 0.5 * (n as f64).sqrt() + 1.5 * (n as f64).sqrt();
    let mut best: Option<LatticeShift> = None;
    let mut base = vec![0i64; n];
    let mut m = vec![0i64; n];
    for k in 0..max_steps {
        let t = walk_parameter(k, ray.two_sided);
        if let Some(b) = &best {
            if t.abs() > b.dist_to_origin + reach {
                break;
            }
        }
        if t.abs() + reach <= min_dist {
            continue;
        }
        let q = ray.at(t);
        for (bi, qi) in base.iter_mut().zip(&q) {
            let r = qi.round();
            if r.abs() >= COORD_LIMIT {
                return Err(Error::Overflow);
            }
            *bi = r as i64;
        }
        for off in &offsets {
            for ((mi, bi), oi) in m.iter_mut().zip(&base).zip(off) {
                *mi = bi + *oi as i64;
            }
            let cand = LatticeShift::measure(m.clone(), ray);
            if cand.dist_to_ray < delta
                && cand.dist_to_origin > min_dist
                && best.as_ref().map_or(true, |b| better(&cand, b))
            {
                best = Some(cand);
            }
        }
    }
    best.ok_or(Error::NotFound { steps: max_steps })
}

fn neighborhood(n: usize) -> Vec<Vec<i8>> {
    let count = 3usize.pow(n as u32);
    (0..count)
        .map(|mut c| {
            (0..n)
                .map(|_| {
                    let d = (c % 3) as i8 - 1;
                    c /= 3;
                    d
                })
                .collect()
        })
        .collect()
}

/// Phase shift by an integer vector. By periodicity the result evaluates
/// bit-identically to `p`.
pub fn shift_potential_by_lattice(
    p: &QuasiperiodicPotential,
    s: &LatticeShift,
) -> Result<QuasiperiodicPotential> {
    if s.m.len() != p.dim_n() {
        return Err(Error::DimensionMismatch {
            expected: p.dim_n(),
            got: s.m.len(),
        });
    }
    phase_shift(p, &s.as_f64())
}
