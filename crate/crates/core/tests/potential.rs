use std::f64::consts::{PI, TAU};

use quasilevel::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit_square_term() -> QuasiperiodicPotential {
    let f = PeriodicFunction::new(
        2,
        vec![FrequencyTerm { freq: vec![1, 0], amp: 1.0, phase: 0.0 }],
        0.0,
    )
    .unwrap();
    let emb = Embedding::new(vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]).unwrap();
    QuasiperiodicPotential::new(f, emb).unwrap()
}

/// Star sum written out directly from the wave vectors.
fn naive_star(n: usize, amps: &[f64], phase: f64, a: &[f64], r: [f64; 2]) -> f64 {
    let mut s = 0.0;
    for (h, amp) in amps.iter().enumerate() {
        for k in 0..n {
            let t = TAU * k as f64 / n as f64;
            let dot = t.cos() * r[0] + t.sin() * r[1];
            s += amp * (TAU * ((h + 1) as f64 * (dot + a[k])) + phase).cos();
        }
    }
    s
}

#[test]
fn square_star_is_the_periodic_sum() {
    let p = build_star_potential(4, &[1.0], 0.0).unwrap();
    assert_eq!(p.quasiperiods(), Some(2));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let (x, y) = (rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0));
        let want = 2.0 * (TAU * x).cos() + 2.0 * (TAU * y).cos();
        assert!((evaluate(&p, [x, y]) - want).abs() < 1e-11);
    }
}

#[test]
fn five_star_basics() {
    let p = build_star_potential(5, &[1.0], 0.0).unwrap();
    assert_eq!(p.quasiperiods(), Some(4));
    assert_eq!(p.dim_n(), 5);
    assert_eq!(evaluate(&p, [0.0, 0.0]), 5.0);
    let r = [1.3, -2.7];
    assert!((evaluate(&p, r) - naive_star(5, &[1.0], 0.0, &[0.0; 5], r)).abs() < 1e-12);
    let d = p.symmetry().unwrap();
    assert_eq!((d.n, d.center, d.axis_angle0), (5, [0.0, 0.0], 0.0));
}

#[test]
fn harmonics_match_direct_sum() {
    let p = build_star_potential(7, &[1.0, 0.5, -0.25], 0.3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..200 {
        let r = [rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0)];
        let want = naive_star(7, &[1.0, 0.5, -0.25], 0.3, &[0.0; 7], r);
        assert!((evaluate(&p, r) - want).abs() < 1e-11);
    }
}

#[test]
fn star_rejects_bad_input() {
    assert!(build_star_potential(2, &[1.0], 0.0).is_err());
    assert!(build_star_potential(5, &[], 0.0).is_err());
    assert!(build_star_potential(5, &[0.0, 0.0], 0.0).is_err());
}

#[test]
fn single_term_examples() {
    let p = unit_square_term();
    assert!(evaluate(&p, [0.25, 7.0]).abs() < 1e-15);
    assert!((gradient_bound(&p) - TAU).abs() < 1e-15);
    let star = build_star_potential(5, &[1.0], 0.0).unwrap();
    assert!((gradient_bound(&star) - 10.0 * PI).abs() < 1e-12);
    assert!((star.ambient_gradient_bound() - 10.0 * PI).abs() < 1e-12);
    let empty = QuasiperiodicPotential::new(
        PeriodicFunction::new(2, vec![], 1.5).unwrap(),
        Embedding::new(vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]).unwrap(),
    )
    .unwrap();
    assert_eq!(gradient_bound(&empty), 0.0);
}

#[test]
fn sampled_gradient_stays_below_bound() {
    let p = build_star_potential(5, &[1.0], 0.0).unwrap();
    let c = gradient_bound(&p);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let s = 1e-6;
    for _ in 0..100_000 {
        let (x, y) = (rng.gen_range(-100.0..100.0), rng.gen_range(-100.0..100.0));
        let gx = (p.eval(x + s, y) - p.eval(x - s, y)) / (2.0 * s);
        let gy = (p.eval(x, y + s) - p.eval(x, y - s)) / (2.0 * s);
        assert!(gx.hypot(gy) <= c);
        let g = p.gradient(x, y);
        assert!((g[0] - gx).abs() < 1e-4 && (g[1] - gy).abs() < 1e-4);
    }
}

#[test]
fn grid_examples() {
    let p = build_star_potential(5, &[1.0], 0.0).unwrap();
    let unit = Rect::new(0.0, 1.0, 0.0, 1.0).unwrap();
    let g = evaluate_grid(&p, &unit, 2, 2).unwrap();
    for (i, j) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
        assert_eq!(g.get(i, j).to_bits(), evaluate(&p, [i as f64, j as f64]).to_bits());
    }

    let big = Rect::new(-50.0, 50.0, -50.0, 50.0).unwrap();
    let g = evaluate_grid(&p, &big, 1001, 1001).unwrap();
    let (lo, hi) = g.min_max();
    let (blo, bhi) = p.value_bounds();
    assert!(lo >= blo && hi <= bhi);
    assert_eq!(g.values.len(), 1001 * 1001);

    let f = PeriodicFunction::new(
        2,
        vec![
            FrequencyTerm { freq: vec![1, 0], amp: 1.0, phase: 0.0 },
            FrequencyTerm { freq: vec![0, 1], amp: 1.0, phase: 0.0 },
        ],
        0.0,
    )
    .unwrap();
    let emb = Embedding::new(vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]).unwrap();
    let q = QuasiperiodicPotential::new(f, emb).unwrap();
    let g = evaluate_grid(&q, &unit, 101, 101).unwrap();
    assert!((g.min_max().1 - 2.0).abs() < 1e-12);
    assert!((g.get(100, 100) - 2.0).abs() < 1e-12);
    assert!(evaluate_grid(&q, &unit, 1, 5).is_err());
}

#[test]
fn phase_shift_examples() {
    let p = build_star_potential(5, &[1.0], 0.0).unwrap();
    let zero = phase_shift(&p, &[0.0; 5]).unwrap();
    let m = phase_shift(&p, &[3.0, -7.0, 12.0, 0.0, -1.0]).unwrap();
    let a: Vec<f64> = vec![0.37; 5];
    let shifted = phase_shift(&p, &a).unwrap();
    assert!(shifted.symmetry().is_none());
    assert!(m.symmetry().is_some());
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..100 {
        let r = [rng.gen_range(-30.0..30.0), rng.gen_range(-30.0..30.0)];
        let v = evaluate(&p, r);
        assert_eq!(evaluate(&zero, r).to_bits(), v.to_bits());
        assert!((evaluate(&m, r) - v).abs() < 1e-12);
        let want = naive_star(5, &[1.0], 0.0, &a, r);
        assert!((evaluate(&shifted, r) - want).abs() < 1e-12);
    }
    assert!(matches!(
        phase_shift(&p, &[0.0; 3]),
        Err(Error::DimensionMismatch { expected: 5, got: 3 })
    ));
}

#[test]
fn integer_shifts_are_bit_exact() {
    let p = build_star_potential(5, &[1.0, 0.3], 0.0).unwrap();
    let base = phase_shift(&p, &[0.1, 0.2, 0.3, 0.4, 0.5]).unwrap();
    let moved = phase_shift(&base, &[1e6, -3.0, 17.0, 0.0, -123_456.0]).unwrap();
    for k in 0..50 {
        let r = [0.37 * k as f64 - 9.0, 1.1 * k as f64];
        assert_eq!(evaluate(&base, r).to_bits(), evaluate(&moved, r).to_bits());
    }
}

#[test]
fn star_symmetry_suite() {
    for n in [3, 5, 7, 8] {
        let p = build_star_potential(n, &[1.0], 0.0).unwrap();
        let d = *p.symmetry().unwrap();
        let rep = check_dihedral_symmetry(&p, &d, 10_000, 1e-10);
        assert!(rep.pass, "n = {n}: {rep:?}");
    }
}

#[test]
fn perturbed_star_fails_symmetry() {
    let p = build_star_potential(5, &[1.0], 0.0).unwrap();
    let mut terms = p.function().terms().to_vec();
    terms[2].phase += 0.3;
    let f = PeriodicFunction::new(5, terms, 0.0).unwrap();
    let q = QuasiperiodicPotential::new(f, p.embedding().clone()).unwrap();
    let d = DihedralDescriptor::new(5, [0.0, 0.0], 0.0).unwrap();
    let rep = check_dihedral_symmetry(&q, &d, 1000, 1e-10);
    assert!(!rep.pass);
    assert!(rep.max_rotation_err.max(rep.max_reflection_err) > 0.01);
}

#[test]
fn square_sum_has_square_symmetry() {
    let p = build_star_potential(4, &[1.0], 0.0).unwrap();
    let d = DihedralDescriptor::new(4, [0.0, 0.0], 0.0).unwrap();
    assert!(check_dihedral_symmetry(&p, &d, 1000, 1e-10).pass);
    assert!(DihedralDescriptor::new(2, [0.0, 0.0], 0.0).is_err());
}

#[test]
fn spec_json_round_trip() {
    let star: PotentialSpec =
        serde_json::from_str(r#"{"kind":"star","n":5,"amps":[1.0],"global_phase":0.0}"#).unwrap();
    let p = star.build().unwrap();
    assert_eq!(evaluate(&p, [0.0, 0.0]), 5.0);
    let back: PotentialSpec = serde_json::from_str(&serde_json::to_string(&star).unwrap()).unwrap();
    assert_eq!(back, star);

    let explicit: PotentialSpec = serde_json::from_str(
        r#"{"kind":"explicit","dim_n":2,
            "terms":[{"freq":[1,0],"amp":1.0,"phase":0.0},{"freq":[0,1],"amp":2.0,"phase":0.0}],
            "frame_u":[1.0,0.0],"frame_v":[0.0,1.0],"offset":[0.0,0.0]}"#,
    )
    .unwrap();
    let q = explicit.build().unwrap();
    assert!((evaluate(&q, [0.5, 0.0]) - 1.0).abs() < 1e-12);

    assert!(serde_json::from_str::<PotentialSpec>(r#"{"kind":"star","n":5,"amps":[1.0],"nn":3}"#).is_err());
    let shifted: PotentialSpec = serde_json::from_str(
        r#"{"kind":"star","n":5,"amps":[1.0],"phase_shift":[0.5,0.5,0.5,0.5,0.5]}"#,
    )
    .unwrap();
    // a half shift on every coordinate negates the single-harmonic star
    assert!((evaluate(&shifted.build().unwrap(), [0.0, 0.0]) + 5.0).abs() < 1e-12);
}

#[test]
fn frames_must_be_orthonormal() {
    assert!(Embedding::new(vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 0.0]).is_err());
    assert!(Embedding::new(vec![1.0, 0.1], vec![0.0, 1.0], vec![0.0, 0.0]).is_err());
    assert!(Embedding::new(vec![1.0, 0.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]).is_err());
}
