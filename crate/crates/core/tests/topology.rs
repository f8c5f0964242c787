use std::f64::consts::{PI, TAU};

use proptest::prelude::*;
use quasilevel::topology::{strip_verdict, StripFit};
use quasilevel::*;

fn square() -> FnField<impl Fn(f64, f64) -> f64 + Sync> {
    FnField(|x: f64, y: f64| 2.0 * (TAU * x).cos() + 2.0 * (TAU * y).cos())
}

/// Diameter of the level-`eps` loop around the maximum at the origin:
/// the radius in each direction by bisection, then the widest chord
/// through the origin over a fine set of directions. The loop is convex
/// and symmetric, so that chord is its diameter.
fn oval_diameter(eps: f64) -> f64 {
    let v = |x: f64, y: f64| 2.0 * (TAU * x).cos() + 2.0 * (TAU * y).cos();
    let radius = |theta: f64| {
        let (s, c) = theta.sin_cos();
        let (mut lo, mut hi) = (0.0, 0.5);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if v(mid * c, mid * s) >= eps {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    (0..2000)
        .map(|k| {
            let t = PI * k as f64 / 2000.0;
            radius(t) + radius(t + PI)
        })
        .fold(0.0, f64::max)
}

#[test]
fn square_diameters_match_the_oval() {
    let levels = [0.5, 1.0, 2.0, 3.0, 3.9];
    let c = measure_d_of_eps(&square(), [0.0, 0.0], &levels, &[3.0, 5.0, 8.0], 32.0, DEFAULT_NODE_CAP)
        .unwrap();
    for e in &c.entries {
        let want = oval_diameter(e.eps);
        assert!(e.saturated, "{e:?}");
        assert!((e.d - want).abs() <= 0.02 * want + 1.0 / 32.0, "{e:?} vs {want}");
        assert_eq!(e.l_max, 8.0);
    }
    for w in c.entries.windows(2) {
        assert!(w[1].d < w[0].d);
    }
    assert!((oval_diameter(1.0) - 2.0 / 3.0).abs() < 1e-9);
}

#[test]
fn square_diameters_are_symmetric_in_the_level() {
    let levels = [0.5, 1.0, 2.0, 3.0];
    let neg: Vec<f64> = levels.iter().map(|e| -e).collect();
    let f = square();
    let up = measure_d_of_eps(&f, [0.0, 0.0], &levels, &[3.0, 5.0], 16.0, DEFAULT_NODE_CAP).unwrap();
    let down = measure_d_of_eps(&f, [0.0, 0.0], &neg, &[3.0, 5.0], 16.0, DEFAULT_NODE_CAP).unwrap();
    for (a, b) in up.entries.iter().zip(&down.entries) {
        assert!((a.d - b.d).abs() <= 0.05 * a.d, "{a:?} {b:?}");
    }
}

#[test]
fn diameter_csv_layout() {
    let c = measure_d_of_eps(&square(), [0.0, 0.0], &[1.0, 2.0], &[3.0, 5.0], 8.0, DEFAULT_NODE_CAP).unwrap();
    let csv = c.to_csv_with(|v| format!("{v}"));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("eps,D,saturated,L_max"));
    assert_eq!(lines.count(), 2);
    assert!(measure_d_of_eps(&square(), [0.0, 0.0], &[1.0], &[5.0], 8.0, DEFAULT_NODE_CAP).is_err());
}

#[test]
fn oblique_straight_lines_are_regular() {
    // level lines of cos(2π(x + 2y)/√5) run along (2, −1)
    let k = 5f64.sqrt();
    let f = FnField(move |x: f64, y: f64| (TAU * (x + 2.0 * y) / k).cos());
    let cfg = ClassifyConfig::default();
    let w = Window::with_resolution([0.0, 0.0], 5.0, 8.0).unwrap();
    let cs = trace_level(&f, &w, 0.0).unwrap();
    let seed = cs.open().find(|c| c.is_spanning()).unwrap();
    let r = classify_line(&f, seed, &[5.0, 10.0, 20.0], &cfg).unwrap();
    match r.verdict {
        Verdict::OpenRegular { direction, strip_width } => {
            let want = [2.0 / k, -1.0 / k];
            assert!((direction[0] - want[0]).abs() < 1e-3 && (direction[1] - want[1]).abs() < 1e-3);
            assert!(strip_width < 0.05);
        }
        v => panic!("{v:?}"),
    }
    assert_eq!(r.scales_used, vec![5.0, 10.0, 20.0]);
}

#[test]
fn star_lines_are_never_regular_at_small_scales() {
    let p = build_star_potential(5, &[1.0], 0.0).unwrap();
    let cfg = ClassifyConfig::default();
    let w = Window::with_resolution([0.0, 0.0], 10.0, 8.0).unwrap();
    let mut seen = 0;
    for a in default_phases(&p, 4) {
        let q = phase_shift(&p, &a).unwrap();
        let g = SampledGrid::sample(&q, w, DEFAULT_NODE_CAP).unwrap();
        for k in 0..=40 {
            let eps = 0.9 + 0.005 * k as f64;
            for c in g.contours(eps).open().filter(|c| c.is_spanning()) {
                seen += 1;
                let r = classify_line(&q, c, &[10.0, 20.0, 40.0], &cfg).unwrap();
                assert!(!matches!(r.verdict, Verdict::OpenRegular { .. }), "eps {eps}: {r:?}");
            }
        }
    }
    assert!(seen > 0);
}

#[test]
fn star_sector_curves_are_equivariant() {
    let p = build_star_potential(5, &[1.0], 0.0).unwrap();
    let d = *p.symmetry().unwrap();
    // lines stay inside one sector all the way out only in small windows
    let w = Window::with_resolution([0.0, 0.0], 4.0, 8.0).unwrap();
    let r = 1.0;
    for eps in [-0.25, 0.0, 0.25, 0.5] {
        let cs = trace_level(&p, &w, eps).unwrap();
        let curves = extract_sector_curves(&cs, &d, r).unwrap();
        assert!(!curves.is_empty(), "eps {eps}");
        for c in &curves {
            assert!(c.min_dist_to_center >= r);
            for &q in &c.points {
                let rho = q[0].hypot(q[1]);
                assert!(rho >= c.min_dist_to_center - 1e-12);
                // sector from the polar angle, written out independently
                let idx = (q[1].atan2(q[0]).rem_euclid(TAU) / (PI / 5.0)).floor() as usize + 1;
                assert_eq!(idx, c.sector_index);
            }
        }
        let err = sector_equivariance_error(&cs, &d, &curves);
        assert!(err <= w.h(), "eps {eps}: {err} > {}", w.h());
    }
}

#[test]
fn symmetric_star_has_curves_in_every_sector() {
    let p = build_star_potential(5, &[1.0], 0.0).unwrap();
    let d = *p.symmetry().unwrap();
    let w = Window::with_resolution([0.0, 0.0], 4.0, 8.0).unwrap();
    let cs = trace_level(&p, &w, 0.5).unwrap();
    let curves = extract_sector_curves(&cs, &d, 1.0).unwrap();
    let mut counts = [0usize; 10];
    for c in &curves {
        counts[c.sector_index - 1] += 1;
    }
    assert!(counts[0] > 0 && counts[1] > 0, "{counts:?}");
    // rotations carry odd sectors onto odd ones and even onto even
    assert!(counts.iter().step_by(2).all(|&n| n == counts[0]), "{counts:?}");
    assert!(counts.iter().skip(1).step_by(2).all(|&n| n == counts[1]), "{counts:?}");
}

fn fit(width: f64, angle_deg: f64) -> StripFit {
    let (s, c) = angle_deg.to_radians().sin_cos();
    StripFit { centroid: [0.0, 0.0], direction: [c, s], half_width: width }
}

proptest! {
    #[test]
    fn verdicts_follow_their_rules(
        widths in prop::collection::vec(0.0f64..100.0, 3),
        angles in prop::collection::vec(-10.0f64..10.0, 3),
    ) {
        let cfg = ClassifyConfig::default();
        let scales = [50.0, 100.0, 200.0];
        let fits: Vec<StripFit> = widths.iter().zip(&angles).map(|(&w, &a)| fit(w, a)).collect();
        let floor = 0.25;
        match strip_verdict(&scales, &fits, floor, &cfg) {
            Verdict::OpenRegular { strip_width, .. } => {
                let max = widths.iter().cloned().fold(0.0, f64::max);
                let min = widths.iter().cloned().fold(f64::INFINITY, f64::min);
                prop_assert!(max - min < 0.2 * max.max(floor));
                prop_assert!((angles[2] - angles[1]).abs() < 2.0 + 1e-9);
                prop_assert_eq!(strip_width, widths[2]);
            }
            Verdict::OpenChaotic { width_growth_exponent } => {
                prop_assert!(widths[0] < widths[1] && widths[1] < widths[2]);
                prop_assert!(width_growth_exponent > 0.2);
            }
            Verdict::Indeterminate => {}
            Verdict::Closed => prop_assert!(false, "strip rules never close a line"),
        }
    }
}
