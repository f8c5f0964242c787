use quasilevel::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn two_cos(a: f64, b: f64) -> QuasiperiodicPotential {
    let f = PeriodicFunction::new(
        2,
        vec![
            FrequencyTerm { freq: vec![1, 0], amp: a, phase: 0.0 },
            FrequencyTerm { freq: vec![0, 1], amp: b, phase: 0.0 },
        ],
        0.0,
    )
    .unwrap();
    let emb = Embedding::new(vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]).unwrap();
    QuasiperiodicPotential::new(f, emb).unwrap()
}

fn star() -> QuasiperiodicPotential {
    build_star_potential(5, &[1.0], 0.0).unwrap()
}

#[test]
fn square_potential_collapses_to_zero() {
    let p = two_cos(2.0, 2.0);
    let phases = default_phases(&p, 4);
    let cfg = CriticalConfig::default();
    let rep = collapse_analysis(&p, &[5.0, 10.0, 20.0], (-3.0, 3.0), &phases, 0.005, &cfg).unwrap();
    assert_eq!(rep.collapse_verdict, CollapseVerdict::Collapses, "{:?}", rep.widths());
    assert!(rep.eps0_estimate.abs() <= 0.02);
    for s in &rep.per_scale {
        assert!(s.eps1 <= s.eps2);
    }
}

#[test]
fn contrast_potential_keeps_its_interval() {
    let p = two_cos(1.0, 2.0);
    let phases = default_phases(&p, 4);
    let cfg = CriticalConfig::default();
    let rep = collapse_analysis(&p, &[10.0, 20.0, 40.0], (-3.0, 3.0), &phases, 0.005, &cfg).unwrap();
    assert_eq!(rep.collapse_verdict, CollapseVerdict::PersistentInterval);
    for s in &rep.per_scale {
        assert!((s.eps1 + 1.0).abs() <= 0.05 && (s.eps2 - 1.0).abs() <= 0.05, "{s:?}");
    }
    let w = rep.widths();
    assert!((w[2] - w[1]).abs() < 0.1 * w[1]);
    let csv = rep.sweep_csv_with(|v| format!("{v}"));
    assert!(csv.starts_with("L,eps1,eps2,width\n"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn spanning_persists_in_larger_windows() {
    let cfg = CriticalConfig::default();
    for p in [two_cos(1.0, 2.0), two_cos(2.0, 2.0)] {
        for k in 0..13 {
            let eps = -1.5 + 0.25 * k as f64;
            let mut spanned = false;
            for l in [5.0, 10.0, 20.0] {
                let probe = probe_spanning(&p, eps, l, &[vec![0.0, 0.0]], &cfg).unwrap();
                assert!(!spanned || probe.spanning_any, "eps {eps}, L {l}");
                spanned = probe.spanning_any;
                assert_eq!(probe.spanning_any, probe.spanning_count > 0);
            }
        }
    }
}

#[test]
fn integer_preshift_gives_the_same_report() {
    let p = star();
    let q = phase_shift(&p, &[3.0, -2.0, 7.0, 0.0, -11.0]).unwrap();
    let phases = default_phases(&p, 2);
    let cfg = CriticalConfig::default();
    let a = collapse_analysis(&p, &[4.0, 6.0, 8.0], (-2.0, 4.0), &phases, 0.01, &cfg).unwrap();
    let b = collapse_analysis(&q, &[4.0, 6.0, 8.0], (-2.0, 4.0), &phases, 0.01, &cfg).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn bisection_budget_per_endpoint() {
    let p = star();
    let (lo, hi, tol) = (-2.0, 4.0, 0.005);
    let s = estimate_interval(&p, 10.0, lo, hi, &default_phases(&p, 4), tol, &CriticalConfig::default())
        .unwrap();
    let per_endpoint = ((hi - lo) / tol as f64).log2().ceil() as usize;
    for t in &s.per_phase {
        assert!(t.probes <= 2 * per_endpoint);
        let (a, b) = t.interval();
        assert!(s.eps1 <= a && b <= s.eps2);
    }
}

#[test]
fn phase_choice_barely_moves_the_estimate() {
    let p = star();
    let cfg = CriticalConfig::default();
    let scales = [20.0, 40.0, 80.0];
    let zero = collapse_analysis(&p, &scales, (-2.0, 4.0), &[vec![0.0; 5]], 0.005, &cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let random = random_phases(&p, 8, &mut rng);
    let many = collapse_analysis(&p, &scales, (-2.0, 4.0), &random, 0.005, &cfg).unwrap();
    let allowed = 2.0 * zero.eps0_uncertainty.max(many.eps0_uncertainty);
    assert!(
        (zero.eps0_estimate - many.eps0_estimate).abs() <= allowed,
        "{} vs {} (allowed {allowed})",
        zero.eps0_estimate,
        many.eps0_estimate
    );
}

#[test]
fn bad_input_is_rejected() {
    let p = star();
    let cfg = CriticalConfig::default();
    let phases = default_phases(&p, 0);
    assert!(matches!(
        estimate_interval(&p, 10.0, 2.0, 4.0, &phases, 0.01, &cfg),
        Err(Error::BracketInvalid(_))
    ));
    assert!(matches!(
        estimate_interval(&p, 10.0, -2.0, 4.0, &[], 0.01, &cfg),
        Err(Error::Precondition(_))
    ));
    assert!(collapse_analysis(&p, &[5.0, 10.0], (-2.0, 4.0), &phases, 0.01, &cfg).is_err());
    assert!(collapse_analysis(&p, &[5.0, 10.0, 10.0], (-2.0, 4.0), &phases, 0.01, &cfg).is_err());
    let tight = CriticalConfig { node_cap: 100, ..cfg };
    assert!(matches!(
        estimate_interval(&p, 10.0, -2.0, 4.0, &phases, 0.01, &tight),
        Err(Error::ResourceCap { .. })
    ));
}

#[test]
fn report_round_trips_through_json() {
    let p = two_cos(2.0, 2.0);
    let cfg = CriticalConfig::default();
    let rep = collapse_analysis(&p, &[3.0, 4.0, 5.0], (-3.0, 3.0), &[vec![0.0, 0.0]], 0.01, &cfg).unwrap();
    let json = serde_json::to_string(&rep).unwrap();
    assert!(json.contains("\"L\"") && json.contains(critical::CRITERION_VERSION));
    let back: CriticalReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back, rep);
}
