use dimple_core::specfun::oscillator_state;
use dimple_core::spectrum::*;
use proptest::prelude::*;
use std::f64::consts::PI;

fn settings(m1: usize, m2: usize) -> SolverSettings {
    SolverSettings { exact_levels: m1, perturbative_levels: m2, ..SolverSettings::default() }
}

fn solve(lambda: f64, z1: f64, levels: usize) -> Spectrum {
    let m = levels.max(1);
    solve_spectrum(&DimpleSpec::new(lambda, z1).unwrap(), &settings(m, m), levels).unwrap()
}

#[test]
fn wronskian_examples() {
    assert_eq!(wronskian(0.0), 0.0);
    assert_eq!(wronskian(3.0), 0.0);
    assert!((wronskian(-1.0) - (2.0 * PI).sqrt()).abs() < 1e-10);
    assert!((wronskian(-0.5) - 2f64.sqrt()).abs() < 1e-10);
}

#[test]
fn char_fn_examples() {
    let bare = DimpleSpec::bare();
    assert!((char_fn(-1.0, &bare).unwrap() - 2.5066283).abs() < 1e-7);
    assert!((char_fn(-0.5, &DimpleSpec::new(0.0, 2.3).unwrap()).unwrap() - 1.4142136).abs() < 1e-7);
    assert!((char_fn(0.0, &DimpleSpec::new(5.0, 0.0).unwrap()).unwrap() + 5.0).abs() < 1e-12);
}

#[test]
fn bare_levels_are_integers() {
    for z1 in [0.0, 0.7, -3.0] {
        assert_eq!(solve(0.0, z1, 5).xis, vec![0.0, 1.0, 2.0, 3.0, 4.0]);
    }
}

#[test]
fn deep_center_dimple() {
    let s = solve(32.0, 0.0, 4);
    assert_eq!(s.xis[1], 1.0);
    assert_eq!(s.xis[3], 3.0);
    assert!((s.xis[0] + 256.5).abs() < 1.0, "{}", s.xis[0]);
}

#[test]
fn weak_center_dimple_is_perturbative() {
    let xi0 = solve(0.01, 0.0, 1).xis[0];
    // first order −Λ/√(2π) plus the second-order correction
    let first = -0.01 / (2.0 * PI).sqrt();
    assert!((xi0 - first).abs() < 2e-5, "{xi0}");
    assert!((xi0 + 0.0040005).abs() < 2e-6, "{xi0}");
}

#[test]
fn oracle_examples() {
    let d = DimpleSpec::new(0.0, 1.3).unwrap();
    assert_eq!(spectrum_oracle(&d, 50, 3).unwrap(), vec![0.0, 1.0, 2.0]);
    let o = spectrum_oracle(&DimpleSpec::new(0.01, 0.0).unwrap(), 400, 1).unwrap()[0];
    assert!((o + 0.0039998).abs() < 1e-6, "{o}");
}

#[test]
fn oracle_agrees_at_moderate_strength() {
    let d = DimpleSpec::new(1.0, 1.0).unwrap();
    let ours = solve(1.0, 1.0, 20).xis;
    let mut last = f64::INFINITY;
    for basis in [1000, 2000, 4000] {
        let o = spectrum_oracle(&d, basis, 20).unwrap();
        let gap = ours.iter().zip(&o).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(gap < last, "basis {basis}: {gap}");
        last = gap;
    }
    assert!(last < 5e-3, "{last}");
}

#[test]
fn dense_and_secular_oracles_agree() {
    let d = DimpleSpec::new(3.2, 1.0).unwrap();
    let a = spectrum_oracle_dense(&d, 200, 10).unwrap();
    let b = spectrum_oracle_secular(&d, 200, 10).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-9, "{x} vs {y}");
    }
}

#[test]
fn zones_follow_settings() {
    let s = solve_spectrum(&DimpleSpec::new(3.2, 1.0).unwrap(), &settings(8, 32), 40).unwrap();
    assert_eq!(s.exact_root_count(), 8);
    assert_eq!(s.zones[7], Zone::ExactRoot);
    assert_eq!(s.zones[8], Zone::Perturbative);
    assert_eq!(s.zones[32], Zone::Unperturbed);
    assert_eq!(s.xis[39], 39.0);
    // zone 2 is the first-order shift
    let phi = oscillator_state(20, 1.0);
    assert!((s.xis[20] - (20.0 - 3.2 * phi * phi)).abs() < 1e-12);
}

#[test]
fn sigma_examples() {
    let trap = TrapConfig::from_amu_hz(23.0, 21.0, 10_000).unwrap();
    assert_eq!(sigma_to_lambda(0.0, &trap), 0.0);
    assert!((sigma_to_lambda(1e8, &trap) / 320.0 - 1.0).abs() < 0.02);
    assert!((sigma_to_lambda(1e10, &trap) / 32000.0 - 1.0).abs() < 0.02);
}

#[test]
fn invalid_inputs_are_rejected() {
    assert!(DimpleSpec::new(f64::NAN, 0.0).is_err());
    assert!(DimpleSpec::new(1.0, f64::INFINITY).is_err());
    assert!(solve_spectrum(&DimpleSpec::bare(), &settings(4, 4), 0).is_err());
    assert!(solve_spectrum(&DimpleSpec::bare(), &settings(8, 4), 4).is_err());
}

#[test]
fn cache_round_trips_bit_exactly() {
    let s = solve_spectrum(&DimpleSpec::new(3.2, 1.0).unwrap(), &settings(8, 16), 20).unwrap();
    let r = decode_record(&encode_record(&s)).unwrap();
    assert_eq!(r.dimple, s.dimple);
    assert_eq!(r.zones, s.zones);
    assert_eq!(r.settings_digest, s.settings.digest());
    assert!(r.xis.iter().zip(&s.xis).all(|(a, b)| a.to_bits() == b.to_bits()));
}

#[test]
fn disk_cache_counts_hits() {
    let dir = tempfile::tempdir().unwrap();
    let d = DimpleSpec::new(2.0, 0.5).unwrap();
    let st = settings(8, 16);
    let first = SpectrumCache::with_dir(dir.path());
    let a = first.get_or_solve(&d, &st, 20).unwrap();
    // one fresh solve per exactly-solved root
    assert_eq!(first.fresh_solves(), 8);
    let second = SpectrumCache::with_dir(dir.path());
    let b = second.get_or_solve(&d, &st, 20).unwrap();
    assert_eq!((second.fresh_solves(), second.disk_hits()), (0, 1));
    assert_eq!(a.xis, b.xis);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn interlacing(lambda in 1e-3f64..100.0, z1 in -5.0f64..5.0) {
        let s = solve(lambda, z1, 24);
        prop_assert!(s.xis[0] < 0.0);
        for n in 1..s.xis.len() {
            let x = s.xis[n];
            prop_assert!(x > (n - 1) as f64 && x <= n as f64, "n={} xi={}", n, x);
        }
    }

    #[test]
    fn repulsive_interlacing(lambda in -100.0f64..-1e-3, z1 in -5.0f64..5.0) {
        let s = solve(lambda, z1, 24);
        for (n, &x) in s.xis.iter().enumerate() {
            prop_assert!(x >= n as f64 && x < (n + 1) as f64, "n={} xi={}", n, x);
        }
    }

    #[test]
    fn mirror_symmetry(lambda in -50.0f64..100.0, z1 in 0.0f64..5.0) {
        let (a, b) = (solve(lambda, z1, 16), solve(lambda, -z1, 16));
        for (x, y) in a.xis.iter().zip(&b.xis) {
            prop_assert!((x - y).abs() <= 1e-9, "{} vs {}", x, y);
        }
    }

    #[test]
    fn deepening_lowers_levels(z1 in -4.0f64..4.0) {
        let mut prev = solve(0.0, z1, 12).xis;
        for lambda in [1.0, 2.0, 4.0, 8.0] {
            let cur = solve(lambda, z1, 12).xis;
            for (n, (c, p)) in cur.iter().zip(&prev).enumerate() {
                prop_assert!(c <= p, "lambda={} n={} {} > {}", lambda, n, c, p);
            }
            prev = cur;
        }
    }

    #[test]
    fn nodes_persist(lambda in 0.1f64..60.0, n in 1usize..6) {
        // z₁ = 0 is a node of every odd level; ±1 of He₂ (z/√2 a zero of H₂ ⇔ z = ±1)
        let s = solve(lambda, 0.0, 12);
        prop_assert_eq!(s.xis[2 * n - 1], (2 * n - 1) as f64);
        let s = solve(lambda, 1.0, 4);
        prop_assert!((s.xis[2] - 2.0).abs() <= 1e-10, "{}", s.xis[2]);
    }

    #[test]
    fn roots_have_small_residual(lambda in -40.0f64..60.0, z1 in -4.0f64..4.0) {
        let s = solve(lambda, z1, 16);
        for &x in &s.xis {
            let g = char_fn(x, &s.dimple).unwrap();
            prop_assert!(g.abs() <= 1e-8 * (1.0 + wronskian(x).abs()), "xi={} g={}", x, g);
        }
    }
}
