use dimple_core::density::*;
use dimple_core::specfun::{pcf_d, pcf_d_deriv, RealOrder};
use dimple_core::spectrum::{solve_spectrum, DimpleSpec, SolverSettings, Spectrum};
use proptest::prelude::*;
use std::f64::consts::PI;

fn spec(lambda: f64, z1: f64) -> Spectrum {
    let d = DimpleSpec::new(lambda, z1).unwrap();
    let st = SolverSettings { exact_levels: 4, perturbative_levels: 4, ..SolverSettings::default() };
    solve_spectrum(&d, &st, 2).unwrap()
}

fn gs(lambda: f64, z1: f64) -> GroundState {
    let s = spec(lambda, z1);
    ground_state(&s.dimple, &s).unwrap()
}

fn grid(a: f64, b: f64, step: f64) -> Vec<f64> {
    let n = ((b - a) / step).round() as usize;
    (0..=n).map(|i| a + step * i as f64).collect()
}

/// Composite Simpson on each side of `at`, which must be a grid point
/// with an even number of steps on both sides.
fn simpson_split(p: &DensityProfile, at: f64) -> f64 {
    let k = p.grid.iter().position(|&z| (z - at).abs() < 1e-9).unwrap();
    let part = |v: &[f64], z: &[f64]| {
        assert!(v.len() % 2 == 1);
        let h = z[1] - z[0];
        let inner: f64 =
            v[1..v.len() - 1].iter().enumerate().map(|(i, x)| if i % 2 == 0 { 4.0 * x } else { 2.0 * x }).sum();
        h / 3.0 * (v[0] + inner + v[v.len() - 1])
    };
    part(&p.values[..=k], &p.grid[..=k]) + part(&p.values[k..], &p.grid[k..])
}

fn gaussian(z: f64) -> f64 {
    (-z * z / 2.0).exp() / (2.0 * PI).sqrt()
}

#[test]
fn bare_trap_is_gaussian() {
    let g = gs(0.0, 0.0);
    let p = density_profile(&g, &grid(-6.0, 6.0, 0.01), None).unwrap();
    assert!((p.max() - 0.3989423).abs() < 1e-7);
    assert!((p.integral() - 1.0).abs() < 1e-6);
    for (z, v) in p.grid.iter().zip(&p.values) {
        assert!((v - gaussian(*z)).abs() < 1e-12, "z={z}");
    }
}

#[test]
fn decorated_profile_peaks_at_the_dimple() {
    let g = gs(3.6, 1.0);
    let p = density_profile(&g, &grid(-6.0, 6.0, 0.01), None).unwrap();
    assert!((p.argmax() - 1.0).abs() <= 0.01 + 1e-12, "{}", p.argmax());
    assert!(p.max() > 1.0 / (2.0 * PI).sqrt());
    assert!((g.norm() - 1.0).abs() < 1e-8);
    assert!((simpson_split(&p, 1.0) - 1.0).abs() < 1e-6);
    // the trapezoid rule misses ≈ (h²/12)·2Λψ(z₁)² at the kink
    let kink = 1e-4 / 12.0 * 2.0 * 3.6 * p.max();
    assert!((p.integral() - 1.0 - kink).abs() < 1e-6, "{}", p.integral());
    assert!(p.values.iter().all(|&v| v >= 0.0));
}

#[test]
fn continuous_across_the_delta() {
    let g = gs(3.6, 1.0);
    let (l, r) = (g.psi(1.0 - 1e-12), g.psi(1.0));
    assert!((l - r).abs() < 1e-10 * r);
}

#[test]
fn cusp_matches_independent_derivatives() {
    let (lambda, z1) = (3.6, 1.0);
    let g = gs(lambda, z1);
    let nu = RealOrder::new(g.xi0).unwrap();
    let (dp, dm) = (pcf_d(nu, z1).unwrap().value, pcf_d(nu, -z1).unwrap().value);
    let (dpp, dpm) = (pcf_d_deriv(nu, z1).unwrap().value, pcf_d_deriv(nu, -z1).unwrap().value);
    let psi1 = g.psi(z1);
    // right branch ∝ D(z), left branch ∝ D(−z)
    let jump = psi1 * (dpp / dp + dpm / dm);
    assert!((jump + lambda * psi1).abs() <= 1e-6 * lambda * psi1, "{jump}");
    assert!((g.cusp_jump() - jump).abs() <= 1e-9 * jump.abs());
}

#[test]
fn n0_scaling_multiplies() {
    let g = gs(3.6, 1.0);
    let z = grid(-2.0, 2.0, 0.5);
    let a = density_profile(&g, &z, None).unwrap();
    let b = density_profile(&g, &z, Some(9280.0)).unwrap();
    for (x, y) in a.values.iter().zip(&b.values) {
        assert!((9280.0 * x - y).abs() <= 1e-12 * y);
    }
}

#[test]
fn bad_inputs() {
    let g = gs(1.0, 0.5);
    assert!(density_profile(&g, &[0.0, 0.0], None).is_err());
    assert!(density_profile(&g, &[1.0, 0.0], None).is_err());
    let other = spec(1.0, 0.7);
    assert!(matches!(ground_state(&DimpleSpec::new(1.0, 0.5).unwrap(), &other), Err(DensityError::InvalidInput(_))));
    let mut wrong = spec(1.0, 0.5);
    wrong.xis[0] += 0.05;
    assert!(matches!(ground_state(&wrong.dimple, &wrong), Err(DensityError::NotARoot { .. })));
}

#[test]
fn weak_dimple_approaches_gaussian() {
    let g = gs(1e-4, 0.8);
    let p = density_profile(&g, &grid(-6.0, 6.0, 0.01), None).unwrap();
    let dev = p.grid.iter().zip(&p.values).map(|(z, v)| (v - gaussian(*z)).abs()).fold(0.0, f64::max);
    assert!(dev < 1e-3, "{dev}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cusp_condition(lambda in -20.0f64..40.0, z1 in -4.0f64..4.0) {
        let g = gs(lambda, z1);
        let want = -lambda * g.psi(z1);
        prop_assert!((g.cusp_jump() - want).abs() <= 1e-6 * want.abs().max(1e-300), "{} vs {}", g.cusp_jump(), want);
    }

    #[test]
    fn normalized_and_nodeless(lambda in -20.0f64..40.0, z1 in -4.0f64..4.0) {
        let g = gs(lambda, z1);
        prop_assert!((g.norm() - 1.0).abs() < 1e-8);
        let p = density_profile(&g, &grid(-8.0, 8.0, 0.05), None).unwrap();
        prop_assert!(p.values.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn mirror(lambda in -10.0f64..20.0, z1 in 0.0f64..4.0) {
        let (a, b) = (gs(lambda, z1), gs(lambda, -z1));
        for z in grid(-5.0, 5.0, 0.25) {
            let (x, y) = (a.psi(z).powi(2), b.psi(-z).powi(2));
            prop_assert!((x - y).abs() <= 1e-9, "z={} {} vs {}", z, x, y);
        }
    }
}
