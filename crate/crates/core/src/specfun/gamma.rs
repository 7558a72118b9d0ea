use super::scaled::Scaled;
use super::SpecfunError;
use std::f64::consts::PI;

/// Distance from a non-positive integer below which Γ(x) is treated as a pole.
pub const DEFAULT_POLE_TOL: f64 = 1e-12;

/// Γ(x) on the real line, using [`DEFAULT_POLE_TOL`].
pub fn gamma_real(x: f64) -> Result<f64, SpecfunError> {
    gamma_real_with_tol(x, DEFAULT_POLE_TOL)
}

pub fn gamma_real_with_tol(x: f64, pole_tol: f64) -> Result<f64, SpecfunError> {
    if !x.is_finite() {
        return Err(SpecfunError::NonFinite { what: "gamma argument", value: x });
    }
    let n = x.round();
    if n <= 0.0 && (x - n).abs() < pole_tol {
        return Err(SpecfunError::Pole { x });
    }
    Ok(libm::tgamma(x))
}

/// sin(πx), exact at integers and accurate near them.
pub fn sinpi(x: f64) -> f64 {
    let n = x.round();
    let f = x - n;
    let s = (PI * f).sin();
    if n.rem_euclid(2.0) == 0.0 {
        s
    } else {
        -s
    }
}

/// cos(πx), exact at half-integers and accurate near integers.
pub fn cospi(x: f64) -> f64 {
    let n = x.round();
    let f = x - n;
    let c = if f.abs() == 0.5 { 0.0 } else { (PI * f).cos() };
    if n.rem_euclid(2.0) == 0.0 {
        c
    } else {
        -c
    }
}

/// ln Γ(x) for x > 0.
pub(crate) fn ln_gamma_pos(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    libm::lgamma_r(x).0
}

/// 1/Γ(x) in scaled form. Entire; exactly zero at non-positive integers.
pub fn rgamma_scaled(x: f64) -> Scaled {
    if x > 0.0 {
        return Scaled::from_log(1.0, -ln_gamma_pos(x));
    }
    if x == x.round() {
        return Scaled::ZERO;
    }
    // reflection: 1/Γ(x) = sin(πx) Γ(1-x) / π
    Scaled::new(sinpi(x) / PI, ln_gamma_pos(1.0 - x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_and_half_integer_values() {
        assert!((gamma_real(1.0).unwrap() - 1.0).abs() < 1e-15);
        let sqrt_pi = PI.sqrt();
        assert!((gamma_real(0.5).unwrap() - sqrt_pi).abs() < 1e-14);
        assert!((gamma_real(-0.5).unwrap() + 2.0 * sqrt_pi).abs() < 1e-14);
    }

    #[test]
    fn poles_are_reported() {
        assert!(matches!(gamma_real(0.0), Err(SpecfunError::Pole { .. })));
        assert!(matches!(gamma_real(-3.0 + 1e-13), Err(SpecfunError::Pole { .. })));
        assert!(gamma_real(-3.0 + 1e-9).is_ok());
        assert!(gamma_real_with_tol(-3.0 + 1e-9, 1e-6).is_err());
    }

    #[test]
    fn rgamma_zeros_and_reflection() {
        for k in 0..6 {
            assert!(rgamma_scaled(-(k as f64)).is_zero());
        }
        for &x in &[-7.3, -2.5, -0.1, 0.3, 4.75, 150.2] {
            let direct = 1.0 / libm::tgamma(x);
            let r = rgamma_scaled(x).to_f64();
            assert!(((r - direct) / direct).abs() < 1e-12, "x={x}: {r} vs {direct}");
        }
    }

    #[test]
    fn trig_of_pi_multiples() {
        assert_eq!(sinpi(3.0), 0.0);
        assert_eq!(cospi(2.5), 0.0);
        assert_eq!(cospi(-3.0), -1.0);
        let x = -1.0 + 5e-15;
        let eps = x + 1.0;
        // sin(-π + πε) = -sin(πε), with no loss from reducing near -π
        let s = sinpi(x);
        assert!((s + (PI * eps).sin()).abs() < 1e-15 * s.abs());
    }
}
