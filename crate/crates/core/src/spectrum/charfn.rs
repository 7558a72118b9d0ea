//! The Wronskian of the two branch solutions and the characteristic function
//! whose zeros are the decorated eigenvalues.

use super::{DimpleSpec, SpectrumError};
use crate::specfun::{d_pair_both, rgamma_scaled, Scaled};
use std::f64::consts::{LN_2, PI};

/// Distance from a non-negative integer inside which [`wronskian`] returns 0.
pub const WRONSKIAN_POLE_TOL: f64 = 1e-12;

/// W[D_ξ(z), D_ξ(−z)] = 2^{ξ+3/2} π / (Γ(−ξ/2) Γ((1−ξ)/2)), scaled, no snapping.
pub fn wronskian_scaled(xi: f64) -> Scaled {
    let prefactor = Scaled::new(PI, (xi + 1.5) * LN_2);
    prefactor * rgamma_scaled(-0.5 * xi) * rgamma_scaled(0.5 * (1.0 - xi))
}

/// Closed-form Wronskian; exactly zero at (and within 1e-12 of) ξ = 0, 1, 2, …
pub fn wronskian(xi: f64) -> f64 {
    let n = xi.round();
    if n >= 0.0 && (xi - n).abs() < WRONSKIAN_POLE_TOL {
        return 0.0;
    }
    wronskian_scaled(xi).to_f64()
}

/// Pieces of g(ξ) = W(ξ) − Λ D_ξ(z₁) D_ξ(−z₁), kept apart so the caller can
/// normalize without overflow.
#[derive(Clone, Copy, Debug)]
pub struct CharValue {
    pub g: Scaled,
    pub wronskian: Scaled,
    /// Λ D_ξ(z₁) D_ξ(−z₁)
    pub coupling: Scaled,
    /// Absolute error estimate of `g`.
    pub err: Scaled,
}

impl CharValue {
    /// √(W² + (ΛDD)²), the natural size of g near ξ.
    pub fn norm(&self) -> Scaled {
        let log = self.wronskian.ln_abs().max(self.coupling.ln_abs());
        if !log.is_finite() {
            return Scaled::ZERO;
        }
        let a = self.wronskian.rescaled_to(log);
        let b = self.coupling.rescaled_to(log);
        Scaled::new(a.hypot(b), log)
    }

    fn ratio(&self, x: Scaled) -> f64 {
        let n = self.norm();
        if n.is_zero() {
            return 0.0;
        }
        x.div(n).to_f64()
    }

    /// g / √(W² + (ΛDD)²): bounded in [−√2, √2], same zeros and signs as g.
    pub fn normalized(&self) -> f64 {
        self.ratio(self.g)
    }

    pub fn normalized_wronskian(&self) -> f64 {
        self.ratio(self.wronskian)
    }

    pub fn relative_error(&self) -> f64 {
        self.ratio(self.err).abs()
    }
}

pub fn char_fn_scaled(xi: f64, dimple: &DimpleSpec) -> Result<CharValue, SpectrumError> {
    if !xi.is_finite() {
        return Err(SpectrumError::InvalidInput(format!("non-finite xi {xi}")));
    }
    let w = wronskian_scaled(xi);
    if dimple.lambda == 0.0 {
        let err = w.abs().scale(8.0 * f64::EPSILON);
        return Ok(CharValue { g: w, wronskian: w, coupling: Scaled::ZERO, err });
    }
    let (plus, minus) = d_pair_both(xi, dimple.z1.abs());
    let product = plus.val * minus.val;
    let lambda = Scaled::from_f64(dimple.lambda);
    let coupling = product * lambda;
    let prod_err = (plus.val.abs() * minus.err).add(minus.val.abs() * plus.err);
    let err =
        (prod_err * lambda.abs()).add(w.abs().scale(8.0 * f64::EPSILON)).add(coupling.abs().scale(4.0 * f64::EPSILON));
    Ok(CharValue { g: w.sub(coupling), wronskian: w, coupling, err })
}

/// g(ξ) = W(ξ) − Λ D_ξ(z₁) D_ξ(−z₁) as a plain float (may overflow for
/// large ξ; the solver works with [`char_fn_scaled`]).
pub fn char_fn(xi: f64, dimple: &DimpleSpec) -> Result<f64, SpectrumError> {
    Ok(char_fn_scaled(xi, dimple)?.g.to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wronskian_closed_forms() {
        assert_eq!(wronskian(0.0), 0.0);
        assert_eq!(wronskian(3.0 + 1e-13), 0.0);
        assert!((wronskian(-1.0) - (2.0 * PI).sqrt()).abs() < 1e-13);
        assert!((wronskian(-0.5) - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn wronskian_matches_duplication_form() {
        // W = √(2π)/Γ(−ξ)
        for &xi in &[-7.3, -2.2, -0.1, 0.4, 1.7, 5.5, 12.25] {
            let direct = (2.0 * PI).sqrt() / libm::tgamma(-xi);
            assert!(((wronskian(xi) - direct) / direct).abs() < 1e-12, "xi={xi}");
        }
    }

    #[test]
    fn char_fn_examples() {
        let bare = DimpleSpec::new(0.0, 1.7).unwrap();
        assert!((char_fn(-1.0, &bare).unwrap() - 2.5066282746310002).abs() < 1e-12);
        assert!((char_fn(-0.5, &bare).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        let centered = DimpleSpec::new(5.0, 0.0).unwrap();
        assert!((char_fn(0.0, &centered).unwrap() + 5.0).abs() < 1e-13);
    }
}
