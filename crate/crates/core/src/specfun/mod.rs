//! Special functions: Γ on the real line, Hermite polynomials and the
//! real-order parabolic cylinder function D_ν(z).

mod gamma;
mod hermite;
mod pcf;
mod scaled;

pub use gamma::{cospi, gamma_real, gamma_real_with_tol, rgamma_scaled, sinpi, DEFAULT_POLE_TOL};
pub use hermite::{hermite_phys, oscillator_state, oscillator_states};
pub use pcf::{pcf_d, pcf_d_deriv, PcfPair};
pub use scaled::Scaled;

pub(crate) use pcf::{d_pair, d_pair_both};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecfunError {
    #[error("gamma function pole at x = {x}")]
    Pole { x: f64 },
    #[error("non-finite {what}: {value}")]
    NonFinite { what: &'static str, value: f64 },
}

/// Real order ν of a parabolic cylinder function. Any finite value.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct RealOrder(f64);

impl RealOrder {
    pub fn new(nu: f64) -> Result<Self, SpecfunError> {
        if nu.is_finite() {
            Ok(RealOrder(nu))
        } else {
            Err(SpecfunError::NonFinite { what: "order", value: nu })
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for RealOrder {
    type Error = SpecfunError;
    fn try_from(nu: f64) -> Result<Self, Self::Error> {
        RealOrder::new(nu)
    }
}

/// A function value together with the evaluation route's claimed bound on
/// its absolute error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalResult {
    pub value: f64,
    pub abs_error_estimate: f64,
}

impl EvalResult {
    pub fn relative_error_estimate(&self) -> f64 {
        self.abs_error_estimate / self.value.abs().max(f64::MIN_POSITIVE)
    }
}
