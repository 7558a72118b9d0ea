//! Floating-point values carried as `mant * exp(log)`.
//!
//! Parabolic cylinder functions at large |order| overflow or underflow
//! `f64` long before the quantities built from them (ratios, normalized
//! characteristic functions) do. Everything inside the kernel is carried in
//! this form and only collapsed to `f64` at the boundary.

use std::cmp::Ordering;
use std::ops::{Mul, Neg};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scaled {
    pub mant: f64,
    pub log: f64,
}

impl Scaled {
    pub const ZERO: Scaled = Scaled { mant: 0.0, log: 0.0 };
    pub const ONE: Scaled = Scaled { mant: 1.0, log: 0.0 };

    pub fn new(mant: f64, log: f64) -> Self {
        Scaled { mant, log }.normalized()
    }

    pub fn from_f64(x: f64) -> Self {
        Scaled::new(x, 0.0)
    }

    /// `sign * exp(log)`
    pub fn from_log(sign: f64, log: f64) -> Self {
        Scaled { mant: sign, log }
    }

    pub fn is_zero(&self) -> bool {
        self.mant == 0.0
    }

    pub fn signum(&self) -> f64 {
        if self.mant > 0.0 {
            1.0
        } else if self.mant < 0.0 {
            -1.0
        } else {
            0.0
        }
    }

    /// ln |value|; `-inf` for zero.
    pub fn ln_abs(&self) -> f64 {
        if self.mant == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.mant.abs().ln() + self.log
        }
    }

    pub fn abs(self) -> Self {
        Scaled { mant: self.mant.abs(), log: self.log }
    }

    pub fn normalized(self) -> Self {
        if self.mant == 0.0 || !self.mant.is_finite() {
            return Scaled { mant: self.mant, log: if self.mant == 0.0 { 0.0 } else { self.log } };
        }
        let shift = self.mant.abs().ln();
        Scaled { mant: self.mant.signum(), log: self.log + shift }
    }

    pub fn to_f64(self) -> f64 {
        if self.mant == 0.0 {
            return 0.0;
        }
        self.mant.signum() * self.ln_abs().exp()
    }

    /// Value relative to `exp(log)`, i.e. `self / exp(log)` as a plain float.
    pub fn rescaled_to(self, log: f64) -> f64 {
        if self.mant == 0.0 {
            return 0.0;
        }
        self.mant * (self.log - log).exp()
    }

    pub fn add(self, other: Scaled) -> Scaled {
        if self.mant == 0.0 {
            return other;
        }
        if other.mant == 0.0 {
            return self;
        }
        let log = self.ln_abs().max(other.ln_abs());
        Scaled::new(self.rescaled_to(log) + other.rescaled_to(log), log)
    }

    pub fn sub(self, other: Scaled) -> Scaled {
        self.add(-other)
    }

    pub fn scale(self, k: f64) -> Scaled {
        Scaled::new(self.mant * k, self.log)
    }

    pub fn div(self, other: Scaled) -> Scaled {
        Scaled::new(self.mant / other.mant, self.log - other.log)
    }

    pub fn sqrt(self) -> Scaled {
        debug_assert!(self.mant >= 0.0);
        let n = self.normalized();
        Scaled { mant: n.mant.sqrt(), log: 0.5 * n.log }
    }

    pub fn cmp_abs(&self, other: &Scaled) -> Ordering {
        self.ln_abs().partial_cmp(&other.ln_abs()).unwrap_or(Ordering::Equal)
    }
}

impl Mul for Scaled {
    type Output = Scaled;
    fn mul(self, rhs: Scaled) -> Scaled {
        Scaled::new(self.mant * rhs.mant, self.log + rhs.log)
    }
}

impl Neg for Scaled {
    type Output = Scaled;
    fn neg(self) -> Scaled {
        Scaled { mant: -self.mant, log: self.log }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_matches_plain_floats() {
        let a = Scaled::from_f64(3.5);
        let b = Scaled::from_f64(-1.25);
        assert!(((a * b).to_f64() + 4.375).abs() < 1e-14);
        assert!((a.add(b).to_f64() - 2.25).abs() < 1e-14);
        assert!((a.div(b).to_f64() + 2.8).abs() < 1e-14);
        assert!((Scaled::from_f64(16.0).sqrt().to_f64() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn survives_far_outside_f64_range() {
        let big = Scaled::from_log(1.0, 2000.0);
        let tiny = Scaled::from_log(-1.0, -2000.0);
        let p = big * tiny;
        assert!((p.to_f64() + 1.0).abs() < 1e-12);
        assert_eq!(big.to_f64(), f64::INFINITY);
        assert_eq!(big.add(tiny).ln_abs(), 2000.0);
    }
}
