//! Real-order parabolic cylinder function D_ν(z).
//!
//! D_ν solves Weber's equation y'' = (z²/4 − ν − ½) y and decays as z → +∞.
//! Evaluation never sums the Maclaurin series in one shot: for large |ν| or
//! |z| that series cancels catastrophically. Instead the equation is
//! continued with short Taylor steps (the coefficients are a three-term
//! recurrence because the potential is a quadratic), always in the stable
//! direction:
//!
//! * inside the oscillatory region, or just past the turning point, the
//!   solution is integrated outward from the origin, where D_ν(0) and
//!   D′_ν(0) are known exactly through Γ;
//! * deeper in the forbidden region the recessive solution is integrated
//!   inward from a point far enough out that any error in the starting
//!   log-derivative has decayed below rounding, then normalized against the
//!   exact origin data;
//! * for z < 0 the connection formula
//!   D_ν(−x) = cos(πν) D_ν(x) + π/Γ(−ν) · V(−ν−½, x)
//!   is used, with V integrated outward (it is the dominant solution).
//!
//! All magnitudes are carried in [`Scaled`] form so orders of several
//! hundred do not overflow.

use super::gamma::{cospi, rgamma_scaled, sinpi};
use super::scaled::Scaled;
use super::{EvalResult, RealOrder, SpecfunError};
use std::f64::consts::{LN_2, PI};

const EPS: f64 = f64::EPSILON;
/// Forbidden-region action below which outward integration of the recessive
/// solution is still accurate (error growth at most e^{2A}).
const OUTWARD_ACTION_LIMIT: f64 = 2.5;
/// Action separating the inward starting point from the target.
const INWARD_DECAY_ACTION: f64 = 20.0;

/// Value and z-derivative of a solution at one point, sharing a scale.
#[derive(Clone, Copy, Debug)]
pub struct PcfPair {
    pub val: Scaled,
    pub der: Scaled,
    /// Absolute error estimate of `val`.
    pub err: Scaled,
}

impl PcfPair {
    fn from_track(t: &Track) -> PcfPair {
        let k = local_wavenumber(t.c, t.z);
        let amplitude = t.y.abs() + t.dy.abs() / k;
        PcfPair {
            val: Scaled::new(t.y, t.log),
            der: Scaled::new(t.dy, t.log),
            err: Scaled::new(amplitude * t.rel_err, t.log),
        }
    }

    fn scaled_by(self, s: Scaled) -> PcfPair {
        PcfPair { val: self.val * s, der: self.der * s, err: self.err * s.abs() }
    }

    fn reflected(self) -> PcfPair {
        PcfPair { val: self.val, der: -self.der, err: self.err }
    }

    fn combine(self, a: Scaled, other: PcfPair, b: Scaled) -> PcfPair {
        let val = (self.val * a).add(other.val * b);
        let der = (self.der * a).add(other.der * b);
        // cancellation between the two terms shows up through the inputs'
        // absolute errors plus one rounding on the larger term
        let big =
            if (self.val * a).cmp_abs(&(other.val * b)).is_ge() { (self.val * a).abs() } else { (other.val * b).abs() };
        let err = (self.err * a.abs()).add(other.err * b.abs()).add(big.scale(4.0 * EPS));
        PcfPair { val, der, err }
    }
}

fn local_wavenumber(c: f64, z: f64) -> f64 {
    (0.25 * z * z - c).abs().sqrt().max(1.0)
}

/// State of a Taylor-stepped solution of y'' = (z²/4 − c) y.
#[derive(Clone, Copy, Debug)]
struct Track {
    c: f64,
    z: f64,
    y: f64,
    dy: f64,
    log: f64,
    rel_err: f64,
    steps: usize,
}

impl Track {
    fn new(c: f64, z: f64, y: Scaled, dy: Scaled) -> Track {
        let log = y.ln_abs().max(dy.ln_abs());
        let log = if log.is_finite() { log } else { 0.0 };
        Track { c, z, y: y.rescaled_to(log), dy: dy.rescaled_to(log), log, rel_err: 2.0 * EPS, steps: 0 }
    }

    fn renormalize(&mut self) {
        let m = self.y.abs().max(self.dy.abs());
        if m > 1e100 || (m < 1e-100 && m > 0.0) {
            self.y /= m;
            self.dy /= m;
            self.log += m.ln();
        }
    }

    /// One Taylor step of signed length `h`.
    fn step(&mut self, h: f64) {
        let q0 = 0.25 * self.z * self.z - self.c;
        let q1 = 0.5 * self.z;
        let q2 = 0.25;
        let h2 = h * h;
        // b_k = a_k h^k
        let (mut bm2, mut bm1, mut b0, mut b1) = (0.0f64, 0.0f64, self.y, self.dy * h);
        let mut y = b0 + b1;
        let mut dyh = b1;
        let mut abs_sum = b0.abs() + b1.abs();
        let mut k = 0usize;
        loop {
            let kf = k as f64;
            let b2 = h2 * (q0 * b0 + q1 * h * bm1 + q2 * h2 * bm2) / ((kf + 2.0) * (kf + 1.0));
            y += b2;
            dyh += (kf + 2.0) * b2;
            abs_sum += b2.abs() * (kf + 3.0);
            bm2 = bm1;
            bm1 = b0;
            b0 = b1;
            b1 = b2;
            k += 1;
            // every later coefficient is built from the last three, which
            // can vanish in pairs (z = 0, c = 0), so all three must be small
            let scale = y.abs() + dyh.abs() + f64::MIN_POSITIVE;
            let tiny = |b: f64| b.abs() * (kf + 4.0) < 1e-18 * scale;
            if k >= 4 && tiny(bm1) && tiny(b0) && tiny(b1) {
                break;
            }
            if k > 400 {
                break;
            }
        }
        let norm = y.abs() + dyh.abs() + f64::MIN_POSITIVE;
        self.rel_err += EPS * (1.0 + abs_sum / norm);
        self.y = y;
        self.dy = dyh / h;
        self.z += h;
        self.steps += 1;
        self.renormalize();
    }

    fn integrate_to(&mut self, target: f64) {
        while self.z != target {
            let q0 = (0.25 * self.z * self.z - self.c).abs();
            let q1 = 0.5 * self.z.abs();
            let a = (q0 + 0.5 * q1 + 0.25).sqrt();
            let hmax = (1.5 / a).min(1.0);
            let remaining = target - self.z;
            let h = if remaining.abs() <= hmax * 1.0000001 { remaining } else { hmax.copysign(remaining) };
            self.step(h);
            if (target - self.z).abs() < 1e-14 * (1.0 + target.abs()) {
                self.z = target;
            }
        }
    }
}

/// ∫ √max(z²/4 − c, 0) dz over [lo, hi], 0 ≤ lo ≤ hi.
pub(crate) fn forbidden_action(c: f64, lo: f64, hi: f64) -> f64 {
    let turning = 2.0 * c.max(0.0).sqrt();
    let lo = lo.max(turning);
    if hi <= lo {
        return 0.0;
    }
    // with u = z/2: 2∫√(u² − c) du, antiderivative ½[u s − c ln(u + s)]
    let f = |z: f64| {
        let u = 0.5 * z;
        let s = (u * u - c).max(0.0).sqrt();
        let log_term = if c == 0.0 { 0.0 } else { c * (u + s).ln() };
        0.5 * (u * s - log_term)
    };
    (2.0 * (f(hi) - f(lo))).max(0.0)
}

/// Exact D_ν(0), D′_ν(0).
fn d_origin(nu: f64) -> (Scaled, Scaled) {
    let sqrt_pi = PI.sqrt();
    let d0 = rgamma_scaled(0.5 * (1.0 - nu)) * Scaled::new(sqrt_pi, 0.5 * nu * LN_2);
    let d1 = rgamma_scaled(-0.5 * nu) * Scaled::new(-sqrt_pi, 0.5 * (nu + 1.0) * LN_2);
    (d0, d1)
}

/// Exact V(a, 0), V′(a, 0) for a = −ν − ½.
fn v_origin(nu: f64) -> (Scaled, Scaled) {
    let x0 = 1.0 + 0.5 * nu;
    let x1 = 0.5 * (1.0 + nu);
    let v0 = rgamma_scaled(x0) * Scaled::new(sinpi(x0), -0.5 * nu * LN_2);
    let v1 = rgamma_scaled(x1) * Scaled::new(sinpi(x1), 0.5 * (1.0 - nu) * LN_2);
    (v0, v1)
}

/// D_ν and D′_ν at x ≥ 0.
fn d_nonneg(nu: f64, x: f64) -> PcfPair {
    let c = nu + 0.5;
    let (d0, d1) = d_origin(nu);
    if x == 0.0 {
        let err = d0.abs().add(d1.abs()).scale(4.0 * EPS);
        return PcfPair { val: d0, der: d1, err };
    }
    let action = forbidden_action(c, 0.0, x);
    if action <= OUTWARD_ACTION_LIMIT {
        let mut t = Track::new(c, 0.0, d0, d1);
        t.integrate_to(x);
        t.rel_err *= (2.0 * action).exp();
        return PcfPair::from_track(&t);
    }

    let turning = 2.0 * c.max(0.0).sqrt();
    let start = x.max(turning);
    let mut d = 1.0;
    while forbidden_action(c, start, start + d) < INWARD_DECAY_ACTION {
        d *= 1.5;
    }
    let z_far = start + d;
    let q = 0.25 * z_far * z_far - c;
    let w = -q.sqrt() - 0.5 * z_far / (4.0 * q);
    let mut t = Track::new(c, z_far, Scaled::ONE, Scaled::from_f64(w));
    t.integrate_to(x);
    let at_x = PcfPair::from_track(&t);
    t.integrate_to(0.0);

    // least-squares fit of the unnormalized origin data to the exact one
    let log = d0.ln_abs().max(d1.ln_abs());
    let (e0, e1) = (d0.rescaled_to(log), d1.rescaled_to(log));
    let k = local_wavenumber(c, 0.0);
    let (y0, y1) = (t.y, t.dy / k);
    let ratio = (e0 * y0 + (e1 / k) * y1) / (y0 * y0 + y1 * y1);
    let norm = Scaled::new(ratio, log - t.log);
    let mut out = at_x.scaled_by(norm);
    out.err = out.err.add(out.val.abs().scale(t.rel_err));
    out
}

/// V(−ν−½, x) and its derivative at x ≥ 0.
fn v_nonneg(nu: f64, x: f64) -> PcfPair {
    let c = nu + 0.5;
    let (v0, v1) = v_origin(nu);
    let mut t = Track::new(c, 0.0, v0, v1);
    t.integrate_to(x);
    PcfPair::from_track(&t)
}

/// D_ν at +x and −x (x ≥ 0), values and z-derivatives.
pub(crate) fn d_pair_both(nu: f64, x: f64) -> (PcfPair, PcfPair) {
    debug_assert!(x >= 0.0);
    if is_hermite_order(nu) {
        return (d_hermite(nu as usize, x), d_hermite(nu as usize, -x));
    }
    let plus = d_nonneg(nu, x);
    if x == 0.0 {
        return (plus, plus);
    }
    let cos = Scaled::from_f64(cospi(nu));
    let conn = rgamma_scaled(-nu).scale(PI);
    let minus = if conn.is_zero() {
        PcfPair { val: plus.val * cos, der: plus.der * cos, err: plus.err }
    } else {
        plus.combine(cos, v_nonneg(nu, x), conn)
    };
    (plus, minus.reflected())
}

/// Orders handled through the Hermite polynomial form.
const HERMITE_MAX_ORDER: f64 = 2000.0;

fn is_hermite_order(nu: f64) -> bool {
    nu >= 0.0 && nu <= HERMITE_MAX_ORDER && nu.fract() == 0.0
}

/// D_n(z) = e^{−z²/4} He_n(z) by the three-term recurrence, so nodes come
/// out as exact polynomial zeros rather than integration residue.
fn d_hermite(n: usize, z: f64) -> PcfPair {
    // (He_{k−1}, He_k) and the same recurrence on |z| for the error bound,
    // all sharing one running scale
    let (mut hm, mut h) = (0.0, 1.0);
    let (mut am, mut a) = (0.0, 1.0);
    let mut log = 0.0;
    for k in 0..n {
        let next = z * h - k as f64 * hm;
        let anext = z.abs() * a + k as f64 * am;
        (hm, h, am, a) = (h, next, a, anext);
        if a > 1e150 {
            (hm, h, am, a) = (hm * 1e-150, h * 1e-150, am * 1e-150, a * 1e-150);
            log += 150.0 * std::f64::consts::LN_10;
        }
    }
    let log = log - z * z / 4.0;
    let der = n as f64 * hm - 0.5 * z * h;
    PcfPair {
        val: Scaled::new(h, log).normalized(),
        der: Scaled::new(der, log).normalized(),
        err: Scaled::new(4.0 * EPS * (n as f64 + 1.0) * a, log).normalized(),
    }
}

/// D_ν(z) and D′_ν(z) in scaled form.
pub(crate) fn d_pair(nu: f64, z: f64) -> PcfPair {
    if is_hermite_order(nu) {
        d_hermite(nu as usize, z)
    } else if z >= 0.0 {
        d_nonneg(nu, z)
    } else {
        d_pair_both(nu, -z).1
    }
}

fn check_arg(z: f64) -> Result<(), SpecfunError> {
    if z.is_finite() {
        Ok(())
    } else {
        Err(SpecfunError::NonFinite { what: "argument", value: z })
    }
}

/// D_ν(z).
pub fn pcf_d(nu: RealOrder, z: f64) -> Result<EvalResult, SpecfunError> {
    check_arg(z)?;
    let p = d_pair(nu.get(), z);
    Ok(EvalResult { value: p.val.to_f64(), abs_error_estimate: p.err.to_f64() })
}

/// d/dz D_ν(z).
pub fn pcf_d_deriv(nu: RealOrder, z: f64) -> Result<EvalResult, SpecfunError> {
    check_arg(z)?;
    let p = d_pair(nu.get(), z);
    let k = local_wavenumber(nu.get() + 0.5, z);
    Ok(EvalResult { value: p.der.to_f64(), abs_error_estimate: p.err.scale(k).to_f64() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(nu: f64, z: f64) -> f64 {
        pcf_d(RealOrder::new(nu).unwrap(), z).unwrap().value
    }

    #[test]
    fn origin_values() {
        assert!((d(0.0, 0.0) - 1.0).abs() < 1e-15);
        assert!((d(-1.0, 0.0) - (PI / 2.0).sqrt()).abs() < 1e-14);
        assert_eq!(d(3.0, 0.0), 0.0);
    }

    #[test]
    fn closed_forms() {
        assert!((d(1.0, 2.0) - 2.0 * (-1f64).exp()).abs() < 1e-14);
        // D₋₁(z) = √(π/2) e^{z²/4} erfc(z/√2)
        for &z in &[-3.0f64, -0.7, 0.4, 2.5, 6.0] {
            let expect = (PI / 2.0).sqrt() * (0.25 * z * z).exp() * libm::erfc(z / 2f64.sqrt());
            let got = d(-1.0, z);
            assert!(((got - expect) / expect).abs() < 1e-11, "z={z}: {got} vs {expect}");
        }
    }

    #[test]
    fn derivative_closed_forms() {
        let dd = |nu: f64, z: f64| pcf_d_deriv(RealOrder::new(nu).unwrap(), z).unwrap().value;
        assert_eq!(dd(0.0, 0.0), 0.0);
        assert!((dd(1.0, 0.0) - 1.0).abs() < 1e-15);
        // D₂ = (z² − 1)e^{−z²/4}: D₂′(1) = e^{−1/4}(2z − z(z² − 1)/2) = 2e^{−1/4}
        assert!((dd(2.0, 1.0) - 2.0 * (-0.25f64).exp()).abs() < 1e-13);
    }

    #[test]
    fn action_closed_form_matches_quadrature() {
        for &(c, lo, hi) in &[(4.0, 0.0, 9.0), (-3.0, 0.5, 4.0), (0.0, 0.0, 3.0), (2.0, 3.5, 7.0)] {
            let n = 20000;
            let h = (hi - lo) / n as f64;
            let mut s = 0.0;
            for i in 0..n {
                let z: f64 = lo + (i as f64 + 0.5) * h;
                s += (0.25 * z * z - c).max(0.0).sqrt() * h;
            }
            assert!((forbidden_action(c, lo, hi) - s).abs() < 1e-6, "c={c}");
        }
    }
}
