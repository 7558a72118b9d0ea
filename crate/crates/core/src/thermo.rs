//! Finite-N ideal Bose gas on a solved spectrum.
//!
//! Everything is computed in reduced units: temperature t = k_B T/ħω and
//! energies ξ + ½. Occupations are written through x = β(ε₀ − μ) > 0 and the
//! gaps ξᵢ − ξ₀, so a deep ground state (ε₀ ≪ 0) never produces huge
//! exponentials and 1/(e^y − 1) is always formed with `exp_m1`.
//!
//! Levels past the end of a spectrum belong to the unperturbed zone
//! (ξₙ = n), whose contribution is summed in closed form:
//! Σ_{n≥L} 1/(e^{a + (n−L)b} − 1) = Σ_k e^{−ka}/(1 − e^{−kb}).

use crate::spectrum::{solve_spectrum, DimpleSpec, Spectrum, SpectrumError, TrapConfig};
use thiserror::Error;

/// A term smaller than this fraction of the running total ends a level sum.
pub const EARLY_STOP: f64 = 1e-15;
/// Required particle-number accuracy, relative to N.
pub const CONSERVATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThermoError {
    #[error("chemical potential {mu} must lie below the ground level {eps0}")]
    Domain { mu: f64, eps0: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("level-sum tail not converged: remainder bound {bound:e} exceeds {limit:e}")]
    TailTooLarge { bound: f64, limit: f64 },
    #[error("bisection for {what} did not converge (residual {residual:e})")]
    NoConvergence { what: &'static str, residual: f64 },
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
}

/// Continuation of a level list by an evenly spaced ladder.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LadderTail {
    /// Energy of the first level not in the list.
    pub first: f64,
    pub spacing: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermoPoint {
    /// Kelvin.
    pub temperature: f64,
    /// 1/J.
    pub beta: f64,
    /// Joule.
    pub mu: f64,
    pub n0: f64,
    pub fraction: f64,
    /// k_B T / ħω.
    pub t_reduced: f64,
    /// μ/ħω.
    pub mu_reduced: f64,
    /// ε₀/ħω.
    pub eps0_reduced: f64,
    /// β(ε₀ − μ).
    pub x: f64,
    /// Σ occupations at the returned μ (should equal N).
    pub total: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriticalPoint {
    /// Kelvin.
    pub t_c: f64,
    /// Kelvin, same trap and N with no dimple.
    pub t_c0: f64,
    pub t_c_reduced: f64,
    pub t_c0_reduced: f64,
}

impl CriticalPoint {
    pub fn ratio(&self) -> f64 {
        self.t_c_reduced / self.t_c0_reduced
    }
}

/// εᵢ = (ξᵢ + ½)ħω in joule.
pub fn energies(spec: &Spectrum, trap: &TrapConfig) -> Vec<f64> {
    let hw = trap.hbar_omega();
    spec.xis.iter().map(|xi| (xi + 0.5) * hw).collect()
}

/// Σ_k e^{−ka}/(1 − e^{−kb}) and a bound on what was left out.
fn ladder_tail_sum(a: f64, b: f64) -> (f64, f64) {
    let r = (-a).exp();
    if r == 0.0 {
        return (0.0, 0.0);
    }
    let mut sum = 0.0;
    let mut term = 0.0;
    for k in 1..=1_000_000u32 {
        let kf = k as f64;
        term = (-kf * a).exp() / -(-kf * b).exp_m1();
        sum += term;
        if term <= EARLY_STOP * 1e-2 * sum {
            break;
        }
    }
    // consecutive terms shrink by at least e^{−a}
    (sum, term * r / (1.0 - r))
}

/// Σ 1/(e^{y_i} − 1) over increasing exponents, with the early stop.
fn bose_sum(exponents: impl Iterator<Item = f64>) -> (f64, bool) {
    let mut total = 0.0;
    for y in exponents {
        let term = 1.0 / y.exp_m1();
        total += term;
        if term < EARLY_STOP * total {
            return (total, true);
        }
    }
    (total, false)
}

/// Σᵢ 1/(e^{β(εᵢ−μ)} − 1) over `energies` (ascending), continued by `tail`
/// when given. Any consistent unit system works.
pub fn occupation_sum(energies: &[f64], mu: f64, beta: f64, tail: Option<LadderTail>) -> Result<f64, ThermoError> {
    let Some(&eps0) = energies.first() else {
        return Err(ThermoError::InvalidInput("empty level list".into()));
    };
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(ThermoError::InvalidInput(format!("beta must be positive, got {beta}")));
    }
    if !(mu < eps0) {
        return Err(ThermoError::Domain { mu, eps0 });
    }
    let (sum, stopped) = bose_sum(energies.iter().map(|e| beta * (e - mu)));
    if stopped {
        return Ok(sum);
    }
    match tail {
        Some(t) => {
            let (extra, _) = ladder_tail_sum(beta * (t.first - mu), beta * t.spacing);
            Ok(sum + extra)
        }
        None => Ok(sum),
    }
}

/// Reduced-unit view of a spectrum: gaps above the ground level plus the
/// start of the implicit unperturbed ladder.
struct Levels<'a> {
    xis: &'a [f64],
    xi0: f64,
}

impl<'a> Levels<'a> {
    fn new(spec: &'a Spectrum) -> Result<Self, ThermoError> {
        let xi0 = *spec.xis.first().ok_or_else(|| ThermoError::InvalidInput("empty spectrum".into()))?;
        Ok(Levels { xis: &spec.xis, xi0 })
    }

    /// Σ_{i≥1} 1/(e^{(ξᵢ−ξ₀)/t + x} − 1) including the ladder past the list.
    fn excited(&self, t: f64, x: f64, n_particles: f64) -> Result<f64, ThermoError> {
        let xi0 = self.xi0;
        let (sum, stopped) = bose_sum(self.xis[1..].iter().map(|xi| (xi - xi0) / t + x));
        if stopped {
            return Ok(sum);
        }
        let first = self.xis.len() as f64;
        let (extra, bound) = ladder_tail_sum((first - xi0) / t + x, 1.0 / t);
        let limit = CONSERVATION_TOL * 1e-3 * n_particles;
        if bound > limit {
            return Err(ThermoError::TailTooLarge { bound, limit });
        }
        Ok(sum + extra)
    }

    fn total(&self, t: f64, x: f64, n_particles: f64) -> Result<f64, ThermoError> {
        Ok(1.0 / x.exp_m1() + self.excited(t, x, n_particles)?)
    }
}

fn check_particles(n: f64, min: f64) -> Result<(), ThermoError> {
    if !(n >= min) || !n.is_finite() {
        return Err(ThermoError::InvalidInput(format!("need at least {min} particles, got {n}")));
    }
    Ok(())
}

/// β(ε₀ − μ) at reduced temperature `t` such that the occupations add up
/// to `n_particles`.
pub fn solve_x_reduced(spec: &Spectrum, n_particles: f64, t: f64) -> Result<f64, ThermoError> {
    check_particles(n_particles, 1.0)?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(ThermoError::InvalidInput(format!("temperature must be positive, got {t}")));
    }
    let levels = Levels::new(spec)?;
    let count = |x: f64| levels.total(t, x, n_particles);

    // the ground level alone holds N at x = ln(1 + 1/N)
    let mut lo = (1.0 / n_particles).ln_1p();
    let mut hi = lo;
    loop {
        hi *= 2.0;
        if count(hi)? < n_particles {
            break;
        }
        lo = hi;
        if hi > 1e300 {
            return Err(ThermoError::NoConvergence { what: "mu bracket", residual: f64::INFINITY });
        }
    }
    for _ in 0..400 {
        let mid = (lo * hi).sqrt();
        if !(mid > lo && mid < hi) {
            break;
        }
        if count(mid)? >= n_particles {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (r_lo, r_hi) = ((count(lo)? - n_particles).abs(), (count(hi)? - n_particles).abs());
    let (x, residual) = if r_lo <= r_hi { (lo, r_lo) } else { (hi, r_hi) };
    if residual > CONSERVATION_TOL * n_particles {
        return Err(ThermoError::NoConvergence { what: "mu", residual });
    }
    Ok(x)
}

/// Chemical potential, ground occupation and condensate fraction at `temperature` (K).
pub fn solve_mu(spec: &Spectrum, trap: &TrapConfig, temperature: f64) -> Result<ThermoPoint, ThermoError> {
    trap.validate()?;
    let t = temperature / trap.kelvin_per_unit();
    let n = trap.n_particles as f64;
    let x = solve_x_reduced(spec, n, t)?;
    let levels = Levels::new(spec)?;
    let total = levels.total(t, x, n)?;
    let hw = trap.hbar_omega();
    let eps0_reduced = levels.xi0 + 0.5;
    let mu_reduced = eps0_reduced - x * t;
    let n0 = 1.0 / x.exp_m1();
    Ok(ThermoPoint {
        temperature,
        beta: 1.0 / (trap.k_b * temperature),
        mu: mu_reduced * hw,
        n0,
        fraction: n0 / n,
        t_reduced: t,
        mu_reduced,
        eps0_reduced,
        x,
        total,
    })
}

/// Reduced critical temperature: N = Σ_{i≥1} 1/(e^{(ξᵢ−ξ₀)/t} − 1).
pub fn solve_tc_reduced(spec: &Spectrum, n_particles: f64) -> Result<f64, ThermoError> {
    check_particles(n_particles, 2.0)?;
    let levels = Levels::new(spec)?;
    if levels.xis.len() < 2 {
        return Err(ThermoError::InvalidInput("critical temperature needs at least two levels".into()));
    }
    let excited = |t: f64| levels.excited(t, 0.0, n_particles);

    let mut lo = 1.0;
    let mut hi = 1.0;
    if excited(1.0)? < n_particles {
        while excited(hi)? < n_particles {
            lo = hi;
            hi *= 2.0;
            if hi > 1e300 {
                return Err(ThermoError::NoConvergence { what: "t_c bracket", residual: f64::INFINITY });
            }
        }
    } else {
        while excited(lo)? >= n_particles {
            hi = lo;
            lo *= 0.5;
            if lo < 1e-300 {
                return Err(ThermoError::NoConvergence { what: "t_c bracket", residual: f64::INFINITY });
            }
        }
    }
    for _ in 0..400 {
        let mid = (lo * hi).sqrt();
        if !(mid > lo && mid < hi) {
            break;
        }
        if excited(mid)? < n_particles {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo * hi).sqrt())
}

/// T_c of `spec` and T_c⁰ of the bare trap with the same level count.
pub fn solve_tc(spec: &Spectrum, trap: &TrapConfig) -> Result<CriticalPoint, ThermoError> {
    trap.validate()?;
    let n = trap.n_particles as f64;
    let t_c_reduced = solve_tc_reduced(spec, n)?;
    let bare = solve_spectrum(&DimpleSpec::bare(), &spec.settings, spec.level_count())?;
    let t_c0_reduced = solve_tc_reduced(&bare, n)?;
    let k = trap.kelvin_per_unit();
    Ok(CriticalPoint { t_c: t_c_reduced * k, t_c0: t_c0_reduced * k, t_c_reduced, t_c0_reduced })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::SolverSettings;
    use std::f64::consts::LN_2;

    fn ladder(levels: usize) -> Spectrum {
        solve_spectrum(&DimpleSpec::bare(), &SolverSettings::default(), levels).unwrap()
    }

    #[test]
    fn single_and_double_level_sums() {
        assert!((occupation_sum(&[0.0], -LN_2, 1.0, None).unwrap() - 1.0).abs() < 1e-14);
        assert!((occupation_sum(&[3.0, 3.0], 3.0 - LN_2, 1.0, None).unwrap() - 2.0).abs() < 1e-14);
        assert!(matches!(occupation_sum(&[1.0], 1.0, 1.0, None), Err(ThermoError::Domain { .. })));
    }

    #[test]
    fn ladder_sum_with_tail() {
        // Σ_{n≥0} 1/(e^{n+1} − 1)
        let e: Vec<f64> = (0..5).map(|n| n as f64 + 0.5).collect();
        let tail = LadderTail { first: 5.5, spacing: 1.0 };
        let s = occupation_sum(&e, -0.5, 1.0, Some(tail)).unwrap();
        assert!((s - 0.820259511542417).abs() < 1e-13, "{s}");
    }

    #[test]
    fn one_particle_one_level() {
        let spec = ladder(1);
        let x = solve_x_reduced(&spec, 1.0, 0.7).unwrap();
        // with a single level the implicit ladder starts at ξ = 1
        assert!(x > LN_2);
        let e0 = [0.5];
        let mu = 0.5 - 0.7 * LN_2;
        assert!((occupation_sum(&e0, mu, 1.0 / 0.7, None).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn cold_gas_is_condensed() {
        let trap = TrapConfig::default();
        let spec = ladder(64);
        let p = solve_mu(&spec, &trap, 1e-3 * trap.kelvin_per_unit()).unwrap();
        assert!(p.fraction > 0.999_999);
        assert!(p.mu < 0.5 * trap.hbar_omega());
        assert!((p.total - 1e4).abs() <= 1e-5);
    }

    #[test]
    fn tail_closes_short_lists() {
        // the same bare ladder, cut at 100 or 20000 levels
        let a = solve_tc_reduced(&ladder(100), 1e4).unwrap();
        let b = solve_tc_reduced(&ladder(20_000), 1e4).unwrap();
        assert!(((a - b) / b).abs() < 1e-12, "{a} {b}");
    }
}
