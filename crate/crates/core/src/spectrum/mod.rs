//! Eigenvalues of the delta-decorated harmonic trap.
//!
//! In trap units (length x₀ = √(ħ/2mω), energy E = (ξ + ½)ħω) the problem is
//! ψ'' + (ξ + ½ − z²/4 + Λ δ(z − z₁)) ψ = 0. Its eigenvalues are the zeros
//! of g(ξ) = W(ξ) − Λ D_ξ(z₁) D_ξ(−z₁). For Λ > 0 they interlace below the
//! bare ladder (ξ₀ < 0, ξₙ ∈ (n−1, n]); for Λ < 0 above it (ξₙ ∈ [n, n+1)).
//!
//! The solved spectrum has three zones: exact roots of g for n < M1,
//! first-order shifts n − Λφₙ(z₁)² for M1 ≤ n < M2 and the bare ladder
//! beyond.

mod cache;
mod charfn;
mod oracle;
pub mod roots;
mod trap;

pub use cache::{decode_record, encode_record, CacheFormatError, CacheRecord, SpectrumCache};
pub use charfn::{char_fn, char_fn_scaled, wronskian, wronskian_scaled, CharValue, WRONSKIAN_POLE_TOL};
pub use oracle::{spectrum_oracle, spectrum_oracle_dense, spectrum_oracle_secular};
pub use trap::{sigma_to_lambda, TrapConfig, AMU, HBAR, K_B};

use crate::specfun::oscillator_states;
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectrumError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("no sign change for level {level} of (lambda={lambda}, z1={z1}): g({lo})={g_lo:e}, g({hi})={g_hi:e}")]
    BracketFailure { level: usize, lambda: f64, z1: f64, lo: f64, hi: f64, g_lo: f64, g_hi: f64 },
    #[error("accuracy loss at xi={xi} for (lambda={lambda}, z1={z1}): relative error estimate {estimate:e}")]
    AccuracyLoss { xi: f64, lambda: f64, z1: f64, estimate: f64 },
    #[error("cache i/o: {0}")]
    Io(String),
}

/// A single delta: dimensionless strength Λ (positive attracts) at z₁.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DimpleSpec {
    pub lambda: f64,
    pub z1: f64,
}

impl DimpleSpec {
    pub fn new(lambda: f64, z1: f64) -> Result<Self, SpectrumError> {
        if !lambda.is_finite() || !z1.is_finite() {
            return Err(SpectrumError::InvalidInput(format!(
                "dimple needs finite values, got lambda={lambda}, z1={z1}"
            )));
        }
        Ok(DimpleSpec { lambda, z1 })
    }

    pub fn bare() -> Self {
        DimpleSpec { lambda: 0.0, z1: 0.0 }
    }

    /// From a physical strength σ (1/m) and position x₁ (m).
    pub fn from_physical(sigma: f64, x1: f64, trap: &TrapConfig) -> Result<Self, SpectrumError> {
        DimpleSpec::new(sigma_to_lambda(sigma, trap), x1 / trap.length_scale())
    }

    pub fn mirrored(&self) -> Self {
        DimpleSpec { lambda: self.lambda, z1: -self.z1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Zone {
    ExactRoot,
    Perturbative,
    Unperturbed,
}

impl Zone {
    pub fn tag(self) -> char {
        match self {
            Zone::ExactRoot => 'E',
            Zone::Perturbative => 'P',
            Zone::Unperturbed => 'U',
        }
    }

    pub fn from_tag(c: char) -> Option<Zone> {
        match c {
            'E' => Some(Zone::ExactRoot),
            'P' => Some(Zone::Perturbative),
            'U' => Some(Zone::Unperturbed),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BracketRefinement {
    Brent,
    Bisection,
}

impl fmt::Display for BracketRefinement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BracketRefinement::Brent => "brent",
            BracketRefinement::Bisection => "bisection",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverSettings {
    /// M1: levels below this index are exact roots.
    pub exact_levels: usize,
    /// M2: levels below this index (and ≥ M1) get the first-order shift.
    pub perturbative_levels: usize,
    pub root_tol: f64,
    pub bracket_refinement: BracketRefinement,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            exact_levels: 512,
            perturbative_levels: 8192,
            root_tol: 1e-10,
            bracket_refinement: BracketRefinement::Brent,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<(), SpectrumError> {
        if self.exact_levels < 1 || self.perturbative_levels < self.exact_levels || !(self.root_tol > 0.0) {
            return Err(SpectrumError::InvalidInput(format!(
                "solver settings need M1 >= 1, M2 >= M1, root_tol > 0 (got {}, {}, {})",
                self.exact_levels, self.perturbative_levels, self.root_tol
            )));
        }
        Ok(())
    }

    /// Zone sizes doubled, used by the truncation self-check.
    pub fn doubled(&self) -> Self {
        SolverSettings {
            exact_levels: 2 * self.exact_levels,
            perturbative_levels: 2 * self.perturbative_levels,
            ..*self
        }
    }

    /// Stable short digest of everything that affects solved eigenvalues.
    pub fn digest(&self) -> String {
        let canonical = format!(
            "m1={};m2={};tol={:016x};refine={}",
            self.exact_levels,
            self.perturbative_levels,
            self.root_tol.to_bits(),
            self.bracket_refinement
        );
        hex::encode(&Sha256::digest(canonical.as_bytes())[..8])
    }
}

/// Lowest eigenvalues ξ₀ < ξ₁ < … with the zone each came from.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub xis: Vec<f64>,
    pub zones: Vec<Zone>,
    pub dimple: DimpleSpec,
    pub settings: SolverSettings,
}

impl Spectrum {
    pub fn level_count(&self) -> usize {
        self.xis.len()
    }

    pub fn ground(&self) -> f64 {
        self.xis[0]
    }

    pub fn exact_root_count(&self) -> usize {
        self.zones.iter().filter(|z| **z == Zone::ExactRoot).count()
    }
}

fn zone_of(n: usize, settings: &SolverSettings) -> Zone {
    if n < settings.exact_levels {
        Zone::ExactRoot
    } else if n < settings.perturbative_levels {
        Zone::Perturbative
    } else {
        Zone::Unperturbed
    }
}

/// Normalized characteristic value; used inside brackets where only the
/// sign and rough size matter.
fn g_normalized(xi: f64, dimple: &DimpleSpec) -> Result<f64, SpectrumError> {
    Ok(char_fn_scaled(xi, dimple)?.normalized())
}

/// Normalized value at a bracket endpoint, with values inside their own
/// error estimate read as exact zeros (z₁ on a node of the bare state).
fn g_endpoint(xi: f64, dimple: &DimpleSpec) -> Result<f64, SpectrumError> {
    let cv = char_fn_scaled(xi, dimple)?;
    let g = cv.normalized();
    if g.abs() <= cv.relative_error() {
        Ok(0.0)
    } else {
        Ok(g)
    }
}

/// Uncertainty in the root position implied by the evaluation error of g.
fn root_uncertainty(xi: f64, dimple: &DimpleSpec) -> Result<f64, SpectrumError> {
    let cv = char_fn_scaled(xi, dimple)?;
    let h = 1e-7 * xi.abs().max(1.0);
    let up = char_fn_scaled(xi + h, dimple)?.g;
    let down = char_fn_scaled(xi - h, dimple)?.g;
    let slope = up.sub(down).abs().scale(0.5 / h);
    if slope.is_zero() {
        return Ok(f64::INFINITY);
    }
    Ok(cv.err.div(slope).to_f64())
}

fn checked_root(xi: f64, dimple: &DimpleSpec, settings: &SolverSettings) -> Result<f64, SpectrumError> {
    let unc = root_uncertainty(xi, dimple)?;
    // deep ground states sit at |ξ| ~ Λ²/4 where only relative accuracy exists
    if unc > settings.root_tol.max(1e-9) * xi.abs().max(1.0) {
        return Err(SpectrumError::AccuracyLoss { xi, lambda: dimple.lambda, z1: dimple.z1, estimate: unc });
    }
    Ok(xi)
}

/// Walk to neighbouring doubles while |g| keeps dropping. Roots a tiny
/// shift away from an integer need the last few ulps: there g changes by
/// a relative ~ulp/shift per step.
fn polish_ulps(xi: f64, lo: f64, hi: f64, dimple: &DimpleSpec) -> Result<f64, SpectrumError> {
    let (lo, hi) = (lo.min(hi), lo.max(hi));
    let mut best = (xi, g_normalized(xi, dimple)?.abs());
    for step in [f64::next_up, f64::next_down] {
        for _ in 0..16 {
            let x = step(best.0);
            if x <= lo || x >= hi {
                break;
            }
            let g = g_normalized(x, dimple)?.abs();
            if g >= best.1 {
                break;
            }
            best = (x, g);
        }
    }
    Ok(best.0)
}

/// Maximum geometric expansions of the ground-state lower bracket.
const MAX_GROUND_EXPANSIONS: usize = 60;

fn refine(
    dimple: &DimpleSpec,
    settings: &SolverSettings,
    lo: f64,
    hi: f64,
    g_lo: f64,
    g_hi: f64,
    xtol: f64,
) -> Result<f64, SpectrumError> {
    let f = |x: f64| g_normalized(x, dimple);
    let root = match settings.bracket_refinement {
        BracketRefinement::Brent => roots::brent(f, lo, hi, g_lo, g_hi, xtol, 300)?,
        BracketRefinement::Bisection => roots::bisect(f, lo, hi, g_lo, xtol, 2000)?,
    };
    let root = polish_ulps(root, lo, hi, dimple)?;
    checked_root(root, dimple, settings)
}

/// Exact root for level `n` inside its interlacing interval.
fn exact_level(n: usize, dimple: &DimpleSpec, settings: &SolverSettings, phi_n: f64) -> Result<f64, SpectrumError> {
    let lambda = dimple.lambda;
    let nf = n as f64;
    let shift = lambda.abs() * phi_n * phi_n;
    // near an integer g ≈ W·(ξ−ξₙ)/shift, so a residual small against W
    // needs the root to a fraction of the shift
    let xtol = settings.root_tol.min(1e-9 * shift.max(1e-300));
    let nudge = 1e-11 * nf.max(1.0);

    if lambda > 0.0 && n == 0 {
        let hi = 0.0;
        let g_hi = g_endpoint(hi, dimple)?;
        if g_hi == 0.0 {
            return Ok(0.0);
        }
        let mut lo = (-1.0f64).min(-0.25 * lambda * lambda - 1.0);
        let mut g_lo = g_normalized(lo, dimple)?;
        let mut expansions = 0;
        while (g_lo > 0.0) == (g_hi > 0.0) {
            expansions += 1;
            if expansions > MAX_GROUND_EXPANSIONS {
                return Err(SpectrumError::BracketFailure { level: 0, lambda, z1: dimple.z1, lo, hi, g_lo, g_hi });
            }
            lo *= 2.0;
            g_lo = g_normalized(lo, dimple)?;
        }
        return refine(dimple, settings, lo, hi, g_lo, g_hi, xtol);
    }

    // the endpoint shared with the bare level n
    let (mut lo, mut hi) = if lambda > 0.0 { (nf - 1.0, nf) } else { (nf, nf + 1.0) };
    let g_bare = g_endpoint(nf, dimple)?;
    if g_bare == 0.0 {
        // z₁ sits on a node of φₙ: the level is untouched
        return Ok(nf);
    }
    let (mut g_lo, mut g_hi) =
        if lambda > 0.0 { (g_endpoint(lo, dimple)?, g_bare) } else { (g_bare, g_endpoint(hi, dimple)?) };
    if g_lo == 0.0 {
        lo += nudge;
        g_lo = g_normalized(lo, dimple)?;
    }
    if g_hi == 0.0 {
        hi -= nudge;
        g_hi = g_normalized(hi, dimple)?;
    }
    if (g_lo > 0.0) == (g_hi > 0.0) {
        // root collided with the bare level
        return Ok(nf);
    }
    refine(dimple, settings, lo, hi, g_lo, g_hi, xtol)
}

/// Lowest `levels` eigenvalues of the decorated trap.
pub fn solve_spectrum(
    dimple: &DimpleSpec,
    settings: &SolverSettings,
    levels: usize,
) -> Result<Spectrum, SpectrumError> {
    settings.validate()?;
    if levels < 1 {
        return Err(SpectrumError::InvalidInput("levels must be >= 1".into()));
    }
    let zones: Vec<Zone> = (0..levels).map(|n| zone_of(n, settings)).collect();
    if dimple.lambda == 0.0 {
        let xis = (0..levels).map(|n| n as f64).collect();
        return Ok(Spectrum { xis, zones, dimple: *dimple, settings: *settings });
    }

    let n_shifted = levels.min(settings.perturbative_levels);
    let phis = oscillator_states(n_shifted, dimple.z1);
    let n_exact = levels.min(settings.exact_levels);

    let exact: Vec<f64> =
        (0..n_exact).into_par_iter().map(|n| exact_level(n, dimple, settings, phis[n])).collect::<Result<_, _>>()?;

    let mut xis = exact;
    xis.reserve(levels - n_exact);
    for n in n_exact..levels {
        let nf = n as f64;
        let xi = if n < n_shifted { perturbative_level(nf, dimple.lambda, phis[n]) } else { nf };
        xis.push(xi);
    }
    Ok(Spectrum { xis, zones, dimple: *dimple, settings: *settings })
}

/// n − Λφₙ(z₁)², kept inside the interlacing interval.
fn perturbative_level(n: f64, lambda: f64, phi: f64) -> f64 {
    let shifted = n - lambda * phi * phi;
    let margin = 1e-9;
    if lambda > 0.0 {
        shifted.max(n - 1.0 + margin)
    } else {
        shifted.min(n + 1.0 - margin)
    }
}
