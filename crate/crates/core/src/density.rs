//! Ground-state wavefunction of the decorated trap and its density.
//!
//! Left of the delta the decaying solution is D_ξ₀(−z), right of it D_ξ₀(z);
//! matching at z₁ gives
//!
//! ψ(z) = C D_ξ₀(z₁) D_ξ₀(−z)  (z ≤ z₁),   ψ(z) = C D_ξ₀(−z₁) D_ξ₀(z)  (z ≥ z₁).
//!
//! Internally ψ is carried as ψ(z₁) times a ratio of D values, so deep ground
//! states (ξ₀ ≈ −Λ²/4) never overflow.

use crate::specfun::{d_pair, Scaled};
use crate::spectrum::{char_fn_scaled, DimpleSpec, Spectrum, SpectrumError};
use rayon::prelude::*;
use thiserror::Error;

/// Tolerance on |g|/√(W² + (ΛDD)²) at the supplied ξ₀.
pub const GROUND_RESIDUAL_TOL: f64 = 1e-6;
/// Tails are cut where ψ² has fallen below this fraction of ψ(z₁)².
const TAIL_CUTOFF: f64 = 1e-24;
/// Relative to the coarse estimate of the integral.
const SIMPSON_REL_TOL: f64 = 1e-13;
const SIMPSON_MAX_DEPTH: u32 = 32;
/// Panels are also accepted once correct to this fraction of themselves.
const SIMPSON_LOCAL_REL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DensityError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("xi0={xi0} is not a root for (lambda={lambda}, z1={z1}): residual {residual:e}")]
    NotARoot { xi0: f64, lambda: f64, z1: f64, residual: f64 },
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroundState {
    pub xi0: f64,
    pub dimple: DimpleSpec,
    /// C in the matched form above (may over- or underflow for very deep
    /// states; ψ itself is always evaluated in scaled form).
    pub norm_constant: f64,
    /// ψ(z₁) > 0 after normalization.
    peak: f64,
    /// D_ξ₀(z₁), D_ξ₀(−z₁).
    d_plus: Scaled,
    d_minus: Scaled,
    /// Integration limits holding all but ~1e−24 of the weight.
    z_min: f64,
    z_max: f64,
}

/// Which side of the delta a one-sided derivative is taken on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl GroundState {
    /// ψ(z)/ψ(z₁) and its derivative, on `side` of the delta.
    fn shape(&self, z: f64, side: Side) -> (f64, f64) {
        match side {
            Side::Left => {
                let p = d_pair(self.xi0, -z);
                (p.val.div(self.d_minus).to_f64(), -p.der.div(self.d_minus).to_f64())
            }
            Side::Right => {
                let p = d_pair(self.xi0, z);
                (p.val.div(self.d_plus).to_f64(), p.der.div(self.d_plus).to_f64())
            }
        }
    }

    fn side_of(&self, z: f64) -> Side {
        if z < self.dimple.z1 {
            Side::Left
        } else {
            Side::Right
        }
    }

    pub fn psi(&self, z: f64) -> f64 {
        self.peak * self.shape(z, self.side_of(z)).0
    }

    /// One-sided ψ′(z); at z₁ the two sides differ by −Λψ(z₁).
    pub fn psi_deriv(&self, z: f64, side: Side) -> f64 {
        self.peak * self.shape(z, side).1
    }

    /// ψ′(z₁⁺) − ψ′(z₁⁻).
    pub fn cusp_jump(&self) -> f64 {
        let z1 = self.dimple.z1;
        self.psi_deriv(z1, Side::Right) - self.psi_deriv(z1, Side::Left)
    }

    /// Support used for normalization.
    pub fn support(&self) -> (f64, f64) {
        (self.z_min, self.z_max)
    }

    /// ∫ψ² dz by adaptive Simpson, split at z₁.
    pub fn norm(&self) -> f64 {
        let z1 = self.dimple.z1;
        let f = |z: f64| self.psi(z).powi(2);
        adaptive_simpson(&f, self.z_min, z1) + adaptive_simpson(&f, z1, self.z_max)
    }
}

/// Normalized ground state for `dimple`, whose lowest level is `spec.xis[0]`.
pub fn ground_state(dimple: &DimpleSpec, spec: &Spectrum) -> Result<GroundState, DensityError> {
    if spec.dimple != *dimple {
        return Err(DensityError::InvalidInput(format!(
            "spectrum belongs to (lambda={}, z1={}), not (lambda={}, z1={})",
            spec.dimple.lambda, spec.dimple.z1, dimple.lambda, dimple.z1
        )));
    }
    let xi0 = *spec.xis.first().ok_or_else(|| DensityError::InvalidInput("empty spectrum".into()))?;
    let residual = char_fn_scaled(xi0, dimple)?.normalized().abs();
    if residual > GROUND_RESIDUAL_TOL {
        return Err(DensityError::NotARoot { xi0, lambda: dimple.lambda, z1: dimple.z1, residual });
    }

    let z1 = dimple.z1;
    let d_plus = d_pair(xi0, z1).val;
    let d_minus = d_pair(xi0, -z1).val;
    if d_plus.is_zero() || d_minus.is_zero() || d_plus.signum() != d_minus.signum() {
        return Err(DensityError::InvalidInput(format!(
            "xi0={xi0} has a node at the delta position z1={z1}; not a ground state"
        )));
    }

    let mut gs =
        GroundState { xi0, dimple: *dimple, norm_constant: 1.0, peak: 1.0, d_plus, d_minus, z_min: z1, z_max: z1 };
    // past the classical turning point the ratio only decays
    let turning = 2.0 * (xi0 + 0.5).max(0.0).sqrt();
    gs.z_min = tail_limit(&gs, z1.min(-turning), -1.0);
    gs.z_max = tail_limit(&gs, z1.max(turning), 1.0);

    let norm = gs.norm();
    gs.peak = 1.0 / norm.sqrt();
    // ψ(z₁) = C D(z₁) D(−z₁)
    gs.norm_constant = Scaled::from_f64(gs.peak).div(d_plus * d_minus).abs().to_f64();
    Ok(gs)
}

fn tail_limit(gs: &GroundState, start: f64, dir: f64) -> f64 {
    let mut z = start;
    for _ in 0..200 {
        z += dir * 0.5;
        if gs.psi(z).powi(2) < TAIL_CUTOFF {
            return z;
        }
    }
    z
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    // start from a few panels so narrow peaks are not missed
    let panels = 16;
    let h = (b - a) / panels as f64;
    let coarse: Vec<_> = (0..panels)
        .map(|i| {
            let lo = a + i as f64 * h;
            let hi = if i + 1 == panels { b } else { lo + h };
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            (lo, hi, fa, fm, fb, (hi - lo) / 6.0 * (fa + 4.0 * fm + fb))
        })
        .collect();
    // ψ is scaled to ψ(z₁) = 1 here, which can be far from its size elsewhere
    let scale = coarse.iter().map(|c| c.5.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
    let tol = SIMPSON_REL_TOL * scale / panels as f64;
    coarse
        .into_iter()
        .map(|(lo, hi, fa, fm, fb, whole)| simpson_step(f, lo, hi, fa, fm, fb, whole, tol, SIMPSON_MAX_DEPTH))
        .sum()
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // the relative test stops refinement at the integrand's own noise level
    if depth == 0 || delta.abs() <= 15.0 * tol || delta.abs() <= SIMPSON_LOCAL_REL * (left + right).abs() {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityProfile {
    pub grid: Vec<f64>,
    /// |ψ|² per unit z, times N₀ when requested.
    pub values: Vec<f64>,
}

impl DensityProfile {
    /// Trapezoid rule over the grid.
    pub fn integral(&self) -> f64 {
        self.grid.windows(2).zip(self.values.windows(2)).map(|(z, v)| 0.5 * (z[1] - z[0]) * (v[0] + v[1])).sum()
    }

    /// Grid point of the largest value.
    pub fn argmax(&self) -> f64 {
        let i = self.values.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i).unwrap_or(0);
        self.grid[i]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// |ψ(z)|² on `grid` (strictly increasing), optionally scaled by N₀.
pub fn density_profile(gs: &GroundState, grid: &[f64], n0: Option<f64>) -> Result<DensityProfile, DensityError> {
    if grid.iter().any(|z| !z.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(DensityError::InvalidInput("grid must be finite and strictly increasing".into()));
    }
    let scale = n0.unwrap_or(1.0);
    let values = grid.par_iter().map(|&z| scale * gs.psi(z).powi(2)).collect();
    Ok(DensityProfile { grid: grid.to_vec(), values })
}
