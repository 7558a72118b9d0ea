//! Truncated-basis check of the eigenvalues.
//!
//! In the bare oscillator basis the decorated Hamiltonian is
//! H = diag(m + ½) − Λ v vᵀ with v_m = φ_m(z₁): a rank-one update of a
//! diagonal matrix. Nothing here touches parabolic cylinder functions, so it
//! is an independent route to the same eigenvalues (converging slowly, like
//! 1/√basis, because the delta couples to arbitrarily high states).

use super::{DimpleSpec, SpectrumError};
use crate::specfun::oscillator_states;
use nalgebra::DMatrix;

/// Largest basis for which [`spectrum_oracle`] builds and diagonalizes the
/// dense matrix; above it the secular equation of the same matrix is solved.
pub const DENSE_ORACLE_LIMIT: usize = 400;

fn check(basis_size: usize, levels: usize) -> Result<(), SpectrumError> {
    if levels == 0 || basis_size < levels {
        return Err(SpectrumError::InvalidInput(format!(
            "oracle needs 1 <= levels <= basis_size (got levels={levels}, basis={basis_size})"
        )));
    }
    Ok(())
}

/// Lowest `levels` eigenvalues (as ξ = λ − ½) of the truncated matrix.
pub fn spectrum_oracle(dimple: &DimpleSpec, basis_size: usize, levels: usize) -> Result<Vec<f64>, SpectrumError> {
    if basis_size <= DENSE_ORACLE_LIMIT {
        spectrum_oracle_dense(dimple, basis_size, levels)
    } else {
        spectrum_oracle_secular(dimple, basis_size, levels)
    }
}

/// Dense symmetric eigensolve of H_{mn} = (m+½)δ_{mn} − Λφ_m(z₁)φ_n(z₁).
pub fn spectrum_oracle_dense(dimple: &DimpleSpec, basis_size: usize, levels: usize) -> Result<Vec<f64>, SpectrumError> {
    check(basis_size, levels)?;
    let v = oscillator_states(basis_size, dimple.z1);
    let h = DMatrix::from_fn(basis_size, basis_size, |m, n| {
        let diag = if m == n { m as f64 + 0.5 } else { 0.0 };
        diag - dimple.lambda * v[m] * v[n]
    });
    let mut eig: Vec<f64> = h.symmetric_eigenvalues().iter().map(|l| l - 0.5).collect();
    eig.sort_by(|a, b| a.total_cmp(b));
    eig.truncate(levels);
    Ok(eig)
}

/// Same matrix, solved through 1 = Λ Σ v_m² / (m − ξ) interval by interval.
pub fn spectrum_oracle_secular(
    dimple: &DimpleSpec,
    basis_size: usize,
    levels: usize,
) -> Result<Vec<f64>, SpectrumError> {
    check(basis_size, levels)?;
    let lambda = dimple.lambda;
    if lambda == 0.0 {
        return Ok((0..levels).map(|n| n as f64).collect());
    }
    let v = oscillator_states(basis_size, dimple.z1);
    let norm2: f64 = v.iter().map(|x| x * x).sum();

    // components with no overlap decouple and keep their bare value
    let cutoff = 1e-30 * norm2;
    let mut out = Vec::with_capacity(levels + 2);
    let mut poles = Vec::new();
    let mut weights = Vec::new();
    for (m, &vm) in v.iter().enumerate() {
        if vm * vm <= cutoff {
            out.push(m as f64);
        } else {
            poles.push(m as f64);
            weights.push(vm * vm);
        }
    }

    let secular = |xi: f64| -> f64 {
        let s: f64 = poles.iter().zip(&weights).map(|(d, w)| w / (d - xi)).sum();
        1.0 - lambda * s
    };
    let solve = |lo: f64, hi: f64| -> f64 {
        let (mut a, mut b) = (lo, hi);
        let fa_pos = secular(a) > 0.0;
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if (secular(m) > 0.0) == fa_pos {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    };
    let offset = |d: f64| 1e-13 * d.abs().max(1.0);

    let k = poles.len();
    let wanted = levels.min(k);
    if lambda > 0.0 {
        // one root below the first pole, one between each pair of poles
        let lowest = poles[0] - lambda * norm2 - 1.0;
        out.push(solve(lowest, poles[0] - offset(poles[0])));
        for j in 1..wanted {
            out.push(solve(poles[j - 1] + offset(poles[j - 1]), poles[j] - offset(poles[j])));
        }
    } else {
        for j in 0..wanted {
            let hi = if j + 1 < k { poles[j + 1] - offset(poles[j + 1]) } else { poles[j] - lambda * norm2 + 1.0 };
            out.push(solve(poles[j] + offset(poles[j]), hi));
        }
    }
    out.sort_by(|a, b| a.total_cmp(b));
    out.truncate(levels);
    Ok(out)
}
