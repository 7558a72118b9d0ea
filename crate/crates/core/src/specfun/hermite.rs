use std::f64::consts::PI;

/// Physicists' Hermite polynomial Hₙ(u) by the three-term recurrence.
pub fn hermite_phys(n: usize, u: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 2.0 * u;
    for k in 1..n {
        let next = 2.0 * u * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Normalized oscillator eigenfunctions φ₀..φ_{count-1} at `z`, in the
/// length unit where the bare levels solve φ'' + (n + ½ − z²/4)φ = 0.
///
/// φₙ(z) = (√(2π)·n!)^{-1/2} Dₙ(z). Uses the normalized recurrence so that
/// no factorials are formed.
pub fn oscillator_states(count: usize, z: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    let phi0 = (2.0 * PI).powf(-0.25) * (-0.25 * z * z).exp();
    out.push(phi0);
    if count == 1 {
        return out;
    }
    out.push(z * phi0);
    for n in 1..count - 1 {
        let nf = n as f64;
        let next = (z * out[n] - nf.sqrt() * out[n - 1]) / (nf + 1.0).sqrt();
        out.push(next);
    }
    out
}

/// Single normalized oscillator eigenfunction φₙ(z).
pub fn oscillator_state(n: usize, z: f64) -> f64 {
    oscillator_states(n + 1, z)[n]
}
