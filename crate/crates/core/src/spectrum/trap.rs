use super::SpectrumError;
use std::f64::consts::PI;

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;
/// Atomic mass unit, kg.
pub const AMU: f64 = 1.660_539_066_60e-27;

/// Physical parameters of the harmonic trap and the gas.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrapConfig {
    /// Particle mass, kg.
    pub mass: f64,
    /// Angular trap frequency, rad/s.
    pub omega: f64,
    pub n_particles: u64,
    pub hbar: f64,
    pub k_b: f64,
}

impl Default for TrapConfig {
    /// ²³Na in a 21 Hz trap with 10⁴ atoms.
    fn default() -> Self {
        TrapConfig::new(23.0 * AMU, 2.0 * PI * 21.0, 10_000).expect("valid default trap")
    }
}

impl TrapConfig {
    pub fn new(mass: f64, omega: f64, n_particles: u64) -> Result<Self, SpectrumError> {
        let trap = TrapConfig { mass, omega, n_particles, hbar: HBAR, k_b: K_B };
        trap.validate()?;
        Ok(trap)
    }

    pub fn from_amu_hz(mass_amu: f64, freq_hz: f64, n_particles: u64) -> Result<Self, SpectrumError> {
        TrapConfig::new(mass_amu * AMU, 2.0 * PI * freq_hz, n_particles)
    }

    pub fn validate(&self) -> Result<(), SpectrumError> {
        let ok = self.mass > 0.0
            && self.mass.is_finite()
            && self.omega > 0.0
            && self.omega.is_finite()
            && self.n_particles >= 1
            && self.hbar > 0.0
            && self.k_b > 0.0;
        if ok {
            Ok(())
        } else {
            Err(SpectrumError::InvalidInput(format!(
                "trap needs mass > 0, omega > 0, n >= 1 (got mass={}, omega={}, n={})",
                self.mass, self.omega, self.n_particles
            )))
        }
    }

    /// Length unit x₀ = √(ħ / 2mω).
    pub fn length_scale(&self) -> f64 {
        (self.hbar / (2.0 * self.mass * self.omega)).sqrt()
    }

    pub fn hbar_omega(&self) -> f64 {
        self.hbar * self.omega
    }

    /// Kelvin per unit of k_BT/ħω.
    pub fn kelvin_per_unit(&self) -> f64 {
        self.hbar_omega() / self.k_b
    }
}

/// Dimensionless delta strength Λ = σ·x₀ for a strength σ in 1/m.
pub fn sigma_to_lambda(sigma: f64, trap: &TrapConfig) -> f64 {
    sigma * trap.length_scale()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sodium_trap_strengths() {
        let trap = TrapConfig::default();
        assert_eq!(sigma_to_lambda(0.0, &trap), 0.0);
        // x₀ ≈ 3.235 μm for ²³Na at 21 Hz
        let l1 = sigma_to_lambda(1e8, &trap);
        let l2 = sigma_to_lambda(1e10, &trap);
        assert!((l1 / 320.0 - 1.0).abs() < 0.02, "{l1}");
        assert!((l2 / 32000.0 - 1.0).abs() < 0.02, "{l2}");
    }

    #[test]
    fn rejects_bad_traps() {
        assert!(TrapConfig::new(-1.0, 1.0, 10).is_err());
        assert!(TrapConfig::new(1.0, 0.0, 10).is_err());
        assert!(TrapConfig::new(1.0, 1.0, 0).is_err());
    }
}
