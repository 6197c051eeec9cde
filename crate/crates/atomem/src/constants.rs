//! Physical constants (CODATA 2018) and atomic species data.

/// Fundamental constants used throughout. Values are fixed at construction;
/// `codata()` returns the CODATA 2018 set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Reduced Planck constant (J·s)
    pub hbar: f64,
    /// Speed of light in vacuum (m/s)
    pub c: f64,
    /// Boltzmann constant (J/K)
    pub k_b: f64,
}

impl PhysicalConstants {
    pub const fn codata() -> Self {
        PhysicalConstants {
            hbar: 1.054_571_817e-34,
            c: 299_792_458.0,
            k_b: 1.380_649e-23,
        }
    }

    pub fn validate(&self) -> crate::Result<()> {
        if self.hbar > 0.0 && self.c > 0.0 && self.k_b > 0.0 {
            Ok(())
        } else {
            Err(crate::Error::Config(
                "physical constants must be strictly positive".into(),
            ))
        }
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::codata()
    }
}

/// Atomic species parameters for the dipole-trap model: mass and the
/// dominant optical transition (frequency, natural linewidth).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomSpecies {
    /// Atomic mass (kg)
    pub mass: f64,
    /// Transition angular frequency ω₀ = 2πc/λ₀ (rad/s)
    pub transition_freq: f64,
    /// Natural linewidth of the transition (rad/s)
    pub natural_linewidth: f64,
    /// Transition wavelength (m)
    pub transition_wavelength: f64,
}

impl AtomSpecies {
    /// ⁸⁷Rb with the D2 line (780 nm) as the trapping transition.
    pub fn rb87(constants: &PhysicalConstants) -> Self {
        let wavelength = 780.241_209_686e-9;
        AtomSpecies {
            mass: 1.443_160_60e-25,
            transition_freq: 2.0 * std::f64::consts::PI * constants.c / wavelength,
            natural_linewidth: 2.0 * std::f64::consts::PI * 6.0666e6,
            transition_wavelength: wavelength,
        }
    }

    pub fn validate(&self, constants: &PhysicalConstants) -> crate::Result<()> {
        if !(self.mass > 0.0) || !(self.natural_linewidth > 0.0) {
            return Err(crate::Error::Config(
                "species mass and linewidth must be positive".into(),
            ));
        }
        let omega_from_wavelength =
            2.0 * std::f64::consts::PI * constants.c / self.transition_wavelength;
        let rel = ((self.transition_freq - omega_from_wavelength) / omega_from_wavelength).abs();
        if rel > 1e-9 {
            return Err(crate::Error::Config(format!(
                "transition frequency inconsistent with wavelength (relative error {rel:.2e})"
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codata_values() {
        let c = PhysicalConstants::codata();
        assert_eq!(c.hbar, 1.054_571_817e-34);
        assert_eq!(c.c, 299_792_458.0);
        assert_eq!(c.k_b, 1.380_649e-23);
        c.validate().unwrap();
    }

    #[test]
    fn rb87_d2_consistent() {
        let consts = PhysicalConstants::codata();
        let rb = AtomSpecies::rb87(&consts);
        rb.validate(&consts).unwrap();
        // D2 frequency ~ 2π × 384.23 THz
        let f_thz = rb.transition_freq / (2.0 * std::f64::consts::PI) / 1e12;
        assert!((f_thz - 384.23).abs() < 0.01, "got {f_thz} THz");
    }

    #[test]
    fn inconsistent_wavelength_rejected() {
        let consts = PhysicalConstants::codata();
        let mut rb = AtomSpecies::rb87(&consts);
        rb.transition_wavelength *= 1.0 + 1e-6;
        assert!(rb.validate(&consts).is_err());
    }
}
