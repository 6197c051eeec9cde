//! Shared helpers for unit tests.
#![cfg(test)]

use crate::params::{LatticeConfig, MembraneConfig};

pub fn assert_rel(actual: f64, expected: f64, tol: f64) {
    let denom = expected.abs().max(f64::MIN_POSITIVE);
    let rel = (actual - expected).abs() / denom;
    assert!(
        rel <= tol,
        "relative error {rel:.3e} > {tol:.1e} (actual {actual:.12e}, expected {expected:.12e})"
    );
}

/// The published lattice setup: 76 mW, -21 GHz, 780.241 nm, 350 um waist.
pub fn paper_lattice() -> LatticeConfig {
    LatticeConfig {
        power: 0.076,
        detuning: -2.0 * std::f64::consts::PI * 21e9,
        wavelength: 780.241e-9,
        waist: 350e-6,
        reflectivity: 0.28,
        transmittivity: 0.82,
    }
}

/// Membrane calibration: knots at 0, 76 and 140 mW.
pub fn paper_membrane() -> MembraneConfig {
    let two_pi = 2.0 * std::f64::consts::PI;
    MembraneConfig {
        effective_mass: 1e-11,
        freq_calibration: vec![
            (0.0, two_pi * 272e3),
            (0.076, two_pi * 244e3),
            (0.140, two_pi * 220.4e3),
        ],
        quality_calibration: vec![(0.0, 8.5e5), (0.076, 1.5e6), (0.140, 2.05e6)],
    }
}
