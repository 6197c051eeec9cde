//! Finite-temperature ensemble in the transverse Gaussian lattice profile.
//!
//! Atoms sample the radial Boltzmann distribution of the transverse potential
//! U(ρ) = V₀(1 − e^{−2ρ²/w₀²}); each carries a local depth and trap frequency.
//! The ensemble-summed membrane damping adds up single-atom adiabatic rates
//! evaluated at the local detuning, with γ_at replaced by the bare cooling
//! rate γ_c since the inhomogeneity is modeled explicitly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constants::{AtomSpecies, PhysicalConstants};
use crate::dynamics::HeatingSample;
use crate::params::{
    self, coupling_constant, trap_frequency, AtomConfig, LatticeConfig, MembraneConfig,
};
use crate::{Error, Result};

/// One radial sample of the thermal distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalSample {
    /// Radial coordinate (m)
    pub rho: f64,
    /// Local modulation depth V₀·e^{−2ρ²/w₀²} (J)
    pub v0_loc: f64,
    /// Local trap frequency (rad/s)
    pub omega_loc: f64,
    /// Statistical weight; a sample set sums to 1
    pub weight: f64,
}

/// Monte Carlo configuration for the thermal ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleConfig {
    /// Ensemble temperature (K)
    pub temperature: f64,
    /// Number of samples (≥ 1000)
    pub sample_count: usize,
    /// RNG seed; identical seeds give bitwise-identical samples
    pub seed: u64,
    /// Radial truncation energy (J). `None` selects the default V₀/2.
    /// Values ≥ V₀ are rejected: the radial density is not normalizable
    /// there because U(ρ) only reaches V₀ at infinite radius.
    pub truncation_energy: Option<f64>,
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sample_count < 1000 {
            return Err(Error::Config(
                "ensemble sample count must be at least 1000".into(),
            ));
        }
        if !(self.temperature > 0.0) {
            return Err(Error::Config("ensemble temperature must be positive".into()));
        }
        Ok(())
    }
}

/// Local modulation depth at radius ρ for a beam of waist w₀.
pub fn local_depth(rho: f64, v0: f64, w0: f64) -> f64 {
    v0 * (-2.0 * rho * rho / (w0 * w0)).exp()
}

fn truncation_x_max(v0: f64, truncation: Option<f64>) -> Result<f64> {
    if !(v0 > 0.0) {
        return Err(Error::DegenerateDistribution);
    }
    let e_t = truncation.unwrap_or(v0 / 2.0);
    if e_t <= 0.0 {
        return Err(Error::DegenerateDistribution);
    }
    if e_t >= v0 {
        return Err(Error::Config(
            "truncation energy must lie strictly below the modulation depth".into(),
        ));
    }
    // U(x)/V0 = 1 - e^{-2x} with x = ρ²/w₀²
    Ok(-0.5 * (1.0 - e_t / v0).ln())
}

/// Draw radial samples from n(ρ) ∝ ρ·exp(−U(ρ)/k_BT), truncated at the
/// radius where U equals the truncation energy. Deterministic for a fixed
/// seed; all weights are 1/count.
pub fn sample_thermal(
    v0: f64,
    w0: f64,
    wavenumber: f64,
    cfg: &EnsembleConfig,
    species: &AtomSpecies,
    constants: &PhysicalConstants,
) -> Result<Vec<ThermalSample>> {
    cfg.validate()?;
    let x_max = truncation_x_max(v0, cfg.truncation_energy)?;
    let beta = v0 / (constants.k_b * cfg.temperature);

    // inverse-CDF table over x = ρ²/w₀² (the ρ dρ measure is flat in x)
    const GRID: usize = 8192;
    let dx = x_max / GRID as f64;
    let weight_at = |x: f64| (-beta * (1.0 - (-2.0 * x).exp())).exp();
    let mut cdf = Vec::with_capacity(GRID + 1);
    cdf.push(0.0);
    let mut acc = 0.0;
    let mut prev = weight_at(0.0);
    for i in 1..=GRID {
        let w = weight_at(i as f64 * dx);
        acc += 0.5 * (prev + w) * dx;
        cdf.push(acc);
        prev = w;
    }
    let total = *cdf.last().unwrap();
    if !(total > 0.0) {
        return Err(Error::DegenerateDistribution);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let weight = 1.0 / cfg.sample_count as f64;
    let mut samples = Vec::with_capacity(cfg.sample_count);
    for _ in 0..cfg.sample_count {
        let target = rng.gen::<f64>() * total;
        let j = cdf.partition_point(|&c| c < target).max(1).min(GRID);
        let frac = (target - cdf[j - 1]) / (cdf[j] - cdf[j - 1]).max(f64::MIN_POSITIVE);
        let x = ((j - 1) as f64 + frac) * dx;
        let rho = w0 * x.sqrt();
        let v0_loc = local_depth(rho, v0, w0);
        let omega_loc = trap_frequency(v0_loc, species, wavenumber)?;
        samples.push(ThermalSample {
            rho,
            v0_loc,
            omega_loc,
            weight,
        });
    }
    Ok(samples)
}

/// Augment radial samples with axial phase-space coordinates drawn from the
/// Boltzmann distribution in each atom's local well (energies truncated at
/// the local depth, harmonic placement). Deterministic for a fixed seed.
pub fn heating_samples(
    samples: &[ThermalSample],
    temperature: f64,
    seed: u64,
    species: &AtomSpecies,
    constants: &PhysicalConstants,
) -> Vec<HeatingSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kt = constants.k_b * temperature;
    samples
        .iter()
        .map(|s| {
            let u: f64 = rng.gen();
            // truncated exponential on [0, v0_loc): E = -kT ln(1 - u(1 - e^{-V/kT}))
            let cap = 1.0 - (-s.v0_loc / kt).exp();
            let energy = -kt * (-u * cap).ln_1p();
            let phase = rng.gen::<f64>() * 2.0 * std::f64::consts::PI;
            let v_amp = (2.0 * energy / species.mass).sqrt();
            HeatingSample {
                v0_loc: s.v0_loc,
                omega_loc: s.omega_loc,
                z: v_amp / s.omega_loc.max(1e-3) * phase.sin(),
                v: v_amp * phase.cos(),
            }
        })
        .collect()
}

/// Monte Carlo estimate of the atomic contribution to the membrane damping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleGamma {
    /// Δγ summed over the ensemble (1/s); γ_m excluded
    pub delta_gamma: f64,
    /// One-sigma Monte Carlo error (1/s); zero for quadrature results
    pub stderr: f64,
}

/// Sum of single-atom adiabatic damping rates over the ensemble:
/// Δγ = N·Σᵢ wᵢ γ_c g₁(ω_loc,i)² 𝔯𝔱 / (δᵢ² + (γ_c/2)²) with δᵢ = ω_loc,i − ω_m.
pub fn ensemble_gamma(
    samples: &[ThermalSample],
    n_atoms: f64,
    species: &AtomSpecies,
    membrane_mass: f64,
    omega_m: f64,
    gamma_c: f64,
    rt: f64,
) -> Result<EnsembleGamma> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    if !(gamma_c > 0.0) {
        return Err(Error::ZeroCoolingRate);
    }
    let half_sq = (gamma_c / 2.0).powi(2);
    let mut mean = 0.0;
    let mut mean_sq = 0.0;
    for s in samples {
        let g1 = coupling_constant(1.0, species.mass, s.omega_loc, membrane_mass, omega_m);
        let delta = s.omega_loc - omega_m;
        let contrib = gamma_c * g1 * g1 * rt / (delta * delta + half_sq);
        mean += s.weight * contrib;
        mean_sq += s.weight * contrib * contrib;
    }
    let var = (mean_sq - mean * mean).max(0.0);
    Ok(EnsembleGamma {
        delta_gamma: n_atoms * mean,
        stderr: n_atoms * (var / samples.len() as f64).sqrt(),
    })
}

/// Deterministic radial quadrature of the same ensemble sum (adaptive
/// Simpson over x = ρ²/w₀²). Cross-checks the Monte Carlo path and provides
/// a noise-free value for acceptance runs.
#[allow(clippy::too_many_arguments)]
pub fn ensemble_gamma_quadrature(
    v0: f64,
    w0: f64,
    wavenumber: f64,
    temperature: f64,
    truncation: Option<f64>,
    n_atoms: f64,
    species: &AtomSpecies,
    membrane_mass: f64,
    omega_m: f64,
    gamma_c: f64,
    rt: f64,
    constants: &PhysicalConstants,
) -> Result<f64> {
    if !(gamma_c > 0.0) {
        return Err(Error::ZeroCoolingRate);
    }
    let _ = w0; // the integral over x = ρ²/w₀² is waist-free
    let x_max = truncation_x_max(v0, truncation)?;
    let beta = v0 / (constants.k_b * temperature);
    let half_sq = (gamma_c / 2.0).powi(2);
    let mass = species.mass;
    let weight = |x: f64| (-beta * (1.0 - (-2.0 * x).exp())).exp();
    let contrib = |x: f64| {
        let v0_loc = v0 * (-2.0 * x).exp();
        let omega_loc = wavenumber * (2.0 * v0_loc / mass).sqrt();
        let g1 = coupling_constant(1.0, mass, omega_loc, membrane_mass, omega_m);
        let delta = omega_loc - omega_m;
        gamma_c * g1 * g1 * rt / (delta * delta + half_sq)
    };
    let num = adaptive_simpson(&|x| contrib(x) * weight(x), 0.0, x_max, 1e-12, 28);
    let den = adaptive_simpson(&weight, 0.0, x_max, 1e-12, 28);
    if den <= 0.0 {
        return Err(Error::DegenerateDistribution);
    }
    Ok(n_atoms * num / den)
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64, depth: u32) -> f64 {
    fn simpson(a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        fm: f64,
        whole: f64,
        eps: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(a, fa, m, fm, flm);
        let right = simpson(m, fm, b, fb, frm);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * eps {
            left + right + (left + right - whole) / 15.0
        } else {
            recurse(f, a, fa, m, fm, flm, left, eps / 2.0, depth - 1)
                + recurse(f, m, fm, b, fb, frm, right, eps / 2.0, depth - 1)
        }
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = simpson(a, fa, b, fb, fm);
    let eps = whole.abs().max(1e-300) * rel_tol;
    recurse(f, a, fa, b, fb, fm, whole, eps, depth)
}

/// How the ensemble is re-drawn along a parameter sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepSampling {
    /// Same seed at every sweep point (variance reduction: smooth curves)
    SharedSeed,
    /// Fresh seed per point (statistically independent points)
    ReseedPerPoint,
}

/// Evaluation backend for ensemble sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnsembleMethod {
    MonteCarlo(SweepSampling),
    Quadrature,
}

/// One point of a resonance sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonancePoint {
    pub power: f64,
    pub delta_gamma: f64,
    pub stderr: f64,
}

/// Ensemble damping versus lattice power: for each P the depth, trap
/// frequency and membrane frequency are recomputed and the ensemble sum is
/// re-evaluated. Output is ordered by the input powers.
#[allow(clippy::too_many_arguments)]
pub fn resonance_curve(
    p_values: &[f64],
    lattice: &LatticeConfig,
    membrane: &MembraneConfig,
    atoms: &AtomConfig,
    ensemble: &EnsembleConfig,
    species: &AtomSpecies,
    constants: &PhysicalConstants,
    method: EnsembleMethod,
) -> Result<Vec<ResonancePoint>> {
    ensemble.validate()?;
    if !(atoms.cooling_rate > 0.0) {
        return Err(Error::ZeroCoolingRate);
    }
    let rt = lattice.reflectivity * lattice.transmittivity;
    let wavenumber = lattice.wavenumber();
    let mut out = Vec::with_capacity(p_values.len());
    for (i, &p_w) in p_values.iter().enumerate() {
        let lattice_p = LatticeConfig {
            power: p_w,
            ..lattice.clone()
        };
        let v0 = params::dipole_depth(&lattice_p, species, constants)?;
        let (omega_m, _gamma_m) = params::membrane_at_power(p_w, membrane)?;
        let (delta_gamma, stderr) = match method {
            EnsembleMethod::MonteCarlo(sampling) => {
                let cfg = EnsembleConfig {
                    seed: match sampling {
                        SweepSampling::SharedSeed => ensemble.seed,
                        SweepSampling::ReseedPerPoint => {
                            ensemble.seed.wrapping_add(i as u64).wrapping_mul(0x9e3779b97f4a7c15)
                        }
                    },
                    ..*ensemble
                };
                let samples =
                    sample_thermal(v0, lattice.waist, wavenumber, &cfg, species, constants)?;
                let est = ensemble_gamma(
                    &samples,
                    atoms.number,
                    species,
                    membrane.effective_mass,
                    omega_m,
                    atoms.cooling_rate,
                    rt,
                )?;
                (est.delta_gamma, est.stderr)
            }
            EnsembleMethod::Quadrature => {
                let dg = ensemble_gamma_quadrature(
                    v0,
                    lattice.waist,
                    wavenumber,
                    ensemble.temperature,
                    ensemble.truncation_energy,
                    atoms.number,
                    species,
                    membrane.effective_mass,
                    omega_m,
                    atoms.cooling_rate,
                    rt,
                    constants,
                )?;
                (dg, 0.0)
            }
        };
        out.push(ResonancePoint {
            power: p_w,
            delta_gamma,
            stderr,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{assert_rel, paper_lattice, paper_membrane};

    const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

    fn consts() -> PhysicalConstants {
        PhysicalConstants::codata()
    }

    fn cfg(seed: u64, count: usize) -> EnsembleConfig {
        EnsembleConfig {
            temperature: 100e-6,
            sample_count: count,
            seed,
            truncation_energy: None,
        }
    }

    #[test]
    fn local_depth_profile() {
        let v0 = 4e-27;
        let w0 = 370e-6;
        assert_eq!(local_depth(0.0, v0, w0), v0);
        assert_rel(
            local_depth(w0 / 2f64.sqrt(), v0, w0),
            v0 / std::f64::consts::E,
            1e-12,
        );
        assert_rel(local_depth(w0, v0, w0), v0 * (-2.0f64).exp(), 1e-12);
    }

    #[test]
    fn cold_limit_concentrates_samples() {
        let c = consts();
        let rb = AtomSpecies::rb87(&c);
        let v0 = c.k_b * 290e-6;
        let cold = EnsembleConfig {
            temperature: 290e-6 / 1e6,
            sample_count: 2000,
            seed: 5,
            truncation_energy: None,
        };
        let samples = sample_thermal(v0, 370e-6, TWO_PI / 780e-9, &cold, &rb, &c).unwrap();
        assert!(samples.iter().all(|s| s.rho < 0.01 * 370e-6));
    }

    #[test]
    fn sampling_is_deterministic() {
        let c = consts();
        let rb = AtomSpecies::rb87(&c);
        let v0 = c.k_b * 290e-6;
        let a = sample_thermal(v0, 370e-6, TWO_PI / 780e-9, &cfg(42, 1500), &rb, &c).unwrap();
        let b = sample_thermal(v0, 370e-6, TWO_PI / 780e-9, &cfg(42, 1500), &rb, &c).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.rho.to_bits(), y.rho.to_bits());
            assert_eq!(x.omega_loc.to_bits(), y.omega_loc.to_bits());
        }
        let d = sample_thermal(v0, 370e-6, TWO_PI / 780e-9, &cfg(43, 1500), &rb, &c).unwrap();
        assert!(a.iter().zip(&d).any(|(x, y)| x.rho != y.rho));
    }

    #[test]
    fn mean_local_frequency_ratio() {
        // quadrature oracle for T = 100 uK, V0 = kB*290 uK, w0 = 370 um,
        // default truncation: mean(omega_loc/omega_at) = 0.880511895179
        let c = consts();
        let rb = AtomSpecies::rb87(&c);
        let v0 = c.k_b * 290e-6;
        let k = TWO_PI / 780e-9;
        let omega_at = trap_frequency(v0, &rb, k).unwrap();
        let samples = sample_thermal(v0, 370e-6, k, &cfg(7, 40_000), &rb, &c).unwrap();
        let mean: f64 = samples.iter().map(|s| s.weight * s.omega_loc).sum::<f64>() / omega_at;
        assert_rel(mean, 0.880_511_895_179, 5e-3);
    }

    #[test]
    fn truncation_validation() {
        let c = consts();
        let rb = AtomSpecies::rb87(&c);
        let v0 = c.k_b * 290e-6;
        let mut bad = cfg(1, 1000);
        bad.truncation_energy = Some(0.0);
        assert!(matches!(
            sample_thermal(v0, 370e-6, 8e6, &bad, &rb, &c),
            Err(Error::DegenerateDistribution)
        ));
        bad.truncation_energy = Some(v0);
        assert!(matches!(
            sample_thermal(v0, 370e-6, 8e6, &bad, &rb, &c),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            sample_thermal(0.0, 370e-6, 8e6, &cfg(1, 1000), &rb, &c),
            Err(Error::DegenerateDistribution)
        ));
    }

    #[test]
    fn homogeneous_limit_reduces_to_adiabatic_formula() {
        let c = consts();
        let rb = AtomSpecies::rb87(&c);
        let omega = TWO_PI * 244e3;
        let gamma_c = TWO_PI * 30e3;
        let n_atoms = 2.3e6;
        let n = 1000;
        let samples: Vec<ThermalSample> = (0..n)
            .map(|_| ThermalSample {
                rho: 0.0,
                v0_loc: 4e-27,
                omega_loc: omega,
                weight: 1.0 / n as f64,
            })
            .collect();
        let est = ensemble_gamma(&samples, n_atoms, &rb, 1e-11, omega, gamma_c, 0.2296).unwrap();
        // homogeneous Eq.(2) with gamma_at = gamma_c and delta = 0
        let g = coupling_constant(n_atoms, rb.mass, omega, 1e-11, omega);
        let expected = gamma_c * g * g * 0.2296 / (gamma_c / 2.0).powi(2);
        assert_rel(est.delta_gamma, expected, 1e-12);
    }

    #[test]
    fn linear_in_atom_number() {
        let c = consts();
        let rb = AtomSpecies::rb87(&c);
        let v0 = c.k_b * 200e-6;
        let k = TWO_PI / 780e-9;
        let samples = sample_thermal(v0, 370e-6, k, &cfg(3, 2000), &rb, &c).unwrap();
        let omega_m = TWO_PI * 244e3;
        let one = ensemble_gamma(&samples, 1e6, &rb, 1e-11, omega_m, TWO_PI * 30e3, 0.2296)
            .unwrap()
            .delta_gamma;
        let two = ensemble_gamma(&samples, 2e6, &rb, 1e-11, omega_m, TWO_PI * 30e3, 0.2296)
            .unwrap()
            .delta_gamma;
        assert_rel(two, 2.0 * one, 1e-12);
        let zero = ensemble_gamma(&samples, 0.0, &rb, 1e-11, omega_m, TWO_PI * 30e3, 0.2296)
            .unwrap()
            .delta_gamma;
        assert_eq!(zero, 0.0);
    }

    #[test]
    fn monte_carlo_agrees_with_quadrature() {
        let c = consts();
        let rb = AtomSpecies::rb87(&c);
        let lattice = LatticeConfig {
            waist: 370e-6,
            ..paper_lattice()
        };
        let v0 = params::dipole_depth(&lattice, &rb, &c).unwrap();
        let k = lattice.wavenumber();
        let omega_m = TWO_PI * 244e3;
        let gamma_c = TWO_PI * 30e3;
        let samples = sample_thermal(v0, 370e-6, k, &cfg(11, 20_000), &rb, &c).unwrap();
        let mc = ensemble_gamma(&samples, 2e6, &rb, 1e-11, omega_m, gamma_c, 0.2296).unwrap();
        let quad = ensemble_gamma_quadrature(
            v0,
            370e-6,
            k,
            100e-6,
            None,
            2e6,
            &rb,
            1e-11,
            omega_m,
            gamma_c,
            0.2296,
            &c,
        )
        .unwrap();
        assert!(
            (mc.delta_gamma - quad).abs() <= 3.0 * mc.stderr,
            "MC {} vs quadrature {} (3σ = {})",
            mc.delta_gamma,
            quad,
            3.0 * mc.stderr
        );
        assert!(quad > 0.0);
    }

    #[test]
    fn monte_carlo_error_scales_as_inverse_sqrt_n() {
        let c = consts();
        let rb = AtomSpecies::rb87(&c);
        let v0 = c.k_b * 193e-6;
        let k = TWO_PI / 780.241e-9;
        let omega_m = TWO_PI * 244e3;
        let gamma_c = TWO_PI * 30e3;
        let replicates = 12;
        let mut sd = Vec::new();
        for &count in &[1000usize, 10_000, 100_000] {
            let mut values = Vec::new();
            for r in 0..replicates {
                let samples =
                    sample_thermal(v0, 370e-6, k, &cfg(1000 + r, count), &rb, &c).unwrap();
                values.push(
                    ensemble_gamma(&samples, 2e6, &rb, 1e-11, omega_m, gamma_c, 0.2296)
                        .unwrap()
                        .delta_gamma,
                );
            }
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
                / (values.len() - 1) as f64;
            sd.push(var.sqrt());
        }
        // sd should fall by sqrt(10) per decade, within a factor 2
        for w in sd.windows(2) {
            let ratio = w[0] / w[1];
            assert!(
                ratio > 10f64.sqrt() / 2.0 && ratio < 10f64.sqrt() * 2.0,
                "scaling ratio {ratio}"
            );
        }
    }

    #[test]
    fn resonance_curve_matches_direct_call_at_a_knot() {
        let c = consts();
        let rb = AtomSpecies::rb87(&c);
        let lattice = LatticeConfig {
            waist: 370e-6,
            ..paper_lattice()
        };
        let membrane = paper_membrane();
        let atoms = AtomConfig {
            number: 2e6,
            temperature: 100e-6,
            cooling_rate: TWO_PI * 30e3,
            dephasing_rate: TWO_PI * 100e3,
        };
        let ens = cfg(9, 2000);
        let curve = resonance_curve(
            &[0.076],
            &lattice,
            &membrane,
            &atoms,
            &ens,
            &rb,
            &c,
            EnsembleMethod::MonteCarlo(SweepSampling::SharedSeed),
        )
        .unwrap();
        // direct composition with the same seed
        let v0 = params::dipole_depth(&lattice, &rb, &c).unwrap();
        let samples = sample_thermal(v0, 370e-6, lattice.wavenumber(), &ens, &rb, &c).unwrap();
        let direct = ensemble_gamma(
            &samples,
            2e6,
            &rb,
            membrane.effective_mass,
            TWO_PI * 244e3,
            TWO_PI * 30e3,
            0.2296,
        )
        .unwrap();
        assert_eq!(curve[0].delta_gamma.to_bits(), direct.delta_gamma.to_bits());
    }

    #[test]
    fn doubling_atom_number_doubles_the_curve() {
        let c = consts();
        let rb = AtomSpecies::rb87(&c);
        let lattice = LatticeConfig {
            waist: 370e-6,
            ..paper_lattice()
        };
        let membrane = paper_membrane();
        let mut atoms = AtomConfig {
            number: 1e6,
            temperature: 100e-6,
            cooling_rate: TWO_PI * 30e3,
            dephasing_rate: TWO_PI * 100e3,
        };
        let ens = cfg(21, 1000);
        let powers = [0.05, 0.076, 0.11];
        let one = resonance_curve(
            &powers,
            &lattice,
            &membrane,
            &atoms,
            &ens,
            &rb,
            &c,
            EnsembleMethod::MonteCarlo(SweepSampling::SharedSeed),
        )
        .unwrap();
        atoms.number = 2e6;
        let two = resonance_curve(
            &powers,
            &lattice,
            &membrane,
            &atoms,
            &ens,
            &rb,
            &c,
            EnsembleMethod::MonteCarlo(SweepSampling::SharedSeed),
        )
        .unwrap();
        for (a, b) in one.iter().zip(&two) {
            assert_rel(b.delta_gamma, 2.0 * a.delta_gamma, 1e-12);
        }
    }

    #[test]
    fn heating_samples_are_bound_and_deterministic() {
        let c = consts();
        let rb = AtomSpecies::rb87(&c);
        let v0 = c.k_b * 216e-6;
        let k = TWO_PI / 780.241e-9;
        let radial = sample_thermal(v0, 350e-6, k, &cfg(17, 1200), &rb, &c).unwrap();
        let a = heating_samples(&radial, 100e-6, 99, &rb, &c);
        let b = heating_samples(&radial, 100e-6, 99, &rb, &c);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.z.to_bits(), y.z.to_bits());
            assert_eq!(x.v.to_bits(), y.v.to_bits());
        }
        for s in &a {
            let e = crate::dynamics::axial_energy(s.z, s.v, s.v0_loc, k, 0.0, rb.mass);
            assert!(e < s.v0_loc, "sample energy {e} above local depth {}", s.v0_loc);
        }
    }
}
