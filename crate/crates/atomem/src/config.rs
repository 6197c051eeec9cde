//! Run configuration: TOML ingestion, unit conversion and fail-fast
//! validation.
//!
//! Config files use ordinary-frequency, lab-friendly units with explicit
//! suffixes (`power_mw`, `detuning_ghz`, `temperature_uk`, ...); everything
//! is converted to SI angular units on load.

use std::path::Path;

use serde::Deserialize;

use crate::constants::{AtomSpecies, PhysicalConstants};
use crate::params::{self, AtomConfig, LatticeConfig, MembraneConfig};
use crate::thermal::EnsembleConfig;
use crate::{Error, Result};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    lattice: RawLattice,
    membrane: RawMembrane,
    atoms: RawAtoms,
    ensemble: RawEnsemble,
    experiment: RawExperiment,
    species: Option<RawSpecies>,
    constants: Option<RawConstants>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLattice {
    power_mw: f64,
    detuning_ghz: f64,
    wavelength_nm: f64,
    waist_um: f64,
    reflectivity: f64,
    transmittivity: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMembrane {
    effective_mass_kg: f64,
    freq_calibration_mw_khz: Vec<(f64, f64)>,
    q_calibration_mw: Vec<(f64, f64)>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAtoms {
    number: f64,
    temperature_uk: f64,
    cooling_rate_khz: f64,
    dephasing_rate_khz: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnsemble {
    samples: usize,
    seed: u64,
    truncation_uk: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    mode: String,
    ringdown_amplitude_pm: f64,
    ringdown_duration_s: f64,
    ringdown_points: usize,
    transient_discard_factor: f64,
    sweep_power_min_mw: f64,
    sweep_power_max_mw: f64,
    sweep_power_points: usize,
    sweep_power_atom_number: Option<f64>,
    sweep_power_waist_um: Option<f64>,
    sweep_atoms_power_mw: f64,
    sweep_atoms_numbers: Vec<f64>,
    heating_drive_pm: f64,
    heating_hold_ms: f64,
    heating_power_min_mw: f64,
    heating_power_max_mw: f64,
    heating_power_points: usize,
    heating_samples: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpecies {
    mass_kg: f64,
    transition_wavelength_nm: f64,
    natural_linewidth_mhz: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstants {
    hbar: f64,
    c: f64,
    k_b: f64,
}

/// Homogeneous: one Lorentzian with the full γ_at. Ensemble: thermal sum of
/// single-atom rates with γ_c.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Homogeneous,
    Ensemble,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "homogeneous" => Ok(Mode::Homogeneous),
            "ensemble" => Ok(Mode::Ensemble),
            other => Err(Error::Config(format!(
                "unknown mode '{other}' (expected homogeneous or ensemble)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RingdownSpec {
    /// Initial membrane displacement (m)
    pub amplitude: f64,
    /// Recorded decay window (s)
    pub duration: f64,
    pub points: usize,
    /// Fit discards t < factor/γ_at
    pub discard_factor: f64,
}

#[derive(Debug, Clone)]
pub struct SweepPowerSpec {
    pub min_w: f64,
    pub max_w: f64,
    pub points: usize,
    /// Atom number used for this sweep when it differs from `[atoms]`
    pub atom_number: Option<f64>,
    /// Beam waist used for this sweep when it differs from `[lattice]`
    pub waist: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SweepAtomsSpec {
    pub power_w: f64,
    pub numbers: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct HeatingSpec {
    /// Membrane drive displacement amplitude (m)
    pub drive_amplitude: f64,
    /// Hold time with the drive on (s)
    pub hold: f64,
    pub power_min_w: f64,
    pub power_max_w: f64,
    pub power_points: usize,
    pub samples: usize,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub ringdown: RingdownSpec,
    pub sweep_power: SweepPowerSpec,
    pub sweep_atoms: SweepAtomsSpec,
    pub heating: HeatingSpec,
}

/// Fully validated run configuration in SI units.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub lattice: LatticeConfig,
    pub membrane: MembraneConfig,
    pub atoms: AtomConfig,
    pub ensemble: EnsembleConfig,
    pub experiment: ExperimentConfig,
    pub species: AtomSpecies,
    pub constants: PhysicalConstants,
    /// FNV-1a hash of the config file bytes; stamped into CSV metadata
    pub config_hash: u64,
    /// Non-fatal validation findings (printed by the CLI)
    pub warnings: Vec<String>,
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)?;
        Self::from_str_hashed(&text)
    }

    pub fn from_str_hashed(text: &str) -> Result<RunConfig> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("parse error: {e}")))?;
        let config_hash = fnv1a(text.as_bytes());

        let constants = match raw.constants {
            Some(c) => PhysicalConstants {
                hbar: c.hbar,
                c: c.c,
                k_b: c.k_b,
            },
            None => PhysicalConstants::codata(),
        };
        let species = match raw.species {
            Some(s) => {
                let wavelength = s.transition_wavelength_nm * 1e-9;
                AtomSpecies {
                    mass: s.mass_kg,
                    transition_freq: TWO_PI * constants.c / wavelength,
                    natural_linewidth: TWO_PI * s.natural_linewidth_mhz * 1e6,
                    transition_wavelength: wavelength,
                }
            }
            None => AtomSpecies::rb87(&constants),
        };

        let lattice = LatticeConfig {
            power: raw.lattice.power_mw * 1e-3,
            detuning: TWO_PI * raw.lattice.detuning_ghz * 1e9,
            wavelength: raw.lattice.wavelength_nm * 1e-9,
            waist: raw.lattice.waist_um * 1e-6,
            reflectivity: raw.lattice.reflectivity,
            transmittivity: raw.lattice.transmittivity,
        };
        let membrane = MembraneConfig {
            effective_mass: raw.membrane.effective_mass_kg,
            freq_calibration: raw
                .membrane
                .freq_calibration_mw_khz
                .iter()
                .map(|&(mw, khz)| (mw * 1e-3, TWO_PI * khz * 1e3))
                .collect(),
            quality_calibration: raw
                .membrane
                .q_calibration_mw
                .iter()
                .map(|&(mw, q)| (mw * 1e-3, q))
                .collect(),
        };
        let atoms = AtomConfig {
            number: raw.atoms.number,
            temperature: raw.atoms.temperature_uk * 1e-6,
            cooling_rate: TWO_PI * raw.atoms.cooling_rate_khz * 1e3,
            dephasing_rate: TWO_PI * raw.atoms.dephasing_rate_khz * 1e3,
        };
        let ensemble = EnsembleConfig {
            temperature: atoms.temperature,
            sample_count: raw.ensemble.samples,
            seed: raw.ensemble.seed,
            truncation_energy: raw.ensemble.truncation_uk.map(|uk| constants.k_b * uk * 1e-6),
        };
        let e = raw.experiment;
        let experiment = ExperimentConfig {
            mode: e.mode.parse()?,
            ringdown: RingdownSpec {
                amplitude: e.ringdown_amplitude_pm * 1e-12,
                duration: e.ringdown_duration_s,
                points: e.ringdown_points,
                discard_factor: e.transient_discard_factor,
            },
            sweep_power: SweepPowerSpec {
                min_w: e.sweep_power_min_mw * 1e-3,
                max_w: e.sweep_power_max_mw * 1e-3,
                points: e.sweep_power_points,
                atom_number: e.sweep_power_atom_number,
                waist: e.sweep_power_waist_um.map(|um| um * 1e-6),
            },
            sweep_atoms: SweepAtomsSpec {
                power_w: e.sweep_atoms_power_mw * 1e-3,
                numbers: e.sweep_atoms_numbers,
            },
            heating: HeatingSpec {
                drive_amplitude: e.heating_drive_pm * 1e-12,
                hold: e.heating_hold_ms * 1e-3,
                power_min_w: e.heating_power_min_mw * 1e-3,
                power_max_w: e.heating_power_max_mw * 1e-3,
                power_points: e.heating_power_points,
                samples: e.heating_samples,
            },
        };

        let mut cfg = RunConfig {
            lattice,
            membrane,
            atoms,
            ensemble,
            experiment,
            species,
            constants,
            config_hash,
            warnings: Vec::new(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Check every module precondition up front; computation starts only on
    /// a fully valid configuration.
    pub fn validate(&mut self) -> Result<()> {
        self.constants.validate()?;
        self.species.validate(&self.constants)?;
        self.lattice.validate()?;
        self.membrane.validate()?;
        self.atoms.validate()?;
        self.ensemble.validate()?;

        // detuning regime, evaluated once here so every later dipole_depth
        // call is known to succeed
        let v0 = params::dipole_depth(&self.lattice, &self.species, &self.constants)?;
        params::membrane_at_power(self.lattice.power, &self.membrane)?;

        let e = &self.experiment;
        if e.ringdown.amplitude <= 0.0 || e.ringdown.duration <= 0.0 || e.ringdown.points < 10 {
            return Err(Error::Config("invalid ringdown specification".into()));
        }
        if e.ringdown.discard_factor < 0.0 {
            return Err(Error::Config("transient discard factor must be >= 0".into()));
        }
        if e.sweep_power.points < 2 || e.sweep_power.min_w >= e.sweep_power.max_w {
            return Err(Error::Config("invalid power sweep specification".into()));
        }
        params::membrane_at_power(e.sweep_power.min_w, &self.membrane)?;
        params::membrane_at_power(e.sweep_power.max_w, &self.membrane)?;
        if e.sweep_atoms.numbers.is_empty() {
            return Err(Error::Config("atom-number sweep needs at least one value".into()));
        }
        if e.sweep_atoms.numbers.iter().any(|&n| n < 0.0) {
            return Err(Error::Config("atom numbers must be >= 0".into()));
        }
        params::membrane_at_power(e.sweep_atoms.power_w, &self.membrane)?;
        if e.heating.power_points < 2 || e.heating.power_min_w >= e.heating.power_max_w {
            return Err(Error::Config("invalid heating sweep specification".into()));
        }
        params::membrane_at_power(e.heating.power_min_w, &self.membrane)?;
        params::membrane_at_power(e.heating.power_max_w, &self.membrane)?;
        if e.heating.drive_amplitude < 0.0 || e.heating.hold <= 0.0 || e.heating.samples < 1000 {
            return Err(Error::Config("invalid heating specification".into()));
        }

        self.warnings.clear();
        if v0 <= self.constants.k_b * self.atoms.temperature {
            self.warnings.push(format!(
                "lattice depth ({:.1} uK) does not exceed the atom temperature ({:.1} uK); \
                 the trap holds only a small fraction of the ensemble",
                v0 / self.constants.k_b * 1e6,
                self.atoms.temperature * 1e6
            ));
        }
        Ok(())
    }

    /// Evenly spaced power grid of the sweep section.
    pub fn sweep_power_values(&self) -> Vec<f64> {
        linspace(
            self.experiment.sweep_power.min_w,
            self.experiment.sweep_power.max_w,
            self.experiment.sweep_power.points,
        )
    }

    /// Evenly spaced power grid of the heating section.
    pub fn heating_power_values(&self) -> Vec<f64> {
        linspace(
            self.experiment.heating.power_min_w,
            self.experiment.heating.power_max_w,
            self.experiment.heating.power_points,
        )
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
[lattice]
power_mw = 76.0
detuning_ghz = -21.0
wavelength_nm = 780.241
waist_um = 350.0
reflectivity = 0.28
transmittivity = 0.82

[membrane]
effective_mass_kg = 1.0e-11
freq_calibration_mw_khz = [[0.0, 272.0], [76.0, 244.0], [140.0, 220.4]]
q_calibration_mw = [[0.0, 8.5e5], [76.0, 1.5e6], [140.0, 2.05e6]]

[atoms]
number = 2.3e6
temperature_uk = 100.0
cooling_rate_khz = 30.0
dephasing_rate_khz = 100.0

[ensemble]
samples = 10000
seed = 7

[experiment]
mode = "homogeneous"
ringdown_amplitude_pm = 540.0
ringdown_duration_s = 2.0
ringdown_points = 400
transient_discard_factor = 5.0
sweep_power_min_mw = 40.0
sweep_power_max_mw = 140.0
sweep_power_points = 26
sweep_power_atom_number = 2.0e6
sweep_power_waist_um = 370.0
sweep_atoms_power_mw = 76.0
sweep_atoms_numbers = [0.5e6, 1.0e6, 1.5e6, 2.0e6, 2.3e6]
heating_drive_pm = 330.0
heating_hold_ms = 5.0
heating_power_min_mw = 40.0
heating_power_max_mw = 140.0
heating_power_points = 11
heating_samples = 1000
"#;

    #[test]
    fn parses_and_converts_units() {
        let cfg = RunConfig::from_str_hashed(SAMPLE).unwrap();
        assert_eq!(cfg.lattice.power, 0.076);
        assert!((cfg.lattice.detuning + TWO_PI * 21e9).abs() < 1.0);
        assert_eq!(cfg.atoms.temperature, 100e-6);
        assert_eq!(cfg.membrane.freq_calibration[1].0, 0.076);
        assert!((cfg.membrane.freq_calibration[1].1 - TWO_PI * 244e3).abs() < 1e-6);
        assert_eq!(cfg.ensemble.seed, 7);
        assert_eq!(cfg.experiment.mode, Mode::Homogeneous);
        assert_eq!(cfg.experiment.heating.samples, 1000);
        assert!(cfg.warnings.is_empty());
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::from_str_hashed(SAMPLE).unwrap();
        let b = RunConfig::from_str_hashed(SAMPLE).unwrap();
        assert_eq!(a.config_hash, b.config_hash);
        let changed = SAMPLE.replace("seed = 7", "seed = 8");
        let c = RunConfig::from_str_hashed(&changed).unwrap();
        assert_ne!(a.config_hash, c.config_hash);
    }

    #[test]
    fn rejects_sweep_outside_calibration() {
        let bad = SAMPLE.replace("sweep_power_max_mw = 140.0", "sweep_power_max_mw = 200.0");
        assert!(matches!(
            RunConfig::from_str_hashed(&bad),
            Err(Error::OutOfCalibrationRange { .. })
        ));
    }

    #[test]
    fn rejects_unknown_keys() {
        let bad = SAMPLE.replace("seed = 7", "seed = 7\nbogus_key = 1");
        assert!(matches!(
            RunConfig::from_str_hashed(&bad),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn rejects_bad_mode() {
        let bad = SAMPLE.replace("\"homogeneous\"", "\"banana\"");
        assert!(RunConfig::from_str_hashed(&bad).is_err());
    }

    #[test]
    fn warns_on_shallow_trap() {
        let shallow = SAMPLE.replace("power_mw = 76.0", "power_mw = 20.0");
        let cfg = RunConfig::from_str_hashed(&shallow).unwrap();
        assert_eq!(cfg.warnings.len(), 1);
    }
}
