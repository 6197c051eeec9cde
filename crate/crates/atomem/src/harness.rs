//! Experiment orchestration: ringdown and sweep protocols, heating runs,
//! parameter tables and CSV emission.

use std::fmt::Write as _;
use std::path::Path;

use crate::config::{Mode, RunConfig};
use crate::dynamics::{simulate_heating, DriveSpec};
use crate::fit::fit_exponential_decay;
use crate::params::{self, AtomConfig, DerivedParams, LatticeConfig};
use crate::rwa::{self, RwaState};
use crate::thermal::{
    self, ensemble_gamma, heating_samples, sample_thermal, EnsembleMethod, SweepSampling,
};
use crate::{Error, Result};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
/// Local tolerance for every harness integration.
const INTEGRATION_TOL: f64 = 1e-9;

/// One fitted membrane decay.
#[derive(Debug, Clone)]
pub struct RingdownResult {
    pub time: Vec<f64>,
    /// Envelope |b(t)|²
    pub envelope: Vec<f64>,
    /// Fitted decay rate (1/s)
    pub fitted_gamma: f64,
    /// Fitted envelope at t = 0
    pub fitted_initial: f64,
    pub fit_residual_rms: f64,
    /// Samples before this time were excluded from the fit
    pub discard_time: f64,
}

/// The with-atoms / without-atoms ringdown pair and the extracted Δγ.
#[derive(Debug, Clone)]
pub struct RingdownPair {
    pub with_atoms: RingdownResult,
    pub without_atoms: RingdownResult,
    pub delta_gamma: f64,
}

/// A swept response with one-sigma uncertainties.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub control_name: &'static str,
    pub control: Vec<f64>,
    pub response: Vec<f64>,
    pub uncertainty: Vec<f64>,
    pub seed: u64,
    pub config_hash: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepControl {
    Power,
    AtomNumber,
}

fn derived_at(cfg: &RunConfig, n_atoms: f64) -> Result<DerivedParams> {
    let atoms = AtomConfig {
        number: n_atoms,
        ..cfg.atoms
    };
    params::derive(&cfg.lattice, &cfg.membrane, &atoms, &cfg.species, &cfg.constants)
}

/// Membrane damping with atoms present, by the mode the config selects:
/// the single-Lorentzian formula (homogeneous) or the thermal ensemble sum.
fn model_delta_gamma(cfg: &RunConfig, lattice: &LatticeConfig, n_atoms: f64) -> Result<(f64, f64)> {
    let (omega_m, _) = params::membrane_at_power(lattice.power, &cfg.membrane)?;
    match cfg.experiment.mode {
        Mode::Homogeneous => {
            let atoms = AtomConfig {
                number: n_atoms,
                ..cfg.atoms
            };
            let p = params::derive(lattice, &cfg.membrane, &atoms, &cfg.species, &cfg.constants)?;
            Ok((rwa::adiabatic_gamma(&p)? - p.gamma_m, 0.0))
        }
        Mode::Ensemble => {
            let v0 = params::dipole_depth(lattice, &cfg.species, &cfg.constants)?;
            let samples = sample_thermal(
                v0,
                lattice.waist,
                lattice.wavenumber(),
                &cfg.ensemble,
                &cfg.species,
                &cfg.constants,
            )?;
            let est = ensemble_gamma(
                &samples,
                n_atoms,
                &cfg.species,
                cfg.membrane.effective_mass,
                omega_m,
                cfg.atoms.cooling_rate,
                lattice.reflectivity * lattice.transmittivity,
            )?;
            Ok((est.delta_gamma, est.stderr))
        }
    }
}

fn ringdown_arm(
    cfg: &RunConfig,
    gamma_total: f64,
    params_n: &DerivedParams,
    with_atoms: bool,
) -> Result<RingdownResult> {
    let spec = &cfg.experiment.ringdown;
    let b0 = rwa::membrane_amplitude(spec.amplitude, 0.0, 0.0, params_n, cfg.constants.hbar);
    let discard_time = if params_n.gamma_at > 0.0 {
        spec.discard_factor / params_n.gamma_at
    } else {
        0.0
    };
    let mut time = Vec::with_capacity(spec.points);
    let mut envelope = Vec::with_capacity(spec.points);
    let dt = spec.duration / (spec.points - 1) as f64;
    if with_atoms && cfg.experiment.mode == Mode::Homogeneous {
        // exact rotating-frame propagator
        let s0 = RwaState {
            t: 0.0,
            a: num_complex::Complex64::new(0.0, 0.0),
            b: b0,
        };
        for i in 0..spec.points {
            let t = i as f64 * dt;
            let s = rwa::propagate(&s0, params_n, t);
            time.push(t);
            envelope.push(s.b.norm_sqr());
        }
    } else {
        // membrane-only decay at the (possibly ensemble-summed) total rate
        let e0 = b0.norm_sqr();
        for i in 0..spec.points {
            let t = i as f64 * dt;
            time.push(t);
            envelope.push(e0 * (-gamma_total * t).exp());
        }
    }
    let series: Vec<(f64, f64)> = time.iter().copied().zip(envelope.iter().copied()).collect();
    let fit = fit_exponential_decay(&series, discard_time)?;
    Ok(RingdownResult {
        time,
        envelope,
        fitted_gamma: fit.rate,
        fitted_initial: fit.amplitude,
        fit_residual_rms: fit.residual_rms,
        discard_time,
    })
}

/// Alternating virtual ringdowns with and without atoms; all parameters
/// shared except the atom number.
pub fn run_ringdown(cfg: &RunConfig) -> Result<RingdownPair> {
    let params_with = derived_at(cfg, cfg.atoms.number)?;
    let params_without = derived_at(cfg, 0.0)?;
    let (delta_gamma_model, _stderr) = model_delta_gamma(cfg, &cfg.lattice, cfg.atoms.number)?;

    let with_atoms = ringdown_arm(
        cfg,
        params_with.gamma_m + delta_gamma_model,
        &params_with,
        true,
    )?;
    let without_atoms = ringdown_arm(cfg, params_without.gamma_m, &params_without, false)?;
    let delta_gamma = with_atoms.fitted_gamma - without_atoms.fitted_gamma;
    Ok(RingdownPair {
        with_atoms,
        without_atoms,
        delta_gamma,
    })
}

/// Sweep Δγ against lattice power or atom number.
pub fn run_sweep(cfg: &RunConfig, control: SweepControl) -> Result<SweepResult> {
    match control {
        SweepControl::Power => {
            let spec = &cfg.experiment.sweep_power;
            let lattice = LatticeConfig {
                waist: spec.waist.unwrap_or(cfg.lattice.waist),
                ..cfg.lattice.clone()
            };
            let n_atoms = spec.atom_number.unwrap_or(cfg.atoms.number);
            let powers = cfg.sweep_power_values();
            let (response, uncertainty) = match cfg.experiment.mode {
                Mode::Ensemble => {
                    let atoms = AtomConfig {
                        number: n_atoms,
                        ..cfg.atoms
                    };
                    let points = thermal::resonance_curve(
                        &powers,
                        &lattice,
                        &cfg.membrane,
                        &atoms,
                        &cfg.ensemble,
                        &cfg.species,
                        &cfg.constants,
                        EnsembleMethod::MonteCarlo(SweepSampling::SharedSeed),
                    )?;
                    (
                        points.iter().map(|p| p.delta_gamma).collect(),
                        points.iter().map(|p| p.stderr).collect(),
                    )
                }
                Mode::Homogeneous => {
                    let mut response = Vec::with_capacity(powers.len());
                    for &p_w in &powers {
                        let lat = LatticeConfig {
                            power: p_w,
                            ..lattice.clone()
                        };
                        let (dg, _) = model_delta_gamma(cfg, &lat, n_atoms)?;
                        response.push(dg);
                    }
                    let uncertainty = vec![0.0; powers.len()];
                    (response, uncertainty)
                }
            };
            Ok(SweepResult {
                control_name: "power_mw",
                control: powers.iter().map(|p| p * 1e3).collect(),
                response,
                uncertainty,
                seed: cfg.ensemble.seed,
                config_hash: cfg.config_hash,
            })
        }
        SweepControl::AtomNumber => {
            let spec = &cfg.experiment.sweep_atoms;
            let lattice = LatticeConfig {
                power: spec.power_w,
                ..cfg.lattice.clone()
            };
            let mut response = Vec::with_capacity(spec.numbers.len());
            let mut uncertainty = Vec::with_capacity(spec.numbers.len());
            for &n in &spec.numbers {
                let (dg, se) = model_delta_gamma(cfg, &lattice, n)?;
                response.push(dg);
                uncertainty.push(se);
            }
            Ok(SweepResult {
                control_name: "atom_number",
                control: spec.numbers.clone(),
                response,
                uncertainty,
                seed: cfg.ensemble.seed,
                config_hash: cfg.config_hash,
            })
        }
    }
}

/// Driven-membrane heating sweep output.
#[derive(Debug, Clone)]
pub struct HeatingSweep {
    pub power_w: Vec<f64>,
    /// Axial temperature change of surviving atoms (K)
    pub delta_t_ax: Vec<f64>,
    pub delta_t_ax_stderr: Vec<f64>,
    /// Radial temperature change; identically zero in this 1D axial model
    pub delta_t_rad: Vec<f64>,
    pub survival: Vec<f64>,
    pub seed: u64,
    pub config_hash: u64,
}

/// Hold the atoms for the configured time while the membrane is driven at a
/// fixed displacement amplitude at its own (power-dependent) frequency, then
/// report ΔT_ax and the surviving fraction per power.
///
/// Radial sampling reuses the same seed at every power so the curve shape is
/// not masked by sampling noise; the axial coordinates use a seed derived
/// from it.
pub fn run_heating(cfg: &RunConfig) -> Result<HeatingSweep> {
    let spec = &cfg.experiment.heating;
    let powers = cfg.heating_power_values();
    let ens = thermal::EnsembleConfig {
        sample_count: spec.samples,
        ..cfg.ensemble
    };
    let wavenumber = cfg.lattice.wavenumber();
    let axial_seed = cfg.ensemble.seed.wrapping_add(0xA71A);

    let mut out = HeatingSweep {
        power_w: powers.clone(),
        delta_t_ax: Vec::with_capacity(powers.len()),
        delta_t_ax_stderr: Vec::with_capacity(powers.len()),
        delta_t_rad: vec![0.0; powers.len()],
        survival: Vec::with_capacity(powers.len()),
        seed: cfg.ensemble.seed,
        config_hash: cfg.config_hash,
    };
    for &p_w in &powers {
        let lattice = LatticeConfig {
            power: p_w,
            ..cfg.lattice.clone()
        };
        let v0 = params::dipole_depth(&lattice, &cfg.species, &cfg.constants)?;
        let (omega_m, _) = params::membrane_at_power(p_w, &cfg.membrane)?;
        let radial = sample_thermal(
            v0,
            lattice.waist,
            wavenumber,
            &ens,
            &cfg.species,
            &cfg.constants,
        )?;
        let samples = heating_samples(
            &radial,
            cfg.atoms.temperature,
            axial_seed,
            &cfg.species,
            &cfg.constants,
        );
        let drive = if spec.drive_amplitude > 0.0 {
            DriveSpec::resonant_sine(spec.drive_amplitude, omega_m)
        } else {
            DriveSpec::none()
        };
        let res = simulate_heating(
            &samples,
            &drive,
            spec.hold,
            &cfg.species,
            wavenumber,
            &cfg.constants,
            INTEGRATION_TOL,
        )?;
        out.delta_t_ax.push(res.delta_t_ax);
        out.delta_t_ax_stderr.push(res.delta_t_ax_stderr);
        out.survival.push(res.survival);
    }
    Ok(out)
}

/// One row of the derived-parameter table.
#[derive(Debug, Clone)]
pub struct ParamRow {
    pub name: &'static str,
    pub value: f64,
    pub unit: &'static str,
    /// Ordinary-frequency equivalent for angular quantities
    pub hz: Option<f64>,
}

/// Every derived model coefficient, with both rad/s and Hz columns for
/// frequencies and rates.
pub fn emit_params(cfg: &RunConfig) -> Result<Vec<ParamRow>> {
    let p = derived_at(cfg, cfg.atoms.number)?;
    let ang = |v: f64| Some(v / TWO_PI);
    Ok(vec![
        ParamRow { name: "v0", value: p.v0, unit: "J", hz: None },
        ParamRow {
            name: "v0_kb_uk",
            value: p.v0 / cfg.constants.k_b * 1e6,
            unit: "uK",
            hz: None,
        },
        ParamRow { name: "omega_at", value: p.omega_at, unit: "rad/s", hz: ang(p.omega_at) },
        ParamRow { name: "omega_m", value: p.omega_m, unit: "rad/s", hz: ang(p.omega_m) },
        ParamRow { name: "gamma_m", value: p.gamma_m, unit: "rad/s", hz: ang(p.gamma_m) },
        ParamRow { name: "gamma_at", value: p.gamma_at, unit: "rad/s", hz: ang(p.gamma_at) },
        ParamRow { name: "delta", value: p.delta, unit: "rad/s", hz: ang(p.delta) },
        ParamRow { name: "g", value: p.g, unit: "rad/s", hz: ang(p.g) },
        ParamRow { name: "rt", value: p.rt, unit: "", hz: None },
        ParamRow { name: "n_atoms", value: p.n_atoms, unit: "", hz: None },
        ParamRow { name: "atom_mass", value: p.atom_mass, unit: "kg", hz: None },
        ParamRow { name: "membrane_mass", value: p.membrane_mass, unit: "kg", hz: None },
        ParamRow { name: "wavenumber", value: p.wavenumber, unit: "rad/m", hz: None },
    ])
}

fn meta_line(seed: u64, config_hash: u64) -> String {
    format!(
        "# atomem v{} seed={} config_hash={:016x}",
        env!("CARGO_PKG_VERSION"),
        seed,
        config_hash
    )
}

/// Write CSV atomically: the full contents land in a temporary file that is
/// renamed onto the target, so a failed run never leaves a partial file.
pub fn write_csv(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("csv.tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path).map_err(Error::Io)
}

pub fn sweep_csv(result: &SweepResult) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{}", meta_line(result.seed, result.config_hash));
    let _ = writeln!(
        s,
        "{},delta_gamma_per_s,delta_gamma_err_per_s",
        result.control_name
    );
    for i in 0..result.control.len() {
        let _ = writeln!(
            s,
            "{},{},{}",
            result.control[i], result.response[i], result.uncertainty[i]
        );
    }
    s
}

pub fn ringdown_csv(pair: &RingdownPair, seed: u64, config_hash: u64) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{}", meta_line(seed, config_hash));
    let _ = writeln!(
        s,
        "# gamma_with_per_s={} gamma_without_per_s={} delta_gamma_per_s={}",
        pair.with_atoms.fitted_gamma, pair.without_atoms.fitted_gamma, pair.delta_gamma
    );
    let _ = writeln!(s, "time_s,envelope_with_atoms,envelope_without_atoms");
    for i in 0..pair.with_atoms.time.len() {
        let _ = writeln!(
            s,
            "{},{},{}",
            pair.with_atoms.time[i], pair.with_atoms.envelope[i], pair.without_atoms.envelope[i]
        );
    }
    s
}

pub fn heating_csv(sweep: &HeatingSweep) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{}", meta_line(sweep.seed, sweep.config_hash));
    let _ = writeln!(
        s,
        "power_mw,delta_t_ax_uk,delta_t_ax_err_uk,delta_t_rad_uk,survival_fraction"
    );
    for i in 0..sweep.power_w.len() {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            sweep.power_w[i] * 1e3,
            sweep.delta_t_ax[i] * 1e6,
            sweep.delta_t_ax_stderr[i] * 1e6,
            sweep.delta_t_rad[i] * 1e6,
            sweep.survival[i]
        );
    }
    s
}

pub fn params_csv(rows: &[ParamRow], seed: u64, config_hash: u64) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{}", meta_line(seed, config_hash));
    let _ = writeln!(s, "name,value_si,unit,value_hz");
    for r in rows {
        match r.hz {
            Some(hz) => {
                let _ = writeln!(s, "{},{},{},{}", r.name, r.value, r.unit, hz);
            }
            None => {
                let _ = writeln!(s, "{},{},{},", r.name, r.value, r.unit);
            }
        }
    }
    s
}
