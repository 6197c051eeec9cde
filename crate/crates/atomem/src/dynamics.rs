//! Full-coordinate dynamics: the linear coupled-oscillator model and the
//! nonlinear sinusoidal-lattice model used for the driven-membrane heating
//! runs.

use crate::constants::{AtomSpecies, PhysicalConstants};
use crate::ode::{self, StepStats};
use crate::params::{DerivedParams, LatticeConfig};
use crate::{Error, Result};

/// Phase-space coordinates at one time point. `p_at` is the total ensemble
/// momentum, conjugate to the center-of-mass coordinate with mass N·m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullState {
    pub t: f64,
    pub x_at: f64,
    pub p_at: f64,
    pub x_m: f64,
    pub p_m: f64,
}

impl FullState {
    pub fn at_rest(t: f64) -> Self {
        FullState {
            t,
            x_at: 0.0,
            p_at: 0.0,
            x_m: 0.0,
            p_m: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.t, self.x_at, self.p_at, self.x_m, self.p_m]
            .iter()
            .all(|v| v.is_finite())
    }
}

/// Time derivative of [`FullState`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullDerivative {
    pub x_at: f64,
    pub p_at: f64,
    pub x_m: f64,
    pub p_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriveKind {
    None,
    ResonantSine,
}

/// Sinusoidal membrane drive. `amplitude` is displacement-equivalent: the
/// force term applied in [`integrate`] is M ω_m² A sin(ω_d t + φ), and in the
/// heating model the membrane position itself is prescribed as
/// A sin(ω_d t + φ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSpec {
    pub kind: DriveKind,
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
}

impl DriveSpec {
    pub fn none() -> Self {
        DriveSpec {
            kind: DriveKind::None,
            amplitude: 0.0,
            frequency: 0.0,
            phase: 0.0,
        }
    }

    pub fn resonant_sine(amplitude: f64, frequency: f64) -> Self {
        DriveSpec {
            kind: DriveKind::ResonantSine,
            amplitude,
            frequency,
            phase: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.amplitude < 0.0 || !self.amplitude.is_finite() {
            return Err(Error::Config("drive amplitude must be >= 0".into()));
        }
        Ok(())
    }

    /// Membrane displacement at time `t` when the drive prescribes motion.
    pub fn displacement(&self, t: f64) -> f64 {
        match self.kind {
            DriveKind::None => 0.0,
            DriveKind::ResonantSine => self.amplitude * (self.frequency * t + self.phase).sin(),
        }
    }
}

/// Force amplitude (in displacement-equivalent units) that produces the
/// requested steady-state displacement amplitude at drive frequency ω_d:
/// the inversion of the Lorentzian response x = ω_m²A/√((ω_m²−ω_d²)²+γ²ω_d²).
pub fn drive_force_amplitude(target_displacement: f64, omega_d: f64, p: &DerivedParams) -> f64 {
    let w2 = p.omega_m * p.omega_m;
    let det = (w2 - omega_d * omega_d).powi(2) + (p.gamma_m * omega_d).powi(2);
    target_displacement * det.sqrt() / w2
}

/// Right-hand side of the linear equations of motion. With N = 0 the atom
/// coordinates are held identically zero and the membrane reduces to a damped
/// oscillator.
pub fn linear_rhs(state: &FullState, p: &DerivedParams) -> FullDerivative {
    let k_at = p.omega_at * p.omega_at; // lattice spring constant per unit mass
    if p.n_atoms <= 0.0 {
        return FullDerivative {
            x_at: 0.0,
            p_at: 0.0,
            x_m: state.p_m / p.membrane_mass,
            p_m: -p.gamma_m * state.p_m - p.membrane_mass * p.omega_m * p.omega_m * state.x_m,
        };
    }
    let nm = p.n_atoms * p.atom_mass;
    FullDerivative {
        x_at: state.p_at / nm,
        p_at: -p.gamma_at * state.p_at - nm * k_at * state.x_at + nm * k_at * state.x_m,
        x_m: state.p_m / p.membrane_mass,
        p_m: -p.gamma_m * state.p_m - p.membrane_mass * p.omega_m * p.omega_m * state.x_m
            + p.rt * nm * k_at * state.x_at,
    }
}

/// The microscopic force bookkeeping behind the coupled model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticForces {
    /// Lattice force on the ensemble center of mass, N·mω_at²·x_m (N)
    pub f_com: f64,
    /// Per-atom restoring dipole force, −mω_at²·x_at (N)
    pub f_d: f64,
    /// Power modulation of the beam travelling toward the membrane (W)
    pub delta_p: f64,
    /// Radiation-pressure backaction force modulation (N)
    pub delta_f_rad: f64,
    /// Photon redistribution rate (1/s)
    pub n_dot: f64,
}

/// Evaluate the force chain F_com, F_d, ΔP = ħω·ṅ = −(c/2)NF_d and
/// ΔF_rad = (2/c)𝔯𝔱·ΔP at a state.
pub fn diagnostics(
    state: &FullState,
    p: &DerivedParams,
    lattice: &LatticeConfig,
    constants: &PhysicalConstants,
) -> DiagnosticForces {
    let k_at = p.atom_mass * p.omega_at * p.omega_at;
    let f_com = p.n_atoms * k_at * state.x_m;
    let f_d = -k_at * state.x_at;
    let delta_p = -(constants.c / 2.0) * p.n_atoms * f_d;
    let omega_laser = lattice.laser_freq(constants);
    DiagnosticForces {
        f_com,
        f_d,
        delta_p,
        delta_f_rad: (2.0 / constants.c) * p.rt * delta_p,
        n_dot: delta_p / (constants.hbar * omega_laser),
    }
}

/// Integrated trajectory on a uniform output grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<FullState>,
    pub stats: StepStats,
    /// Requested local tolerance; `stats.max_local_error(tol)` never exceeds it.
    pub tol: f64,
}

impl Trajectory {
    pub fn max_local_error(&self) -> f64 {
        self.stats.max_local_error(self.tol)
    }
}

/// Closed-form solution of the driven, damped membrane oscillator; valid
/// whenever the backaction path is absent (𝔯𝔱 = 0).
struct MembraneClosedForm {
    mass: f64,
    gamma: f64,
    omega_d: f64,
    phase: f64,
    // particular-solution coefficients for A_f ω² sin(ω_d t + φ) forcing
    cs: f64,
    cc: f64,
    // homogeneous coefficients against e^{-γt/2}(cos ω̃t, sin ω̃t)
    hc: f64,
    hs: f64,
    omega_damped: f64,
}

impl MembraneClosedForm {
    fn new(x0: f64, p0: f64, p: &DerivedParams, drive: &DriveSpec) -> Self {
        let (omega, gamma, mass) = (p.omega_m, p.gamma_m, p.membrane_mass);
        let w2 = omega * omega;
        let (amp, omega_d, phase) = match drive.kind {
            DriveKind::None => (0.0, omega, 0.0),
            DriveKind::ResonantSine => (drive.amplitude, drive.frequency, drive.phase),
        };
        let denom = (w2 - omega_d * omega_d).powi(2) + (gamma * omega_d).powi(2);
        let (cs, cc) = if amp > 0.0 && denom > 0.0 {
            (
                amp * w2 * (w2 - omega_d * omega_d) / denom,
                -amp * w2 * gamma * omega_d / denom,
            )
        } else {
            (0.0, 0.0)
        };
        let omega_damped = (w2 - gamma * gamma / 4.0).sqrt();
        let xp0 = cs * phase.sin() + cc * phase.cos();
        let vp0 = omega_d * (cs * phase.cos() - cc * phase.sin());
        let hc = x0 - xp0;
        let hs = (p0 / mass - vp0 + (gamma / 2.0) * hc) / omega_damped;
        MembraneClosedForm {
            mass,
            gamma,
            omega_d,
            phase,
            cs,
            cc,
            hc,
            hs,
            omega_damped,
        }
    }

    fn position(&self, t: f64) -> f64 {
        let ph = self.omega_d * t + self.phase;
        let particular = self.cs * ph.sin() + self.cc * ph.cos();
        let e = (-self.gamma * t / 2.0).exp();
        let wt = self.omega_damped * t;
        particular + e * (self.hc * wt.cos() + self.hs * wt.sin())
    }

    fn momentum(&self, t: f64) -> f64 {
        let ph = self.omega_d * t + self.phase;
        let vp = self.omega_d * (self.cs * ph.cos() - self.cc * ph.sin());
        let e = (-self.gamma * t / 2.0).exp();
        let wt = self.omega_damped * t;
        let osc = self.hc * wt.cos() + self.hs * wt.sin();
        let dosc = self.omega_damped * (-self.hc * wt.sin() + self.hs * wt.cos());
        self.mass * (vp + e * (dosc - self.gamma / 2.0 * osc))
    }
}

/// Integrate the linear model with optional membrane drive.
///
/// Adaptive embedded Runge-Kutta 5(4); output on the uniform grid
/// t0 + i·output_dt. With 𝔯𝔱 = 0 the membrane is autonomous and linear, so
/// its trajectory is evaluated in closed form and only the atom block is
/// integrated numerically; this makes the membrane output exactly
/// independent of the atom initial conditions.
pub fn integrate(
    state0: &FullState,
    p: &DerivedParams,
    drive: &DriveSpec,
    duration: f64,
    output_dt: f64,
    tol: f64,
) -> Result<Trajectory> {
    if !(duration > 0.0) || !(output_dt > 0.0) {
        return Err(Error::Config("duration and output_dt must be positive".into()));
    }
    if !(1e-14..=1e-3).contains(&tol) {
        return Err(Error::Config("tolerance must lie in [1e-14, 1e-3]".into()));
    }
    if !state0.is_finite() {
        return Err(Error::NonFinite {
            context: "initial state",
        });
    }
    drive.validate()?;
    p.validate()?;

    let x_scale = state0
        .x_at
        .abs()
        .max(state0.x_m.abs())
        .max(drive.amplitude)
        .max(1e-15);
    let m_mem = p.membrane_mass;
    let drive_force = {
        let d = *drive;
        let scale = m_mem * p.omega_m * p.omega_m;
        move |t: f64| match d.kind {
            DriveKind::None => 0.0,
            DriveKind::ResonantSine => scale * d.amplitude * (d.frequency * t + d.phase).sin(),
        }
    };

    if p.rt == 0.0 && p.n_atoms > 0.0 {
        // membrane in closed form, atoms integrated against it
        let mem = MembraneClosedForm::new(state0.x_m, state0.p_m, p, drive);
        let nm = p.n_atoms * p.atom_mass;
        let k_at = p.omega_at * p.omega_at;
        let gamma_at = p.gamma_at;
        let rhs = |t: f64, y: &[f64; 2], dy: &mut [f64; 2]| {
            let x_m = mem.position(t - state0.t);
            dy[0] = y[1] / nm;
            dy[1] = -gamma_at * y[1] - nm * k_at * y[0] + nm * k_at * x_m;
        };
        let scale = [x_scale, nm * p.omega_at.max(1.0) * x_scale];
        let (samples, stats) = ode::integrate_grid(
            rhs,
            state0.t,
            [state0.x_at, state0.p_at],
            duration,
            output_dt,
            tol,
            &scale,
        )?;
        let samples = samples
            .into_iter()
            .map(|(t, y)| FullState {
                t,
                x_at: y[0],
                p_at: y[1],
                x_m: mem.position(t - state0.t),
                p_m: mem.momentum(t - state0.t),
            })
            .collect();
        return Ok(Trajectory { samples, stats, tol });
    }

    let params = *p;
    let rhs = move |t: f64, y: &[f64; 4], dy: &mut [f64; 4]| {
        let s = FullState {
            t,
            x_at: y[0],
            p_at: y[1],
            x_m: y[2],
            p_m: y[3],
        };
        let d = linear_rhs(&s, &params);
        *dy = [d.x_at, d.p_at, d.x_m, d.p_m + drive_force(t)];
    };
    let nm = (p.n_atoms * p.atom_mass).max(p.atom_mass);
    let scale = [
        x_scale,
        nm * p.omega_at.max(1.0) * x_scale,
        x_scale,
        m_mem * p.omega_m * x_scale,
    ];
    let y0 = [state0.x_at, state0.p_at, state0.x_m, state0.p_m];
    let (samples, stats) =
        ode::integrate_grid(rhs, state0.t, y0, duration, output_dt, tol, &scale)?;
    let samples = samples
        .into_iter()
        .map(|(t, y)| FullState {
            t,
            x_at: y[0],
            p_at: y[1],
            x_m: y[2],
            p_m: y[3],
        })
        .collect();
    Ok(Trajectory { samples, stats, tol })
}

/// Mechanical energy of the atomic center-of-mass oscillator.
pub fn atom_energy(state: &FullState, p: &DerivedParams) -> f64 {
    if p.n_atoms <= 0.0 {
        return 0.0;
    }
    let nm = p.n_atoms * p.atom_mass;
    state.p_at * state.p_at / (2.0 * nm)
        + 0.5 * nm * p.omega_at * p.omega_at * state.x_at * state.x_at
}

/// Mechanical energy of the membrane mode.
pub fn membrane_energy(state: &FullState, p: &DerivedParams) -> f64 {
    state.p_m * state.p_m / (2.0 * p.membrane_mass)
        + 0.5 * p.membrane_mass * p.omega_m * p.omega_m * state.x_m * state.x_m
}

/// Axial acceleration in the sinusoidal lattice well of local depth
/// `local_depth`, displaced to the instantaneous lattice position `x_m`:
/// a = −(V₀ₗ k/m)·sin(2k(z − x_m)). Reduces to the harmonic force for
/// |z − x_m| ≪ 1/k.
pub fn nonlinear_atom_rhs(
    z: f64,
    local_depth: f64,
    wavenumber: f64,
    x_m: f64,
    species: &AtomSpecies,
) -> f64 {
    -(local_depth * wavenumber / species.mass) * (2.0 * wavenumber * (z - x_m)).sin()
}

/// One atom of the heating ensemble: its local well and axial phase-space
/// coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatingSample {
    /// Local modulation depth V₀ₗ (J)
    pub v0_loc: f64,
    /// Local harmonic trap frequency (rad/s)
    pub omega_loc: f64,
    /// Axial position relative to the undisplaced well bottom (m)
    pub z: f64,
    /// Axial velocity (m/s)
    pub v: f64,
}

/// Axial energy relative to the well centered at `x_m`:
/// ½mv² + (V₀ₗ/2)(1 − cos 2k(z − x_m)).
pub fn axial_energy(z: f64, v: f64, v0_loc: f64, wavenumber: f64, x_m: f64, mass: f64) -> f64 {
    0.5 * mass * v * v + 0.5 * v0_loc * (1.0 - (2.0 * wavenumber * (z - x_m)).cos())
}

/// Result of a heating run over a sample ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatingResult {
    /// Axial temperature change of the atoms that stayed bound (K)
    pub delta_t_ax: f64,
    /// One-sigma statistical error of `delta_t_ax` (K)
    pub delta_t_ax_stderr: f64,
    /// Fraction of samples whose axial energy never reached the local depth
    pub survival: f64,
}

/// Integrate each sample's 1D axial motion in its local sinusoidal well while
/// the lattice position follows the prescribed membrane drive. An atom whose
/// axial energy reaches its local depth at any monitoring time is counted as
/// lost; ΔT_ax averages initial and final energies over the surviving atoms.
pub fn simulate_heating(
    samples: &[HeatingSample],
    drive: &DriveSpec,
    duration: f64,
    species: &AtomSpecies,
    wavenumber: f64,
    constants: &PhysicalConstants,
    tol: f64,
) -> Result<HeatingResult> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    if !(duration > 0.0) {
        return Err(Error::Config("heating duration must be positive".into()));
    }
    drive.validate()?;

    let mass = species.mass;
    let k = wavenumber;
    // monitor the binding criterion roughly every couple of trap periods
    let omega_max = samples
        .iter()
        .map(|s| s.omega_loc)
        .fold(0.0f64, f64::max)
        .max(1.0);
    let n_checks = ((duration * omega_max / (2.0 * std::f64::consts::PI)) / 2.0)
        .ceil()
        .clamp(4.0, 20_000.0) as usize;
    let check_dt = duration / n_checks as f64;

    let mut diffs = Vec::with_capacity(samples.len());
    for s in samples {
        let v0_loc = s.v0_loc;
        let e_init = axial_energy(s.z, s.v, v0_loc, k, drive.displacement(0.0), mass);
        let rhs = |t: f64, y: &[f64; 2], dy: &mut [f64; 2]| {
            dy[0] = y[1];
            dy[1] = nonlinear_atom_rhs(y[0], v0_loc, k, drive.displacement(t), species);
        };
        let z_scale = 1.0 / (2.0 * k);
        let scale = [z_scale, s.omega_loc.max(1.0) * z_scale];
        let (grid, _) =
            ode::integrate_grid(rhs, 0.0, [s.z, s.v], duration, check_dt, tol, &scale)?;
        let mut ever_lost = false;
        for &(t, y) in grid.iter().skip(1) {
            let e = axial_energy(y[0], y[1], v0_loc, k, drive.displacement(t), mass);
            if e >= v0_loc {
                ever_lost = true;
                break;
            }
        }
        if !ever_lost {
            let (_, y_end) = *grid.last().unwrap();
            let e_fin = axial_energy(
                y_end[0],
                y_end[1],
                v0_loc,
                k,
                drive.displacement(duration),
                mass,
            );
            diffs.push(e_fin - e_init);
        }
    }

    let n_bound = diffs.len();
    if n_bound == 0 {
        return Err(Error::Config(
            "no heating samples remained bound; cannot define a temperature".into(),
        ));
    }
    let mean = diffs.iter().sum::<f64>() / n_bound as f64;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>()
        / (n_bound.max(2) - 1) as f64;
    Ok(HeatingResult {
        delta_t_ax: mean / constants.k_b,
        delta_t_ax_stderr: (var / n_bound as f64).sqrt() / constants.k_b,
        survival: n_bound as f64 / samples.len() as f64,
    })
}
