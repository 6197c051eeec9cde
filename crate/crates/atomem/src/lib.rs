//! Coupled dynamics of an ultracold atomic ensemble and a vibrating
//! membrane, linked by the optical lattice that traps the atoms.
//!
//! The lattice is formed by retro-reflection of a laser beam from the
//! membrane surface: membrane motion displaces the trap, and the atomic
//! back-action modulates the radiation pressure on the membrane. Near
//! resonance (atomic trap frequency ≈ membrane frequency) the laser-cooled
//! atoms act as a dissipation bath for the membrane.
//!
//! Modules:
//! - [`params`]: laboratory inputs → model coefficients (depth, trap
//!   frequency, coupling constant, calibration interpolation)
//! - [`dynamics`]: full-coordinate equations of motion, adaptive integration,
//!   the nonlinear lattice and the driven-membrane heating model
//! - [`rwa`]: rotating-frame amplitudes, the exact 2×2 propagator and the
//!   adiabatic-elimination decay rate
//! - [`thermal`]: finite-temperature ensemble sampling and the
//!   inhomogeneously broadened damping sum
//! - [`fit`]: exponential-decay and linear least squares
//! - [`harness`]: ringdown / sweep / heating protocols and CSV output
//! - [`config`]: TOML run configuration
//!
//! The `examples/` directory has one runnable program per capability; the
//! `atomem` binary exposes the same protocols as subcommands.

pub mod config;
pub mod constants;
pub mod dynamics;
mod error;
pub mod fit;
pub mod harness;
pub mod ode;
pub mod params;
pub mod rwa;
pub mod thermal;

mod testutil;

pub use error::{Error, Result};
