//! Rotating-frame amplitude dynamics.
//!
//! In a frame rotating at the membrane frequency the coupled system reduces
//! to two complex amplitudes (a, b) obeying a linear 2x2 system,
//!
//!   da/dt = -i δ a - (γ_at/2) a + i g b
//!   db/dt = -(γ_m/2) b + i 𝔯𝔱 g a
//!
//! The closed-form eigen-decomposition of the generator provides an exact
//! propagator, which serves as the oracle for both the full-coordinate
//! integration and the adiabatic-elimination decay rate.

use num_complex::Complex64;

use crate::dynamics::FullState;
use crate::params::DerivedParams;
use crate::{ode, Error, Result};

/// Dimensionless complex amplitudes at time `t` (rotating frame).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RwaState {
    pub t: f64,
    /// Atomic center-of-mass amplitude
    pub a: Complex64,
    /// Membrane amplitude
    pub b: Complex64,
}

/// Closed-form eigen-decomposition of the rotating-frame generator.
#[derive(Debug, Clone, Copy)]
pub struct EigenSolution {
    /// Eigenvalue with the larger |Re| (fast mode)
    pub lambda_fast: Complex64,
    /// Eigenvalue with the smaller |Re| (slow mode)
    pub lambda_slow: Complex64,
    /// Eigenvector columns [v_fast, v_slow]
    pub vectors: [[Complex64; 2]; 2],
    /// Inverse of the eigenvector matrix
    pub inverse: [[Complex64; 2]; 2],
    /// True when the generator is (numerically) defective and the
    /// Jordan-form propagator must be used
    pub degenerate: bool,
    generator: [[Complex64; 2]; 2],
}

fn generator(p: &DerivedParams) -> [[Complex64; 2]; 2] {
    let i = Complex64::i();
    [
        [
            -i * p.delta - Complex64::from(p.gamma_at / 2.0),
            i * p.g,
        ],
        [i * p.rt * p.g, Complex64::from(-p.gamma_m / 2.0)],
    ]
}

/// Membrane amplitude from phase-space coordinates; well defined for any
/// atom number.
pub fn membrane_amplitude(x_m: f64, p_m: f64, t: f64, p: &DerivedParams, hbar: f64) -> Complex64 {
    let rot = Complex64::from_polar(1.0, p.omega_m * t);
    let norm = (p.membrane_mass * p.omega_m / (2.0 * hbar)).sqrt();
    rot * norm * Complex64::new(x_m, p_m / (p.membrane_mass * p.omega_m))
}

/// Convert full phase-space coordinates to rotating-frame amplitudes.
/// Requires N > 0 and ω_at > 0 for the atomic amplitude to exist.
pub fn to_amplitudes(state: &FullState, p: &DerivedParams, hbar: f64) -> Result<RwaState> {
    if p.n_atoms <= 0.0 || p.omega_at <= 0.0 {
        return Err(Error::ZeroAtomNumber);
    }
    let nm = p.n_atoms * p.atom_mass;
    let rot = Complex64::from_polar(1.0, p.omega_m * state.t);
    let a = rot
        * (nm * p.omega_at / (2.0 * hbar)).sqrt()
        * Complex64::new(state.x_at, state.p_at / (nm * p.omega_at));
    Ok(RwaState {
        t: state.t,
        a,
        b: membrane_amplitude(state.x_m, state.p_m, state.t, p, hbar),
    })
}

/// Inverse of [`to_amplitudes`].
pub fn from_amplitudes(rwa: &RwaState, p: &DerivedParams, hbar: f64) -> Result<FullState> {
    if p.n_atoms <= 0.0 || p.omega_at <= 0.0 {
        return Err(Error::ZeroAtomNumber);
    }
    let nm = p.n_atoms * p.atom_mass;
    let derot = Complex64::from_polar(1.0, -p.omega_m * rwa.t);
    let a = derot * rwa.a;
    let b = derot * rwa.b;
    let xa_scale = (2.0 * hbar / (nm * p.omega_at)).sqrt();
    let xm_scale = (2.0 * hbar / (p.membrane_mass * p.omega_m)).sqrt();
    Ok(FullState {
        t: rwa.t,
        x_at: xa_scale * a.re,
        p_at: xa_scale * nm * p.omega_at * a.im,
        x_m: xm_scale * b.re,
        p_m: xm_scale * p.membrane_mass * p.omega_m * b.im,
    })
}

/// Time derivative of the rotating-frame amplitudes.
pub fn rwa_rhs(state: &RwaState, p: &DerivedParams) -> (Complex64, Complex64) {
    let m = generator(p);
    (
        m[0][0] * state.a + m[0][1] * state.b,
        m[1][0] * state.a + m[1][1] * state.b,
    )
}

impl EigenSolution {
    /// Apply the exact propagator over `dt`.
    pub fn propagate(&self, a: Complex64, b: Complex64, dt: f64) -> (Complex64, Complex64) {
        if self.degenerate {
            // e^{At} = e^{λt} (I + t (A - λ I)) for a defective 2x2 generator
            let lam = self.lambda_fast;
            let e = (lam * dt).exp();
            let m = self.generator;
            let n00 = m[0][0] - lam;
            let n11 = m[1][1] - lam;
            let na = e * (a + dt * (n00 * a + m[0][1] * b));
            let nb = e * (b + dt * (m[1][0] * a + n11 * b));
            return (na, nb);
        }
        // coefficients in the eigenbasis
        let c_fast = self.inverse[0][0] * a + self.inverse[0][1] * b;
        let c_slow = self.inverse[1][0] * a + self.inverse[1][1] * b;
        let e_fast = (self.lambda_fast * dt).exp() * c_fast;
        let e_slow = (self.lambda_slow * dt).exp() * c_slow;
        (
            self.vectors[0][0] * e_fast + self.vectors[1][0] * e_slow,
            self.vectors[0][1] * e_fast + self.vectors[1][1] * e_slow,
        )
    }

    /// Reconstruct the generator from the decomposition (for verification).
    pub fn reconstruct(&self) -> [[Complex64; 2]; 2] {
        if self.degenerate {
            return self.generator;
        }
        let v = &self.vectors;
        let vi = &self.inverse;
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                out[r][c] = v[0][r] * self.lambda_fast * vi[0][c] + v[1][r] * self.lambda_slow * vi[1][c];
            }
        }
        out
    }

    pub fn generator(&self) -> [[Complex64; 2]; 2] {
        self.generator
    }
}

/// Closed-form eigenvalues and eigenvectors of the rotating-frame generator.
///
/// The root of smaller magnitude is refined through the product of roots to
/// avoid cancellation (the slow rate can be 10⁶× smaller than the fast one).
/// Near-degenerate generators (|discriminant| < 1e-12·‖A‖²) switch to the
/// Jordan-form propagator.
pub fn eigen_solution(p: &DerivedParams) -> EigenSolution {
    let m = generator(p);
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = tr * tr - 4.0 * det;
    let norm2: f64 = m.iter().flatten().map(|z| z.norm_sqr()).sum();

    if disc.norm() < 1e-12 * norm2 || norm2 == 0.0 {
        let lam = tr / 2.0;
        return EigenSolution {
            lambda_fast: lam,
            lambda_slow: lam,
            vectors: [[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
                      [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]],
            inverse: [[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
                      [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]],
            degenerate: true,
            generator: m,
        };
    }

    let sq = disc.sqrt();
    let mut r1 = (tr + sq) / 2.0;
    let mut r2 = (tr - sq) / 2.0;
    // refine the smaller root via Vieta (r1 r2 = det)
    if r1.norm() >= r2.norm() {
        if r1.norm() > 0.0 {
            r2 = det / r1;
        }
    } else if r2.norm() > 0.0 {
        r1 = det / r2;
    }

    // slow mode: smaller |Re|, ties broken by smaller |Im|
    let slow_first = {
        let (re1, re2) = (r1.re.abs(), r2.re.abs());
        re1 < re2 || (re1 == re2 && r1.im.abs() <= r2.im.abs())
    };
    let (lambda_slow, lambda_fast) = if slow_first { (r1, r2) } else { (r2, r1) };

    let vec_for = |lam: Complex64| -> [Complex64; 2] {
        let cand1 = [m[0][1], lam - m[0][0]];
        let cand2 = [lam - m[1][1], m[1][0]];
        let n1 = cand1[0].norm() + cand1[1].norm();
        let n2 = cand2[0].norm() + cand2[1].norm();
        let v = if n1 >= n2 { cand1 } else { cand2 };
        let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        if n > 0.0 {
            [v[0] / n, v[1] / n]
        } else {
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]
        }
    };
    let mut v_fast = vec_for(lambda_fast);
    let mut v_slow = vec_for(lambda_slow);
    // decoupled generator: eigenvectors are the coordinate axes
    if m[0][1].norm() == 0.0 && m[1][0].norm() == 0.0 {
        let (e1, e2) = (
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        );
        if (lambda_fast - m[0][0]).norm() <= (lambda_fast - m[1][1]).norm() {
            v_fast = e1;
            v_slow = e2;
        } else {
            v_fast = e2;
            v_slow = e1;
        }
    }

    let det_v = v_fast[0] * v_slow[1] - v_slow[0] * v_fast[1];
    if det_v.norm() < 1e-12 {
        let lam = tr / 2.0;
        return EigenSolution {
            lambda_fast: lam,
            lambda_slow: lam,
            vectors: [[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
                      [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]],
            inverse: [[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
                      [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]],
            degenerate: true,
            generator: m,
        };
    }
    let inverse = [
        [v_slow[1] / det_v, -v_slow[0] / det_v],
        [-v_fast[1] / det_v, v_fast[0] / det_v],
    ];

    EigenSolution {
        lambda_fast,
        lambda_slow,
        vectors: [v_fast, v_slow],
        inverse,
        degenerate: false,
        generator: m,
    }
}

/// Membrane decay rate from adiabatic elimination of the atomic amplitude,
///
///   Γ = γ_m + γ_at g² 𝔯𝔱 / (δ² + (γ_at/2)²)
pub fn adiabatic_gamma(p: &DerivedParams) -> Result<f64> {
    if p.gamma_at <= 0.0 {
        return Err(Error::ZeroAtomDamping);
    }
    Ok(p.gamma_m + p.gamma_at * p.g * p.g * p.rt / (p.delta * p.delta + (p.gamma_at / 2.0).powi(2)))
}

/// Apply the exact eigen-propagator over `duration`.
pub fn propagate(rwa0: &RwaState, p: &DerivedParams, duration: f64) -> RwaState {
    let eig = eigen_solution(p);
    let (a, b) = eig.propagate(rwa0.a, rwa0.b, duration);
    RwaState {
        t: rwa0.t + duration,
        a,
        b,
    }
}

/// Numerical integration of the rotating-frame equations (independent check
/// of the eigen-propagator). Returns samples on the uniform output grid.
pub fn integrate_numeric(
    rwa0: &RwaState,
    p: &DerivedParams,
    duration: f64,
    output_dt: f64,
    tol: f64,
) -> Result<Vec<RwaState>> {
    let m = generator(p);
    let rhs = move |_t: f64, y: &[f64; 4], dy: &mut [f64; 4]| {
        let a = Complex64::new(y[0], y[1]);
        let b = Complex64::new(y[2], y[3]);
        let da = m[0][0] * a + m[0][1] * b;
        let db = m[1][0] * a + m[1][1] * b;
        *dy = [da.re, da.im, db.re, db.im];
    };
    let amp = (rwa0.a.norm() + rwa0.b.norm()).max(1e-30);
    let scale = [amp; 4];
    let y0 = [rwa0.a.re, rwa0.a.im, rwa0.b.re, rwa0.b.im];
    let (samples, _) = ode::integrate_grid(rhs, rwa0.t, y0, duration, output_dt, tol, &scale)?;
    Ok(samples
        .into_iter()
        .map(|(t, y)| RwaState {
            t,
            a: Complex64::new(y[0], y[1]),
            b: Complex64::new(y[2], y[3]),
        })
        .collect())
}
