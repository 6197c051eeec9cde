//! Adaptive Dormand-Prince 5(4) integrator with embedded error control.
//!
//! The solution is advanced with the 5th-order result; the embedded 4th-order
//! result provides the local error estimate. Output samples are produced on a
//! uniform grid by clamping steps to the grid points, so sampled states are
//! integrator states rather than interpolants.

use crate::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

// 5th-order weights are the last A row (FSAL: stage 7 evaluates at the
// 5th-order solution). 4th-order weights below.
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Counters and the largest normalized local error among accepted steps
/// (1.0 corresponds to exactly the requested tolerance).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepStats {
    pub accepted: u64,
    pub rejected: u64,
    pub max_error_ratio: f64,
}

impl StepStats {
    /// Largest estimated local error among accepted steps, in the same
    /// normalized units as `tol`.
    pub fn max_local_error(&self, tol: f64) -> f64 {
        self.max_error_ratio * tol
    }
}

struct Stepper<'a, const D: usize, F> {
    rhs: F,
    tol: f64,
    scale: &'a [f64; D],
    k: [[f64; D]; 7],
    stats: StepStats,
}

impl<'a, const D: usize, F: FnMut(f64, &[f64; D], &mut [f64; D])> Stepper<'a, D, F> {
    fn new(mut rhs: F, t0: f64, y0: &[f64; D], tol: f64, scale: &'a [f64; D]) -> Self {
        let mut k = [[0.0; D]; 7];
        rhs(t0, y0, &mut k[0]);
        Stepper {
            rhs,
            tol,
            scale,
            k,
            stats: StepStats::default(),
        }
    }

    /// One embedded trial step of size `h` from (t, y). Fills k[1..7],
    /// returns the 5th-order state and the normalized error estimate.
    fn trial(&mut self, t: f64, y: &[f64; D], h: f64) -> ([f64; D], f64) {
        for stage in 1..7 {
            let mut ys = *y;
            for j in 0..stage {
                let a = A[stage - 1][j];
                if a != 0.0 {
                    for i in 0..D {
                        ys[i] += h * a * self.k[j][i];
                    }
                }
            }
            let (done, rest) = self.k.split_at_mut(stage);
            let _ = done;
            (self.rhs)(t + C[stage] * h, &ys, &mut rest[0]);
        }
        // stage 7 input is exactly the 5th-order solution
        let mut y5 = *y;
        for j in 0..6 {
            let a = A[5][j];
            if a != 0.0 {
                for i in 0..D {
                    y5[i] += h * a * self.k[j][i];
                }
            }
        }
        let mut err = 0.0f64;
        for i in 0..D {
            let mut e = 0.0;
            for j in 0..7 {
                e += (B5[j] - B4[j]) * self.k[j][i];
            }
            e *= h;
            let sc = self.tol * (self.scale[i] + y5[i].abs().max(y[i].abs()));
            let r = e / sc;
            err += r * r;
        }
        (y5, (err / D as f64).sqrt())
    }

    fn commit(&mut self, y5: [f64; D], err: f64) -> [f64; D] {
        self.stats.accepted += 1;
        self.stats.max_error_ratio = self.stats.max_error_ratio.max(err);
        self.k[0] = self.k[6]; // FSAL
        y5
    }
}

fn initial_step<const D: usize>(
    f0: &[f64; D],
    y0: &[f64; D],
    scale: &[f64; D],
    duration: f64,
) -> f64 {
    let mut d0 = 0.0f64;
    let mut d1 = 0.0f64;
    for i in 0..D {
        let sc = scale[i] + y0[i].abs();
        d0 += (y0[i] / sc).powi(2);
        d1 += (f0[i] / sc).powi(2);
    }
    let (d0, d1) = (d0.sqrt(), d1.sqrt());
    if d1 > 1e-300 {
        (0.01 * d0.max(1.0) / d1).min(duration / 10.0)
    } else {
        duration / 100.0
    }
}

/// Integrate `rhs` from `t0` over `duration`, sampling on the uniform grid
/// t0 + i·output_dt for i = 0..=round(duration/output_dt). Steps are clamped
/// so each grid point is hit exactly. Returns the samples (including the
/// initial state) and step statistics.
pub fn integrate_grid<const D: usize>(
    rhs: impl FnMut(f64, &[f64; D], &mut [f64; D]),
    t0: f64,
    y0: [f64; D],
    duration: f64,
    output_dt: f64,
    tol: f64,
    scale: &[f64; D],
) -> Result<(Vec<(f64, [f64; D])>, StepStats)> {
    let n_out = (duration / output_dt).round().max(1.0) as usize;
    let mut stepper = Stepper::new(rhs, t0, &y0, tol, scale);
    let mut samples = Vec::with_capacity(n_out + 1);
    samples.push((t0, y0));

    let mut t = t0;
    let mut y = y0;
    let mut h = initial_step(&stepper.k[0], &y0, scale, duration);
    let h_floor = duration * 1e-15;

    for i in 1..=n_out {
        let t_target = t0 + i as f64 * output_dt;
        while t < t_target {
            let clamped = h >= t_target - t;
            let h_step = if clamped { t_target - t } else { h };
            if h_step < h_floor && !clamped {
                return Err(Error::StepSizeUnderflow { t });
            }
            let (y5, err) = stepper.trial(t, &y, h_step);
            if y5.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    context: "integrator state",
                });
            }
            if err <= 1.0 {
                y = stepper.commit(y5, err);
                t += h_step;
                let grow = (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
                let h_next = h_step * grow;
                // a clamped (shortened) step must not shrink the working h
                h = if clamped { h.max(h_next) } else { h_next };
            } else {
                stepper.stats.rejected += 1;
                h = h_step * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                if h < h_floor {
                    return Err(Error::StepSizeUnderflow { t });
                }
            }
        }
        samples.push((t, y));
    }
    Ok((samples, stepper.stats))
}

/// Fixed-step integration (no error control); used for measuring the
/// integrator's convergence order. Returns the final state.
pub fn integrate_fixed<const D: usize>(
    rhs: impl FnMut(f64, &[f64; D], &mut [f64; D]),
    t0: f64,
    y0: [f64; D],
    h: f64,
    n_steps: usize,
    scale: &[f64; D],
) -> Result<[f64; D]> {
    let mut stepper = Stepper::new(rhs, t0, &y0, 1.0, scale);
    let mut t = t0;
    let mut y = y0;
    for _ in 0..n_steps {
        let (y5, err) = stepper.trial(t, &y, h);
        if y5.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "integrator state",
            });
        }
        y = stepper.commit(y5, err);
        t += h;
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::assert_rel;

    // y'' = -w^2 y as a 2d system; exact solution known
    fn ho_rhs(w: f64) -> impl FnMut(f64, &[f64; 2], &mut [f64; 2]) {
        move |_t, y, dy| {
            dy[0] = y[1];
            dy[1] = -w * w * y[0];
        }
    }

    #[test]
    fn harmonic_oscillator_accuracy() {
        let w = 3.0;
        let period = 2.0 * std::f64::consts::PI / w;
        let (samples, stats) = integrate_grid(
            ho_rhs(w),
            0.0,
            [1.0, 0.0],
            10.0 * period,
            period / 4.0,
            1e-10,
            &[1.0, w],
        )
        .unwrap();
        let (tf, yf) = *samples.last().unwrap();
        assert_rel(tf, 10.0 * period, 1e-12);
        assert!((yf[0] - 1.0).abs() < 1e-8, "x(end) = {}", yf[0]);
        assert!(yf[1].abs() < 1e-8 * w);
        assert!(stats.max_error_ratio <= 1.0);
        assert!(stats.accepted > 0);
    }

    #[test]
    fn damped_oscillator_matches_analytic() {
        // x'' + g x' + w^2 x = 0, underdamped
        let (w, gam) = (5.0, 0.3);
        let rhs = move |_t: f64, y: &[f64; 2], dy: &mut [f64; 2]| {
            dy[0] = y[1];
            dy[1] = -gam * y[1] - w * w * y[0];
        };
        let t_end = 4.0;
        let (samples, _) =
            integrate_grid(rhs, 0.0, [1.0, 0.0], t_end, t_end / 8.0, 1e-11, &[1.0, w]).unwrap();
        let wd = (w * w - gam * gam / 4.0).sqrt();
        for &(t, y) in &samples {
            let x = (-gam * t / 2.0).exp() * ((wd * t).cos() + gam / (2.0 * wd) * (wd * t).sin());
            assert!((y[0] - x).abs() < 1e-8, "t={t}: {} vs {}", y[0], x);
        }
    }

    #[test]
    fn fixed_step_order_is_five() {
        let w: f64 = 2.0;
        let t_end = 2.0;
        let exact = (w * t_end).cos();
        let mut errs = Vec::new();
        for n in [200usize, 400, 800] {
            let y = integrate_fixed(ho_rhs(w), 0.0, [1.0, 0.0], t_end / n as f64, n, &[1.0, w])
                .unwrap();
            errs.push((y[0] - exact).abs());
        }
        let p1 = (errs[0] / errs[1]).log2();
        let p2 = (errs[1] / errs[2]).log2();
        assert!((p1 - 5.0).abs() < 0.5, "order {p1}");
        assert!((p2 - 5.0).abs() < 0.5, "order {p2}");
    }

    #[test]
    fn step_underflow_detected() {
        // non-integrable singularity approaching t = 0.5
        let rhs = |t: f64, _y: &[f64; 1], dy: &mut [f64; 1]| {
            dy[0] = 1.0 / (0.5 - t);
        };
        let res = integrate_grid(rhs, 0.0, [0.0], 1.0, 0.5, 1e-10, &[1.0]);
        assert!(matches!(
            res,
            Err(Error::StepSizeUnderflow { .. }) | Err(Error::NonFinite { .. })
        ));
    }
}
