//! Adaptive embedded Runge-Kutta integration over complex-valued state.
//!
//! Dormand-Prince 5(4) with error-per-unit-step control: a step of size `h`
//! is accepted when the embedded error estimate is below `tol * h`, so the
//! accumulated error over a path of length `L` stays near `tol * L`.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OdeError {
    #[error("step size underflow at t = {t} (|h| = {h:.3e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("maximum step count {0} exceeded")]
    MaxSteps(usize),
    #[error("state blew up at t = {t} (max |y| = {norm:.3e})")]
    Blowup { t: f64, norm: f64 },
}

/// Options for a single integration run.
#[derive(Clone, Debug)]
pub struct OdeOptions {
    /// Error-per-unit-step tolerance.
    pub tol: f64,
    /// Abort when any state component exceeds this magnitude (disabled if infinite).
    pub blowup_norm: f64,
    pub max_steps: usize,
    pub initial_step: Option<f64>,
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        OdeOptions {
            tol,
            blowup_norm: f64::INFINITY,
            max_steps: 2_000_000,
            initial_step: None,
        }
    }

    pub fn blowup(mut self, norm: f64) -> Self {
        self.blowup_norm = norm;
        self
    }
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
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
// 5th-order weights (row 7 of A) and embedded 4th-order weights.
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

const MIN_SCALE: f64 = 0.2;
const MAX_SCALE: f64 = 5.0;
const SAFETY: f64 = 0.9;

/// Integrate dy/dt = f(t, y) from `t0` to `t1` (t real increasing).
///
/// `observer` is called with `(t, y)` after the initial point and after every
/// accepted step; it may be a no-op.
pub fn integrate<F, O>(
    rhs: &mut F,
    t0: f64,
    t1: f64,
    y0: &[Complex64],
    opts: &OdeOptions,
    observer: &mut O,
) -> Result<Vec<Complex64>, OdeError>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
    O: FnMut(f64, &[Complex64]),
{
    let dim = y0.len();
    let span = t1 - t0;
    if span == 0.0 {
        observer(t0, y0);
        return Ok(y0.to_vec());
    }
    assert!(span > 0.0, "integrate expects t1 > t0");

    let mut y = y0.to_vec();
    let mut t = t0;
    let mut h = opts.initial_step.unwrap_or(span / 100.0).min(span);
    let mut k = vec![vec![Complex64::new(0.0, 0.0); dim]; 7];
    let mut y_stage = vec![Complex64::new(0.0, 0.0); dim];
    let mut steps = 0usize;

    observer(t0, &y);

    while t < t1 {
        if steps >= opts.max_steps {
            return Err(OdeError::MaxSteps(opts.max_steps));
        }
        steps += 1;
        if h < 1e-14 * span.max(1.0) {
            return Err(OdeError::StepUnderflow { t, h });
        }
        if t + h > t1 {
            h = t1 - t;
        }

        rhs(t, &y, &mut k[0]);
        for s in 1..7 {
            for i in 0..dim {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    let a = A[s][j];
                    if a != 0.0 {
                        acc += kj[i] * (a * h);
                    }
                }
                y_stage[i] = acc;
            }
            let (head, tail) = k.split_at_mut(s);
            let _ = head;
            rhs(t + C[s] * h, &y_stage, &mut tail[0]);
        }

        let mut err = 0.0f64;
        let mut y_new_norm = 0.0f64;
        for i in 0..dim {
            let mut hi = Complex64::new(0.0, 0.0);
            let mut lo = Complex64::new(0.0, 0.0);
            for s in 0..7 {
                if B5[s] != 0.0 {
                    hi += k[s][i] * (B5[s] * h);
                }
                if B4[s] != 0.0 {
                    lo += k[s][i] * (B4[s] * h);
                }
            }
            y_stage[i] = y[i] + hi;
            err = err.max((hi - lo).norm());
            y_new_norm = y_new_norm.max(y_stage[i].norm());
        }

        // Error-per-unit-step: accept when err <= tol * h.
        let tol_step = opts.tol * h;
        if err <= tol_step {
            t += h;
            y.copy_from_slice(&y_stage);
            observer(t, &y);
            if y_new_norm > opts.blowup_norm {
                return Err(OdeError::Blowup { t, norm: y_new_norm });
            }
        }

        let scale = if err == 0.0 {
            MAX_SCALE
        } else {
            (SAFETY * (tol_step / err).powf(0.25)).clamp(MIN_SCALE, MAX_SCALE)
        };
        h = (h * scale).min(span);
    }

    Ok(y)
}

/// Convenience wrapper without an observer.
pub fn integrate_to<F>(
    rhs: &mut F,
    t0: f64,
    t1: f64,
    y0: &[Complex64],
    opts: &OdeOptions,
) -> Result<Vec<Complex64>, OdeError>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    integrate(rhs, t0, t1, y0, opts, &mut |_, _| {})
}
