//! Argument-principle counting of zeros and poles on circles.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ContourError {
    #[error("evaluator failed on the circle: {0}")]
    Evaluation(String),
    #[error("evaluator returned a non-finite or zero value on the circle at angle {0:.3}")]
    BadSample(f64),
}

/// Result of one argument-principle count.
#[derive(Clone, Copy, Debug)]
pub struct OrderEstimate {
    /// Zeros minus poles inside the circle (negative for a net pole).
    pub count: i64,
    /// Distance of the raw contour integral to the nearest integer.
    pub residual: f64,
    /// False when the residual exceeded the acceptance threshold.
    pub determinate: bool,
}

/// Residual above which a count is rejected as indeterminate.
pub const REJECT_RESIDUAL: f64 = 0.1;

/// Default number of quadrature samples on the circle.
pub const DEFAULT_SAMPLES: usize = 256;

/// Count zeros minus poles of `f` inside the circle |z - center| = radius by
/// the argument principle: (1/2 pi i) contour-integral of F'/F.
///
/// F' is formed by central differences along the circle with step
/// `radius * 1e-4`; the integral uses the trapezoid rule on `samples`
/// equispaced points, which is spectrally accurate for analytic integrands.
/// The evaluator must be finite and nonzero on the circle itself.
pub fn pole_order_on_circle<F, E>(
    f: &mut F,
    center: Complex64,
    radius: f64,
    samples: usize,
) -> Result<OrderEstimate, ContourError>
where
    F: FnMut(Complex64) -> Result<Complex64, E>,
    E: std::fmt::Display,
{
    let m = samples.max(16);
    let dphi = 2.0 * std::f64::consts::PI / m as f64;
    let h = 1e-4; // angular step of the derivative stencil (arc = radius * 1e-4)
    let mut integral = Complex64::new(0.0, 0.0);
    let point = |phi: f64| center + Complex64::from_polar(radius, phi);
    let eval = |phi: f64, f: &mut F| -> Result<Complex64, ContourError> {
        let z = point(phi);
        let v = f(z).map_err(|e| ContourError::Evaluation(e.to_string()))?;
        if !v.re.is_finite() || !v.im.is_finite() || v.norm() == 0.0 {
            return Err(ContourError::BadSample(phi));
        }
        Ok(v)
    };
    for k in 0..m {
        let phi = k as f64 * dphi;
        // Derivative along the circle: dF/dz = (dF/dphi) / (dz/dphi).
        let f_minus = eval(phi - h, f)?;
        let f_plus = eval(phi + h, f)?;
        let f_mid = eval(phi, f)?;
        let dz_dphi = Complex64::new(0.0, 1.0) * Complex64::from_polar(radius, phi);
        let df_dphi = (f_plus - f_minus) / (2.0 * h);
        let fprime = df_dphi / dz_dphi;
        integral += fprime / f_mid * dz_dphi * dphi;
    }
    integral /= Complex64::new(0.0, 2.0 * std::f64::consts::PI);
    let count = integral.re.round();
    let residual = (integral - count).norm();
    Ok(OrderEstimate {
        count: count as i64,
        residual,
        determinate: residual <= REJECT_RESIDUAL,
    })
}

/// Argument-principle count from precomputed samples on a circle, by
/// unwrapping the phase of consecutive values. `values` must be ordered
/// counterclockwise; the count is reliable when consecutive phase jumps stay
/// below pi/2, and larger jumps poison the residual.
pub fn winding_from_samples(values: &[Complex64]) -> OrderEstimate {
    let m = values.len();
    let mut total = 0.0f64;
    let mut max_jump = 0.0f64;
    for k in 0..m {
        let a = values[k];
        let b = values[(k + 1) % m];
        let jump = (b / a).arg();
        max_jump = max_jump.max(jump.abs());
        total += jump;
    }
    let winding = total / (2.0 * std::f64::consts::PI);
    let count = winding.round();
    let residual = (winding - count)
        .abs()
        .max(if max_jump > 1.5 { 1.0 } else { 0.0 });
    OrderEstimate {
        count: count as i64,
        residual,
        determinate: residual <= REJECT_RESIDUAL,
    }
}
