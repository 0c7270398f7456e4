//! Roots of complex polynomials of small degree.
//!
//! Durand-Kerner simultaneous iteration with Newton polish; residuals are
//! checked by the caller against |P(u)|. Degrees here never exceed a handful,
//! so global convergence from the standard staggered start is reliable.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RootError {
    #[error("polynomial has no roots (degree 0)")]
    DegreeZero,
    #[error("leading coefficient is numerically zero (|lead| = {lead:.3e}, scale {scale:.3e})")]
    DegreeCollapse { lead: f64, scale: f64 },
    #[error("root iteration failed to converge after {0} sweeps")]
    NoConvergence(usize),
}

/// Evaluate a polynomial given by coefficients in descending degree order.
pub fn eval_poly(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for c in coeffs {
        acc = acc * z + c;
    }
    acc
}

fn eval_poly_deriv(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let n = coeffs.len() - 1;
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, c) in coeffs[..n].iter().enumerate() {
        let power = (n - k) as f64;
        acc = acc * z + c * power;
    }
    acc
}

/// All roots of the polynomial `coeffs[0] z^d + ... + coeffs[d]`.
///
/// Fails with `DegreeCollapse` when the leading coefficient is below
/// `1e-12` times the coefficient scale rather than silently truncating the
/// degree.
pub fn roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>, RootError> {
    if coeffs.len() <= 1 {
        return Err(RootError::DegreeZero);
    }
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let lead = coeffs[0].norm();
    if lead < 1e-12 * scale || lead == 0.0 {
        return Err(RootError::DegreeCollapse { lead, scale });
    }
    let d = coeffs.len() - 1;
    let monic: Vec<Complex64> = coeffs.iter().map(|c| c / coeffs[0]).collect();

    if d == 1 {
        return Ok(vec![-monic[1]]);
    }

    // Cauchy-style radius bound for the initial ring.
    let radius = 1.0
        + monic[1..]
            .iter()
            .map(|c| c.norm())
            .fold(0.0f64, f64::max);
    let mut z: Vec<Complex64> = (0..d)
        .map(|k| {
            // staggered angles avoid symmetric stalemates
            let phi = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / d as f64 + 0.4;
            Complex64::from_polar(radius.min(2.0).max(0.5), phi)
        })
        .collect();

    let max_sweeps = 200;
    let mut converged = false;
    for _sweep in 0..max_sweeps {
        let mut delta_max = 0.0f64;
        for i in 0..d {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..d {
                if i != j {
                    denom *= z[i] - z[j];
                }
            }
            if denom.norm() == 0.0 {
                // nudge clustered iterates apart
                z[i] += Complex64::new(1e-8, 1e-8);
                continue;
            }
            let step = eval_poly(&monic, z[i]) / denom;
            z[i] -= step;
            delta_max = delta_max.max(step.norm());
        }
        if delta_max < 1e-13 * radius.max(1.0) {
            converged = true;
            break;
        }
    }
    if !converged {
        // Durand-Kerner can stall at limited accuracy for clustered roots;
        // accept and let the Newton polish plus residual checks decide.
    }

    // Newton polish
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let p = eval_poly(&monic, *zi);
            let dp = eval_poly_deriv(&monic, *zi);
            if dp.norm() > 1e-14 {
                let step = p / dp;
                if step.norm() < 0.5 {
                    *zi -= step;
                }
            }
        }
    }
    Ok(z)
}
