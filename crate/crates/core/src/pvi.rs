//! Painleve VI residual checking and movable-pole classification; the n = 1
//! ground truth for the deformation-to-Garnier pipeline.

use crate::contour::{self, OrderEstimate};
use crate::garnier::{GarnierError, ThetaParams};
use crate::lauricella::{self, LauricellaError, LauricellaParams};
use crate::schlesinger::SchlesingerState;
use num_complex::Complex64;
use thiserror::Error;

const C_ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Error)]
pub enum PviError {
    #[error("the parameter dictionary needs n = 1 (got n = {0})")]
    NotN1(usize),
    #[error("t = {t} is too close to the fixed singular point {which} (distance {dist:.3e})")]
    FixedSingularity {
        t: Complex64,
        which: &'static str,
        dist: f64,
    },
    #[error("u = {u} is too close to {which} (distance {dist:.3e}); the equation is singular there")]
    SingularValue {
        u: Complex64,
        which: &'static str,
        dist: f64,
    },
    #[error(transparent)]
    Garnier(#[from] GarnierError),
    #[error(transparent)]
    Lauricella(#[from] LauricellaError),
}

/// Constants of the second-order equation.
#[derive(Clone, Copy, Debug)]
pub struct PviParams {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub gamma: Complex64,
    pub delta: Complex64,
}

/// Dictionary from the n = 1 Garnier parameters:
/// alpha = theta_inf^2/2, beta = -theta_2^2/2, gamma = theta_3^2/2,
/// delta = (1 - theta_1^2)/2.
pub fn params_from_theta(theta: &ThetaParams) -> Result<PviParams, PviError> {
    if theta.n() != 1 {
        return Err(PviError::NotN1(theta.n()));
    }
    let [t1, t2, t3] = [theta.theta[0], theta.theta[1], theta.theta[2]];
    let ti = theta.theta_inf;
    Ok(PviParams {
        alpha: 0.5 * ti * ti,
        beta: -0.5 * t2 * t2,
        gamma: 0.5 * t3 * t3,
        delta: 0.5 * (C_ONE - t1 * t1),
    })
}

const SINGULAR_GUARD: f64 = 1e-8;

/// Residual u'' - RHS of the equation at t, for supplied derivatives.
pub fn pvi_residual(
    t: Complex64,
    u: Complex64,
    du: Complex64,
    ddu: Complex64,
    p: &PviParams,
) -> Result<Complex64, PviError> {
    for (point, name) in [(Complex64::new(0.0, 0.0), "0"), (C_ONE, "1")] {
        let dist = (t - point).norm();
        if dist < SINGULAR_GUARD {
            return Err(PviError::FixedSingularity { t, which: name, dist });
        }
    }
    for (value, name) in [
        (Complex64::new(0.0, 0.0), "0"),
        (C_ONE, "1"),
        (t, "t"),
    ] {
        let dist = (u - value).norm();
        if dist < SINGULAR_GUARD {
            return Err(PviError::SingularValue { u, which: name, dist });
        }
    }
    let half = Complex64::new(0.5, 0.0);
    let rhs = half * (1.0 / u + 1.0 / (u - 1.0) + 1.0 / (u - t)) * du * du
        - (1.0 / t + 1.0 / (t - 1.0) + 1.0 / (u - t)) * du
        + u * (u - 1.0) * (u - t) / (t * t * (t - 1.0) * (t - 1.0))
            * (p.alpha
                + p.beta * t / (u * u)
                + p.gamma * (t - 1.0) / ((u - 1.0) * (u - 1.0))
                + p.delta * t * (t - 1.0) / ((u - t) * (u - t)));
    Ok(ddu - rhs)
}

/// Residual from a plain sampler of u, derivatives by central differences
/// with step 1e-5 * max(1, |t|) in the complex t-plane.
pub fn pvi_residual_sampled<F, E>(
    t: Complex64,
    u_fn: &mut F,
    p: &PviParams,
) -> Result<Complex64, PviError>
where
    F: FnMut(Complex64) -> Result<Complex64, E>,
    E: Into<PviError>,
{
    let h = 1e-5 * t.norm().max(1.0);
    let up = u_fn(t + h).map_err(Into::into)?;
    let um = u_fn(t - h).map_err(Into::into)?;
    let u0 = u_fn(t).map_err(Into::into)?;
    let du = (up - um) / (2.0 * h);
    let ddu = (up - 2.0 * u0 + um) / (h * h);
    pvi_residual(t, u0, du, ddu, p)
}

/// u(t) together with u' and u'' for the n = 1 deformation, computed from
/// the flow derivatives of the coefficients (u = -f_1 / b by the dictionary).
pub fn u_jet_n1(state: &SchlesingerState) -> Result<[Complex64; 3], PviError> {
    if state.n() != 1 {
        return Err(PviError::NotN1(state.n()));
    }
    let (bj, fj) = crate::garnier::coeff_jet2(state, &[C_ONE])?;
    let f1 = fj[0];
    if bj[0].norm() < 1e-12 {
        return Err(PviError::Garnier(GarnierError::BZero {
            b: bj[0].norm(),
            scale: f1[0].norm(),
        }));
    }
    let u = -f1[0] / bj[0];
    let du = (-f1[1] - u * bj[1]) / bj[0];
    let ddu = (-f1[2] - 2.0 * du * bj[1] - u * bj[2]) / bj[0];
    Ok([u, du, ddu])
}

/// u, u', u'' for the kappa = 0 Riccati solution at n = 1:
/// u = t - (t-1) q with q built from a Gauss hypergeometric solution, all
/// derivatives closed through the hypergeometric differential equation.
pub fn riccati_u_jet_n1(
    t: Complex64,
    theta: &ThetaParams,
    tol: f64,
) -> Result<[Complex64; 3], PviError> {
    if theta.n() != 1 {
        return Err(PviError::NotN1(theta.n()));
    }
    let params: LauricellaParams = lauricella::riccati_params(theta)?;
    let (a, b, g) = (params.alpha, params.beta[0], params.gamma);
    let denom = theta.theta_sum() - C_ONE;
    let theta1 = theta.theta[0];

    let s = t / (t - C_ONE);
    let jet = lauricella::fd_value(&params, &[s], tol)?;
    let f = jet.f;
    if f.norm() < 1e-13 {
        return Err(PviError::Lauricella(LauricellaError::PoleAtZeroOfF(f.norm())));
    }
    let f1 = jet.grad[0];
    // second and third derivative from the hypergeometric equation
    // s(1-s) f'' + (g - (a+b+1) s) f' - a b f = 0
    let s1ms = s * (C_ONE - s);
    let f2 = (a * b * f - (g - (a + b + 1.0) * s) * f1) / s1ms;
    // differentiate once more:
    // s(1-s) f''' + (1-2s) f'' + (g - (a+b+1)s) f'' - (a+b+1) f' - a b f' = 0
    let f3 = ((a * b + a + b + 1.0) * f1 - (C_ONE - 2.0 * s + g - (a + b + 1.0) * s) * f2) / s1ms;

    // L(s) = theta_1/(s-1) + f'/f and its two derivatives
    let sm1 = s - C_ONE;
    let l0 = theta1 / sm1 + f1 / f;
    let l1 = -theta1 / (sm1 * sm1) + f2 / f - (f1 / f) * (f1 / f);
    let l2 = 2.0 * theta1 / (sm1 * sm1 * sm1) + f3 / f - 3.0 * f1 * f2 / (f * f)
        + 2.0 * (f1 / f) * (f1 / f) * (f1 / f);

    // q(s) = s(s-1)/denom * L(s)
    let q0 = s * sm1 / denom * l0;
    let q1 = ((2.0 * s - 1.0) * l0 + s * sm1 * l1) / denom;
    let q2 = (2.0 * l0 + 2.0 * (2.0 * s - 1.0) * l1 + s * sm1 * l2) / denom;

    // chain rule through s(t) = t/(t-1)
    let tm1 = t - C_ONE;
    let sp = -C_ONE / (tm1 * tm1);
    let spp = 2.0 / (tm1 * tm1 * tm1);
    let dq_dt = q1 * sp;
    let ddq_dt = q2 * sp * sp + q1 * spp;

    // u = t - (t-1) q
    let u = t - tm1 * q0;
    let du = C_ONE - q0 - tm1 * dq_dt;
    let ddu = -2.0 * dq_dt - tm1 * ddq_dt;
    Ok([u, du, ddu])
}

/// Outcome of classifying one movable pole of u.
#[derive(Clone, Copy, Debug)]
pub struct PoleClass {
    /// Positive pole order (1 for a simple pole).
    pub order: i64,
    pub estimate: OrderEstimate,
    /// Whether the order is consistent with the pole statement:
    /// order 1 when alpha != 0, order <= 2 when alpha = 0.
    pub consistent: bool,
}

/// Classify a movable pole of u from samples of u on a circle around it
/// (counterclockwise order). The argument-principle count of u is -order.
pub fn classify_pole(samples: &[Complex64], p: &PviParams) -> PoleClass {
    let est = contour::winding_from_samples(samples);
    let order = -est.count;
    let alpha_zero = p.alpha.norm() < 1e-12;
    let consistent = if !est.determinate {
        false
    } else if alpha_zero {
        (1..=2).contains(&order)
    } else {
        order == 1
    };
    PoleClass {
        order,
        estimate: est,
        consistent,
    }
}
