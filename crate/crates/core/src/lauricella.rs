//! The Lauricella hypergeometric function F_D of n variables, its defining
//! linear PDE system, and the Riccati-type Garnier solutions built from it.
//!
//! Two evaluation routes are kept: the multivariate power series inside the
//! polydisk, and the Euler-type integral on the cut plane. Partial
//! derivatives come from the parameter-shifted series/integrals, and every
//! evaluation can be certified a posteriori through the PDE residual.

use crate::contour::{self, ContourError, OrderEstimate};
use crate::garnier::{self, GarnierError, ThetaParams};
use crate::quad::{self, QuadError};
use crate::special;
use num_complex::Complex64;
use thiserror::Error;

const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
const C_ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Error)]
pub enum LauricellaError {
    #[error("gamma parameter {0} is a non-positive integer; the series is undefined")]
    BadGamma(Complex64),
    #[error("dimension mismatch: {0} variables for {1} beta parameters")]
    Dimension(usize, usize),
    #[error("series did not converge within {0} layers (max |x| = {1:.3})")]
    SeriesDiverged(usize, f64),
    #[error("point outside the series polydisk (max |x| = {0:.3}) and the integral constraints fail: {1}")]
    OutsideDomain(f64, String),
    #[error("evaluation point x_{0} = {1} lies on the integral cut [1, inf)")]
    OnCut(usize, Complex64),
    #[error("kappa = {0} is not zero; the Riccati construction needs kappa = 0")]
    KappaNotZero(Complex64),
    #[error("sum of theta parameters equals 1; the Riccati formula degenerates")]
    ThetaSumDegenerate,
    #[error("f vanishes at the evaluation point (|f| = {0:.3e}); this is a movable pole")]
    PoleAtZeroOfF(f64),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Contour(#[from] ContourError),
    #[error(transparent)]
    Garnier(#[from] GarnierError),
}

/// Parameters of E_D(alpha, beta_1..beta_n, gamma).
#[derive(Clone, Debug)]
pub struct LauricellaParams {
    pub alpha: Complex64,
    pub beta: Vec<Complex64>,
    pub gamma: Complex64,
}

impl LauricellaParams {
    pub fn new(
        alpha: Complex64,
        beta: Vec<Complex64>,
        gamma: Complex64,
    ) -> Result<Self, LauricellaError> {
        let nearest = gamma.re.round();
        if nearest <= 0.0 && (gamma.re - nearest).abs() < 1e-9 && gamma.im.abs() < 1e-9 {
            return Err(LauricellaError::BadGamma(gamma));
        }
        Ok(LauricellaParams { alpha, beta, gamma })
    }

    pub fn n(&self) -> usize {
        self.beta.len()
    }

    fn shifted(&self, beta_shifts: &[usize], total: usize) -> LauricellaParams {
        LauricellaParams {
            alpha: self.alpha + total as f64,
            beta: self
                .beta
                .iter()
                .zip(beta_shifts)
                .map(|(b, s)| b + *s as f64)
                .collect(),
            gamma: self.gamma + total as f64,
        }
    }
}

/// Radius of the polydisk on which the series route is used.
pub const SERIES_RADIUS: f64 = 0.7;

const SERIES_MAX_DEGREE: usize = 800;
const SERIES_EPS: f64 = 1e-16;

/// Principal branch of F_D by direct series summation, valid for
/// max |x_i| <= SERIES_RADIUS (enforced by [`fd_value`]; this function
/// accepts anything strictly inside the unit polydisk).
pub fn fd_series(params: &LauricellaParams, x: &[Complex64]) -> Result<Complex64, LauricellaError> {
    let n = params.n();
    if x.len() != n {
        return Err(LauricellaError::Dimension(x.len(), n));
    }
    let max_x = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
    // ratio vectors: R[d] = (alpha)_d / (gamma)_d, P_i[k] = (beta_i)_k / k!
    // and running powers of x; term(m) = R[|m|] prod_i P_i[m_i] x_i^{m_i}.
    let mut sum = C_ZERO;
    let mut layer_max_history = [f64::INFINITY; 3];
    // recursive walk over compositions of each total degree
    let mut ratio_a_g = C_ONE; // (alpha)_d / (gamma)_d
    for d in 0..=SERIES_MAX_DEGREE {
        if d > 0 {
            let dd = (d - 1) as f64;
            ratio_a_g *= (params.alpha + dd) / (params.gamma + dd);
        }
        let mut layer_sum = C_ZERO;
        let mut layer_max = 0.0f64;
        // enumerate m with |m| = d
        fn walk(
            params: &LauricellaParams,
            x: &[Complex64],
            coord: usize,
            remaining: usize,
            partial: Complex64,
            layer_sum: &mut Complex64,
            layer_max: &mut f64,
        ) {
            let n = params.n();
            if coord == n - 1 {
                // last coordinate takes everything that remains
                let mut term = partial;
                let b = params.beta[n - 1];
                for k in 0..remaining {
                    term *= (b + k as f64) / (k as f64 + 1.0) * x[n - 1];
                }
                *layer_sum += term;
                *layer_max = layer_max.max(term.norm());
                return;
            }
            let mut term = partial;
            for m in 0..=remaining {
                if m > 0 {
                    let b = params.beta[coord];
                    term *= (b + (m - 1) as f64) / (m as f64) * x[coord];
                }
                walk(
                    params,
                    x,
                    coord + 1,
                    remaining - m,
                    term,
                    layer_sum,
                    layer_max,
                );
            }
        }
        if n == 0 {
            return Ok(C_ONE);
        }
        walk(params, x, 0, d, ratio_a_g, &mut layer_sum, &mut layer_max);
        sum += layer_sum;
        layer_max_history.rotate_left(1);
        layer_max_history[2] = layer_max;
        let threshold = SERIES_EPS * sum.norm().max(1.0);
        if d > 4 && layer_max_history.iter().all(|&m| m < threshold) {
            return Ok(sum);
        }
    }
    Err(LauricellaError::SeriesDiverged(SERIES_MAX_DEGREE, max_x))
}

fn check_integral_constraints(
    params: &LauricellaParams,
    x: &[Complex64],
) -> Result<(), LauricellaError> {
    let max_x = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if params.alpha.re <= 0.0 {
        return Err(LauricellaError::OutsideDomain(
            max_x,
            format!("Re alpha = {:.3} <= 0", params.alpha.re),
        ));
    }
    if (params.gamma - params.alpha).re <= 0.0 {
        return Err(LauricellaError::OutsideDomain(
            max_x,
            format!("Re (gamma - alpha) = {:.3} <= 0", (params.gamma - params.alpha).re),
        ));
    }
    for (i, xi) in x.iter().enumerate() {
        if xi.im.abs() < 1e-12 && xi.re >= 1.0 {
            return Err(LauricellaError::OnCut(i, *xi));
        }
    }
    Ok(())
}

/// F_D through the Euler-type integral
/// Gamma(gamma)/(Gamma(alpha) Gamma(gamma-alpha)) *
/// int_0^1 t^(alpha-1) (1-t)^(gamma-alpha-1) prod (1 - x_i t)^(-beta_i) dt,
/// valid for Re alpha > 0, Re(gamma - alpha) > 0 and x off the cut [1, inf).
pub fn fd_integral(
    params: &LauricellaParams,
    x: &[Complex64],
    tol: f64,
) -> Result<Complex64, LauricellaError> {
    check_integral_constraints(params, x)?;
    let a = params.alpha;
    let g = params.gamma;
    let mut integrand = |t: f64, omt: f64| -> Complex64 {
        let tt = Complex64::new(t, 0.0);
        let omtt = Complex64::new(omt, 0.0);
        let mut v = tt.powc(a - C_ONE) * omtt.powc(g - a - C_ONE);
        for (xi, bi) in x.iter().zip(&params.beta) {
            v *= (C_ONE - xi * t).powc(-bi);
        }
        v
    };
    let integral = quad::integrate_unit_graded(&mut integrand, a.re, (g - a).re, tol)?;
    let prefactor = special::gamma(g) / (special::gamma(a) * special::gamma(g - a));
    Ok(prefactor * integral)
}

/// Value and gradient of the principal F_D branch (f(0) = 1).
#[derive(Clone, Debug)]
pub struct FdJet1 {
    pub f: Complex64,
    pub grad: Vec<Complex64>,
}

/// Value, gradient and Hessian.
#[derive(Clone, Debug)]
pub struct FdJet2 {
    pub f: Complex64,
    pub grad: Vec<Complex64>,
    pub hess: Vec<Vec<Complex64>>,
}

fn route_value(
    params: &LauricellaParams,
    x: &[Complex64],
    tol: f64,
) -> Result<Complex64, LauricellaError> {
    let max_x = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max_x <= SERIES_RADIUS + 1e-12 {
        fd_series(params, x)
    } else {
        fd_integral(params, x, tol)
    }
}

/// f and its first partials; the partial in x_i is the contiguous function
/// (alpha beta_i / gamma) F_D(alpha+1, beta + e_i, gamma+1).
pub fn fd_value(
    params: &LauricellaParams,
    x: &[Complex64],
    tol: f64,
) -> Result<FdJet1, LauricellaError> {
    let n = params.n();
    if x.len() != n {
        return Err(LauricellaError::Dimension(x.len(), n));
    }
    let f = route_value(params, x, tol)?;
    let mut grad = Vec::with_capacity(n);
    for i in 0..n {
        let mut shifts = vec![0usize; n];
        shifts[i] = 1;
        let shifted = params.shifted(&shifts, 1);
        let factor = params.alpha * params.beta[i] / params.gamma;
        grad.push(factor * route_value(&shifted, x, tol)?);
    }
    Ok(FdJet1 { f, grad })
}

/// f, gradient and Hessian through double parameter shifts.
pub fn fd_value2(
    params: &LauricellaParams,
    x: &[Complex64],
    tol: f64,
) -> Result<FdJet2, LauricellaError> {
    let j1 = fd_value(params, x, tol)?;
    let n = params.n();
    let mut hess = vec![vec![C_ZERO; n]; n];
    for i in 0..n {
        for j in i..n {
            let mut shifts = vec![0usize; n];
            shifts[i] += 1;
            shifts[j] += 1;
            let shifted = params.shifted(&shifts, 2);
            let delta = if i == j { 1.0 } else { 0.0 };
            let factor = params.alpha * (params.alpha + 1.0) * params.beta[i]
                * (params.beta[j] + delta)
                / (params.gamma * (params.gamma + 1.0));
            let v = factor * route_value(&shifted, x, tol)?;
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    Ok(FdJet2 {
        f: j1.f,
        grad: j1.grad,
        hess,
    })
}

/// Hessian by central finite differences of the gradient, step
/// `1e-4 * max(1, |x_i|)` per coordinate; a slower alternative used to
/// cross-check the parameter-shift route.
pub fn fd_hessian_fd(
    params: &LauricellaParams,
    x: &[Complex64],
    tol: f64,
) -> Result<FdJet2, LauricellaError> {
    let j1 = fd_value(params, x, tol)?;
    let n = params.n();
    let mut hess = vec![vec![C_ZERO; n]; n];
    for j in 0..n {
        let h = 1e-4 * x[j].norm().max(1.0);
        let mut xp = x.to_vec();
        xp[j] += h;
        let mut xm = x.to_vec();
        xm[j] -= h;
        let gp = fd_value(params, &xp, tol)?.grad;
        let gm = fd_value(params, &xm, tol)?.grad;
        for i in 0..n {
            let v = (gp[i] - gm[i]) / (2.0 * h);
            hess[i][j] = v;
        }
    }
    // symmetrize
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (hess[i][j] + hess[j][i]);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    Ok(FdJet2 {
        f: j1.f,
        grad: j1.grad,
        hess,
    })
}

/// Max absolute residual of the E_D system at `x` for the supplied jet:
/// the n second-order equations and the n(n-1)/2 mixed equations.
pub fn ed_residual(params: &LauricellaParams, x: &[Complex64], jet: &FdJet2) -> f64 {
    let n = params.n();
    let mut worst = 0.0f64;
    for i in 0..n {
        let xi = x[i];
        let mut r = xi * (C_ONE - xi) * jet.hess[i][i]
            + (params.gamma - (params.alpha + params.beta[i] + 1.0) * xi) * jet.grad[i]
            - params.alpha * params.beta[i] * jet.f;
        for j in 0..n {
            if j == i {
                continue;
            }
            r += (C_ONE - xi) * x[j] * jet.hess[i][j];
            r -= params.beta[i] * x[j] * jet.grad[j];
        }
        worst = worst.max(r.norm());
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let r = (x[i] - x[j]) * jet.hess[i][j] + params.beta[i] * jet.grad[j]
                - params.beta[j] * jet.grad[i];
            worst = worst.max(r.norm());
        }
    }
    worst
}

/// s_i = a_i / (a_i - 1).
pub fn s_from_a(a: &[Complex64]) -> Vec<Complex64> {
    a.iter().map(|ai| ai / (ai - C_ONE)).collect()
}

/// E_D parameters of the linearizing hypergeometric equation for the
/// kappa = 0 solutions: E_D(1 - theta_{n+2}, theta_1..theta_n,
/// theta_1 + ... + theta_{n+1}).
pub fn riccati_params(theta: &ThetaParams) -> Result<LauricellaParams, LauricellaError> {
    let n = theta.n();
    let alpha = C_ONE - theta.theta[n + 1];
    let beta: Vec<Complex64> = theta.theta[..n].to_vec();
    let gamma: Complex64 = theta.theta[..=n].iter().sum();
    LauricellaParams::new(alpha, beta, gamma)
}

const KAPPA_TOL: f64 = 1e-8;

/// The Riccati-type q built from a solution f of the linearizing equation:
/// q_i = s_i (s_i - 1) / (sum theta - 1) * (theta_i / (s_i - 1) + f_{s_i}/f),
/// evaluated at s = s(a). Requires kappa = 0 and sum theta != 1.
pub fn riccati_q<F>(
    a: &[Complex64],
    theta: &ThetaParams,
    f_eval: &mut F,
) -> Result<Vec<Complex64>, LauricellaError>
where
    F: FnMut(&[Complex64]) -> Result<FdJet1, LauricellaError>,
{
    let kappa = theta.kappa();
    let scale = 1.0 + theta.theta_sum().norm_sqr();
    if kappa.norm() > KAPPA_TOL * scale {
        return Err(LauricellaError::KappaNotZero(kappa));
    }
    let denom = theta.theta_sum() - C_ONE;
    if denom.norm() < 1e-10 {
        return Err(LauricellaError::ThetaSumDegenerate);
    }
    let s = s_from_a(a);
    let jet = f_eval(&s)?;
    if jet.f.norm() < 1e-13 * (1.0 + jet.grad.iter().map(|g| g.norm()).fold(0.0, f64::max)) {
        return Err(LauricellaError::PoleAtZeroOfF(jet.f.norm()));
    }
    let mut q = Vec::with_capacity(a.len());
    for (i, si) in s.iter().enumerate() {
        let log_deriv = jet.grad[i] / jet.f;
        let value = si * (si - C_ONE) / denom * (theta.theta[i] / (si - C_ONE) + log_deriv);
        q.push(value);
    }
    Ok(q)
}

/// Principal-branch evaluator for [`riccati_q`] using the derived E_D
/// parameters.
pub fn riccati_q_principal(
    a: &[Complex64],
    theta: &ThetaParams,
    tol: f64,
) -> Result<Vec<Complex64>, LauricellaError> {
    let params = riccati_params(theta)?;
    riccati_q(a, theta, &mut |s: &[Complex64]| fd_value(&params, s, tol))
}

/// Verdict for one zero of f crossed by a slice.
#[derive(Clone, Debug)]
pub struct Prop1Verdict {
    /// Slice parameter of the zero of f(s(a(.))).
    pub location: Complex64,
    /// Argument-principle count of f around the zero (simple means +1).
    pub f_zero_order: i64,
    pub f_zero_simple: bool,
    /// Estimated pole order of each F_i at the zero.
    pub f_i_orders: Vec<OrderEstimate>,
    /// True iff the zero is simple and every determinate F_i order is -1.
    pub pass: bool,
    /// True when any estimate was rejected as indeterminate.
    pub indeterminate: bool,
}

/// Scan a straight slice a(zeta) = start + zeta * dir for zeros of f(s(a)),
/// then estimate the pole order of every F_i (built through the Riccati q
/// and the Vandermonde recovery) around each zero.
pub fn prop1_check(
    start: &[Complex64],
    dir: &[Complex64],
    theta: &ThetaParams,
    scan_radius: f64,
    tol: f64,
) -> Result<Vec<Prop1Verdict>, LauricellaError> {
    let params = riccati_params(theta)?;
    let kappa = theta.kappa();
    if kappa.norm() > KAPPA_TOL * (1.0 + theta.theta_sum().norm_sqr()) {
        return Err(LauricellaError::KappaNotZero(kappa));
    }
    let n = start.len();
    let a_at = |zeta: Complex64| -> Vec<Complex64> {
        start.iter().zip(dir).map(|(a0, d)| a0 + d * zeta).collect()
    };
    // g(zeta) = f(s(a(zeta))) and its slice derivative via the chain rule
    let g_jet = |zeta: Complex64| -> Result<(Complex64, Complex64), LauricellaError> {
        let a = a_at(zeta);
        let s = s_from_a(&a);
        let jet = fd_value(&params, &s, tol)?;
        let mut dg = C_ZERO;
        for i in 0..n {
            // ds_i/da_i = -1/(a_i - 1)^2
            let da = dir[i];
            let ds = -C_ONE / ((a[i] - C_ONE) * (a[i] - C_ONE)) * da;
            dg += jet.grad[i] * ds;
        }
        Ok((jet.f, dg))
    };

    // coarse polar scan for |g| minima
    let rays = 24usize;
    let steps = 24usize;
    let mut candidates: Vec<Complex64> = Vec::new();
    let mut values: Vec<(Complex64, f64)> = Vec::new();
    for r in 0..rays {
        let phi = 2.0 * std::f64::consts::PI * (r as f64 + 0.3) / rays as f64;
        for s in 1..=steps {
            let zeta = Complex64::from_polar(scan_radius * s as f64 / steps as f64, phi);
            if let Ok((g, _)) = g_jet(zeta) {
                values.push((zeta, g.norm()));
            }
        }
    }
    if values.is_empty() {
        return Ok(Vec::new());
    }
    let median = {
        let mut v: Vec<f64> = values.iter().map(|(_, g)| *g).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v[v.len() / 2]
    };
    values.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    for (zeta, g) in values.iter().take(12) {
        if *g < 0.5 * median {
            candidates.push(*zeta);
        }
    }

    // Newton refinement and dedup
    let mut zeros: Vec<Complex64> = Vec::new();
    'candidates: for &start_zeta in &candidates {
        let mut zeta = start_zeta;
        for _ in 0..40 {
            let (g, dg) = match g_jet(zeta) {
                Ok(v) => v,
                Err(_) => continue 'candidates,
            };
            if dg.norm() < 1e-14 {
                continue 'candidates;
            }
            let step = g / dg;
            zeta -= step;
            if step.norm() < 1e-13 * scan_radius.max(1.0) {
                break;
            }
        }
        let (g, dg) = match g_jet(zeta) {
            Ok(v) => v,
            Err(_) => continue,
        };
        if g.norm() > 1e-9 * (1.0 + dg.norm()) || zeta.norm() > 1.2 * scan_radius {
            continue;
        }
        if zeros.iter().all(|z| (z - zeta).norm() > 1e-6) {
            zeros.push(zeta);
        }
    }

    // order estimates around each zero
    let mut verdicts = Vec::with_capacity(zeros.len());
    for &zeta0 in &zeros {
        let nearest_other = zeros
            .iter()
            .filter(|z| (*z - zeta0).norm() > 1e-6)
            .map(|z| (z - zeta0).norm())
            .fold(f64::INFINITY, f64::min);
        let radius = (0.02 * scan_radius).min(0.4 * nearest_other);

        let mut g_fn =
            |zeta: Complex64| -> Result<Complex64, LauricellaError> { Ok(g_jet(zeta)?.0) };
        let zero_est =
            contour::pole_order_on_circle(&mut g_fn, zeta0, radius, contour::DEFAULT_SAMPLES)?;

        let mut f_i_orders = Vec::with_capacity(n);
        let mut indeterminate = !zero_est.determinate;
        let mut pass = zero_est.determinate && zero_est.count == 1;
        for i in 0..n {
            let mut fi_fn = |zeta: Complex64| -> Result<Complex64, LauricellaError> {
                let a = a_at(zeta);
                let q = riccati_q(&a, theta, &mut |s: &[Complex64]| fd_value(&params, s, tol))?;
                let (f, _cond) = garnier::f_from_q(&a, &q)?;
                Ok(f[i])
            };
            let est = contour::pole_order_on_circle(
                &mut fi_fn,
                zeta0,
                radius,
                contour::DEFAULT_SAMPLES,
            )?;
            if !est.determinate {
                indeterminate = true;
            } else if est.count != -1 {
                pass = false;
            }
            f_i_orders.push(est);
        }
        verdicts.push(Prop1Verdict {
            location: zeta0,
            f_zero_order: zero_est.count,
            f_zero_simple: zero_est.determinate && zero_est.count == 1,
            f_i_orders,
            pass,
            indeterminate,
        });
    }
    Ok(verdicts)
}
