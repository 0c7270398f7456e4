//! Rank-2 Fuchsian systems dy/dz = B(z) y with prescribed singular points,
//! and their monodromy computed by transporting a fundamental solution along
//! loops.

use crate::mat2::{Mat2, ONE, ZERO};
use crate::ode::{self, OdeError, OdeOptions};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FuchsianError {
    #[error("points ({points}) and residues ({residues}) count mismatch")]
    CountMismatch { points: usize, residues: usize },
    #[error("family needs at least one finite singular point")]
    Empty,
    #[error("singular points {i} and {j} coincide (distance {dist:.3e})")]
    DuplicatePoints { i: usize, j: usize, dist: f64 },
    #[error("residue {i} is not trace-free (|trace| = {trace:.3e})")]
    NotTraceFree { i: usize, trace: f64 },
    #[error("sum of residues is not diagonal (off-diagonal norm {offdiag:.3e})")]
    NonDiagonalAtInfinity { offdiag: f64 },
    #[error("evaluation point is singular (distance {dist:.3e} to point {i})")]
    AtSingularPoint { i: usize, dist: f64 },
    #[error("path comes within {dist:.3e} of singular point {i} (clearance {clearance:.3e})")]
    PathTooClose { i: usize, dist: f64, clearance: f64 },
    #[error("basepoint too close to the singular points (|z0| = {0:.3e})")]
    BadBasepoint(f64),
    #[error("loop winding check failed: winding {winding:.3} about point {i}")]
    BadWinding { i: usize, winding: f64 },
    #[error("loop chain is not closed")]
    OpenChain,
    #[error("reducibility test indeterminate: {0}")]
    Indeterminate(String),
    #[error(transparent)]
    Ode(#[from] OdeError),
}

const TRACE_TOL: f64 = 1e-12;
const DIAG_TOL: f64 = 1e-12;

/// A rank-2 Fuchsian family: finite singular points `a_1..a_{n+2}` with
/// trace-free residues `B_i`, and a diagonal residue at infinity
/// `B_inf = diag(beta_inf, -beta_inf) = -sum B_i`.
///
/// In the standard normalization the last two points are 0 and 1 and the
/// first `n` points are the deformation parameters.
#[derive(Clone, Debug)]
pub struct FuchsianFamily {
    points: Vec<Complex64>,
    residues: Vec<Mat2>,
    beta_inf: Complex64,
}

impl FuchsianFamily {
    pub fn new(points: Vec<Complex64>, residues: Vec<Mat2>) -> Result<Self, FuchsianError> {
        if points.len() != residues.len() {
            return Err(FuchsianError::CountMismatch {
                points: points.len(),
                residues: residues.len(),
            });
        }
        if points.is_empty() {
            return Err(FuchsianError::Empty);
        }
        let scale = points.iter().map(|p| p.norm()).fold(1.0, f64::max);
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                let dist = (points[i] - points[j]).norm();
                if dist < 1e-9 * scale {
                    return Err(FuchsianError::DuplicatePoints { i, j, dist });
                }
            }
        }
        let mut sum = Mat2::zero();
        for (i, b) in residues.iter().enumerate() {
            let tr = b.trace().norm();
            if tr > TRACE_TOL {
                return Err(FuchsianError::NotTraceFree { i, trace: tr });
            }
            sum += *b;
        }
        let offdiag = sum.b.norm().max(sum.c.norm());
        if offdiag > DIAG_TOL {
            return Err(FuchsianError::NonDiagonalAtInfinity { offdiag });
        }
        // B_inf = -sum, so beta_inf is the (1,1) entry of -sum.
        let beta_inf = -sum.a;
        Ok(FuchsianFamily {
            points,
            residues,
            beta_inf,
        })
    }

    /// Build a family in the standard normalization: `moving` points followed
    /// by the fixed points 0 and 1. `residues` has `moving.len() + 2` entries.
    pub fn with_standard_points(
        moving: &[Complex64],
        residues: Vec<Mat2>,
    ) -> Result<Self, FuchsianError> {
        let mut points = moving.to_vec();
        points.push(ZERO);
        points.push(ONE);
        FuchsianFamily::new(points, residues)
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn residues(&self) -> &[Mat2] {
        &self.residues
    }

    /// Number of finite singular points (n+2 in the standard normalization).
    pub fn num_finite(&self) -> usize {
        self.points.len()
    }

    pub fn beta_inf(&self) -> Complex64 {
        self.beta_inf
    }

    pub fn residue_at_infinity(&self) -> Mat2 {
        Mat2::diag(self.beta_inf, -self.beta_inf)
    }

    /// Local exponents +-beta_i, with beta_i the principal square root of
    /// -det(B_i).
    pub fn betas(&self) -> Vec<Complex64> {
        self.residues.iter().map(|b| (-b.det()).sqrt()).collect()
    }

    /// Half the minimal pairwise distance among the finite singular points;
    /// the default radius for the standard loops.
    pub fn loop_radius(&self) -> f64 {
        let mut min = f64::INFINITY;
        for i in 0..self.points.len() {
            for j in (i + 1)..self.points.len() {
                min = min.min((self.points[i] - self.points[j]).norm());
            }
        }
        if min.is_finite() {
            0.5 * min
        } else {
            // single singular point: any radius works
            1.0
        }
    }

    /// Default clearance for transported paths.
    pub fn clearance(&self) -> f64 {
        self.loop_radius() / 4.0
    }

    /// B(z) = sum_i B_i / (z - a_i).
    pub fn coefficient_matrix(&self, z: Complex64) -> Result<Mat2, FuchsianError> {
        let scale = self.points.iter().map(|p| p.norm()).fold(1.0, f64::max);
        let mut out = Mat2::zero();
        for (i, (a, b)) in self.points.iter().zip(&self.residues).enumerate() {
            let dz = z - a;
            if dz.norm() < 1e-13 * scale {
                return Err(FuchsianError::AtSingularPoint { i, dist: dz.norm() });
            }
            out += b.scale(ONE / dz);
        }
        Ok(out)
    }
}

/// Winding number of a closed polygonal chain about `p`, as a real number
/// (sum of turning angles over 2*pi).
pub fn winding_number(chain: &[Complex64], p: Complex64) -> f64 {
    let mut total = 0.0;
    for w in chain.windows(2) {
        let u = w[0] - p;
        let v = w[1] - p;
        total += (v / u).arg();
    }
    total / (2.0 * std::f64::consts::PI)
}

/// A polygonal loop in the z-plane encircling one singular point.
#[derive(Clone, Debug)]
pub struct Loop {
    pub basepoint: Complex64,
    pub vertices: Vec<Complex64>,
    /// Index of the encircled singular point in the family.
    pub target: usize,
}

impl Loop {
    /// Check closedness and the winding numbers against the family's points:
    /// +1 about the target, 0 about every other point.
    pub fn validate(&self, points: &[Complex64]) -> Result<(), FuchsianError> {
        let first = *self.vertices.first().ok_or(FuchsianError::OpenChain)?;
        let last = *self.vertices.last().unwrap();
        if (first - last).norm() > 1e-12 * (1.0 + first.norm()) {
            return Err(FuchsianError::OpenChain);
        }
        for (i, p) in points.iter().enumerate() {
            let w = winding_number(&self.vertices, *p);
            let expected = if i == self.target { 1.0 } else { 0.0 };
            if (w - expected).abs() > 1e-6 {
                return Err(FuchsianError::BadWinding { i, winding: w });
            }
        }
        Ok(())
    }
}

const CIRCLE_SIDES: usize = 48;

/// Deterministic basepoint: on the circle of radius `2 max|a_i| + 2`, at a
/// fixed angle chosen off the real axis (0 and 1 always lie on it).
pub fn standard_basepoint(family: &FuchsianFamily) -> Complex64 {
    let r = 2.0 * family.points.iter().map(|p| p.norm()).fold(0.0, f64::max) + 2.0;
    Complex64::from_polar(r, 0.5)
}

/// Segment-circle-segment loop around `points[target]`, based at `z0`.
pub fn standard_loop(
    points: &[Complex64],
    target: usize,
    z0: Complex64,
    radius: f64,
) -> Loop {
    let a = points[target];
    // Enter the circle at the point nearest the basepoint, go around once
    // counterclockwise, and return the same way.
    let phi0 = (z0 - a).arg();
    let mut vertices = Vec::with_capacity(CIRCLE_SIDES + 4);
    vertices.push(z0);
    for k in 0..=CIRCLE_SIDES {
        let phi = phi0 + 2.0 * std::f64::consts::PI * (k as f64) / (CIRCLE_SIDES as f64);
        vertices.push(a + Complex64::from_polar(radius, phi));
    }
    vertices.push(z0);
    Loop {
        basepoint: z0,
        vertices,
        target,
    }
}

/// The standard generating loops, one per finite singular point.
pub fn standard_loops(family: &FuchsianFamily) -> Result<Vec<Loop>, FuchsianError> {
    let z0 = standard_basepoint(family);
    let radius = family.loop_radius();
    let mut loops = Vec::with_capacity(family.num_finite());
    for target in 0..family.num_finite() {
        let lp = standard_loop(&family.points, target, z0, radius);
        lp.validate(&family.points)?;
        loops.push(lp);
    }
    Ok(loops)
}

fn point_segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    // Projection parameter of p onto the segment, clamped to [0, 1].
    let t = ((p - a).re * ab.re + (p - a).im * ab.im) / len2;
    let t = t.clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Transport the fundamental solution along a polygonal chain:
/// integrates dY/dz = B(z) Y with Y(start) = I and returns Y(end).
pub fn transport(
    family: &FuchsianFamily,
    chain: &[Complex64],
    tol: f64,
) -> Result<Mat2, FuchsianError> {
    transport_with_clearance(family, chain, tol, family.clearance())
}

pub fn transport_with_clearance(
    family: &FuchsianFamily,
    chain: &[Complex64],
    tol: f64,
    clearance: f64,
) -> Result<Mat2, FuchsianError> {
    for w in chain.windows(2) {
        for (i, p) in family.points.iter().enumerate() {
            let dist = point_segment_distance(*p, w[0], w[1]);
            if dist < clearance {
                return Err(FuchsianError::PathTooClose { i, dist, clearance });
            }
        }
    }
    let mut y = vec![ONE, ZERO, ZERO, ONE]; // row-major identity
    for w in chain.windows(2) {
        let (z0, z1) = (w[0], w[1]);
        let dz = z1 - z0;
        if dz.norm() == 0.0 {
            continue;
        }
        let mut rhs = |t: f64, y: &[Complex64], dy: &mut [Complex64]| {
            let z = z0 + dz * t;
            let bm = family
                .coefficient_matrix(z)
                .expect("clearance check keeps the path off singular points");
            let ym = Mat2::new(y[0], y[1], y[2], y[3]);
            let d = (bm * ym).scale(dz);
            dy[0] = d.a;
            dy[1] = d.b;
            dy[2] = d.c;
            dy[3] = d.d;
        };
        // The integration parameter runs over [0, 1] per segment; scale the
        // per-unit tolerance by the segment length so the error budget is
        // per unit of arc length.
        let opts = OdeOptions::with_tol(tol * dz.norm()).blowup(1e12);
        y = ode::integrate_to(&mut rhs, 0.0, 1.0, &y, &opts)?;
    }
    Ok(Mat2::new(y[0], y[1], y[2], y[3]))
}

/// Monodromy representation from the standard loops: one generator per
/// finite singular point, plus the generator at infinity and the residual of
/// the product relation.
#[derive(Clone, Debug)]
pub struct MonodromyRep {
    pub basepoint: Complex64,
    /// Generators indexed like the family's finite points.
    pub generators: Vec<Mat2>,
    /// Generator of the loop around infinity (clockwise big circle).
    pub infinity: Mat2,
    /// Traversal order of the finite loops whose concatenation is homotopic
    /// to the big counterclockwise circle.
    pub order: Vec<usize>,
    /// Residual of the product relation `G_inf * G_(i_k) ... G_(i_1) = I`.
    pub product_residual: f64,
    /// Total transported arc length, for interpreting the residual.
    pub transported_length: f64,
}

fn big_circle(z0: Complex64, reversed: bool) -> Vec<Complex64> {
    let r = z0.norm();
    let phi0 = z0.arg();
    let sides = 2 * CIRCLE_SIDES;
    let mut v = Vec::with_capacity(sides + 1);
    for k in 0..=sides {
        let s = if reversed { -(k as f64) } else { k as f64 };
        let phi = phi0 + 2.0 * std::f64::consts::PI * s / (sides as f64);
        v.push(Complex64::from_polar(r, phi));
    }
    v
}

fn chain_length(chain: &[Complex64]) -> f64 {
    chain.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
}

/// Compute the monodromy representation of the family with the standard
/// loops based at `basepoint` (or the deterministic default).
pub fn monodromy(
    family: &FuchsianFamily,
    basepoint: Option<Complex64>,
    tol: f64,
) -> Result<MonodromyRep, FuchsianError> {
    let z0 = basepoint.unwrap_or_else(|| standard_basepoint(family));
    let max_a = family.points.iter().map(|p| p.norm()).fold(0.0, f64::max);
    if z0.norm() < max_a + 2.0 * family.loop_radius() {
        return Err(FuchsianError::BadBasepoint(z0.norm()));
    }
    let radius = family.loop_radius();
    let mut generators = Vec::with_capacity(family.num_finite());
    let mut length = 0.0;
    for target in 0..family.num_finite() {
        let lp = standard_loop(&family.points, target, z0, radius);
        lp.validate(&family.points)?;
        length += chain_length(&lp.vertices);
        generators.push(transport(family, &lp.vertices, tol)?);
    }

    // Angular order of the loops as seen from the basepoint. Concatenating
    // the petals in increasing relative angle is homotopic to the big
    // counterclockwise circle.
    let center_dir = (-z0).arg();
    let mut order: Vec<usize> = (0..family.num_finite()).collect();
    let rel = |i: usize| {
        let mut d = (family.points[i] - z0).arg() - center_dir;
        while d > std::f64::consts::PI {
            d -= 2.0 * std::f64::consts::PI;
        }
        while d < -std::f64::consts::PI {
            d += 2.0 * std::f64::consts::PI;
        }
        d
    };
    order.sort_by(|&i, &j| rel(i).partial_cmp(&rel(j)).unwrap());

    let circle_ccw = big_circle(z0, false);
    let circle_cw = big_circle(z0, true);
    length += chain_length(&circle_ccw) + chain_length(&circle_cw);
    let t_circle = transport(family, &circle_ccw, tol)?;
    let infinity = transport(family, &circle_cw, tol)?;

    // Transport composes contravariantly: G(gamma1 then gamma2) = G2 * G1.
    let mut prod = Mat2::identity();
    for &i in &order {
        prod = generators[i] * prod;
    }
    let res1 = (prod - t_circle).norm_max();
    let res2 = (infinity * t_circle - Mat2::identity()).norm_max();
    Ok(MonodromyRep {
        basepoint: z0,
        generators,
        infinity,
        order,
        product_residual: res1.max(res2),
        transported_length: length,
    })
}

/// Result of the common-invariant-line test on a monodromy representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reducibility {
    Irreducible,
    Reducible,
    Indeterminate,
}

/// Near-scalar test, relative to the matrix norm.
fn near_scalar(g: &Mat2, rel: f64) -> bool {
    let s = g.trace() * 0.5;
    (*g - Mat2::diag(s, s)).norm_max() <= rel * g.norm_max().max(1.0)
}

/// Projective deviation of the line spanned by unit vector `v` under `g`:
/// the sine of the angle between `v` and `g v`.
fn line_deviation(g: &Mat2, v: [Complex64; 2]) -> f64 {
    let w = g.mul_vec(v);
    let wn = (w[0].norm_sqr() + w[1].norm_sqr()).sqrt();
    if wn == 0.0 {
        // g v = 0 cannot happen for invertible g
        return 1.0;
    }
    let inner = v[0].conj() * w[0] + v[1].conj() * w[1];
    let proj = [w[0] - inner * v[0], w[1] - inner * v[1]];
    ((proj[0].norm_sqr() + proj[1].norm_sqr()).sqrt()) / wn
}

/// Test irreducibility of the representation: reducible iff all generators
/// share an invariant line, detected by checking each eigendirection of the
/// first non-scalar generator against all generators.
pub fn reducibility(rep: &MonodromyRep, tol: f64) -> Reducibility {
    const SCALAR_REL: f64 = 1e-8;
    let base = rep
        .generators
        .iter()
        .find(|g| !near_scalar(g, SCALAR_REL));
    let base = match base {
        // Every generator is (numerically) scalar: every line is invariant.
        None => return Reducibility::Reducible,
        Some(g) => g,
    };
    let (l1, l2) = base.eigenvalues();
    let mut candidates = vec![base.eigenvector(l1)];
    if (l1 - l2).norm() > SCALAR_REL * base.norm_max().max(1.0) {
        candidates.push(base.eigenvector(l2));
    }
    for (v, l) in candidates.iter().zip([l1, l2]) {
        // Sanity: the extracted direction must actually be an eigendirection.
        let res = {
            let w = base.mul_vec(*v);
            ((w[0] - l * v[0]).norm_sqr() + (w[1] - l * v[1]).norm_sqr()).sqrt()
        };
        if res > 1e-6 * base.norm_max().max(1.0) {
            return Reducibility::Indeterminate;
        }
        if rep
            .generators
            .iter()
            .all(|g| line_deviation(g, *v) <= tol)
        {
            return Reducibility::Reducible;
        }
    }
    Reducibility::Irreducible
}

/// Boolean form of [`reducibility`]; an indeterminate outcome is an error.
pub fn is_irreducible(rep: &MonodromyRep, tol: f64) -> Result<bool, FuchsianError> {
    match reducibility(rep, tol) {
        Reducibility::Irreducible => Ok(true),
        Reducibility::Reducible => Ok(false),
        Reducibility::Indeterminate => Err(FuchsianError::Indeterminate(
            "defective generator within tolerance".into(),
        )),
    }
}

/// Deviations |tr G_i - 2 cos(2 pi beta_i)| for the non-resonant exponents;
/// `None` marks a resonant (untestable) point where 2 beta_i is an integer.
pub fn local_trace_deviations(
    family: &FuchsianFamily,
    rep: &MonodromyRep,
    resonance_margin: f64,
) -> Vec<Option<f64>> {
    family
        .betas()
        .iter()
        .zip(&rep.generators)
        .map(|(beta, g)| {
            let two_beta = 2.0 * beta;
            let nearest = two_beta.re.round();
            if two_beta.im.abs() < resonance_margin
                && (two_beta.re - nearest).abs() < resonance_margin
            {
                None
            } else {
                let expected = (2.0 * std::f64::consts::PI * beta).cos() * 2.0;
                Some((g.trace() - expected).norm())
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn coefficient_matrix_single_residue() {
        // One residue diag(theta, -theta) at 0, evaluated at z = 2.
        let theta = c(0.3, 0.1);
        let fam = FuchsianFamily::new(
            vec![ZERO],
            vec![Mat2::diag(theta, -theta)],
        )
        .unwrap();
        let m = fam.coefficient_matrix(c(2.0, 0.0)).unwrap();
        assert!((m - Mat2::diag(theta / 2.0, -theta / 2.0)).norm_max() < 1e-15);
    }

    #[test]
    fn coefficient_matrix_zero_residues() {
        let fam = FuchsianFamily::new(
            vec![ZERO, ONE, c(2.0, 1.0)],
            vec![Mat2::zero(), Mat2::zero(), Mat2::zero()],
        )
        .unwrap();
        let m = fam.coefficient_matrix(c(0.5, -0.4)).unwrap();
        assert_eq!(m, Mat2::zero());
    }

    #[test]
    fn coefficient_matrix_two_residues_hand_check() {
        // Residues at {0, 1}, z = 1/2: B(z) = 2 B_1 - 2 B_2.
        let b1 = Mat2::new(c(0.2, 0.0), c(0.5, -0.1), c(-0.3, 0.2), c(-0.2, 0.0));
        // choose B_2 so B_1 + B_2 is diagonal
        let b2 = Mat2::new(c(0.1, 0.3), -b1.b, -b1.c, c(-0.1, -0.3));
        let fam = FuchsianFamily::new(vec![ZERO, ONE], vec![b1, b2]).unwrap();
        let m = fam.coefficient_matrix(c(0.5, 0.0)).unwrap();
        let expect = b1.scale(c(2.0, 0.0)) + b2.scale(c(-2.0, 0.0));
        assert!((m - expect).norm_max() < 1e-14);
    }

    #[test]
    fn coefficient_matrix_at_singularity_errors() {
        let fam = FuchsianFamily::new(vec![ZERO], vec![Mat2::zero()]).unwrap();
        assert!(matches!(
            fam.coefficient_matrix(ZERO),
            Err(FuchsianError::AtSingularPoint { .. })
        ));
    }

    #[test]
    fn trace_sum_validation() {
        let bad = Mat2::new(c(1.0, 0.0), ZERO, ZERO, c(1.0, 0.0));
        assert!(matches!(
            FuchsianFamily::new(vec![ZERO], vec![bad]),
            Err(FuchsianError::NotTraceFree { .. })
        ));
        let b = Mat2::new(c(0.2, 0.0), c(0.5, 0.0), ZERO, c(-0.2, 0.0));
        assert!(matches!(
            FuchsianFamily::new(vec![ZERO], vec![b]),
            Err(FuchsianError::NonDiagonalAtInfinity { .. })
        ));
    }

    #[test]
    fn transport_zero_system_is_identity() {
        let fam = FuchsianFamily::new(vec![ZERO, ONE], vec![Mat2::zero(), Mat2::zero()]).unwrap();
        let path = vec![c(3.0, 0.5), c(2.0, 2.0), c(-1.0, 1.0)];
        let y = transport(&fam, &path, 1e-10).unwrap();
        assert!((y - Mat2::identity()).norm_max() < 1e-12);
    }

    #[test]
    fn transport_diagonal_loop_exact() {
        // diag(theta, -theta) at 0: loop about 0 gives diag(e^{2 pi i theta}, e^{-2 pi i theta}).
        let theta = c(0.23, -0.11);
        let fam = FuchsianFamily::new(vec![ZERO], vec![Mat2::diag(theta, -theta)]).unwrap();
        let lp = standard_loop(fam.points(), 0, standard_basepoint(&fam), 0.7);
        let g = transport(&fam, &lp.vertices, 1e-11).unwrap();
        let tau = c(0.0, 2.0 * std::f64::consts::PI);
        let expect = Mat2::diag((tau * theta).exp(), (-tau * theta).exp());
        assert!((g - expect).norm_max() < 1e-8, "{:?}", g - expect);
    }

    #[test]
    fn transport_det_is_one() {
        let b1 = Mat2::new(c(0.2, 0.1), c(0.4, -0.3), c(0.1, 0.2), c(-0.2, -0.1));
        let b2 = Mat2::new(c(-0.1, 0.2), -b1.b, -b1.c, c(0.1, -0.2));
        let fam = FuchsianFamily::new(vec![ZERO, ONE], vec![b1, b2]).unwrap();
        let lp = standard_loop(fam.points(), 1, standard_basepoint(&fam), fam.loop_radius());
        let g = transport(&fam, &lp.vertices, 1e-10).unwrap();
        assert!((g.det() - ONE).norm() < 1e-8);
    }

    #[test]
    fn transport_homotopic_paths_agree() {
        let b1 = Mat2::new(c(0.2, 0.1), c(0.4, -0.3), c(0.1, 0.2), c(-0.2, -0.1));
        let b2 = Mat2::new(c(-0.1, 0.2), -b1.b, -b1.c, c(0.1, -0.2));
        let fam = FuchsianFamily::new(vec![ZERO, ONE], vec![b1, b2]).unwrap();
        // Two routes from 3+2i to -2+2i staying in the upper half plane.
        let p1 = vec![c(3.0, 2.0), c(0.5, 2.0), c(-2.0, 2.0)];
        let p2 = vec![c(3.0, 2.0), c(2.0, 4.0), c(-1.0, 3.5), c(-2.0, 2.0)];
        let y1 = transport(&fam, &p1, 1e-11).unwrap();
        let y2 = transport(&fam, &p2, 1e-11).unwrap();
        assert!((y1 - y2).norm_max() < 1e-8);
    }

    #[test]
    fn transport_reversal_inverts() {
        let b1 = Mat2::new(c(0.2, 0.1), c(0.4, -0.3), c(0.1, 0.2), c(-0.2, -0.1));
        let b2 = Mat2::new(c(-0.1, 0.2), -b1.b, -b1.c, c(0.1, -0.2));
        let fam = FuchsianFamily::new(vec![ZERO, ONE], vec![b1, b2]).unwrap();
        let lp = standard_loop(fam.points(), 0, standard_basepoint(&fam), fam.loop_radius());
        let g = transport(&fam, &lp.vertices, 1e-11).unwrap();
        let mut rev = lp.vertices.clone();
        rev.reverse();
        let ginv = transport(&fam, &rev, 1e-11).unwrap();
        assert!((g * ginv - Mat2::identity()).norm_max() < 1e-8);
    }

    #[test]
    fn transport_clearance_violation() {
        let fam = FuchsianFamily::new(vec![ZERO, ONE], vec![Mat2::zero(), Mat2::zero()]).unwrap();
        let path = vec![c(3.0, 0.0), c(-3.0, 0.0)]; // runs through both points
        assert!(matches!(
            transport(&fam, &path, 1e-9),
            Err(FuchsianError::PathTooClose { .. })
        ));
    }

    #[test]
    fn monodromy_commuting_diagonal() {
        let t1 = c(0.21, 0.0);
        let t2 = c(-0.34, 0.0);
        let fam = FuchsianFamily::new(
            vec![ZERO, ONE],
            vec![Mat2::diag(t1, -t1), Mat2::diag(t2, -t2)],
        )
        .unwrap();
        let rep = monodromy(&fam, None, 1e-11).unwrap();
        let tau = c(0.0, 2.0 * std::f64::consts::PI);
        let e1 = Mat2::diag((tau * t1).exp(), (-tau * t1).exp());
        let e2 = Mat2::diag((tau * t2).exp(), (-tau * t2).exp());
        assert!((rep.generators[0] - e1).norm_max() < 1e-8);
        assert!((rep.generators[1] - e2).norm_max() < 1e-8);
        let comm = rep.generators[0] * rep.generators[1]
            - rep.generators[1] * rep.generators[0];
        assert!(comm.norm_max() < 1e-8);
    }

    #[test]
    fn monodromy_zero_family_identity() {
        let fam = FuchsianFamily::new(vec![ZERO, ONE], vec![Mat2::zero(), Mat2::zero()]).unwrap();
        let rep = monodromy(&fam, None, 1e-10).unwrap();
        for g in &rep.generators {
            assert!((*g - Mat2::identity()).norm_max() < 1e-10);
        }
        assert!(rep.product_residual < 1e-10);
    }

    #[test]
    fn monodromy_product_relation_random_sl2() {
        // Three finite points with non-commuting residues; the product of
        // generators in path order must match the big-circle transport.
        let b1 = Mat2::new(c(0.31, 0.12), c(0.42, -0.23), c(-0.15, 0.08), c(-0.31, -0.12));
        let b2 = Mat2::new(c(-0.22, 0.05), c(0.17, 0.31), c(0.25, -0.14), c(0.22, -0.05));
        let b3 = Mat2::new(
            c(0.05, -0.09),
            -(b1.b + b2.b),
            -(b1.c + b2.c),
            c(-0.05, 0.09),
        );
        let fam =
            FuchsianFamily::new(vec![c(-0.7, 0.6), ZERO, ONE], vec![b1, b2, b3]).unwrap();
        let tol = 1e-10;
        let rep = monodromy(&fam, None, tol).unwrap();
        assert!(
            rep.product_residual < 10.0 * tol * rep.transported_length,
            "residual {} for length {}",
            rep.product_residual,
            rep.transported_length
        );
    }

    #[test]
    fn local_traces_match_exponents() {
        let b1 = Mat2::new(c(0.31, 0.12), c(0.42, -0.23), c(-0.15, 0.08), c(-0.31, -0.12));
        let b2 = Mat2::new(c(-0.22, 0.05), c(0.17, 0.31), c(0.25, -0.14), c(0.22, -0.05));
        let b3 = Mat2::new(
            c(0.05, -0.09),
            -(b1.b + b2.b),
            -(b1.c + b2.c),
            c(-0.05, 0.09),
        );
        let fam =
            FuchsianFamily::new(vec![c(-0.7, 0.6), ZERO, ONE], vec![b1, b2, b3]).unwrap();
        let rep = monodromy(&fam, None, 1e-10).unwrap();
        for dev in local_trace_deviations(&fam, &rep, 0.02) {
            let dev = dev.expect("exponents are non-resonant");
            assert!(dev < 1e-8, "trace deviation {dev}");
        }
    }

    #[test]
    fn reducibility_diagonal_and_identity() {
        let t1 = c(0.21, 0.0);
        let t2 = c(-0.34, 0.0);
        let fam = FuchsianFamily::new(
            vec![ZERO, ONE],
            vec![Mat2::diag(t1, -t1), Mat2::diag(t2, -t2)],
        )
        .unwrap();
        let rep = monodromy(&fam, None, 1e-10).unwrap();
        assert_eq!(reducibility(&rep, 1e-6), Reducibility::Reducible);

        let fam0 = FuchsianFamily::new(vec![ZERO, ONE], vec![Mat2::zero(), Mat2::zero()]).unwrap();
        let rep0 = monodromy(&fam0, None, 1e-10).unwrap();
        assert_eq!(reducibility(&rep0, 1e-6), Reducibility::Reducible);
    }

    #[test]
    fn reducibility_jordan_pair() {
        // Unipotent upper- and lower-triangular generators share no line.
        let rep = MonodromyRep {
            basepoint: c(5.0, 0.0),
            generators: vec![
                Mat2::new(ONE, ONE, ZERO, ONE),
                Mat2::new(ONE, ZERO, ONE, ONE),
            ],
            infinity: Mat2::identity(),
            order: vec![0, 1],
            product_residual: 0.0,
            transported_length: 0.0,
        };
        assert_eq!(reducibility(&rep, 1e-6), Reducibility::Irreducible);
    }

    #[test]
    fn loop_winding_validation() {
        let points = vec![ZERO, ONE, c(-1.0, 0.5)];
        let z0 = c(4.0, 2.0);
        for target in 0..3 {
            let lp = standard_loop(&points, target, z0, 0.4);
            lp.validate(&points).unwrap();
        }
    }
}
