//! The Schlesinger flow on residue matrices along paths in the
//! pole-configuration space, with conservation and isomonodromy diagnostics.
//!
//! The configuration space is `(C \ {0,1})^n` minus the diagonals; the two
//! points 0 and 1 and the point at infinity stay fixed, the first `n` points
//! move. A path from the start point stands for a point of the universal
//! cover, so a trajectory always carries the path it was integrated along.

use crate::fuchsian::{self, FuchsianError, FuchsianFamily};
use crate::mat2::{Mat2, ONE, ZERO};
use crate::ode::{self, OdeError, OdeOptions};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SchlesingerError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("points collide along the path: min distance {dist:.3e} < clearance {clearance:.3e} (pair {i}, {j})")]
    Collision {
        i: usize,
        j: usize,
        dist: f64,
        clearance: f64,
    },
    #[error("sum of residues must be diagonal for this operation (off-diagonal {0:.3e})")]
    NonDiagonalSum(f64),
    #[error("trajectory is empty")]
    EmptyTrajectory,
    #[error("state cannot be renormalized into a Fuchsian family (defect {0:.3e})")]
    BadState(f64),
    #[error(transparent)]
    Fuchsian(#[from] FuchsianError),
    #[error(transparent)]
    Ode(#[from] OdeError),
}

/// Piecewise-linear path of the `n` moving points.
#[derive(Clone, Debug)]
pub struct DeformationPath {
    pub start: Vec<Complex64>,
    /// Per-segment displacement of each coordinate.
    pub segments: Vec<Vec<Complex64>>,
}

/// Smallest |p + t q| for t in [0, 1].
fn min_linear_norm(p: Complex64, q: Complex64) -> f64 {
    let q2 = q.norm_sqr();
    if q2 == 0.0 {
        return p.norm();
    }
    let t = (-(p * q.conj()).re / q2).clamp(0.0, 1.0);
    (p + q * t).norm().min(p.norm()).min((p + q).norm())
}

impl DeformationPath {
    pub fn new(start: Vec<Complex64>, segments: Vec<Vec<Complex64>>) -> Self {
        DeformationPath { start, segments }
    }

    /// Straight path from `start` by a single displacement.
    pub fn straight(start: Vec<Complex64>, displacement: Vec<Complex64>) -> Self {
        DeformationPath::new(start, vec![displacement])
    }

    pub fn dimension(&self) -> usize {
        self.start.len()
    }

    /// Euclidean length over the stacked coordinates.
    pub fn arc_length(&self) -> f64 {
        self.segments
            .iter()
            .map(|d| d.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
            .sum()
    }

    /// Position of the moving points at the start of segment `k`.
    pub fn segment_start(&self, k: usize) -> Vec<Complex64> {
        let mut a = self.start.clone();
        for seg in &self.segments[..k] {
            for (ai, d) in a.iter_mut().zip(seg) {
                *ai += d;
            }
        }
        a
    }

    /// Default collision clearance: 1e-3 times the minimal initial pairwise
    /// distance among the moving points, 0 and 1.
    pub fn default_clearance(&self) -> f64 {
        let mut pts = self.start.clone();
        pts.push(ZERO);
        pts.push(ONE);
        let mut min = f64::INFINITY;
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                min = min.min((pts[i] - pts[j]).norm());
            }
        }
        1e-3 * min
    }

    /// Verify that all of {a_1..a_n, 0, 1} stay pairwise at distance at least
    /// `clearance` everywhere on the path.
    pub fn validate(&self, clearance: f64) -> Result<(), SchlesingerError> {
        let n = self.dimension();
        for seg in &self.segments {
            if seg.len() != n {
                return Err(SchlesingerError::Dimension(format!(
                    "segment has {} displacements for {} coordinates",
                    seg.len(),
                    n
                )));
            }
        }
        let fixed = [ZERO, ONE];
        for (k, seg) in self.segments.iter().enumerate() {
            let a = self.segment_start(k);
            for i in 0..n {
                for j in (i + 1)..n {
                    let dist = min_linear_norm(a[i] - a[j], seg[i] - seg[j]);
                    if dist < clearance {
                        return Err(SchlesingerError::Collision { i, j, dist, clearance });
                    }
                }
                for (f, fp) in fixed.iter().enumerate() {
                    let dist = min_linear_norm(a[i] - fp, seg[i]);
                    if dist < clearance {
                        return Err(SchlesingerError::Collision {
                            i,
                            j: n + f,
                            dist,
                            clearance,
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Residue configuration at one point of the deformation space.
#[derive(Clone, Debug)]
pub struct SchlesingerState {
    /// The n moving points.
    pub moving: Vec<Complex64>,
    /// Residues B_1..B_{n+2}; the last two sit at the fixed points 0 and 1.
    pub residues: Vec<Mat2>,
}

impl SchlesingerState {
    pub fn new(moving: Vec<Complex64>, residues: Vec<Mat2>) -> Result<Self, SchlesingerError> {
        if residues.len() != moving.len() + 2 {
            return Err(SchlesingerError::Dimension(format!(
                "{} residues for {} moving points (need n+2)",
                residues.len(),
                moving.len()
            )));
        }
        Ok(SchlesingerState { moving, residues })
    }

    pub fn n(&self) -> usize {
        self.moving.len()
    }

    /// All finite singular points: moving ones followed by 0 and 1.
    pub fn points(&self) -> Vec<Complex64> {
        let mut p = self.moving.clone();
        p.push(ZERO);
        p.push(ONE);
        p
    }

    /// Sum of the residues, constant along the flow (equals -B_inf).
    pub fn residue_sum(&self) -> Mat2 {
        let mut s = Mat2::zero();
        for b in &self.residues {
            s += *b;
        }
        s
    }

    /// Local exponents +-beta_i (principal square root of -det B_i).
    pub fn betas(&self) -> Vec<Complex64> {
        self.residues.iter().map(|b| (-b.det()).sqrt()).collect()
    }

    /// The coefficient b(a) = sum_i b_i^{12} a_i over all finite points
    /// (the fixed point 1 contributes its residue's upper-right entry).
    pub fn coeff_b(&self) -> Complex64 {
        self.residues
            .iter()
            .zip(self.points())
            .map(|(bm, a)| bm.b * a)
            .sum()
    }

    pub fn max_residue_norm(&self) -> f64 {
        self.residues.iter().map(|b| b.norm_max()).fold(0.0, f64::max)
    }

    /// Rebuild a validated Fuchsian family, renormalizing the tiny numerical
    /// drift the flow leaves on the invariants: traces are projected out and
    /// the off-diagonal part of the residue sum is absorbed into the last
    /// residue. Fails if the required adjustment is not small.
    pub fn to_family(&self) -> Result<FuchsianFamily, SchlesingerError> {
        let mut res = self.residues.clone();
        let mut defect: f64 = 0.0;
        for b in res.iter_mut() {
            let half_tr = b.trace() * 0.5;
            defect = defect.max(b.trace().norm());
            b.a -= half_tr;
            b.d -= half_tr;
        }
        let sum = {
            let mut s = Mat2::zero();
            for b in &res {
                s += *b;
            }
            s
        };
        defect = defect.max(sum.b.norm()).max(sum.c.norm());
        if defect > 1e-6 * self.max_residue_norm().max(1.0) {
            return Err(SchlesingerError::BadState(defect));
        }
        let last = res.len() - 1;
        res[last].b -= sum.b;
        res[last].c -= sum.c;
        Ok(FuchsianFamily::new(self.points(), res)?)
    }
}

/// Contraction of the Schlesinger 1-form with the tangent vector `da`
/// (displacements of the moving points; the fixed points move by zero):
/// dB_i = -sum_{j != i} [B_i, B_j] / (a_i - a_j) * (da_i - da_j).
pub fn schlesinger_rhs(
    state: &SchlesingerState,
    da: &[Complex64],
) -> Result<Vec<Mat2>, SchlesingerError> {
    let n = state.n();
    if da.len() != n {
        return Err(SchlesingerError::Dimension(format!(
            "{} displacements for {} moving points",
            da.len(),
            n
        )));
    }
    let pts = state.points();
    let mut vel = da.to_vec();
    vel.push(ZERO);
    vel.push(ZERO);
    let m = pts.len();
    let scale = pts.iter().map(|p| p.norm()).fold(1.0, f64::max);
    let mut out = vec![Mat2::zero(); m];
    for i in 0..m {
        for j in 0..m {
            if i == j {
                continue;
            }
            let dv = vel[i] - vel[j];
            if dv == ZERO {
                continue;
            }
            let diff = pts[i] - pts[j];
            if diff.norm() < 1e-12 * scale {
                return Err(SchlesingerError::Collision {
                    i,
                    j,
                    dist: diff.norm(),
                    clearance: 1e-12 * scale,
                });
            }
            out[i] += state.residues[i]
                .commutator(&state.residues[j])
                .scale(-dv / diff);
        }
    }
    Ok(out)
}

/// First and second derivatives of the residues along a straight-line path
/// with constant velocity `da` (the points have zero acceleration).
pub fn rhs_with_second(
    state: &SchlesingerState,
    da: &[Complex64],
) -> Result<(Vec<Mat2>, Vec<Mat2>), SchlesingerError> {
    let first = schlesinger_rhs(state, da)?;
    let pts = state.points();
    let mut vel = da.to_vec();
    vel.push(ZERO);
    vel.push(ZERO);
    let m = pts.len();
    let mut second = vec![Mat2::zero(); m];
    for i in 0..m {
        for j in 0..m {
            if i == j {
                continue;
            }
            let dv = vel[i] - vel[j];
            if dv == ZERO {
                continue;
            }
            let diff = pts[i] - pts[j];
            // d/dt [B_i, B_j] by the product rule, plus the moving denominator.
            let leib = first[i] * state.residues[j] - state.residues[j] * first[i]
                + state.residues[i] * first[j]
                - first[j] * state.residues[i];
            second[i] += leib.scale(-dv / diff);
            second[i] += state.residues[i]
                .commutator(&state.residues[j])
                .scale(dv * dv / (diff * diff));
        }
    }
    Ok((first, second))
}

fn pack(residues: &[Mat2], out: &mut Vec<Complex64>) {
    out.clear();
    for b in residues {
        out.extend_from_slice(&[b.a, b.b, b.c, b.d]);
    }
}

fn unpack(y: &[Complex64]) -> Vec<Mat2> {
    y.chunks_exact(4)
        .map(|c| Mat2::new(c[0], c[1], c[2], c[3]))
        .collect()
}

/// One recorded point of an integrated trajectory.
#[derive(Clone, Debug)]
pub struct FlowSample {
    /// Arc-length parameter along the path.
    pub s: f64,
    pub moving: Vec<Complex64>,
    pub residues: Vec<Mat2>,
}

impl FlowSample {
    pub fn state(&self) -> SchlesingerState {
        SchlesingerState {
            moving: self.moving.clone(),
            residues: self.residues.clone(),
        }
    }
}

/// An integrated branch: the path (identifying the point of the universal
/// cover) plus the recorded states.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub path: DeformationPath,
    pub samples: Vec<FlowSample>,
}

impl Trajectory {
    pub fn initial(&self) -> SchlesingerState {
        self.samples[0].state()
    }

    pub fn last(&self) -> SchlesingerState {
        self.samples.last().expect("non-empty trajectory").state()
    }
}

/// A detected singular event of the continued solution along a slice or path.
#[derive(Clone, Debug)]
pub struct PoleEvent {
    /// Which quantity blew up (an entry of some B_i, b, f_k, F_k, or u).
    pub quantity: String,
    /// Location in the slice/path parameter plane.
    pub location: Complex64,
    /// Argument-principle order (negative for poles); `None` until refined
    /// or when the estimate was rejected.
    pub order: Option<i64>,
    /// Distance of the raw argument-principle integral to the nearest integer.
    pub residual: f64,
    /// False when the estimator rejected the count.
    pub determinate: bool,
}

/// Outcome of a flow integration: the trajectory up to the last sound state,
/// plus pole-event candidates where integration had to stop.
#[derive(Clone, Debug)]
pub struct FlowOutcome {
    pub trajectory: Trajectory,
    pub events: Vec<PoleEvent>,
}

/// Blow-up factor for declaring a pole candidate, relative to the initial
/// residue scale.
pub const BLOWUP_FACTOR: f64 = 1e6;

/// Integrate the Schlesinger flow along `path`. Integration stops with a
/// pole-event candidate when the residues exceed the blow-up threshold or
/// the step size underflows; a blowup is never a silent failure.
pub fn integrate_flow(
    state0: &SchlesingerState,
    path: &DeformationPath,
    tol: f64,
) -> Result<FlowOutcome, SchlesingerError> {
    if path.dimension() != state0.n() {
        return Err(SchlesingerError::Dimension(format!(
            "path dimension {} vs state dimension {}",
            path.dimension(),
            state0.n()
        )));
    }
    path.validate(path.default_clearance())?;
    let blowup = BLOWUP_FACTOR * state0.max_residue_norm().max(1.0);

    let mut samples = Vec::new();
    let mut events = Vec::new();
    let mut y = Vec::new();
    pack(&state0.residues, &mut y);
    let mut s_offset = 0.0;

    samples.push(FlowSample {
        s: 0.0,
        moving: path.start.clone(),
        residues: state0.residues.clone(),
    });

    for (k, seg) in path.segments.iter().enumerate() {
        let a0 = path.segment_start(k);
        let seg_len = seg.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if seg_len == 0.0 {
            continue;
        }
        let position = |t: f64| -> Vec<Complex64> {
            a0.iter().zip(seg).map(|(a, d)| a + d * t).collect()
        };
        let mut rhs = |t: f64, y: &[Complex64], dy: &mut [Complex64]| {
            let state = SchlesingerState {
                moving: position(t),
                residues: unpack(y),
            };
            let der = schlesinger_rhs(&state, seg).expect("path validation keeps points apart");
            let mut idx = 0;
            for d in der {
                dy[idx] = d.a;
                dy[idx + 1] = d.b;
                dy[idx + 2] = d.c;
                dy[idx + 3] = d.d;
                idx += 4;
            }
        };
        let mut observer = |t: f64, y: &[Complex64]| {
            if t > 0.0 {
                samples.push(FlowSample {
                    s: s_offset + t * seg_len,
                    moving: position(t),
                    residues: unpack(y),
                });
            }
        };
        let opts = OdeOptions::with_tol(tol * seg_len).blowup(blowup);
        match ode::integrate(&mut rhs, 0.0, 1.0, &y, &opts, &mut observer) {
            Ok(end) => y = end,
            Err(OdeError::Blowup { t, .. }) | Err(OdeError::StepUnderflow { t, .. }) => {
                events.push(PoleEvent {
                    quantity: "residues".into(),
                    location: Complex64::new(s_offset + t * seg_len, 0.0),
                    order: None,
                    residual: f64::INFINITY,
                    determinate: false,
                });
                break;
            }
            Err(e) => return Err(e.into()),
        }
        s_offset += seg_len;
    }

    Ok(FlowOutcome {
        trajectory: Trajectory {
            path: path.clone(),
            samples,
        },
        events,
    })
}

/// Integrate a single straight-line displacement from a state; the workhorse
/// for slice evaluation away from the recorded path.
pub fn flow_segment(
    state: &SchlesingerState,
    displacement: &[Complex64],
    tol: f64,
) -> Result<SchlesingerState, SchlesingerError> {
    let seg_len = displacement.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if seg_len == 0.0 {
        return Ok(state.clone());
    }
    let blowup = BLOWUP_FACTOR * state.max_residue_norm().max(1.0);
    let a0 = state.moving.clone();
    let mut rhs = |t: f64, y: &[Complex64], dy: &mut [Complex64]| {
        let moving: Vec<Complex64> = a0
            .iter()
            .zip(displacement)
            .map(|(a, d)| a + d * t)
            .collect();
        let st = SchlesingerState {
            moving,
            residues: unpack(y),
        };
        match schlesinger_rhs(&st, displacement) {
            Ok(der) => {
                let mut idx = 0;
                for d in der {
                    dy[idx] = d.a;
                    dy[idx + 1] = d.b;
                    dy[idx + 2] = d.c;
                    dy[idx + 3] = d.d;
                    idx += 4;
                }
            }
            Err(_) => {
                // Collision inside the segment: poison the derivative so the
                // integrator rejects the step and reports an underflow.
                for d in dy.iter_mut() {
                    *d = Complex64::new(f64::NAN, f64::NAN);
                }
            }
        }
    };
    let mut y = Vec::new();
    pack(&state.residues, &mut y);
    let opts = OdeOptions::with_tol(tol * seg_len).blowup(blowup);
    let end = ode::integrate_to(&mut rhs, 0.0, 1.0, &y, &opts)?;
    let moving: Vec<Complex64> = a0.iter().zip(displacement).map(|(a, d)| a + d).collect();
    Ok(SchlesingerState {
        moving,
        residues: unpack(&end),
    })
}

/// Maximal deviations of the conserved quantities along a trajectory.
#[derive(Clone, Copy, Debug)]
pub struct ConservationReport {
    /// max over samples of || sum B_i(s) - sum B_i(0) ||.
    pub sum_drift: f64,
    /// max over samples and i of |beta_i(s) - beta_i(0)|.
    pub beta_drift: f64,
}

pub fn conservation_report(traj: &Trajectory) -> Result<ConservationReport, SchlesingerError> {
    let first = traj.samples.first().ok_or(SchlesingerError::EmptyTrajectory)?;
    let sum0 = first.state().residue_sum();
    let betas0 = first.state().betas();
    let mut sum_drift = 0.0f64;
    let mut beta_drift = 0.0f64;
    for sample in &traj.samples {
        let st = sample.state();
        sum_drift = sum_drift.max((st.residue_sum() - sum0).norm_max());
        for (b, b0) in st.betas().iter().zip(&betas0) {
            beta_drift = beta_drift.max((b - b0).norm());
        }
    }
    Ok(ConservationReport { sum_drift, beta_drift })
}

/// Drift of the conjugation invariants {tr G_i, tr G_i G_j} of the monodromy
/// across sampled trajectory states: endpoints plus one interior state per
/// 0.5 units of arc length.
pub fn isomonodromy_check(traj: &Trajectory, tol: f64) -> Result<f64, SchlesingerError> {
    if traj.samples.is_empty() {
        return Err(SchlesingerError::EmptyTrajectory);
    }
    if traj.samples.len() == 1 {
        return Ok(0.0);
    }
    let total = traj.samples.last().unwrap().s;
    let n_interior = (total / 0.5).ceil() as usize;
    let mut targets = vec![0.0];
    for k in 1..=n_interior {
        targets.push(total * (k as f64) / ((n_interior + 1) as f64));
    }
    targets.push(total);

    // One shared basepoint keeps the generators comparable across states.
    let base_family = traj.initial().to_family()?;
    let z0 = fuchsian::standard_basepoint(&base_family);

    let mut reference: Option<Vec<Complex64>> = None;
    let mut drift = 0.0f64;
    for target in targets {
        let sample = traj
            .samples
            .iter()
            .min_by(|a, b| {
                (a.s - target)
                    .abs()
                    .partial_cmp(&(b.s - target).abs())
                    .unwrap()
            })
            .unwrap();
        let family = sample.state().to_family()?;
        let rep = fuchsian::monodromy(&family, Some(z0), tol)?;
        let mut invariants = Vec::new();
        for g in &rep.generators {
            invariants.push(g.trace());
        }
        for i in 0..rep.generators.len() {
            for j in (i + 1)..rep.generators.len() {
                invariants.push((rep.generators[i] * rep.generators[j]).trace());
            }
        }
        match &reference {
            None => reference = Some(invariants),
            Some(base) => {
                for (v, v0) in invariants.iter().zip(base) {
                    drift = drift.max((v - v0).norm());
                }
            }
        }
    }
    Ok(drift)
}

/// Residual of the differential identity for b(a) along the trajectory:
/// with sum B_i = diag(theta, -theta), the flow must satisfy
/// db = (2 theta + 1) sum_{moving i} b_i^{12} da_i.
///
/// The right side is integrated alongside the flow at the same tolerance;
/// the returned value is the largest per-step mismatch divided by the step.
pub fn lemma1_residual(traj: &Trajectory, tol: f64) -> Result<f64, SchlesingerError> {
    let state0 = traj.initial();
    let sum0 = state0.residue_sum();
    let offdiag = sum0.b.norm().max(sum0.c.norm());
    if offdiag > 1e-10 * state0.max_residue_norm().max(1.0) {
        return Err(SchlesingerError::NonDiagonalSum(offdiag));
    }
    let theta = sum0.a;
    let factor = 2.0 * theta + 1.0;

    let n = state0.n();
    let dim = 4 * (n + 2);
    let mut residual = 0.0f64;
    let mut y = Vec::new();
    pack(&state0.residues, &mut y);
    y.push(ZERO); // quadrature accumulator for the right side

    let path = &traj.path;
    for (k, seg) in path.segments.iter().enumerate() {
        let a0 = path.segment_start(k);
        let seg_len = seg.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if seg_len == 0.0 {
            continue;
        }
        let position = |t: f64| -> Vec<Complex64> {
            a0.iter().zip(seg).map(|(a, d)| a + d * t).collect()
        };
        let mut rhs = |t: f64, y: &[Complex64], dy: &mut [Complex64]| {
            let state = SchlesingerState {
                moving: position(t),
                residues: unpack(&y[..dim]),
            };
            let der = schlesinger_rhs(&state, seg).expect("validated path");
            let mut idx = 0;
            for d in &der {
                dy[idx] = d.a;
                dy[idx + 1] = d.b;
                dy[idx + 2] = d.c;
                dy[idx + 3] = d.d;
                idx += 4;
            }
            let mut q = ZERO;
            for i in 0..n {
                q += state.residues[i].b * seg[i];
            }
            dy[idx] = q * factor;
        };
        let mut prev: Option<(f64, Complex64, Complex64)> = None;
        let mut observer = |t: f64, y: &[Complex64]| {
            let state = SchlesingerState {
                moving: position(t),
                residues: unpack(&y[..dim]),
            };
            let b = state.coeff_b();
            let acc = y[dim];
            if let Some((tp, bp, accp)) = prev {
                let h = (t - tp) * seg_len;
                if h > 1e-12 {
                    residual = residual.max(((b - bp) - (acc - accp)).norm() / h);
                }
            }
            prev = Some((t, b, acc));
        };
        let opts = OdeOptions::with_tol(tol * seg_len).blowup(1e12);
        y = ode::integrate(&mut rhs, 0.0, 1.0, &y, &opts, &mut observer)?;
    }
    Ok(residual)
}

/// Lower bound on the sum of pole orders of residue entries at a point of
/// the polar locus, for a family with n moving points (n+3 singular points
/// in total): 2 - (n+3), sharpened to 3 - (n+3) when n+3 is odd.
pub fn theorem1_bound(n: usize) -> i64 {
    let total = n as i64 + 3;
    if total % 2 == 1 {
        3 - total
    } else {
        2 - total
    }
}

#[derive(Clone, Debug)]
pub struct Theorem1Verdict {
    pub event: PoleEvent,
    pub bound: i64,
    pub pass: bool,
}

/// Check detected pole events of residue entries against the order bound.
/// Indeterminate or orderless events pass vacuously; they are distinguished
/// by the event's `determinate` flag.
pub fn theorem1_check(events: &[PoleEvent], n: usize) -> Vec<Theorem1Verdict> {
    let bound = theorem1_bound(n);
    events
        .iter()
        .map(|ev| {
            let pass = match ev.order {
                Some(ord) if ev.determinate => ord >= bound,
                _ => true,
            };
            Theorem1Verdict {
                event: ev.clone(),
                bound,
                pass,
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

    fn random_sl2(seed: &mut u64) -> Mat2 {
        let mut next = || {
            *seed ^= *seed << 13;
            *seed ^= *seed >> 7;
            *seed ^= *seed << 17;
            ((*seed >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let a = c(next(), next());
        let b = c(next(), next());
        let cc = c(next(), next());
        Mat2::new(a, b, cc, -a)
    }

    fn random_state(n: usize, seed: u64) -> SchlesingerState {
        let mut s = seed | 1;
        let mut residues: Vec<Mat2> = (0..n + 2).map(|_| random_sl2(&mut s)).collect();
        let mut sum = Mat2::zero();
        for b in &residues {
            sum += *b;
        }
        let last = residues.len() - 1;
        residues[last].b -= sum.b;
        residues[last].c -= sum.c;
        let moving: Vec<Complex64> = (0..n)
            .map(|k| c(-1.2 - 0.9 * k as f64, 0.7 + 0.4 * k as f64))
            .collect();
        SchlesingerState::new(moving, residues).unwrap()
    }

    #[test]
    fn rhs_commuting_residues_vanish() {
        let t1 = c(0.2, 0.1);
        let t2 = c(-0.4, 0.3);
        let t3 = c(0.1, -0.2);
        let st = SchlesingerState::new(
            vec![c(2.0, 0.5)],
            vec![Mat2::diag(t1, -t1), Mat2::diag(t2, -t2), Mat2::diag(t3, -t3)],
        )
        .unwrap();
        let d = schlesinger_rhs(&st, &[c(1.0, 0.3)]).unwrap();
        for m in d {
            assert_eq!(m, Mat2::zero());
        }
    }

    #[test]
    fn rhs_zero_displacement_is_zero() {
        let st = random_state(1, 42);
        let d = schlesinger_rhs(&st, &[ZERO]).unwrap();
        for m in d {
            assert!(m.norm_max() == 0.0);
        }
    }

    #[test]
    fn rhs_matches_hand_formula_n1() {
        let st = random_state(1, 7);
        let a1 = st.moving[0];
        let (b1, b2, b3) = (st.residues[0], st.residues[1], st.residues[2]);
        let d = schlesinger_rhs(&st, &[ONE]).unwrap();
        let expect1 =
            b1.commutator(&b2).scale(-ONE / a1) + b1.commutator(&b3).scale(-ONE / (a1 - ONE));
        assert!((d[0] - expect1).norm_max() < 1e-14);
        // the residue at 0 feels d(a_2 - a_1) = -da_1
        let expect2 = b2.commutator(&b1).scale(-ONE / a1);
        assert!((d[1] - expect2).norm_max() < 1e-14);
    }

    #[test]
    fn rhs_total_is_zero() {
        for seed in [3u64, 11, 29] {
            let st = random_state(2, seed);
            let d = schlesinger_rhs(&st, &[c(0.7, -0.2), c(-0.1, 0.9)]).unwrap();
            let mut sum = Mat2::zero();
            for m in d {
                sum += m;
            }
            assert!(sum.norm_max() < 1e-12, "sum {:?}", sum);
        }
    }

    #[test]
    fn second_derivative_matches_finite_difference() {
        let st = random_state(2, 55);
        let dir = [c(0.6, -0.4), c(-0.3, 0.2)];
        let (_, d2) = rhs_with_second(&st, &dir).unwrap();
        // central differences of the first derivative along the line
        let h = 1e-5;
        let advance = |t: f64| {
            let shifted = flow_segment(
                &st,
                &dir.iter().map(|d| d * t).collect::<Vec<_>>(),
                1e-12,
            )
            .unwrap();
            schlesinger_rhs(&shifted, &dir).unwrap()
        };
        let plus = advance(h);
        let minus = advance(-h);
        for ((p, m), d2_i) in plus.iter().zip(&minus).zip(&d2) {
            let fd = (*p - *m).scale(c(1.0 / (2.0 * h), 0.0));
            assert!((fd - *d2_i).norm_max() < 1e-5, "{:?} vs {:?}", fd, d2_i);
        }
    }

    #[test]
    fn flow_commuting_residues_constant() {
        let t1 = c(0.2, 0.1);
        let t2 = c(-0.4, 0.3);
        let t3 = c(0.1, -0.2);
        let st = SchlesingerState::new(
            vec![c(2.0, 0.5)],
            vec![Mat2::diag(t1, -t1), Mat2::diag(t2, -t2), Mat2::diag(t3, -t3)],
        )
        .unwrap();
        let path = DeformationPath::straight(st.moving.clone(), vec![c(0.8, -0.6)]);
        let out = integrate_flow(&st, &path, 1e-10).unwrap();
        assert!(out.events.is_empty());
        for s in &out.trajectory.samples {
            for (b, b0) in s.residues.iter().zip(&st.residues) {
                assert!((*b - *b0).norm_max() < 1e-12);
            }
        }
    }

    #[test]
    fn flow_zero_length_path() {
        let st = random_state(1, 5);
        let path = DeformationPath::new(st.moving.clone(), vec![]);
        let out = integrate_flow(&st, &path, 1e-10).unwrap();
        assert_eq!(out.trajectory.samples.len(), 1);
        assert!(out.events.is_empty());
    }

    #[test]
    fn flow_step_halving_consistency() {
        let st = random_state(1, 91);
        let path = DeformationPath::straight(st.moving.clone(), vec![c(0.5, 0.25)]);
        let tol = 1e-8;
        let coarse = integrate_flow(&st, &path, tol).unwrap();
        let fine = integrate_flow(&st, &path, tol / 16.0).unwrap();
        let finest = integrate_flow(&st, &path, tol / 256.0).unwrap();
        let dist = |x: &SchlesingerState, y: &SchlesingerState| {
            x.residues
                .iter()
                .zip(&y.residues)
                .map(|(a, b)| (*a - *b).norm_max())
                .fold(0.0, f64::max)
        };
        let d_coarse = dist(&coarse.trajectory.last(), &finest.trajectory.last());
        let d_fine = dist(&fine.trajectory.last(), &finest.trajectory.last());
        assert!(d_coarse < 10.0 * tol, "coarse deviation {d_coarse}");
        assert!(d_fine < d_coarse, "no improvement: {d_fine} vs {d_coarse}");
    }

    #[test]
    fn conservation_on_random_flow() {
        let st = random_state(2, 1234);
        let path =
            DeformationPath::straight(st.moving.clone(), vec![c(0.4, -0.3), c(-0.35, 0.2)]);
        let out = integrate_flow(&st, &path, 1e-10).unwrap();
        let report = conservation_report(&out.trajectory).unwrap();
        assert!(report.sum_drift < 1e-8, "sum drift {}", report.sum_drift);
        assert!(report.beta_drift < 1e-8, "beta drift {}", report.beta_drift);
    }

    #[test]
    fn conservation_single_state() {
        let st = random_state(1, 8);
        let traj = Trajectory {
            path: DeformationPath::new(st.moving.clone(), vec![]),
            samples: vec![FlowSample {
                s: 0.0,
                moving: st.moving.clone(),
                residues: st.residues.clone(),
            }],
        };
        let report = conservation_report(&traj).unwrap();
        assert_eq!(report.sum_drift, 0.0);
        assert_eq!(report.beta_drift, 0.0);
    }

    #[test]
    fn lemma1_commuting_diagonal_zero() {
        let t1 = c(0.2, 0.0);
        let t2 = c(-0.4, 0.0);
        let t3 = c(0.3, 0.0);
        let st = SchlesingerState::new(
            vec![c(2.0, 0.5)],
            vec![Mat2::diag(t1, -t1), Mat2::diag(t2, -t2), Mat2::diag(t3, -t3)],
        )
        .unwrap();
        let path = DeformationPath::straight(st.moving.clone(), vec![c(0.6, -0.2)]);
        let out = integrate_flow(&st, &path, 1e-10).unwrap();
        let res = lemma1_residual(&out.trajectory, 1e-10).unwrap();
        assert!(res < 1e-12, "residual {res}");
    }

    #[test]
    fn lemma1_random_n2() {
        let st = random_state(2, 77);
        let path =
            DeformationPath::straight(st.moving.clone(), vec![c(0.45, -0.3), c(-0.25, 0.35)]);
        let out = integrate_flow(&st, &path, 1e-10).unwrap();
        let res = lemma1_residual(&out.trajectory, 1e-10).unwrap();
        assert!(res < 1e-8, "residual {res}");
    }

    #[test]
    fn lemma1_requires_diagonal_sum() {
        let mut st = random_state(1, 3);
        st.residues[0].b += c(0.5, 0.0);
        let traj = Trajectory {
            path: DeformationPath::new(st.moving.clone(), vec![]),
            samples: vec![FlowSample {
                s: 0.0,
                moving: st.moving.clone(),
                residues: st.residues.clone(),
            }],
        };
        assert!(matches!(
            lemma1_residual(&traj, 1e-10),
            Err(SchlesingerError::NonDiagonalSum(_))
        ));
    }

    #[test]
    fn isomonodromy_commuting_diagonal() {
        let t1 = c(0.21, 0.0);
        let t2 = c(-0.13, 0.0);
        let t3 = c(0.17, 0.0);
        let st = SchlesingerState::new(
            vec![c(-1.5, 0.8)],
            vec![Mat2::diag(t1, -t1), Mat2::diag(t2, -t2), Mat2::diag(t3, -t3)],
        )
        .unwrap();
        let path = DeformationPath::straight(st.moving.clone(), vec![c(0.5, -0.3)]);
        let out = integrate_flow(&st, &path, 1e-10).unwrap();
        let drift = isomonodromy_check(&out.trajectory, 1e-9).unwrap();
        assert!(drift < 1e-8, "drift {drift}");
    }

    #[test]
    fn isomonodromy_random_n2() {
        let st = random_state(2, 2024);
        let path =
            DeformationPath::straight(st.moving.clone(), vec![c(0.3, -0.2), c(-0.2, 0.25)]);
        let out = integrate_flow(&st, &path, 1e-10).unwrap();
        let drift = isomonodromy_check(&out.trajectory, 1e-9).unwrap();
        assert!(drift < 1e-6, "drift {drift}");
    }

    #[test]
    fn theorem1_bounds() {
        assert_eq!(theorem1_bound(1), -2); // four singular points
        assert_eq!(theorem1_bound(2), -2); // five (odd) singular points
        assert_eq!(theorem1_bound(3), -4);
        let ev = |order: i64| PoleEvent {
            quantity: "B".into(),
            location: ZERO,
            order: Some(order),
            residual: 0.01,
            determinate: true,
        };
        let verdicts = theorem1_check(&[ev(-1), ev(-2), ev(-3), ev(0)], 1);
        assert!(verdicts[0].pass);
        assert!(verdicts[1].pass);
        assert!(!verdicts[2].pass);
        assert!(verdicts[3].pass); // vacuous
    }

    #[test]
    fn path_collision_detection() {
        // a_1 passes through the fixed point 1
        let path = DeformationPath::straight(vec![c(2.0, 0.0)], vec![c(-2.0, 0.0)]);
        assert!(matches!(
            path.validate(path.default_clearance()),
            Err(SchlesingerError::Collision { .. })
        ));
    }
}
