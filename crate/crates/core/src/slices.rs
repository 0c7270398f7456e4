//! Complex one-dimensional slices through the deformation space: evaluation
//! of the continued solution at arbitrary slice parameters, Newton location
//! of zeros and poles, and argument-principle pole events on circles.
//!
//! A slice is the complex line a(zeta) = a0 + zeta * dir. States are reached
//! by continuing the flow from the nearest previously visited point, so
//! walking a circle around a singularity stays on short, well-conditioned
//! arcs and never integrates through the singular point itself.

use crate::contour::{self, ContourError};
use crate::schlesinger::{
    flow_segment, PoleEvent, SchlesingerError, SchlesingerState,
};
use num_complex::Complex64;
use std::cell::RefCell;
use thiserror::Error;

const C_ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Error)]
pub enum SliceError {
    #[error("newton iteration did not converge near {0}")]
    NewtonStalled(Complex64),
    #[error("quantity index out of range: {0}")]
    BadQuantity(String),
    #[error(transparent)]
    Flow(#[from] SchlesingerError),
    #[error(transparent)]
    Contour(#[from] ContourError),
    #[error(transparent)]
    Garnier(#[from] crate::garnier::GarnierError),
}

/// A quantity evaluated along a slice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SliceQuantity {
    /// The leading coefficient b(a).
    CoeffB,
    /// f_k (0-based index).
    LittleF(usize),
    /// F_k = (-1)^k f_k / b (0-based index).
    BigF(usize),
    /// u for n = 1 (the single root -f_1/b).
    U1,
    /// Entry (row, col) of residue i.
    ResidueEntry(usize, usize, usize),
}

impl SliceQuantity {
    pub fn name(&self) -> String {
        match self {
            SliceQuantity::CoeffB => "b".into(),
            SliceQuantity::LittleF(k) => format!("f_{}", k + 1),
            SliceQuantity::BigF(k) => format!("F_{}", k + 1),
            SliceQuantity::U1 => "u".into(),
            SliceQuantity::ResidueEntry(i, r, c) => format!("B_{}[{}][{}]", i + 1, r, c),
        }
    }
}

/// The complex line a(zeta) = base + zeta * direction with cached flow
/// continuations.
pub struct LineSlice {
    base: SchlesingerState,
    direction: Vec<Complex64>,
    tol: f64,
    cache: RefCell<Vec<(Complex64, SchlesingerState)>>,
}

const CACHE_CAP: usize = 512;

impl LineSlice {
    pub fn new(base: SchlesingerState, direction: Vec<Complex64>, tol: f64) -> Self {
        assert_eq!(base.n(), direction.len());
        LineSlice {
            base,
            direction,
            tol,
            cache: RefCell::new(Vec::new()),
        }
    }

    pub fn direction(&self) -> &[Complex64] {
        &self.direction
    }

    pub fn base(&self) -> &SchlesingerState {
        &self.base
    }

    pub fn clear_cache(&self) {
        self.cache.borrow_mut().clear();
    }

    fn nearest_cached(&self, zeta: Complex64) -> (Complex64, SchlesingerState) {
        let cache = self.cache.borrow();
        let mut best: Option<(f64, usize)> = None;
        for (i, (z, _)) in cache.iter().enumerate() {
            let d = (z - zeta).norm();
            if best.map_or(true, |(bd, _)| d < bd) {
                best = Some((d, i));
            }
        }
        match best {
            Some((d, i)) if d <= zeta.norm() => {
                let (z, s) = &cache[i];
                (*z, s.clone())
            }
            _ => (Complex64::new(0.0, 0.0), self.base.clone()),
        }
    }

    fn remember(&self, zeta: Complex64, state: &SchlesingerState) {
        let mut cache = self.cache.borrow_mut();
        if cache.len() >= CACHE_CAP {
            cache.drain(..CACHE_CAP / 2);
        }
        cache.push((zeta, state.clone()));
    }

    /// State of the continued solution at slice parameter `zeta`, reached
    /// from the nearest visited point (or the base) by a straight segment.
    pub fn state_at(&self, zeta: Complex64) -> Result<SchlesingerState, SliceError> {
        let (z0, from) = self.nearest_cached(zeta);
        let dz = zeta - z0;
        let displacement: Vec<Complex64> = self.direction.iter().map(|d| d * dz).collect();
        match flow_segment(&from, &displacement, self.tol) {
            Ok(state) => {
                self.remember(zeta, &state);
                Ok(state)
            }
            Err(first_err) => {
                // retry from the base point before giving up
                if z0.norm() > 0.0 {
                    let displacement: Vec<Complex64> =
                        self.direction.iter().map(|d| d * zeta).collect();
                    if let Ok(state) = flow_segment(&self.base, &displacement, self.tol) {
                        self.remember(zeta, &state);
                        return Ok(state);
                    }
                }
                Err(first_err.into())
            }
        }
    }

    /// Evaluate a quantity at `zeta`.
    pub fn value_at(&self, q: SliceQuantity, zeta: Complex64) -> Result<Complex64, SliceError> {
        let state = self.state_at(zeta)?;
        quantity_value(&state, q)
    }

    /// Value and slice derivative of a quantity at `zeta`, from the flow
    /// derivatives (exact, no finite differences).
    pub fn jet_at(
        &self,
        q: SliceQuantity,
        zeta: Complex64,
    ) -> Result<(Complex64, Complex64), SliceError> {
        let state = self.state_at(zeta)?;
        quantity_jet(&state, &self.direction, q)
    }
}

fn quantity_value(state: &SchlesingerState, q: SliceQuantity) -> Result<Complex64, SliceError> {
    let n = state.n();
    match q {
        SliceQuantity::CoeffB => Ok(state.coeff_b()),
        SliceQuantity::LittleF(k) | SliceQuantity::BigF(k) if k >= n => {
            Err(SliceError::BadQuantity(format!("f index {k} for n = {n}")))
        }
        SliceQuantity::LittleF(k) => {
            let (_, f) = crate::garnier::pn_coefficients(state)?;
            Ok(f[k])
        }
        SliceQuantity::BigF(k) => {
            let (b, f) = crate::garnier::pn_coefficients(state)?;
            let sign = if (k + 1) % 2 == 0 { 1.0 } else { -1.0 };
            Ok(sign * f[k] / b)
        }
        SliceQuantity::U1 => {
            if n != 1 {
                return Err(SliceError::BadQuantity(format!("u as a rational quantity needs n = 1, got {n}")));
            }
            let (b, f) = crate::garnier::pn_coefficients(state)?;
            Ok(-f[0] / b)
        }
        SliceQuantity::ResidueEntry(i, r, c) => {
            if i >= state.residues.len() || r > 1 || c > 1 {
                return Err(SliceError::BadQuantity(format!("residue entry ({i},{r},{c})")));
            }
            Ok(state.residues[i].entry(r, c))
        }
    }
}

fn quantity_jet(
    state: &SchlesingerState,
    dir: &[Complex64],
    q: SliceQuantity,
) -> Result<(Complex64, Complex64), SliceError> {
    match q {
        SliceQuantity::ResidueEntry(i, r, c) => {
            let der = crate::schlesinger::schlesinger_rhs(state, dir)?;
            Ok((state.residues[i].entry(r, c), der[i].entry(r, c)))
        }
        _ => {
            let (bj, fj) = crate::garnier::coeff_jet2(state, dir)?;
            match q {
                SliceQuantity::CoeffB => Ok((bj[0], bj[1])),
                SliceQuantity::LittleF(k) => Ok((fj[k][0], fj[k][1])),
                SliceQuantity::BigF(k) => {
                    let sign = if (k + 1) % 2 == 0 { C_ONE } else { -C_ONE };
                    let value = sign * fj[k][0] / bj[0];
                    let deriv = sign * (fj[k][1] * bj[0] - fj[k][0] * bj[1]) / (bj[0] * bj[0]);
                    Ok((value, deriv))
                }
                SliceQuantity::U1 => {
                    let value = -fj[0][0] / bj[0];
                    let deriv = (-fj[0][1] - value * bj[1]) / bj[0];
                    Ok((value, deriv))
                }
                SliceQuantity::ResidueEntry(..) => unreachable!(),
            }
        }
    }
}

/// Newton refinement of a zero of a holomorphic slice quantity.
pub fn newton_zero(
    slice: &LineSlice,
    q: SliceQuantity,
    guess: Complex64,
    scale: f64,
) -> Result<Complex64, SliceError> {
    let mut zeta = guess;
    for _ in 0..60 {
        let (value, deriv) = slice.jet_at(q, zeta)?;
        if deriv.norm() < 1e-300 {
            return Err(SliceError::NewtonStalled(zeta));
        }
        let step = value / deriv;
        zeta -= step;
        if step.norm() < 1e-13 * scale.max(1.0) {
            return Ok(zeta);
        }
    }
    Err(SliceError::NewtonStalled(zeta))
}

/// Newton location of a pole of a slice quantity w, i.e. a zero of 1/w:
/// zeta <- zeta + w/w'. Iterates approach the pole from outside; the search
/// stops when the step falls below `stop_dist` and returns the extrapolated
/// center with that step size as the uncertainty.
pub fn newton_pole(
    slice: &LineSlice,
    q: SliceQuantity,
    guess: Complex64,
    stop_dist: f64,
) -> Result<(Complex64, f64), SliceError> {
    let mut zeta = guess;
    let mut last_step = f64::INFINITY;
    for _ in 0..80 {
        let (value, deriv) = match slice.jet_at(q, zeta) {
            Ok(v) => v,
            Err(_) if last_step.is_finite() => {
                // too close to evaluate: accept the current estimate
                return Ok((zeta, last_step));
            }
            Err(e) => return Err(e),
        };
        if value.norm() < 1e-300 || deriv.norm() < 1e-300 {
            return Err(SliceError::NewtonStalled(zeta));
        }
        let step = value / deriv;
        if step.norm() < stop_dist {
            return Ok((zeta + step, step.norm()));
        }
        if step.norm() > 2.0 * last_step && last_step.is_finite() {
            // diverging; keep the previous estimate
            return Ok((zeta, last_step));
        }
        // damp the approach so evaluations stay off the pole
        zeta += step * 0.8;
        last_step = step.norm();
    }
    Err(SliceError::NewtonStalled(zeta))
}

/// Pre-walk a circle so later evaluations always continue from a short arc.
pub fn preseed_circle(
    slice: &LineSlice,
    center: Complex64,
    radius: f64,
    steps: usize,
) -> Result<(), SliceError> {
    // approach the circle radially from the outside
    let (z_near, _) = slice.nearest_cached(center + Complex64::new(radius, 0.0));
    let dir_out = {
        let d = z_near - center;
        if d.norm() < radius {
            // nearest point already inside the ring: approach from the base
            -center
        } else {
            d
        }
    };
    let dir_out = if dir_out.norm() == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        dir_out / dir_out.norm()
    };
    let phi0 = dir_out.arg();
    slice.state_at(center + dir_out * radius)?;
    for k in 1..=steps {
        let phi = phi0 + 2.0 * std::f64::consts::PI * k as f64 / steps as f64;
        slice.state_at(center + Complex64::from_polar(radius, phi))?;
    }
    Ok(())
}

/// Argument-principle pole event for a quantity on the circle around
/// `center`.
pub fn pole_event(
    slice: &LineSlice,
    q: SliceQuantity,
    center: Complex64,
    radius: f64,
    samples: usize,
) -> Result<PoleEvent, SliceError> {
    preseed_circle(slice, center, radius, 32)?;
    let mut eval = |zeta: Complex64| -> Result<Complex64, SliceError> { slice.value_at(q, zeta) };
    let est = contour::pole_order_on_circle(&mut eval, center, radius, samples)?;
    Ok(PoleEvent {
        quantity: q.name(),
        location: center,
        order: if est.determinate { Some(est.count) } else { None },
        residual: est.residual,
        determinate: est.determinate,
    })
}

/// Values of a quantity on a circle, counterclockwise, for winding-based
/// classification.
pub fn circle_samples(
    slice: &LineSlice,
    q: SliceQuantity,
    center: Complex64,
    radius: f64,
    samples: usize,
) -> Result<Vec<Complex64>, SliceError> {
    preseed_circle(slice, center, radius, 32)?;
    let mut out = Vec::with_capacity(samples);
    for k in 0..samples {
        let phi = 2.0 * std::f64::consts::PI * k as f64 / samples as f64;
        out.push(slice.value_at(q, center + Complex64::from_polar(radius, phi))?);
    }
    Ok(out)
}

/// Polar-grid scan returning candidate zeros (local minima of |w|) of a
/// holomorphic quantity, refined by Newton and de-duplicated.
pub fn find_zeros(
    slice: &LineSlice,
    q: SliceQuantity,
    radius: f64,
    rays: usize,
    steps: usize,
) -> Result<Vec<Complex64>, SliceError> {
    let mut samples: Vec<(Complex64, f64)> = Vec::new();
    for r in 0..rays {
        let phi = 2.0 * std::f64::consts::PI * (r as f64 + 0.35) / rays as f64;
        for s in 1..=steps {
            let zeta = Complex64::from_polar(radius * s as f64 / steps as f64, phi);
            if let Ok(v) = slice.value_at(q, zeta) {
                samples.push((zeta, v.norm()));
            }
        }
    }
    if samples.is_empty() {
        return Ok(Vec::new());
    }
    let median = {
        let mut v: Vec<f64> = samples.iter().map(|(_, g)| *g).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v[v.len() / 2]
    };
    samples.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    let mut zeros: Vec<Complex64> = Vec::new();
    for (zeta0, value) in samples.iter().take(10) {
        if *value > 0.7 * median {
            break;
        }
        let refined = match newton_zero(slice, q, *zeta0, radius) {
            Ok(z) => z,
            Err(_) => continue,
        };
        if refined.norm() > 1.25 * radius {
            continue;
        }
        if let Ok(v) = slice.value_at(q, refined) {
            if v.norm() < 1e-8 * median.max(1e-12)
                && zeros.iter().all(|z| (z - refined).norm() > 1e-6 * radius.max(1.0))
            {
                zeros.push(refined);
            }
        }
    }
    Ok(zeros)
}

/// Polar-grid scan for pole candidates of a quantity: local spikes of |w|
/// or outright evaluation failures, refined by the reciprocal Newton.
pub fn find_poles(
    slice: &LineSlice,
    q: SliceQuantity,
    radius: f64,
    rays: usize,
    steps: usize,
    stop_dist: f64,
) -> Result<Vec<(Complex64, f64)>, SliceError> {
    let mut samples: Vec<(Complex64, f64)> = Vec::new();
    let mut failures: Vec<Complex64> = Vec::new();
    for r in 0..rays {
        let phi = 2.0 * std::f64::consts::PI * (r as f64 + 0.15) / rays as f64;
        let mut failed = false;
        for s in 1..=steps {
            let zeta = Complex64::from_polar(radius * s as f64 / steps as f64, phi);
            match slice.value_at(q, zeta) {
                Ok(v) => samples.push((zeta, v.norm())),
                Err(_) => {
                    if !failed {
                        failures.push(zeta);
                        failed = true;
                    }
                }
            }
        }
        slice.clear_cache();
    }
    if samples.is_empty() && failures.is_empty() {
        return Ok(Vec::new());
    }
    let median = {
        let mut v: Vec<f64> = samples.iter().map(|(_, g)| *g).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if v.is_empty() {
            1.0
        } else {
            v[v.len() / 2]
        }
    };
    let mut seeds: Vec<Complex64> = failures;
    samples.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    for (zeta, value) in samples.iter().take(8) {
        if *value > 20.0 * median {
            seeds.push(*zeta);
        }
    }
    let mut poles: Vec<(Complex64, f64)> = Vec::new();
    for seed in seeds {
        let (center, uncertainty) = match newton_pole(slice, q, seed, stop_dist) {
            Ok(p) => p,
            Err(_) => continue,
        };
        if center.norm() > 1.3 * radius {
            continue;
        }
        if poles
            .iter()
            .all(|(z, _)| (z - center).norm() > 20.0 * stop_dist)
        {
            poles.push((center, uncertainty));
        }
    }
    Ok(poles)
}

/// Check that a zero of b on the slice is simple: the argument-principle
/// count of b on a small circle must be +1.
pub fn b_zero_is_simple(
    slice: &LineSlice,
    center: Complex64,
    radius: f64,
) -> Result<(bool, contour::OrderEstimate), SliceError> {
    preseed_circle(slice, center, radius, 32)?;
    let mut eval = |zeta: Complex64| -> Result<Complex64, SliceError> {
        slice.value_at(SliceQuantity::CoeffB, zeta)
    };
    let est = contour::pole_order_on_circle(&mut eval, center, radius, contour::DEFAULT_SAMPLES)?;
    Ok((est.determinate && est.count == 1, est))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randgen;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn slice_evaluation_matches_direct_flow() {
        let st = randgen::random_state(2, 5, None);
        let dir = vec![c(1.0, 0.0), c(-0.3, 0.5)];
        let slice = LineSlice::new(st.clone(), dir.clone(), 1e-11);
        let zeta = c(0.3, -0.2);
        let via_slice = slice.state_at(zeta).unwrap();
        let displacement: Vec<Complex64> = dir.iter().map(|d| d * zeta).collect();
        let direct = flow_segment(&st, &displacement, 1e-12).unwrap();
        for (a, b) in via_slice.residues.iter().zip(&direct.residues) {
            assert!((*a - *b).norm_max() < 1e-8);
        }
        // cached evaluation from a nearby point agrees too
        let zeta2 = zeta + c(0.05, 0.02);
        let via_cache = slice.state_at(zeta2).unwrap();
        let displacement2: Vec<Complex64> = dir.iter().map(|d| d * zeta2).collect();
        let direct2 = flow_segment(&st, &displacement2, 1e-12).unwrap();
        for (a, b) in via_cache.residues.iter().zip(&direct2.residues) {
            assert!((*a - *b).norm_max() < 1e-8);
        }
    }

    #[test]
    fn jet_derivative_matches_finite_difference() {
        let st = randgen::random_state(1, 9, None);
        let slice = LineSlice::new(st, vec![c(1.0, 0.0)], 1e-12);
        let zeta = c(0.12, 0.07);
        for q in [SliceQuantity::CoeffB, SliceQuantity::LittleF(0), SliceQuantity::U1] {
            let (v0, dv) = slice.jet_at(q, zeta).unwrap();
            let h = 1e-6;
            let vp = slice.value_at(q, zeta + h).unwrap();
            let vm = slice.value_at(q, zeta - h).unwrap();
            let fd = (vp - vm) / (2.0 * h);
            assert!(
                (fd - dv).norm() < 1e-5 * (1.0 + dv.norm()),
                "{q:?}: {fd} vs {dv}"
            );
            let _ = v0;
        }
    }

    #[test]
    fn newton_finds_b_zero_of_synthetic_slice() {
        // Find a state whose b(zeta) has a zero nearby by scanning a real
        // random family; b is holomorphic so Newton must converge fast.
        let st = randgen::random_state(1, 23, None);
        let slice = LineSlice::new(st, vec![c(1.0, 0.0)], 1e-11);
        let zeros = find_zeros(&slice, SliceQuantity::CoeffB, 1.0, 12, 10).unwrap();
        for z in &zeros {
            let v = slice.value_at(SliceQuantity::CoeffB, *z).unwrap();
            assert!(v.norm() < 1e-9, "|b| at refined zero = {:.3e}", v.norm());
        }
    }
}
