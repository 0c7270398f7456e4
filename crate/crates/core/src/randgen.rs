//! Seeded generation of random sl(2) deformation data for experiments.

use crate::mat2::Mat2;
use crate::schlesinger::SchlesingerState;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn sample_unit_square(rng: &mut ChaCha8Rng) -> Complex64 {
    // unit square centered at the origin
    c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
}

/// Moving points sampled in a box around the fixed points, kept apart from
/// one another and from 0 and 1.
pub fn random_points(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let mut pts: Vec<Complex64> = Vec::with_capacity(n);
    while pts.len() < n {
        let candidate = c(
            4.4 * (rng.gen::<f64>() - 0.5),
            3.6 * (rng.gen::<f64>() - 0.5),
        );
        let ok = candidate.norm() > 0.6
            && (candidate - c(1.0, 0.0)).norm() > 0.6
            && pts.iter().all(|p| (p - candidate).norm() > 0.7);
        if ok {
            pts.push(candidate);
        }
    }
    pts
}

/// Random trace-free residues with the residue sum forced diagonal by
/// adjusting the off-diagonal entries of the last residue; an optional
/// `beta_inf` pins the diagonal of the sum to diag(-beta_inf, beta_inf).
pub fn random_residues(
    count: usize,
    rng: &mut ChaCha8Rng,
    beta_inf: Option<Complex64>,
) -> Vec<Mat2> {
    let mut residues: Vec<Mat2> = (0..count)
        .map(|_| {
            let m = Mat2::new(
                sample_unit_square(rng),
                sample_unit_square(rng),
                sample_unit_square(rng),
                sample_unit_square(rng),
            );
            // project to trace-free
            let a = m.a - m.trace() * 0.5;
            Mat2::new(a, m.b, m.c, -a)
        })
        .collect();
    let mut sum = Mat2::zero();
    for r in &residues {
        sum += *r;
    }
    let last = residues.len() - 1;
    residues[last].b -= sum.b;
    residues[last].c -= sum.c;
    if let Some(beta_inf) = beta_inf {
        // want (sum residues).a = -beta_inf; the off-diagonal fix above does
        // not touch the diagonal
        let delta = -beta_inf - sum.a;
        residues[last].a += delta;
        residues[last].d -= delta;
    }
    residues
}

/// A full random state: points plus residues from one seed.
pub fn random_state(n: usize, seed: u64, beta_inf: Option<Complex64>) -> SchlesingerState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let moving = random_points(n, &mut rng);
    let residues = random_residues(n + 2, &mut rng, beta_inf);
    SchlesingerState::new(moving, residues).expect("generated dimensions are consistent")
}

/// Distance of 2 beta to the nearest integer, the resonance margin.
pub fn resonance_margin(state: &SchlesingerState) -> f64 {
    state
        .betas()
        .iter()
        .map(|beta| {
            let two = 2.0 * beta;
            let dist_re = (two.re - two.re.round()).abs();
            (dist_re.powi(2) + two.im.powi(2)).sqrt().min(
                // purely away from the real axis counts as non-resonant
                two.im.abs().max(dist_re),
            )
        })
        .fold(f64::INFINITY, f64::min)
}

/// First seed at or after `seed` whose state is non-resonant by `margin`.
pub fn random_nonresonant_state(
    n: usize,
    seed: u64,
    margin: f64,
    beta_inf: Option<Complex64>,
) -> (SchlesingerState, u64) {
    for s in seed..seed + 1000 {
        let state = random_state(n, s, beta_inf);
        if resonance_margin(&state) >= margin {
            return (state, s);
        }
    }
    panic!("no non-resonant state found in 1000 seeds from {seed}");
}
