//! Second scratch probe: residue growth along n=1 alpha=0 slices, and
//! zero landscapes of terminating-series f for the kappa=0 construction.

use isl_core::garnier::ThetaParams;
use isl_core::lauricella::{self, LauricellaParams};
use isl_core::randgen;
use isl_core::slices::{LineSlice, SliceQuantity};
use isl_core::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn main() {
    println!("== residue growth, n=1, beta_inf=1/2 (alpha=0) ==");
    for seed in 0..6u64 {
        let st = randgen::random_state(1, seed, Some(c(0.5, 0.0)));
        let slice = LineSlice::new(st, vec![c(1.0, 0.0)], 1e-9);
        let mut max_norm = 0.0f64;
        let mut max_f1 = 0.0f64;
        let mut fails = 0;
        for r in 0..12 {
            let phi = 2.0 * std::f64::consts::PI * (r as f64 + 0.2) / 12.0;
            for s in 1..=16 {
                let zeta = Complex64::from_polar(2.0 * s as f64 / 16.0, phi);
                match slice.state_at(zeta) {
                    Ok(state) => {
                        max_norm = max_norm.max(state.max_residue_norm());
                        if let Ok(f1) = slice.value_at(SliceQuantity::LittleF(0), zeta) {
                            max_f1 = max_f1.max(f1.norm());
                        }
                    }
                    Err(_) => fails += 1,
                }
            }
            slice.clear_cache();
        }
        println!("seed {seed}: max|B| = {max_norm:.2e}, max|f1| = {max_f1:.2e}, fails = {fails}");
    }

    println!("== f zero landscape: terminating F_D (theta_1=-2, theta_2=-1) ==");
    let theta = {
        let t = vec![c(-2.0, 0.0), c(-1.0, 0.0), c(0.7, 0.0), c(0.8, 0.0)];
        let sum: Complex64 = t.iter().sum();
        ThetaParams::new(t, sum - c(1.0, 0.0))
    };
    println!("kappa = {}", theta.kappa());
    let params = lauricella::riccati_params(&theta).unwrap();
    println!(
        "E_D params: alpha={}, beta={:?}, gamma={}",
        params.alpha, params.beta, params.gamma
    );
    // scan |f| over a grid in s-space (real sections)
    let mut min_f = f64::INFINITY;
    let mut argmin = (0.0, 0.0);
    for i in -14..=14 {
        for j in -14..=14 {
            let s = [c(0.05 * i as f64, 0.0), c(0.05 * j as f64, 0.0)];
            if s[0].norm() > 0.69 || s[1].norm() > 0.69 {
                continue;
            }
            if let Ok(jet) = lauricella::fd_value(&params, &s, 1e-12) {
                if jet.f.norm() < min_f {
                    min_f = jet.f.norm();
                    argmin = (s[0].re, s[1].re);
                }
            }
        }
    }
    println!("min |f| on real grid = {min_f:.3e} at s = {argmin:?}");

    println!("== prop1 with terminating f, slices near the zero locus ==");
    // s* near argmin: pick a-space start so that s(a) ~ argmin:
    // s = a/(a-1) => a = s/(s-1)
    let s_target = [c(argmin.0, 0.05), c(argmin.1, -0.04)];
    let a_start: Vec<Complex64> = s_target.iter().map(|s| s / (s - c(1.0, 0.0))).collect();
    println!("a_start = {:?}", a_start);
    for (k, dir) in [
        [c(0.25, 0.1), c(-0.1, 0.2)],
        [c(0.15, -0.2), c(0.2, 0.1)],
        [c(-0.2, 0.15), c(0.1, 0.25)],
    ]
    .iter()
    .enumerate()
    {
        match lauricella::prop1_check(&a_start, dir, &theta, 0.6, 1e-12) {
            Ok(vs) => {
                print!("slice {k}: {} zeros", vs.len());
                for v in &vs {
                    print!(
                        " [f-ord={} F-orders={:?} pass={} ind={}]",
                        v.f_zero_order,
                        v.f_i_orders.iter().map(|o| o.count).collect::<Vec<_>>(),
                        v.pass,
                        v.indeterminate
                    );
                }
                println!();
            }
            Err(e) => println!("slice {k}: ERR {e}"),
        }
    }
}
