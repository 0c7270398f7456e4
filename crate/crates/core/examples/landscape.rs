//! Scratch experiment: how common are b-zeros, Theta crossings and f-zeros
//! on random slices at desk scale? Used to pick seeds for the test suite.

use isl_core::garnier::ThetaParams;
use isl_core::lauricella;
use isl_core::pvi;
use isl_core::randgen;
use isl_core::slices::{self, LineSlice, SliceQuantity};
use isl_core::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn main() {
    println!("== A: n=1 b-zeros (u-poles, alpha != 0) ==");
    let mut total_a = 0;
    for seed in 0..12u64 {
        let st = randgen::random_state(1, seed, None);
        let theta = ThetaParams::from_state(&st).unwrap();
        let slice = LineSlice::new(st, vec![c(1.0, 0.0)], 1e-10);
        let zeros = slices::find_zeros(&slice, SliceQuantity::CoeffB, 1.2, 16, 14)
            .unwrap_or_default();
        print!("seed {seed}: {} b-zeros", zeros.len());
        for z in &zeros {
            // f_1 there?
            let f1 = slice.value_at(SliceQuantity::LittleF(0), *z).unwrap();
            let samples = slices::circle_samples(&slice, SliceQuantity::U1, *z, 0.02, 256);
            match samples {
                Ok(s) => {
                    let p = pvi::params_from_theta(&theta).unwrap();
                    let class = pvi::classify_pole(&s, &p);
                    print!(
                        "  [z={:.3}{:+.3}i ord={} res={:.1e} |f1|={:.2e} cons={}]",
                        z.re, z.im, class.order, class.estimate.residual, f1.norm(),
                        class.consistent
                    );
                    total_a += 1;
                }
                Err(e) => print!("  [z={:.3}{:+.3}i sample-err {e}]", z.re, z.im),
            }
        }
        println!();
    }
    println!("total classified: {total_a}");

    println!("== B: n=1 Theta poles (alpha = 0, beta_inf = 1/2) ==");
    for seed in 0..12u64 {
        let st = randgen::random_state(1, seed, Some(c(0.5, 0.0)));
        let slice = LineSlice::new(st, vec![c(1.0, 0.0)], 1e-10);
        let poles = slices::find_poles(&slice, SliceQuantity::LittleF(0), 1.2, 16, 14, 2e-4)
            .unwrap_or_default();
        print!("seed {seed}: {} f1-poles", poles.len());
        for (z, unc) in &poles {
            let samples = slices::circle_samples(&slice, SliceQuantity::U1, *z, (10.0*unc).max(0.01), 256);
            match samples {
                Ok(s) => {
                    let est = isl_core::contour::winding_from_samples(&s);
                    print!("  [z={:.3}{:+.3}i unc={:.1e} u-count={} res={:.2}]", z.re, z.im, unc, est.count, est.residual);
                }
                Err(e) => print!("  [z={:.3}{:+.3}i ERR {}]", z.re, z.im, truncate(&e.to_string())),
            }
        }
        println!();
    }

    println!("== C: n=2 slices, F_i pole events at b-zeros ==");
    let mut events = 0;
    for seed in 0..10u64 {
        let st = randgen::random_state(2, seed, None);
        let dir = vec![c(1.0, 0.23), c(-0.41, 0.87)];
        let slice = LineSlice::new(st, dir, 1e-10);
        let zeros = slices::find_zeros(&slice, SliceQuantity::CoeffB, 0.9, 14, 12)
            .unwrap_or_default();
        print!("seed {seed}: {} b-zeros ", zeros.len());
        for z in &zeros {
            for k in 0..2 {
                match slices::pole_event(&slice, SliceQuantity::BigF(k), *z, 0.015, 192) {
                    Ok(ev) => {
                        print!(" [F{} ord={:?} res={:.1e}]", k + 1, ev.order, ev.residual);
                        events += 1;
                    }
                    Err(e) => print!(" [F{} ERR {}]", k + 1, truncate(&e.to_string())),
                }
            }
        }
        println!();
    }
    println!("F_i events total: {events}");

    println!("== C2: n=2 Theta poles of b ==");
    for seed in 0..6u64 {
        let st = randgen::random_state(2, seed, None);
        let dir = vec![c(1.0, 0.23), c(-0.41, 0.87)];
        let slice = LineSlice::new(st, dir, 1e-10);
        let poles = slices::find_poles(&slice, SliceQuantity::CoeffB, 0.9, 12, 12, 2e-4)
            .unwrap_or_default();
        print!("seed {seed}: {} b-poles", poles.len());
        for (z, unc) in &poles {
            print!(" [z={:.3}{:+.3}i unc={:.1e}", z.re, z.im, unc);
            match slices::pole_event(&slice, SliceQuantity::BigF(0), *z, (20.0*unc).max(0.012), 192) {
                Ok(ev) => print!(" F1 ord={:?} res={:.1e}]", ev.order, ev.residual),
                Err(e) => print!(" F1 ERR {}]", truncate(&e.to_string())),
            }
        }
        println!();
    }

    println!("== D: kappa=0 zeros of f on slices (n=2) ==");
    for trial in 0..8u64 {
        let t = 0.13 * trial as f64;
        let theta = ThetaParams::new(
            vec![
                c(0.35 + 0.1 * t, 0.1),
                c(0.42 - 0.07 * t, -0.15),
                c(0.27 + 0.05 * t, 0.2),
                c(0.55 - 0.1 * t, -0.08),
            ],
            c(0.0, 0.0),
        );
        let theta = ThetaParams::new(theta.theta.clone(), theta.theta_sum() - c(1.0, 0.0));
        let start = [c(0.21, 0.13), c(-0.17, 0.11)];
        let dir = [c(0.31, 0.21), c(-0.12, 0.33)];
        match lauricella::prop1_check(&start, &dir, &theta, 0.75, 1e-12) {
            Ok(verdicts) => {
                print!("trial {trial}: {} zeros", verdicts.len());
                for v in &verdicts {
                    print!(
                        " [zeta={:.3}{:+.3}i f-ord={} orders={:?} pass={}]",
                        v.location.re,
                        v.location.im,
                        v.f_zero_order,
                        v.f_i_orders.iter().map(|o| o.count).collect::<Vec<_>>(),
                        v.pass
                    );
                }
                println!();
            }
            Err(e) => println!("trial {trial}: ERR {}", truncate(&e.to_string())),
        }
    }
}

fn truncate(s: &str) -> String {
    s.chars().take(60).collect()
}
