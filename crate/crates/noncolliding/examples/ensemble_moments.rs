//! Closed-form moment laws as ensemble checks: the squared radius of a
//! constant-repulsion system grows at rate p + gamma p (p - 1) and the
//! Wishart trace at rate beta p alpha, both exactly.
//!
//! ```bash
//! cargo run --release --example ensemble_moments
//! ```

use noncolliding::analysis::moment_report;
use noncolliding::integrate::{simulate_ensemble, StepControl};
use noncolliding::sympoly::ChamberPoint;
use noncolliding::{build_preset, PresetParams};

fn main() {
    let mut ctl = StepControl::new(1e-3);
    ctl.sample_every = 200;
    ctl.workers = 4;
    let n_paths = 2000;

    let dyson = build_preset(PresetParams::DysonCepa { gamma: 1.0 }, 4).unwrap();
    let stats = simulate_ensemble(&dyson, &ChamberPoint::zero(4), 1.0, &ctl, n_paths, 21).unwrap();
    let rep = moment_report(&stats, &dyson, 1.0).unwrap();
    println!(
        "dyson p=4 from 0:   E[sum x^2](1) = {:.4} +- {:.4}, predicted {} (z = {:+.2})",
        rep.empirical_mean, rep.stderr, rep.predicted, rep.z_score
    );

    let wishart = build_preset(
        PresetParams::BetaWishart {
            alpha: 3.0,
            beta: 1.0,
        },
        3,
    )
    .unwrap();
    let stats =
        simulate_ensemble(&wishart, &ChamberPoint::zero(3), 1.0, &ctl, n_paths, 22).unwrap();
    let rep = moment_report(&stats, &wishart, 1.0).unwrap();
    println!(
        "wishart p=3 from 0: E[sum x](1)   = {:.4} +- {:.4}, predicted {} (z = {:+.2})",
        rep.empirical_mean, rep.stderr, rep.predicted, rep.z_score
    );

    println!("\nper-time mean of the squared radius (dyson run):");
    let stats = simulate_ensemble(&dyson, &ChamberPoint::zero(4), 1.0, &ctl, 500, 23).unwrap();
    for (t, m) in stats.times.iter().zip(&stats.r_sq.mean) {
        println!("   t = {t:4.2}: {m:8.4}  (predicted {:8.4})", 16.0 * t);
    }
}
