//! Cross-validation against random matrices: the beta = 2 constant
//! repulsion system started from zero has the same eigenvalue law as a
//! Hermitian Brownian matrix, entry variances calibrated through
//! E[sum lambda^2] = t (p + gamma p (p - 1)).
//!
//! ```bash
//! cargo run --release --example matrix_oracle
//! ```

use noncolliding::analysis::{ks_distance, matrix_oracle};
use noncolliding::integrate::{simulate, StepControl};
use noncolliding::rng::NoisePath;
use noncolliding::sympoly::ChamberPoint;
use noncolliding::{build_preset, PresetParams};

fn main() {
    let p = 3;
    let n = 1500;
    // beta = 2 corresponds to gamma = beta / 2 = 1 with unit diffusion
    let cs = build_preset(PresetParams::DysonCepa { gamma: 1.0 }, p).unwrap();
    let mut ctl = StepControl::new(1e-3);
    ctl.sample_every = 1000;

    let base = NoisePath::from_seed(77);
    let mut sim_pool = Vec::with_capacity(p * n);
    let mut sim_tr = 0.0;
    for k in 0..n {
        let traj = simulate(
            &cs,
            &ChamberPoint::zero(p),
            1.0,
            &ctl,
            base.substream(k as u64),
        )
        .unwrap();
        let xs = traj.final_state().coords().to_vec();
        sim_tr += xs.iter().map(|v| v * v).sum::<f64>();
        sim_pool.extend(xs);
    }

    let oracle = matrix_oracle(2, p, 1.0, n, 78).unwrap();
    let mut oracle_pool = Vec::with_capacity(p * n);
    let mut oracle_tr = 0.0;
    for s in &oracle.samples {
        oracle_tr += s.iter().map(|v| v * v).sum::<f64>();
        oracle_pool.extend_from_slice(s);
    }

    println!(
        "E[sum lambda^2] at t = 1: simulated {:.3}, oracle {:.3}, closed form {}",
        sim_tr / n as f64,
        oracle_tr / n as f64,
        p + p * (p - 1)
    );
    let d = ks_distance(&sim_pool, &oracle_pool).unwrap();
    println!(
        "pooled-eigenvalue KS distance over {} values per side: {d:.4}",
        p * n
    );

    // a deliberately wrong repulsion strength is visibly off
    let wrong = build_preset(PresetParams::DysonCepa { gamma: 2.0 }, p).unwrap();
    let mut wrong_pool = Vec::with_capacity(p * n);
    for k in 0..n {
        let traj = simulate(
            &wrong,
            &ChamberPoint::zero(p),
            1.0,
            &ctl,
            base.substream(10_000 + k as u64),
        )
        .unwrap();
        wrong_pool.extend(traj.final_state().coords().to_vec());
    }
    let d_wrong = ks_distance(&wrong_pool, &oracle_pool).unwrap();
    println!("same test with gamma = 2 instead of 1:           {d_wrong:.4}");
}
