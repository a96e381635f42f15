//! Direct and poly-space stepping discretize the same process: drive both
//! with the same Brownian increments and watch the pathwise gap shrink as
//! dt is refined.
//!
//! ```bash
//! cargo run --release --example cross_scheme
//! ```

use noncolliding::integrate::{simulate, Scheme, StepControl};
use noncolliding::rng::NoisePath;
use noncolliding::sympoly::ChamberPoint;
use noncolliding::{build_preset, PresetParams};

fn main() {
    let cs = build_preset(PresetParams::DysonCepa { gamma: 1.0 }, 3).unwrap();
    let x0 = ChamberPoint::new(vec![-1.0, 0.0, 1.0]).unwrap();
    let n_paths = 50;

    println!("dt        mean sup |direct - poly|");
    let mut prev: Option<f64> = None;
    for dt in [1e-3, 5e-4, 2.5e-4, 1.25e-4] {
        let mut total = 0.0;
        for k in 0..n_paths {
            let noise = || NoisePath::from_seed(0xE7).substream(k);
            let d = simulate(
                &cs,
                &x0,
                0.5,
                &StepControl::new(dt).with_scheme(Scheme::Direct),
                noise(),
            )
            .unwrap();
            let q = simulate(
                &cs,
                &x0,
                0.5,
                &StepControl::new(dt).with_scheme(Scheme::PolySpace),
                noise(),
            )
            .unwrap();
            let mut sup: f64 = 0.0;
            for (a, b) in d.states.iter().zip(&q.states) {
                for (u, v) in a.coords().iter().zip(b.coords()) {
                    sup = sup.max((u - v).abs());
                }
            }
            total += sup;
        }
        let mean = total / n_paths as f64;
        match prev {
            None => println!("{dt:8.1e}  {mean:.6e}"),
            Some(p) => println!("{dt:8.1e}  {mean:.6e}   (ratio {:.3})", p / mean),
        }
        prev = Some(mean);
    }
}
