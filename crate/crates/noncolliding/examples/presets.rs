//! Tour of the preset particle families and their coefficient functions.
//!
//! ```bash
//! cargo run --release --example presets
//! ```

use noncolliding::conditions::check_preset;
use noncolliding::{build_preset, PresetParams};

fn main() {
    let p = 3;
    let presets = vec![
        PresetParams::DysonCepa { gamma: 1.0 },
        PresetParams::NearestNeighbor { gamma: 0.75 },
        PresetParams::BetaWishart {
            alpha: 3.0,
            beta: 1.0,
        },
        PresetParams::BetaWishartAbs {
            alpha: 1.5,
            beta: 1.0,
        },
        PresetParams::Jacobi {
            q: 2.0,
            r: 2.0,
            beta: 1.0,
        },
        PresetParams::Hyperbolic { gamma: 1.0 },
    ];

    for params in presets {
        let cs = build_preset(params, p).unwrap();
        let name = cs.preset.as_ref().unwrap().name().to_string();
        println!("== {name} (p = {p}, domain {:?})", cs.domain);
        let x = match cs.domain {
            noncolliding::coefficients::Domain::UnitInterval => [0.2, 0.5, 0.8],
            noncolliding::coefficients::Domain::HalfLine => [0.5, 1.5, 3.0],
            _ => [-1.0, 0.0, 1.5],
        };
        println!("   sigma_1({}) = {:.4}", x[0], cs.sigma(0, x[0]));
        println!("   b_1({}) = {:.4}", x[0], cs.b(0, x[0]));
        println!(
            "   H_12({}, {}) = {:.4}   H_13({}, {}) = {:.4}",
            x[0],
            x[1],
            cs.h(0, 1, x[0], x[1]),
            x[0],
            x[2],
            cs.h(0, 2, x[0], x[2])
        );
        for i in 0..p {
            let d = cs.singular_drift(i, &x).unwrap();
            print!("   drift_{}({x:?}) = {d:+.4}  ", i + 1);
        }
        println!();
        let report = check_preset(&cs);
        println!(
            "   conditions: {:?} ({:?})\n",
            report.overall, report.method
        );
    }
}
