//! Closed-form versus sampled condition checking, with a replayable
//! witness for a failing system and the degenerate-point scan.
//!
//! ```bash
//! cargo run --release --example check_conditions
//! ```

use noncolliding::coefficients::{CoefficientSet, Domain, InteractionKernel, ScalarField};
use noncolliding::conditions::{check_numeric, check_preset, degenerate_points};
use noncolliding::expr::Expr;
use noncolliding::{build_preset, PresetParams};

fn main() {
    // sharp threshold: gamma = 1/2 passes, anything below fails
    for gamma in [0.5, 0.4999] {
        let cs = build_preset(PresetParams::DysonCepa { gamma }, 3).unwrap();
        let rep = check_preset(&cs);
        println!(
            "dyson gamma = {gamma}: overall {:?}, A2 {:?}",
            rep.overall, rep.verdicts["A2"]
        );
        for w in &rep.witnesses {
            println!(
                "   witness [{}] at x = {:?}: lhs {} > rhs {} (replay margin {:.3e})",
                w.condition,
                w.points,
                w.lhs,
                w.rhs,
                w.replay(&cs)
            );
        }
    }

    // the same verdicts out of pure grid sampling
    let cs = build_preset(PresetParams::DysonCepa { gamma: 0.4999 }, 3).unwrap();
    let sampled = check_numeric(&cs, (-3.0, 3.0), 32, 1e-9).unwrap();
    println!(
        "sampled check agrees: A2 {:?}, best-fit constants {:?}",
        sampled.verdicts["A2"], sampled.constants
    );

    // degenerate points: exact for presets, scanned for custom systems
    let wishart = build_preset(
        PresetParams::BetaWishart {
            alpha: 3.0,
            beta: 1.0,
        },
        3,
    )
    .unwrap();
    println!(
        "wishart degenerate points: {:?}",
        degenerate_points(&wishart, (0.0, 4.0)).points
    );

    let custom = CoefficientSet::uniform(
        3,
        ScalarField::custom(Expr::parse("2*sqrt(abs(x))", &["x"]).unwrap()),
        ScalarField::constant(1.0),
        InteractionKernel {
            form: noncolliding::coefficients::KernelForm::Custom(
                Expr::parse("abs(x) + abs(y)", &["x", "y"]).unwrap(),
            ),
        },
        Domain::Real,
    )
    .unwrap();
    println!(
        "custom-scan degenerate points: {:?}",
        degenerate_points(&custom, (-2.0, 2.0)).points
    );
    let rep = check_numeric(&custom, (-2.0, 2.0), 32, 1e-9).unwrap();
    println!(
        "custom system: overall {:?} (A4 {:?} -- sampling cannot certify the quantified drift condition)",
        rep.overall, rep.verdicts["A4"]
    );
}
