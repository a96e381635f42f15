//! Launch a particle system from the fully degenerate state x = 0 and
//! watch the particles diffract instantly and never collide again.
//!
//! The direct scheme cannot even take the first step here (the repulsion
//! drift is 0/0); the poly-space scheme integrates the singularity-free
//! coefficient SDE and recovers the particles as ordered real roots.
//!
//! ```bash
//! cargo run --release --example degenerate_start
//! ```

use noncolliding::analysis::collision_report;
use noncolliding::integrate::{simulate, Scheme, StepControl};
use noncolliding::rng::NoisePath;
use noncolliding::sympoly::ChamberPoint;
use noncolliding::{build_preset, PresetParams};

fn main() {
    let cs = build_preset(
        PresetParams::BetaWishart {
            alpha: 3.0,
            beta: 1.0,
        },
        3,
    )
    .unwrap();
    let x0 = ChamberPoint::zero(3);

    // the direct scheme refuses the collided start
    let direct = StepControl::new(1e-4).with_scheme(Scheme::Direct);
    match simulate(&cs, &x0, 1.0, &direct, NoisePath::from_seed(1)) {
        Err(e) => println!("direct scheme from x = 0: {e}"),
        Ok(_) => unreachable!("the singular drift cannot be evaluated at a tie"),
    }

    // the hybrid scheme starts in poly space and switches once separated
    let mut ctl = StepControl::new(1e-4);
    ctl.sample_every = 100;
    let traj = simulate(&cs, &x0, 1.0, &ctl, NoisePath::from_seed(1)).unwrap();
    let rep = collision_report(&traj, 0.0, 1e-14);

    println!("\nhybrid scheme from x = 0:");
    println!(
        "   first sampled time with positive gaps: {:?}",
        rep.diffraction_time
    );
    println!("   collision after start: {}", rep.collision_flag);
    println!("\n   t        x_1        x_2        x_3       min gap      V_N");
    for k in (0..traj.times.len()).step_by(10) {
        let x = traj.states[k].coords();
        println!(
            "   {:4.2}  {:9.5}  {:9.5}  {:9.5}  {:10.3e}  {:10.3e}",
            traj.times[k], x[0], x[1], x[2], rep.min_gap_series[k], rep.v_n_series[k]
        );
    }
    println!(
        "\n   events: {} (scheme switches, domain clamps, root repairs)",
        traj.events.len()
    );
}
