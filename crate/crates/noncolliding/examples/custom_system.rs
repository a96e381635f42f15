//! Define a particle system from expression-grammar coefficients, check
//! its hypotheses by sampling, and integrate it.
//!
//! ```bash
//! cargo run --release --example custom_system
//! ```

use noncolliding::cli::run_check;
use noncolliding::config::parse_config;
use noncolliding::integrate::simulate;
use noncolliding::rng::NoisePath;

const CONFIG: &str = "\
# mean-reverting particles with blended constant + product repulsion
system = custom
sigma = 1
b = -0.5*x
h = 0.6 + 0.05*abs(x*y)
p = 4
x0 = zero
T = 1.0
dt = 1e-3
seed = 31
sample_every = 100
";

fn main() {
    let cfg = parse_config(CONFIG).unwrap();
    let (json, code) = run_check(&cfg).unwrap();
    println!("check exit code {code}:");
    println!("{json}");

    let cs = cfg.coefficient_set().unwrap();
    let traj = simulate(
        &cs,
        &cfg.initial_state().unwrap(),
        cfg.t_final,
        &cfg.step_control(),
        NoisePath::from_seed(cfg.seed).substream(0),
    )
    .unwrap();
    println!("final state: {:?}", traj.final_state().coords());
    println!(
        "min gap at the end: {:.4e} (started from a quadruple collision)",
        traj.final_state().min_gap()
    );
}
