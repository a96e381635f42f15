//! Render a trajectory CSV from a config and reproduce it from its own
//! embedded echo.
//!
//! ```bash
//! cargo run --release --example trajectory_csv
//! ```

use noncolliding::cli::{echo_from_csv, run_trajectory};
use noncolliding::config::parse_config;

const CONFIG: &str = "\
system = jacobi
q = 2.0
r = 2.0
beta = 1.0
p = 3
x0 = equispaced(0.2, 0.8)
T = 0.25
dt = 1e-3
seed = 2024
sample_every = 50
";

fn main() {
    let cfg = parse_config(CONFIG).unwrap();
    let csv = run_trajectory(&cfg).unwrap();
    print!("{csv}");

    let echo = echo_from_csv(&csv);
    let reproduced = run_trajectory(&parse_config(&echo).unwrap()).unwrap();
    eprintln!(
        "\nreproduced from the embedded echo: {} bytes, identical = {}",
        reproduced.len(),
        reproduced == csv
    );
}
