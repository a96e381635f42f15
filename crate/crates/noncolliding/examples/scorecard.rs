//! Run the full verification suite and print the scorecard (equivalent to
//! the `validate` subcommand; takes about a minute).
//!
//! ```bash
//! cargo run --release --example scorecard
//! ```

use noncolliding::cli::render_scorecard_json;
use noncolliding::validate::run_all;

fn main() {
    let card = run_all(&mut |c| {
        eprintln!(
            "criterion {:2} [{}] {} ({:.2}s)",
            c.id,
            if c.pass { "pass" } else { "FAIL" },
            c.name,
            c.runtime_s
        );
    });
    print!("{}", render_scorecard_json(&card));
    std::process::exit(if card.overall_pass { 0 } else { 1 });
}
