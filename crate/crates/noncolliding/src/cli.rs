//! Subcommand drivers: `check`, `run`, `ensemble`, `validate`.
//!
//! Exit codes are the machine contract: `check` returns 0 when every
//! verdict passes, 1 on any failure and 2 when the only non-passes are
//! unknowns; the other commands return 0 on success and 1 on failure.
//! Human-readable progress goes to stderr; structured payloads go to
//! stdout (`check`) or to the output file named by the config / `--out`.
//!
//! Every output embeds its config echo, so re-running from the echo
//! reproduces the file byte for byte.

use crate::analysis::collision_report;
use crate::conditions::{check_preset, ConditionReport, Verdict};
use crate::config::{parse_config, RunConfig};
use crate::error::{Error, Result};
use crate::integrate::{simulate, simulate_ensemble, EnsembleStats, Trajectory};
use crate::rng::NoisePath;
use crate::sympoly::gap_polys;
use serde::Serialize;

/// One acceptance criterion outcome.
#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub observed: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub runtime_s: f64,
    pub detail: String,
}

/// The verification suite outcome; overall pass iff every criterion
/// passes.
#[derive(Clone, Debug, Serialize)]
pub struct Scorecard {
    pub criteria: Vec<CriterionResult>,
    pub overall_pass: bool,
}

impl Scorecard {
    pub fn new(criteria: Vec<CriterionResult>) -> Self {
        let mut ids: Vec<u32> = criteria.iter().map(|c| c.id).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), criteria.len(), "criterion ids must be unique");
        let overall_pass = criteria.iter().all(|c| c.pass);
        Self {
            criteria,
            overall_pass,
        }
    }
}

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

fn echo_as_comments(cfg: &RunConfig) -> String {
    cfg.echo()
        .lines()
        .map(|l| format!("# {l}\n"))
        .collect::<String>()
}

/// Extract the config echo from a rendered CSV (the `# `-prefixed header).
pub fn echo_from_csv(csv: &str) -> String {
    csv.lines()
        .take_while(|l| l.starts_with('#'))
        .map(|l| format!("{}\n", l.trim_start_matches('#').trim_start()))
        .collect()
}

/// Trajectory CSV: the config echo as comments, a header row, then one
/// row per sample time with 17-significant-digit decimals.
pub fn render_trajectory_csv(cfg: &RunConfig, traj: &Trajectory) -> String {
    let p = traj.states[0].p();
    let mut out = echo_as_comments(cfg);
    let mut header = String::from("t");
    for i in 1..=p {
        header.push_str(&format!(",x{i}"));
    }
    header.push_str(",minGap,VN\n");
    out.push_str(&header);
    for (t, st) in traj.times.iter().zip(&traj.states) {
        let mut row = fmt17(*t);
        for v in st.coords() {
            row.push(',');
            row.push_str(&fmt17(*v));
        }
        let (gap, vn) = if p > 1 {
            (st.min_gap(), *gap_polys(st).last().unwrap())
        } else {
            (f64::INFINITY, 1.0)
        };
        row.push(',');
        row.push_str(&fmt17(gap));
        row.push(',');
        row.push_str(&fmt17(vn));
        row.push('\n');
        out.push_str(&row);
    }
    out
}

#[derive(Serialize)]
struct EnsembleOutput<'a> {
    config: &'a str,
    #[serde(flatten)]
    stats: &'a EnsembleStats,
}

pub fn render_ensemble_json(cfg: &RunConfig, stats: &EnsembleStats) -> String {
    let echo = cfg.echo();
    let payload = EnsembleOutput {
        config: &echo,
        stats,
    };
    let mut s = serde_json::to_string_pretty(&payload).expect("serializable");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct CheckOutput<'a> {
    config: &'a str,
    report: &'a ConditionReport,
}

pub fn render_check_json(cfg: &RunConfig, report: &ConditionReport) -> String {
    let echo = cfg.echo();
    let payload = CheckOutput {
        config: &echo,
        report,
    };
    let mut s = serde_json::to_string_pretty(&payload).expect("serializable");
    s.push('\n');
    s
}

pub fn render_scorecard_json(card: &Scorecard) -> String {
    let mut s = serde_json::to_string_pretty(card).expect("serializable");
    s.push('\n');
    s
}

/// Run `check`: the condition report for the configured system.
pub fn run_check(cfg: &RunConfig) -> Result<(String, i32)> {
    let cs = cfg.coefficient_set()?;
    let report = check_preset(&cs);
    let code = match report.overall {
        Verdict::Pass => 0,
        Verdict::Fail => 1,
        Verdict::Unknown => 2,
    };
    Ok((render_check_json(cfg, &report), code))
}

/// Run a single trajectory and render its CSV.
pub fn run_trajectory(cfg: &RunConfig) -> Result<String> {
    let cs = cfg.coefficient_set()?;
    let x0 = cfg.initial_state()?;
    let ctl = cfg.step_control();
    let noise = NoisePath::from_seed(cfg.seed).substream(0);
    let traj = simulate(&cs, &x0, cfg.t_final, &ctl, noise)?;
    Ok(render_trajectory_csv(cfg, &traj))
}

/// Run an ensemble and render its stats JSON.
pub fn run_ensemble(cfg: &RunConfig) -> Result<String> {
    let cs = cfg.coefficient_set()?;
    let x0 = cfg.initial_state()?;
    let ctl = cfg.step_control();
    let stats = simulate_ensemble(&cs, &x0, cfg.t_final, &ctl, cfg.n_paths, cfg.seed)?;
    Ok(render_ensemble_json(cfg, &stats))
}

fn warn_if_conditions_fail(cfg: &RunConfig) {
    if let Ok(cs) = cfg.coefficient_set() {
        let report = check_preset(&cs);
        if report.overall != Verdict::Pass {
            eprintln!(
                "warning: condition check is {:?}; the simulated system may collide or explode",
                report.overall
            );
        }
    }
}

struct CliFlags {
    config: Option<String>,
    seed: Option<u64>,
    out: Option<String>,
}

fn parse_cli_args(args: &[String]) -> std::result::Result<CliFlags, String> {
    let mut config = None;
    let mut seed = None;
    let mut out = None;
    let mut it = args.iter();
    while let Some(a) = it.next() {
        match a.as_str() {
            "--config" => {
                config = Some(
                    it.next()
                        .ok_or_else(|| "--config needs a path".to_string())?
                        .clone(),
                )
            }
            "--seed" => {
                let v = it
                    .next()
                    .ok_or_else(|| "--seed needs a value".to_string())?;
                seed = Some(
                    v.parse::<u64>()
                        .map_err(|_| format!("--seed: `{v}` is not a 64-bit unsigned integer"))?,
                );
            }
            "--out" => {
                out = Some(
                    it.next()
                        .ok_or_else(|| "--out needs a path".to_string())?
                        .clone(),
                )
            }
            other => return Err(format!("unknown flag `{other}`")),
        }
    }
    Ok(CliFlags { config, seed, out })
}

fn load_config(path: Option<&str>, seed_override: Option<u64>) -> Result<RunConfig> {
    let path = path.ok_or_else(|| Error::Config(vec!["--config <path> is required".into()]))?;
    let text = std::fs::read_to_string(path)?;
    let mut cfg = parse_config(&text)?;
    if let Some(seed) = seed_override {
        cfg.seed = seed;
    }
    Ok(cfg)
}

const USAGE: &str = "usage: noncolliding <check|run|ensemble|validate> --config <path> \
[--seed <u64>] [--out <path>]\n       (validate needs no config)";

/// Entry point shared by the binary and the tests; returns the process
/// exit code.
pub fn main_with_args(args: &[String]) -> i32 {
    let Some(cmd) = args.first() else {
        eprintln!("{USAGE}");
        return 2;
    };
    let CliFlags { config, seed, out } = match parse_cli_args(&args[1..]) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}\n{USAGE}");
            return 2;
        }
    };

    match cmd.as_str() {
        "check" => match load_config(config.as_deref(), seed) {
            Ok(cfg) => match run_check(&cfg) {
                Ok((json, code)) => {
                    print!("{json}");
                    code
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    1
                }
            },
            Err(e) => {
                eprintln!("error: {e}");
                2
            }
        },
        "run" => match load_config(config.as_deref(), seed) {
            Ok(cfg) => {
                warn_if_conditions_fail(&cfg);
                let path = out
                    .or_else(|| cfg.output.clone())
                    .unwrap_or_else(|| "trajectory.csv".into());
                match run_trajectory(&cfg) {
                    Ok(csv) => {
                        if let Err(e) = std::fs::write(&path, csv) {
                            eprintln!("error writing {path}: {e}");
                            return 1;
                        }
                        eprintln!("wrote {path}");
                        0
                    }
                    Err(e) => {
                        eprintln!("error: {e}");
                        1
                    }
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                2
            }
        },
        "ensemble" => match load_config(config.as_deref(), seed) {
            Ok(cfg) => {
                warn_if_conditions_fail(&cfg);
                let path = out
                    .or_else(|| cfg.output.clone())
                    .unwrap_or_else(|| "ensemble.json".into());
                match run_ensemble(&cfg) {
                    Ok(json) => {
                        if let Err(e) = std::fs::write(&path, json) {
                            eprintln!("error writing {path}: {e}");
                            return 1;
                        }
                        eprintln!("wrote {path}");
                        0
                    }
                    Err(e) => {
                        eprintln!("error: {e}");
                        1
                    }
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                2
            }
        },
        "validate" => {
            let path = out.unwrap_or_else(|| "scorecard.json".into());
            let card = crate::validate::run_all(&mut |c: &CriterionResult| {
                eprintln!(
                    "criterion {:2} [{}] {} (observed {:.6e}, expected {:.6e}, tol {:.1e}, {:.2}s)",
                    c.id,
                    if c.pass { "pass" } else { "FAIL" },
                    c.name,
                    c.observed,
                    c.expected,
                    c.tolerance,
                    c.runtime_s
                );
            });
            if let Err(e) = std::fs::write(&path, render_scorecard_json(&card)) {
                eprintln!("error writing {path}: {e}");
                return 1;
            }
            eprintln!("wrote {path}");
            if card.overall_pass {
                0
            } else {
                1
            }
        }
        other => {
            eprintln!("unknown subcommand `{other}`\n{USAGE}");
            2
        }
    }
}

/// Collision diagnostics for a rendered run, exposed for the examples.
pub fn trajectory_collision_summary(traj: &Trajectory, eps: f64) -> String {
    let rep = collision_report(traj, eps, 1e-14);
    format!(
        "diffraction at t = {:?}, collision flag = {}, final min gap = {:.3e}",
        rep.diffraction_time,
        rep.collision_flag,
        rep.min_gap_series.last().unwrap()
    )
}
