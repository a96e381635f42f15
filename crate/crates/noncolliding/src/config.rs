//! The run-config file format: one `key = value` pair per line, `#`
//! comments, everything else rejected with a list of every offending key.
//!
//! A config fully determines a run (system, initial state, horizon, step
//! policy, ensemble size, seed, sampling, output), so any output file can
//! embed its config as an echo and be reproduced from it.

use crate::coefficients::{
    build_preset, CoefficientSet, Domain, InteractionKernel, KernelForm, PresetParams, ScalarField,
};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::integrate::{default_switch_gap, Scheme, StepControl};
use crate::sympoly::ChamberPoint;
use std::collections::BTreeMap;

/// Seed used when the config does not name one; it is recorded in the
/// config echo of every output.
pub const DEFAULT_SEED: u64 = 42;

#[derive(Clone, Debug, PartialEq)]
pub enum SystemSpec {
    Preset(PresetKind),
    Custom {
        sigma: String,
        b: String,
        h: String,
        domain: Domain,
    },
}

/// Preset selector with raw parameters as they appeared in the config.
#[derive(Clone, Debug, PartialEq)]
pub enum PresetKind {
    Dyson { gamma: f64 },
    NearestNeighbor { gamma: f64 },
    BetaWishart { alpha: f64, beta: f64 },
    BetaWishartAbs { alpha: f64, beta: f64 },
    Jacobi { q: f64, r: f64, beta: f64 },
    Hyperbolic { gamma: f64 },
    GeneralPsi { psi: String, gamma: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialState {
    Zero,
    Equispaced { a: f64, b: f64 },
    Explicit(Vec<f64>),
}

/// A fully validated run description.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub system: SystemSpec,
    pub p: usize,
    pub x0: InitialState,
    pub t_final: f64,
    pub dt: f64,
    pub scheme: Scheme,
    pub gap_floor: f64,
    /// None means the default 1000 sqrt(dt)
    pub hybrid_switch_gap: Option<f64>,
    pub adaptive: bool,
    pub n_paths: usize,
    pub seed: u64,
    pub sample_every: usize,
    pub workers: usize,
    pub output: Option<String>,
}

impl RunConfig {
    pub fn coefficient_set(&self) -> Result<CoefficientSet> {
        match &self.system {
            SystemSpec::Preset(kind) => {
                let params = match kind {
                    PresetKind::Dyson { gamma } => PresetParams::DysonCepa { gamma: *gamma },
                    PresetKind::NearestNeighbor { gamma } => {
                        PresetParams::NearestNeighbor { gamma: *gamma }
                    }
                    PresetKind::BetaWishart { alpha, beta } => PresetParams::BetaWishart {
                        alpha: *alpha,
                        beta: *beta,
                    },
                    PresetKind::BetaWishartAbs { alpha, beta } => PresetParams::BetaWishartAbs {
                        alpha: *alpha,
                        beta: *beta,
                    },
                    PresetKind::Jacobi { q, r, beta } => PresetParams::Jacobi {
                        q: *q,
                        r: *r,
                        beta: *beta,
                    },
                    PresetKind::Hyperbolic { gamma } => PresetParams::Hyperbolic { gamma: *gamma },
                    PresetKind::GeneralPsi { psi, gamma } => PresetParams::GeneralPsi {
                        psi: Expr::parse(psi, &["u"])?,
                        gamma: *gamma,
                    },
                };
                build_preset(params, self.p)
            }
            SystemSpec::Custom {
                sigma,
                b,
                h,
                domain,
            } => {
                let sigma = ScalarField::custom(Expr::parse(sigma, &["x"])?);
                let b = ScalarField::custom(Expr::parse(b, &["x"])?);
                let kernel = InteractionKernel {
                    form: KernelForm::Custom(Expr::parse(h, &["x", "y"])?),
                };
                CoefficientSet::uniform(self.p, sigma, b, kernel, *domain)
            }
        }
    }

    pub fn initial_state(&self) -> Result<ChamberPoint> {
        match &self.x0 {
            InitialState::Zero => Ok(ChamberPoint::zero(self.p)),
            InitialState::Equispaced { a, b } => {
                if self.p == 1 {
                    return ChamberPoint::new(vec![0.5 * (a + b)]);
                }
                let h = (b - a) / (self.p - 1) as f64;
                ChamberPoint::new((0..self.p).map(|i| a + h * i as f64).collect())
            }
            InitialState::Explicit(v) => ChamberPoint::new(v.clone()),
        }
    }

    pub fn step_control(&self) -> StepControl {
        let mut ctl = StepControl::new(self.dt);
        ctl.scheme = self.scheme;
        ctl.adaptive = self.adaptive;
        ctl.gap_floor = self.gap_floor;
        ctl.hybrid_switch_gap = self
            .hybrid_switch_gap
            .unwrap_or_else(|| default_switch_gap(self.dt));
        ctl.sample_every = self.sample_every;
        ctl.workers = self.workers;
        ctl
    }

    /// Canonical text form; parsing it reproduces this config exactly.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        match &self.system {
            SystemSpec::Preset(kind) => match kind {
                PresetKind::Dyson { gamma } => {
                    out.push_str("system = dyson\n");
                    out.push_str(&format!("gamma = {gamma}\n"));
                }
                PresetKind::NearestNeighbor { gamma } => {
                    out.push_str("system = nearest_neighbor\n");
                    out.push_str(&format!("gamma = {gamma}\n"));
                }
                PresetKind::BetaWishart { alpha, beta } => {
                    out.push_str("system = beta_wishart\n");
                    out.push_str(&format!("alpha = {alpha}\n"));
                    out.push_str(&format!("beta = {beta}\n"));
                }
                PresetKind::BetaWishartAbs { alpha, beta } => {
                    out.push_str("system = beta_wishart_abs\n");
                    out.push_str(&format!("alpha = {alpha}\n"));
                    out.push_str(&format!("beta = {beta}\n"));
                }
                PresetKind::Jacobi { q, r, beta } => {
                    out.push_str("system = jacobi\n");
                    out.push_str(&format!("q = {q}\n"));
                    out.push_str(&format!("r = {r}\n"));
                    out.push_str(&format!("beta = {beta}\n"));
                }
                PresetKind::Hyperbolic { gamma } => {
                    out.push_str("system = hyperbolic\n");
                    out.push_str(&format!("gamma = {gamma}\n"));
                }
                PresetKind::GeneralPsi { psi, gamma } => {
                    out.push_str("system = general_psi\n");
                    out.push_str(&format!("psi = {psi}\n"));
                    out.push_str(&format!("gamma = {gamma}\n"));
                }
            },
            SystemSpec::Custom {
                sigma,
                b,
                h,
                domain,
            } => {
                out.push_str("system = custom\n");
                out.push_str(&format!("sigma = {sigma}\n"));
                out.push_str(&format!("b = {b}\n"));
                out.push_str(&format!("h = {h}\n"));
                out.push_str(&format!(
                    "domain = {}\n",
                    match domain {
                        Domain::Real => "real",
                        Domain::HalfLine => "half_line",
                        Domain::UnitInterval => "unit_interval",
                    }
                ));
            }
        }
        out.push_str(&format!("p = {}\n", self.p));
        match &self.x0 {
            InitialState::Zero => out.push_str("x0 = zero\n"),
            InitialState::Equispaced { a, b } => {
                out.push_str(&format!("x0 = equispaced({a}, {b})\n"))
            }
            InitialState::Explicit(v) => {
                let parts: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
                out.push_str(&format!("x0 = {}\n", parts.join(", ")));
            }
        }
        out.push_str(&format!("T = {}\n", self.t_final));
        out.push_str(&format!("dt = {}\n", self.dt));
        out.push_str(&format!(
            "scheme = {}\n",
            match self.scheme {
                Scheme::Direct => "direct",
                Scheme::PolySpace => "poly",
                Scheme::Hybrid => "hybrid",
            }
        ));
        out.push_str(&format!("gap_floor = {}\n", self.gap_floor));
        match self.hybrid_switch_gap {
            None => out.push_str("hybrid_switch_gap = auto\n"),
            Some(g) => out.push_str(&format!("hybrid_switch_gap = {g}\n")),
        }
        out.push_str(&format!("adaptive = {}\n", self.adaptive));
        out.push_str(&format!("n_paths = {}\n", self.n_paths));
        out.push_str(&format!("seed = {}\n", self.seed));
        out.push_str(&format!("sample_every = {}\n", self.sample_every));
        out.push_str(&format!("workers = {}\n", self.workers));
        if let Some(o) = &self.output {
            out.push_str(&format!("output = {o}\n"));
        }
        out
    }
}

/// Parse and validate a config, reporting every invalid key at once.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut pairs: BTreeMap<String, String> = BTreeMap::new();
    let mut errors: Vec<String> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let line = match line.find('#') {
            Some(k) => line[..k].trim(),
            None => line,
        };
        if line.is_empty() {
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) => {
                let key = k.trim().to_string();
                let val = v.trim().to_string();
                if pairs.insert(key.clone(), val).is_some() {
                    errors.push(format!("line {}: duplicate key `{key}`", lineno + 1));
                }
            }
            None => errors.push(format!(
                "line {}: expected `key = value`, got `{line}`",
                lineno + 1
            )),
        }
    }

    let known = [
        "system",
        "gamma",
        "alpha",
        "beta",
        "q",
        "r",
        "psi",
        "sigma",
        "b",
        "h",
        "domain",
        "p",
        "x0",
        "T",
        "dt",
        "scheme",
        "gap_floor",
        "hybrid_switch_gap",
        "adaptive",
        "n_paths",
        "seed",
        "sample_every",
        "workers",
        "output",
    ];
    for key in pairs.keys() {
        if !known.contains(&key.as_str()) {
            errors.push(format!("unknown key `{key}`"));
        }
    }

    let take = |k: &str| pairs.get(k).cloned();

    let f64_field = |k: &str, errors: &mut Vec<String>| -> Option<f64> {
        take(k).and_then(|v| match v.parse::<f64>() {
            Ok(x) if x.is_finite() => Some(x),
            _ => {
                errors.push(format!("key `{k}`: `{v}` is not a finite number"));
                None
            }
        })
    };

    let gamma = f64_field("gamma", &mut errors);
    let alpha = f64_field("alpha", &mut errors);
    let beta = f64_field("beta", &mut errors);
    let q = f64_field("q", &mut errors);
    let r = f64_field("r", &mut errors);
    let t_final = f64_field("T", &mut errors);
    let dt = f64_field("dt", &mut errors);
    let gap_floor = f64_field("gap_floor", &mut errors);

    let usize_field = |k: &str, errors: &mut Vec<String>| -> Option<usize> {
        pairs
            .get(k)
            .cloned()
            .and_then(|v| match v.parse::<usize>() {
                Ok(x) => Some(x),
                _ => {
                    errors.push(format!("key `{k}`: `{v}` is not a non-negative integer"));
                    None
                }
            })
    };
    let p = usize_field("p", &mut errors);
    let n_paths = usize_field("n_paths", &mut errors);
    let sample_every = usize_field("sample_every", &mut errors);
    let workers = usize_field("workers", &mut errors);

    let seed = match pairs.get("seed") {
        None => None,
        Some(v) => match v.parse::<u64>() {
            Ok(s) => Some(s),
            Err(_) => {
                errors.push(format!(
                    "key `seed`: `{v}` is not a 64-bit unsigned integer"
                ));
                None
            }
        },
    };

    let required_params = |kind: &str| -> &'static [&'static str] {
        match kind {
            "dyson" | "nearest_neighbor" | "hyperbolic" => &["gamma"],
            "beta_wishart" | "beta_wishart_abs" => &["alpha", "beta"],
            "jacobi" => &["q", "r", "beta"],
            "general_psi" => &["psi", "gamma"],
            "custom" => &["sigma", "b", "h"],
            _ => &[],
        }
    };

    let system = match pairs.get("system") {
        None => {
            errors.push("missing required key `system`".into());
            None
        }
        Some(name) => {
            for req in required_params(name) {
                if !pairs.contains_key(*req) {
                    errors.push(format!("system `{name}` requires key `{req}`"));
                }
            }
            match name.as_str() {
                "dyson" => gamma.map(|gamma| SystemSpec::Preset(PresetKind::Dyson { gamma })),
                "nearest_neighbor" => {
                    gamma.map(|gamma| SystemSpec::Preset(PresetKind::NearestNeighbor { gamma }))
                }
                "beta_wishart" => match (alpha, beta) {
                    (Some(alpha), Some(beta)) => {
                        Some(SystemSpec::Preset(PresetKind::BetaWishart { alpha, beta }))
                    }
                    _ => None,
                },
                "beta_wishart_abs" => match (alpha, beta) {
                    (Some(alpha), Some(beta)) => {
                        Some(SystemSpec::Preset(PresetKind::BetaWishartAbs {
                            alpha,
                            beta,
                        }))
                    }
                    _ => None,
                },
                "jacobi" => match (q, r, beta) {
                    (Some(q), Some(r), Some(beta)) => {
                        Some(SystemSpec::Preset(PresetKind::Jacobi { q, r, beta }))
                    }
                    _ => None,
                },
                "hyperbolic" => {
                    gamma.map(|gamma| SystemSpec::Preset(PresetKind::Hyperbolic { gamma }))
                }
                "general_psi" => match (pairs.get("psi"), gamma) {
                    (Some(psi), Some(gamma)) => {
                        if let Err(e) = Expr::parse(psi, &["u"]) {
                            errors.push(format!("key `psi`: {e}"));
                            None
                        } else {
                            Some(SystemSpec::Preset(PresetKind::GeneralPsi {
                                psi: psi.clone(),
                                gamma,
                            }))
                        }
                    }
                    _ => None,
                },
                "custom" => {
                    let domain = match pairs.get("domain").map(|s| s.as_str()) {
                        None | Some("real") => Some(Domain::Real),
                        Some("half_line") => Some(Domain::HalfLine),
                        Some("unit_interval") => Some(Domain::UnitInterval),
                        Some(other) => {
                            errors.push(format!(
                                "key `domain`: `{other}` is not one of real, half_line, \
                                 unit_interval"
                            ));
                            None
                        }
                    };
                    let mut expr_ok = true;
                    for (key, vars) in [
                        ("sigma", &["x"][..]),
                        ("b", &["x"][..]),
                        ("h", &["x", "y"][..]),
                    ] {
                        if let Some(src) = pairs.get(key) {
                            if let Err(e) = Expr::parse(src, vars) {
                                errors.push(format!("key `{key}`: {e}"));
                                expr_ok = false;
                            }
                        } else {
                            expr_ok = false;
                        }
                    }
                    match (expr_ok, domain) {
                        (true, Some(domain)) => Some(SystemSpec::Custom {
                            sigma: pairs["sigma"].clone(),
                            b: pairs["b"].clone(),
                            h: pairs["h"].clone(),
                            domain,
                        }),
                        _ => None,
                    }
                }
                other => {
                    errors.push(format!(
                        "key `system`: unknown system `{other}` (dyson, nearest_neighbor, \
                         beta_wishart, beta_wishart_abs, jacobi, hyperbolic, general_psi, custom)"
                    ));
                    None
                }
            }
        }
    };

    let x0 = match pairs.get("x0") {
        None => {
            errors.push("missing required key `x0`".into());
            None
        }
        Some(raw) => parse_x0(raw)
            .map_err(|e| errors.push(format!("key `x0`: {e}")))
            .ok(),
    };

    let scheme = match pairs.get("scheme").map(|s| s.as_str()) {
        None | Some("hybrid") => Scheme::Hybrid,
        Some("direct") => Scheme::Direct,
        Some("poly") => Scheme::PolySpace,
        Some(other) => {
            errors.push(format!(
                "key `scheme`: `{other}` is not one of direct, poly, hybrid"
            ));
            Scheme::Hybrid
        }
    };

    let hybrid_switch_gap = match pairs.get("hybrid_switch_gap").map(|s| s.as_str()) {
        None | Some("auto") => None,
        Some(v) => match v.parse::<f64>() {
            Ok(g) if g > 0.0 && g.is_finite() => Some(g),
            _ => {
                errors.push(format!(
                    "key `hybrid_switch_gap`: `{v}` is not `auto` or a positive number"
                ));
                None
            }
        },
    };

    let adaptive = match pairs.get("adaptive").map(|s| s.as_str()) {
        None | Some("false") => false,
        Some("true") => true,
        Some(other) => {
            errors.push(format!("key `adaptive`: `{other}` is not true/false"));
            false
        }
    };

    // required numerics
    for (key, present) in [
        ("p", p.is_some()),
        ("T", t_final.is_some()),
        ("dt", dt.is_some()),
    ] {
        if !pairs.contains_key(key) && present {
            unreachable!()
        }
        if !pairs.contains_key(key) {
            errors.push(format!("missing required key `{key}`"));
        }
    }

    // semantic validation
    if let Some(p) = p {
        if p < 1 {
            errors.push("key `p`: must be at least 1".into());
        }
    }
    if let Some(dt) = dt {
        if dt <= 0.0 {
            errors.push("key `dt`: must be positive".into());
        }
    }
    if let Some(t) = t_final {
        if t <= 0.0 {
            errors.push("key `T`: must be positive".into());
        }
    }
    if let Some(n) = n_paths {
        if n == 0 {
            errors.push("key `n_paths`: must be at least 1".into());
        }
    }
    if let Some(s) = sample_every {
        if s == 0 {
            errors.push("key `sample_every`: must be at least 1".into());
        }
    }
    if let Some(w) = workers {
        if w == 0 {
            errors.push("key `workers`: must be at least 1".into());
        }
    }
    if let (Some(p), Some(InitialState::Explicit(v))) = (p, &x0) {
        if v.len() != p {
            errors.push(format!(
                "key `x0`: {} coordinates given for p = {p}",
                v.len()
            ));
        }
        if v.windows(2).any(|w| w[0] > w[1]) {
            errors.push("key `x0`: coordinates must be non-decreasing".into());
        }
    }
    // domain containment of the initial state
    if let (Some(system), Some(x0v), Some(p)) = (&system, &x0, p) {
        let domain = match system {
            SystemSpec::Preset(PresetKind::BetaWishart { .. }) => Domain::HalfLine,
            SystemSpec::Preset(PresetKind::Jacobi { .. }) => Domain::UnitInterval,
            SystemSpec::Custom { domain, .. } => *domain,
            _ => Domain::Real,
        };
        let candidate: Vec<f64> = match x0v {
            InitialState::Zero => vec![0.0],
            InitialState::Equispaced { a, b } => vec![*a, *b],
            InitialState::Explicit(v) => v.clone(),
        };
        let _ = p;
        for c in candidate {
            if !domain.contains(c) {
                errors.push(format!(
                    "key `x0`: coordinate {c} outside the system domain {domain:?}"
                ));
                break;
            }
        }
    }

    if !errors.is_empty() {
        return Err(Error::Config(errors));
    }

    Ok(RunConfig {
        system: system.expect("validated"),
        p: p.expect("validated"),
        x0: x0.expect("validated"),
        t_final: t_final.expect("validated"),
        dt: dt.expect("validated"),
        scheme,
        gap_floor: gap_floor.unwrap_or(1e-9),
        hybrid_switch_gap,
        adaptive,
        n_paths: n_paths.unwrap_or(1),
        seed: seed.unwrap_or(DEFAULT_SEED),
        sample_every: sample_every.unwrap_or(1),
        workers: workers.unwrap_or(1),
        output: pairs.get("output").cloned(),
    })
}

fn parse_x0(raw: &str) -> std::result::Result<InitialState, String> {
    let s = raw.trim();
    if s == "zero" {
        return Ok(InitialState::Zero);
    }
    if let Some(rest) = s.strip_prefix("equispaced(") {
        let inner = rest
            .strip_suffix(')')
            .ok_or_else(|| "missing closing parenthesis".to_string())?;
        let parts: Vec<&str> = inner.split(',').map(|t| t.trim()).collect();
        if parts.len() != 2 {
            return Err("equispaced needs two endpoints".into());
        }
        let a: f64 = parts[0]
            .parse()
            .map_err(|_| format!("bad number `{}`", parts[0]))?;
        let b: f64 = parts[1]
            .parse()
            .map_err(|_| format!("bad number `{}`", parts[1]))?;
        if a >= b || a.is_nan() || b.is_nan() {
            return Err(format!("need a < b, got ({a}, {b})"));
        }
        return Ok(InitialState::Equispaced { a, b });
    }
    let mut vals = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        let v: f64 = part.parse().map_err(|_| format!("bad number `{part}`"))?;
        if !v.is_finite() {
            return Err(format!("non-finite coordinate `{part}`"));
        }
        vals.push(v);
    }
    if vals.is_empty() {
        return Err("empty coordinate list".into());
    }
    Ok(InitialState::Explicit(vals))
}
