//! Time stepping.
//!
//! Two Euler-Maruyama schemes share one driving noise path:
//!
//! - `Direct` steps the particle SDE itself. Fast and accurate away from
//!   ties, but the repulsion drift is singular, so it needs a strictly
//!   ordered state with a healthy minimum gap.
//! - `PolySpace` steps the elementary-symmetric-polynomial SDE, which has
//!   no singularities at all, and recovers the particles as ordered real
//!   roots after every step. This is what makes colliding and fully
//!   degenerate initial states integrable.
//! - `Hybrid` runs PolySpace while the minimum gap is below a switch
//!   threshold and Direct otherwise.
//!
//! Both schemes consume exactly p standard normals per step, so two runs
//! with the same seed are driven by the same discrete Brownian increments
//! regardless of the scheme.

use crate::coefficients::{CoefficientSet, Domain};
use crate::error::{Error, Result};
use crate::rng::NoisePath;
use crate::sympoly::{
    default_recovery_tol, elem_sym, gap_polys, poly_dynamics, poly_to_chamber_detailed,
    ChamberPoint, PolyPoint,
};
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Direct,
    PolySpace,
    Hybrid,
}

/// Step-size and scheme policy for a run.
#[derive(Clone, Debug)]
pub struct StepControl {
    pub dt_base: f64,
    /// shrink dt near small gaps when stepping directly
    pub adaptive: bool,
    /// smallest gap the direct scheme will step from
    pub gap_floor: f64,
    pub scheme: Scheme,
    /// below this minimum gap the hybrid scheme runs in poly space
    pub hybrid_switch_gap: f64,
    /// record every k-th step (the initial and final states always are)
    pub sample_every: usize,
    /// worker threads for ensembles; results are identical for any count
    pub workers: usize,
}

impl StepControl {
    pub fn new(dt_base: f64) -> Self {
        Self {
            dt_base,
            adaptive: false,
            gap_floor: 1e-9,
            scheme: Scheme::Hybrid,
            hybrid_switch_gap: default_switch_gap(dt_base),
            sample_every: 1,
            workers: 1,
        }
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dt_base <= 0.0 || !self.dt_base.is_finite() || self.dt_base.is_nan() {
            return Err(Error::Invalid(format!(
                "dt_base = {} invalid",
                self.dt_base
            )));
        }
        if self.scheme == Scheme::Hybrid
            && !(0.0 < self.gap_floor && self.gap_floor < self.hybrid_switch_gap)
        {
            return Err(Error::Invalid(format!(
                "hybrid needs 0 < gap_floor ({}) < hybrid_switch_gap ({})",
                self.gap_floor, self.hybrid_switch_gap
            )));
        }
        if self.sample_every == 0 || self.workers == 0 {
            return Err(Error::Invalid(
                "sample_every and workers must be positive".into(),
            ));
        }
        Ok(())
    }
}

pub fn default_switch_gap(dt_base: f64) -> f64 {
    1e3 * dt_base.sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    GapFloorHit,
    Clamped,
    SchemeSwitch,
    NonrealRootsRepaired,
}

#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
}

/// A sampled path: states on a strictly increasing time grid, optional
/// poly-space states, and the exceptional events hit along the way.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ChamberPoint>,
    pub poly_states: Option<Vec<PolyPoint>>,
    pub events: Vec<Event>,
    /// direct steps whose output needed re-sorting into the chamber
    pub sort_repairs: u64,
}

impl Trajectory {
    pub fn final_state(&self) -> &ChamberPoint {
        self.states.last().expect("non-empty trajectory")
    }
}

/// One direct Euler-Maruyama step; `z` are standard normals, scaled by
/// sqrt(dt) internally. The output is re-sorted into the chamber and
/// clamped to the preset domain.
pub fn step_direct(
    cs: &CoefficientSet,
    x: &ChamberPoint,
    dt: f64,
    z: &[f64],
) -> Result<ChamberPoint> {
    step_direct_detailed(cs, x, dt, z, 0.0).map(|o| o.x)
}

struct DirectOutcome {
    x: ChamberPoint,
    sorted: bool,
    clamped: bool,
}

fn step_direct_detailed(
    cs: &CoefficientSet,
    x: &ChamberPoint,
    dt: f64,
    z: &[f64],
    gap_floor: f64,
) -> Result<DirectOutcome> {
    let p = cs.p();
    debug_assert_eq!(z.len(), p);
    if x.min_gap() <= gap_floor {
        return Err(Error::Singularity {
            i: 0,
            j: 0,
            gap: x.min_gap(),
        });
    }
    let xs = x.coords();
    let sqrt_dt = dt.sqrt();
    let mut out = vec![0.0; p];
    for i in 0..p {
        let drift = cs.singular_drift(i, xs)?;
        out[i] = xs[i] + cs.sigma(i, xs[i]) * sqrt_dt * z[i] + drift * dt;
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Explosion { time: f64::NAN });
    }
    let sorted = out.windows(2).any(|w| w[0] > w[1]);
    if sorted {
        out.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    }
    let mut clamped = false;
    if cs.domain != Domain::Real {
        for v in out.iter_mut() {
            let c = cs.domain.clamp(*v);
            if c != *v {
                clamped = true;
                *v = c;
            }
        }
    }
    Ok(DirectOutcome {
        x: ChamberPoint::new(out)?,
        sorted,
        clamped,
    })
}

/// One poly-space Euler-Maruyama step: recover x from y, evaluate the
/// singularity-free coefficients, and advance y with the same normal
/// increments that would drive the direct scheme. Valid at collisions and
/// degenerate states.
pub fn step_poly(cs: &CoefficientSet, y: &PolyPoint, dt: f64, z: &[f64]) -> Result<PolyPoint> {
    let repair_tol = 1e-4 * y.scale();
    let (x, _) = poly_to_chamber_detailed(y, repair_tol)?;
    Ok(step_poly_from(cs, y, &x, dt, z))
}

fn step_poly_from(
    cs: &CoefficientSet,
    y: &PolyPoint,
    x: &ChamberPoint,
    dt: f64,
    z: &[f64],
) -> PolyPoint {
    let p = cs.p();
    let pd = poly_dynamics(cs, x);
    let sqrt_dt = dt.sqrt();
    let xs = x.coords();
    let mut out = y.coords().to_vec();
    for (n, slot) in out.iter_mut().enumerate().take(p) {
        let mut noise = 0.0;
        for i in 0..p {
            noise += cs.sigma(i, xs[i]) * pd.j[(n, i)] * z[i];
        }
        *slot += noise * sqrt_dt + pd.q[n] * dt;
    }
    PolyPoint::new(out)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Direct,
    Poly,
}

/// Integrate one path. Colliding starts are only integrable in poly
/// space; the hybrid scheme begins there automatically and switches to
/// direct stepping once the particles are well separated.
pub fn simulate(
    cs: &CoefficientSet,
    x0: &ChamberPoint,
    t_final: f64,
    ctl: &StepControl,
    mut noise: NoisePath,
) -> Result<Trajectory> {
    ctl.validate()?;
    let p = cs.p();
    if x0.p() != p {
        return Err(Error::Invalid(format!(
            "x0 has {} coordinates for a {p}-particle system",
            x0.p()
        )));
    }
    if !x0.coords().iter().all(|v| cs.domain.contains(*v)) {
        return Err(Error::Invalid(format!(
            "x0 {:?} outside the system domain {:?}",
            x0.coords(),
            cs.domain
        )));
    }
    if t_final <= 0.0 || t_final.is_nan() {
        return Err(Error::Invalid(format!("T = {t_final} must be positive")));
    }

    let track_poly = ctl.scheme != Scheme::Direct;
    let mut x = x0.clone();
    let mut y = elem_sym(&x);
    let mut t = 0.0;
    let mut step_index: u64 = 0;

    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![x.clone()],
        poly_states: if track_poly {
            Some(vec![y.clone()])
        } else {
            None
        },
        events: Vec::new(),
        sort_repairs: 0,
    };

    let mut mode = match ctl.scheme {
        Scheme::Direct => Mode::Direct,
        Scheme::PolySpace => Mode::Poly,
        Scheme::Hybrid => {
            if x.min_gap() < ctl.hybrid_switch_gap {
                Mode::Poly
            } else {
                Mode::Direct
            }
        }
    };

    while t < t_final {
        // scheme selection for this step
        if ctl.scheme == Scheme::Hybrid {
            let want = if x.min_gap() < ctl.hybrid_switch_gap {
                Mode::Poly
            } else {
                Mode::Direct
            };
            if want != mode {
                mode = want;
                if mode == Mode::Poly {
                    y = elem_sym(&x);
                }
                traj.events.push(Event {
                    time: t,
                    kind: EventKind::SchemeSwitch,
                });
            }
        }

        let mut dt = ctl.dt_base;
        if ctl.adaptive && mode == Mode::Direct {
            let ratio = x.min_gap() / ctl.hybrid_switch_gap;
            dt *= (ratio * ratio).min(1.0);
        }
        if t + dt > t_final {
            dt = t_final - t;
        }
        let z = noise.normal_vec(p);

        match mode {
            Mode::Direct => {
                if x.min_gap() <= ctl.gap_floor {
                    traj.events.push(Event {
                        time: t,
                        kind: EventKind::GapFloorHit,
                    });
                    return Err(Error::Singularity {
                        i: 0,
                        j: 0,
                        gap: x.min_gap(),
                    });
                }
                let out =
                    step_direct_detailed(cs, &x, dt, &z, ctl.gap_floor).map_err(|e| match e {
                        Error::Explosion { .. } => Error::Explosion { time: t },
                        other => other,
                    })?;
                if out.sorted {
                    traj.sort_repairs += 1;
                }
                if out.clamped {
                    traj.events.push(Event {
                        time: t + dt,
                        kind: EventKind::Clamped,
                    });
                }
                x = out.x;
                if track_poly {
                    y = elem_sym(&x);
                }
            }
            Mode::Poly => {
                let collapse_tol = default_recovery_tol(&y);
                // a legitimate Euler step can leave the real-rooted set by
                // an imaginary excursion of the order of its own noise, so
                // the abort bound tracks the one-step noise scale
                let sigma_max = (0..p)
                    .map(|i| cs.sigma(i, x.coords()[i]).abs())
                    .fold(0.0, f64::max);
                let repair_tol = (1e-4 * y.scale()).max(8.0 * dt.sqrt() * sigma_max);
                let y_next = step_poly_from(cs, &y, &x, dt, &z);
                if y_next.coords().iter().any(|v| !v.is_finite()) {
                    return Err(Error::Explosion { time: t });
                }
                let (mut x_next, max_imag) = poly_to_chamber_detailed(&y_next, repair_tol)?;
                y = y_next;
                if max_imag > collapse_tol {
                    // project back onto the recovered boundary state so the
                    // excursion does not accumulate
                    y = elem_sym(&x_next);
                    traj.events.push(Event {
                        time: t + dt,
                        kind: EventKind::NonrealRootsRepaired,
                    });
                }
                if cs.domain != Domain::Real {
                    let mut clamped = false;
                    let mut xs = x_next.into_inner();
                    for v in xs.iter_mut() {
                        let c = cs.domain.clamp(*v);
                        if c != *v {
                            clamped = true;
                            *v = c;
                        }
                    }
                    x_next = ChamberPoint::new(xs)?;
                    if clamped {
                        y = elem_sym(&x_next);
                        traj.events.push(Event {
                            time: t + dt,
                            kind: EventKind::Clamped,
                        });
                    }
                }
                x = x_next;
            }
        }

        if x.coords().iter().any(|v| !v.is_finite()) {
            return Err(Error::Explosion { time: t + dt });
        }

        t += dt;
        step_index += 1;
        let is_final = t >= t_final;
        if is_final || step_index.is_multiple_of(ctl.sample_every as u64) {
            traj.times.push(t);
            traj.states.push(x.clone());
            if let Some(ys) = traj.poly_states.as_mut() {
                ys.push(y.clone());
            }
        }
    }

    Ok(traj)
}

/// Per-time mean, standard deviation and standard error across paths.
#[derive(Clone, Debug, serde::Serialize)]
pub struct SeriesStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub stderr: Vec<f64>,
}

/// Ensemble aggregates over sampled times: per-coordinate statistics plus
/// e_1, the squared radius sum x_i^2, the minimum gap and the squared
/// Vandermonde determinant.
#[derive(Clone, Debug, serde::Serialize)]
pub struct EnsembleStats {
    pub times: Vec<f64>,
    pub coords: Vec<SeriesStats>,
    pub e1: SeriesStats,
    pub r_sq: SeriesStats,
    pub min_gap: SeriesStats,
    pub v_last: SeriesStats,
    pub n_paths: usize,
    pub event_counts: BTreeMap<String, u64>,
    pub sort_repairs: u64,
}

struct PathSummary {
    /// rows[time][obs]: x_1..x_p, e1, r_sq, min_gap, v_last
    rows: Vec<Vec<f64>>,
    times: Vec<f64>,
    events: BTreeMap<String, u64>,
    sort_repairs: u64,
}

fn summarize_path(traj: &Trajectory, p: usize) -> PathSummary {
    let mut rows = Vec::with_capacity(traj.times.len());
    for st in &traj.states {
        let xs = st.coords();
        let mut row = Vec::with_capacity(p + 4);
        row.extend_from_slice(xs);
        row.push(xs.iter().sum());
        row.push(xs.iter().map(|v| v * v).sum());
        row.push(if p > 1 { st.min_gap() } else { f64::INFINITY });
        row.push(if p > 1 {
            *gap_polys(st).last().unwrap()
        } else {
            0.0
        });
        rows.push(row);
    }
    let mut events = BTreeMap::new();
    for e in &traj.events {
        *events
            .entry(format!("{:?}", e.kind).to_lowercase())
            .or_insert(0) += 1;
    }
    PathSummary {
        rows,
        times: traj.times.clone(),
        events,
        sort_repairs: traj.sort_repairs,
    }
}

/// Run `n_paths` independent paths (sub-stream k drives path k) and
/// aggregate. Workers only split the work: the reduction is performed in
/// path order, so the result is bit-identical for any worker count.
pub fn simulate_ensemble(
    cs: &CoefficientSet,
    x0: &ChamberPoint,
    t_final: f64,
    ctl: &StepControl,
    n_paths: usize,
    base_seed: u64,
) -> Result<EnsembleStats> {
    ctl.validate()?;
    if n_paths == 0 {
        return Err(Error::Invalid("n_paths must be at least 1".into()));
    }
    if ctl.adaptive {
        return Err(Error::Invalid(
            "ensembles need a shared time grid; adaptive stepping is per-path".into(),
        ));
    }
    let p = cs.p();
    let base = NoisePath::from_seed(base_seed);

    let mut slots: Vec<Option<Result<PathSummary>>> = (0..n_paths).map(|_| None).collect();
    let workers = ctl.workers.min(n_paths);
    let chunk = n_paths.div_ceil(workers);
    std::thread::scope(|scope| {
        for (w, block) in slots.chunks_mut(chunk).enumerate() {
            let base = &base;
            let start = w * chunk;
            scope.spawn(move || {
                for (off, slot) in block.iter_mut().enumerate() {
                    let k = start + off;
                    let noise = base.substream(k as u64);
                    let res = simulate(cs, x0, t_final, ctl, noise).map(|t| summarize_path(&t, p));
                    *slot = Some(res);
                }
            });
        }
    });

    // ordered reduction
    let mut times: Option<Vec<f64>> = None;
    let n_obs = p + 4;
    let mut count = 0usize;
    let mut mean: Vec<Vec<f64>> = Vec::new();
    let mut m2: Vec<Vec<f64>> = Vec::new();
    let mut event_counts: BTreeMap<String, u64> = BTreeMap::new();
    let mut sort_repairs = 0u64;

    for (k, slot) in slots.into_iter().enumerate() {
        let summary = slot
            .expect("worker filled every slot")
            .map_err(|e| Error::Path {
                path: k,
                source: Box::new(e),
            })?;
        match &times {
            None => {
                times = Some(summary.times.clone());
                let n_t = summary.times.len();
                mean = vec![vec![0.0; n_obs]; n_t];
                m2 = vec![vec![0.0; n_obs]; n_t];
            }
            Some(t) => {
                if *t != summary.times {
                    return Err(Error::Invalid(
                        "paths produced different sample grids".into(),
                    ));
                }
            }
        }
        count += 1;
        let c = count as f64;
        for (ti, row) in summary.rows.iter().enumerate() {
            for (oi, &v) in row.iter().enumerate() {
                let delta = v - mean[ti][oi];
                mean[ti][oi] += delta / c;
                m2[ti][oi] += delta * (v - mean[ti][oi]);
            }
        }
        for (k2, v) in summary.events {
            *event_counts.entry(k2).or_insert(0) += v;
        }
        sort_repairs += summary.sort_repairs;
    }

    let times = times.unwrap();
    let n = count as f64;
    let series = |oi: usize, mean: &[Vec<f64>], m2: &[Vec<f64>]| -> SeriesStats {
        let mut s = SeriesStats {
            mean: Vec::with_capacity(times.len()),
            std: Vec::with_capacity(times.len()),
            stderr: Vec::with_capacity(times.len()),
        };
        for ti in 0..times.len() {
            let var = if count > 1 {
                m2[ti][oi] / (n - 1.0)
            } else {
                0.0
            };
            let sd = var.max(0.0).sqrt();
            s.mean.push(mean[ti][oi]);
            s.std.push(sd);
            s.stderr.push(sd / n.sqrt());
        }
        s
    };

    Ok(EnsembleStats {
        coords: (0..p).map(|i| series(i, &mean, &m2)).collect(),
        e1: series(p, &mean, &m2),
        r_sq: series(p + 1, &mean, &m2),
        min_gap: series(p + 2, &mean, &m2),
        v_last: series(p + 3, &mean, &m2),
        times,
        n_paths: count,
        event_counts,
        sort_repairs,
    })
}
