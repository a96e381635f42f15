//! Statistical invariants of the integrators beyond the acceptance gate:
//! strong-order behavior under noise refinement, generator convergence of
//! the squared-gap drift as dt shrinks, covariance structure of the
//! poly-space noise, boundary-event rates, and non-explosion at desk
//! parameters.

use noncolliding::coefficients::{build_preset, CoefficientSet};
use noncolliding::conditions::{check_numeric, check_preset, Verdict};
use noncolliding::integrate::{simulate, step_direct, Scheme, StepControl};
use noncolliding::rng::{NoisePath, SplitMix64};
use noncolliding::sympoly::{
    elem_sym, gap_dynamics, gap_polys, log_vandermonde_drift, ChamberPoint,
};
use noncolliding::{PresetParams, Result};

fn dyson(gamma: f64, p: usize) -> CoefficientSet {
    build_preset(PresetParams::DysonCepa { gamma }, p).unwrap()
}

/// Drive one direct path with externally supplied normal increments.
fn direct_path_with(
    cs: &CoefficientSet,
    x0: &ChamberPoint,
    dt: f64,
    increments: &[Vec<f64>],
) -> Result<ChamberPoint> {
    let mut x = x0.clone();
    for z in increments {
        x = step_direct(cs, &x, dt, z)?;
    }
    Ok(x)
}

#[test]
fn strong_order_under_noise_refinement() {
    // the same Brownian path sampled at dt and dt/2: the endpoint gap
    // between resolutions shrinks by a factor consistent with strong
    // order 1/2..1 when dt halves
    let cs = dyson(1.0, 3);
    let x0 = ChamberPoint::new(vec![-1.0, 0.0, 1.0]).unwrap();
    let t_final = 0.25;
    let n_paths = 150;
    let base = NoisePath::from_seed(0x5742);

    let mut err = [0.0f64; 2]; // |X_dt - X_dt/2| and |X_dt/2 - X_dt/4|
    for k in 0..n_paths {
        let mut noise = base.substream(k as u64);
        let dt_fine = t_final / 1024.0;
        let fine: Vec<Vec<f64>> = (0..1024).map(|_| noise.normal_vec(3)).collect();
        // coarsen by summing pairs of increments (and rescaling to unit
        // variance: (z1 + z2)/sqrt(2) drives the doubled step)
        let coarsen = |zs: &[Vec<f64>]| -> Vec<Vec<f64>> {
            zs.chunks(2)
                .map(|pair| {
                    (0..3)
                        .map(|i| (pair[0][i] + pair[1][i]) / 2.0_f64.sqrt())
                        .collect()
                })
                .collect()
        };
        let mid = coarsen(&fine);
        let coarse = coarsen(&mid);
        let x_fine = direct_path_with(&cs, &x0, dt_fine, &fine).unwrap();
        let x_mid = direct_path_with(&cs, &x0, 2.0 * dt_fine, &mid).unwrap();
        let x_coarse = direct_path_with(&cs, &x0, 4.0 * dt_fine, &coarse).unwrap();
        let sup = |a: &ChamberPoint, b: &ChamberPoint| {
            a.coords()
                .iter()
                .zip(b.coords())
                .map(|(u, v)| (u - v).abs())
                .fold(0.0, f64::max)
        };
        err[0] += sup(&x_coarse, &x_mid);
        err[1] += sup(&x_mid, &x_fine);
    }
    let ratio = err[0] / err[1];
    assert!(
        (1.2..=2.8).contains(&ratio),
        "refinement ratio {ratio} outside [1.2, 2.8]"
    );
}

#[test]
fn generator_converges_with_dt() {
    // the empirical one-step generator of V_1 approaches the closed-form
    // drift as dt drops through 1e-3, 1e-4, 1e-5
    let cs = dyson(1.0, 3);
    let x = ChamberPoint::new(vec![-1.0, 0.0, 1.0]).unwrap();
    let gd = gap_dynamics(&cs, &x);
    let v0 = gap_polys(&x);
    let mut errors = Vec::new();
    for (dt, pairs) in [(1e-3, 40_000), (1e-4, 40_000), (1e-5, 40_000)] {
        let mut noise = NoisePath::from_seed(0x9E21);
        let mut acc = 0.0;
        for _ in 0..pairs {
            let z = noise.normal_vec(3);
            let zneg: Vec<f64> = z.iter().map(|v| -v).collect();
            let xp = step_direct(&cs, &x, dt, &z).unwrap();
            let xm = step_direct(&cs, &x, dt, &zneg).unwrap();
            acc += 0.5 * (gap_polys(&xp)[0] + gap_polys(&xm)[0]) - v0[0];
        }
        let est = acc / (pairs as f64 * dt);
        errors.push((est - gd.d[0]).abs());
    }
    // the dt = 1e-3 estimate carries a visible O(dt) bias; by 1e-5 the
    // estimate is within Monte Carlo noise of the exact rate
    assert!(
        errors[2] < 0.05 * gd.d[0].abs(),
        "finest error {} too large",
        errors[2]
    );
    assert!(
        errors[0] * 0.5 > errors[2] || errors[0] < 0.02 * gd.d[0].abs(),
        "no decay: {errors:?}"
    );
}

#[test]
fn poly_noise_covariance_matches_rates() {
    // empirical covariance of (dy_1, dy_2) over one-step direct updates
    // reproduces s_12 = sigma^2(x_1) x_2 + sigma^2(x_2) x_1
    let cs = dyson(1.0, 2);
    let x = ChamberPoint::new(vec![0.0, 1.0]).unwrap();
    let pd = noncolliding::sympoly::poly_dynamics(&cs, &x);
    assert_eq!(pd.s[(0, 1)], 1.0);

    let dt = 1e-4;
    let n = 200_000;
    let mut noise = NoisePath::from_seed(0xC07);
    let y0 = elem_sym(&x);
    let mut sum1 = 0.0;
    let mut sum2 = 0.0;
    let mut sum12 = 0.0;
    for _ in 0..n {
        let z = noise.normal_vec(2);
        let x1 = step_direct(&cs, &x, dt, &z).unwrap();
        let y1 = elem_sym(&x1);
        let d1 = y1.coords()[0] - y0.coords()[0];
        let d2 = y1.coords()[1] - y0.coords()[1];
        sum1 += d1;
        sum2 += d2;
        sum12 += d1 * d2;
    }
    let nf = n as f64;
    let cov = (sum12 - sum1 * sum2 / nf) / nf / dt;
    assert!(
        (cov - pd.s[(0, 1)]).abs() < 0.05,
        "cov {cov} vs s_12 {}",
        pd.s[(0, 1)]
    );
}

#[test]
fn single_particle_is_driftless_brownian() {
    // p = 1 constant-repulsion system: no interaction, b = 0, so the mean
    // stays at the start
    let cs = dyson(1.0, 1);
    let x0 = ChamberPoint::new(vec![0.7]).unwrap();
    let ctl = {
        let mut c = StepControl::new(1e-3);
        c.sample_every = 250;
        c
    };
    let n = 2000;
    let base = NoisePath::from_seed(0x1D);
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for k in 0..n {
        let traj = simulate(&cs, &x0, 0.25, &ctl, base.substream(k as u64)).unwrap();
        let v = traj.final_state().coords()[0];
        sum += v;
        sumsq += v * v;
    }
    let mean = sum / n as f64;
    let var = sumsq / n as f64 - mean * mean;
    let stderr = (var / n as f64).sqrt();
    assert!(
        (mean - 0.7).abs() < 4.0 * stderr,
        "mean {mean} vs 0.7 (stderr {stderr})"
    );
}

#[test]
fn clamp_rate_decreases_with_dt() {
    // Wishart paths hug the half-line boundary; the projection events
    // become rarer per step as dt shrinks
    let cs = build_preset(
        PresetParams::BetaWishart {
            alpha: 3.0,
            beta: 1.0,
        },
        3,
    )
    .unwrap();
    let base = NoisePath::from_seed(0xB0);
    let mut rates = Vec::new();
    for dt in [1e-3, 1e-4] {
        let ctl = {
            let mut c = StepControl::new(dt);
            c.sample_every = usize::MAX; // events only
            c
        };
        let mut clamps = 0u64;
        let mut steps = 0u64;
        for k in 0..40 {
            let traj = simulate(&cs, &ChamberPoint::zero(3), 0.5, &ctl, base.substream(k)).unwrap();
            clamps += traj.events.len() as u64;
            steps += (0.5 / dt) as u64;
        }
        rates.push(clamps as f64 / steps as f64);
    }
    assert!(
        rates[1] < rates[0],
        "clamp rate did not decrease: {rates:?}"
    );
}

#[test]
fn sort_repair_rate_decreases_with_dt() {
    // direct steps from a tight but separated pair: adjacent swaps are
    // a coarse-dt artifact
    let cs = dyson(0.6, 2);
    let x0 = ChamberPoint::new(vec![0.0, 0.08]).unwrap();
    let base = NoisePath::from_seed(0x50);
    let mut rates = Vec::new();
    for dt in [1e-3, 1e-5] {
        let ctl = {
            let mut c = StepControl::new(dt);
            c.scheme = Scheme::Direct;
            c.gap_floor = 1e-12;
            c.sample_every = usize::MAX;
            c
        };
        let mut repairs = 0u64;
        let mut steps = 0u64;
        let mut paths = 0;
        for k in 0..60 {
            if let Ok(traj) = simulate(&cs, &x0, 0.05, &ctl, base.substream(k)) {
                repairs += traj.sort_repairs;
                steps += (0.05 / dt) as u64;
                paths += 1;
            }
        }
        assert!(paths > 0);
        rates.push(repairs as f64 / steps as f64);
    }
    assert!(
        rates[1] <= rates[0],
        "sort-repair rate did not decrease: {rates:?}"
    );
}

#[test]
fn no_explosion_for_passing_presets_at_desk_scale() {
    let cases: Vec<(CoefficientSet, ChamberPoint)> = vec![
        (dyson(1.0, 3), ChamberPoint::zero(3)),
        (
            build_preset(
                PresetParams::BetaWishart {
                    alpha: 3.0,
                    beta: 1.0,
                },
                3,
            )
            .unwrap(),
            ChamberPoint::zero(3),
        ),
        (
            build_preset(
                PresetParams::Jacobi {
                    q: 2.5,
                    r: 2.5,
                    beta: 1.0,
                },
                3,
            )
            .unwrap(),
            ChamberPoint::new(vec![0.3, 0.5, 0.7]).unwrap(),
        ),
        (
            build_preset(PresetParams::Hyperbolic { gamma: 1.0 }, 3).unwrap(),
            ChamberPoint::zero(3),
        ),
        (
            build_preset(PresetParams::NearestNeighbor { gamma: 0.75 }, 3).unwrap(),
            ChamberPoint::new(vec![-0.5, 0.0, 0.5]).unwrap(),
        ),
    ];
    let ctl = {
        let mut c = StepControl::new(1e-3);
        c.sample_every = 1000;
        c
    };
    for (cs, x0) in &cases {
        assert_eq!(check_preset(cs).overall, Verdict::Pass);
        for k in 0..5u64 {
            let traj = simulate(cs, x0, 4.0, &ctl, NoisePath::from_seed(0xE0).substream(k));
            assert!(
                traj.is_ok(),
                "{:?} exploded: {:?}",
                cs.preset.as_ref().map(|p| p.name()),
                traj.err()
            );
        }
    }
}

#[test]
fn log_vandermonde_bounded_by_drift_lipschitz_constant() {
    // for systems passing the checks, the rate of -1/2 ln V_N is bounded
    // by the pairwise sum of the drift Lipschitz constant: the gap and
    // triple terms are non-positive under A2/A3 with c = 0
    let cases = vec![
        dyson(0.8, 3),
        build_preset(
            PresetParams::BetaWishart {
                alpha: 3.0,
                beta: 1.2,
            },
            3,
        )
        .unwrap(),
        build_preset(
            PresetParams::Jacobi {
                q: 2.0,
                r: 2.0,
                beta: 1.0,
            },
            3,
        )
        .unwrap(),
        build_preset(PresetParams::Hyperbolic { gamma: 0.9 }, 3).unwrap(),
    ];
    let mut rng = SplitMix64::seed_from_u64(0xF00);
    for cs in &cases {
        let rep = check_numeric(cs, cs.domain.natural_box(), 16, 1e-9).unwrap();
        assert_eq!(rep.overall, Verdict::Pass);
        let lip = rep.constants["c1_lipschitz_b"];
        let pairs = (cs.p() * (cs.p() - 1) / 2) as f64;
        let bound = pairs * lip + 1e-9;
        let (lo, hi) = cs.domain.natural_box();
        let mut checked = 0;
        while checked < 2000 {
            let mut xs: Vec<f64> = (0..cs.p())
                .map(|_| lo + (hi - lo) * rng.next_open01())
                .collect();
            xs.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
            if xs.windows(2).any(|w| w[1] - w[0] < 0.02) {
                continue;
            }
            let x = ChamberPoint::new(xs).unwrap();
            let drift = log_vandermonde_drift(cs, &x).unwrap();
            assert!(
                drift <= bound,
                "{:?}: drift {drift} above bound {bound}",
                cs.preset.as_ref().map(|p| p.name())
            );
            checked += 1;
        }
    }
}

#[test]
fn beta_one_matrix_oracle_matches_simulator() {
    // gamma = 1/2 with unit diffusion is the beta = 1 family: eigenvalues
    // of a symmetric Brownian matrix with calibrated entry variances
    let cs = dyson(0.5, 2);
    let n = 1500;
    let ctl = {
        let mut c = StepControl::new(1e-3);
        c.sample_every = 1000;
        c
    };
    let base = NoisePath::from_seed(0xB1);
    let mut sim_pool = Vec::with_capacity(2 * n);
    for k in 0..n {
        let traj = simulate(
            &cs,
            &ChamberPoint::zero(2),
            1.0,
            &ctl,
            base.substream(k as u64),
        )
        .unwrap();
        sim_pool.extend(traj.final_state().coords().to_vec());
    }
    let oracle = noncolliding::analysis::matrix_oracle(1, 2, 1.0, n, 0xB2).unwrap();
    let oracle_pool: Vec<f64> = oracle.samples.into_iter().flatten().collect();
    let d = noncolliding::analysis::ks_distance(&sim_pool, &oracle_pool).unwrap();
    assert!(d < 0.05, "beta = 1 pooled KS = {d}");
}
