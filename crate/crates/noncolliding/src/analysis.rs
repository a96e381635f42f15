//! Statistical validation: collision diagnostics along trajectories,
//! closed-form moment laws, an independent random-matrix oracle for the
//! beta = 1, 2 families, and a two-sample Kolmogorov-Smirnov distance.

use crate::coefficients::{CoefficientSet, PresetParams};
use crate::error::{Error, Result};
use crate::integrate::{EnsembleStats, Trajectory};
use crate::rng::NoisePath;
use crate::sympoly::gap_polys;
use nalgebra::DMatrix;
use serde::Serialize;

/// Gap and Vandermonde diagnostics along one trajectory.
#[derive(Clone, Debug, Serialize)]
pub struct CollisionReport {
    /// smallest adjacent gap per sampled time
    pub min_gap_series: Vec<f64>,
    /// squared Vandermonde determinant per sampled time
    pub v_n_series: Vec<f64>,
    /// first sampled time with min gap above eps
    pub diffraction_time: Option<f64>,
    /// whether the min gap dropped below tol at any sample after the start
    pub collision_flag: bool,
}

pub fn collision_report(traj: &Trajectory, eps: f64, tol: f64) -> CollisionReport {
    let min_gap_series: Vec<f64> = traj.states.iter().map(|s| s.min_gap()).collect();
    let v_n_series: Vec<f64> = traj
        .states
        .iter()
        .map(|s| {
            if s.p() > 1 {
                *gap_polys(s).last().unwrap()
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let diffraction_time = traj
        .times
        .iter()
        .zip(&min_gap_series)
        .find(|(_, g)| **g > eps)
        .map(|(t, _)| *t);
    let collision_flag = min_gap_series.iter().skip(1).any(|g| *g < tol);
    CollisionReport {
        min_gap_series,
        v_n_series,
        diffraction_time,
        collision_flag,
    }
}

/// Sorted eigenvalue vectors of Brownian symmetric (beta = 1) or Hermitian
/// (beta = 2) matrices at time t.
#[derive(Clone, Debug, Serialize)]
pub struct EigenSample {
    pub beta: u8,
    pub t: f64,
    pub samples: Vec<Vec<f64>>,
}

/// Sample the matrix model whose ordered eigenvalues solve the particle
/// SDE with sigma = 1 and constant repulsion gamma = beta / 2.
///
/// Entry variances are calibrated once against the closed-form identity
/// E[sum lambda_i^2] = t (p + gamma p (p - 1)): diagonal entries have
/// variance t and each off-diagonal entry has total variance t (split
/// over real and imaginary parts for beta = 2).
pub fn matrix_oracle(beta: u8, p: usize, t: f64, n: usize, seed: u64) -> Result<EigenSample> {
    if beta != 1 && beta != 2 {
        return Err(Error::Invalid(format!(
            "no matrix model for beta = {beta}; only 1 and 2"
        )));
    }
    let mut rng = NoisePath::from_seed(seed);
    let sqrt_t = t.sqrt();
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        let eig = if t == 0.0 {
            vec![0.0; p]
        } else if beta == 1 {
            let mut m = DMatrix::<f64>::zeros(p, p);
            for i in 0..p {
                m[(i, i)] = sqrt_t * rng.normal_vec(1)[0];
                for j in (i + 1)..p {
                    let v = (t / 2.0).sqrt() * rng.normal_vec(1)[0];
                    m[(i, j)] = v;
                    m[(j, i)] = v;
                }
            }
            let mut eig: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
            eig.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
            eig
        } else {
            // Hermitian A + iB embedded as the symmetric [[A, -B], [B, A]];
            // each eigenvalue appears twice
            let mut a = DMatrix::<f64>::zeros(p, p);
            let mut b = DMatrix::<f64>::zeros(p, p);
            for i in 0..p {
                a[(i, i)] = sqrt_t * rng.normal_vec(1)[0];
                for j in (i + 1)..p {
                    let zs = rng.normal_vec(2);
                    let u = (t / 2.0).sqrt() * zs[0];
                    let v = (t / 2.0).sqrt() * zs[1];
                    a[(i, j)] = u;
                    a[(j, i)] = u;
                    b[(i, j)] = v;
                    b[(j, i)] = -v;
                }
            }
            let mut m = DMatrix::<f64>::zeros(2 * p, 2 * p);
            for i in 0..p {
                for j in 0..p {
                    m[(i, j)] = a[(i, j)];
                    m[(i, j + p)] = -b[(i, j)];
                    m[(i + p, j)] = b[(i, j)];
                    m[(i + p, j + p)] = a[(i, j)];
                }
            }
            let mut all: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
            all.sort_unstable_by(|x, y| x.partial_cmp(y).unwrap());
            all.into_iter().step_by(2).collect()
        };
        samples.push(eig);
    }
    Ok(EigenSample { beta, t, samples })
}

/// Two-sample Kolmogorov-Smirnov statistic: the sup distance between the
/// empirical distribution functions.
pub fn ks_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_unstable_by(|u, v| u.partial_cmp(v).unwrap());
    ys.sort_unstable_by(|u, v| u.partial_cmp(v).unwrap());
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let mut i = 0;
    let mut j = 0;
    let mut d: f64 = 0.0;
    while i < xs.len() || j < ys.len() {
        let v = match (xs.get(i), ys.get(j)) {
            (Some(x), Some(y)) => x.min(*y),
            (Some(x), None) => *x,
            (None, Some(y)) => *y,
            (None, None) => break,
        };
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(d)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentObservable {
    /// sum of squared positions
    RSq,
    /// sum of positions
    E1,
}

/// Empirical moment against its closed-form prediction. The prediction
/// comes from the exact drift rate, never from a fit.
#[derive(Clone, Debug, Serialize)]
pub struct MomentReport {
    pub observable: MomentObservable,
    pub t: f64,
    pub empirical_mean: f64,
    pub stderr: f64,
    pub predicted: f64,
    pub z_score: f64,
}

/// Compare the ensemble mean of the preset's natural observable at time t
/// with its closed-form law: sum x_i^2 grows at rate p + gamma p (p - 1)
/// for constant repulsion, and sum x_i at rate beta p alpha for the
/// Wishart families.
pub fn moment_report(ens: &EnsembleStats, cs: &CoefficientSet, t: f64) -> Result<MomentReport> {
    let p = cs.p() as f64;
    let (observable, rate) = match &cs.preset {
        Some(PresetParams::DysonCepa { gamma }) => {
            (MomentObservable::RSq, p + gamma * p * (p - 1.0))
        }
        Some(PresetParams::BetaWishart { alpha, beta })
        | Some(PresetParams::BetaWishartAbs { alpha, beta }) => {
            (MomentObservable::E1, beta * p * alpha)
        }
        other => {
            return Err(Error::UnsupportedPrediction {
                preset: other
                    .as_ref()
                    .map(|q| q.name().to_string())
                    .unwrap_or_else(|| "custom".into()),
                observable: "moment law".into(),
            })
        }
    };

    let ti = ens
        .times
        .iter()
        .position(|u| (u - t).abs() <= 1e-9 * t.abs().max(1.0))
        .ok_or_else(|| Error::Invalid(format!("time {t} not on the sample grid")))?;
    let series = match observable {
        MomentObservable::RSq => &ens.r_sq,
        MomentObservable::E1 => &ens.e1,
    };
    let initial = series.mean[0];
    let predicted = initial + rate * t;
    let empirical_mean = series.mean[ti];
    let stderr = series.stderr[ti];
    let diff = empirical_mean - predicted;
    let z_score = if diff == 0.0 {
        0.0
    } else if stderr > 0.0 {
        diff / stderr
    } else {
        f64::INFINITY
    };
    Ok(MomentReport {
        observable,
        t,
        empirical_mean,
        stderr,
        predicted,
        z_score,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::build_preset;
    use crate::integrate::{simulate_ensemble, StepControl};
    use crate::sympoly::ChamberPoint;

    fn const_traj(states: Vec<Vec<f64>>, dt: f64) -> Trajectory {
        Trajectory {
            times: (0..states.len()).map(|k| k as f64 * dt).collect(),
            states: states
                .into_iter()
                .map(|v| ChamberPoint::new(v).unwrap())
                .collect(),
            poly_states: None,
            events: vec![],
            sort_repairs: 0,
        }
    }

    #[test]
    fn collision_report_examples() {
        // constant separated trajectory
        let t1 = const_traj(vec![vec![0.0, 1.0, 2.0]; 4], 0.1);
        let r1 = collision_report(&t1, 1e-6, 1e-12);
        assert!(!r1.collision_flag);
        assert_eq!(r1.diffraction_time, Some(0.0));

        // equal pair at t = 0 only
        let t2 = const_traj(
            vec![
                vec![0.0, 0.0, 1.0],
                vec![0.0, 0.1, 1.0],
                vec![0.0, 0.2, 1.0],
            ],
            0.1,
        );
        let r2 = collision_report(&t2, 1e-6, 1e-12);
        assert!(!r2.collision_flag);
        assert_eq!(r2.diffraction_time, Some(0.1));

        // all-zero trajectory
        let t3 = const_traj(vec![vec![0.0, 0.0, 0.0]; 3], 0.1);
        let r3 = collision_report(&t3, 1e-6, 1e-12);
        assert!(r3.collision_flag);
        assert!(r3.v_n_series.iter().all(|v| *v == 0.0));
        assert_eq!(r3.diffraction_time, None);
    }

    #[test]
    fn v_series_zero_iff_gap_zero() {
        let t = const_traj(vec![vec![0.0, 0.0, 1.0], vec![0.0, 0.5, 1.0]], 0.1);
        let r = collision_report(&t, 1e-6, 1e-12);
        for (g, v) in r.min_gap_series.iter().zip(&r.v_n_series) {
            assert_eq!(*g == 0.0, *v == 0.0);
        }
    }

    #[test]
    fn v_series_matches_vandermonde_product() {
        let states = vec![vec![-1.0, 0.2, 0.9], vec![-0.5, 0.1, 2.0]];
        let t = const_traj(states.clone(), 0.1);
        let r = collision_report(&t, 1e-6, 1e-12);
        for (st, v) in states.iter().zip(&r.v_n_series) {
            let mut prod = 1.0;
            for i in 0..3 {
                for j in (i + 1)..3 {
                    prod *= (st[i] - st[j]).powi(2);
                }
            }
            assert!((v - prod).abs() <= 1e-10 * prod.abs().max(1.0));
        }
    }

    #[test]
    fn ks_examples() {
        let a = [1.0, 2.0, 3.0];
        assert_eq!(ks_distance(&a, &a).unwrap(), 0.0);
        let lo = [0.0, 0.1, 0.2];
        let hi = [5.0, 6.0, 7.0];
        assert_eq!(ks_distance(&lo, &hi).unwrap(), 1.0);
        let x = [1.0, 2.0];
        let y = [1.0, 2.0, 3.0];
        assert!((ks_distance(&x, &y).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(ks_distance(&[], &a).is_err());
    }

    #[test]
    fn ks_detects_shift() {
        let mut rng = crate::rng::NoisePath::from_seed(8);
        let a: Vec<f64> = (0..2000).map(|_| rng.normal_vec(1)[0]).collect();
        let b: Vec<f64> = (0..2000).map(|_| rng.normal_vec(1)[0] + 0.5).collect();
        let same: Vec<f64> = (0..2000).map(|_| rng.normal_vec(1)[0]).collect();
        assert!(ks_distance(&a, &b).unwrap() > 0.1);
        assert!(ks_distance(&a, &same).unwrap() < 0.06);
    }

    #[test]
    fn oracle_zero_time_and_scalar_case() {
        let z = matrix_oracle(2, 3, 0.0, 10, 1).unwrap();
        assert!(z.samples.iter().all(|v| v.iter().all(|x| *x == 0.0)));

        // p = 1, beta = 1: a centered Gaussian with variance t
        let t = 2.5;
        let s = matrix_oracle(1, 1, t, 40_000, 2).unwrap();
        let vals: Vec<f64> = s.samples.iter().map(|v| v[0]).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let var =
            vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (vals.len() - 1) as f64;
        assert!(mean.abs() < 0.03, "mean = {mean}");
        assert!((var - t).abs() < 0.06, "var = {var}");
    }

    #[test]
    fn oracle_calibration_matches_trace_law() {
        // beta = 2, p = 3, t = 1: E[sum lambda^2] = p + p (p - 1) = 9
        let s = matrix_oracle(2, 3, 1.0, 5000, 3).unwrap();
        let mean: f64 = s
            .samples
            .iter()
            .map(|v| v.iter().map(|x| x * x).sum::<f64>())
            .sum::<f64>()
            / s.samples.len() as f64;
        assert!((mean - 9.0).abs() < 0.25, "E[tr] = {mean}");
        // eigenvalues come out sorted
        assert!(s.samples.iter().all(|v| v.windows(2).all(|w| w[0] <= w[1])));
    }

    #[test]
    fn oracle_rejects_other_beta() {
        assert!(matrix_oracle(3, 3, 1.0, 5, 1).is_err());
    }

    #[test]
    fn moment_report_dyson() {
        let cs = build_preset(PresetParams::DysonCepa { gamma: 1.0 }, 2).unwrap();
        let x0 = ChamberPoint::zero(2);
        let mut ctl = StepControl::new(1e-3);
        ctl.sample_every = 50;
        let t = 0.4;
        let ens = simulate_ensemble(&cs, &x0, t, &ctl, 1500, 9).unwrap();
        let rep = moment_report(&ens, &cs, t).unwrap();
        assert_eq!(rep.observable, MomentObservable::RSq);
        // rate p + gamma p (p-1) = 4
        assert!((rep.predicted - 4.0 * t).abs() < 1e-12);
        assert!(rep.z_score.abs() < 4.0, "z = {}", rep.z_score);
    }

    #[test]
    fn moment_report_at_time_zero() {
        let cs = build_preset(
            PresetParams::BetaWishart {
                alpha: 3.0,
                beta: 1.0,
            },
            2,
        )
        .unwrap();
        let x0 = ChamberPoint::new(vec![0.5, 1.5]).unwrap();
        let ctl = StepControl::new(1e-3);
        let ens = simulate_ensemble(&cs, &x0, 0.01, &ctl, 3, 4).unwrap();
        // t = 0 is the first sample: predicted equals observed
        let rep = moment_report(&ens, &cs, 0.0).unwrap();
        assert_eq!(rep.z_score, 0.0);
        assert_eq!(rep.predicted, rep.empirical_mean);
    }

    #[test]
    fn moment_report_needs_closed_form() {
        let cs = build_preset(PresetParams::Hyperbolic { gamma: 1.0 }, 2).unwrap();
        let x0 = ChamberPoint::new(vec![0.0, 1.0]).unwrap();
        let ctl = StepControl::new(1e-3);
        let ens = simulate_ensemble(&cs, &x0, 0.01, &ctl, 2, 4).unwrap();
        assert!(matches!(
            moment_report(&ens, &cs, 0.01),
            Err(Error::UnsupportedPrediction { .. })
        ));
    }
}
