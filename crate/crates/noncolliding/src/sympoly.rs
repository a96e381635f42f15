//! Elementary symmetric polynomials, the chamber <-> coefficient maps, and
//! the singularity-free dynamics they induce.
//!
//! The open Weyl chamber C+ = { x_1 < ... < x_p } maps diffeomorphically
//! onto an open set of R^p through e = (e_1, ..., e_p), the elementary
//! symmetric polynomials; the inverse f extends continuously to the closed
//! chamber (ties allowed). In e-coordinates the particle SDE loses its
//! 1/(x_i - x_j) singularities:
//!
//! ```text
//! dy_n = a_n(y) dU_n + q_n(y) dt,
//! q_n  = sum_i b_i(x_i) e_{n-1}^{(i)}(x) - sum_{i<j} H_ij(x_i, x_j) e_{n-2}^{(i,j)}(x),
//! a_n^2 = sum_i sigma_i^2(x_i) (e_{n-1}^{(i)}(x))^2,
//! ```
//!
//! where e_m^{(i,...)} are the incomplete polynomials omitting the listed
//! coordinates. The squared-gap polynomials V_n = e_n({(x_i - x_j)^2})
//! control collisions: V_N is the squared Vandermonde determinant and
//! V_n = 0 exactly when at least N - n + 1 gaps vanish. Their drift and
//! quadratic-variation rates are also singularity-free and are produced by
//! [`gap_dynamics`].

use crate::coefficients::{CoefficientSet, GAP_MACHINE_ZERO};
use crate::error::{Error, Result};
use nalgebra::{Complex, DMatrix};

/// Ordered particle vector x_1 <= x_2 <= ... <= x_p (closed chamber).
#[derive(Clone, Debug, PartialEq)]
pub struct ChamberPoint(Vec<f64>);

impl ChamberPoint {
    /// Wrap an already ordered vector.
    pub fn new(x: Vec<f64>) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::Invalid("empty chamber point".into()));
        }
        if x.windows(2)
            .any(|w| w[0] > w[1] || w[0].is_nan() || w[1].is_nan())
        {
            return Err(Error::Invalid(format!("coordinates not ordered: {x:?}")));
        }
        Ok(Self(x))
    }

    /// Sort into the chamber.
    pub fn from_unsorted(mut x: Vec<f64>) -> Result<Self> {
        if x.iter().any(|v| v.is_nan()) {
            return Err(Error::Invalid("NaN coordinate".into()));
        }
        x.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        Self::new(x)
    }

    pub fn zero(p: usize) -> Self {
        Self(vec![0.0; p])
    }

    pub fn p(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Smallest adjacent gap; infinite for a single particle.
    pub fn min_gap(&self) -> f64 {
        self.0
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_strictly_ordered(&self) -> bool {
        self.0.windows(2).all(|w| w[0] < w[1])
    }
}

/// Image y = e(x); the state of the regularized SDE.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyPoint(Vec<f64>);

impl PolyPoint {
    pub fn new(y: Vec<f64>) -> Self {
        Self(y)
    }

    pub fn p(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn coords_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    /// Infinity norm, used to scale root-recovery tolerances.
    pub fn scale(&self) -> f64 {
        self.0.iter().fold(1.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Default conjugate-collapse tolerance for root recovery.
pub fn default_recovery_tol(y: &PolyPoint) -> f64 {
    1e-7 * y.scale()
}

/// All elementary symmetric polynomials e_0..e_m of the values surviving
/// the exclusion list (the stable product recurrence, never subset
/// enumeration).
fn esym_all_excluding(vals: &[f64], excluded: &[usize]) -> Vec<f64> {
    let m = vals.len() - excluded.len();
    let mut e = vec![0.0; m + 1];
    e[0] = 1.0;
    let mut used = 0;
    for (idx, &v) in vals.iter().enumerate() {
        if excluded.contains(&idx) {
            continue;
        }
        used += 1;
        for k in (1..=used).rev() {
            e[k] += v * e[k - 1];
        }
    }
    e
}

#[inline]
fn esym_degree(table: &[f64], n: i32) -> f64 {
    if n < 0 {
        0.0
    } else if (n as usize) < table.len() {
        table[n as usize]
    } else {
        0.0
    }
}

/// y_n = e_n(x) for n = 1..p.
pub fn elem_sym(x: &ChamberPoint) -> PolyPoint {
    let e = esym_all_excluding(x.coords(), &[]);
    PolyPoint::new(e[1..].to_vec())
}

/// Incomplete polynomial: the degree-n sum over products avoiding the
/// excluded indices, with e_0 = 1 and e_{-1} = 0.
pub fn incomplete_elem_sym(x: &ChamberPoint, excluded: &[usize], n: i32) -> f64 {
    if n < 0 {
        return 0.0;
    }
    let table = esym_all_excluding(x.coords(), excluded);
    esym_degree(&table, n)
}

/// Parlett-Reinsch balancing by powers of two; a diagonal similarity, so
/// eigenvalues are preserved exactly.
fn balance_in_place(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    let radix: f64 = 2.0;
    let sq = radix * radix;
    loop {
        let mut done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].abs();
                    r += m[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut c2 = c;
            let mut r2 = r;
            while c2 < r2 / radix {
                f *= radix;
                c2 *= sq;
                r2 /= sq;
            }
            while c2 >= r2 * radix {
                f /= radix;
                c2 /= sq;
                r2 *= sq;
            }
            if (c2 + r2) < 0.95 * s && f != 1.0 {
                done = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                }
                for j in 0..n {
                    m[(j, i)] *= f;
                }
            }
        }
        if done {
            break;
        }
    }
}

fn poly_eval_complex(coeffs: &[f64], z: Complex<f64>) -> (Complex<f64>, Complex<f64>) {
    // coeffs[k] multiplies z^k, monic leading coefficient included
    let mut p = Complex::new(0.0, 0.0);
    let mut dp = Complex::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + Complex::new(c, 0.0);
    }
    (p, dp)
}

/// Recovery with diagnostics: the ordered roots plus the largest
/// imaginary magnitude that was collapsed away.
pub fn poly_to_chamber_detailed(y: &PolyPoint, tol: f64) -> Result<(ChamberPoint, f64)> {
    let p = y.p();
    // monic coefficients of prod (z - x_i): coeff of z^{p-k} is (-1)^k y_k
    let mut coeffs = vec![0.0; p + 1];
    coeffs[p] = 1.0;
    for k in 1..=p {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        coeffs[p - k] = sign * y.coords()[k - 1];
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::RootExtraction { degree: p });
    }
    if p == 1 {
        return Ok((ChamberPoint(vec![y.coords()[0]]), 0.0));
    }

    // deflate roots at exactly zero first: a Jordan-block companion matrix
    // smears a multiple zero root over a circle of radius eps^(1/m), while
    // exact deflation keeps degenerate states (the interesting starting
    // points) exact
    let mut zero_roots = 0;
    while zero_roots < p && coeffs[zero_roots] == 0.0 {
        zero_roots += 1;
    }
    let deflated = &coeffs[zero_roots..];
    let deg = p - zero_roots;

    let mut roots: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); zero_roots];
    if deg == 1 {
        roots.push(Complex::new(-deflated[0], 0.0));
    } else if deg >= 2 {
        let mut companion = DMatrix::<f64>::zeros(deg, deg);
        for i in 0..deg {
            companion[(i, deg - 1)] = -deflated[i];
        }
        for i in 1..deg {
            companion[(i, i - 1)] = 1.0;
        }
        balance_in_place(&mut companion);

        let schur = nalgebra::linalg::Schur::try_new(companion, 1e-14, 400)
            .ok_or(Error::RootExtraction { degree: deg })?;
        let mut found: Vec<Complex<f64>> = schur.complex_eigenvalues().iter().copied().collect();

        // one guarded Newton step per root; the map commutes with
        // conjugation, so exact conjugate pairs stay exact
        for z in found.iter_mut() {
            let (pv, dpv) = poly_eval_complex(deflated, *z);
            if dpv.norm_sqr() > 1e-300 {
                let step = pv / dpv;
                let cand = *z - step;
                let (pc, _) = poly_eval_complex(deflated, cand);
                if pc.norm() <= pv.norm() {
                    *z = cand;
                }
            }
        }
        roots.extend(found);
    }

    let max_imag = roots.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if max_imag > tol {
        return Err(Error::NonRealRoots { max_imag, tol });
    }
    // a conjugate pair a +- bi is reflected to the real pair (a - b, a + b):
    // the discriminant of the pair flips sign instead of being zeroed, so
    // the recovered state lands strictly inside the chamber, where the
    // exact process lives. Real roots have im = 0 and pass through
    // unchanged; the displacement per root is at most the collapsed
    // imaginary part.
    let mut xs: Vec<f64> = roots.iter().map(|z| z.re + z.im).collect();
    if xs.iter().any(|v| !v.is_finite()) {
        return Err(Error::RootExtraction { degree: p });
    }
    xs.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    Ok((ChamberPoint(xs), max_imag))
}

/// Ascending real roots of z^p - y_1 z^{p-1} + ... + (-1)^p y_p.
///
/// Conjugate pairs with imaginary part below `tol` are folded back into
/// the chamber (a pair a +- bi becomes the real pair a -+ b, a reflection
/// of the pair discriminant through zero); a larger imaginary part means
/// the state left the real-rooted set beyond recoverable discretization
/// error and is an error.
pub fn poly_to_chamber(y: &PolyPoint, tol: f64) -> Result<ChamberPoint> {
    poly_to_chamber_detailed(y, tol).map(|(x, _)| x)
}

/// Coefficients of the regularized SDE at the state x: diffusion scales
/// `a`, drifts `q`, covariance rates `s`, and the Jacobian-like grid
/// `j[(n, i)] = e_{n-1}` of x without x_i.
#[derive(Clone, Debug)]
pub struct PolyDynamics {
    pub a: Vec<f64>,
    pub q: Vec<f64>,
    pub s: DMatrix<f64>,
    pub j: DMatrix<f64>,
}

/// Evaluate the poly-space dynamics. The formulas are singularity-free:
/// no precondition on gaps.
pub fn poly_dynamics(cs: &CoefficientSet, x: &ChamberPoint) -> PolyDynamics {
    let p = x.p();
    let xs = x.coords();

    // j[(n, i)] = e_n of x without x_i, degrees 0..p-1 per column
    let mut single = Vec::with_capacity(p);
    for i in 0..p {
        single.push(esym_all_excluding(xs, &[i]));
    }
    let mut j = DMatrix::<f64>::zeros(p, p);
    for n in 0..p {
        for i in 0..p {
            j[(n, i)] = esym_degree(&single[i], n as i32);
        }
    }

    let sig2: Vec<f64> = (0..p).map(|i| cs.sigma(i, xs[i]).powi(2)).collect();

    let mut s = DMatrix::<f64>::zeros(p, p);
    for n in 0..p {
        for m in n..p {
            let mut acc = 0.0;
            for i in 0..p {
                acc += sig2[i] * j[(n, i)] * j[(m, i)];
            }
            s[(n, m)] = acc;
            s[(m, n)] = acc;
        }
    }
    let a: Vec<f64> = (0..p).map(|n| s[(n, n)].max(0.0).sqrt()).collect();

    let mut q = vec![0.0; p];
    for (n, qn) in q.iter_mut().enumerate() {
        let mut acc = 0.0;
        for i in 0..p {
            acc += cs.b(i, xs[i]) * j[(n, i)];
        }
        if n >= 1 {
            for i in 0..p {
                for jj in (i + 1)..p {
                    let table = esym_all_excluding(xs, &[i, jj]);
                    acc -= cs.h(i, jj, xs[i], xs[jj]) * esym_degree(&table, n as i32 - 1);
                }
            }
        }
        *qn = acc;
    }

    PolyDynamics { a, q, s, j }
}

/// Squared-gap polynomials V_1..V_N over A = {(x_i - x_j)^2 : i < j}.
pub fn gap_polys(x: &ChamberPoint) -> Vec<f64> {
    let a = squared_gaps(x.coords());
    let e = esym_all_excluding(&a, &[]);
    e[1..].to_vec()
}

fn squared_gaps(xs: &[f64]) -> Vec<f64> {
    let p = xs.len();
    let mut a = Vec::with_capacity(p * (p - 1) / 2);
    for i in 0..p {
        for j in (i + 1)..p {
            a.push((xs[i] - xs[j]).powi(2));
        }
    }
    a
}

#[inline]
fn gap_index(p: usize, i: usize, j: usize) -> usize {
    let (lo, hi) = if i < j { (i, j) } else { (j, i) };
    lo * p - lo * (lo + 1) / 2 + (hi - lo - 1)
}

/// The squared-gap polynomials with their drift and quadratic-variation
/// rates.
#[derive(Clone, Debug)]
pub struct GapDynamics {
    pub v: Vec<f64>,
    pub d: Vec<f64>,
    pub qv: Vec<f64>,
}

/// Drift and quadratic variation of every V_n at the state x.
///
/// The drift decomposes into a diffusion term, a direct repulsion term,
/// two cross terms and a drift-difference term. The cross term coupling a
/// pair to a third particle contains 1/(x_i - x_k) in its raw form; it is
/// evaluated here in an algebraically rewritten form that stays finite at
/// collisions, so the rates are defined on the whole closed chamber.
pub fn gap_dynamics(cs: &CoefficientSet, x: &ChamberPoint) -> GapDynamics {
    let p = x.p();
    let xs = x.coords();
    let a = squared_gaps(xs);
    let n_gaps = a.len();
    let v_table = esym_all_excluding(&a, &[]);
    let v = v_table[1..].to_vec();

    if p < 2 {
        return GapDynamics {
            v,
            d: Vec::new(),
            qv: Vec::new(),
        };
    }

    let sig2: Vec<f64> = (0..p).map(|i| cs.sigma(i, xs[i]).powi(2)).collect();
    let bvals: Vec<f64> = (0..p).map(|i| cs.b(i, xs[i])).collect();

    // exclusion tables, indexed by the gap-pair sets they omit
    let mut single = Vec::with_capacity(n_gaps);
    for g in 0..n_gaps {
        single.push(esym_all_excluding(&a, &[g]));
    }

    let mut d = vec![0.0; n_gaps];
    let mut qv = vec![0.0; n_gaps];

    for n in 1..=n_gaps {
        let nn = n as i32;
        let mut drift = 0.0;

        // diffusion and direct repulsion terms
        for i in 0..p {
            let mut acc = 0.0;
            for j in 0..p {
                if j != i {
                    acc += esym_degree(&single[gap_index(p, i, j)], nn - 1);
                }
            }
            drift += sig2[i] * acc;
        }
        for i in 0..p {
            for j in (i + 1)..p {
                drift += 4.0
                    * cs.h(i, j, xs[i], xs[j])
                    * esym_degree(&single[gap_index(p, i, j)], nn - 1);
            }
        }

        // second-order diffusion cross term over ordered (j, k) around i
        for i in 0..p {
            if sig2[i] == 0.0 {
                continue;
            }
            let mut acc = 0.0;
            for j in 0..p {
                for k in 0..p {
                    if j == i || k == i || j == k {
                        continue;
                    }
                    let table = esym_all_excluding(&a, &[gap_index(p, i, j), gap_index(p, i, k)]);
                    acc += (xs[i] - xs[j]) * (xs[i] - xs[k]) * esym_degree(&table, nn - 2);
                }
            }
            drift += 2.0 * sig2[i] * acc;
        }

        // repulsion cross term, rewritten to stay finite at collisions:
        //   2 sum_{i!=j!=k} (x_i-x_j)(x_i-x_k) H_ik e_{n-2}(A \ {a_ij, a_ik})
        // + 2 sum_{i<k} sum_{j} H_ik [ e_{n-1}(A \ T) - (x_i-x_j)(x_k-x_j) e_{n-2}(A \ T) ]
        // with T = {a_ij, a_ik, a_jk}
        for i in 0..p {
            for k in 0..p {
                if k == i {
                    continue;
                }
                let h_ik = cs.h(i, k, xs[i], xs[k]);
                if h_ik == 0.0 {
                    continue;
                }
                for j in 0..p {
                    if j == i || j == k {
                        continue;
                    }
                    let table = esym_all_excluding(&a, &[gap_index(p, i, j), gap_index(p, i, k)]);
                    drift += 2.0
                        * (xs[i] - xs[j])
                        * (xs[i] - xs[k])
                        * h_ik
                        * esym_degree(&table, nn - 2);
                }
            }
        }
        for i in 0..p {
            for k in (i + 1)..p {
                let h_ik = cs.h(i, k, xs[i], xs[k]);
                if h_ik == 0.0 {
                    continue;
                }
                for j in 0..p {
                    if j == i || j == k {
                        continue;
                    }
                    let t = [gap_index(p, i, j), gap_index(p, i, k), gap_index(p, j, k)];
                    let table = esym_all_excluding(&a, &t);
                    let e_hi = esym_degree(&table, nn - 1);
                    let e_lo = esym_degree(&table, nn - 2);
                    drift += 2.0 * h_ik * (e_hi - (xs[i] - xs[j]) * (xs[k] - xs[j]) * e_lo);
                }
            }
        }

        // ordered-drift difference term
        for i in 0..p {
            for j in (i + 1)..p {
                drift += 2.0
                    * (xs[j] - xs[i])
                    * (bvals[j] - bvals[i])
                    * esym_degree(&single[gap_index(p, i, j)], nn - 1);
            }
        }

        d[n - 1] = drift;

        let mut qvar = 0.0;
        for i in 0..p {
            let mut acc = 0.0;
            for j in 0..p {
                if j != i {
                    acc += (xs[i] - xs[j]) * esym_degree(&single[gap_index(p, i, j)], nn - 1);
                }
            }
            qvar += sig2[i] * acc * acc;
        }
        qv[n - 1] = 4.0 * qvar;
    }

    GapDynamics { v, d, qv }
}

/// Finite-variation rate of U = -1/2 ln V_N on the open chamber: a
/// drift-difference sum, a gap-squared sum weighing diffusion against
/// repulsion, and a triple sum over particle triples. Non-positive rates
/// keep the particles from colliding.
pub fn log_vandermonde_drift(cs: &CoefficientSet, x: &ChamberPoint) -> Result<f64> {
    let p = x.p();
    let xs = x.coords();
    for i in 0..p - 1 {
        let gap = xs[i + 1] - xs[i];
        if gap < GAP_MACHINE_ZERO * xs[i].abs().max(1.0) {
            return Err(Error::Singularity {
                i: i + 1,
                j: i + 2,
                gap,
            });
        }
    }

    let mut total = 0.0;
    for i in 0..p {
        for j in (i + 1)..p {
            let gap = xs[j] - xs[i];
            total += (cs.b(i, xs[i]) - cs.b(j, xs[j])) / gap;
            let s2 = cs.sigma(i, xs[i]).powi(2) + cs.sigma(j, xs[j]).powi(2);
            total += 0.5 * (s2 - 4.0 * cs.h(i, j, xs[i], xs[j])) / (gap * gap);
        }
    }
    for i in 0..p {
        for j in (i + 1)..p {
            for k in (j + 1)..p {
                let num = cs.h(j, k, xs[j], xs[k]) * (xs[k] - xs[j])
                    - cs.h(i, k, xs[i], xs[k]) * (xs[k] - xs[i])
                    + cs.h(i, j, xs[i], xs[j]) * (xs[j] - xs[i]);
                let den = (xs[k] - xs[j]) * (xs[k] - xs[i]) * (xs[j] - xs[i]);
                total += num / den;
            }
        }
    }
    Ok(total)
}
