//! Coefficient functions defining a particle system and the named preset
//! families with their exact parameterizations.
//!
//! A system of p ordered particles evolves by
//!
//! ```text
//! dx_i = sigma_i(x_i) dB_i + ( b_i(x_i) + sum_{j != i} H_ij(x_i, x_j) / (x_i - x_j) ) dt
//! ```
//!
//! with non-negative interaction kernels satisfying the symmetry
//! `H_ij(x, y) = H_ji(y, x)`. Every field and kernel carries a
//! machine-readable descriptor so the conditions checker can dispatch
//! closed-form predicates for presets and fall back to grid sampling for
//! custom systems.

use crate::error::{Error, Result};
use crate::expr::Expr;
use serde::Serialize;

/// Relative gap threshold below which the singular drift is refused.
pub const GAP_MACHINE_ZERO: f64 = 1e-12;

/// Continuity-modulus descriptor attached to a scalar field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Modulus {
    Lipschitz(f64),
    HolderHalf(f64),
}

/// Closed form of a scalar coefficient function.
#[derive(Clone, Debug)]
pub enum FieldForm {
    Const(f64),
    /// c0 + c1 * x
    Affine {
        c0: f64,
        c1: f64,
    },
    /// 2 sqrt(max(x, 0)); tolerates sub-machine-epsilon negative
    /// excursions of the direct integrator.
    SqrtNonneg,
    /// 2 sqrt(|x|)
    SqrtAbs,
    /// 2 sqrt(x (1 - x)) on [0, 1]
    SqrtJacobi,
    Custom(Expr),
}

/// A scalar coefficient function (a diffusion sigma_i or a drift b_i).
#[derive(Clone, Debug)]
pub struct ScalarField {
    pub form: FieldForm,
    pub modulus_hint: Option<Modulus>,
}

impl ScalarField {
    pub fn constant(c: f64) -> Self {
        Self {
            form: FieldForm::Const(c),
            modulus_hint: Some(Modulus::Lipschitz(0.0)),
        }
    }

    pub fn custom(e: Expr) -> Self {
        Self {
            form: FieldForm::Custom(e),
            modulus_hint: None,
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match &self.form {
            FieldForm::Const(c) => *c,
            FieldForm::Affine { c0, c1 } => c0 + c1 * x,
            FieldForm::SqrtNonneg => 2.0 * x.max(0.0).sqrt(),
            FieldForm::SqrtAbs => 2.0 * x.abs().sqrt(),
            FieldForm::SqrtJacobi => 2.0 * (x * (1.0 - x)).max(0.0).sqrt(),
            FieldForm::Custom(e) => e.eval(&[x]),
        }
    }
}

/// Closed form of a pairwise interaction kernel.
#[derive(Clone, Debug)]
pub enum KernelForm {
    Zero,
    Const(f64),
    /// beta (x + y)
    SumScaled(f64),
    /// beta (|x| + |y|)
    AbsSumScaled(f64),
    /// beta (x (1 - y) + y (1 - x))
    JacobiMix(f64),
    /// gamma (y - x) coth(y - x), extended by continuity to gamma at 0
    CothProduct(f64),
    /// (y - x) psi(y - x) for an odd repulsion profile psi
    PsiProduct(Expr),
    Custom(Expr),
}

/// A non-negative symmetric interaction kernel H_ij.
#[derive(Clone, Debug)]
pub struct InteractionKernel {
    pub form: KernelForm,
}

impl InteractionKernel {
    pub fn constant(c: f64) -> Self {
        Self {
            form: KernelForm::Const(c),
        }
    }

    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match &self.form {
            KernelForm::Zero => 0.0,
            KernelForm::Const(c) => *c,
            KernelForm::SumScaled(beta) => beta * (x + y),
            KernelForm::AbsSumScaled(beta) => beta * (x.abs() + y.abs()),
            KernelForm::JacobiMix(beta) => beta * (x * (1.0 - y) + y * (1.0 - x)),
            KernelForm::CothProduct(gamma) => {
                let u = y - x;
                if u == 0.0 {
                    *gamma
                } else {
                    gamma * u / u.tanh()
                }
            }
            KernelForm::PsiProduct(psi) => {
                // psi blows up at 0 like an inverse power; the product
                // u * psi(u) is evaluated at a tiny offset for the limit.
                let u = y - x;
                let u = if u == 0.0 { 1e-8 } else { u };
                u * psi.eval(&[u])
            }
            KernelForm::Custom(e) => e.eval(&[x, y]),
        }
    }
}

/// State interval a preset lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Domain {
    Real,
    /// [0, inf)
    HalfLine,
    /// [0, 1]
    UnitInterval,
}

impl Domain {
    pub fn clamp(&self, x: f64) -> f64 {
        match self {
            Domain::Real => x,
            Domain::HalfLine => x.max(0.0),
            Domain::UnitInterval => x.clamp(0.0, 1.0),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        match self {
            Domain::Real => x.is_finite(),
            Domain::HalfLine => x >= 0.0,
            Domain::UnitInterval => (0.0..=1.0).contains(&x),
        }
    }

    /// A representative box for grid sampling of conditions.
    pub fn natural_box(&self) -> (f64, f64) {
        match self {
            Domain::Real => (-3.0, 3.0),
            Domain::HalfLine => (0.0, 4.0),
            Domain::UnitInterval => (0.0, 1.0),
        }
    }
}

/// Named preset families with their parameters, stored as given.
/// Parameter validity is judged only by the conditions module.
#[derive(Clone, Debug)]
pub enum PresetParams {
    /// Interacting Brownian particles: H_ij = gamma.
    DysonCepa { gamma: f64 },
    /// Only neighbor particles interact: H_ij = gamma iff |i-j| = 1.
    NearestNeighbor { gamma: f64 },
    /// Squared-Bessel-type particles on [0, inf).
    BetaWishart { alpha: f64, beta: f64 },
    /// Absolute-value variant on the whole line.
    BetaWishartAbs { alpha: f64, beta: f64 },
    /// Jacobi particles on [0, 1].
    Jacobi { q: f64, r: f64, beta: f64 },
    /// Repulsion gamma coth(x_i - x_j).
    Hyperbolic { gamma: f64 },
    /// Difference repulsion psi(x_i - x_j) with x psi(x) >= gamma.
    GeneralPsi { psi: Expr, gamma: f64 },
}

impl PresetParams {
    pub fn name(&self) -> &'static str {
        match self {
            PresetParams::DysonCepa { .. } => "dyson",
            PresetParams::NearestNeighbor { .. } => "nearest_neighbor",
            PresetParams::BetaWishart { .. } => "beta_wishart",
            PresetParams::BetaWishartAbs { .. } => "beta_wishart_abs",
            PresetParams::Jacobi { .. } => "jacobi",
            PresetParams::Hyperbolic { .. } => "hyperbolic",
            PresetParams::GeneralPsi { .. } => "general_psi",
        }
    }
}

/// The triple (sigma_i, b_i, H_ij) defining a particle system.
///
/// Kernels are stored only for i < j; access for (j, i) resolves through
/// the symmetry `H_ji(x, y) = H_ij(y, x)`. Immutable after construction
/// and safe to share across simulation workers.
#[derive(Clone, Debug)]
pub struct CoefficientSet {
    p: usize,
    sigma: Vec<ScalarField>,
    b: Vec<ScalarField>,
    /// upper-triangular grid, row-major over pairs (i, j) with i < j
    kernels: Vec<InteractionKernel>,
    pub domain: Domain,
    pub preset: Option<PresetParams>,
}

impl CoefficientSet {
    /// Assemble a custom system from per-particle fields and an upper
    /// triangular kernel grid (`kernels[k]` for the k-th pair i < j in
    /// lexicographic order).
    pub fn from_parts(
        sigma: Vec<ScalarField>,
        b: Vec<ScalarField>,
        kernels: Vec<InteractionKernel>,
        domain: Domain,
    ) -> Result<Self> {
        let p = sigma.len();
        if p < 1 {
            return Err(Error::Invalid("particle count must be >= 1".into()));
        }
        if b.len() != p {
            return Err(Error::Invalid(format!(
                "need {} drift fields, got {}",
                p,
                b.len()
            )));
        }
        let n_pairs = p * (p - 1) / 2;
        if kernels.len() != n_pairs {
            return Err(Error::Invalid(format!(
                "need {} kernels for p = {}, got {}",
                n_pairs,
                p,
                kernels.len()
            )));
        }
        Ok(Self {
            p,
            sigma,
            b,
            kernels,
            domain,
            preset: None,
        })
    }

    /// Simplified case: the same sigma, b and H for every particle/pair.
    pub fn uniform(
        p: usize,
        sigma: ScalarField,
        b: ScalarField,
        kernel: InteractionKernel,
        domain: Domain,
    ) -> Result<Self> {
        let n_pairs = p * (p - 1) / 2;
        Self::from_parts(vec![sigma; p], vec![b; p], vec![kernel; n_pairs], domain)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    fn pair_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.p);
        // lexicographic over (i, j), i < j
        i * self.p - i * (i + 1) / 2 + (j - i - 1)
    }

    #[inline]
    pub fn sigma(&self, i: usize, x: f64) -> f64 {
        self.sigma[i].eval(x)
    }

    #[inline]
    pub fn b(&self, i: usize, x: f64) -> f64 {
        self.b[i].eval(x)
    }

    pub fn sigma_field(&self, i: usize) -> &ScalarField {
        &self.sigma[i]
    }

    pub fn b_field(&self, i: usize) -> &ScalarField {
        &self.b[i]
    }

    pub fn kernel(&self, i: usize, j: usize) -> &InteractionKernel {
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        &self.kernels[self.pair_index(lo, hi)]
    }

    /// H_ij(x, y); (j, i) access resolves via H_ji(x, y) = H_ij(y, x).
    #[inline]
    pub fn h(&self, i: usize, j: usize, x: f64, y: f64) -> f64 {
        debug_assert!(i != j);
        if i < j {
            self.kernels[self.pair_index(i, j)].eval(x, y)
        } else {
            self.kernels[self.pair_index(j, i)].eval(y, x)
        }
    }

    /// Full drift of particle `i` at the ordered state `x`, including the
    /// singular repulsion sum.
    pub fn singular_drift(&self, i: usize, x: &[f64]) -> Result<f64> {
        debug_assert_eq!(x.len(), self.p);
        let xi = x[i];
        let mut drift = self.b(i, xi);
        for (j, &xj) in x.iter().enumerate() {
            if j == i {
                continue;
            }
            let gap = xi - xj;
            let h = self.h(i, j, xi, xj);
            if gap.abs() < GAP_MACHINE_ZERO * xi.abs().max(1.0) {
                if h > 0.0 {
                    return Err(Error::Singularity {
                        i: i + 1,
                        j: j + 1,
                        gap: gap.abs(),
                    });
                }
                // inactive kernel at a tie contributes nothing
                continue;
            }
            drift += h / gap;
        }
        Ok(drift)
    }
}

/// Build the exact coefficient functions of a named preset family.
pub fn build_preset(params: PresetParams, p: usize) -> Result<CoefficientSet> {
    if p < 1 {
        return Err(Error::Invalid("particle count must be >= 1".into()));
    }
    let one = ScalarField {
        form: FieldForm::Const(1.0),
        modulus_hint: Some(Modulus::Lipschitz(0.0)),
    };
    let zero = ScalarField {
        form: FieldForm::Const(0.0),
        modulus_hint: Some(Modulus::Lipschitz(0.0)),
    };
    let n_pairs = p * (p - 1) / 2;
    let mut cs = match &params {
        PresetParams::DysonCepa { gamma } => CoefficientSet::uniform(
            p,
            one,
            zero,
            InteractionKernel::constant(*gamma),
            Domain::Real,
        )?,
        PresetParams::NearestNeighbor { gamma } => {
            let mut kernels = Vec::with_capacity(n_pairs);
            for i in 0..p {
                for j in (i + 1)..p {
                    kernels.push(if j - i == 1 {
                        InteractionKernel::constant(*gamma)
                    } else {
                        InteractionKernel {
                            form: KernelForm::Zero,
                        }
                    });
                }
            }
            CoefficientSet::from_parts(vec![one; p], vec![zero; p], kernels, Domain::Real)?
        }
        PresetParams::BetaWishart { alpha, beta } => CoefficientSet::uniform(
            p,
            ScalarField {
                form: FieldForm::SqrtNonneg,
                modulus_hint: Some(Modulus::HolderHalf(2.0)),
            },
            ScalarField::constant(beta * alpha),
            InteractionKernel {
                form: KernelForm::SumScaled(*beta),
            },
            Domain::HalfLine,
        )?,
        PresetParams::BetaWishartAbs { alpha, beta } => CoefficientSet::uniform(
            p,
            ScalarField {
                form: FieldForm::SqrtAbs,
                modulus_hint: Some(Modulus::HolderHalf(2.0)),
            },
            ScalarField::constant(beta * alpha),
            InteractionKernel {
                form: KernelForm::AbsSumScaled(*beta),
            },
            Domain::Real,
        )?,
        PresetParams::Jacobi { q, r, beta } => CoefficientSet::uniform(
            p,
            ScalarField {
                form: FieldForm::SqrtJacobi,
                modulus_hint: Some(Modulus::HolderHalf(2.0)),
            },
            ScalarField {
                form: FieldForm::Affine {
                    c0: beta * q,
                    c1: -beta * (q + r),
                },
                modulus_hint: Some(Modulus::Lipschitz(beta * (q + r))),
            },
            InteractionKernel {
                form: KernelForm::JacobiMix(*beta),
            },
            Domain::UnitInterval,
        )?,
        PresetParams::Hyperbolic { gamma } => CoefficientSet::uniform(
            p,
            one,
            zero,
            InteractionKernel {
                form: KernelForm::CothProduct(*gamma),
            },
            Domain::Real,
        )?,
        PresetParams::GeneralPsi { psi, gamma: _ } => CoefficientSet::uniform(
            p,
            one,
            zero,
            InteractionKernel {
                form: KernelForm::PsiProduct(psi.clone()),
            },
            Domain::Real,
        )?,
    };
    cs.preset = Some(params);
    Ok(cs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dyson(gamma: f64, p: usize) -> CoefficientSet {
        build_preset(PresetParams::DysonCepa { gamma }, p).unwrap()
    }

    #[test]
    fn dyson_preset_closed_forms() {
        let cs = dyson(1.0, 3);
        assert_eq!(cs.h(0, 1, 5.0, 7.0), 1.0);
        assert_eq!(cs.sigma(1, 0.3), 1.0);
        assert_eq!(cs.b(0, 2.7), 0.0);
    }

    #[test]
    fn wishart_preset_closed_forms() {
        let cs = build_preset(
            PresetParams::BetaWishart {
                alpha: 3.0,
                beta: 1.0,
            },
            3,
        )
        .unwrap();
        assert_eq!(cs.b(0, 11.0), 3.0);
        assert_eq!(cs.h(0, 1, 2.0, 5.0), 7.0);
        assert_eq!(cs.sigma(2, 4.0), 4.0);
        assert_eq!(cs.sigma(0, -1e-18), 0.0);
        assert_eq!(cs.domain, Domain::HalfLine);
    }

    #[test]
    fn hyperbolic_kernel_diagonal_limit() {
        let cs = build_preset(PresetParams::Hyperbolic { gamma: 2.0 }, 2).unwrap();
        assert_eq!(cs.h(0, 1, 0.7, 0.7), 2.0);
        // u coth u >= 1, so H >= gamma everywhere
        for k in 0..100 {
            let u = -5.0 + 0.1 * k as f64;
            assert!(cs.h(0, 1, 0.0, u) >= 2.0 - 1e-12);
        }
    }

    #[test]
    fn nearest_neighbor_kernel_layout() {
        let cs = build_preset(PresetParams::NearestNeighbor { gamma: 0.75 }, 4).unwrap();
        assert_eq!(cs.h(0, 1, 0.0, 1.0), 0.75);
        assert_eq!(cs.h(2, 1, 0.0, 1.0), 0.75);
        assert_eq!(cs.h(0, 2, 0.0, 1.0), 0.0);
        assert_eq!(cs.h(3, 0, 0.0, 1.0), 0.0);
    }

    #[test]
    fn singular_drift_examples() {
        let cs = dyson(1.0, 3);
        let x = [0.0, 1.0, 3.0];
        let d1 = cs.singular_drift(0, &x).unwrap();
        assert!((d1 - (-4.0 / 3.0)).abs() < 1e-15);
        let d3 = cs.singular_drift(2, &x).unwrap();
        assert!((d3 - 5.0 / 6.0).abs() < 1e-15);

        let w = build_preset(
            PresetParams::BetaWishart {
                alpha: 3.0,
                beta: 1.0,
            },
            2,
        )
        .unwrap();
        let d = w.singular_drift(1, &[1.0, 4.0]).unwrap();
        assert!((d - 14.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn singular_drift_refuses_active_tie() {
        let cs = dyson(1.0, 2);
        let err = cs.singular_drift(0, &[1.0, 1.0 + 1e-15]).unwrap_err();
        assert!(matches!(err, Error::Singularity { .. }));
    }

    #[test]
    fn inactive_kernel_tie_is_tolerated() {
        // nearest-neighbor: particles 1 and 3 do not interact, so their
        // tie does not make the drift of either singular
        let cs = build_preset(PresetParams::NearestNeighbor { gamma: 1.0 }, 3).unwrap();
        let d = cs.singular_drift(0, &[1.0, 2.0, 1.0 + 1e-16]);
        assert!(d.is_ok());
        // Wishart at a double zero: H(0, 0) = 0, drift stays finite
        let w = build_preset(
            PresetParams::BetaWishart {
                alpha: 3.0,
                beta: 1.0,
            },
            2,
        )
        .unwrap();
        assert_eq!(w.singular_drift(0, &[0.0, 0.0]).unwrap(), 3.0);
    }

    #[test]
    fn pairwise_interaction_cancels_for_symmetric_kernels() {
        // sum_i sum_{j != i} H(x_i, x_j)/(x_i - x_j) = 0 whenever every
        // pair uses one symmetric function H
        for cs in [
            dyson(0.8, 5),
            build_preset(
                PresetParams::BetaWishart {
                    alpha: 4.0,
                    beta: 1.5,
                },
                5,
            )
            .unwrap(),
        ] {
            let x = [0.3, 0.9, 1.4, 2.2, 3.1];
            let total: f64 = (0..5)
                .map(|i| cs.singular_drift(i, &x).unwrap() - cs.b(i, x[i]))
                .sum();
            assert!(total.abs() < 1e-12, "total = {total}");
        }
    }

    #[test]
    fn kernel_symmetry_and_nonnegativity_sampled() {
        let presets = vec![
            build_preset(PresetParams::DysonCepa { gamma: 1.0 }, 3).unwrap(),
            build_preset(
                PresetParams::BetaWishart {
                    alpha: 3.0,
                    beta: 1.0,
                },
                3,
            )
            .unwrap(),
            build_preset(
                PresetParams::BetaWishartAbs {
                    alpha: 1.5,
                    beta: 2.0,
                },
                3,
            )
            .unwrap(),
            build_preset(
                PresetParams::Jacobi {
                    q: 3.0,
                    r: 3.0,
                    beta: 1.0,
                },
                3,
            )
            .unwrap(),
            build_preset(PresetParams::Hyperbolic { gamma: 1.0 }, 3).unwrap(),
        ];
        let mut rng = crate::rng::SplitMix64::seed_from_u64(31);
        for cs in &presets {
            let (lo, hi) = cs.domain.natural_box();
            for _ in 0..10_000 {
                let x = lo + (hi - lo) * rng.next_open01();
                let y = lo + (hi - lo) * rng.next_open01();
                let hxy = cs.h(0, 1, x, y);
                let hyx = cs.h(1, 0, y, x);
                assert!(
                    (hxy - hyx).abs() <= 1e-12 * hxy.abs().max(1.0),
                    "symmetry violated for {:?} at ({x}, {y})",
                    cs.preset.as_ref().map(|p| p.name())
                );
                assert!(hxy >= 0.0);
            }
        }
    }

    #[test]
    fn wishart_sigma_growth_bound_iff_beta_ge_one() {
        // sigma^2(x) = 4x <= 4 beta |x| on [0, inf) exactly when beta >= 1
        for &(beta, ok) in &[(1.0, true), (2.5, true), (0.999, false)] {
            let cs = build_preset(PresetParams::BetaWishart { alpha: 3.0, beta }, 2).unwrap();
            let holds = (0..1000).all(|k| {
                let x = 4.0 * k as f64 / 999.0;
                let s2 = cs.sigma(0, x).powi(2);
                s2 <= 4.0 * beta * x.abs() + 1e-12
            });
            assert_eq!(holds, ok, "beta = {beta}");
        }
    }

    #[test]
    fn preset_p1_is_allowed() {
        // the one-particle system is a legal degenerate case: no pairs
        let cs = dyson(1.0, 1);
        assert_eq!(cs.p(), 1);
        assert_eq!(cs.singular_drift(0, &[0.4]).unwrap(), 0.0);
    }
}
