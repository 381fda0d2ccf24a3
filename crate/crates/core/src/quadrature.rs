//! Interpolatory RBF quadrature rules and their stability diagnostics.
//!
//! The weights solve the bordered moment system
//!
//! ```text
//! [ Phi  P ] [w]   [m_rbf ]
//! [ P^T  0 ] [v] = [m_poly]
//! ```
//!
//! so that the rule integrates every element of the approximation space
//! exactly; `v` is the Lagrange multiplier of the constrained formulation.
//! Stability is measured by the sum of absolute weights: it equals the rule
//! applied to 1 exactly when all weights are nonnegative, and bounds the
//! amplification of input noise.

use alloc::vec::Vec;

use crate::linalg::LuFactor;
use crate::math;
use crate::moments::{self, MomentError, MomentVector};
use crate::pointsets::{Domain, Point, PointSet};
use crate::rbfsystem::{self, RbfSpace, SystemError};

/// How a rule was constructed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Interpolatory,
    LeastSquares,
}

impl core::fmt::Display for Provenance {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Provenance::Interpolatory => write!(f, "interpolatory"),
            Provenance::LeastSquares => write!(f, "least_squares"),
        }
    }
}

#[derive(Clone, Debug)]
pub enum QuadratureError {
    System(SystemError),
    Moments(MomentError),
    /// The weight decomposition needs a polynomial term (`d >= 0`).
    NeedsPolynomials,
    /// `Phi` alone is singular or numerically singular, so the decomposition
    /// through `Phi^{-1}` is unavailable.
    PhiNotInvertible {
        cond: f64,
    },
    /// The projected block `P^T Phi^{-1} P` is too ill-conditioned to invert.
    IllConditionedProjection {
        cond: f64,
    },
}

impl core::fmt::Display for QuadratureError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            QuadratureError::System(e) => write!(f, "{e}"),
            QuadratureError::Moments(e) => write!(f, "{e}"),
            QuadratureError::NeedsPolynomials => {
                write!(f, "weight decomposition needs degree >= 0")
            }
            QuadratureError::PhiNotInvertible { cond } => {
                write!(
                    f,
                    "kernel matrix not usably invertible (condition {cond:e})"
                )
            }
            QuadratureError::IllConditionedProjection { cond } => {
                write!(
                    f,
                    "projected polynomial block too ill-conditioned ({cond:e})"
                )
            }
        }
    }
}

impl core::error::Error for QuadratureError {}

impl From<SystemError> for QuadratureError {
    fn from(e: SystemError) -> Self {
        QuadratureError::System(e)
    }
}

impl From<MomentError> for QuadratureError {
    fn from(e: MomentError) -> Self {
        QuadratureError::Moments(e)
    }
}

/// Positivity slack: weight solves never produce exact zeros, so a rule
/// counts as stable when its smallest weight is above
/// `-1e-12 * max(1, sum |w|)`.
pub fn positivity_tolerance(stability_measure: f64) -> f64 {
    1e-12 * stability_measure.max(1.0)
}

/// Stability summary of a weight vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StabilityReport {
    /// `sum |w_n|`, the operator norm of the rule on C(Omega).
    pub stability_measure: f64,
    /// `sum w_n`, the rule applied to 1.
    pub rule_of_one: f64,
    pub min_weight: f64,
    /// `min_weight >= -positivity_tolerance(stability_measure)`.
    pub is_stable: bool,
}

/// A quadrature rule with its construction metadata.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    points: PointSet,
    weights: Vec<f64>,
    multipliers: Vec<f64>,
    provenance: Provenance,
    condition_estimate: f64,
    solve_residual: f64,
}

impl QuadratureRule {
    pub(crate) fn new(
        points: PointSet,
        weights: Vec<f64>,
        multipliers: Vec<f64>,
        provenance: Provenance,
        condition_estimate: f64,
        solve_residual: f64,
    ) -> Self {
        Self {
            points,
            weights,
            multipliers,
            provenance,
            condition_estimate,
            solve_residual,
        }
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Lagrange multipliers of the polynomial exactness constraints; empty
    /// for `d = -1` and for least-squares rules.
    pub fn multipliers(&self) -> &[f64] {
        &self.multipliers
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// 1-norm condition estimate of the construction solve.
    pub fn condition_estimate(&self) -> f64 {
        self.condition_estimate
    }

    /// Max-norm residual of the construction solve.
    pub fn solve_residual(&self) -> f64 {
        self.solve_residual
    }

    /// `sum w_n f(x_n)`.
    pub fn apply(&self, mut f: impl FnMut(&Point) -> f64) -> f64 {
        self.weights
            .iter()
            .zip(self.points.points())
            .map(|(w, p)| w * f(p))
            .sum()
    }

    /// `sum w_n values[n]` for precomputed (possibly noisy) nodal values.
    pub fn apply_values(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.weights.len());
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    pub fn stability_measure(&self) -> f64 {
        self.weights.iter().map(|w| math::abs(*w)).sum()
    }

    pub fn rule_of_one(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn min_weight(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn stability_report(&self) -> StabilityReport {
        let stability_measure = self.stability_measure();
        let rule_of_one = self.rule_of_one();
        let min_weight = self.min_weight();
        StabilityReport {
            stability_measure,
            rule_of_one,
            min_weight,
            is_stable: min_weight >= -positivity_tolerance(stability_measure),
        }
    }
}

/// Interpolatory weights: the moments of the cardinal functions of the
/// space, computed by solving the bordered moment system on the centers.
///
/// Ill-conditioned systems are *not* rejected: the rule records its
/// condition estimate and solve residual, so sweeps over flat-kernel regimes
/// can flag them. Exactly singular systems and non-unisolvent centers fail.
///
/// ```
/// use rbfquad_core::{Domain, Kernel, PointSet, RbfSpace, ShapePolicy};
/// use rbfquad_core::quadrature::interpolatory_weights;
///
/// // The linear spline kernel on an equidistant grid reproduces the
/// // composite trapezoid rule.
/// let points = PointSet::equidistant(Domain::unit_interval(), 11);
/// let space = RbfSpace::new(
///     Kernel::phs_odd(1).unwrap(),
///     points,
///     ShapePolicy::Constant(1.0),
///     -1,
/// ).unwrap();
/// let rule = interpolatory_weights(&space).unwrap();
/// assert!(rule.stability_report().is_stable);
/// assert!((rule.apply(|p| p[0]) - 0.5).abs() < 1e-10);
/// ```
pub fn interpolatory_weights(space: &RbfSpace) -> Result<QuadratureRule, QuadratureError> {
    let moments = moments::rbf_moments(space, space.centers().domain())?;
    interpolatory_weights_with_moments(space, &moments)
}

/// As [`interpolatory_weights`], reusing precomputed moments.
pub fn interpolatory_weights_with_moments(
    space: &RbfSpace,
    moments: &MomentVector,
) -> Result<QuadratureRule, QuadratureError> {
    let sys = rbfsystem::assemble(space, space.centers())?;
    let n = space.centers().len();
    let rhs = moments.stacked();
    let sol = sys.solve_bordered(&rhs)?;
    let residual = sys.bordered_residual_inf(&rhs, &sol);
    Ok(QuadratureRule::new(
        space.centers().clone(),
        sol[..n].to_vec(),
        sol[n..].to_vec(),
        Provenance::Interpolatory,
        sys.condition_estimate().unwrap_or(f64::NAN),
        residual,
    ))
}

/// Default sampling grid for the Lebesgue estimate: 2000 equidistant points
/// in 1D, 101 x 101 in 2D.
pub fn default_lebesgue_grid(domain: &Domain) -> PointSet {
    match domain.dim() {
        1 => PointSet::equidistant(*domain, 2000),
        _ => PointSet::equidistant(*domain, 101),
    }
}

/// Sampled lower bound of the Lebesgue constant
/// `Lambda_N = sup_x sum_n |c_n(x)|`, maximized over the grid.
pub fn estimate_lebesgue(space: &RbfSpace, sample_grid: &PointSet) -> Result<f64, QuadratureError> {
    let sys = rbfsystem::assemble(space, space.centers())?;
    let mut best = 0.0f64;
    for x in sample_grid.points() {
        let c = sys.cardinal_values(space, x)?;
        let s: f64 = c.iter().map(|v| math::abs(*v)).sum();
        if s > best {
            best = s;
        }
    }
    Ok(best)
}

/// Relative identity gap and the pieces of the weight split
/// `w = w_hat - B I[tau]`.
///
/// `w_hat` are the pure-kernel weights (`d = -1`), the correction
/// `B I[tau]` accounts for appending the polynomial term, and `w` are the
/// full rule's weights computed independently from the bordered system.
#[derive(Clone, Debug)]
pub struct WeightDecomposition {
    pub w: Vec<f64>,
    pub w_hat: Vec<f64>,
    pub correction: Vec<f64>,
    /// `||w - (w_hat - correction)||_inf / ||w||_inf`.
    pub identity_gap: f64,
    /// 1-norm condition estimate of `Phi` alone.
    pub phi_condition: f64,
}

impl WeightDecomposition {
    /// `||correction||_1`, the total weight mass moved by the polynomial
    /// term.
    pub fn correction_mass(&self) -> f64 {
        self.correction.iter().map(|v| math::abs(*v)).sum()
    }
}

/// Condition limit above which `Phi` is treated as not invertible for the
/// decomposition.
pub const PHI_COND_LIMIT: f64 = 1e16;

/// Split the weights of a polynomial-augmented rule into the pure-kernel
/// weights and the polynomial correction `B I[tau]` with
/// `B = Phi^{-1} P (P^T Phi^{-1} P)^{-1}` and
/// `I[tau] = P^T w_hat - m_poly`.
///
/// Requires `d >= 0` and an invertible `Phi` (checked via the condition
/// estimate against [`PHI_COND_LIMIT`]); both sides of the identity are
/// computed independently and the relative gap is reported.
pub fn decompose_weights(space: &RbfSpace) -> Result<WeightDecomposition, QuadratureError> {
    if space.poly_dim() == 0 {
        return Err(QuadratureError::NeedsPolynomials);
    }
    let domain = space.centers().domain();
    let moments = moments::rbf_moments(space, domain)?;

    // Full rule from the bordered system.
    let rule = interpolatory_weights_with_moments(space, &moments)?;
    let w = rule.weights().to_vec();

    // Pure-kernel side through Phi's own factorization.
    let sys = rbfsystem::assemble(space, space.centers())?;
    let phi = sys.phi();
    let p = sys.poly_block();
    let n = phi.rows();
    let k = p.cols();

    let lu = LuFactor::factor(phi).map_err(|_| QuadratureError::PhiNotInvertible {
        cond: f64::INFINITY,
    })?;
    let phi_condition = lu.cond_1_estimate(phi.norm_1());
    if phi_condition > PHI_COND_LIMIT {
        return Err(QuadratureError::PhiNotInvertible {
            cond: phi_condition,
        });
    }

    let w_hat = lu.solve_refined(phi, &moments.rbf, 2);

    // Y = Phi^{-1} P, column by column.
    let mut y_cols: Vec<Vec<f64>> = Vec::with_capacity(k);
    for j in 0..k {
        let col: Vec<f64> = (0..n).map(|i| p.get(i, j)).collect();
        y_cols.push(lu.solve_refined(phi, &col, 2));
    }
    // T = P^T Y (k x k).
    let t = crate::linalg::Mat::from_fn(k, k, |i, j| {
        (0..n).map(|r| p.get(r, i) * y_cols[j][r]).sum()
    });
    let t_lu = LuFactor::factor(&t).map_err(|_| QuadratureError::IllConditionedProjection {
        cond: f64::INFINITY,
    })?;
    let t_cond = t_lu.cond_1_estimate(t.norm_1());
    if t_cond > PHI_COND_LIMIT {
        return Err(QuadratureError::IllConditionedProjection { cond: t_cond });
    }

    // I[tau] = P^T w_hat - m_poly.
    let mut i_tau = alloc::vec![0.0; k];
    for (j, slot) in i_tau.iter_mut().enumerate() {
        let dot: f64 = (0..n).map(|r| p.get(r, j) * w_hat[r]).sum();
        *slot = dot - moments.poly[j];
    }
    let t_sol = t_lu.solve_refined(&t, &i_tau, 2);

    // correction = Y * t_sol = B I[tau].
    let mut correction = alloc::vec![0.0; n];
    for (j, coeff) in t_sol.iter().enumerate() {
        for (slot, y) in correction.iter_mut().zip(&y_cols[j]) {
            *slot += coeff * y;
        }
    }

    let w_inf = w.iter().map(|v| math::abs(*v)).fold(0.0, f64::max);
    let gap = w
        .iter()
        .enumerate()
        .map(|(i, wi)| math::abs(wi - (w_hat[i] - correction[i])))
        .fold(0.0, f64::max);
    let identity_gap = if w_inf > 0.0 { gap / w_inf } else { gap };

    Ok(WeightDecomposition {
        w,
        w_hat,
        correction,
        identity_gap,
        phi_condition,
    })
}
