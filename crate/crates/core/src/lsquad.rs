//! Positive least-squares RBF quadrature.
//!
//! Exactness on the space generated by `M` centers (plus polynomials) is a
//! wide linear system `B w = m` over `N > M + K` data points. Among its
//! solutions, the weighted minimum-norm element with discrete weights
//! `r_n = |Omega| omega(x_n) / N` is positive once `N` is large enough, so
//! the construction loop simply grows the data set until the smallest weight
//! clears the positivity tolerance.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::linalg::{self, LinalgError, Mat};
use crate::math;
use crate::moments::{self, MomentError};
use crate::pointsets::{distance, Point, PointSequence, PointSet, PointSetError};
use crate::quadrature::{Provenance, QuadratureRule};
use crate::rbfsystem::RbfSpace;

#[derive(Clone, Debug)]
pub enum LsError {
    /// Fewer data points than basis functions.
    TooFewData {
        n: usize,
        needed: usize,
    },
    /// The weight function must be positive at every data point.
    NonPositiveWeight {
        index: usize,
        value: f64,
    },
    /// `B` lost row rank and the moment system became inconsistent.
    RankDeficient {
        rank: usize,
        needed: usize,
    },
    /// Exactness residual above tolerance.
    Residual {
        residual: f64,
        tol: f64,
    },
    /// Algorithm budget exhausted without positivity; carries the
    /// least-negative iterate for diagnostics.
    BudgetExhausted {
        n_max: usize,
        best: Option<Box<Algorithm1Run>>,
    },
    Moments(MomentError),
    Points(PointSetError),
}

impl core::fmt::Display for LsError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            LsError::TooFewData { n, needed } => {
                write!(f, "need at least {needed} data points, got {n}")
            }
            LsError::NonPositiveWeight { index, value } => {
                write!(
                    f,
                    "weight function nonpositive ({value}) at data point {index}"
                )
            }
            LsError::RankDeficient { rank, needed } => {
                write!(f, "exactness matrix rank {rank} < {needed}")
            }
            LsError::Residual { residual, tol } => {
                write!(f, "exactness residual {residual:e} above {tol:e}")
            }
            LsError::BudgetExhausted { n_max, .. } => {
                write!(f, "no positive rule found within N <= {n_max}")
            }
            LsError::Moments(e) => write!(f, "{e}"),
            LsError::Points(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for LsError {}

impl From<MomentError> for LsError {
    fn from(e: MomentError) -> Self {
        LsError::Moments(e)
    }
}

impl From<PointSetError> for LsError {
    fn from(e: PointSetError) -> Self {
        LsError::Points(e)
    }
}

/// Relative diagonal cutoff for the rank-revealing factorization. The
/// dropped directions correspond to numerically dependent basis functions;
/// their moment entries inherit the same dependence, so the residual check
/// below is the real gate.
const RANK_DROP_TOL: f64 = 1e-12;

/// Relative exactness residual every returned rule must satisfy.
pub const EXACTNESS_RTOL: f64 = 1e-9;

/// The assembled exactness system `B w = m` with its discrete weights.
#[derive(Clone, Debug)]
pub struct LsProblem {
    /// `(M + K) x N`: basis functions of the space evaluated at the data.
    pub matrix: Mat,
    /// Moments of the basis functions.
    pub moments: Vec<f64>,
    /// `r_n = |Omega| omega(x_n) / N`.
    pub discrete_weights: Vec<f64>,
    pub data: PointSet,
}

/// Assemble the exactness system for the space over `data` points.
///
/// Rows are the translated kernels at the `M` centers followed by the `K`
/// polynomial basis elements; the right-hand side stacks their moments.
pub fn build_ls_problem(
    space: &RbfSpace,
    data: &PointSet,
    omega: impl Fn(&Point) -> f64,
) -> Result<LsProblem, LsError> {
    let m = space.centers().len();
    let k = space.poly_dim();
    let n = data.len();
    if n < m + k {
        return Err(LsError::TooFewData { n, needed: m + k });
    }
    let dim = data.dim();
    let matrix = Mat::from_fn(m + k, n, |row, col| {
        if row < m {
            let r = distance(dim, data.point(col), space.centers().point(row));
            space.kernel().evaluate(space.shape(row) * r)
        } else {
            space
                .basis()
                .expect("row index implies polynomial block")
                .eval(row - m, data.point(col))
        }
    });
    let moments = moments::rbf_moments(space, data.domain())?.stacked();

    let volume = data.domain().volume();
    let mut discrete_weights = Vec::with_capacity(n);
    for (i, p) in data.points().iter().enumerate() {
        let w = omega(p);
        #[allow(clippy::neg_cmp_op_on_partial_ord)] // also rejects NaN
        if !(w > 0.0) {
            return Err(LsError::NonPositiveWeight { index: i, value: w });
        }
        discrete_weights.push(volume * w / n as f64);
    }

    Ok(LsProblem {
        matrix,
        moments,
        discrete_weights,
        data: data.clone(),
    })
}

/// The weighted minimum-norm solution of the exactness system:
/// `argmin ||R^{-1/2} w||_2` subject to `B w = m`, through the substitution
/// `w = R^{1/2} z` and a rank-revealing orthogonal factorization of
/// `B R^{1/2}`.
pub fn weighted_min_norm(problem: &LsProblem) -> Result<QuadratureRule, LsError> {
    let rows = problem.matrix.rows();
    let n = problem.matrix.cols();
    let sqrt_r: Vec<f64> = problem
        .discrete_weights
        .iter()
        .map(|r| math::sqrt(*r))
        .collect();
    let scaled = Mat::from_fn(rows, n, |i, j| problem.matrix.get(i, j) * sqrt_r[j]);

    let sol = match linalg::min_norm_solve(&scaled, &problem.moments, RANK_DROP_TOL) {
        Ok(s) => s,
        Err(LinalgError::RankDeficient { rank, .. }) => {
            return Err(LsError::RankDeficient { rank, needed: rows })
        }
        Err(_) => {
            return Err(LsError::RankDeficient {
                rank: 0,
                needed: rows,
            })
        }
    };
    let weights: Vec<f64> = sol
        .solution
        .iter()
        .zip(&sqrt_r)
        .map(|(z, s)| z * s)
        .collect();

    // Exactness residual against the unscaled system.
    let m_inf = problem
        .moments
        .iter()
        .map(|v| math::abs(*v))
        .fold(0.0, f64::max);
    let bw = problem.matrix.matvec(&weights);
    let residual = bw
        .iter()
        .zip(&problem.moments)
        .map(|(a, b)| math::abs(a - b))
        .fold(0.0, f64::max);
    let tol = EXACTNESS_RTOL * m_inf.max(f64::MIN_POSITIVE);
    if residual > tol {
        if sol.rank < rows {
            return Err(LsError::RankDeficient {
                rank: sol.rank,
                needed: rows,
            });
        }
        return Err(LsError::Residual { residual, tol });
    }

    // Spectral condition of the scaled system, for the rule metadata.
    let sv = linalg::singular_values(&scaled);
    let cond = match (sv.first(), sv.get(sol.rank.saturating_sub(1))) {
        (Some(s0), Some(sr)) if *sr > 0.0 => s0 / sr,
        _ => f64::INFINITY,
    };

    Ok(QuadratureRule::new(
        problem.data.clone(),
        weights,
        Vec::new(),
        Provenance::LeastSquares,
        cond,
        residual,
    ))
}

/// One iteration record of the positivity loop.
#[derive(Clone, Copy, Debug)]
pub struct IterationRecord {
    pub n: usize,
    pub min_weight: f64,
    pub residual: f64,
}

/// Result of the incremental construction.
#[derive(Clone, Debug)]
pub struct Algorithm1Run {
    pub rule: QuadratureRule,
    pub n_final: usize,
    pub iterations: Vec<IterationRecord>,
}

/// Data-growth step for the positivity loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepMode {
    /// `N -> N + 1`, the faithful increment.
    Unit,
    /// `N -> N + max(1, N/10)`, an opt-in accelerated search for large
    /// center counts.
    Geometric,
}

impl StepMode {
    fn next(&self, n: usize) -> usize {
        match self {
            StepMode::Unit => n + 1,
            StepMode::Geometric => n + (n / 10).max(1),
        }
    }
}

/// Grow the data set along `sequence` until the weighted minimum-norm rule
/// is positive.
///
/// Starts at `n_start` (default `M + K`, so the system starts square-or-wide)
/// and advances through rank-deficient prefixes before entering the
/// positivity loop. Returns the first rule whose smallest weight clears
/// `-positivity_tolerance(sum |w|)`; if `n_max` is exhausted, the error
/// carries the least-negative iterate seen.
///
/// ```
/// use rbfquad_core::{Domain, Kernel, PointSequence, RbfSpace, ShapePolicy};
/// use rbfquad_core::lsquad::{algorithm1, StepMode};
///
/// let seq = PointSequence::Halton { skip: 0 };
/// let centers = seq.take(Domain::unit_square(), 10).unwrap();
/// let space = RbfSpace::new(Kernel::Gaussian, centers, ShapePolicy::Constant(0.8), 0).unwrap();
/// let run = algorithm1(&space, seq, |_| 1.0, None, 5000, StepMode::Unit).unwrap();
/// assert!(run.rule.min_weight() > 0.0);
/// assert!((run.rule.rule_of_one() - 1.0).abs() < 1e-9);
/// ```
pub fn algorithm1(
    space: &RbfSpace,
    sequence: PointSequence,
    omega: impl Fn(&Point) -> f64,
    n_start: Option<usize>,
    n_max: usize,
    step: StepMode,
) -> Result<Algorithm1Run, LsError> {
    let domain = *space.centers().domain();
    let needed = space.centers().len() + space.poly_dim();
    let mut n = n_start.unwrap_or(needed).max(needed);
    let mut iterations = Vec::new();
    let mut best: Option<Algorithm1Run> = None;

    while n <= n_max {
        let data = sequence.take(domain, n)?;
        let problem = build_ls_problem(space, &data, &omega)?;
        match weighted_min_norm(&problem) {
            Ok(rule) => {
                let report = rule.stability_report();
                iterations.push(IterationRecord {
                    n,
                    min_weight: report.min_weight,
                    residual: rule.solve_residual(),
                });
                let improved = best
                    .as_ref()
                    .map(|b| report.min_weight > b.rule.min_weight())
                    .unwrap_or(true);
                if improved {
                    best = Some(Algorithm1Run {
                        rule: rule.clone(),
                        n_final: n,
                        iterations: Vec::new(),
                    });
                }
                if report.is_stable {
                    return Ok(Algorithm1Run {
                        rule,
                        n_final: n,
                        iterations,
                    });
                }
            }
            Err(LsError::RankDeficient { .. }) => {
                // Not yet unisolvent for the space; keep growing.
                iterations.push(IterationRecord {
                    n,
                    min_weight: f64::NEG_INFINITY,
                    residual: f64::NAN,
                });
            }
            Err(e) => return Err(e),
        }
        n = step.next(n);
    }

    Err(LsError::BudgetExhausted {
        n_max,
        best: best.map(|mut b| {
            b.iterations = iterations;
            Box::new(b)
        }),
    })
}

/// Power-law fit `N = C * M^s` over the (M, N) pairs of a ratio study.
#[derive(Clone, Debug)]
pub struct RatioStudy {
    pub rows: Vec<(usize, usize)>,
    pub c: f64,
    pub s: f64,
}

/// Ordinary least squares of `log N` on `log M`.
pub fn fit_power_law(rows: &[(usize, usize)]) -> (f64, f64) {
    assert!(rows.len() >= 2);
    let n = rows.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (m, nn) in rows {
        let x = math::ln(*m as f64);
        let y = math::ln(*nn as f64);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let s = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let c = math::exp((sy - s * sx) / n);
    (c, s)
}

/// Run the positivity loop for every `M` in `m_values`, with centers taken
/// as the first `M` elements of the same sequence that supplies the data
/// points, and fit `N = C * M^s`.
pub fn ratio_study(
    m_values: &[usize],
    kernel: crate::kernels::Kernel,
    eps: f64,
    degree: i32,
    sequence: PointSequence,
    domain: crate::pointsets::Domain,
    n_max_per_m: impl Fn(usize) -> usize,
) -> Result<RatioStudy, LsError> {
    let mut rows = Vec::with_capacity(m_values.len());
    for &m in m_values {
        let centers = sequence.take(domain, m)?;
        let space = RbfSpace::new(
            kernel,
            centers,
            crate::rbfsystem::ShapePolicy::Constant(eps),
            degree,
        )
        .expect("ratio-study space construction");
        let run = algorithm1(
            &space,
            sequence,
            |_| 1.0,
            None,
            n_max_per_m(m),
            StepMode::Unit,
        )?;
        rows.push((m, run.n_final));
    }
    let (c, s) = fit_power_law(&rows);
    Ok(RatioStudy { rows, c, s })
}
