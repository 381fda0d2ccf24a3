//! RBF approximation spaces and the bordered interpolation system.
//!
//! A space is a kernel, a set of centers with per-center shape parameters,
//! and a polynomial degree `d >= -1` (`d = -1` means no polynomial term).
//! Interpolation solves the bordered system
//!
//! ```text
//! [ Phi  P ] [alpha]   [f]
//! [ P^T  0 ] [beta ] = [0]
//! ```
//!
//! with `Phi[m][n] = phi(eps_n ||x_m - x_n||)` and `P[n][k] = p_k(x_n)`.
//! The full square matrix is factored with partial pivoting: block
//! elimination through `Phi^{-1}` is not available for polyharmonic splines,
//! where `Phi` alone may be singular. Every factorization records a 1-norm
//! condition estimate so ill-conditioned (flat-kernel) regimes are visible to
//! callers instead of silently producing noise.

use alloc::vec::Vec;

use crate::kernels::Kernel;
use crate::linalg::{self, LuFactor, Mat};
use crate::math;
use crate::pointsets::{distance, Point, PointSet};
use crate::polybasis::{self, PolyBasis, PolyError};

/// Assigns per-center shape parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ShapePolicy {
    /// The same `eps` everywhere.
    Constant(f64),
    /// `eps` for interior points, `eps / 2` for the two boundary points of a
    /// 1D domain. Halving the boundary shape parameter doubles the support
    /// there, compensating the part cut off by the boundary so that all
    /// kernel moments agree.
    EqualMomentBoundary(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub enum SpaceError {
    /// Shape parameters must be positive for shape-dependent kernels.
    NonPositiveShape { index: usize, value: f64 },
    /// The equal-moment boundary policy is defined on intervals only.
    PolicyNeedsInterval,
    /// Wrong number of explicit shape parameters.
    ShapeCountMismatch { got: usize, expected: usize },
    /// Centers are not unisolvent for the requested degree.
    NotUnisolvent(PolyError),
}

impl core::fmt::Display for SpaceError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SpaceError::NonPositiveShape { index, value } => {
                write!(f, "shape parameter {index} must be positive, got {value}")
            }
            SpaceError::PolicyNeedsInterval => {
                write!(f, "equal-moment boundary policy requires a 1D domain")
            }
            SpaceError::ShapeCountMismatch { got, expected } => {
                write!(f, "got {got} shape parameters for {expected} centers")
            }
            SpaceError::NotUnisolvent(e) => write!(f, "centers: {e}"),
        }
    }
}

impl core::error::Error for SpaceError {}

/// The RBF approximation space `S_{N,d}` generated by translated kernels at
/// the centers plus polynomials up to degree `d`.
#[derive(Clone, Debug)]
pub struct RbfSpace {
    kernel: Kernel,
    centers: PointSet,
    shapes: Vec<f64>,
    degree: i32,
    basis: Option<PolyBasis>,
}

impl RbfSpace {
    /// Build a space with shapes from a policy.
    ///
    /// PHS kernels ignore the policy and always use `eps = 1`. For `d >= 0`
    /// the centers are checked to be unisolvent for degree `d`.
    pub fn new(
        kernel: Kernel,
        centers: PointSet,
        policy: ShapePolicy,
        degree: i32,
    ) -> Result<Self, SpaceError> {
        let shapes = if kernel.has_shape_parameter() {
            policy_shapes(policy, &centers)?
        } else {
            alloc::vec![1.0; centers.len()]
        };
        Self::with_shapes(kernel, centers, shapes, degree)
    }

    /// Build a space with explicit per-center shapes.
    pub fn with_shapes(
        kernel: Kernel,
        centers: PointSet,
        shapes: Vec<f64>,
        degree: i32,
    ) -> Result<Self, SpaceError> {
        if shapes.len() != centers.len() {
            return Err(SpaceError::ShapeCountMismatch {
                got: shapes.len(),
                expected: centers.len(),
            });
        }
        if kernel.has_shape_parameter() {
            for (i, e) in shapes.iter().enumerate() {
                #[allow(clippy::neg_cmp_op_on_partial_ord)] // also rejects NaN
                if !(*e > 0.0) {
                    return Err(SpaceError::NonPositiveShape {
                        index: i,
                        value: *e,
                    });
                }
            }
        }
        let basis = if degree >= 0 {
            polybasis::check_unisolvent(&centers, degree as u32)
                .map_err(SpaceError::NotUnisolvent)?;
            Some(PolyBasis::monomials(centers.dim(), degree as u32))
        } else {
            None
        };
        Ok(Self {
            kernel,
            centers,
            shapes,
            degree,
            basis,
        })
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn centers(&self) -> &PointSet {
        &self.centers
    }

    pub fn shape(&self, i: usize) -> f64 {
        self.shapes[i]
    }

    pub fn shapes(&self) -> &[f64] {
        &self.shapes
    }

    pub fn degree(&self) -> i32 {
        self.degree
    }

    /// The monomial basis of the polynomial part; `None` for `d = -1`.
    pub fn basis(&self) -> Option<&PolyBasis> {
        self.basis.as_ref()
    }

    /// `K = dim P_d`, 0 for `d = -1`.
    pub fn poly_dim(&self) -> usize {
        self.basis.as_ref().map_or(0, |b| b.len())
    }

    /// Whether `d >= order(kernel) - 1`, the regime where unique solvability
    /// of the interpolation system is guaranteed by theory. Configurations
    /// below this bound are still constructed (pure PHS rules are common in
    /// practice); callers can surface the flag.
    pub fn meets_order_requirement(&self) -> bool {
        self.degree >= self.kernel.order() as i32 - 1
    }

    /// The translated kernel `phi_n(x) = phi(eps_n ||x - x_n||)`.
    pub fn basis_fn(&self, n: usize, x: &Point) -> f64 {
        let r = distance(self.centers.dim(), x, self.centers.point(n));
        self.kernel.evaluate(self.shapes[n] * r)
    }

    /// Evaluate `sum alpha_n phi_n(x) + sum beta_k p_k(x)`.
    pub fn eval_interpolant(&self, coeffs: &InterpolationCoeffs, x: &Point) -> f64 {
        let mut acc = 0.0;
        for (n, a) in coeffs.alpha.iter().enumerate() {
            if *a != 0.0 {
                acc += a * self.basis_fn(n, x);
            }
        }
        if let Some(basis) = &self.basis {
            for (k, b) in coeffs.beta.iter().enumerate() {
                acc += b * basis.eval(k, x);
            }
        }
        acc
    }
}

fn policy_shapes(policy: ShapePolicy, centers: &PointSet) -> Result<Vec<f64>, SpaceError> {
    match policy {
        ShapePolicy::Constant(eps) => Ok(alloc::vec![eps; centers.len()]),
        ShapePolicy::EqualMomentBoundary(eps) => {
            if centers.dim() != 1 {
                return Err(SpaceError::PolicyNeedsInterval);
            }
            let lo = centers.domain().lo(0);
            let hi = centers.domain().hi(0);
            let tol = 1e-12 * (hi - lo);
            Ok(centers
                .points()
                .iter()
                .map(|p| {
                    if math::abs(p[0] - lo) <= tol || math::abs(p[0] - hi) <= tol {
                        eps / 2.0
                    } else {
                        eps
                    }
                })
                .collect())
        }
    }
}

/// Interpolation coefficients `(alpha, beta)`.
#[derive(Clone, Debug)]
pub struct InterpolationCoeffs {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SystemError {
    /// `P` does not have full column rank: data points are not unisolvent.
    RankDeficientP { rank: usize, needed: usize },
    /// The bordered matrix is exactly singular.
    Singular,
    /// Condition estimate beyond the trust limit for interpolation.
    IllConditioned { cond: f64 },
    /// Interpolation residual failed its tolerance.
    ResidualTooLarge { residual: f64, tol: f64 },
    /// Operation requires the square (data = centers) system.
    NotSquare,
    /// Nonoverlap condition `1/eps_n <= h_n` violated at a point.
    OverlapViolated { index: usize },
    /// Kernel does not satisfy the restrictions for the explicit cardinal
    /// form (nonnegative, bounded by 1, support `[0, 1]`).
    KernelRestrictions(Kernel),
}

impl core::fmt::Display for SystemError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SystemError::RankDeficientP { rank, needed } => {
                write!(
                    f,
                    "polynomial block rank {rank} < {needed}: points not unisolvent"
                )
            }
            SystemError::Singular => write!(f, "bordered system matrix is singular"),
            SystemError::IllConditioned { cond } => {
                write!(
                    f,
                    "bordered system condition estimate {cond:e} exceeds 1e15"
                )
            }
            SystemError::ResidualTooLarge { residual, tol } => {
                write!(f, "solve residual {residual:e} exceeds tolerance {tol:e}")
            }
            SystemError::NotSquare => write!(f, "operation needs data points = centers"),
            SystemError::OverlapViolated { index } => {
                write!(f, "kernel supports overlap at point {index}")
            }
            SystemError::KernelRestrictions(k) => {
                write!(f, "kernel {k} violates the compact-support restrictions")
            }
        }
    }
}

impl core::error::Error for SystemError {}

/// Condition-estimate threshold beyond which interpolation refuses to
/// pretend the computed coefficients mean anything.
pub const INTERPOLATION_COND_LIMIT: f64 = 1e15;

struct SquareFactor {
    a: Mat,
    lu: LuFactor,
    cond: f64,
}

/// Assembled interpolation/evaluation system for a space on a set of data
/// points. When the data points coincide with the centers the bordered
/// square matrix is factored eagerly.
pub struct SaddleSystem {
    phi: Mat,
    p: Mat,
    square: Option<SquareFactor>,
}

/// Assemble `Phi` and `P` for the space evaluated at `data` points.
///
/// For the square case (`data` identical to the centers) the bordered matrix
/// is factored and its condition estimated. `P` is checked for full column
/// rank; rank deficiency means the data points cannot support degree-`d`
/// exactness.
pub fn assemble(space: &RbfSpace, data: &PointSet) -> Result<SaddleSystem, SystemError> {
    let n_data = data.len();
    let n_centers = space.centers().len();
    let k_poly = space.poly_dim();
    let dim = data.dim();

    let phi = Mat::from_fn(n_data, n_centers, |m, n| {
        let r = distance(dim, data.point(m), space.centers().point(n));
        space.kernel().evaluate(space.shape(n) * r)
    });
    let p = match space.basis() {
        Some(basis) => Mat::from_fn(n_data, k_poly, |m, k| basis.eval(k, data.point(m))),
        None => Mat::zeros(n_data, 0),
    };

    if k_poly > 0 {
        let rank = linalg::numerical_rank(&p, polybasis::UNISOLVENCY_RANK_TOL);
        if rank < k_poly {
            return Err(SystemError::RankDeficientP {
                rank,
                needed: k_poly,
            });
        }
    }

    let is_square = n_data == n_centers && data.points() == space.centers().points();
    let square = if is_square {
        let size = n_centers + k_poly;
        let a = Mat::from_fn(size, size, |i, j| {
            if i < n_centers && j < n_centers {
                phi.get(i, j)
            } else if i < n_centers {
                p.get(i, j - n_centers)
            } else if j < n_centers {
                p.get(j, i - n_centers)
            } else {
                0.0
            }
        });
        let lu = LuFactor::factor(&a).map_err(|_| SystemError::Singular)?;
        let cond = lu.cond_1_estimate(a.norm_1());
        Some(SquareFactor { a, lu, cond })
    } else {
        None
    };

    Ok(SaddleSystem { phi, p, square })
}

impl SaddleSystem {
    pub fn n_centers(&self) -> usize {
        self.phi.cols()
    }

    pub fn n_data(&self) -> usize {
        self.phi.rows()
    }

    pub fn poly_dim(&self) -> usize {
        self.p.cols()
    }

    pub fn phi(&self) -> &Mat {
        &self.phi
    }

    pub fn poly_block(&self) -> &Mat {
        &self.p
    }

    /// 1-norm condition estimate of the bordered matrix (square case only).
    pub fn condition_estimate(&self) -> Option<f64> {
        self.square.as_ref().map(|s| s.cond)
    }

    fn square(&self) -> Result<&SquareFactor, SystemError> {
        self.square.as_ref().ok_or(SystemError::NotSquare)
    }

    /// Solve the bordered system for a right-hand side `[top; bottom]` with
    /// two rounds of iterative refinement.
    pub(crate) fn solve_bordered(&self, rhs: &[f64]) -> Result<Vec<f64>, SystemError> {
        let sq = self.square()?;
        Ok(sq.lu.solve_refined(&sq.a, rhs, 2))
    }

    pub(crate) fn bordered_residual_inf(&self, rhs: &[f64], sol: &[f64]) -> f64 {
        let sq = self.square.as_ref().expect("square system");
        let ax = sq.a.matvec(sol);
        ax.iter()
            .zip(rhs)
            .map(|(a, b)| math::abs(a - b))
            .fold(0.0, f64::max)
    }

    /// Interpolation coefficients for nodal values `f_values`.
    ///
    /// Fails on near-singular systems (condition estimate above
    /// [`INTERPOLATION_COND_LIMIT`]) and on residuals above
    /// `1e-10 * max(1, ||f||_inf)`.
    pub fn interpolate(&self, f_values: &[f64]) -> Result<InterpolationCoeffs, SystemError> {
        let sq = self.square()?;
        let n = self.n_centers();
        let k = self.poly_dim();
        assert_eq!(f_values.len(), n);
        if sq.cond > INTERPOLATION_COND_LIMIT {
            return Err(SystemError::IllConditioned { cond: sq.cond });
        }
        let mut rhs = alloc::vec![0.0; n + k];
        rhs[..n].copy_from_slice(f_values);
        let sol = self.solve_bordered(&rhs)?;
        let scale = f_values
            .iter()
            .map(|v| math::abs(*v))
            .fold(1.0f64, f64::max);
        let residual = self.bordered_residual_inf(&rhs, &sol);
        let tol = 1e-10 * scale;
        if residual > tol {
            return Err(SystemError::ResidualTooLarge { residual, tol });
        }
        Ok(InterpolationCoeffs {
            alpha: sol[..n].to_vec(),
            beta: sol[n..].to_vec(),
        })
    }

    /// Values of all cardinal functions at `x`, via one solve of the
    /// transposed bordered system against `[phi_row(x); p(x)]`.
    pub fn cardinal_values(&self, space: &RbfSpace, x: &Point) -> Result<Vec<f64>, SystemError> {
        let sq = self.square()?;
        let n = self.n_centers();
        let k = self.poly_dim();
        let mut rhs = alloc::vec![0.0; n + k];
        for j in 0..n {
            rhs[j] = space.basis_fn(j, x);
        }
        if let Some(basis) = space.basis() {
            for (kk, slot) in rhs[n..].iter_mut().enumerate() {
                *slot = basis.eval(kk, x);
            }
        }
        let sol = sq.lu.solve_transpose(&rhs);
        Ok(sol[..n].to_vec())
    }
}

/// Explicit cardinal function under the nonoverlap condition.
///
/// For a compactly supported kernel with `1/eps_n <= h_n` (pairwise
/// nonoverlapping supports) and a basis of discrete orthogonal polynomials,
/// the cardinal function has the closed form
///
/// ```text
/// c_m(x) = phi_m(x)
///        - |Omega|/N * sum_n (sum_k p_k(x_m) p_k(x_n)) phi_n(x)
///        + |Omega|/N * sum_k p_k(x_m) p_k(x)
/// ```
///
/// With no polynomial term (`dops = None`) this degenerates to
/// `c_m = phi_m`.
pub fn explicit_cardinal_nonoverlap(
    space: &RbfSpace,
    dops: Option<&PolyBasis>,
    m: usize,
    x: &Point,
) -> Result<f64, SystemError> {
    let kernel = space.kernel();
    if !(kernel.is_compactly_supported() && kernel.is_nonnegative()) {
        return Err(SystemError::KernelRestrictions(kernel));
    }
    let h = space.centers().nearest_neighbor_distances();
    for (i, hn) in h.iter().enumerate() {
        if 1.0 / space.shape(i) > hn * (1.0 + 1e-12) {
            return Err(SystemError::OverlapViolated { index: i });
        }
    }

    let phi_m_x = space.basis_fn(m, x);
    let dops = match dops {
        None => return Ok(phi_m_x),
        Some(d) => d,
    };

    let centers = space.centers();
    let n_pts = centers.len();
    let scale = centers.domain().volume() / n_pts as f64;
    let p_at_m = dops.eval_all(centers.point(m));

    let mut middle = 0.0;
    for n in 0..n_pts {
        let phi_n_x = space.basis_fn(n, x);
        if phi_n_x == 0.0 {
            continue;
        }
        let p_at_n = dops.eval_all(centers.point(n));
        let coupling: f64 = p_at_m.iter().zip(&p_at_n).map(|(a, b)| a * b).sum();
        middle += coupling * phi_n_x;
    }

    let p_at_x = dops.eval_all(x);
    let tail: f64 = p_at_m.iter().zip(&p_at_x).map(|(a, b)| a * b).sum();

    Ok(phi_m_x - scale * middle + scale * tail)
}
