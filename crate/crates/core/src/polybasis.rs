//! Multivariate polynomial bases, discrete inner products, and discrete
//! orthogonal polynomials (DOPs).
//!
//! Bases are stored as coefficient tables over graded-lexicographic monomials
//! in an affine frame (domain center and half-width) so that
//! orthogonalization stays well conditioned for degrees up to 5 or so.
//! Moments and L2 inner products over box domains are computed exactly from
//! the coefficient tables.

use alloc::vec::Vec;

use crate::linalg::{self, Mat};
use crate::math;
use crate::pointsets::{Domain, Point, PointSet};

/// `binom(n, k)` in f64-exact integer range.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1usize;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Dimension of `P_d` in `D` variables: `binom(d + D, D)`; 0 for `d < 0`.
pub fn poly_space_dim(dim: usize, degree: i32) -> usize {
    if degree < 0 {
        0
    } else {
        binomial(degree as usize + dim, dim)
    }
}

/// Graded-lexicographic exponent list: 1; x, y; x^2, xy, y^2; ...
fn graded_lex_exponents(dim: usize, degree: u32) -> Vec<[u32; 2]> {
    let mut out = Vec::new();
    for total in 0..=degree {
        match dim {
            1 => out.push([total, 0]),
            2 => {
                for ey in 0..=total {
                    out.push([total - ey, ey]);
                }
            }
            _ => unreachable!(),
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub enum PolyError {
    /// The evaluation matrix of the basis on the points is rank deficient:
    /// the point set is not unisolvent for this degree.
    NotUnisolvent { rank: usize, needed: usize },
    /// Orthogonalization lost too much accuracy.
    GramDeviation { deviation: f64 },
}

impl core::fmt::Display for PolyError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            PolyError::NotUnisolvent { rank, needed } => write!(
                f,
                "point set is not unisolvent: numerical rank {rank}, need {needed}"
            ),
            PolyError::GramDeviation { deviation } => {
                write!(f, "DOP Gram matrix deviates from identity by {deviation:e}")
            }
        }
    }
}

impl core::error::Error for PolyError {}

/// A basis of `P_d` stored as coefficients over graded-lex monomials in the
/// affine frame `u_i = (x_i - center_i) / halfwidth_i`.
#[derive(Clone, Debug)]
pub struct PolyBasis {
    dim: usize,
    degree: u32,
    exponents: Vec<[u32; 2]>,
    /// `coeffs[k][e]`: coefficient of monomial `e` in basis element `k`.
    coeffs: Mat,
    center: [f64; 2],
    halfwidth: [f64; 2],
}

impl PolyBasis {
    /// Plain graded-lex monomials `1, x, y, x^2, xy, y^2, ...` (identity
    /// frame). This is the basis used in the interpolation systems.
    pub fn monomials(dim: usize, degree: u32) -> Self {
        let exponents = graded_lex_exponents(dim, degree);
        let k = exponents.len();
        Self {
            dim,
            degree,
            exponents,
            coeffs: Mat::identity(k),
            center: [0.0; 2],
            halfwidth: [1.0; 2],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Number of basis elements `K = binom(d + D, D)`.
    pub fn len(&self) -> usize {
        self.coeffs.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Values of all basis elements at `x`.
    pub fn eval_all(&self, x: &Point) -> Vec<f64> {
        let monos = self.monomial_values(x);
        (0..self.len())
            .map(|k| {
                let row = self.coeffs.row(k);
                row.iter().zip(&monos).map(|(c, m)| c * m).sum()
            })
            .collect()
    }

    /// Value of basis element `k` at `x`.
    pub fn eval(&self, k: usize, x: &Point) -> f64 {
        let monos = self.monomial_values(x);
        self.coeffs
            .row(k)
            .iter()
            .zip(&monos)
            .map(|(c, m)| c * m)
            .sum()
    }

    fn monomial_values(&self, x: &Point) -> Vec<f64> {
        let u = [
            (x[0] - self.center[0]) / self.halfwidth[0],
            (x[1] - self.center[1]) / self.halfwidth[1],
        ];
        self.exponents
            .iter()
            .map(|e| math::powi(u[0], e[0]) * math::powi(u[1], e[1]))
            .collect()
    }

    /// Exact integrals `int_domain p_k dx` for all basis elements.
    pub fn moments(&self, domain: &Domain) -> Vec<f64> {
        (0..self.len())
            .map(|k| {
                let row = self.coeffs.row(k);
                self.exponents
                    .iter()
                    .zip(row)
                    .filter(|(_, c)| **c != 0.0)
                    .map(|(e, c)| {
                        let mut v = *c;
                        for axis in 0..self.dim {
                            v *= self.monomial_integral(domain, axis, e[axis]);
                        }
                        // Inactive axis of a 1D domain contributes factor 1.
                        v
                    })
                    .sum()
            })
            .collect()
    }

    /// Exact `int_domain p_k p_l dx`.
    pub fn l2_inner(&self, domain: &Domain, k: usize, l: usize) -> f64 {
        let rk = self.coeffs.row(k);
        let rl = self.coeffs.row(l);
        let mut acc = 0.0;
        for (e, ck) in self.exponents.iter().zip(rk) {
            if *ck == 0.0 {
                continue;
            }
            for (f, cl) in self.exponents.iter().zip(rl) {
                if *cl == 0.0 {
                    continue;
                }
                let mut v = ck * cl;
                for axis in 0..self.dim {
                    v *= self.monomial_integral(domain, axis, e[axis] + f[axis]);
                }
                acc += v;
            }
        }
        acc
    }

    /// `int_a^b ((x - c)/h)^e dx` for one axis, in closed form.
    fn monomial_integral(&self, domain: &Domain, axis: usize, e: u32) -> f64 {
        let h = self.halfwidth[axis];
        let c = self.center[axis];
        let t_lo = (domain.lo(axis) - c) / h;
        let t_hi = (domain.hi(axis) - c) / h;
        h * (math::powi(t_hi, e + 1) - math::powi(t_lo, e + 1)) / (e as f64 + 1.0)
    }
}

/// The discrete inner product `[u, v] = (|Omega|/N) sum u(x_n) v(x_n)`.
pub struct DiscreteInnerProduct<'a> {
    points: &'a PointSet,
    scale: f64,
}

impl<'a> DiscreteInnerProduct<'a> {
    pub fn new(points: &'a PointSet) -> Self {
        let scale = points.domain().volume() / points.len() as f64;
        Self { points, scale }
    }

    /// `|Omega| / N`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn apply(&self, mut u: impl FnMut(&Point) -> f64, mut v: impl FnMut(&Point) -> f64) -> f64 {
        let s: f64 = self.points.points().iter().map(|p| u(p) * v(p)).sum();
        self.scale * s
    }
}

/// Relative singular-value cutoff for the unisolvency rank check.
pub const UNISOLVENCY_RANK_TOL: f64 = 1e-10;
/// Acceptable deviation of the DOP Gram matrix from the identity.
pub const DOP_GRAM_TOL: f64 = 1e-10;

/// Check that `points` determines polynomials of the given degree uniquely,
/// via the numerical rank of the monomial evaluation matrix.
pub fn check_unisolvent(points: &PointSet, degree: u32) -> Result<(), PolyError> {
    let basis = shifted_monomials(points.domain(), degree);
    let needed = basis.len();
    if points.len() < needed {
        return Err(PolyError::NotUnisolvent {
            rank: points.len(),
            needed,
        });
    }
    let v = Mat::from_fn(points.len(), needed, |n, k| basis.eval(k, points.point(n)));
    let rank = linalg::numerical_rank(&v, UNISOLVENCY_RANK_TOL);
    if rank < needed {
        return Err(PolyError::NotUnisolvent { rank, needed });
    }
    Ok(())
}

fn shifted_monomials(domain: &Domain, degree: u32) -> PolyBasis {
    let mut basis = PolyBasis::monomials(domain.dim(), degree);
    for axis in 0..domain.dim() {
        basis.center[axis] = 0.5 * (domain.lo(axis) + domain.hi(axis));
        basis.halfwidth[axis] = 0.5 * (domain.hi(axis) - domain.lo(axis));
    }
    basis
}

/// Build discrete orthogonal polynomials: a basis of `P_d` orthonormal under
/// the discrete inner product of `points`.
///
/// Modified Gram-Schmidt on domain-shifted monomials with one
/// reorthogonalization pass. The first element is the constant
/// `|Omega|^{-1/2}`; signs are fixed so the leading (graded-lex highest)
/// coefficient of each element is positive.
pub fn build_dops(points: &PointSet, degree: u32) -> Result<PolyBasis, PolyError> {
    check_unisolvent(points, degree)?;
    let mut basis = shifted_monomials(points.domain(), degree);
    let k_dim = basis.len();
    let n = points.len();
    let scale = points.domain().volume() / n as f64;

    // Column j holds the values of basis element j at all points.
    let mut vals = Mat::from_fn(n, k_dim, |i, j| basis.eval(j, points.point(i)));
    let mut coeffs = basis.coeffs.clone();

    let dot = |vals: &Mat, a: usize, b: usize| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            s += vals.get(i, a) * vals.get(i, b);
        }
        scale * s
    };

    for k in 0..k_dim {
        // Two MGS passes against the already-orthonormal columns.
        for _pass in 0..2 {
            for j in 0..k {
                let r = dot(&vals, j, k);
                for i in 0..n {
                    let v = vals.get(i, k) - r * vals.get(i, j);
                    vals.set(i, k, v);
                }
                for e in 0..k_dim {
                    let c = coeffs.get(k, e) - r * coeffs.get(j, e);
                    coeffs.set(k, e, c);
                }
            }
        }
        let norm = math::sqrt(dot(&vals, k, k));
        #[allow(clippy::neg_cmp_op_on_partial_ord)] // also rejects NaN
        if !(norm > 0.0) {
            return Err(PolyError::NotUnisolvent {
                rank: k,
                needed: k_dim,
            });
        }
        for i in 0..n {
            let v = vals.get(i, k) / norm;
            vals.set(i, k, v);
        }
        for e in 0..k_dim {
            let c = coeffs.get(k, e) / norm;
            coeffs.set(k, e, c);
        }
        // Deterministic sign: leading coefficient positive. MGS keeps the
        // coefficient table triangular, so the leading monomial of p_k is
        // monomial k.
        if coeffs.get(k, k) < 0.0 {
            for e in 0..k_dim {
                let c = -coeffs.get(k, e);
                coeffs.set(k, e, c);
            }
            for i in 0..n {
                let v = -vals.get(i, k);
                vals.set(i, k, v);
            }
        }
    }

    // Verify orthonormality.
    let mut deviation = 0.0f64;
    for k in 0..k_dim {
        for l in k..k_dim {
            let g = dot(&vals, k, l);
            let target = if k == l { 1.0 } else { 0.0 };
            deviation = deviation.max(math::abs(g - target));
        }
    }
    if deviation > DOP_GRAM_TOL {
        return Err(PolyError::GramDeviation { deviation });
    }

    basis.coeffs = coeffs;
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointsets::PointSet;

    #[test]
    fn basis_sizes() {
        assert_eq!(PolyBasis::monomials(2, 1).len(), 3);
        assert_eq!(PolyBasis::monomials(1, 2).len(), 3);
        assert_eq!(PolyBasis::monomials(2, 2).len(), 6);
        assert_eq!(poly_space_dim(2, -1), 0);
        assert_eq!(poly_space_dim(2, 5), 21);
    }

    #[test]
    fn graded_lex_order_2d() {
        let b = PolyBasis::monomials(2, 2);
        let e: Vec<[u32; 2]> = b.exponents.clone();
        assert_eq!(
            e,
            alloc::vec![[0, 0], [1, 0], [0, 1], [2, 0], [1, 1], [0, 2]]
        );
    }

    #[test]
    fn monomial_evaluation() {
        let b = PolyBasis::monomials(2, 2);
        let v = b.eval_all(&[2.0, 3.0]);
        assert_eq!(v, alloc::vec![1.0, 2.0, 3.0, 4.0, 6.0, 9.0]);
    }

    #[test]
    fn moments_unit_square_linear() {
        let b = PolyBasis::monomials(2, 1);
        let m = b.moments(&Domain::unit_square());
        assert_eq!(m, alloc::vec![1.0, 0.5, 0.5]);
    }

    #[test]
    fn moments_x_squared_on_0_2() {
        let b = PolyBasis::monomials(1, 2);
        let d = Domain::interval(0.0, 2.0).unwrap();
        let m = b.moments(&d);
        assert!(math::abs(m[2] - 8.0 / 3.0) < 1e-14);
    }

    #[test]
    fn discrete_ip_examples() {
        let d = Domain::unit_interval();
        let two = PointSet::from_points(d, alloc::vec![[0.0, 0.0], [1.0, 0.0]]);
        let ip = DiscreteInnerProduct::new(&two);
        assert!(math::abs(ip.apply(|_| 1.0, |_| 1.0) - 1.0) < 1e-15);
        // (|Omega|/N) sum u v = (1/2)(1*0 + 1*1) = 1/2.
        assert!(math::abs(ip.apply(|_| 1.0, |p| p[0]) - 0.5) < 1e-15);

        let three = PointSet::from_points(d, alloc::vec![[0.0, 0.0], [0.5, 0.0], [1.0, 0.0]]);
        let ip = DiscreteInnerProduct::new(&three);
        assert!(math::abs(ip.apply(|p| p[0], |p| p[0]) - 5.0 / 12.0) < 1e-15);
    }

    #[test]
    fn dops_degree_zero_is_inverse_sqrt_volume() {
        let pts = PointSet::halton(Domain::unit_interval(), 10, 0);
        let dops = build_dops(&pts, 0).unwrap();
        assert!(math::abs(dops.eval(0, &[0.3, 0.0]) - 1.0) < 1e-14);

        let d2 = Domain::rectangle((0.0, 2.0), (0.0, 2.0)).unwrap();
        let pts2 = PointSet::halton(d2, 10, 0);
        let dops2 = build_dops(&pts2, 0).unwrap();
        // |Omega| = 4, so the constant is 1/2.
        assert!(math::abs(dops2.eval(0, &[1.0, 1.0]) - 0.5) < 1e-14);
    }

    #[test]
    fn dops_two_point_degree_one() {
        // On X = {0, 1} in [0,1], orthonormalizing {1, x} gives
        // p_2(x) = +-(2x - 1); the sign convention makes it 2x - 1.
        let pts =
            PointSet::from_points(Domain::unit_interval(), alloc::vec![[0.0, 0.0], [1.0, 0.0]]);
        let dops = build_dops(&pts, 1).unwrap();
        for x in [0.0f64, 0.25, 0.6, 1.0] {
            assert!(math::abs(dops.eval(1, &[x, 0.0]) - (2.0 * x - 1.0)) < 1e-12);
        }
    }

    #[test]
    fn dops_orthonormal_on_halton() {
        let pts = PointSet::halton(Domain::unit_interval(), 50, 0);
        let dops = build_dops(&pts, 3).unwrap();
        let ip = DiscreteInnerProduct::new(&pts);
        for k in 0..dops.len() {
            for l in 0..dops.len() {
                let g = ip.apply(|p| dops.eval(k, p), |p| dops.eval(l, p));
                let t = if k == l { 1.0 } else { 0.0 };
                assert!(math::abs(g - t) <= 1e-10, "Gram[{k}][{l}] = {g}");
            }
        }
    }

    #[test]
    fn non_unisolvent_points_detected() {
        // Five collinear points cannot determine a 2D linear polynomial.
        let d = Domain::unit_square();
        let pts = PointSet::from_points(
            d,
            alloc::vec![[0.0, 0.5], [0.25, 0.5], [0.5, 0.5], [0.75, 0.5], [1.0, 0.5]],
        );
        match build_dops(&pts, 1) {
            Err(PolyError::NotUnisolvent { rank, needed }) => {
                assert_eq!(needed, 3);
                assert_eq!(rank, 2);
            }
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn l2_inner_matches_hand_integral() {
        // int_0^1 x * x^2 dx = 1/4 with the identity frame.
        let b = PolyBasis::monomials(1, 2);
        let v = b.l2_inner(&Domain::unit_interval(), 1, 2);
        assert!(math::abs(v - 0.25) < 1e-15);
    }
}
