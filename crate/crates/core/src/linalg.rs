//! Dense linear algebra for the quadrature solvers.
//!
//! Everything here is written for the problem sizes that actually occur in
//! this crate (a few thousand unknowns at most): row-major storage, LU with
//! partial pivoting for the square bordered systems, Householder QR with
//! column pivoting for minimum-norm solutions of underdetermined exactness
//! systems, a Hager-style 1-norm condition estimator, and one-sided Jacobi
//! singular values for numerical rank checks.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        let mut y = vec![0.0; self.rows];
        for i in 0..self.rows {
            let row = self.row(i);
            let mut acc = 0.0;
            for j in 0..self.cols {
                acc += row[j] * x[j];
            }
            y[i] = acc;
        }
        y
    }

    /// `y = A^T x`.
    pub fn t_matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        let mut y = vec![0.0; self.cols];
        for i in 0..self.rows {
            let row = self.row(i);
            let xi = x[i];
            for j in 0..self.cols {
                y[j] += row[j] * xi;
            }
        }
        y
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> f64 {
        let mut best = 0.0f64;
        for j in 0..self.cols {
            let mut s = 0.0;
            for i in 0..self.rows {
                s += math::abs(self.get(i, j));
            }
            if s > best {
                best = s;
            }
        }
        best
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        let mut best = 0.0f64;
        for i in 0..self.rows {
            let s: f64 = self.row(i).iter().map(|v| math::abs(*v)).sum();
            if s > best {
                best = s;
            }
        }
        best
    }
}

impl core::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LinalgError {
    /// A pivot was exactly zero; the matrix is singular to working precision.
    Singular { pivot_index: usize },
    /// Numerical rank fell short of the requested rank.
    RankDeficient { rank: usize, needed: usize },
    /// Matrix dimensions do not match the operation.
    ShapeMismatch,
}

impl core::fmt::Display for LinalgError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            LinalgError::Singular { pivot_index } => {
                write!(f, "matrix is singular (zero pivot at index {pivot_index})")
            }
            LinalgError::RankDeficient { rank, needed } => {
                write!(f, "numerical rank {rank} is below required {needed}")
            }
            LinalgError::ShapeMismatch => write!(f, "matrix shape mismatch"),
        }
    }
}

impl core::error::Error for LinalgError {}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Clone, Debug)]
pub struct LuFactor {
    n: usize,
    lu: Mat,
    /// Row permutation: factored row `i` came from original row `piv[i]`.
    piv: Vec<usize>,
}

impl LuFactor {
    pub fn factor(a: &Mat) -> Result<Self, LinalgError> {
        assert_eq!(a.rows(), a.cols());
        let n = a.rows();
        let mut lu = a.clone();
        let mut piv: Vec<usize> = (0..n).collect();

        for k in 0..n {
            // Pivot search in column k.
            let mut p = k;
            let mut best = math::abs(lu.get(k, k));
            for i in (k + 1)..n {
                let v = math::abs(lu.get(i, k));
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return Err(LinalgError::Singular { pivot_index: k });
            }
            if p != k {
                for j in 0..n {
                    let t = lu.get(k, j);
                    lu.set(k, j, lu.get(p, j));
                    lu.set(p, j, t);
                }
                piv.swap(k, p);
            }
            let pivot = lu.get(k, k);
            for i in (k + 1)..n {
                let m = lu.get(i, k) / pivot;
                lu.set(i, k, m);
                if m != 0.0 {
                    for j in (k + 1)..n {
                        let v = lu.get(i, j) - m * lu.get(k, j);
                        lu.set(i, j, v);
                    }
                }
            }
        }
        Ok(Self { n, lu, piv })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Solve `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        // Apply permutation, then forward/back substitution.
        let mut x: Vec<f64> = (0..n).map(|i| b[self.piv[i]]).collect();
        for i in 1..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu.get(i, j) * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in (i + 1)..n {
                acc -= self.lu.get(i, j) * x[j];
            }
            x[i] = acc / self.lu.get(i, i);
        }
        x
    }

    /// Solve `A^T x = b` using the same factorization.
    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        // A^T = U^T L^T P, so solve U^T y = b, L^T z = y, x = P^T z.
        let mut y = b.to_vec();
        for i in 0..n {
            let mut acc = y[i];
            for j in 0..i {
                acc -= self.lu.get(j, i) * y[j];
            }
            y[i] = acc / self.lu.get(i, i);
        }
        for i in (0..n).rev() {
            let mut acc = y[i];
            for j in (i + 1)..n {
                acc -= self.lu.get(j, i) * y[j];
            }
            y[i] = acc;
        }
        let mut x = vec![0.0; n];
        for i in 0..n {
            x[self.piv[i]] = y[i];
        }
        x
    }

    /// Solve `A x = b` with `steps` rounds of iterative refinement against
    /// the original matrix. Refinement keeps the residual near the level of
    /// rounding in `A x` even when `A` is poorly conditioned.
    pub fn solve_refined(&self, a: &Mat, b: &[f64], steps: usize) -> Vec<f64> {
        let mut x = self.solve(b);
        for _ in 0..steps {
            let ax = a.matvec(&x);
            let mut r = vec![0.0; self.n];
            for i in 0..self.n {
                r[i] = b[i] - ax[i];
            }
            let dx = self.solve(&r);
            for i in 0..self.n {
                x[i] += dx[i];
            }
        }
        x
    }

    /// 1-norm condition estimate `||A||_1 * est(||A^{-1}||_1)`.
    ///
    /// `||A^{-1}||_1` is estimated with Hager's power method on the dual norm
    /// (the LAPACK `xCON` approach), which needs only a handful of solves.
    pub fn cond_1_estimate(&self, a_norm_1: f64) -> f64 {
        let n = self.n;
        if n == 0 {
            return 1.0;
        }
        let mut x = vec![1.0 / n as f64; n];
        let mut est = 0.0;
        for _ in 0..5 {
            let y = self.solve(&x);
            est = y.iter().map(|v| math::abs(*v)).sum();
            let xi: Vec<f64> = y
                .iter()
                .map(|v| if *v >= 0.0 { 1.0 } else { -1.0 })
                .collect();
            let z = self.solve_transpose(&xi);
            let (mut jmax, mut zmax) = (0, 0.0);
            for (j, v) in z.iter().enumerate() {
                if math::abs(*v) > zmax {
                    zmax = math::abs(*v);
                    jmax = j;
                }
            }
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| a * b).sum();
            if zmax <= ztx {
                break;
            }
            x.iter_mut().for_each(|v| *v = 0.0);
            x[jmax] = 1.0;
        }
        a_norm_1 * est
    }
}

/// Minimum-norm solution of an underdetermined full-row-rank system.
#[derive(Clone, Debug)]
pub struct MinNormSolution {
    pub solution: Vec<f64>,
    /// Numerical rank detected by the pivoted factorization.
    pub rank: usize,
}

/// Minimum-2-norm solution of `B x = rhs` where `B` is `p x n` with `p <= n`.
///
/// Works on the Householder QR factorization with column pivoting of `B^T`:
/// `B^T Pi = Q R`, so `x = Q R^{-T} Pi^T rhs` restricted to the numerical
/// rank. Diagonal entries of `R` below `rank_tol * |R[0,0]|` are treated as
/// zero; the dropped directions are consistent for the moment systems solved
/// here, and the caller re-checks the residual.
pub fn min_norm_solve(b: &Mat, rhs: &[f64], rank_tol: f64) -> Result<MinNormSolution, LinalgError> {
    let p = b.rows();
    let n = b.cols();
    if rhs.len() != p || p > n {
        return Err(LinalgError::ShapeMismatch);
    }

    // Factor B^T (n x p), storing Householder vectors below the diagonal.
    let mut a = b.transpose();
    let mut perm: Vec<usize> = (0..p).collect();
    let mut tau = vec![0.0; p];
    let mut col_norms: Vec<f64> = (0..p)
        .map(|j| {
            let mut s = 0.0;
            for i in 0..n {
                s += a.get(i, j) * a.get(i, j);
            }
            s
        })
        .collect();

    for k in 0..p {
        // Column pivot: largest remaining squared norm.
        let mut jmax = k;
        let mut best = col_norms[k];
        for j in (k + 1)..p {
            if col_norms[j] > best {
                best = col_norms[j];
                jmax = j;
            }
        }
        if jmax != k {
            for i in 0..n {
                let t = a.get(i, k);
                a.set(i, k, a.get(i, jmax));
                a.set(i, jmax, t);
            }
            col_norms.swap(k, jmax);
            perm.swap(k, jmax);
        }

        // Householder reflector annihilating column k below row k.
        let mut norm = 0.0;
        for i in k..n {
            norm += a.get(i, k) * a.get(i, k);
        }
        let norm = math::sqrt(norm);
        if norm == 0.0 {
            tau[k] = 0.0;
            continue;
        }
        let alpha = a.get(k, k);
        let beta = if alpha >= 0.0 { -norm } else { norm };
        let v0 = alpha - beta;
        tau[k] = -v0 / beta;
        for i in (k + 1)..n {
            let v = a.get(i, k) / v0;
            a.set(i, k, v);
        }
        a.set(k, k, beta);

        // Apply the reflector to the trailing columns.
        for j in (k + 1)..p {
            let mut dot = a.get(k, j);
            for i in (k + 1)..n {
                dot += a.get(i, k) * a.get(i, j);
            }
            dot *= tau[k];
            let v = a.get(k, j) - dot;
            a.set(k, j, v);
            for i in (k + 1)..n {
                let v = a.get(i, j) - dot * a.get(i, k);
                a.set(i, j, v);
            }
        }

        // Downdate remaining column norms (recompute; p is small).
        for j in (k + 1)..p {
            let mut s = 0.0;
            for i in (k + 1)..n {
                s += a.get(i, j) * a.get(i, j);
            }
            col_norms[j] = s;
        }
    }

    // Numerical rank from the diagonal of R.
    let r00 = math::abs(a.get(0, 0));
    if r00 == 0.0 {
        return Err(LinalgError::RankDeficient { rank: 0, needed: p });
    }
    let mut rank = 0;
    for k in 0..p {
        if math::abs(a.get(k, k)) > rank_tol * r00 {
            rank += 1;
        } else {
            break;
        }
    }

    // Solve R^T y = Pi^T rhs on the leading rank x rank block.
    let mut y = vec![0.0; p];
    for i in 0..rank {
        let mut acc = rhs[perm[i]];
        for j in 0..i {
            acc -= a.get(j, i) * y[j];
        }
        y[i] = acc / a.get(i, i);
    }

    // x = Q [y; 0]: apply reflectors H_{rank-1} ... H_0 to the padded vector.
    let mut x = vec![0.0; n];
    x[..rank].copy_from_slice(&y[..rank]);
    for k in (0..rank).rev() {
        if tau[k] == 0.0 {
            continue;
        }
        let mut dot = x[k];
        for i in (k + 1)..n {
            dot += a.get(i, k) * x[i];
        }
        dot *= tau[k];
        x[k] -= dot;
        for i in (k + 1)..n {
            x[i] -= dot * a.get(i, k);
        }
    }

    Ok(MinNormSolution { solution: x, rank })
}

/// Singular values of `a` in decreasing order, by one-sided Jacobi on the
/// columns. Intended for the tall-and-thin Vandermonde-type rank checks, not
/// for large square systems.
pub fn singular_values(a: &Mat) -> Vec<f64> {
    let work = if a.rows() >= a.cols() {
        a.clone()
    } else {
        a.transpose()
    };
    let m = work.rows();
    let n = work.cols();
    let mut u = work;

    let eps = 1e-15;
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = 0.0;
                for i in 0..m {
                    let up = u.get(i, p);
                    let uq = u.get(i, q);
                    app += up * up;
                    aqq += uq * uq;
                    apq += up * uq;
                }
                if math::abs(apq) <= eps * math::sqrt(app * aqq) {
                    continue;
                }
                off += apq * apq;
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + math::sqrt(1.0 + theta * theta))
                } else {
                    1.0 / (theta - math::sqrt(1.0 + theta * theta))
                };
                let c = 1.0 / math::sqrt(1.0 + t * t);
                let s = c * t;
                for i in 0..m {
                    let up = u.get(i, p);
                    let uq = u.get(i, q);
                    u.set(i, p, c * up - s * uq);
                    u.set(i, q, s * up + c * uq);
                }
            }
        }
        if off == 0.0 {
            break;
        }
    }

    let mut sv: Vec<f64> = (0..n)
        .map(|j| {
            let mut s = 0.0;
            for i in 0..m {
                s += u.get(i, j) * u.get(i, j);
            }
            math::sqrt(s)
        })
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

/// Numerical rank: singular values above `tol * sigma_max` count.
pub fn numerical_rank(a: &Mat, tol: f64) -> usize {
    let sv = singular_values(a);
    if sv.is_empty() || sv[0] == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > tol * sv[0]).count()
}
