//! Covered/uncovered area of compactly supported kernels on the unit square.
//!
//! For an equidistant grid of `N = n^2` points with spacing `h = 1/(n-1)`
//! and support disks of radius `1/eps`, the uncovered area has a closed form
//! in three regimes (disjoint disks, pairwise overlapping disks, full
//! cover). The `(sqrt(N)-1)^2` factors already account for the clipping of
//! edge and corner disks by the square: an edge disk contributes half its
//! area and lenses, a corner disk a quarter. A Monte Carlo estimator serves
//! as the oracle and covers non-grid layouts.

use crate::math;
use crate::pointsets::PointSet;
use crate::rng::SplitMix64;

/// Uncovered-area query for an equidistant grid on `[0, 1]^2`.
#[derive(Clone, Copy, Debug)]
pub struct CoverageQuery {
    /// Total grid size; must be a perfect square with `sqrt(N) >= 2`.
    pub n: usize,
    /// Shape parameter; the support radius is `1/eps`.
    pub eps: f64,
}

impl CoverageQuery {
    /// `sqrt(N) - 1`, the reciprocal grid spacing.
    fn s(&self) -> f64 {
        let side = integer_sqrt(self.n).expect("N must be a perfect square >= 4");
        (side - 1) as f64
    }

    /// Shape parameter above which no two disks overlap.
    pub fn disjoint_threshold(&self) -> f64 {
        2.0 * self.s()
    }

    /// Shape parameter at and below which the square is fully covered.
    pub fn full_cover_threshold(&self) -> f64 {
        math::sqrt(2.0) * self.s()
    }
}

fn integer_sqrt(n: usize) -> Option<usize> {
    let mut r = 1usize;
    while r * r < n {
        r += 1;
    }
    (r * r == n && r >= 2).then_some(r)
}

/// Closed-form uncovered area for the equidistant grid.
///
/// - `eps > 2(sqrt(N)-1)`: disjoint disks, `1 - pi/eps^2 (sqrt(N)-1)^2`;
/// - `sqrt(2)(sqrt(N)-1) < eps <= 2(sqrt(N)-1)`: adjacent disks overlap in
///   lenses of angle `theta = 2 asin(sqrt(4(sqrt(N)-1)^2 - eps^2) /
///   (2(sqrt(N)-1)))`, adding `2(theta - sin theta)/eps^2 (sqrt(N)-1)^2`;
/// - `eps <= sqrt(2)(sqrt(N)-1)`: zero, the four disks around each grid cell
///   cover it.
pub fn uncovered_area_equidistant(query: &CoverageQuery) -> f64 {
    assert!(query.eps > 0.0);
    let s = query.s();
    let eps = query.eps;
    if eps > 2.0 * s {
        1.0 - math::PI / (eps * eps) * s * s
    } else if eps > math::sqrt(2.0) * s {
        let theta = 2.0 * math::asin(math::sqrt(4.0 * s * s - eps * eps) / (2.0 * s));
        1.0 - math::PI / (eps * eps) * s * s
            + 2.0 * (theta - math::sin(theta)) / (eps * eps) * s * s
    } else {
        0.0
    }
}

/// Monte Carlo estimate of the uncovered fraction with its binomial
/// standard error.
#[derive(Clone, Copy, Debug)]
pub struct McEstimate {
    pub fraction: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Fraction of uniform samples farther than `radius` from every point of
/// the set.
pub fn monte_carlo_uncovered(
    points: &PointSet,
    radius: f64,
    samples: usize,
    seed: u64,
) -> McEstimate {
    assert!(samples >= 10_000, "need enough samples for the error model");
    let domain = points.domain();
    let dim = domain.dim();
    let mut gen = SplitMix64::new(seed);
    let mut uncovered = 0usize;
    let r2 = radius * radius;
    for _ in 0..samples {
        let mut p = [0.0; 2];
        for i in 0..dim {
            p[i] = domain.lo(i) + (domain.hi(i) - domain.lo(i)) * gen.next_f64();
        }
        // Squared distances with early exit; this loop dominates the cost.
        let covered = points.points().iter().any(|q| {
            let dx = p[0] - q[0];
            let dy = p[1] - q[1];
            dx * dx + dy * dy <= r2
        });
        if !covered {
            uncovered += 1;
        }
    }
    let fraction = uncovered as f64 / samples as f64;
    let std_error = math::sqrt(fraction * (1.0 - fraction) / samples as f64);
    McEstimate {
        fraction,
        std_error,
        samples,
    }
}
