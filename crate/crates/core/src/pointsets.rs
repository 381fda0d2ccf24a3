//! Point sequences on box domains and their geometric summary statistics.
//!
//! Equidistant grids, Halton points (plain, unscrambled, bases 2 and 3), and
//! seeded uniform random points, plus the separation / fill distances used as
//! shape-parameter thresholds.

use alloc::string::String;
use alloc::vec::Vec;

use crate::math;
use crate::rng::SplitMix64;

/// A point in at most two dimensions; the active dimension comes from the
/// surrounding [`Domain`]. The second coordinate is 0 in one dimension.
pub type Point = [f64; 2];

/// Euclidean distance over the first `dim` coordinates.
#[inline]
pub fn distance(dim: usize, a: &Point, b: &Point) -> f64 {
    if dim == 1 {
        math::abs(a[0] - b[0])
    } else {
        math::hypot(a[0] - b[0], a[1] - b[1])
    }
}

/// An axis-aligned box `[a_1, b_1] x ... x [a_D, b_D]`, `D in {1, 2}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Domain {
    dim: usize,
    lo: [f64; 2],
    hi: [f64; 2],
}

#[derive(Clone, Debug, PartialEq)]
pub enum PointSetError {
    /// Axis bounds with `a >= b`.
    EmptyAxis { axis: usize, lo: f64, hi: f64 },
    /// Unsupported dimension.
    BadDimension(usize),
    /// A generator produced coincident points (rejects the seed).
    DuplicatePoints { seed: u64 },
    /// Unrecognized point-set specification string.
    Parse(String),
}

impl core::fmt::Display for PointSetError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            PointSetError::EmptyAxis { axis, lo, hi } => {
                write!(f, "axis {axis} is empty: [{lo}, {hi}]")
            }
            PointSetError::BadDimension(d) => write!(f, "dimension must be 1 or 2, got {d}"),
            PointSetError::DuplicatePoints { seed } => {
                write!(
                    f,
                    "random generator produced duplicate points (seed {seed})"
                )
            }
            PointSetError::Parse(s) => write!(f, "cannot parse point-set spec `{s}`"),
        }
    }
}

impl core::error::Error for PointSetError {}

impl Domain {
    pub fn interval(a: f64, b: f64) -> Result<Self, PointSetError> {
        if a >= b {
            return Err(PointSetError::EmptyAxis {
                axis: 0,
                lo: a,
                hi: b,
            });
        }
        Ok(Self {
            dim: 1,
            lo: [a, 0.0],
            hi: [b, 0.0],
        })
    }

    pub fn rectangle(x: (f64, f64), y: (f64, f64)) -> Result<Self, PointSetError> {
        if x.0 >= x.1 {
            return Err(PointSetError::EmptyAxis {
                axis: 0,
                lo: x.0,
                hi: x.1,
            });
        }
        if y.0 >= y.1 {
            return Err(PointSetError::EmptyAxis {
                axis: 1,
                lo: y.0,
                hi: y.1,
            });
        }
        Ok(Self {
            dim: 2,
            lo: [x.0, y.0],
            hi: [x.1, y.1],
        })
    }

    pub fn unit_interval() -> Self {
        Self::interval(0.0, 1.0).unwrap()
    }

    pub fn unit_square() -> Self {
        Self::rectangle((0.0, 1.0), (0.0, 1.0)).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lo(&self, axis: usize) -> f64 {
        self.lo[axis]
    }

    pub fn hi(&self, axis: usize) -> f64 {
        self.hi[axis]
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim).map(|i| self.hi[i] - self.lo[i]).product()
    }

    /// Closed-box membership.
    pub fn contains(&self, p: &Point) -> bool {
        (0..self.dim).all(|i| p[i] >= self.lo[i] && p[i] <= self.hi[i])
    }

    /// Map a point from `[0,1]^D` onto this box.
    pub fn from_unit(&self, u: &Point) -> Point {
        let mut p = [0.0; 2];
        for i in 0..self.dim {
            p[i] = self.lo[i] + (self.hi[i] - self.lo[i]) * u[i];
        }
        p
    }
}

/// Distinct points inside a closed box domain.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    domain: Domain,
    points: Vec<Point>,
}

impl PointSet {
    /// Wraps externally produced points. Panics if a point lies outside the
    /// domain; distinctness is the caller's responsibility here.
    pub fn from_points(domain: Domain, points: Vec<Point>) -> Self {
        for p in &points {
            assert!(domain.contains(p), "point {p:?} outside domain");
        }
        Self { domain, points }
    }

    /// Tensor grid with `n_per_axis` points per axis, endpoints included.
    /// In 2D the grid is row-major with x varying fastest.
    pub fn equidistant(domain: Domain, n_per_axis: usize) -> Self {
        assert!(n_per_axis >= 2, "need at least 2 points per axis");
        let line = |axis: usize, i: usize| {
            let t = i as f64 / (n_per_axis - 1) as f64;
            domain.lo[axis] + (domain.hi[axis] - domain.lo[axis]) * t
        };
        let mut points = Vec::new();
        match domain.dim {
            1 => {
                for i in 0..n_per_axis {
                    points.push([line(0, i), 0.0]);
                }
            }
            2 => {
                for j in 0..n_per_axis {
                    for i in 0..n_per_axis {
                        points.push([line(0, i), line(1, j)]);
                    }
                }
            }
            _ => unreachable!(),
        }
        Self { domain, points }
    }

    /// First `n` Halton points after dropping `skip` initial elements,
    /// mapped affinely onto the domain. Base 2 in one dimension; bases
    /// (2, 3) in two. Plain unscrambled radical inverses, starting at
    /// index 1, so the first base-2 value is 1/2.
    pub fn halton(domain: Domain, n: usize, skip: usize) -> Self {
        assert!(n >= 1);
        let mut points = Vec::with_capacity(n);
        for idx in 0..n {
            let i = (skip + idx + 1) as u64;
            let u = match domain.dim {
                1 => [radical_inverse(i, 2), 0.0],
                2 => [radical_inverse(i, 2), radical_inverse(i, 3)],
                _ => unreachable!(),
            };
            points.push(domain.from_unit(&u));
        }
        Self { domain, points }
    }

    /// `n` points drawn i.i.d. uniformly from the domain using the seeded
    /// [`SplitMix64`] stream; coordinates are drawn x-first so prefixes of
    /// the same seed nest.
    pub fn random(domain: Domain, n: usize, seed: u64) -> Result<Self, PointSetError> {
        assert!(n >= 1);
        let mut gen = SplitMix64::new(seed);
        let mut points = Vec::with_capacity(n);
        for _ in 0..n {
            let mut p = [0.0; 2];
            for i in 0..domain.dim {
                p[i] = gen.next_in(domain.lo[i], domain.hi[i]);
            }
            points.push(p);
        }
        // Zero-probability event, but a duplicate would silently break the
        // interpolation systems downstream.
        let mut sorted = points.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(PointSetError::DuplicatePoints { seed });
        }
        Ok(Self { domain, points })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &Point {
        &self.points[i]
    }

    /// Restrict to the first `n` points.
    pub fn prefix(&self, n: usize) -> Self {
        assert!(n <= self.len());
        Self {
            domain: self.domain,
            points: self.points[..n].to_vec(),
        }
    }

    /// Smallest pairwise distance (separation distance).
    ///
    /// # Panics
    /// With fewer than 2 points.
    pub fn min_distance(&self) -> f64 {
        self.nearest_neighbor_distances()
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest nearest-neighbor distance (fill-type distance of the set to
    /// itself).
    ///
    /// # Panics
    /// With fewer than 2 points.
    pub fn max_fill_distance(&self) -> f64 {
        self.nearest_neighbor_distances()
            .into_iter()
            .fold(0.0, f64::max)
    }

    /// Per-point nearest-neighbor distances `h_n`; the nonoverlap condition
    /// for compactly supported kernels is `1/eps_n <= h_n`.
    ///
    /// # Panics
    /// With fewer than 2 points.
    pub fn nearest_neighbor_distances(&self) -> Vec<f64> {
        assert!(
            self.len() >= 2,
            "nearest-neighbor distances need at least 2 points"
        );
        let dim = self.dim();
        let pts = &self.points;
        (0..pts.len())
            .map(|n| {
                let mut best = f64::INFINITY;
                for m in 0..pts.len() {
                    if m != n {
                        let d = distance(dim, &pts[n], &pts[m]);
                        if d < best {
                            best = d;
                        }
                    }
                }
                best
            })
            .collect()
    }
}

/// Van der Corput radical inverse of `i` in the given base.
fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv_base = 1.0 / base as f64;
    let mut f = inv_base;
    let mut x = 0.0;
    while i > 0 {
        x += (i % base) as f64 * f;
        i /= base;
        f *= inv_base;
    }
    x
}

/// A deterministic point sequence whose prefixes nest, as required by the
/// incremental least-squares construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointSequence {
    Halton { skip: usize },
    Random { seed: u64 },
}

impl PointSequence {
    /// The first `n` elements of the sequence on `domain`.
    pub fn take(&self, domain: Domain, n: usize) -> Result<PointSet, PointSetError> {
        match *self {
            PointSequence::Halton { skip } => Ok(PointSet::halton(domain, n, skip)),
            PointSequence::Random { seed } => PointSet::random(domain, n, seed),
        }
    }
}

impl core::fmt::Display for PointSequence {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            PointSequence::Halton { skip } => write!(f, "halton:{skip}"),
            PointSequence::Random { seed } => write!(f, "random:{seed}"),
        }
    }
}
