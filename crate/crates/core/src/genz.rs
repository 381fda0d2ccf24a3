//! Genz test integrands on the unit cube with reference integrals.
//!
//! The four families (oscillatory, product peak, corner peak, Gaussian peak)
//! with shape vector `a` and translation vector `b`. Reference integrals are
//! closed forms where they are simple (families 1, 2, 4) and an
//! escalating-order tensor Gauss-Legendre oracle for the corner peak, whose
//! closed form is easy to get wrong; the oracle doubles as a cross-check for
//! all families in the tests.

use alloc::vec::Vec;

use crate::gauss;
use crate::math;
use crate::pointsets::Point;
use crate::rng::SplitMix64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenzFamily {
    /// `g1 = cos(2 pi b_1 + sum a_i x_i)`
    Oscillatory,
    /// `g2 = prod (a_i^{-2} + (x_i - b_i)^2)^{-1}`
    ProductPeak,
    /// `g3 = (1 + sum a_i x_i)^{-(q+1)}`
    CornerPeak,
    /// `g4 = exp(-sum a_i^2 (x_i - b_i)^2)`
    GaussianPeak,
}

impl GenzFamily {
    pub fn index(&self) -> usize {
        match self {
            GenzFamily::Oscillatory => 1,
            GenzFamily::ProductPeak => 2,
            GenzFamily::CornerPeak => 3,
            GenzFamily::GaussianPeak => 4,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        match i {
            1 => Some(GenzFamily::Oscillatory),
            2 => Some(GenzFamily::ProductPeak),
            3 => Some(GenzFamily::CornerPeak),
            4 => Some(GenzFamily::GaussianPeak),
            _ => None,
        }
    }
}

impl core::fmt::Display for GenzFamily {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            GenzFamily::Oscillatory => write!(f, "oscillatory"),
            GenzFamily::ProductPeak => write!(f, "product-peak"),
            GenzFamily::CornerPeak => write!(f, "corner-peak"),
            GenzFamily::GaussianPeak => write!(f, "gaussian-peak"),
        }
    }
}

/// A Genz integrand on `[0, 1]^q`, `q in {1, 2}`.
#[derive(Clone, Debug)]
pub struct GenzFunction {
    pub family: GenzFamily,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleError {
    pub max_order: usize,
}

impl core::fmt::Display for OracleError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(
            f,
            "reference oracle did not converge by tensor order {}",
            self.max_order
        )
    }
}

impl core::error::Error for OracleError {}

impl GenzFunction {
    pub fn new(family: GenzFamily, a: Vec<f64>, b: Vec<f64>) -> Self {
        assert_eq!(a.len(), b.len());
        assert!(matches!(a.len(), 1 | 2), "only q in {{1, 2}} supported");
        Self { family, a, b }
    }

    /// Shape and translation vectors drawn i.i.d. uniform from `[0, 1]^q`.
    pub fn random(family: GenzFamily, q: usize, seed: u64) -> Self {
        let mut gen = SplitMix64::new(seed);
        let a = (0..q).map(|_| gen.next_f64()).collect();
        let b = (0..q).map(|_| gen.next_f64()).collect();
        Self::new(family, a, b)
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn evaluate(&self, x: &Point) -> f64 {
        let q = self.dim();
        match self.family {
            GenzFamily::Oscillatory => {
                let mut arg = 2.0 * math::PI * self.b[0];
                for i in 0..q {
                    arg += self.a[i] * x[i];
                }
                math::cos(arg)
            }
            GenzFamily::ProductPeak => {
                let mut acc = 1.0;
                for i in 0..q {
                    let d = x[i] - self.b[i];
                    acc *= 1.0 / (1.0 / (self.a[i] * self.a[i]) + d * d);
                }
                acc
            }
            GenzFamily::CornerPeak => {
                let mut base = 1.0;
                for i in 0..q {
                    base += self.a[i] * x[i];
                }
                math::powi(1.0 / base, q as u32 + 1)
            }
            GenzFamily::GaussianPeak => {
                let mut arg = 0.0;
                for i in 0..q {
                    let d = x[i] - self.b[i];
                    arg += self.a[i] * self.a[i] * d * d;
                }
                math::exp(-arg)
            }
        }
    }

    /// Reference value of `int_{[0,1]^q} g`.
    ///
    /// Closed forms for the oscillatory, product-peak, and Gaussian-peak
    /// families; the corner peak goes through the oracle.
    pub fn reference_integral(&self) -> f64 {
        let q = self.dim();
        match self.family {
            GenzFamily::Oscillatory => {
                // Re[e^{i(2 pi b_1 + sum a_i/2)}] * prod sinc(a_i / 2)
                let mut phase = 2.0 * math::PI * self.b[0];
                let mut amp = 1.0;
                for i in 0..q {
                    phase += self.a[i] / 2.0;
                    amp *= sinc(self.a[i] / 2.0);
                }
                amp * math::cos(phase)
            }
            GenzFamily::ProductPeak => {
                let mut acc = 1.0;
                for i in 0..q {
                    let a = self.a[i];
                    let b = self.b[i];
                    acc *= if a == 0.0 {
                        0.0
                    } else {
                        a * (math::atan(a * (1.0 - b)) + math::atan(a * b))
                    };
                }
                acc
            }
            GenzFamily::CornerPeak => self
                .reference_oracle()
                .expect("corner-peak oracle converges for parameters in [0,1]^q"),
            GenzFamily::GaussianPeak => {
                let mut acc = 1.0;
                for i in 0..q {
                    let a = self.a[i];
                    let b = self.b[i];
                    acc *= if a == 0.0 {
                        1.0
                    } else {
                        math::SQRT_PI / (2.0 * a) * (math::erf(a * (1.0 - b)) + math::erf(a * b))
                    };
                }
                acc
            }
        }
    }

    /// Tensor Gauss-Legendre with escalating order until two successive
    /// orders agree to `1e-12 * max(1, |I|)`.
    pub fn reference_oracle(&self) -> Result<f64, OracleError> {
        let mut previous = None;
        for order in [8usize, 16, 32, 64, 128, 256] {
            let value = self.tensor_gl(order);
            if let Some(prev) = previous {
                if math::abs(value - prev) <= 1e-12 * math::abs(value).max(1.0) {
                    return Ok(value);
                }
            }
            previous = Some(value);
        }
        Err(OracleError { max_order: 256 })
    }

    fn tensor_gl(&self, order: usize) -> f64 {
        let (nodes, weights) = gauss::gauss_legendre(order);
        let map = |t: f64| 0.5 * (t + 1.0);
        match self.dim() {
            1 => {
                let mut acc = 0.0;
                for (x, w) in nodes.iter().zip(&weights) {
                    acc += w * self.evaluate(&[map(*x), 0.0]);
                }
                acc * 0.5
            }
            _ => {
                let mut acc = 0.0;
                for (x, wx) in nodes.iter().zip(&weights) {
                    let mut inner = 0.0;
                    for (y, wy) in nodes.iter().zip(&weights) {
                        inner += wy * self.evaluate(&[map(*x), map(*y)]);
                    }
                    acc += wx * inner;
                }
                acc * 0.25
            }
        }
    }
}

fn sinc(t: f64) -> f64 {
    if math::abs(t) < 1e-8 {
        1.0 - t * t / 6.0
    } else {
        math::sin(t) / t
    }
}

/// Add uniform noise from `[-magnitude, magnitude]` to each value,
/// deterministically per seed.
pub fn add_noise(values: &[f64], magnitude: f64, seed: u64) -> Vec<f64> {
    assert!(magnitude >= 0.0);
    let mut gen = SplitMix64::new(seed);
    values
        .iter()
        .map(|v| v + magnitude * (2.0 * gen.next_f64() - 1.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oscillatory_zero_shape_is_constant() {
        let g = GenzFunction::new(
            GenzFamily::Oscillatory,
            alloc::vec![0.0, 0.0],
            alloc::vec![0.3, 0.9],
        );
        let c = math::cos(2.0 * math::PI * 0.3);
        assert_eq!(g.evaluate(&[0.2, 0.8]), c);
        assert!(math::abs(g.reference_integral() - c) < 1e-15);
    }

    #[test]
    fn gaussian_peak_is_one_at_translation() {
        let g = GenzFunction::new(
            GenzFamily::GaussianPeak,
            alloc::vec![0.7, 0.9],
            alloc::vec![0.4, 0.6],
        );
        assert_eq!(g.evaluate(&[0.4, 0.6]), 1.0);
    }

    #[test]
    fn product_peak_unit_parameters_at_origin() {
        let g = GenzFunction::new(
            GenzFamily::ProductPeak,
            alloc::vec![1.0, 1.0],
            alloc::vec![0.0, 0.0],
        );
        assert_eq!(g.evaluate(&[0.0, 0.0]), 1.0);
    }

    #[test]
    fn gaussian_peak_reference_matches_erf_expression() {
        let g = GenzFunction::new(
            GenzFamily::GaussianPeak,
            alloc::vec![1.0, 1.0],
            alloc::vec![0.0, 0.0],
        );
        let per_axis = math::SQRT_PI / 2.0 * math::erf(1.0);
        let expect = per_axis * per_axis;
        assert!(math::abs(g.reference_integral() - expect) < 1e-15);
        assert!(math::abs(expect - 0.557746) < 1e-6);
    }

    #[test]
    fn closed_forms_match_oracle() {
        for family in [
            GenzFamily::Oscillatory,
            GenzFamily::ProductPeak,
            GenzFamily::CornerPeak,
            GenzFamily::GaussianPeak,
        ] {
            for seed in 0..12u64 {
                for q in [1usize, 2] {
                    let g = GenzFunction::random(family, q, 1000 + seed);
                    let closed = g.reference_integral();
                    let oracle = g.reference_oracle().unwrap();
                    assert!(
                        math::abs(closed - oracle) <= 1e-10 * math::abs(oracle).max(1.0),
                        "{family} q={q} seed={seed}: {closed} vs {oracle}"
                    );
                }
            }
        }
    }

    #[test]
    fn corner_peak_2d_matches_iterated_closed_form() {
        // (1 + a1 x + a2 y)^{-3} integrates to
        // [1 - 1/(1+a1) - 1/(1+a2) + 1/(1+a1+a2)] / (2 a1 a2).
        let (a1, a2) = (0.63, 0.38);
        let g = GenzFunction::new(
            GenzFamily::CornerPeak,
            alloc::vec![a1, a2],
            alloc::vec![0.0, 0.0],
        );
        let closed =
            (1.0 - 1.0 / (1.0 + a1) - 1.0 / (1.0 + a2) + 1.0 / (1.0 + a1 + a2)) / (2.0 * a1 * a2);
        assert!(math::abs(g.reference_integral() - closed) < 1e-12);
    }

    #[test]
    fn random_draws_in_unit_cube_and_distinct() {
        let g1 = GenzFunction::random(GenzFamily::Oscillatory, 2, 1);
        let g2 = GenzFunction::random(GenzFamily::Oscillatory, 2, 2);
        let g3 = GenzFunction::random(GenzFamily::Oscillatory, 2, 3);
        for g in [&g1, &g2, &g3] {
            for v in g.a.iter().chain(&g.b) {
                assert!((0.0..1.0).contains(v));
            }
        }
        assert_ne!(g1.a, g2.a);
        assert_ne!(g2.a, g3.a);
    }

    #[test]
    fn bounded_on_dense_grid() {
        for family in [
            GenzFamily::Oscillatory,
            GenzFamily::ProductPeak,
            GenzFamily::CornerPeak,
            GenzFamily::GaussianPeak,
        ] {
            let g = GenzFunction::random(family, 2, 77);
            for i in 0..=50 {
                for j in 0..=50 {
                    let v = g.evaluate(&[i as f64 / 50.0, j as f64 / 50.0]);
                    assert!(v.is_finite());
                }
            }
        }
    }

    #[test]
    fn noise_respects_magnitude_and_seed() {
        let values = alloc::vec![1.0; 100];
        assert_eq!(add_noise(&values, 0.0, 9), values);
        let noisy = add_noise(&values, 1e-2, 9);
        let again = add_noise(&values, 1e-2, 9);
        assert_eq!(noisy, again);
        for (n, v) in noisy.iter().zip(&values) {
            assert!(math::abs(n - v) <= 1e-2);
        }
    }
}
