//! Kernel families and their structural metadata.
//!
//! Four families are supported: the Gaussian `exp(-r^2)`, Wendland's
//! compactly supported piecewise polynomials, and the two polyharmonic-spline
//! (PHS) families `r^p` (odd `p`) and `r^p log r` (even `p`). Each kernel
//! reports its conditional-positive-definiteness order, which callers use to
//! decide the minimal polynomial degree to append.

use alloc::string::String;
use alloc::vec::Vec;
use core::str::FromStr;

use crate::math;

/// A radial kernel `phi: [0, inf) -> R`.
///
/// Shape parameters are *not* part of the kernel: scaling is applied by the
/// caller as `phi(eps * r)`. PHS kernels take no shape parameter at all and
/// are always evaluated with `eps = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kernel {
    /// `phi(r) = exp(-r^2)`.
    Gaussian,
    /// Wendland's minimal-degree compactly supported kernel for space
    /// dimension `d` and smoothness `2k`, normalized so `phi(0) = 1` and
    /// `supp(phi) = [0, 1]`.
    Wendland { d: u8, k: u8 },
    /// `phi(r) = r^p` with odd `p >= 1`.
    PhsOdd { p: u32 },
    /// `phi(r) = r^p log(r)` with even `p >= 2`, extended by `phi(0) = 0`.
    PhsEvenLog { p: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KernelError {
    /// Wendland parameters outside the supported `d in 1..=3`, `k in 0..=2`.
    WendlandParams { d: u8, k: u8 },
    /// PHS exponent with the wrong parity or out of range.
    PhsExponent { p: u32, even: bool },
    /// Unrecognized kernel specification string.
    Parse(String),
}

impl core::fmt::Display for KernelError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            KernelError::WendlandParams { d, k } => write!(
                f,
                "unsupported Wendland parameters (d={d}, k={k}); need d in 1..=3, k in 0..=2"
            ),
            KernelError::PhsExponent { p, even } => {
                if *even {
                    write!(f, "phslog exponent must be even and >= 2, got {p}")
                } else {
                    write!(f, "phs exponent must be odd and >= 1, got {p}")
                }
            }
            KernelError::Parse(s) => write!(f, "cannot parse kernel spec `{s}`"),
        }
    }
}

impl core::error::Error for KernelError {}

impl Kernel {
    pub fn wendland(d: u8, k: u8) -> Result<Self, KernelError> {
        if (1..=3).contains(&d) && k <= 2 {
            Ok(Kernel::Wendland { d, k })
        } else {
            Err(KernelError::WendlandParams { d, k })
        }
    }

    pub fn phs_odd(p: u32) -> Result<Self, KernelError> {
        if p >= 1 && !p.is_multiple_of(2) {
            Ok(Kernel::PhsOdd { p })
        } else {
            Err(KernelError::PhsExponent { p, even: false })
        }
    }

    pub fn phs_even_log(p: u32) -> Result<Self, KernelError> {
        if p >= 2 && p.is_multiple_of(2) {
            Ok(Kernel::PhsEvenLog { p })
        } else {
            Err(KernelError::PhsExponent { p, even: true })
        }
    }

    /// Evaluate `phi(r)`.
    ///
    /// # Panics
    /// On negative `r`; radii are Euclidean distances by construction.
    pub fn evaluate(&self, r: f64) -> f64 {
        assert!(r >= 0.0, "kernel radius must be nonnegative, got {r}");
        match *self {
            Kernel::Gaussian => math::exp(-r * r),
            Kernel::Wendland { d, k } => wendland_eval(d, k, r),
            Kernel::PhsOdd { p } => math::powi(r, p),
            Kernel::PhsEvenLog { p } => {
                if r == 0.0 {
                    0.0
                } else {
                    math::powi(r, p) * math::ln(r)
                }
            }
        }
    }

    /// Conditional-positive-definiteness order.
    ///
    /// Unisolvent interpolation is guaranteed for polynomial degrees
    /// `d >= order - 1`; an order of 0 means no polynomial term is required.
    pub fn order(&self) -> u32 {
        match *self {
            Kernel::Gaussian => 0,
            Kernel::Wendland { .. } => 0,
            Kernel::PhsOdd { p } => p.div_ceil(2),
            Kernel::PhsEvenLog { p } => p / 2 + 1,
        }
    }

    /// Whether `phi(eps * r)` actually depends on a shape parameter.
    /// PHS kernels only rescale by a power of `eps`, which cancels in
    /// interpolation, and are conventionally used with `eps = 1`.
    pub fn has_shape_parameter(&self) -> bool {
        matches!(self, Kernel::Gaussian | Kernel::Wendland { .. })
    }

    /// Whether `supp(phi) = [0, 1]`.
    pub fn is_compactly_supported(&self) -> bool {
        matches!(self, Kernel::Wendland { .. })
    }

    /// Whether `phi >= 0` everywhere (restriction needed for the
    /// nonoverlap stability results).
    pub fn is_nonnegative(&self) -> bool {
        matches!(
            self,
            Kernel::Gaussian | Kernel::Wendland { .. } | Kernel::PhsOdd { .. }
        )
    }
}

impl core::fmt::Display for Kernel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match *self {
            Kernel::Gaussian => write!(f, "gaussian"),
            Kernel::Wendland { d, k } => write!(f, "wendland:{d},{k}"),
            Kernel::PhsOdd { p } => write!(f, "phs:{p}"),
            Kernel::PhsEvenLog { p } => write!(f, "phslog:{p}"),
        }
    }
}

impl FromStr for Kernel {
    type Err = KernelError;

    /// Parses `gaussian`, `wendland:<D>,<k>`, `phs:<p>`, `phslog:<p>`.
    fn from_str(s: &str) -> Result<Self, KernelError> {
        let bad = || KernelError::Parse(String::from(s));
        if s == "gaussian" {
            return Ok(Kernel::Gaussian);
        }
        if let Some(rest) = s.strip_prefix("wendland:") {
            let (d, k) = rest.split_once(',').ok_or_else(bad)?;
            let d: u8 = d.trim().parse().map_err(|_| bad())?;
            let k: u8 = k.trim().parse().map_err(|_| bad())?;
            return Kernel::wendland(d, k);
        }
        if let Some(rest) = s.strip_prefix("phslog:") {
            let p: u32 = rest.trim().parse().map_err(|_| bad())?;
            return Kernel::phs_even_log(p);
        }
        if let Some(rest) = s.strip_prefix("phs:") {
            let p: u32 = rest.trim().parse().map_err(|_| bad())?;
            return Kernel::phs_odd(p);
        }
        Err(bad())
    }
}

/// Factored form of the Wendland kernel `phi_{d,k}`:
/// `(1 - r)^m * (c2 r^2 + c1 r + c0) / scale` on `[0, 1]`.
///
/// These are the minimal-degree functions from Wendland's construction with
/// `l = floor(d/2) + k + 1`:
///
/// - `k = 0`: `(1 - r)^l`
/// - `k = 1`: `(1 - r)^(l+1) ((l+1) r + 1)`
/// - `k = 2`: `(1 - r)^(l+2) ((l^2+4l+3) r^2 + (3l+6) r + 3) / 3`
///
/// The `k = 2` case is divided by 3 so that every member satisfies
/// `phi(0) = 1` (unit maximum).
fn wendland_factored(d: u8, k: u8) -> (u32, f64, f64, f64) {
    let l = (d as u32) / 2 + (k as u32) + 1;
    let lf = l as f64;
    match k {
        0 => (l, 0.0, 0.0, 1.0),
        1 => (l + 1, 0.0, lf + 1.0, 1.0),
        2 => (
            l + 2,
            (lf * lf + 4.0 * lf + 3.0) / 3.0,
            (3.0 * lf + 6.0) / 3.0,
            1.0,
        ),
        _ => unreachable!("constructor enforces k <= 2"),
    }
}

fn wendland_eval(d: u8, k: u8, r: f64) -> f64 {
    if r >= 1.0 {
        return 0.0;
    }
    let (m, c2, c1, c0) = wendland_factored(d, k);
    math::powi(1.0 - r, m) * ((c2 * r + c1) * r + c0)
}

/// Coefficients of `phi_{d,k}` as a plain polynomial `sum_j c[j] r^j` valid
/// on `[0, 1]`. Used for exact moment integration.
pub(crate) fn wendland_coefficients(d: u8, k: u8) -> Vec<f64> {
    let (m, c2, c1, c0) = wendland_factored(d, k);
    // (1 - r)^m via binomial coefficients.
    let mut base = Vec::with_capacity(m as usize + 1);
    let mut binom = 1.0f64;
    for j in 0..=m {
        let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
        base.push(sign * binom);
        binom = binom * (m - j) as f64 / (j + 1) as f64;
    }
    // Multiply by (c2 r^2 + c1 r + c0).
    let mut out = alloc::vec![0.0; base.len() + 2];
    for (j, b) in base.iter().enumerate() {
        out[j] += c0 * b;
        out[j + 1] += c1 * b;
        out[j + 2] += c2 * b;
    }
    while out.len() > 1 && out.last() == Some(&0.0) {
        out.pop();
    }
    out
}
