//! The six radial basis functions used throughout the crate, together with
//! their metadata (continuity class, support, value at the origin).
//!
//! Every kernel is evaluated as `phi(s)` with `s = eps * r`, where `r` is the
//! Euclidean distance to the center and `eps` the shape parameter. Increasing
//! `eps` makes a kernel more peaked; in the limit it degenerates to a discrete
//! delta: 1 at the center, 0 elsewhere. All six kernels reach that limit
//! through natural floating-point underflow except the inverse multiquadric,
//! whose algebraic tail only decays to `O(1/s)`.

use crate::error::{Error, Result};
use std::fmt;
use std::str::FromStr;

/// Kernel families: Gaussian, inverse multiquadric, Matérn of class C²/C⁴,
/// and Wendland of class C²/C⁴.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    Gaussian,
    InverseMultiquadric,
    Matern2,
    Matern4,
    Wendland2,
    Wendland4,
}

/// All kernel kinds, in the order used by the experiment tables.
pub const ALL_KERNELS: [KernelKind; 6] = [
    KernelKind::Gaussian,
    KernelKind::InverseMultiquadric,
    KernelKind::Wendland2,
    KernelKind::Wendland4,
    KernelKind::Matern2,
    KernelKind::Matern4,
];

impl KernelKind {
    /// Short lowercase tag used in CLI arguments and CSV output.
    pub fn tag(self) -> &'static str {
        match self {
            KernelKind::Gaussian => "g",
            KernelKind::InverseMultiquadric => "imq",
            KernelKind::Matern2 => "m2",
            KernelKind::Matern4 => "m4",
            KernelKind::Wendland2 => "w2",
            KernelKind::Wendland4 => "w4",
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "g" => Ok(KernelKind::Gaussian),
            "imq" => Ok(KernelKind::InverseMultiquadric),
            "m2" => Ok(KernelKind::Matern2),
            "m4" => Ok(KernelKind::Matern4),
            "w2" => Ok(KernelKind::Wendland2),
            "w4" => Ok(KernelKind::Wendland4),
            other => Err(Error::UnknownKernel(other.to_string())),
        }
    }
}

/// Continuity class sentinel for the infinitely smooth kernels.
pub const CONTINUITY_INFINITE: i32 = -1;

/// A kernel kind plus its static metadata.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub kind: KernelKind,
    /// Continuity class nu; [`CONTINUITY_INFINITE`] for Gaussian and IMQ.
    pub continuity: i32,
    pub compact_support: bool,
    pub value_at_zero: f64,
}

impl KernelSpec {
    pub fn new(kind: KernelKind) -> Self {
        let (continuity, compact_support, value_at_zero) = match kind {
            KernelKind::Gaussian => (CONTINUITY_INFINITE, false, 1.0),
            KernelKind::InverseMultiquadric => (CONTINUITY_INFINITE, false, 1.0),
            KernelKind::Matern2 => (2, false, 1.0),
            KernelKind::Matern4 => (4, false, 3.0),
            KernelKind::Wendland2 => (2, true, 1.0),
            KernelKind::Wendland4 => (4, true, 3.0),
        };
        KernelSpec {
            kind,
            continuity,
            compact_support,
            value_at_zero,
        }
    }
}

/// The cutoff `(x)_+ = max(x, 0)` used by the Wendland kernels.
#[inline]
pub fn cutoff_plus(x: f64) -> f64 {
    x.max(0.0)
}

/// Evaluates the kernel profile at `s = eps * r >= 0`.
///
/// The formulas:
/// - Gaussian: `exp(-s^2)`
/// - IMQ: `(1 + s^2)^(-1/2)`
/// - Matérn C²: `exp(-s) (1 + s)`
/// - Matérn C⁴: `exp(-s) (3 + 3s + s^2)`
/// - Wendland C²: `(1 - s)_+^4 (4s + 1)`
/// - Wendland C⁴: `(1 - s)_+^6 (35 s^2 + 18 s + 3)`
///
/// `s = +inf` is treated as the limit and yields 0. Underflowing values flush
/// to exactly 0 by ordinary IEEE arithmetic; there is no clipping. Panics on
/// negative or NaN `s`.
#[inline]
pub fn kernel_eval(kind: KernelKind, s: f64) -> f64 {
    assert!(s >= 0.0, "kernel argument must be nonnegative, got {s}");
    // exp(-746) is 0.0 in f64; skipping the call below that point keeps the
    // delta-limit assemblies and evaluations cheap.
    const EXP_UNDERFLOW: f64 = 746.0;
    match kind {
        KernelKind::Gaussian => {
            let s2 = s * s;
            if s2 >= EXP_UNDERFLOW {
                0.0
            } else {
                (-s2).exp()
            }
        }
        KernelKind::InverseMultiquadric => 1.0 / (1.0 + s * s).sqrt(),
        KernelKind::Matern2 => {
            if s >= EXP_UNDERFLOW {
                return 0.0;
            }
            (-s).exp() * (1.0 + s)
        }
        KernelKind::Matern4 => {
            if s >= EXP_UNDERFLOW {
                return 0.0;
            }
            (-s).exp() * (3.0 + 3.0 * s + s * s)
        }
        KernelKind::Wendland2 => {
            if s >= 1.0 {
                0.0
            } else {
                let t = cutoff_plus(1.0 - s);
                let t2 = t * t;
                t2 * t2 * (4.0 * s + 1.0)
            }
        }
        KernelKind::Wendland4 => {
            if s >= 1.0 {
                0.0
            } else {
                let t = cutoff_plus(1.0 - s);
                let t3 = t * t * t;
                t3 * t3 * (35.0 * s * s + 18.0 * s + 3.0)
            }
        }
    }
}

/// Evaluates `phi(eps * r)` for a center at distance `r`.
///
/// When `eps * r` overflows the result is the delta limit: 0 for `r > 0` and
/// `value_at_zero` at `r = 0`. Panics on `eps <= 0` or negative `r`.
#[inline]
pub fn kernel_at(spec: &KernelSpec, eps: f64, r: f64) -> f64 {
    assert!(eps > 0.0, "shape parameter must be positive, got {eps}");
    assert!(r >= 0.0, "distance must be nonnegative, got {r}");
    if r == 0.0 {
        return spec.value_at_zero;
    }
    kernel_eval(spec.kind, eps * r)
}
