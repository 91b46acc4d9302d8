//! Mapping from smoothness indicators to per-node shape parameters.
//!
//! A node keeps its kernel (`ψ = 1`, shape `ε/(c+1)`) when the indicator is
//! small, and has it localized into a discrete delta (`ψ = 0`, shape `ε/c`
//! with `c = 1e-16`) when a discontinuity crosses its stencil. Note that in
//! double precision `c + 1` rounds to exactly 1, so retained kernels keep
//! their shape bit-for-bit.

use crate::error::{Error, Result};
use crate::smoothness::SmoothnessField;

/// Parameters of the shape adaptation `ε̃ = ε / (c + ψ(I))` with
/// `ψ(I) = round(exp(-(C·I)^t))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptationParams {
    /// Base shape parameter ε.
    pub eps: f64,
    /// Guard against division by zero at flagged nodes.
    pub c: f64,
    /// Indicator gain C.
    pub cap_c: f64,
    /// Indicator exponent t.
    pub t: f64,
}

impl AdaptationParams {
    /// Experimental defaults: `c = 1e-16`, `C = 10`, `t = 2`.
    pub fn new(eps: f64) -> Result<Self> {
        Self::with_constants(eps, 1e-16, 10.0, 2.0)
    }

    pub fn with_constants(eps: f64, c: f64, cap_c: f64, t: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "shape parameter must be positive, got {eps}"
            )));
        }
        if !(c > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "c must be positive, got {c}"
            )));
        }
        if !(cap_c > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "C must be positive, got {cap_c}"
            )));
        }
        if !(t >= 1.0) {
            return Err(Error::InvalidArgument(format!("t must be >= 1, got {t}")));
        }
        Ok(AdaptationParams { eps, c, cap_c, t })
    }
}

/// Per-node adapted shapes and retention flags.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptedShapes {
    pub eps_tilde: Vec<f64>,
    pub psi_flags: Vec<u8>,
    pub smooth_count: usize,
}

impl AdaptedShapes {
    /// Shapes of a classical model: uniform `ε̃ = ε`, every flag 1.
    pub fn classical(eps: f64, n: usize) -> Self {
        AdaptedShapes {
            eps_tilde: vec![eps; n],
            psi_flags: vec![1; n],
            smooth_count: n,
        }
    }

    pub fn len(&self) -> usize {
        self.psi_flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi_flags.is_empty()
    }
}

/// Retention flag `round(exp(-(C·I)^t))`, rounding half away from zero.
/// The argument of `round` lies in (0, 1], so the result is 0 or 1.
/// Panics on a negative indicator.
pub fn psi(indicator: f64, params: &AdaptationParams) -> u8 {
    assert!(
        indicator >= 0.0,
        "indicator must be nonnegative, got {indicator}"
    );
    let v = (-(params.cap_c * indicator).powf(params.t)).exp();
    v.round() as u8
}

/// Adapted shape `ε / (c + ψ(I))`.
pub fn adapted_shape(indicator: f64, params: &AdaptationParams) -> f64 {
    params.eps / (params.c + psi(indicator, params) as f64)
}

/// Applies [`psi`] and [`adapted_shape`] to every node of a field.
pub fn adapt_all(field: &SmoothnessField, params: &AdaptationParams) -> AdaptedShapes {
    let psi_flags: Vec<u8> = field.values.iter().map(|&v| psi(v, params)).collect();
    let eps_tilde: Vec<f64> = psi_flags
        .iter()
        .map(|&f| params.eps / (params.c + f as f64))
        .collect();
    let smooth_count = psi_flags.iter().filter(|&&f| f == 1).count();
    AdaptedShapes {
        eps_tilde,
        psi_flags,
        smooth_count,
    }
}
