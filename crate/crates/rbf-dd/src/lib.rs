//! Data-dependent radial basis function interpolation.
//!
//! Classical RBF interpolation of data with jump discontinuities suffers from
//! Gibbs-type oscillations around the jumps. This crate implements a
//! data-dependent variant that detects non-smooth nodes with per-node
//! smoothness indicators, drives the shape parameter of their kernels toward
//! infinity (collapsing them into discrete deltas), and drops the collapsed
//! terms from the evaluated interpolant. Away from the jumps the method is
//! identical to the classical one; near them the oscillations are removed at
//! the price of a mild local smearing.
//!
//! Modules:
//! - [`geometry`]: node sets (uniform grids, Halton sequences), evaluation
//!   points, nearest-neighbor stencils, CSV import/export;
//! - [`kernels`]: the six kernels (Gaussian, inverse multiquadric, Matérn
//!   C²/C⁴, Wendland C²/C⁴) and their metadata;
//! - [`smoothness`]: undivided-difference indicators on grids and MLS
//!   Laplacian indicators on scattered data;
//! - [`adaptation`]: indicator-driven shape parameters and retention flags;
//! - [`linalg`]: dense LU, condition numbers, the smooth/flagged block
//!   partition and its decoupled solve;
//! - [`interpolator`]: system assembly, fitting, evaluation;
//! - [`harness`]: experiment runners behind the `rbf-dd` CLI.
//!
//! ```
//! use rbf_dd::prelude::*;
//!
//! // fit the piecewise-smooth sine on 32 uniform nodes
//! let nodes = uniform_grid(1, &[0.0], &[1.0], &[32])?;
//! let h = nodes.max_consecutive_spacing()?;
//! let samples: Vec<f64> = nodes.points().map(|p| (JUMP_SINE.eval)(p)).collect();
//! let field = indicator_uniform_1d(&samples, h)?;
//! let params = AdaptationParams::new(0.5 / h)?;
//! let model = fit(&nodes, &samples, KernelKind::Gaussian, &params, Some(&field), false)?;
//! assert_eq!(model.shapes.smooth_count, 30); // two nodes straddle the jump
//! # Ok::<(), rbf_dd::Error>(())
//! ```

// `!(x > 0.0)` is used throughout to validate parameters: unlike `x <= 0.0`
// it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adaptation;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod interpolator;
pub mod kernels;
pub mod linalg;
pub mod smoothness;

pub use error::{Error, Result};

/// The common imports.
pub mod prelude {
    pub use crate::adaptation::{adapt_all, adapted_shape, psi, AdaptationParams, AdaptedShapes};
    pub use crate::error::{Error, Result};
    pub use crate::geometry::{
        eval_points_between, halton_points, nearest_neighbors, radical_inverse, uniform_grid,
        HaltonConfig, NodeKind, NodeSet, SpacingMode, StencilInfo,
    };
    pub use crate::harness::{
        default_eps_factor, franke, max_error, overshoot_outside_range, parse_kernel_list,
        parse_level_range, run_jump_1d, run_jump_2d, run_smooth_table, Experiment,
        ExperimentConfig, PointKind, FRANKE, FRANKE_JUMP, JUMP_SINE, SMOOTH_SINE,
    };
    pub use crate::interpolator::{
        assemble_classical, assemble_dd, fit, fit_with_condition, FitMode, RbfModel,
    };
    pub use crate::kernels::{
        cutoff_plus, kernel_at, kernel_eval, KernelKind, KernelSpec, ALL_KERNELS,
    };
    pub use crate::linalg::{
        block_partition, block_solve, condition_bound_inf, condition_number, lu_solve,
        BlockPartition, ConditionReport, DenseMatrix, NormKind,
    };
    pub use crate::smoothness::{
        indicator_scattered, indicator_uniform_1d, indicator_uniform_2d, mls_laplacian_weights,
        IndicatorSource, LaplacianWeights, MlsConfig, SmoothnessField,
    };
}
