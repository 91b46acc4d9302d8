//! Assembly and solution of the interpolation systems, and evaluation of the
//! fitted interpolants.
//!
//! The classical system has entries `φ(ε ‖xᵢ − xⱼ‖)`. In the data-dependent
//! system every basis function carries the shape of its own center, so entry
//! `(i, j)` is `φ(ε̃ⱼ ‖xᵢ − xⱼ‖)`: a flagged center turns column `j` into a
//! delta column (zero off the diagonal, `φ(0)` on it) and the matrix is in
//! general no longer symmetric. The evaluated data-dependent interpolant
//! additionally multiplies each term by its retention flag, which removes the
//! spike ("nail") each localized kernel would otherwise leave behind.

use crate::adaptation::{adapt_all, AdaptationParams, AdaptedShapes};
use crate::error::{Error, Result};
use crate::geometry::NodeSet;
use crate::kernels::{kernel_at, KernelKind, KernelSpec};
use crate::linalg::{
    block_partition, block_solve, condition_number_with_lu, ConditionReport, DenseMatrix, NormKind,
};
use crate::smoothness::SmoothnessField;
use rayon::prelude::*;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMode {
    Classical,
    DataDependent,
}

/// A fitted RBF interpolant.
#[derive(Debug, Clone)]
pub struct RbfModel {
    pub kernel: KernelSpec,
    pub centers: NodeSet,
    pub coefficients: Vec<f64>,
    pub shapes: AdaptedShapes,
    pub mode: FitMode,
}

/// Classical interpolation matrix `Aᵢⱼ = φ(ε ‖xᵢ − xⱼ‖)`; symmetric with
/// `φ(0)` on the diagonal.
pub fn assemble_classical(centers: &NodeSet, spec: &KernelSpec, eps: f64) -> Result<DenseMatrix> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "shape parameter must be positive, got {eps}"
        )));
    }
    let n = centers.len();
    let spec = *spec;
    Ok(DenseMatrix::from_fn_par(n, n, |i, j| {
        kernel_at(&spec, eps, centers.distance(i, j))
    }))
}

/// Data-dependent matrix with entry `(i, j) = φ(ε̃ⱼ ‖xᵢ − xⱼ‖)`; the shape
/// belongs to the column's center.
pub fn assemble_dd(
    centers: &NodeSet,
    spec: &KernelSpec,
    shapes: &AdaptedShapes,
) -> Result<DenseMatrix> {
    let n = centers.len();
    if shapes.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: shapes.len(),
        });
    }
    let spec = *spec;
    let eps_tilde = shapes.eps_tilde.clone();
    Ok(DenseMatrix::from_fn_par(n, n, |i, j| {
        kernel_at(&spec, eps_tilde[j], centers.distance(i, j))
    }))
}

/// Fits coefficients. `field: None` fits the classical model at `params.eps`;
/// `field: Some(..)` fits the data-dependent model with shapes adapted from
/// the indicator values. `use_block` routes the data-dependent solve through
/// the smooth/flagged block decoupling instead of one full factorization.
pub fn fit(
    centers: &NodeSet,
    samples: &[f64],
    kind: KernelKind,
    params: &AdaptationParams,
    field: Option<&SmoothnessField>,
    use_block: bool,
) -> Result<RbfModel> {
    Ok(fit_with_condition(centers, samples, kind, params, field, use_block, None)?.0)
}

/// As [`fit`], optionally reporting the condition number of the system
/// matrix in the requested norm. The full-matrix solve shares one LU
/// factorization between the solve and the 2-norm condition estimate.
pub fn fit_with_condition(
    centers: &NodeSet,
    samples: &[f64],
    kind: KernelKind,
    params: &AdaptationParams,
    field: Option<&SmoothnessField>,
    use_block: bool,
    cond_norm: Option<NormKind>,
) -> Result<(RbfModel, Option<ConditionReport>)> {
    let n = centers.len();
    if samples.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: samples.len(),
        });
    }
    let spec = KernelSpec::new(kind);
    let (shapes, mode) = match field {
        None => (AdaptedShapes::classical(params.eps, n), FitMode::Classical),
        Some(f) => {
            if f.values.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: f.values.len(),
                });
            }
            (adapt_all(f, params), FitMode::DataDependent)
        }
    };
    let matrix = match mode {
        FitMode::Classical => assemble_classical(centers, &spec, params.eps)?,
        FitMode::DataDependent => assemble_dd(centers, &spec, &shapes)?,
    };

    let (coefficients, cond) = if use_block {
        let partition = block_partition(&shapes.psi_flags)?;
        let s = partition.smooth_idx.len();
        let a_tilde = DenseMatrix::from_fn(s, s, |a, b| {
            matrix.get(partition.smooth_idx[a], partition.smooth_idx[b])
        });
        let c_block = DenseMatrix::from_fn(partition.flagged_idx.len(), s, |a, b| {
            matrix.get(partition.flagged_idx[a], partition.smooth_idx[b])
        });
        let z: Vec<f64> = partition.smooth_idx.iter().map(|&i| samples[i]).collect();
        let z_flagged: Vec<f64> = partition.flagged_idx.iter().map(|&i| samples[i]).collect();
        let (u, u_prime) = block_solve(&a_tilde, &c_block, &z, &z_flagged)?;
        // The flagged diagonal block is φ(0)·I, not I, so the decoupled
        // second-row result is rescaled by the kernel's center value.
        let mut lambda = vec![0.0; n];
        for (&i, &v) in partition.smooth_idx.iter().zip(&u) {
            lambda[i] = v;
        }
        for (&i, &v) in partition.flagged_idx.iter().zip(&u_prime) {
            lambda[i] = v / spec.value_at_zero;
        }
        let cond = match cond_norm {
            Some(norm) => Some(crate::linalg::condition_number(&matrix, norm)?),
            None => None,
        };
        (lambda, cond)
    } else {
        let lu = matrix.lu()?;
        let lambda = lu.solve(samples);
        let cond = match cond_norm {
            Some(norm) => Some(condition_number_with_lu(&matrix, &lu, norm)?),
            None => None,
        };
        (lambda, cond)
    };

    Ok((
        RbfModel {
            kernel: spec,
            centers: centers.clone(),
            coefficients,
            shapes,
            mode,
        },
        cond,
    ))
}

impl RbfModel {
    /// Evaluates the interpolant at each point. Data-dependent models
    /// multiply every term by its retention flag, so flagged (delta) kernels
    /// contribute nothing anywhere.
    pub fn evaluate(&self, points: &NodeSet) -> Result<Vec<f64>> {
        if points.dim() != self.centers.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.centers.dim(),
                got: points.dim(),
            });
        }
        let eval_one = |p: &[f64]| -> f64 {
            let mut acc = 0.0;
            for (i, c) in self.centers.points().enumerate() {
                if self.shapes.psi_flags[i] == 0 {
                    continue;
                }
                let r = match p.len() {
                    1 => (p[0] - c[0]).abs(),
                    _ => {
                        let dx = p[0] - c[0];
                        let dy = p[1] - c[1];
                        (dx * dx + dy * dy).sqrt()
                    }
                };
                acc += self.coefficients[i] * kernel_at(&self.kernel, self.shapes.eps_tilde[i], r);
            }
            acc
        };
        let pts: Vec<&[f64]> = points.points().collect();
        if pts.len() * self.centers.len() >= 1 << 16 {
            Ok(pts.par_iter().map(|p| eval_one(p)).collect())
        } else {
            Ok(pts.iter().map(|p| eval_one(p)).collect())
        }
    }

    /// CSV export: center coordinates, coefficient, adapted shape, flag.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("# coords...,lambda,eps_tilde,psi\n");
        for (i, p) in self.centers.points().enumerate() {
            let coords: Vec<String> = p.iter().map(|c| format!("{c}")).collect();
            let _ = writeln!(
                out,
                "{},{},{},{}",
                coords.join(","),
                self.coefficients[i],
                self.shapes.eps_tilde[i],
                self.shapes.psi_flags[i]
            );
        }
        out
    }
}
