//! Per-node smoothness indicators: squared undivided differences on uniform
//! grids, and moving-least-squares Laplacian stencils on scattered data.
//!
//! The indicators are O(h⁴) where the data is smooth and O(1) where a jump
//! crosses the stencil, which is what the shape-parameter adaptation keys on.

use crate::error::{Error, Result};
use crate::geometry::{nearest_neighbors, NodeSet, StencilInfo};
use crate::linalg::DenseMatrix;
use rayon::prelude::*;

/// Configuration of the moving-least-squares Laplacian stencils.
///
/// The polynomial degree is fixed at 2; the basis has dimension 3 in 1D and
/// 6 in 2D. `rcond_trigger` is the reciprocal-condition threshold (1-norm)
/// below which the normal equations receive a Tikhonov term of size
/// `tikhonov_scale * max(diag)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlsConfig {
    pub degree: usize,
    pub stencil_size: usize,
    pub rcond_trigger: f64,
    pub tikhonov_scale: f64,
}

impl MlsConfig {
    /// Three-point stencils in 1D.
    pub fn default_1d() -> Self {
        MlsConfig {
            degree: 2,
            stencil_size: 3,
            rcond_trigger: 1e-10,
            tikhonov_scale: 1e-10,
        }
    }

    /// Five-point stencils in 2D.
    pub fn default_2d() -> Self {
        MlsConfig {
            degree: 2,
            stencil_size: 5,
            rcond_trigger: 1e-10,
            tikhonov_scale: 1e-10,
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if self.degree != 2 {
            return Err(Error::InvalidArgument(format!(
                "only degree 2 is supported, got {}",
                self.degree
            )));
        }
        if !(self.rcond_trigger > 0.0) {
            return Err(Error::InvalidArgument(
                "rcond_trigger must be positive".into(),
            ));
        }
        let m = basis_dim(dim);
        if self.stencil_size > m {
            return Err(Error::InvalidArgument(format!(
                "stencil size {} exceeds the basis dimension {m}",
                self.stencil_size
            )));
        }
        if self.stencil_size < 2 {
            return Err(Error::InvalidArgument("stencil size must be >= 2".into()));
        }
        Ok(())
    }
}

fn basis_dim(dim: usize) -> usize {
    if dim == 1 {
        3
    } else {
        6
    }
}

/// Stencil weights approximating the Laplacian at the stencil center.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianWeights {
    pub stencil: StencilInfo,
    /// One weight per stencil node, in `stencil.neighbors` order.
    pub weights: Vec<f64>,
    pub regularized: bool,
}

/// Which construction produced an indicator field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndicatorSource {
    Uniform1d,
    Uniform2d,
    Mls,
}

/// Nonnegative per-node indicator values with the stencils that produced
/// them.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothnessField {
    pub values: Vec<f64>,
    pub stencils: Vec<StencilInfo>,
    pub source: IndicatorSource,
}

impl SmoothnessField {
    /// CSV export: node index, coordinates, indicator value.
    pub fn to_csv(&self, nodes: &NodeSet) -> String {
        let mut out = String::from("# index,coords...,indicator\n");
        for (i, v) in self.values.iter().enumerate() {
            let coords: Vec<String> = nodes.point(i).iter().map(|c| format!("{c}")).collect();
            out.push_str(&format!("{i},{},{v}\n", coords.join(",")));
        }
        out
    }
}

/// Squared undivided second difference on a uniform 1D grid. Boundary nodes
/// copy the value (and stencil) of the nearest interior node.
pub fn indicator_uniform_1d(samples: &[f64], spacing: f64) -> Result<SmoothnessField> {
    let n = samples.len();
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 samples, got {n}"
        )));
    }
    if !(spacing > 0.0) {
        return Err(Error::InvalidArgument("spacing must be positive".into()));
    }
    let mut values = Vec::with_capacity(n);
    let mut stencils = Vec::with_capacity(n);
    for i in 0..n {
        let c = i.clamp(1, n - 2);
        let beta = samples[c + 1] - 2.0 * samples[c] + samples[c - 1];
        values.push(beta * beta);
        stencils.push(StencilInfo {
            center: c,
            neighbors: vec![c, c - 1, c + 1],
            h_loc: spacing,
        });
    }
    Ok(SmoothnessField {
        values,
        stencils,
        source: IndicatorSource::Uniform1d,
    })
}

/// Squared five-point Laplacian stencil on a uniform 2D grid stored
/// axis-0-major (`index = i0 * n1 + i1`). Boundary nodes copy the nearest
/// interior value.
pub fn indicator_uniform_2d(
    samples: &[f64],
    n0: usize,
    n1: usize,
    spacing: f64,
) -> Result<SmoothnessField> {
    if n0 < 3 || n1 < 3 {
        return Err(Error::InvalidArgument(format!(
            "grid must be at least 3x3, got {n0}x{n1}"
        )));
    }
    if samples.len() != n0 * n1 {
        return Err(Error::DimensionMismatch {
            expected: n0 * n1,
            got: samples.len(),
        });
    }
    if !(spacing > 0.0) {
        return Err(Error::InvalidArgument("spacing must be positive".into()));
    }
    let at = |i0: usize, i1: usize| samples[i0 * n1 + i1];
    let mut values = Vec::with_capacity(n0 * n1);
    let mut stencils = Vec::with_capacity(n0 * n1);
    for i0 in 0..n0 {
        for i1 in 0..n1 {
            let c0 = i0.clamp(1, n0 - 2);
            let c1 = i1.clamp(1, n1 - 2);
            let beta = at(c0 + 1, c1) + at(c0 - 1, c1) + at(c0, c1 + 1) + at(c0, c1 - 1)
                - 4.0 * at(c0, c1);
            values.push(beta * beta);
            let c = c0 * n1 + c1;
            stencils.push(StencilInfo {
                center: c,
                neighbors: vec![c, c - n1, c + n1, c - 1, c + 1],
                h_loc: spacing,
            });
        }
    }
    Ok(SmoothnessField {
        values,
        stencils,
        source: IndicatorSource::Uniform2d,
    })
}

/// Monomial basis values about `center`, one row per basis function:
/// `{1, x-x0, (x-x0)^2}` in 1D and
/// `{1, x-x0, y-y0, (x-x0)^2, (x-x0)(y-y0), (y-y0)^2}` in 2D.
fn vandermonde(nodes: &NodeSet, stencil: &StencilInfo) -> DenseMatrix {
    let dim = nodes.dim();
    let m = basis_dim(dim);
    let k = stencil.neighbors.len();
    let x0 = nodes.point(stencil.center).to_vec();
    let mut v = DenseMatrix::zeros(m, k);
    for (j, &node) in stencil.neighbors.iter().enumerate() {
        let p = nodes.point(node);
        let dx = p[0] - x0[0];
        if dim == 1 {
            v.set(0, j, 1.0);
            v.set(1, j, dx);
            v.set(2, j, dx * dx);
        } else {
            let dy = p[1] - x0[1];
            v.set(0, j, 1.0);
            v.set(1, j, dx);
            v.set(2, j, dy);
            v.set(3, j, dx * dx);
            v.set(4, j, dx * dy);
            v.set(5, j, dy * dy);
        }
    }
    v
}

/// Laplacian of each basis monomial at the center: `(0, 0, 2)` in 1D and
/// `(0, 0, 0, 2, 0, 2)` in 2D.
fn laplacian_rhs(dim: usize) -> Vec<f64> {
    if dim == 1 {
        vec![0.0, 0.0, 2.0]
    } else {
        vec![0.0, 0.0, 0.0, 2.0, 0.0, 2.0]
    }
}

/// 1-norm reciprocal condition estimate; 0 when the factorization fails.
fn rcond_one(g: &DenseMatrix) -> f64 {
    match g.lu() {
        Ok(lu) => 1.0 / (g.norm_one() * lu.inverse().norm_one()),
        Err(_) => 0.0,
    }
}

/// Weights `w` with `Σ wⱼ p(xⱼ) = Δp(x₀)` for all quadratic monomials,
/// from the normal equations `VᵀV w = Vᵀb`, Tikhonov-regularized when the
/// reciprocal condition falls below the trigger.
///
/// A geometrically degenerate stencil (e.g. 2D points on one line) makes
/// `VᵀV` exactly singular; the ridge still yields finite weights, marked
/// `regularized`, whose unmet moment conditions surface as a distorted
/// indicator at that node. The hard error is reserved for the case where
/// even the regularized system fails to factorize.
pub fn mls_laplacian_weights(
    stencil: &StencilInfo,
    nodes: &NodeSet,
    config: &MlsConfig,
) -> Result<LaplacianWeights> {
    let dim = nodes.dim();
    config.validate(dim)?;
    let k = stencil.neighbors.len();
    let m = basis_dim(dim);
    if k > m {
        return Err(Error::InvalidArgument(format!(
            "stencil of {k} nodes exceeds basis dimension {m}"
        )));
    }

    let v = vandermonde(nodes, stencil);
    let b = laplacian_rhs(dim);
    let mut g = gram(&v);
    let rhs = v.tr_mul_vec(&b);
    let mut regularized = false;
    if rcond_one(&g) < config.rcond_trigger {
        let max_diag = (0..k).map(|i| g.get(i, i)).fold(0.0, f64::max);
        let lambda = config.tikhonov_scale * max_diag;
        for i in 0..k {
            g.set(i, i, g.get(i, i) + lambda);
        }
        regularized = true;
    }
    let weights = match g.lu() {
        Ok(lu) => lu.solve(&rhs),
        Err(_) => {
            return Err(Error::DegenerateStencil {
                node: stencil.center,
            })
        }
    };
    Ok(LaplacianWeights {
        stencil: stencil.clone(),
        weights,
        regularized,
    })
}

/// `VᵀV` for an `m x k` basis matrix.
fn gram(v: &DenseMatrix) -> DenseMatrix {
    let k = v.cols();
    let m = v.rows();
    DenseMatrix::from_fn(k, k, |i, j| (0..m).map(|l| v.get(l, i) * v.get(l, j)).sum())
}

/// Scattered-data indicator `Iᵢ = h_locᵢ⁴ (Σⱼ wⱼ u(xⱼ))²` with K-nearest
/// stencils and MLS Laplacian weights. Nodes are processed independently and
/// in parallel.
pub fn indicator_scattered(
    samples: &[f64],
    nodes: &NodeSet,
    config: &MlsConfig,
) -> Result<SmoothnessField> {
    let n = nodes.len();
    if samples.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: samples.len(),
        });
    }
    config.validate(nodes.dim())?;
    let per_node: Vec<Result<(f64, StencilInfo)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let stencil = nearest_neighbors(nodes, i, config.stencil_size)?;
            let lw = mls_laplacian_weights(&stencil, nodes, config)?;
            let lap: f64 = lw
                .weights
                .iter()
                .zip(&stencil.neighbors)
                .map(|(&w, &j)| w * samples[j])
                .sum();
            let h4 = stencil.h_loc.powi(4);
            Ok((h4 * lap * lap, stencil))
        })
        .collect();
    let mut values = Vec::with_capacity(n);
    let mut stencils = Vec::with_capacity(n);
    for r in per_node {
        let (v, s) = r?;
        values.push(v);
        stencils.push(s);
    }
    Ok(SmoothnessField {
        values,
        stencils,
        source: IndicatorSource::Mls,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{uniform_grid, NodeKind};
    use proptest::prelude::*;

    #[test]
    fn second_difference_annihilates_linears() {
        let xs: Vec<f64> = (0..9).map(|i| i as f64 * 0.125).collect();
        let f = indicator_uniform_1d(&xs, 0.125).unwrap();
        assert!(f.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn unit_step_and_spike_1d() {
        let f = indicator_uniform_1d(&[0.0, 0.0, 1.0], 1.0).unwrap();
        assert_eq!(f.values, vec![1.0, 1.0, 1.0]); // boundary copies interior

        let f = indicator_uniform_1d(&[1.0, 2.0, 1.0], 1.0).unwrap();
        assert_eq!(f.values[1], 4.0);
    }

    #[test]
    fn affine_2d_gives_zero() {
        let (n0, n1) = (5, 4);
        let mut samples = Vec::new();
        for i0 in 0..n0 {
            for i1 in 0..n1 {
                samples.push(3.0 + i0 as f64 * 0.5 - 2.0 * i1 as f64 * 0.5);
            }
        }
        let f = indicator_uniform_2d(&samples, n0, n1, 0.5).unwrap();
        assert!(f.values.iter().all(|&v| v.abs() < 1e-24));
    }

    #[test]
    fn spike_and_quadratic_2d() {
        let mut samples = vec![0.0; 9];
        samples[4] = 1.0; // center of a 3x3 grid
        let f = indicator_uniform_2d(&samples, 3, 3, 1.0).unwrap();
        assert_eq!(f.values[4], 16.0);

        // f(x, y) = x^2 sampled with h = 0.5: interior beta = 2 h^2 = 0.5,
        // squared 0.25
        let h = 0.5;
        let mut samples = Vec::new();
        for i0 in 0..5 {
            for i1 in 0..5 {
                let x = i0 as f64 * h;
                let _ = i1;
                samples.push(x * x);
            }
        }
        let f = indicator_uniform_2d(&samples, 5, 5, h).unwrap();
        let center = 2 * 5 + 2;
        assert!((f.values[center] - 0.25).abs() < 1e-14);
    }

    #[test]
    fn rejects_undersized_input() {
        assert!(indicator_uniform_1d(&[1.0, 2.0], 1.0).is_err());
        assert!(indicator_uniform_2d(&[0.0; 6], 2, 3, 1.0).is_err());
    }

    #[test]
    fn field_csv_lists_index_coords_value() {
        let nodes = NodeSet::new(1, vec![0.0, 0.5, 1.0], NodeKind::Custom).unwrap();
        let field = indicator_uniform_1d(&[0.0, 0.0, 1.0], 0.5).unwrap();
        let csv = field.to_csv(&nodes);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# index,coords...,indicator");
        assert_eq!(lines[1], "0,0,1");
        assert_eq!(lines[2], "1,0.5,1");
        assert_eq!(lines[3], "2,1,1");
    }

    #[test]
    fn uniform_stencil_recovers_divided_laplacian() {
        // spacings below ~0.1 leave fewer than 10 accurate digits: the
        // normal equations square the h^-2 scale spread of the basis
        for h in [0.1_f64, 0.25, 0.7, 1.9] {
            let nodes = NodeSet::new(1, vec![-h, 0.0, h], NodeKind::Custom).unwrap();
            let stencil = nearest_neighbors(&nodes, 1, 3).unwrap();
            let lw = mls_laplacian_weights(&stencil, &nodes, &MlsConfig::default_1d()).unwrap();
            assert!(!lw.regularized);
            let expect = 1.0 / (h * h);
            // neighbors ordered center-first
            assert!((lw.weights[0] + 2.0 * expect).abs() < 1e-10 * expect);
            assert!((lw.weights[1] - expect).abs() < 1e-10 * expect);
            assert!((lw.weights[2] - expect).abs() < 1e-10 * expect);
        }
    }

    #[test]
    fn cross_stencil_recovers_five_point_laplacian() {
        for h in [0.05_f64, 0.25, 1.5] {
            let grid = uniform_grid(2, &[0.0, 0.0], &[4.0 * h, 4.0 * h], &[5, 5]).unwrap();
            let center = 2 * 5 + 2;
            let stencil = nearest_neighbors(&grid, center, 5).unwrap();
            let lw = mls_laplacian_weights(&stencil, &grid, &MlsConfig::default_2d()).unwrap();
            assert!(!lw.regularized);
            let expect = 1.0 / (h * h);
            assert!((lw.weights[0] + 4.0 * expect).abs() < 1e-10 * expect);
            for w in &lw.weights[1..] {
                assert!((w - expect).abs() < 1e-10 * expect);
            }
        }
    }

    #[test]
    fn non_uniform_stencil_weights() {
        // exact 3x3 moment solve for nodes {0, 0.1, 0.3} about 0.1:
        // w = (200/3, -100, 100/3) in node order.
        let nodes = NodeSet::new(1, vec![0.0, 0.1, 0.3], NodeKind::Custom).unwrap();
        let stencil = nearest_neighbors(&nodes, 1, 3).unwrap();
        assert_eq!(stencil.neighbors, vec![1, 0, 2]);
        let lw = mls_laplacian_weights(&stencil, &nodes, &MlsConfig::default_1d()).unwrap();
        let expect = [-100.0, 200.0 / 3.0, 100.0 / 3.0];
        for (got, want) in lw.weights.iter().zip(expect) {
            assert!((got - want).abs() < 1e-8, "{got} vs {want}");
        }
    }

    #[test]
    fn collinear_2d_stencil_regularizes_with_unmet_moments() {
        let coords = vec![0.0, 0.0, 0.1, 0.0, 0.2, 0.0, 0.3, 0.0, 0.4, 0.0];
        let nodes = NodeSet::new(2, coords, NodeKind::Custom).unwrap();
        let stencil = nearest_neighbors(&nodes, 0, 5).unwrap();
        let lw = mls_laplacian_weights(&stencil, &nodes, &MlsConfig::default_2d()).unwrap();
        assert!(lw.regularized);
        assert!(lw.weights.iter().all(|w| w.is_finite()));
        // no weights on a line can reproduce the (y-y0)^2 moment of 2
        let y_moment: f64 = lw
            .weights
            .iter()
            .zip(&stencil.neighbors)
            .map(|(&w, &j)| w * nodes.point(j)[1] * nodes.point(j)[1])
            .sum();
        assert!((y_moment - 2.0).abs() > 1.9);
    }

    #[test]
    fn scattered_constant_data_gives_zero() {
        let cfg = crate::geometry::HaltonConfig::default_for_dim(2).unwrap();
        let nodes = crate::geometry::halton_points(&cfg, 30).unwrap();
        let samples = vec![7.5; 30];
        let f = indicator_scattered(&samples, &nodes, &MlsConfig::default_2d()).unwrap();
        for v in f.values {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn scattered_matches_uniform_1d_interior() {
        let n = 21;
        let h = 1.0 / (n as f64 - 1.0);
        let grid = uniform_grid(1, &[0.0], &[1.0], &[n]).unwrap();
        let samples: Vec<f64> = grid
            .coords()
            .iter()
            .map(|&x| (2.1 * x).sin() + x * x)
            .collect();
        let on_grid = indicator_uniform_1d(&samples, h).unwrap();
        let scattered = indicator_scattered(&samples, &grid, &MlsConfig::default_1d()).unwrap();
        for i in 1..n - 1 {
            let (a, b) = (on_grid.values[i], scattered.values[i]);
            assert!(
                (a - b).abs() <= 1e-10 * a.abs().max(1e-300),
                "node {i}: {a} vs {b}"
            );
        }
    }

    #[test]
    fn scattered_matches_uniform_2d_interior() {
        let n = 9;
        let h = 1.0 / (n as f64 - 1.0);
        let grid = uniform_grid(2, &[0.0, 0.0], &[1.0, 1.0], &[n, n]).unwrap();
        let samples: Vec<f64> = grid
            .points()
            .map(|p| (3.0 * p[0]).sin() * (2.0 * p[1]).cos())
            .collect();
        let on_grid = indicator_uniform_2d(&samples, n, n, h).unwrap();
        let scattered = indicator_scattered(&samples, &grid, &MlsConfig::default_2d()).unwrap();
        for i0 in 1..n - 1 {
            for i1 in 1..n - 1 {
                let i = i0 * n + i1;
                let (a, b) = (on_grid.values[i], scattered.values[i]);
                assert!(
                    (a - b).abs() <= 1e-10 * a.abs().max(1e-300),
                    "node {i}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn quadratic_on_grid_gives_four_h4() {
        let n = 11;
        let h = 1.0 / (n as f64 - 1.0);
        let grid = uniform_grid(1, &[0.0], &[1.0], &[n]).unwrap();
        let samples: Vec<f64> = grid.coords().iter().map(|&x| x * x).collect();
        let f = indicator_scattered(&samples, &grid, &MlsConfig::default_1d()).unwrap();
        let expect = 4.0 * h.powi(4);
        for i in 1..n - 1 {
            assert!((f.values[i] - expect).abs() < 1e-10 * expect);
        }
    }

    proptest! {
        #[test]
        fn moment_conditions_hold_without_regularization(seed in 0u64..200) {
            // jittered 1D stencil
            let j0 = (seed % 7) as f64 * 0.013;
            let j2 = (seed % 5) as f64 * 0.017;
            let nodes = NodeSet::new(
                1, vec![-0.3 - j0, 0.05, 0.4 + j2], NodeKind::Custom,
            ).unwrap();
            let stencil = nearest_neighbors(&nodes, 1, 3).unwrap();
            let lw = mls_laplacian_weights(&stencil, &nodes, &MlsConfig::default_1d()).unwrap();
            prop_assume!(!lw.regularized);
            let x0 = nodes.point(1)[0];
            let wnorm = lw.weights.iter().fold(0.0f64, |acc, w| acc.max(w.abs()));
            let tol = 1e-8 * wnorm / (stencil.h_loc * stencil.h_loc);
            // basis monomials and their Laplacians
            for (p, lap) in [(0usize, 0.0f64), (1, 0.0), (2, 2.0)] {
                let got: f64 = lw.weights.iter().zip(&stencil.neighbors)
                    .map(|(&w, &j)| {
                        let dx = nodes.point(j)[0] - x0;
                        w * dx.powi(p as i32)
                    })
                    .sum();
                prop_assert!((got - lap).abs() <= tol.max(1e-12), "p={p}: {got} vs {lap}");
            }
        }

        #[test]
        fn indicators_are_nonnegative(n in 5usize..40, freq in 0.5f64..8.0) {
            let cfg = crate::geometry::HaltonConfig::default_for_dim(1).unwrap();
            let nodes = crate::geometry::halton_points(&cfg, n).unwrap().sorted_1d().unwrap();
            let samples: Vec<f64> = nodes.coords().iter().map(|&x| (freq * x).sin()).collect();
            let f = indicator_scattered(&samples, &nodes, &MlsConfig::default_1d()).unwrap();
            for v in f.values {
                prop_assert!(v >= 0.0);
            }
        }
    }
}
