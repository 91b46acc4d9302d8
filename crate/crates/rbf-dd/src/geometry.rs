//! Node sets (uniform grids, Halton sequences), evaluation point sets,
//! nearest-neighbor stencils and local fill scales.
//!
//! Everything here is brute force on purpose: the experiments run on at most
//! a few thousand nodes, where an O(N²) neighbor search beats the constant
//! factors of any tree structure.

use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

/// Provenance tag of a node set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Uniform,
    Halton,
    Custom,
}

impl NodeKind {
    fn tag(self) -> &'static str {
        match self {
            NodeKind::Uniform => "uniform",
            NodeKind::Halton => "halton",
            NodeKind::Custom => "custom",
        }
    }
}

/// An immutable set of pairwise-distinct points in dimension 1 or 2.
///
/// Coordinates are stored flattened, `dim` values per point.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSet {
    dim: usize,
    coords: Vec<f64>,
    kind: NodeKind,
}

impl NodeSet {
    /// Builds a node set, validating dimension, finiteness and pairwise
    /// distinctness. For `NodeKind::Uniform` in 1D the consecutive spacing
    /// must be constant to a relative 1e-12.
    pub fn new(dim: usize, coords: Vec<f64>, kind: NodeKind) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidNodeSet(format!(
                "dimension must be 1 or 2, got {dim}"
            )));
        }
        if coords.is_empty() || !coords.len().is_multiple_of(dim) {
            return Err(Error::InvalidNodeSet(format!(
                "coordinate count {} is not a positive multiple of dim {dim}",
                coords.len()
            )));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidNodeSet(format!(
                "non-finite coordinate {bad}"
            )));
        }
        let set = NodeSet { dim, coords, kind };
        set.check_distinct()?;
        if kind == NodeKind::Uniform && dim == 1 {
            set.check_uniform_spacing()?;
        }
        Ok(set)
    }

    /// Duplicate detection via a lexicographic sort of point indices; two
    /// points collide only if they are bitwise-equal in every component.
    fn check_distinct(&self) -> Result<()> {
        let n = self.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_unstable_by(|&a, &b| {
            self.point(a)
                .partial_cmp(self.point(b))
                .expect("coordinates are finite")
        });
        for w in order.windows(2) {
            if self.point(w[0]) == self.point(w[1]) {
                let (mut a, mut b) = (w[0], w[1]);
                if a > b {
                    std::mem::swap(&mut a, &mut b);
                }
                return Err(Error::DuplicateNodes {
                    first: a,
                    second: b,
                });
            }
        }
        Ok(())
    }

    fn check_uniform_spacing(&self) -> Result<()> {
        if self.len() < 2 {
            return Ok(());
        }
        let xs = &self.coords;
        let span = xs[self.len() - 1] - xs[0];
        let h = span / (self.len() - 1) as f64;
        for w in xs.windows(2) {
            let gap = w[1] - w[0];
            if (gap - h).abs() > 1e-12 * h.abs().max(1.0) {
                return Err(Error::InvalidNodeSet(format!(
                    "uniform 1d set has non-constant spacing ({gap} vs {h})"
                )));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> NodeKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Euclidean distance between nodes `i` and `j`.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        dist(self.point(i), self.point(j))
    }

    /// Ascending copy of a 1D node set.
    pub fn sorted_1d(&self) -> Result<NodeSet> {
        if self.dim != 1 {
            return Err(Error::InvalidArgument(
                "sorted_1d requires a 1D node set".into(),
            ));
        }
        let mut xs = self.coords.clone();
        xs.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite"));
        Ok(NodeSet {
            dim: 1,
            coords: xs,
            kind: self.kind,
        })
    }

    /// True if a 1D set is strictly ascending.
    pub fn is_sorted_1d(&self) -> bool {
        self.dim == 1 && self.coords.windows(2).all(|w| w[0] < w[1])
    }

    /// Largest consecutive gap of a sorted 1D set. This is the fill scale
    /// used for shape parameters on 1D data.
    pub fn max_consecutive_spacing(&self) -> Result<f64> {
        if self.dim != 1 || !self.is_sorted_1d() || self.len() < 2 {
            return Err(Error::InvalidArgument(
                "max_consecutive_spacing requires a sorted 1D set of at least 2 nodes".into(),
            ));
        }
        Ok(self
            .coords
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max))
    }

    /// Largest nearest-neighbor distance over all nodes; the fill scale used
    /// for shape parameters on scattered 2D data.
    pub fn max_nearest_neighbor_distance(&self) -> Result<f64> {
        let n = self.len();
        if n < 2 {
            return Err(Error::InvalidArgument(
                "need at least 2 nodes for a neighbor distance".into(),
            ));
        }
        let mut worst = 0.0_f64;
        for i in 0..n {
            let mut nearest = f64::INFINITY;
            for j in 0..n {
                if i != j {
                    nearest = nearest.min(self.distance(i, j));
                }
            }
            worst = worst.max(nearest);
        }
        Ok(worst)
    }

    /// Writes the set as CSV: one point per line, `dim` comma-separated
    /// fields, preceded by a `#` header recording dim and kind. Floats are
    /// printed with Rust's shortest round-trip formatting, so reading the
    /// file back reproduces the coordinates bit-exactly.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# dim={} kind={}", self.dim, self.kind.tag());
        for p in self.points() {
            let row: Vec<String> = p.iter().map(|c| format!("{c}")).collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    pub fn to_csv_path(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    /// Parses a CSV node set. Lines starting with `#` are headers; a
    /// `kind=...` key in a header is honored, otherwise the set is `custom`.
    /// The dimension is inferred from the first data row.
    pub fn from_csv_str(text: &str) -> Result<NodeSet> {
        let mut kind = NodeKind::Custom;
        let mut dim: Option<usize> = None;
        let mut coords = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('#') {
                for field in header.split_whitespace() {
                    if let Some(k) = field.strip_prefix("kind=") {
                        kind = match k {
                            "uniform" => NodeKind::Uniform,
                            "halton" => NodeKind::Halton,
                            "custom" => NodeKind::Custom,
                            other => {
                                return Err(Error::Parse(format!(
                                    "line {}: unknown kind {other:?}",
                                    lineno + 1
                                )))
                            }
                        };
                    }
                }
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            let d = *dim.get_or_insert(fields.len());
            if fields.len() != d {
                return Err(Error::Parse(format!(
                    "line {}: expected {d} fields, got {}",
                    lineno + 1,
                    fields.len()
                )));
            }
            for f in fields {
                let v = f64::from_str(f.trim()).map_err(|e| {
                    Error::Parse(format!("line {}: bad float {f:?}: {e}", lineno + 1))
                })?;
                coords.push(v);
            }
        }
        match dim {
            Some(d) => NodeSet::new(d, coords, kind),
            None => Err(Error::Parse("no data rows".into())),
        }
    }

    pub fn from_csv_path(path: &Path) -> Result<NodeSet> {
        let text = std::fs::read_to_string(path)?;
        Self::from_csv_str(&text)
    }
}

#[inline]
fn dist(a: &[f64], b: &[f64]) -> f64 {
    match a.len() {
        1 => (a[0] - b[0]).abs(),
        _ => {
            let dx = a[0] - b[0];
            let dy = a[1] - b[1];
            (dx * dx + dy * dy).sqrt()
        }
    }
}

/// Configuration of a Halton generator: point `k` is the radical-inverse
/// vector at integer index `skip + k * (leap + 1)`, index 0 mapping to the
/// origin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HaltonConfig {
    pub dim: usize,
    pub skip: u64,
    pub leap: u64,
    pub bases: Vec<u64>,
}

impl HaltonConfig {
    pub fn new(dim: usize, skip: u64, leap: u64, bases: Vec<u64>) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidArgument(format!(
                "Halton dimension must be 1 or 2, got {dim}"
            )));
        }
        if bases.len() != dim {
            return Err(Error::InvalidArgument(format!(
                "expected {dim} bases, got {}",
                bases.len()
            )));
        }
        for (i, &b) in bases.iter().enumerate() {
            if !is_prime(b) {
                return Err(Error::InvalidArgument(format!("base {b} is not prime")));
            }
            if bases[..i].contains(&b) {
                return Err(Error::InvalidArgument(format!("repeated base {b}")));
            }
        }
        Ok(HaltonConfig {
            dim,
            skip,
            leap,
            bases,
        })
    }

    /// Base 2 in 1D, bases (2, 3) in 2D; no skip or leap.
    pub fn default_for_dim(dim: usize) -> Result<Self> {
        match dim {
            1 => Self::new(1, 0, 0, vec![2]),
            2 => Self::new(2, 0, 0, vec![2, 3]),
            _ => Err(Error::InvalidArgument(format!(
                "Halton dimension must be 1 or 2, got {dim}"
            ))),
        }
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Van der Corput radical inverse of `index` in the given base.
pub fn radical_inverse(base: u64, mut index: u64) -> f64 {
    debug_assert!(base >= 2);
    let inv_base = 1.0 / base as f64;
    let mut f = inv_base;
    let mut r = 0.0;
    while index > 0 {
        r += f * (index % base) as f64;
        index /= base;
        f *= inv_base;
    }
    r
}

/// Stencil of `k` nodes around a center, with its mean neighbor distance.
#[derive(Debug, Clone, PartialEq)]
pub struct StencilInfo {
    pub center: usize,
    /// Node indices ordered by ascending distance to the center (ties broken
    /// by ascending index); the center itself comes first.
    pub neighbors: Vec<usize>,
    /// Arithmetic mean of the distances from the center to the other
    /// stencil nodes.
    pub h_loc: f64,
}

/// Tensor-product equispaced nodes including both endpoints on every axis.
pub fn uniform_grid(dim: usize, lower: &[f64], upper: &[f64], counts: &[usize]) -> Result<NodeSet> {
    if dim != 1 && dim != 2 {
        return Err(Error::InvalidArgument(format!(
            "grid dimension must be 1 or 2, got {dim}"
        )));
    }
    if lower.len() != dim || upper.len() != dim || counts.len() != dim {
        return Err(Error::InvalidArgument(
            "lower, upper and counts must all have `dim` entries".into(),
        ));
    }
    for axis in 0..dim {
        if counts[axis] < 2 {
            return Err(Error::InvalidArgument(format!(
                "axis {axis} needs at least 2 points, got {}",
                counts[axis]
            )));
        }
        if !(lower[axis] < upper[axis]) {
            return Err(Error::InvalidArgument(format!(
                "degenerate interval [{}, {}] on axis {axis}",
                lower[axis], upper[axis]
            )));
        }
    }
    let axis_points = |axis: usize| -> Vec<f64> {
        let n = counts[axis];
        let h = (upper[axis] - lower[axis]) / (n - 1) as f64;
        (0..n)
            .map(|i| {
                if i == n - 1 {
                    upper[axis]
                } else {
                    lower[axis] + i as f64 * h
                }
            })
            .collect()
    };
    let coords = match dim {
        1 => axis_points(0),
        _ => {
            let xs = axis_points(0);
            let ys = axis_points(1);
            let mut c = Vec::with_capacity(2 * xs.len() * ys.len());
            for &x in &xs {
                for &y in &ys {
                    c.push(x);
                    c.push(y);
                }
            }
            c
        }
    };
    NodeSet::new(dim, coords, NodeKind::Uniform)
}

/// The first `n` points of a leaped, skipped Halton sequence, in sequence
/// order. Sort with [`NodeSet::sorted_1d`] where an ascending view is needed.
pub fn halton_points(config: &HaltonConfig, n: usize) -> Result<NodeSet> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one point".into()));
    }
    let mut coords = Vec::with_capacity(n * config.dim);
    for k in 0..n as u64 {
        let index = config.skip + k * (config.leap + 1);
        for &base in &config.bases {
            coords.push(radical_inverse(base, index));
        }
    }
    NodeSet::new(config.dim, coords, NodeKind::Halton)
}

/// The `k` nodes closest to `nodes[center]` in Euclidean distance, center
/// included. Requires `2 <= k <= N` so the mean neighbor distance is
/// positive.
pub fn nearest_neighbors(nodes: &NodeSet, center: usize, k: usize) -> Result<StencilInfo> {
    let n = nodes.len();
    if center >= n {
        return Err(Error::InvalidArgument(format!(
            "center index {center} out of bounds for {n} nodes"
        )));
    }
    if k > n {
        return Err(Error::InvalidArgument(format!(
            "stencil size {k} exceeds node count {n}"
        )));
    }
    if k < 2 {
        return Err(Error::InvalidArgument(
            "stencil needs at least 2 nodes".into(),
        ));
    }
    let mut by_dist: Vec<(f64, usize)> = (0..n).map(|j| (nodes.distance(center, j), j)).collect();
    by_dist.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    let neighbors: Vec<usize> = by_dist[..k].iter().map(|&(_, j)| j).collect();
    let h_loc = by_dist[1..k].iter().map(|&(d, _)| d).sum::<f64>() / (k - 1) as f64;
    Ok(StencilInfo {
        center,
        neighbors,
        h_loc,
    })
}

/// Placement rule for interior evaluation points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpacingMode {
    Uniform,
    Halton,
}

/// Leap used when placing Halton-mode evaluation points inside gaps; matches
/// the generator configuration of the experiments.
const EVAL_HALTON_LEAP: u64 = 38;

/// Returns a sorted 1D node set plus `per_gap` interior points in every
/// consecutive gap.
///
/// `Uniform` places them equispaced; `Halton` places them at the first
/// `per_gap` nonzero leaped radical-inverse values (base 2, leap 38),
/// rescaled into the open gap.
pub fn eval_points_between(nodes: &NodeSet, per_gap: usize, mode: SpacingMode) -> Result<NodeSet> {
    if nodes.dim() != 1 {
        return Err(Error::InvalidArgument(
            "evaluation points are built from 1D node sets".into(),
        ));
    }
    if !nodes.is_sorted_1d() {
        return Err(Error::InvalidArgument(
            "node set must be strictly ascending".into(),
        ));
    }
    let xs = nodes.coords();
    let mut out = Vec::with_capacity(xs.len() * (per_gap + 1));
    // Nonzero leaped Halton fractions, shared by every gap.
    let fractions: Vec<f64> = (1..=per_gap as u64)
        .map(|j| radical_inverse(2, j * (EVAL_HALTON_LEAP + 1)))
        .collect();
    for (i, &a) in xs.iter().enumerate() {
        out.push(a);
        if i + 1 == xs.len() {
            break;
        }
        let b = xs[i + 1];
        match mode {
            SpacingMode::Uniform => {
                let step = (b - a) / (per_gap + 1) as f64;
                out.extend((1..=per_gap).map(|j| a + j as f64 * step));
            }
            SpacingMode::Halton => {
                out.extend(fractions.iter().map(|&v| a + v * (b - a)));
            }
        }
    }
    NodeSet::new(1, out, NodeKind::Custom)
}
