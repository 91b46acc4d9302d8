//! Shared helpers for the integration suites: a deterministic RNG and
//! generators of random interpolation instances.

// each test binary uses a different subset of these helpers
#![allow(dead_code)]

use rbf_dd::prelude::*;

pub struct SplitMix64(pub u64);

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

/// A random well-separated node set: a jittered uniform grid in 1D or 2D.
pub fn jittered_nodes(rng: &mut SplitMix64, dim: usize, per_axis: usize) -> (NodeSet, f64) {
    let h = 1.0 / (per_axis as f64 - 1.0);
    let jitter = 0.3 * h;
    match dim {
        1 => {
            let coords: Vec<f64> = (0..per_axis)
                .map(|i| i as f64 * h + jitter * (rng.next_f64() - 0.5))
                .collect();
            let nodes = NodeSet::new(1, coords, NodeKind::Custom)
                .unwrap()
                .sorted_1d()
                .unwrap();
            let h = nodes.max_consecutive_spacing().unwrap();
            (nodes, h)
        }
        _ => {
            let mut coords = Vec::with_capacity(2 * per_axis * per_axis);
            for i in 0..per_axis {
                for j in 0..per_axis {
                    coords.push(i as f64 * h + jitter * (rng.next_f64() - 0.5));
                    coords.push(j as f64 * h + jitter * (rng.next_f64() - 0.5));
                }
            }
            let nodes = NodeSet::new(2, coords, NodeKind::Custom).unwrap();
            let h = nodes.max_nearest_neighbor_distance().unwrap();
            (nodes, h)
        }
    }
}

/// A random kernel with a shape factor that keeps the system comfortably
/// conditioned.
pub fn safe_kernel(rng: &mut SplitMix64) -> (KernelKind, f64) {
    let kind = ALL_KERNELS[rng.below(6)];
    let factor = match kind {
        KernelKind::Gaussian | KernelKind::InverseMultiquadric => rng.uniform(1.2, 2.5),
        _ => rng.uniform(0.5, 1.2),
    };
    (kind, factor)
}

/// Random retention flags with at least one smooth node.
pub fn random_flags(rng: &mut SplitMix64, n: usize, p_flagged: f64) -> Vec<u8> {
    loop {
        let flags: Vec<u8> = (0..n)
            .map(|_| (rng.next_f64() >= p_flagged) as u8)
            .collect();
        if flags.contains(&1) {
            return flags;
        }
    }
}

/// A synthetic indicator field whose adaptation reproduces exactly the given
/// flags (0 where flagged).
pub fn field_for_flags(flags: &[u8]) -> SmoothnessField {
    SmoothnessField {
        values: flags
            .iter()
            .map(|&f| if f == 1 { 0.0 } else { 1.0 })
            .collect(),
        stencils: Vec::new(),
        source: IndicatorSource::Mls,
    }
}

/// Assembles `[[Ã, 0], [C, I]]`.
pub fn assemble_block_system(a_tilde: &DenseMatrix, c_block: &DenseMatrix) -> DenseMatrix {
    let s = a_tilde.rows();
    let f = c_block.rows();
    DenseMatrix::from_fn(s + f, s + f, |i, j| match (i < s, j < s) {
        (true, true) => a_tilde.get(i, j),
        (true, false) => 0.0,
        (false, true) => c_block.get(i - s, j),
        (false, false) => ((i - s) == (j - s)) as u8 as f64,
    })
}

/// Extracts the smooth/smooth block and the flagged/smooth coupling block of
/// a data-dependent matrix.
pub fn extract_blocks(
    matrix: &DenseMatrix,
    partition: &BlockPartition,
) -> (DenseMatrix, DenseMatrix) {
    let s = partition.smooth_idx.len();
    let f = partition.flagged_idx.len();
    let a_tilde = DenseMatrix::from_fn(s, s, |a, b| {
        matrix.get(partition.smooth_idx[a], partition.smooth_idx[b])
    });
    let c_block = DenseMatrix::from_fn(f, s, |a, b| {
        matrix.get(partition.flagged_idx[a], partition.smooth_idx[b])
    });
    (a_tilde, c_block)
}
