//! Explicit weights `eta_j` for a sequence with `sum (1 - |z_j|) = ∞`:
//! a bounded analytic function with `|f(z_j)| / eta_j` bounded must vanish.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::ops::Range;

use crate::disc::{gleason, DiscPoint};
use crate::error::{Error, Result};

/// Contiguous blocks of a sequence, block `k` (1-based) carrying mass
/// `sum (1 - |z_j|) >= k`. Indices are 0-based.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockPartition {
    /// `n_1 < n_2 < ... < n_{K+1}`: block `k` is `n_k..n_{k+1}`.
    boundaries: Vec<usize>,
    block_sums: Vec<f64>,
    trailing: Option<TrailingBlock>,
}

/// The incomplete run after the last block; never used for weights.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrailingBlock {
    pub start: usize,
    pub len: usize,
    pub sum: f64,
    pub target: usize,
}

impl BlockPartition {
    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    /// Boundaries counted from 1, as in the usual indexing of sequences.
    pub fn boundaries_one_based(&self) -> Vec<usize> {
        self.boundaries.iter().map(|b| b + 1).collect()
    }

    pub fn block_sums(&self) -> &[f64] {
        &self.block_sums
    }

    pub fn trailing(&self) -> Option<TrailingBlock> {
        self.trailing
    }

    pub fn len(&self) -> usize {
        self.block_sums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.block_sums.is_empty()
    }

    /// Index range of block `k` (0-based block index).
    pub fn block(&self, k: usize) -> Range<usize> {
        self.boundaries[k]..self.boundaries[k + 1]
    }

    pub fn blocks(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        self.boundaries.windows(2).map(|w| w[0]..w[1])
    }

    /// One past the last index covered by a complete block.
    pub fn covered(&self) -> usize {
        *self.boundaries.last().expect("at least one boundary")
    }
}

/// Greedy minimal blocks: each block ends at the first index where its
/// mass reaches the block number.
pub fn block_partition(moduli: &[f64]) -> Result<BlockPartition> {
    if let Some(&r) = moduli.iter().find(|r| !(**r >= 0.0 && **r < 1.0)) {
        return Err(Error::Domain(format!("modulus {r} outside [0, 1)")));
    }
    let mut boundaries = vec![0];
    let mut block_sums = Vec::new();
    let mut start = 0;
    let mut sum = 0.0;
    for (j, &r) in moduli.iter().enumerate() {
        sum += 1.0 - r;
        let target = block_sums.len() + 1;
        if sum >= target as f64 {
            block_sums.push(sum);
            boundaries.push(j + 1);
            start = j + 1;
            sum = 0.0;
        }
    }
    if block_sums.is_empty() {
        return Err(Error::InsufficientMass { achieved: sum });
    }
    let trailing = (start < moduli.len()).then(|| TrailingBlock {
        start,
        len: moduli.len() - start,
        sum,
        target: block_sums.len() + 1,
    });
    Ok(BlockPartition {
        boundaries,
        block_sums,
        trailing,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EtaWeights {
    pub partition: BlockPartition,
    /// One weight per point of the covered prefix; may underflow to 0 for
    /// long blocks, in which case `log_eta` stays exact.
    pub eta: Vec<f64>,
    pub log_eta: Vec<f64>,
}

/// `eta_j = |B_j(block, z_j)| / m_k` for `z_j` in block `k` of size `m_k`.
pub fn eta_weights(points: &[DiscPoint]) -> Result<EtaWeights> {
    let moduli: Vec<f64> = points.iter().map(|p| p.modulus()).collect();
    let partition = block_partition(&moduli)?;
    let mut log_eta = Vec::with_capacity(partition.covered());
    for range in partition.blocks() {
        let start = range.start;
        let nodes: Vec<Complex64> = points[range].iter().map(|p| p.value()).collect();
        let log_m = (nodes.len() as f64).ln();
        let block: Vec<f64> = (0..nodes.len())
            .into_par_iter()
            .map(|j| {
                let zj = nodes[j];
                nodes
                    .iter()
                    .enumerate()
                    .filter(|&(l, _)| l != j)
                    .map(|(_, &zl)| gleason(zj, zl).ln())
                    .sum::<f64>()
                    - log_m
            })
            .collect();
        if let Some(j) = block.iter().position(|v| !v.is_finite()) {
            return Err(Error::Degenerate(format!(
                "point {} coincides with another point of its block",
                start + j
            )));
        }
        log_eta.extend(block);
    }
    Ok(EtaWeights {
        partition,
        eta: log_eta.iter().map(|v| v.exp()).collect(),
        log_eta,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlockAudit {
    /// Block number, from 1.
    pub k: usize,
    pub start: usize,
    pub len: usize,
    pub mass: f64,
    pub eta_max: f64,
    /// `max_j |f(z_j)| / eta_j` over the block.
    pub ratio_max: f64,
    /// `(1 + sum_j |f(z_j)| / (m_k eta_j)) * 2 exp(-(1 - |z|^2) mass / 4)`.
    pub bound: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditVerdict {
    /// All samples vanish: consistent with `f ≡ 0` on `|z| <= 1/2` up to the bound.
    ConsistentWithZero,
    /// The last block has the largest ratio and exceeds the first one.
    RatiosGrow,
    /// Ratios stay bounded across the horizon; the bounds show forced decay.
    RatiosBounded,
}

impl AuditVerdict {
    pub fn describe(self) -> &'static str {
        match self {
            AuditVerdict::ConsistentWithZero => {
                "consistent with f ≡ 0 on |z| <= 1/2 up to bound"
            }
            AuditVerdict::RatiosGrow => "ratios |f(z_j)|/eta_j grow along the blocks",
            AuditVerdict::RatiosBounded => {
                "ratios stay bounded; per-block bounds force decay of f at the probe"
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UniquenessAudit {
    pub probe: DiscPoint,
    pub blocks: Vec<BlockAudit>,
    pub verdict: AuditVerdict,
}

/// Confronts samples `f(z_j)` with the weights, block by block.
pub fn uniqueness_audit(
    points: &[DiscPoint],
    samples: &[Complex64],
    weights: &EtaWeights,
    probe: DiscPoint,
) -> Result<UniquenessAudit> {
    if samples.len() != points.len() {
        return Err(Error::LengthMismatch {
            expected: points.len(),
            got: samples.len(),
        });
    }
    if weights.partition.covered() > points.len() {
        return Err(Error::LengthMismatch {
            expected: weights.partition.covered(),
            got: points.len(),
        });
    }
    if probe.modulus() > 0.5 {
        return Err(Error::OutOfRange {
            name: "|z_probe|",
            value: probe.modulus(),
            range: "[0, 0.5]".to_string(),
        });
    }
    let decay_rate = (1.0 - probe.modulus() * probe.modulus()) / 4.0;
    let blocks: Vec<BlockAudit> = weights
        .partition
        .blocks()
        .enumerate()
        .map(|(i, range)| {
            let m = range.len() as f64;
            let mass: f64 = points[range.clone()].iter().map(|p| 1.0 - p.modulus()).sum();
            let mut ratio_max: f64 = 0.0;
            let mut weighted = 0.0;
            let mut eta_max: f64 = 0.0;
            for j in range.clone() {
                let f = samples[j].norm();
                let ratio = if f == 0.0 {
                    0.0
                } else {
                    (f.ln() - weights.log_eta[j]).exp()
                };
                ratio_max = ratio_max.max(ratio);
                weighted += ratio / m;
                eta_max = eta_max.max(weights.eta[j]);
            }
            BlockAudit {
                k: i + 1,
                start: range.start,
                len: range.len(),
                mass,
                eta_max,
                ratio_max,
                bound: (1.0 + weighted) * 2.0 * (-decay_rate * mass).exp(),
            }
        })
        .collect();

    let covered = &samples[..weights.partition.covered()];
    let verdict = if covered.iter().all(|s| s.norm() == 0.0) {
        AuditVerdict::ConsistentWithZero
    } else {
        let first = blocks[0].ratio_max;
        let last = blocks[blocks.len() - 1].ratio_max;
        let peak = blocks.iter().map(|b| b.ratio_max).fold(0.0, f64::max);
        if blocks.len() > 1 && last > first && last >= peak {
            AuditVerdict::RatiosGrow
        } else {
            AuditVerdict::RatiosBounded
        }
    };
    Ok(UniquenessAudit {
        probe,
        blocks,
        verdict,
    })
}
