//! Coverage, FLOPs and recall diagnostics for a reduction.
//!
//! For a retained subset of the original tokens the symmetric Hausdorff
//! distance collapses to its backward term, the coverage radius
//! `max_{discarded x} min_{retained y} |x - y|_2`. Any set function that is
//! `K`-Lipschitz under the Hausdorff distance changes by at most `K` times
//! that radius when the discarded tokens are dropped.

mod baselines;
mod flops;

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

pub use baselines::{baseline_select, Baseline};
pub use flops::{flops_total, FlopsModel, FlopsReport};

use crate::error::{Error, Result};
use crate::kernels;
use crate::synth::BACKGROUND;
use crate::tensor_io::{IndexSet, TokenMatrix};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub radius: f64,
    /// Discarded token attaining the radius (smallest index on ties).
    pub worst_discarded: Option<usize>,
    pub discarded: Vec<usize>,
    /// Distance from each discarded token to its nearest retained token.
    pub distances: Vec<f64>,
}

fn nearest_distance(tokens: &TokenMatrix, row: &[f32], targets: &[usize]) -> f64 {
    targets
        .iter()
        .map(|&j| kernels::squared_distance(row, tokens.row(j)))
        .fold(f64::INFINITY, f64::min)
        .sqrt()
}

pub fn coverage_radius(tokens: &TokenMatrix, retained: &IndexSet) -> Result<CoverageReport> {
    if retained.is_empty() {
        return Err(Error::EmptyRetained);
    }
    IndexSet::new(retained.to_vec(), tokens.rows())?;
    let discarded = retained.complement(tokens.rows()).into_inner();
    let distances: Vec<f64> = discarded
        .par_iter()
        .map(|&i| nearest_distance(tokens, tokens.row(i), retained))
        .collect();
    let mut radius = 0.0;
    let mut worst = None;
    for (&i, &dist) in discarded.iter().zip(&distances) {
        if worst.is_none() || dist > radius {
            radius = dist;
            worst = Some(i);
        }
    }
    Ok(CoverageReport {
        radius,
        worst_discarded: worst,
        discarded,
        distances,
    })
}

fn directed_hausdorff(from: &TokenMatrix, to: &TokenMatrix) -> f64 {
    let targets: Vec<usize> = (0..to.rows()).collect();
    (0..from.rows())
        .into_par_iter()
        .map(|i| nearest_distance(to, from.row(i), &targets))
        .reduce(|| 0.0, f64::max)
}

/// Symmetric Hausdorff distance between two token sets (Euclidean).
pub fn hausdorff_distance(a: &TokenMatrix, b: &TokenMatrix) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput);
    }
    a.check_same_dim(b)?;
    Ok(directed_hausdorff(a, b).max(directed_hausdorff(b, a)))
}

/// Fraction of subject clusters with at least one retained token.
///
/// Returns 1 when the labels contain no subject at all.
pub fn subject_recall(labels: &[i64], retained: &IndexSet) -> Result<f64> {
    if let Some(&last) = retained.last() {
        if last >= labels.len() {
            return Err(Error::LengthMismatch {
                expected: labels.len(),
                found: last + 1,
            });
        }
    }
    let clusters: BTreeSet<i64> = labels
        .iter()
        .copied()
        .filter(|&l| l != BACKGROUND)
        .collect();
    if clusters.is_empty() {
        return Ok(1.0);
    }
    let hit: BTreeSet<i64> = retained
        .iter()
        .map(|&i| labels[i])
        .filter(|&l| l != BACKGROUND)
        .collect();
    Ok(hit.len() as f64 / clusters.len() as f64)
}
