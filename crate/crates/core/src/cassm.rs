//! Context-aware structural scanning.
//!
//! Given the focal set `F` and the candidates `C` (every other token):
//!
//! ```text
//! M(c) = mean_{f in F} cos(c, f) + mean_{z in C} (1 - cos(c, z))
//! U(c) = M(c) + mean_q cos(c, q)
//! d(c) = exp(-mean_{f in F} cos(c, f)),    δ = mean_{c in C} d(c)
//! Δ    = max(1, floor((Ñ - |F|) · δ))
//! ```
//!
//! Structure-responsive sampling then walks the candidates ranked by `U`
//! with step `Δ`, wrapping modulo `|C|`, until `Ñ - |F|` tokens are taken.
//! When the walk lands on a position that is already taken it probes forward
//! one position at a time to the next free one, then keeps striding from
//! there. This always terminates once the budget is met because the budget
//! never exceeds `|C|`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fim::{self, rank_order};
use crate::kernels;
use crate::tensor_io::{IndexSet, ScoreVector, TokenMatrix};

/// Sequence the sampling stride walks over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanOrder {
    /// Candidates ordered by descending utility.
    #[default]
    Ranked,
    /// Candidates in original token order.
    Positional,
}

impl std::str::FromStr for ScanOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ranked" => Ok(Self::Ranked),
            "positional" => Ok(Self::Positional),
            other => Err(Error::InvalidConfig(format!(
                "unknown scan order {other:?}"
            ))),
        }
    }
}

impl std::fmt::Display for ScanOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Ranked => "ranked",
            Self::Positional => "positional",
        })
    }
}

/// Switches for the scanning stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub eps: f64,
    pub scan_order: ScanOrder,
    /// Min-max normalize both utility terms before adding them.
    pub normalize_utility: bool,
    /// Use `exp(+mean cos)` in place of `exp(-mean cos)` for the divergence.
    pub invert_delta: bool,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            eps: fim::DEFAULT_EPS,
            scan_order: ScanOrder::Ranked,
            normalize_utility: false,
            invert_delta: false,
        }
    }
}

/// Output of one scanning pass. Score vectors are aligned with `candidates`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub candidates: IndexSet,
    pub context: IndexSet,
    pub utility: ScoreVector,
    pub dependency: ScoreVector,
    pub divergence: ScoreVector,
    /// Mean divergence; 0 when there are no candidates.
    pub delta: f64,
    pub stride: usize,
}

fn check_inputs(candidates: &TokenMatrix, focal: &TokenMatrix) -> Result<()> {
    if focal.is_empty() {
        return Err(Error::EmptyFocal);
    }
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    candidates.check_same_dim(focal)
}

/// Per-candidate terms that share the candidate norms.
struct Terms {
    focal_affinity: Vec<f64>,
    dependency: Vec<f64>,
}

fn structural_terms(
    candidates: &TokenMatrix,
    cnorms: &[f64],
    focal: &TokenMatrix,
    eps: f64,
) -> Terms {
    let fnorms = kernels::row_norms(focal);
    let fdir = kernels::mean_direction(focal, &fnorms, eps);
    let focal_affinity = kernels::mean_cosines(candidates, cnorms, &fdir, eps);
    let cdir = kernels::mean_direction(candidates, cnorms, eps);
    let self_affinity = kernels::mean_cosines(candidates, cnorms, &cdir, eps);
    let dependency = focal_affinity
        .iter()
        .zip(&self_affinity)
        .map(|(f, s)| f + (1.0 - s))
        .collect();
    Terms {
        focal_affinity,
        dependency,
    }
}

fn divergence_from(focal_affinity: &[f64], invert: bool) -> (Vec<f64>, f64) {
    let sign = if invert { 1.0 } else { -1.0 };
    let d: Vec<f64> = focal_affinity.iter().map(|&a| (sign * a).exp()).collect();
    let delta = if d.is_empty() {
        0.0
    } else {
        d.iter().sum::<f64>() / d.len() as f64
    };
    (d, delta)
}

/// Structural dependency `M` of every candidate. The candidate itself is part
/// of the second expectation and contributes `1 - 1 = 0` to it.
pub fn structural_dependency(
    candidates: &TokenMatrix,
    focal: &TokenMatrix,
    eps: f64,
) -> Result<ScoreVector> {
    check_inputs(candidates, focal)?;
    let cnorms = kernels::row_norms(candidates);
    Ok(structural_terms(candidates, &cnorms, focal, eps)
        .dependency
        .into())
}

/// Contextual utility `U = M + R`, both terms raw.
pub fn contextual_utility(
    candidates: &TokenMatrix,
    focal: &TokenMatrix,
    queries: &TokenMatrix,
    eps: f64,
) -> Result<ScoreVector> {
    check_inputs(candidates, focal)?;
    candidates.check_same_dim(queries)?;
    let cnorms = kernels::row_norms(candidates);
    let terms = structural_terms(candidates, &cnorms, focal, eps);
    let relevance = fim::relevance_with_norms(candidates, &cnorms, queries, eps);
    Ok(terms
        .dependency
        .iter()
        .zip(&relevance)
        .map(|(m, r)| m + r)
        .collect::<Vec<_>>()
        .into())
}

/// Per-candidate divergence `d` and its mean `δ`.
pub fn structural_divergence(
    candidates: &TokenMatrix,
    focal: &TokenMatrix,
    eps: f64,
) -> Result<(ScoreVector, f64)> {
    check_inputs(candidates, focal)?;
    let cnorms = kernels::row_norms(candidates);
    let fnorms = kernels::row_norms(focal);
    let fdir = kernels::mean_direction(focal, &fnorms, eps);
    let affinity = kernels::mean_cosines(candidates, &cnorms, &fdir, eps);
    let (d, delta) = divergence_from(&affinity, false);
    Ok((d.into(), delta))
}

/// `Δ = max(1, floor((n_target - focal_count) · delta))`.
pub fn retention_stride(n_target: usize, focal_count: usize, delta: f64) -> Result<usize> {
    if n_target < focal_count {
        return Err(Error::BudgetBelowFocal {
            n_target,
            focal_count,
        });
    }
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "divergence must be positive and finite, got {delta}"
        )));
    }
    let raw = ((n_target - focal_count) as f64 * delta).floor();
    Ok((raw as usize).max(1))
}

/// Positions visited by the stride walk over `len` slots, in visit order.
pub(crate) fn stride_walk(len: usize, stride: usize, budget: usize) -> Vec<usize> {
    let take = budget.min(len);
    let mut taken = vec![false; len];
    let mut picks = Vec::with_capacity(take);
    let mut cursor = 0usize;
    while picks.len() < take {
        while taken[cursor] {
            cursor = (cursor + 1) % len;
        }
        taken[cursor] = true;
        picks.push(cursor);
        cursor = (cursor + stride) % len;
    }
    picks
}

/// Structure-responsive sampling over the utility ranking.
///
/// Returns the chosen original indices in ascending order.
pub fn srs_select(
    utility: &[f64],
    candidate_ids: &IndexSet,
    stride: usize,
    budget: usize,
) -> Result<IndexSet> {
    sample(utility, candidate_ids, stride, budget, ScanOrder::Ranked)
}

/// Like [`srs_select`] but walks candidates in original token order.
pub fn srs_select_positional(
    candidate_ids: &IndexSet,
    stride: usize,
    budget: usize,
) -> Result<IndexSet> {
    let zeros = vec![0.0; candidate_ids.len()];
    sample(&zeros, candidate_ids, stride, budget, ScanOrder::Positional)
}

fn sample(
    utility: &[f64],
    candidate_ids: &IndexSet,
    stride: usize,
    budget: usize,
    order: ScanOrder,
) -> Result<IndexSet> {
    if utility.len() != candidate_ids.len() {
        return Err(Error::LengthMismatch {
            expected: candidate_ids.len(),
            found: utility.len(),
        });
    }
    if stride == 0 {
        return Err(Error::InvalidConfig("stride must be at least 1".into()));
    }
    if candidate_ids.is_empty() || budget == 0 {
        return Ok(IndexSet::default());
    }
    let sequence: Vec<usize> = match order {
        // candidate_ids ascend, so ties on utility fall to the smaller token index
        ScanOrder::Ranked => {
            let mut seq: Vec<usize> = (0..utility.len()).collect();
            seq.sort_unstable_by(|&a, &b| rank_order(utility, a, b));
            seq
        }
        ScanOrder::Positional => (0..utility.len()).collect(),
    };
    let picks = stride_walk(sequence.len(), stride, budget)
        .into_iter()
        .map(|p| candidate_ids[sequence[p]])
        .collect();
    Ok(IndexSet::from_unsorted(picks))
}

/// One full scanning pass over every non-focal token.
pub fn scan(
    tokens: &TokenMatrix,
    focal: &IndexSet,
    queries: &TokenMatrix,
    n_target: usize,
    opts: &ScanOptions,
) -> Result<ScanResult> {
    tokens.check_same_dim(queries)?;
    if focal.is_empty() {
        return Err(Error::EmptyFocal);
    }
    IndexSet::new(focal.to_vec(), tokens.rows())?;
    if n_target < focal.len() {
        return Err(Error::BudgetBelowFocal {
            n_target,
            focal_count: focal.len(),
        });
    }
    let candidates = focal.complement(tokens.rows());
    if candidates.is_empty() {
        return Ok(ScanResult {
            candidates,
            context: IndexSet::default(),
            utility: ScoreVector::default(),
            dependency: ScoreVector::default(),
            divergence: ScoreVector::default(),
            delta: 0.0,
            stride: 1,
        });
    }

    let eps = opts.eps;
    let cand_m = tokens.select_rows(&candidates)?;
    let focal_m = tokens.select_rows(focal)?;
    let cnorms = kernels::row_norms(&cand_m);
    let terms = structural_terms(&cand_m, &cnorms, &focal_m, eps);
    let relevance = fim::relevance_with_norms(&cand_m, &cnorms, queries, eps);

    let utility: Vec<f64> = if opts.normalize_utility {
        let m = fim::minmax_normalize(&terms.dependency, eps)?;
        let r = fim::minmax_normalize(&relevance, eps)?;
        m.iter().zip(r.iter()).map(|(a, b)| a + b).collect()
    } else {
        terms
            .dependency
            .iter()
            .zip(&relevance)
            .map(|(m, r)| m + r)
            .collect()
    };
    let (divergence, delta) = divergence_from(&terms.focal_affinity, opts.invert_delta);
    let stride = retention_stride(n_target, focal.len(), delta)?;
    let budget = n_target - focal.len();
    let context = sample(&utility, &candidates, stride, budget, opts.scan_order)?;

    Ok(ScanResult {
        candidates,
        context,
        utility: utility.into(),
        dependency: terms.dependency.into(),
        divergence: divergence.into(),
        delta,
        stride,
    })
}
