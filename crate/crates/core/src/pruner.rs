//! End-to-end reduction: focus identification followed by one scanning pass.

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::cassm::{self, ScanOptions, ScanOrder};
use crate::error::{Error, Result};
use crate::fim;
use crate::tensor_io::{self, IndexSet, ScoreVector, TokenMatrix};

/// Version of the result JSON layout.
pub const RESULT_SCHEMA: u32 = 1;

/// Number of focal tokens used when the caller does not choose one.
pub const DEFAULT_FOCAL_K: usize = 8;

/// Layer after which reduction is meant to be applied. Recorded, never acted on.
pub const DEFAULT_LAYER_HINT: usize = 2;

/// Every knob of a reduction call. Exactly one of `n_target` and
/// `keep_ratio` must be set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionConfig {
    pub n_target: Option<usize>,
    pub keep_ratio: Option<f64>,
    pub focal_k: usize,
    pub eps: f64,
    pub scan_order: ScanOrder,
    pub normalize_utility: bool,
    pub invert_delta: bool,
    pub layer_hint: usize,
}

impl ReductionConfig {
    fn base() -> Self {
        Self {
            n_target: None,
            keep_ratio: None,
            focal_k: DEFAULT_FOCAL_K,
            eps: fim::DEFAULT_EPS,
            scan_order: ScanOrder::Ranked,
            normalize_utility: false,
            invert_delta: false,
            layer_hint: DEFAULT_LAYER_HINT,
        }
    }

    pub fn with_n_target(n_target: usize) -> Self {
        Self {
            n_target: Some(n_target),
            ..Self::base()
        }
    }

    pub fn with_keep_ratio(keep_ratio: f64) -> Self {
        Self {
            keep_ratio: Some(keep_ratio),
            ..Self::base()
        }
    }

    pub fn focal_k(mut self, k: usize) -> Self {
        self.focal_k = k;
        self
    }

    pub fn scan_order(mut self, order: ScanOrder) -> Self {
        self.scan_order = order;
        self
    }

    /// Resolves the retained count `Ñ` for a sequence of `n` tokens.
    ///
    /// A keep ratio resolves to `max(1, round(ratio · n))`.
    pub fn resolve_budget(&self, n: usize) -> Result<usize> {
        let target = match (self.n_target, self.keep_ratio) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidConfig(
                    "n_target and keep_ratio are mutually exclusive".into(),
                ))
            }
            (None, None) => {
                return Err(Error::InvalidConfig(
                    "one of n_target or keep_ratio is required".into(),
                ))
            }
            (Some(t), None) => t,
            (None, Some(r)) => {
                if !(r > 0.0 && r <= 1.0) {
                    return Err(Error::BudgetInvalid(format!(
                        "keep_ratio {r} outside (0, 1]"
                    )));
                }
                ((r * n as f64).round() as usize).max(1)
            }
        };
        if target == 0 || target > n {
            return Err(Error::BudgetInvalid(format!(
                "n_target {target} outside [1, {n}]"
            )));
        }
        Ok(target)
    }

    pub fn validate(&self) -> Result<()> {
        if self.focal_k == 0 {
            return Err(Error::InvalidConfig("focal_k must be at least 1".into()));
        }
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "eps must be positive, got {}",
                self.eps
            )));
        }
        Ok(())
    }

    pub(crate) fn scan_options(&self) -> ScanOptions {
        ScanOptions {
            eps: self.eps,
            scan_order: self.scan_order,
            normalize_utility: self.normalize_utility,
            invert_delta: self.invert_delta,
        }
    }
}

/// Wall-clock time spent per stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StageTimings {
    pub fim: Duration,
    pub cassm: Duration,
    pub total: Duration,
}

/// Retained tokens and everything computed on the way.
///
/// `utility`, `dependency` and `divergence` are aligned with `candidates`,
/// the ascending list of non-focal indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionResult {
    pub n_target: usize,
    pub retained: IndexSet,
    pub focal: IndexSet,
    pub context: IndexSet,
    pub candidates: IndexSet,
    pub composite_scores: ScoreVector,
    pub saliency_norm: ScoreVector,
    pub relevance_norm: ScoreVector,
    pub utility: ScoreVector,
    pub dependency: ScoreVector,
    pub divergence: ScoreVector,
    pub delta: f64,
    pub stride: usize,
    pub config: ReductionConfig,
    pub timings: StageTimings,
}

/// Reduces `tokens` to `Ñ` rows: the top-`min(K, Ñ)` focal tokens plus
/// `Ñ - |F|` context tokens chosen by structure-responsive sampling.
///
/// Pass an empty (`0 x d`) query matrix to score without a query.
pub fn prune(
    tokens: &TokenMatrix,
    queries: &TokenMatrix,
    config: &ReductionConfig,
) -> Result<ReductionResult> {
    let start = Instant::now();
    config.validate()?;
    if tokens.is_empty() {
        return Err(Error::EmptyInput);
    }
    tokens.check_same_dim(queries)?;
    let n_target = config.resolve_budget(tokens.rows())?;

    let focus = fim::identify_focus(tokens, queries, config.focal_k.min(n_target), config.eps)?;
    let fim_done = Instant::now();

    let scan = cassm::scan(
        tokens,
        &focus.focal,
        queries,
        n_target,
        &config.scan_options(),
    )?;
    let end = Instant::now();

    let retained = focus.focal.union(&scan.context);
    debug_assert_eq!(retained.len(), n_target);
    Ok(ReductionResult {
        n_target,
        retained,
        focal: focus.focal,
        context: scan.context,
        candidates: scan.candidates,
        composite_scores: focus.scores,
        saliency_norm: focus.saliency_norm,
        relevance_norm: focus.relevance_norm,
        utility: scan.utility,
        dependency: scan.dependency,
        divergence: scan.divergence,
        delta: scan.delta,
        stride: scan.stride,
        config: config.clone(),
        timings: StageTimings {
            fim: fim_done - start,
            cassm: end - fim_done,
            total: end - start,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoresDocument {
    pub composite: Vec<f64>,
    pub utility: Vec<f64>,
    pub divergence: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimingsDocument {
    pub fim: u64,
    pub cassm: u64,
    pub total: u64,
}

/// On-disk form of a [`ReductionResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub schema: u32,
    pub n: usize,
    pub d: usize,
    pub q: usize,
    pub config: ReductionConfig,
    pub n_target: usize,
    pub retained: Vec<usize>,
    pub focal: Vec<usize>,
    pub context: Vec<usize>,
    pub delta: f64,
    pub stride: usize,
    pub scores: ScoresDocument,
    pub timings_us: TimingsDocument,
    pub query_absent: bool,
}

impl ResultDocument {
    pub fn new(
        result: &ReductionResult,
        tokens: &TokenMatrix,
        queries: &TokenMatrix,
        query_absent: bool,
    ) -> Self {
        let us = |d: Duration| d.as_micros() as u64;
        Self {
            schema: RESULT_SCHEMA,
            n: tokens.rows(),
            d: tokens.cols(),
            q: queries.rows(),
            config: result.config.clone(),
            n_target: result.n_target,
            retained: result.retained.to_vec(),
            focal: result.focal.to_vec(),
            context: result.context.to_vec(),
            delta: result.delta,
            stride: result.stride,
            scores: ScoresDocument {
                composite: result.composite_scores.to_vec(),
                utility: result.utility.to_vec(),
                divergence: result.divergence.to_vec(),
            },
            timings_us: TimingsDocument {
                fim: us(result.timings.fim),
                cassm: us(result.timings.cassm),
                total: us(result.timings.total),
            },
            query_absent,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text)?;
        if doc.schema != RESULT_SCHEMA {
            return Err(Error::InvalidConfig(format!(
                "unsupported result schema {}",
                doc.schema
            )));
        }
        Ok(doc)
    }

    /// The retained set, validated against the declared token count.
    pub fn retained_set(&self) -> Result<IndexSet> {
        IndexSet::new(self.retained.clone(), self.n)
    }
}

/// Loads the inputs, prunes, and writes the result JSON to `out_path`.
///
/// With `queries_path = None` the reduction runs without a query and the
/// document records `query_absent = true`.
pub fn prune_file(
    tokens_path: impl AsRef<Path>,
    queries_path: Option<&Path>,
    config: &ReductionConfig,
    out_path: impl AsRef<Path>,
) -> Result<ResultDocument> {
    let tokens = tensor_io::read_matrix(tokens_path)?;
    let queries = match queries_path {
        Some(p) => tensor_io::read_matrix(p)?,
        None => TokenMatrix::empty(tokens.cols())?,
    };
    let result = prune(&tokens, &queries, config)?;
    let doc = ResultDocument::new(&result, &tokens, &queries, queries_path.is_none());
    fs::write(out_path, doc.to_json()?)?;
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, d: usize) -> TokenMatrix {
        let data = (0..n * d)
            .map(|i| (((i * 7919) % 113) as f32 - 56.0) / 17.0)
            .collect();
        TokenMatrix::new(n, d, data).unwrap()
    }

    #[test]
    fn full_budget_keeps_everything() {
        let t = grid(20, 5);
        let q = grid(2, 5);
        let r = prune(&t, &q, &ReductionConfig::with_n_target(20)).unwrap();
        assert_eq!(r.retained, IndexSet::full(20));
    }

    #[test]
    fn unit_budget_keeps_the_argmax() {
        let t = grid(20, 5);
        let q = grid(2, 5);
        let r = prune(&t, &q, &ReductionConfig::with_n_target(1)).unwrap();
        let best = (0..20)
            .max_by(|&a, &b| {
                r.composite_scores[a]
                    .total_cmp(&r.composite_scores[b])
                    .then(b.cmp(&a))
            })
            .unwrap();
        assert_eq!(r.retained.indices(), &[best]);
        assert!(r.context.is_empty());
    }

    #[test]
    fn budget_validation() {
        let t = grid(10, 3);
        let q = TokenMatrix::empty(3).unwrap();
        for cfg in [
            ReductionConfig::with_n_target(0),
            ReductionConfig::with_n_target(11),
            ReductionConfig::with_keep_ratio(0.0),
            ReductionConfig::with_keep_ratio(1.5),
        ] {
            assert!(
                matches!(prune(&t, &q, &cfg), Err(Error::BudgetInvalid(_))),
                "{cfg:?}"
            );
        }
        let mut both = ReductionConfig::with_n_target(3);
        both.keep_ratio = Some(0.5);
        assert!(matches!(prune(&t, &q, &both), Err(Error::InvalidConfig(_))));
        assert!(matches!(
            prune(&t, &q, &ReductionConfig::with_n_target(3).focal_k(0)),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            prune(&t, &grid(1, 4), &ReductionConfig::with_n_target(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn keep_ratio_rounds() {
        let cfg = ReductionConfig::with_keep_ratio(0.333);
        assert_eq!(cfg.resolve_budget(576).unwrap(), 192);
        assert_eq!(cfg.resolve_budget(1).unwrap(), 1);
        assert_eq!(
            ReductionConfig::with_keep_ratio(0.01)
                .resolve_budget(10)
                .unwrap(),
            1
        );
    }

    #[test]
    fn document_round_trips() {
        let t = grid(12, 4);
        let q = grid(3, 4);
        let r = prune(&t, &q, &ReductionConfig::with_keep_ratio(0.5)).unwrap();
        let doc = ResultDocument::new(&r, &t, &q, false);
        let back = ResultDocument::from_json(&doc.to_json().unwrap()).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.retained_set().unwrap(), r.retained);
        let v: serde_json::Value = serde_json::from_str(&doc.to_json().unwrap()).unwrap();
        for key in [
            "schema",
            "n",
            "d",
            "q",
            "config",
            "retained",
            "focal",
            "context",
            "delta",
            "stride",
            "scores",
            "timings_us",
            "query_absent",
        ] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
    }
}
