//! Simplified reference selectors used as comparison points.
//!
//! These are stand-ins for families of published methods, not reproductions
//! of any of them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fim;
use crate::kernels;
use crate::rng::SplitMix64;
use crate::tensor_io::{IndexSet, TokenMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Baseline {
    /// Uniform sample without replacement.
    Random,
    /// Every `floor(N / Ñ)`-th token starting at 0.
    UniformStride,
    /// Top-Ñ by raw L1 norm.
    SaliencyTopk,
    /// Top-Ñ by mean query cosine.
    RelevanceTopk,
    /// Greedy farthest-point insertion seeded at the largest-L1 token.
    MaxminDiversity,
}

impl Baseline {
    pub const ALL: [Baseline; 5] = [
        Baseline::Random,
        Baseline::UniformStride,
        Baseline::SaliencyTopk,
        Baseline::RelevanceTopk,
        Baseline::MaxminDiversity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Baseline::Random => "random",
            Baseline::UniformStride => "uniform_stride",
            Baseline::SaliencyTopk => "saliency_topk",
            Baseline::RelevanceTopk => "relevance_topk",
            Baseline::MaxminDiversity => "maxmin_diversity",
        }
    }
}

impl std::str::FromStr for Baseline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Baseline::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown baseline {s:?}")))
    }
}

pub fn baseline_select(
    method: Baseline,
    tokens: &TokenMatrix,
    queries: &TokenMatrix,
    n_target: usize,
    seed: u64,
) -> Result<IndexSet> {
    let n = tokens.rows();
    if n_target == 0 || n_target > n {
        return Err(Error::BudgetInvalid(format!(
            "n_target {n_target} outside [1, {n}]"
        )));
    }
    let picks = match method {
        Baseline::Random => {
            let mut rng = SplitMix64::new(seed);
            let mut order: Vec<usize> = (0..n).collect();
            // partial Fisher-Yates over the first n_target slots
            for i in 0..n_target {
                let j = i + rng.below(n - i);
                order.swap(i, j);
            }
            order.truncate(n_target);
            order
        }
        Baseline::UniformStride => {
            let step = n / n_target;
            (0..n_target).map(|k| k * step).collect()
        }
        Baseline::SaliencyTopk => {
            let s = fim::l1_saliency(tokens)?;
            fim::top_k_ranked(&s, n_target)
        }
        Baseline::RelevanceTopk => {
            let r = fim::query_relevance(tokens, queries, fim::DEFAULT_EPS)?;
            fim::top_k_ranked(&r, n_target)
        }
        Baseline::MaxminDiversity => maxmin(tokens, n_target)?,
    };
    Ok(IndexSet::from_unsorted(picks))
}

fn maxmin(tokens: &TokenMatrix, n_target: usize) -> Result<Vec<usize>> {
    let n = tokens.rows();
    let l1 = fim::l1_saliency(tokens)?;
    let first = fim::top_k_ranked(&l1, 1)[0];
    let mut chosen = vec![false; n];
    let mut nearest = vec![f64::INFINITY; n];
    let mut picks = Vec::with_capacity(n_target);
    let mut next = first;
    loop {
        chosen[next] = true;
        picks.push(next);
        if picks.len() == n_target {
            break;
        }
        let anchor = tokens.row(next);
        for (i, row) in tokens.iter_rows().enumerate() {
            if !chosen[i] {
                nearest[i] = nearest[i].min(kernels::squared_distance(row, anchor));
            }
        }
        next = (0..n)
            .filter(|&i| !chosen[i])
            .max_by(|&a, &b| nearest[a].total_cmp(&nearest[b]).then(b.cmp(&a)))
            .expect("budget below token count leaves a free token");
    }
    Ok(picks)
}
