//! Focus identification: composite saliency/relevance scoring and focal top-K.
//!
//! The composite score of token `x_i` is
//!
//! ```text
//! S(x_i) = Φ(|x_i|_1) + Φ(mean_q cos(x_i, q))
//! ```
//!
//! where `Φ` is min-max normalization over all tokens. The focal set is the
//! top-K tokens under `S`, ties going to the smaller row index.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::kernels;
use crate::tensor_io::{IndexSet, ScoreVector, TokenMatrix};

/// Default guard for zero norms and constant-input normalization.
pub const DEFAULT_EPS: f64 = 1e-12;

/// Focal tokens plus every score that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct FocalSelection {
    pub focal: IndexSet,
    pub scores: ScoreVector,
    pub saliency_norm: ScoreVector,
    pub relevance_norm: ScoreVector,
}

/// Composite score `S` together with its two normalized terms.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeScores {
    pub scores: ScoreVector,
    pub saliency_norm: ScoreVector,
    pub relevance_norm: ScoreVector,
}

/// `(v_i - min v) / max(max v - min v, eps)`.
///
/// A constant input maps to all zeros.
pub fn minmax_normalize(v: &[f64], eps: f64) -> Result<ScoreVector> {
    if v.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (lo, hi) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    let range = (hi - lo).max(eps);
    Ok(v.iter()
        .map(|&x| (x - lo) / range)
        .collect::<Vec<_>>()
        .into())
}

/// Raw L1 norm of every token.
pub fn l1_saliency(tokens: &TokenMatrix) -> Result<ScoreVector> {
    if tokens.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(tokens
        .iter_rows()
        .map(kernels::l1)
        .collect::<Vec<_>>()
        .into())
}

/// Mean cosine similarity of each token to the query rows.
///
/// With no query rows the relevance is zero everywhere.
pub fn query_relevance(
    tokens: &TokenMatrix,
    queries: &TokenMatrix,
    eps: f64,
) -> Result<ScoreVector> {
    tokens.check_same_dim(queries)?;
    if tokens.is_empty() {
        return Err(Error::EmptyInput);
    }
    let norms = kernels::row_norms(tokens);
    Ok(relevance_with_norms(tokens, &norms, queries, eps).into())
}

pub(crate) fn relevance_with_norms(
    tokens: &TokenMatrix,
    norms: &[f64],
    queries: &TokenMatrix,
    eps: f64,
) -> Vec<f64> {
    if queries.is_empty() {
        return vec![0.0; tokens.rows()];
    }
    let qnorms = kernels::row_norms(queries);
    let dir = kernels::mean_direction(queries, &qnorms, eps);
    kernels::mean_cosines(tokens, norms, &dir, eps)
}

pub fn composite_score(
    tokens: &TokenMatrix,
    queries: &TokenMatrix,
    eps: f64,
) -> Result<CompositeScores> {
    let saliency = l1_saliency(tokens)?;
    let relevance = query_relevance(tokens, queries, eps)?;
    let saliency_norm = minmax_normalize(&saliency, eps)?;
    let relevance_norm = minmax_normalize(&relevance, eps)?;
    let scores = saliency_norm
        .iter()
        .zip(relevance_norm.iter())
        .map(|(a, b)| a + b)
        .collect::<Vec<_>>()
        .into();
    Ok(CompositeScores {
        scores,
        saliency_norm,
        relevance_norm,
    })
}

/// Orders `(score, index)` pairs by descending score, then ascending index.
#[inline]
pub(crate) fn rank_order(scores: &[f64], a: usize, b: usize) -> Ordering {
    scores[b].total_cmp(&scores[a]).then(a.cmp(&b))
}

/// Positions of the `k` best scores, best first.
pub(crate) fn top_k_ranked(scores: &[f64], k: usize) -> Vec<usize> {
    let k = k.min(scores.len());
    let mut order: Vec<usize> = (0..scores.len()).collect();
    if k == 0 {
        return Vec::new();
    }
    if k < order.len() {
        order.select_nth_unstable_by(k - 1, |&a, &b| rank_order(scores, a, b));
        order.truncate(k);
    }
    order.sort_unstable_by(|&a, &b| rank_order(scores, a, b));
    order
}

/// The `min(k, N)` highest-scoring indices, returned in ascending index order.
pub fn select_focal(scores: &[f64], k: usize) -> Result<IndexSet> {
    if scores.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(IndexSet::from_unsorted(top_k_ranked(scores, k)))
}

/// Scores every token and selects the top-`k` focal set.
pub fn identify_focus(
    tokens: &TokenMatrix,
    queries: &TokenMatrix,
    k: usize,
    eps: f64,
) -> Result<FocalSelection> {
    let CompositeScores {
        scores,
        saliency_norm,
        relevance_norm,
    } = composite_score(tokens, queries, eps)?;
    let focal = select_focal(&scores, k)?;
    Ok(FocalSelection {
        focal,
        scores,
        saliency_norm,
        relevance_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f32]]) -> TokenMatrix {
        TokenMatrix::from_rows(rows).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn minmax_examples() {
        close(
            &minmax_normalize(&[1.0, 3.0, 5.0], DEFAULT_EPS).unwrap(),
            &[0.0, 0.5, 1.0],
            0.0,
        );
        close(
            &minmax_normalize(&[2.0, 2.0, 2.0], DEFAULT_EPS).unwrap(),
            &[0.0; 3],
            0.0,
        );
        close(&minmax_normalize(&[7.0], DEFAULT_EPS).unwrap(), &[0.0], 0.0);
        assert!(matches!(
            minmax_normalize(&[], DEFAULT_EPS),
            Err(Error::EmptyInput)
        ));
    }

    #[test]
    fn l1_examples() {
        let s = l1_saliency(&m(&[&[1.0, -2.0], &[0.0, 0.0], &[3.0, 4.0]])).unwrap();
        close(&s, &[3.0, 0.0, 7.0], 0.0);
        close(&l1_saliency(&m(&[&[0.0; 5]])).unwrap(), &[0.0], 0.0);
        close(
            &l1_saliency(&m(&[&[-1.0, -1.0], &[1.0, 1.0]])).unwrap(),
            &[2.0, 2.0],
            0.0,
        );
        assert!(matches!(
            l1_saliency(&TokenMatrix::empty(2).unwrap()),
            Err(Error::EmptyInput)
        ));
    }

    #[test]
    fn relevance_examples() {
        let r = query_relevance(
            &m(&[&[1.0, 0.0]]),
            &m(&[&[1.0, 0.0], &[0.0, 1.0]]),
            DEFAULT_EPS,
        )
        .unwrap();
        close(&r, &[0.5], 1e-12);
        let r = query_relevance(&m(&[&[0.0, 0.0]]), &m(&[&[1.0, 3.0]]), DEFAULT_EPS).unwrap();
        close(&r, &[0.0], 0.0);
        let r = query_relevance(&m(&[&[1.0, 1.0]]), &m(&[&[1.0, 0.0]]), DEFAULT_EPS).unwrap();
        close(&r, &[std::f64::consts::FRAC_1_SQRT_2], 1e-12);
        let r = query_relevance(
            &m(&[&[1.0, 1.0]]),
            &TokenMatrix::empty(2).unwrap(),
            DEFAULT_EPS,
        )
        .unwrap();
        close(&r, &[0.0], 0.0);
        assert!(matches!(
            query_relevance(&m(&[&[1.0, 1.0]]), &m(&[&[1.0, 0.0, 0.0]]), DEFAULT_EPS),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn composite_examples() {
        let c = composite_score(
            &m(&[&[2.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]]),
            &m(&[&[1.0, 0.0]]),
            DEFAULT_EPS,
        )
        .unwrap();
        close(
            &c.scores,
            &[2.0, 0.0, 1.0 + std::f64::consts::FRAC_1_SQRT_2],
            1e-12,
        );
        close(&c.saliency_norm, &[1.0, 0.0, 1.0], 1e-12);

        let same = m(&[&[0.3, -0.2], &[0.3, -0.2], &[0.3, -0.2]]);
        let c = composite_score(&same, &m(&[&[1.0, 1.0]]), DEFAULT_EPS).unwrap();
        close(&c.scores, &[0.0; 3], 0.0);

        let c = composite_score(&m(&[&[4.0, 1.0]]), &m(&[&[1.0, 1.0]]), DEFAULT_EPS).unwrap();
        close(&c.scores, &[0.0], 0.0);
    }

    #[test]
    fn select_examples() {
        assert_eq!(select_focal(&[0.9, 0.5, 0.9], 1).unwrap().indices(), &[0]);
        assert_eq!(
            select_focal(&[0.5, 0.9, 0.9, 0.1], 2).unwrap().indices(),
            &[1, 2]
        );
        assert_eq!(
            select_focal(&[0.1, 0.2, 0.3], 5).unwrap().indices(),
            &[0, 1, 2]
        );
        assert!(matches!(select_focal(&[], 3), Err(Error::EmptyInput)));
    }

    #[test]
    fn ranked_top_k_breaks_ties_by_index() {
        let s = [1.0, 3.0, 3.0, 2.0, 3.0];
        assert_eq!(top_k_ranked(&s, 4), vec![1, 2, 4, 3]);
        assert_eq!(top_k_ranked(&s, 0), Vec::<usize>::new());
    }
}
