//! Brute-force references for the optimized pipeline.
//!
//! Nothing here calls into `fim`, `cassm`, `pruner`, `diagnostics` or the
//! shared kernels; only the I/O types are shared. Every mean of cosines is an
//! explicit double loop and every ranking is a selection sort, so the cost is
//! `O(N²·d)` and these functions are meant for inputs of a few hundred rows.

use crate::cassm::ScanOrder;
use crate::error::{Error, Result};
use crate::pruner::ReductionConfig;
use crate::tensor_io::{IndexSet, TokenMatrix};

fn row_f64(m: &TokenMatrix, i: usize) -> Vec<f64> {
    m.row(i).iter().map(|&v| v as f64).collect()
}

fn norm2(v: &[f64]) -> f64 {
    let mut s = 0.0;
    for x in v {
        s += x * x;
    }
    s.sqrt()
}

fn cosine(a: &[f64], b: &[f64], eps: f64) -> f64 {
    let (na, nb) = (norm2(a), norm2(b));
    if na < eps || nb < eps {
        return 0.0;
    }
    let mut dot = 0.0;
    for k in 0..a.len() {
        dot += a[k] * b[k];
    }
    dot / (na * nb)
}

fn mean_cos_to(x: &[f64], set: &[Vec<f64>], eps: f64) -> f64 {
    if set.is_empty() {
        return 0.0;
    }
    let mut total = 0.0;
    for y in set {
        total += cosine(x, y, eps);
    }
    total / set.len() as f64
}

fn phi(v: &[f64], eps: f64) -> Vec<f64> {
    let mut lo = v[0];
    let mut hi = v[0];
    for &x in v {
        if x < lo {
            lo = x;
        }
        if x > hi {
            hi = x;
        }
    }
    let denom = if hi - lo > eps { hi - lo } else { eps };
    v.iter().map(|&x| (x - lo) / denom).collect()
}

/// Positions of `scores` from best to worst; ties to the smaller position.
fn selection_rank(scores: &[f64], take: usize) -> Vec<usize> {
    let mut used = vec![false; scores.len()];
    let mut out = Vec::new();
    for _ in 0..take.min(scores.len()) {
        let mut best: Option<usize> = None;
        for i in 0..scores.len() {
            if used[i] {
                continue;
            }
            match best {
                None => best = Some(i),
                Some(b) if scores[i] > scores[b] => best = Some(i),
                _ => {}
            }
        }
        let b = best.unwrap();
        used[b] = true;
        out.push(b);
    }
    out
}

/// Composite focus score by literal transcription.
pub fn naive_composite(tokens: &TokenMatrix, queries: &TokenMatrix, eps: f64) -> Result<Vec<f64>> {
    if tokens.is_empty() {
        return Err(Error::EmptyInput);
    }
    if tokens.cols() != queries.cols() {
        return Err(Error::DimensionMismatch {
            expected: tokens.cols(),
            found: queries.cols(),
        });
    }
    let qs: Vec<Vec<f64>> = (0..queries.rows()).map(|j| row_f64(queries, j)).collect();
    let mut l1 = Vec::new();
    let mut rel = Vec::new();
    for i in 0..tokens.rows() {
        let x = row_f64(tokens, i);
        let mut s = 0.0;
        for v in &x {
            s += v.abs();
        }
        l1.push(s);
        rel.push(mean_cos_to(&x, &qs, eps));
    }
    let a = phi(&l1, eps);
    let b = phi(&rel, eps);
    Ok((0..a.len()).map(|i| a[i] + b[i]).collect())
}

/// Every intermediate of the reference pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct NaiveTrace {
    pub n_target: usize,
    pub composite: Vec<f64>,
    pub focal: Vec<usize>,
    pub candidates: Vec<usize>,
    pub dependency: Vec<f64>,
    pub utility: Vec<f64>,
    pub divergence: Vec<f64>,
    pub delta: f64,
    pub stride: usize,
    pub context: Vec<usize>,
    pub retained: Vec<usize>,
}

pub fn naive_trace(
    tokens: &TokenMatrix,
    queries: &TokenMatrix,
    config: &ReductionConfig,
) -> Result<NaiveTrace> {
    let n = tokens.rows();
    let eps = config.eps;
    if config.focal_k == 0 {
        return Err(Error::InvalidConfig("focal_k must be at least 1".into()));
    }
    let n_target = match (config.n_target, config.keep_ratio) {
        (Some(t), None) => t,
        (None, Some(r)) if r > 0.0 && r <= 1.0 => {
            let t = (r * n as f64).round() as usize;
            if t < 1 {
                1
            } else {
                t
            }
        }
        (None, Some(r)) => return Err(Error::BudgetInvalid(format!("keep_ratio {r}"))),
        _ => {
            return Err(Error::InvalidConfig(
                "exactly one budget form required".into(),
            ))
        }
    };
    if n_target < 1 || n_target > n {
        return Err(Error::BudgetInvalid(format!(
            "n_target {n_target} for {n} tokens"
        )));
    }

    let composite = naive_composite(tokens, queries, eps)?;
    let k = if config.focal_k < n_target {
        config.focal_k
    } else {
        n_target
    };
    let mut focal = selection_rank(&composite, k);
    focal.sort();

    let candidates: Vec<usize> = (0..n).filter(|i| !focal.contains(i)).collect();
    let fs: Vec<Vec<f64>> = focal.iter().map(|&i| row_f64(tokens, i)).collect();
    let cs: Vec<Vec<f64>> = candidates.iter().map(|&i| row_f64(tokens, i)).collect();
    let qs: Vec<Vec<f64>> = (0..queries.rows()).map(|j| row_f64(queries, j)).collect();

    let mut dependency = Vec::new();
    let mut relevance = Vec::new();
    let mut divergence = Vec::new();
    for c in &cs {
        let to_focal = mean_cos_to(c, &fs, eps);
        let mut dissim = 0.0;
        for z in &cs {
            dissim += 1.0 - cosine(c, z, eps);
        }
        dissim /= cs.len() as f64;
        dependency.push(to_focal + dissim);
        relevance.push(mean_cos_to(c, &qs, eps));
        let exponent = if config.invert_delta {
            to_focal
        } else {
            -to_focal
        };
        divergence.push(exponent.exp());
    }
    let utility: Vec<f64> = if cs.is_empty() {
        Vec::new()
    } else if config.normalize_utility {
        let a = phi(&dependency, eps);
        let b = phi(&relevance, eps);
        (0..a.len()).map(|i| a[i] + b[i]).collect()
    } else {
        (0..cs.len())
            .map(|i| dependency[i] + relevance[i])
            .collect()
    };

    let mut delta = 0.0;
    let mut stride = 1;
    let mut context = Vec::new();
    if !cs.is_empty() {
        for v in &divergence {
            delta += v;
        }
        delta /= divergence.len() as f64;
        let raw = ((n_target - focal.len()) as f64 * delta).floor() as usize;
        stride = if raw > 1 { raw } else { 1 };

        let sequence: Vec<usize> = match config.scan_order {
            ScanOrder::Ranked => selection_rank(&utility, utility.len()),
            ScanOrder::Positional => (0..cs.len()).collect(),
        };
        let budget = n_target - focal.len();
        let len = sequence.len();
        let mut taken: Vec<usize> = Vec::new();
        let mut pos = 0;
        while taken.len() < budget && taken.len() < len {
            while taken.contains(&pos) {
                pos = (pos + 1) % len;
            }
            taken.push(pos);
            pos = (pos + stride) % len;
        }
        context = taken.iter().map(|&p| candidates[sequence[p]]).collect();
        context.sort();
    }

    let mut retained = focal.clone();
    retained.extend(&context);
    retained.sort();
    Ok(NaiveTrace {
        n_target,
        composite,
        focal,
        candidates,
        dependency,
        utility,
        divergence,
        delta,
        stride,
        context,
        retained,
    })
}

/// Retained set of the reference pipeline.
pub fn naive_pipeline(
    tokens: &TokenMatrix,
    queries: &TokenMatrix,
    config: &ReductionConfig,
) -> Result<IndexSet> {
    let trace = naive_trace(tokens, queries, config)?;
    IndexSet::new(trace.retained, tokens.rows())
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for k in 0..a.len() {
        s += (a[k] - b[k]) * (a[k] - b[k]);
    }
    s.sqrt()
}

/// Coverage radius by direct enumeration.
pub fn naive_coverage_radius(tokens: &TokenMatrix, retained: &[usize]) -> Result<f64> {
    if retained.is_empty() {
        return Err(Error::EmptyRetained);
    }
    let mut radius = 0.0;
    for i in 0..tokens.rows() {
        if retained.contains(&i) {
            continue;
        }
        let x = row_f64(tokens, i);
        let mut best = f64::INFINITY;
        for &j in retained {
            let dj = dist(&x, &row_f64(tokens, j));
            if dj < best {
                best = dj;
            }
        }
        if best > radius {
            radius = best;
        }
    }
    Ok(radius)
}

/// Evaluates the Lipschitz bound on the family `f_c(X) = max_{x in X} |x - c|_2`.
///
/// Each `f_c` is 1-Lipschitz under the Hausdorff distance, so
/// `lhs = max_c |f_c(all) - f_c(retained)|` never exceeds `rhs`, the
/// coverage radius of `retained`.
pub fn lipschitz_probe(
    tokens: &TokenMatrix,
    retained: &[usize],
    anchors: &TokenMatrix,
) -> Result<(f64, f64)> {
    if retained.is_empty() {
        return Err(Error::EmptyRetained);
    }
    if anchors.is_empty() {
        return Err(Error::EmptyInput);
    }
    if anchors.cols() != tokens.cols() {
        return Err(Error::DimensionMismatch {
            expected: tokens.cols(),
            found: anchors.cols(),
        });
    }
    if retained.iter().any(|&i| i >= tokens.rows()) {
        return Err(Error::InvalidIndexSet("retained index out of range".into()));
    }
    let mut lhs: f64 = 0.0;
    for a in 0..anchors.rows() {
        let c = row_f64(anchors, a);
        let mut f_all: f64 = 0.0;
        for i in 0..tokens.rows() {
            f_all = f_all.max(dist(&row_f64(tokens, i), &c));
        }
        let mut f_kept: f64 = 0.0;
        for &i in retained {
            f_kept = f_kept.max(dist(&row_f64(tokens, i), &c));
        }
        lhs = lhs.max((f_all - f_kept).abs());
    }
    Ok((lhs, naive_coverage_radius(tokens, retained)?))
}
