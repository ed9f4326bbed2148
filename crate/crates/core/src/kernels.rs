//! Dense vector kernels shared by the scoring stages.
//!
//! Every mean-of-cosines quantity in the pipeline has the form
//! `mean_j cos(x, y_j)`. With unit directions `u_j = y_j / |y_j|` this equals
//! `dot(x, mean_j u_j) / |x|`, which turns an `O(n·m·d)` double loop into
//! `O((n + m)·d)`. Rows whose L2 norm falls below `eps` have cosine 0 with
//! everything, so they contribute nothing to the mean direction but still
//! count in its denominator.

use crate::tensor_io::TokenMatrix;

/// Accumulates with four independent lanes so the adds pipeline.
#[inline]
fn lanes<F: Fn(usize) -> f64>(len: usize, term: F) -> f64 {
    let mut acc = [0.0f64; 4];
    let body = len - len % 4;
    let mut i = 0;
    while i < body {
        acc[0] += term(i);
        acc[1] += term(i + 1);
        acc[2] += term(i + 2);
        acc[3] += term(i + 3);
        i += 4;
    }
    for j in body..len {
        acc[0] += term(j);
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3])
}

#[inline]
pub(crate) fn dot(a: &[f32], b: &[f32]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    lanes(a.len(), |i| a[i] as f64 * b[i] as f64)
}

#[inline]
pub(crate) fn dot_mixed(a: &[f32], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    lanes(a.len(), |i| a[i] as f64 * b[i])
}

#[inline]
pub(crate) fn l1(a: &[f32]) -> f64 {
    lanes(a.len(), |i| (a[i] as f64).abs())
}

#[inline]
pub(crate) fn l2(a: &[f32]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub(crate) fn squared_distance(a: &[f32], b: &[f32]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    lanes(a.len(), |i| {
        let t = a[i] as f64 - b[i] as f64;
        t * t
    })
}

pub(crate) fn row_norms(m: &TokenMatrix) -> Vec<f64> {
    m.iter_rows().map(l2).collect()
}

/// `cos(a, b)` with the zero-norm convention; norms supplied by the caller.
#[cfg(test)]
pub(crate) fn cosine_with_norms(a: &[f32], na: f64, b: &[f32], nb: f64, eps: f64) -> f64 {
    if na < eps || nb < eps {
        0.0
    } else {
        dot(a, b) / (na * nb)
    }
}

/// `(1/m) · sum_j y_j / |y_j|` over the rows of `m`, skipping rows with norm `< eps`.
pub(crate) fn mean_direction(m: &TokenMatrix, norms: &[f64], eps: f64) -> Vec<f64> {
    let mut dir = vec![0.0f64; m.cols()];
    if m.is_empty() {
        return dir;
    }
    for (row, &n) in m.iter_rows().zip(norms) {
        if n < eps {
            continue;
        }
        let inv = 1.0 / n;
        for (acc, &v) in dir.iter_mut().zip(row) {
            *acc += v as f64 * inv;
        }
    }
    let scale = 1.0 / m.rows() as f64;
    dir.iter_mut().for_each(|v| *v *= scale);
    dir
}

/// `mean_j cos(x_i, y_j)` for every row `x_i`, given the mean direction of the `y_j`.
pub(crate) fn mean_cosines(m: &TokenMatrix, norms: &[f64], dir: &[f64], eps: f64) -> Vec<f64> {
    m.iter_rows()
        .zip(norms)
        .map(|(row, &n)| {
            if n < eps {
                0.0
            } else {
                dot_mixed(row, dir) / n
            }
        })
        .collect()
}
