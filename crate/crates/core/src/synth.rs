//! Deterministic multi-subject token fields with ground-truth labels.
//!
//! Generation consumes one [`SplitMix64`] stream in a fixed order:
//!
//! 1. For each cluster, `d` Gaussians normalized to a unit center
//!    (redrawn in the vanishing case of a zero vector).
//! 2. For each cluster, `tokens_per_cluster` rows of
//!    `cluster_scale · (center + noise_sigma · g)`, one Gaussian per coordinate.
//! 3. `n_background` rows of `g / sqrt(d)`, so background rows have norm near 1.
//! 4. `n_queries` rows of `center[query_cluster] + noise_sigma · g`.
//! 5. If `shuffle` is set, a Fisher-Yates permutation of token rows (labels follow).
//!
//! Values are computed in `f64` and rounded to `f32` once.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::tensor_io::{self, TokenMatrix};

/// Label for tokens that belong to no subject.
pub const BACKGROUND: i64 = -1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneParams {
    pub n_clusters: usize,
    pub tokens_per_cluster: usize,
    pub n_background: usize,
    pub d: usize,
    pub cluster_scale: f64,
    pub noise_sigma: f64,
    pub query_cluster: usize,
    pub n_queries: usize,
    pub shuffle: bool,
    pub seed: u64,
}

impl Default for SceneParams {
    fn default() -> Self {
        Self {
            n_clusters: 4,
            tokens_per_cluster: 24,
            n_background: 64,
            d: 32,
            cluster_scale: 4.0,
            noise_sigma: 0.1,
            query_cluster: 0,
            n_queries: 4,
            shuffle: true,
            seed: 0,
        }
    }
}

impl SceneParams {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidParams(msg));
        if self.n_clusters == 0 {
            return fail("n_clusters must be at least 1".into());
        }
        if self.d < 2 {
            return fail(format!("d must be at least 2, got {}", self.d));
        }
        if self.tokens_per_cluster == 0 {
            return fail("tokens_per_cluster must be at least 1".into());
        }
        if !(self.cluster_scale.is_finite() && self.cluster_scale > 1.0) {
            return fail(format!(
                "cluster_scale must exceed 1, got {}",
                self.cluster_scale
            ));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return fail(format!(
                "noise_sigma must be non-negative, got {}",
                self.noise_sigma
            ));
        }
        if self.query_cluster >= self.n_clusters {
            return fail(format!(
                "query_cluster {} out of range for {} clusters",
                self.query_cluster, self.n_clusters
            ));
        }
        Ok(())
    }

    pub fn n_tokens(&self) -> usize {
        self.n_clusters * self.tokens_per_cluster + self.n_background
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene {
    pub tokens: TokenMatrix,
    pub queries: TokenMatrix,
    /// Cluster id per token row, [`BACKGROUND`] for background.
    pub labels: Vec<i64>,
    pub params: SceneParams,
}

pub fn generate(params: &SceneParams) -> Result<SyntheticScene> {
    params.validate()?;
    let d = params.d;
    let mut rng = SplitMix64::new(params.seed);

    let centers: Vec<Vec<f64>> = (0..params.n_clusters)
        .map(|_| loop {
            let v: Vec<f64> = (0..d).map(|_| rng.gaussian()).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                break v.into_iter().map(|x| x / norm).collect();
            }
        })
        .collect();

    let n = params.n_tokens();
    let mut rows: Vec<(Vec<f32>, i64)> = Vec::with_capacity(n);
    for (k, center) in centers.iter().enumerate() {
        for _ in 0..params.tokens_per_cluster {
            let row = center
                .iter()
                .map(|&c| (params.cluster_scale * (c + params.noise_sigma * rng.gaussian())) as f32)
                .collect();
            rows.push((row, k as i64));
        }
    }
    let bg_scale = 1.0 / (d as f64).sqrt();
    for _ in 0..params.n_background {
        let row = (0..d).map(|_| (rng.gaussian() * bg_scale) as f32).collect();
        rows.push((row, BACKGROUND));
    }
    let qc = &centers[params.query_cluster];
    let mut qdata = Vec::with_capacity(params.n_queries * d);
    for _ in 0..params.n_queries {
        qdata.extend(
            qc.iter()
                .map(|&c| (c + params.noise_sigma * rng.gaussian()) as f32),
        );
    }
    if params.shuffle {
        rng.shuffle(&mut rows);
    }

    let mut data = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for (row, label) in rows {
        data.extend_from_slice(&row);
        labels.push(label);
    }
    Ok(SyntheticScene {
        tokens: TokenMatrix::new(n, d, data)?,
        queries: TokenMatrix::new(params.n_queries, d, qdata)?,
        labels,
        params: params.clone(),
    })
}

/// Writes `tokens.npy`, `queries.npy`, `labels.json` and `params.json` into `dir`.
pub fn write_scene(scene: &SyntheticScene, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    tensor_io::write_matrix(&scene.tokens, dir.join("tokens.npy"))?;
    tensor_io::write_matrix(&scene.queries, dir.join("queries.npy"))?;
    fs::write(
        dir.join("labels.json"),
        serde_json::to_string(&scene.labels)? + "\n",
    )?;
    fs::write(
        dir.join("params.json"),
        serde_json::to_string_pretty(&scene.params)? + "\n",
    )?;
    Ok(())
}

/// Reads a `labels.json` array.
pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<i64>> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}
