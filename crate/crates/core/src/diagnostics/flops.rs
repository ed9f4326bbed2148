//! Analytical prefill cost of a transformer that drops tokens after layer `R`.
//!
//! Per layer, a sequence of length `n` costs `4nd² + 2n²d + 2ndm` FLOPs
//! (attention projections, attention scores and values, FFN). The first `R`
//! layers run at the full length and the remaining `T - R` at the reduced one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlopsModel {
    pub d_model: usize,
    pub m_ffn: usize,
    pub layers_total: usize,
    pub reduce_layer: usize,
    pub n_full: usize,
    pub n_reduced: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlopsReport {
    pub full: f64,
    pub pruned: f64,
    pub ratio: f64,
}

impl FlopsReport {
    pub fn reduction(&self) -> f64 {
        1.0 - self.ratio
    }
}

impl FlopsModel {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidModel(m));
        if self.d_model == 0 || self.m_ffn == 0 || self.layers_total == 0 {
            return fail("d_model, m_ffn and layers_total must be positive".into());
        }
        if self.reduce_layer == 0 || self.reduce_layer > self.layers_total {
            return fail(format!(
                "reduce_layer {} outside [1, {}]",
                self.reduce_layer, self.layers_total
            ));
        }
        if self.n_full == 0 || self.n_reduced == 0 {
            return fail("sequence lengths must be positive".into());
        }
        if self.n_reduced > self.n_full {
            return fail(format!(
                "n_reduced {} exceeds n_full {}",
                self.n_reduced, self.n_full
            ));
        }
        Ok(())
    }

    /// FLOPs of one layer over a sequence of length `n`.
    pub fn layer_cost(&self, n: usize) -> f64 {
        let (n, d, m) = (n as f64, self.d_model as f64, self.m_ffn as f64);
        4.0 * n * d * d + 2.0 * n * n * d + 2.0 * n * d * m
    }

    /// The same model without any reduction.
    pub fn unpruned(&self) -> Self {
        Self {
            n_reduced: self.n_full,
            ..*self
        }
    }

    pub fn report(&self) -> Result<FlopsReport> {
        let pruned = flops_total(self)?;
        let full = flops_total(&self.unpruned())?;
        Ok(FlopsReport {
            full,
            pruned,
            ratio: pruned / full,
        })
    }
}

pub fn flops_total(model: &FlopsModel) -> Result<f64> {
    model.validate()?;
    let r = model.reduce_layer as f64;
    let rest = (model.layers_total - model.reduce_layer) as f64;
    Ok(r * model.layer_cost(model.n_full) + rest * model.layer_cost(model.n_reduced))
}
