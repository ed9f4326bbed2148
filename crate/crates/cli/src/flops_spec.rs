//! Parsing for `--flops` arguments.
//!
//! Accepts comma-separated `key=value` pairs (`d`, `m`, `T`, `R`, `text`),
//! optionally led by a preset name whose values the pairs override:
//! `llava-1.5-7b,text=32` or `d=4096,m=11008,T=32,R=2`.

use tokenprune_core::FlopsModel;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlopsSpec {
    pub d_model: usize,
    pub m_ffn: usize,
    pub layers: usize,
    pub reduce_layer: usize,
    pub text_tokens: usize,
}

const PRESETS: &[(&str, FlopsSpec)] = &[
    (
        "llava-1.5-7b",
        FlopsSpec {
            d_model: 4096,
            m_ffn: 11008,
            layers: 32,
            reduce_layer: 2,
            text_tokens: 0,
        },
    ),
    (
        "qwen2.5-vl-7b",
        FlopsSpec {
            d_model: 3584,
            m_ffn: 18944,
            layers: 28,
            reduce_layer: 2,
            text_tokens: 0,
        },
    ),
];

impl FlopsSpec {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut d = None;
        let mut m = None;
        let mut t = None;
        let mut r = None;
        let mut text_tokens = 0;
        for (i, part) in text.split(',').map(str::trim).enumerate() {
            if part.is_empty() {
                continue;
            }
            let Some((key, value)) = part.split_once('=') else {
                let preset = PRESETS
                    .iter()
                    .find(|(name, _)| *name == part)
                    .filter(|_| i == 0)
                    .ok_or_else(|| CliError::validation(format!("unknown --flops entry {part:?}")))?
                    .1;
                d = Some(preset.d_model);
                m = Some(preset.m_ffn);
                t = Some(preset.layers);
                r = Some(preset.reduce_layer);
                text_tokens = preset.text_tokens;
                continue;
            };
            let value: usize = value.trim().parse().map_err(|_| {
                CliError::validation(format!("--flops {key}: not a count: {value:?}"))
            })?;
            match key.trim() {
                "d" => d = Some(value),
                "m" => m = Some(value),
                "T" => t = Some(value),
                "R" => r = Some(value),
                "text" => text_tokens = value,
                other => {
                    return Err(CliError::validation(format!(
                        "unknown --flops key {other:?}"
                    )))
                }
            }
        }
        match (d, m, t, r) {
            (Some(d_model), Some(m_ffn), Some(layers), Some(reduce_layer)) => Ok(Self {
                d_model,
                m_ffn,
                layers,
                reduce_layer,
                text_tokens,
            }),
            _ => Err(CliError::validation(
                "--flops needs d, m, T and R (or a preset name)",
            )),
        }
    }

    pub fn model(&self, n_visual: usize, n_kept: usize) -> FlopsModel {
        FlopsModel {
            d_model: self.d_model,
            m_ffn: self.m_ffn,
            layers_total: self.layers,
            reduce_layer: self.reduce_layer,
            n_full: n_visual + self.text_tokens,
            n_reduced: n_kept + self.text_tokens,
        }
    }
}
