//! Subject-first visual token reduction.
//!
//! The pipeline keeps a budget of `Ñ` rows out of an `N x d` token matrix in
//! two stages. [`fim`] scores every token by normalized L1 saliency plus
//! normalized query relevance and keeps the top-K as focal tokens. [`cassm`]
//! then ranks the remaining candidates by contextual utility and samples them
//! with a stride driven by their structural divergence from the focal set.
//! [`pruner::prune`] runs both.
//!
//! [`diagnostics`] measures what a reduction gave up (coverage radius,
//! Hausdorff distance, subject recall, analytical FLOPs), [`synth`] builds
//! labelled test scenes, and [`oracle`] holds slow reference implementations.

pub mod cassm;
pub mod diagnostics;
pub mod error;
pub mod fim;
mod kernels;
pub mod oracle;
pub mod pruner;
pub mod rng;
pub mod synth;
pub mod tensor_io;

pub use cassm::{ScanOptions, ScanOrder, ScanResult};
pub use diagnostics::{Baseline, CoverageReport, FlopsModel, FlopsReport};
pub use error::{Error, Result};
pub use fim::FocalSelection;
pub use pruner::{prune, ReductionConfig, ReductionResult, ResultDocument};
pub use synth::{SceneParams, SyntheticScene};
pub use tensor_io::{IndexSet, ScoreVector, TokenMatrix};

/// Library version, mirrored by the CLI and any bindings.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
