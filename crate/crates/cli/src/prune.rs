use std::path::PathBuf;

use clap::{ArgGroup, Args};
use tokenprune_core::pruner::{self, DEFAULT_FOCAL_K, DEFAULT_LAYER_HINT};
use tokenprune_core::{fim, tensor_io, ReductionConfig, ResultDocument, ScanOrder, TokenMatrix};

use crate::error::CliError;

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("query").required(true).args(["queries", "no_query"])))]
#[command(group(ArgGroup::new("budget").required(true).args(["n_target", "keep_ratio"])))]
pub struct PruneArgs {
    /// Visual tokens, N x d float32 NPY.
    #[arg(long)]
    pub tokens: PathBuf,
    /// Query tokens, Q x d float32 NPY.
    #[arg(long)]
    pub queries: Option<PathBuf>,
    /// Score without a query.
    #[arg(long)]
    pub no_query: bool,
    /// Number of tokens to keep.
    #[arg(long)]
    pub n_target: Option<usize>,
    /// Fraction of tokens to keep, resolved as max(1, round(ratio * N)).
    #[arg(long)]
    pub keep_ratio: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_FOCAL_K)]
    pub focal_k: usize,
    #[arg(long, default_value_t = ScanOrder::Ranked)]
    pub scan_order: ScanOrder,
    #[arg(long)]
    pub normalize_utility: bool,
    #[arg(long)]
    pub invert_delta: bool,
    #[arg(long, default_value_t = fim::DEFAULT_EPS)]
    pub eps: f64,
    /// Layer the activations were taken from (recorded only).
    #[arg(long, default_value_t = DEFAULT_LAYER_HINT)]
    pub layer_hint: usize,
    /// Result JSON path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Accepted for symmetry with other commands; pruning is deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl PruneArgs {
    fn config(&self) -> ReductionConfig {
        ReductionConfig {
            n_target: self.n_target,
            keep_ratio: self.keep_ratio,
            focal_k: self.focal_k,
            eps: self.eps,
            scan_order: self.scan_order,
            normalize_utility: self.normalize_utility,
            invert_delta: self.invert_delta,
            layer_hint: self.layer_hint,
        }
    }
}

pub fn run(args: PruneArgs) -> Result<(), CliError> {
    let config = args.config();
    if let Some(out) = &args.out {
        pruner::prune_file(&args.tokens, args.queries.as_deref(), &config, out)?;
        return Ok(());
    }
    let tokens = tensor_io::read_matrix(&args.tokens).map_err(|e| CliError::at(&args.tokens, e))?;
    let queries = match &args.queries {
        Some(path) => tensor_io::read_matrix(path).map_err(|e| CliError::at(path, e))?,
        None => TokenMatrix::empty(tokens.cols())?,
    };
    let result = tokenprune_core::prune(&tokens, &queries, &config)?;
    let doc = ResultDocument::new(&result, &tokens, &queries, args.queries.is_none());
    crate::emit(&doc.to_json()?, None)
}
