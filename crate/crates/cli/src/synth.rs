use std::path::PathBuf;

use clap::Args;
use tokenprune_core::synth::{self, SceneParams};

use crate::error::CliError;

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 4)]
    pub n_clusters: usize,
    #[arg(long, default_value_t = 24)]
    pub tokens_per_cluster: usize,
    #[arg(long, default_value_t = 64)]
    pub n_background: usize,
    /// Embedding dimension.
    #[arg(long, default_value_t = 32)]
    pub dim: usize,
    #[arg(long, default_value_t = 4.0)]
    pub cluster_scale: f64,
    #[arg(long, default_value_t = 0.1)]
    pub noise_sigma: f64,
    /// Cluster the query rows are drawn around.
    #[arg(long, default_value_t = 0)]
    pub query_cluster: usize,
    #[arg(long, default_value_t = 4)]
    pub n_queries: usize,
    /// Keep rows grouped by cluster instead of shuffling them.
    #[arg(long)]
    pub no_shuffle: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory receiving tokens.npy, queries.npy, labels.json and params.json.
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub fn run(args: SynthArgs) -> Result<(), CliError> {
    let params = SceneParams {
        n_clusters: args.n_clusters,
        tokens_per_cluster: args.tokens_per_cluster,
        n_background: args.n_background,
        d: args.dim,
        cluster_scale: args.cluster_scale,
        noise_sigma: args.noise_sigma,
        query_cluster: args.query_cluster,
        n_queries: args.n_queries,
        shuffle: !args.no_shuffle,
        seed: args.seed,
    };
    let scene = synth::generate(&params)?;
    synth::write_scene(&scene, &args.out_dir).map_err(|e| CliError::at(&args.out_dir, e))?;
    eprintln!(
        "wrote {} tokens x {} dims ({} queries) to {}",
        scene.tokens.rows(),
        scene.tokens.cols(),
        scene.queries.rows(),
        args.out_dir.display()
    );
    Ok(())
}
