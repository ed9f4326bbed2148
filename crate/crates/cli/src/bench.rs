//! Stage timings of `prune` over synthetic Gaussian inputs.
//!
//! One CSV row per size: `n,d,q,n_target,reps,fim_us,cassm_us,total_us`.
//! Each timing column is the median over `reps` runs, taken independently per
//! column; for an even count the lower of the two middle values is reported.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Duration;

use clap::Args;
use tokenprune_core::rng::SplitMix64;
use tokenprune_core::{prune, ReductionConfig, TokenMatrix};

use crate::error::CliError;

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Comma-separated `NxD` shapes.
    #[arg(long, default_value = "576x4096,2880x4096")]
    pub sizes: String,
    /// Query rows per instance.
    #[arg(long, default_value_t = 32)]
    pub queries: usize,
    /// Tokens kept per instance (clamped to N).
    #[arg(long, conflicts_with = "keep_ratio")]
    pub n_target: Option<usize>,
    #[arg(long, default_value_t = 1.0 / 9.0)]
    pub keep_ratio: f64,
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub const CSV_HEADER: &str = "n,d,q,n_target,reps,fim_us,cassm_us,total_us";

fn parse_sizes(text: &str) -> Result<Vec<(usize, usize)>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let parsed = s
                .split_once('x')
                .and_then(|(n, d)| Some((n.parse().ok()?, d.parse().ok()?)));
            match parsed {
                Some((n, d)) if n > 0 && d > 0 => Ok((n, d)),
                _ => Err(CliError::validation(format!(
                    "bad size {s:?}, expected NxD"
                ))),
            }
        })
        .collect()
}

fn gaussian(rows: usize, cols: usize, rng: &mut SplitMix64) -> Result<TokenMatrix, CliError> {
    let data = (0..rows * cols).map(|_| rng.gaussian() as f32).collect();
    Ok(TokenMatrix::new(rows, cols, data)?)
}

fn median_us(mut values: Vec<Duration>) -> u128 {
    values.sort_unstable();
    values[(values.len() - 1) / 2].as_micros()
}

pub fn run(args: BenchArgs) -> Result<(), CliError> {
    if args.reps == 0 {
        return Err(CliError::validation("--reps must be at least 1"));
    }
    let sizes = parse_sizes(&args.sizes)?;
    if sizes.is_empty() {
        return Err(CliError::validation("--sizes is empty"));
    }
    let mut rng = SplitMix64::new(args.seed);
    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for (n, d) in sizes {
        let tokens = gaussian(n, d, &mut rng)?;
        let queries = gaussian(args.queries, d, &mut rng)?;
        let config = match args.n_target {
            Some(t) => ReductionConfig::with_n_target(t.min(n)),
            None => ReductionConfig::with_keep_ratio(args.keep_ratio),
        };
        let n_target = config.resolve_budget(n)?;
        let mut fim = Vec::with_capacity(args.reps);
        let mut cassm = Vec::with_capacity(args.reps);
        let mut total = Vec::with_capacity(args.reps);
        for _ in 0..args.reps {
            let r = prune(&tokens, &queries, &config)?;
            fim.push(r.timings.fim);
            cassm.push(r.timings.cassm);
            total.push(r.timings.total);
        }
        let (f, c, t) = (median_us(fim), median_us(cassm), median_us(total));
        eprintln!("{n}x{d}: total {t} us (median of {})", args.reps);
        writeln!(
            csv,
            "{n},{d},{},{n_target},{},{f},{c},{t}",
            args.queries, args.reps
        )
        .expect("writing to a String");
    }
    crate::emit(&csv, args.out.as_deref())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_parse() {
        assert_eq!(
            parse_sizes("2880x4096, 8x2").unwrap(),
            vec![(2880, 4096), (8, 2)]
        );
        assert!(parse_sizes("2880").is_err());
        assert!(parse_sizes("0x4").is_err());
    }

    #[test]
    fn median_is_lower_middle() {
        let us = |v: &[u64]| {
            v.iter()
                .map(|&x| Duration::from_micros(x))
                .collect::<Vec<_>>()
        };
        assert_eq!(median_us(us(&[5])), 5);
        assert_eq!(median_us(us(&[9, 1, 5])), 5);
        assert_eq!(median_us(us(&[4, 1, 3, 2])), 2);
    }
}
