use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use tokenprune_core::diagnostics::{self, baseline_select, Baseline};
use tokenprune_core::{
    oracle, synth, tensor_io, FlopsReport, IndexSet, ResultDocument, TokenMatrix,
};

use crate::error::CliError;
use crate::flops_spec::FlopsSpec;

/// Key under which the pruner's own selection is reported.
const PRUNER_KEY: &str = "focus_context";

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    /// The token matrix the result was computed from.
    #[arg(long)]
    pub tokens: PathBuf,
    /// Result JSON written by `prune`.
    #[arg(long)]
    pub result: PathBuf,
    /// Query matrix, needed by `relevance_topk` and `--with-oracle`.
    #[arg(long)]
    pub queries: Option<PathBuf>,
    /// labels.json with one cluster id per token (-1 = background).
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Transformer dimensions, e.g. `d=4096,m=11008,T=32,R=2,text=0` or `llava-1.5-7b`.
    #[arg(long)]
    pub flops: Option<String>,
    /// `all` or a comma-separated list of baseline names.
    #[arg(long)]
    pub baselines: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Re-run the brute-force reference pipeline and compare (small inputs only).
    #[arg(long)]
    pub with_oracle: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct MethodReport {
    radius: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    recall: Option<f64>,
}

#[derive(Debug, Serialize)]
struct OracleReport {
    retained_match: bool,
    oracle_retained: Vec<usize>,
}

#[derive(Debug, Serialize)]
struct Report {
    n: usize,
    retained: usize,
    radius: f64,
    worst_discarded: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    flops: Option<FlopsReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    recall_by_method: Option<BTreeMap<String, f64>>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    methods: BTreeMap<String, MethodReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<OracleReport>,
}

fn parse_baselines(text: &str) -> Result<Vec<Baseline>, CliError> {
    if text.trim() == "all" {
        return Ok(Baseline::ALL.to_vec());
    }
    let mut out: Vec<Baseline> = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(CliError::from))
        .collect::<Result<_, _>>()?;
    out.sort();
    out.dedup();
    Ok(out)
}

pub fn run(args: DiagnoseArgs) -> Result<(), CliError> {
    let tokens = tensor_io::read_matrix(&args.tokens).map_err(|e| CliError::at(&args.tokens, e))?;
    let text = fs::read_to_string(&args.result).map_err(|e| CliError::io(&args.result, e))?;
    let doc = ResultDocument::from_json(&text).map_err(|e| CliError::at(&args.result, e))?;
    if doc.n != tokens.rows() || doc.d != tokens.cols() {
        return Err(CliError::validation(format!(
            "result describes {}x{} tokens but {} holds {}x{}",
            doc.n,
            doc.d,
            args.tokens.display(),
            tokens.rows(),
            tokens.cols()
        )));
    }
    let retained = doc.retained_set()?;
    let coverage = diagnostics::coverage_radius(&tokens, &retained)?;

    let queries = match &args.queries {
        Some(path) => Some(tensor_io::read_matrix(path).map_err(|e| CliError::at(path, e))?),
        None if doc.query_absent => Some(TokenMatrix::empty(tokens.cols())?),
        None => None,
    };
    let labels = match &args.labels {
        Some(path) => {
            let labels = synth::read_labels(path).map_err(|e| CliError::at(path, e))?;
            if labels.len() != tokens.rows() {
                return Err(CliError::validation(format!(
                    "{} has {} labels for {} tokens",
                    path.display(),
                    labels.len(),
                    tokens.rows()
                )));
            }
            Some(labels)
        }
        None => None,
    };
    let flops = match &args.flops {
        Some(spec) => Some(
            FlopsSpec::parse(spec)?
                .model(tokens.rows(), retained.len())
                .report()?,
        ),
        None => None,
    };

    let baselines = match &args.baselines {
        Some(list) => parse_baselines(list)?,
        None => Vec::new(),
    };
    let mut selections: Vec<(String, IndexSet)> = vec![(PRUNER_KEY.to_string(), retained.clone())];
    for method in &baselines {
        let q = match (&queries, method) {
            (Some(q), _) => q.clone(),
            (None, Baseline::RelevanceTopk) => {
                return Err(CliError::validation("relevance_topk needs --queries"))
            }
            (None, _) => TokenMatrix::empty(tokens.cols())?,
        };
        let set = baseline_select(*method, &tokens, &q, retained.len(), args.seed)?;
        selections.push((method.name().to_string(), set));
    }

    let recall_by_method = match &labels {
        Some(labels) => Some(
            selections
                .iter()
                .map(|(name, set)| Ok((name.clone(), diagnostics::subject_recall(labels, set)?)))
                .collect::<Result<BTreeMap<_, _>, CliError>>()?,
        ),
        None => None,
    };
    let mut methods = BTreeMap::new();
    if !baselines.is_empty() {
        for (name, set) in &selections {
            let radius = diagnostics::coverage_radius(&tokens, set)?.radius;
            let recall = recall_by_method.as_ref().map(|r| r[name]);
            methods.insert(name.clone(), MethodReport { radius, recall });
        }
    }

    let oracle = if args.with_oracle {
        let q = queries
            .as_ref()
            .ok_or_else(|| CliError::validation("--with-oracle needs --queries"))?;
        let reference = oracle::naive_pipeline(&tokens, q, &doc.config)?;
        Some(OracleReport {
            retained_match: reference == retained,
            oracle_retained: reference.into_inner(),
        })
    } else {
        None
    };

    let report = Report {
        n: tokens.rows(),
        retained: retained.len(),
        radius: coverage.radius,
        worst_discarded: coverage.worst_discarded,
        flops,
        recall_by_method,
        methods,
        oracle,
    };
    let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
    json.push('\n');
    crate::emit(&json, args.out.as_deref())
}
