//! `camle` command-line front end: score, eval, simulate, sweep.

mod input;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use camle::camle::{score_report, DimensionReport, Method};
use camle::eval::{auc_roc, run_sensitivity_sweep, run_simulation, ParamMads, SimConfig, SweepConfig};
use camle::{Afr, AfrSpec, CamleConfig, KktCase};
use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use serde_json::{json, Value};

use crate::input::{read_scores, read_table, Table};
use crate::output::{write_csv, write_json};

#[derive(Parser, Debug)]
#[command(name = "camle", version, about = "AFR-constrained maximum-likelihood anomaly scoring")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Score every row of a CSV dataset; writes scores.csv and summary.json.
    Score(ScoreArgs),
    /// AUC-ROC of a scores file against a label column.
    Eval(EvalArgs),
    /// Simulation study comparing MLE and CAMLE; writes mad_table.csv.
    Simulate(SimulateArgs),
    /// AUC as a function of the quantile width of the AFR; writes sweep.csv.
    Sweep(SweepArgs),
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    /// Random label draws averaged per dimension.
    #[arg(long, default_value_t = 5)]
    n_b: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl ModelArgs {
    fn config(&self, afr: AfrSpec<f64>) -> CamleConfig<f64> {
        CamleConfig { n_b: self.n_b, alpha: self.alpha, afr, seed: self.seed, ..CamleConfig::default() }
    }
}

#[derive(Args, Debug)]
struct ScoreArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = ".")]
    output: PathBuf,
    /// Explicit AFR per column, `a:b[,a:b...]`; one pair applies to every column.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "afr_quantiles")]
    afr: Option<String>,
    /// AFR from empirical quantiles of each column, `lo:hi`.
    #[arg(long, default_value = "0.24:0.75")]
    afr_quantiles: String,
    /// Column excluded from the features.
    #[arg(long)]
    label_col: Option<String>,
    /// Score with the unconstrained MLE instead.
    #[arg(long)]
    unconstrained: bool,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Dataset holding the label column.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    label_col: String,
    /// Scores file; defaults to OUTPUT/scores.csv.
    #[arg(long)]
    scores: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, default_value = ".")]
    output: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// 100 combos, 100 datasets, 10 guessed label sets.
    #[arg(long)]
    full_scale: bool,
    #[arg(long)]
    combos: Option<usize>,
    #[arg(long)]
    datasets: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    label_draws: Option<usize>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    label_col: String,
    #[arg(long, default_value = ".")]
    output: PathBuf,
    #[arg(long, default_value_t = 11)]
    offsets: usize,
    #[arg(long, default_value_t = 100)]
    pairs: usize,
    #[command(flatten)]
    model: ModelArgs,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::FAILURE;
    }
    let result = match cli.command {
        Command::Score(a) => cmd_score(&a),
        Command::Eval(a) => cmd_eval(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Sweep(a) => cmd_sweep(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("CAMLE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().with_context(|| format!("CAMLE_THREADS='{raw}' is not an integer"))?;
    if n == 0 {
        bail!("CAMLE_THREADS must be at least 1");
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn parse_pair(s: &str) -> Result<(f64, f64)> {
    let (lo, hi) = s.split_once(':').with_context(|| format!("expected 'lo:hi', got '{s}'"))?;
    let lo: f64 = lo.trim().parse().with_context(|| format!("bad number '{lo}'"))?;
    let hi: f64 = hi.trim().parse().with_context(|| format!("bad number '{hi}'"))?;
    Ok((lo, hi))
}

fn parse_afr_list(s: &str) -> Result<Vec<AfrSpec<f64>>> {
    s.split(',')
        .map(|part| {
            let (a, b) = parse_pair(part)?;
            Ok(AfrSpec::Explicit(Afr::new(a, b)?))
        })
        .collect()
}

fn feature_table(path: &Path, label_col: Option<&str>) -> Result<Table> {
    let table = read_table(path, label_col)?;
    if table.columns.is_empty() {
        bail!("{} has no feature columns", path.display());
    }
    if table.n_rows() == 0 {
        bail!("{} has no data rows", path.display());
    }
    Ok(table)
}

fn constant_columns(table: &Table) -> Vec<&str> {
    table
        .columns
        .iter()
        .zip(&table.names)
        .filter(|(c, _)| c.iter().all(|&v| v == c[0]))
        .map(|(_, n)| n.as_str())
        .collect()
}

fn cmd_score(args: &ScoreArgs) -> Result<()> {
    let start = Instant::now();
    let table = feature_table(&args.input, args.label_col.as_deref())?;
    let (afrs, afr_echo) = match &args.afr {
        Some(list) => {
            let specs = parse_afr_list(list)?;
            if specs.len() != 1 && specs.len() != table.columns.len() {
                bail!("--afr has {} pairs for {} feature columns", specs.len(), table.columns.len());
            }
            (specs, json!({ "explicit": list }))
        }
        None => {
            let (lo, hi) = parse_pair(&args.afr_quantiles)?;
            (vec![AfrSpec::Quantiles(lo, hi)], json!({ "quantiles": [lo, hi] }))
        }
    };
    let config = args.model.config(afrs[0]);

    let constant = constant_columns(&table);
    if constant.len() == table.columns.len() {
        bail!("every column is degenerate: {}", constant.join(", "));
    }
    let method = if args.unconstrained { Method::Unconstrained } else { Method::Constrained };
    let report = score_report(&table.columns, &afrs, &config, method)?;
    let skipped: Vec<&str> = report.skipped.iter().map(|&d| table.names[d].as_str()).collect();
    if !skipped.is_empty() {
        warn!("skipped degenerate columns: {}", skipped.join(", "));
    }

    let scores_path = args.output.join("scores.csv");
    write_csv(
        &scores_path,
        &["row_index", "score"],
        report.scores.as_slice().iter().enumerate().map(|(i, s)| vec![i.to_string(), s.to_string()]),
    )?;

    let per_dimension: Vec<Value> = report.dimensions.iter().map(|d| dimension_json(d, &table.names)).collect();
    let summary = json!({
        "config": {
            "input": args.input.display().to_string(),
            "method": method,
            "afr": afr_echo,
            "n_b": config.n_b,
            "alpha": config.alpha,
            "seed": config.seed,
            "init_anomaly_rate": config.init_anomaly_rate,
            "label_col": args.label_col,
        },
        "n_rows": table.n_rows(),
        "per_dimension": per_dimension,
        "skipped_columns": skipped,
        "timing": { "seconds": start.elapsed().as_secs_f64() },
    });
    write_json(&args.output.join("summary.json"), &summary)?;
    info!("wrote {} and summary.json", scores_path.display());
    Ok(())
}

fn dimension_json(d: &DimensionReport<f64>, names: &[String]) -> Value {
    let kkt: serde_json::Map<String, Value> =
        [KktCase::Unconstrained, KktCase::BoundaryP, KktCase::ConsistencyActive, KktCase::BothActive]
            .into_iter()
            .map(|c| (format!("{c:?}"), json!(d.kkt_count(c))))
            .collect();
    json!({
        "column": names[d.dimension],
        "afr": [d.afr.a(), d.afr.b()],
        "interval": d.interval,
        "n_constrained_draws": d.n_constrained_draws,
        "n_fallback_draws": d.n_fallback_draws,
        "kkt_counts": kkt,
        "estimates": d.estimates,
    })
}

fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let table = read_table(&args.input, Some(&args.label_col))?;
    let labels = table.require_labels()?;
    let scores_path = args.scores.clone().unwrap_or_else(|| args.output.join("scores.csv"));
    let scores = read_scores(&scores_path)?;
    if scores.len() != labels.len() {
        bail!("{} scores but {} labels", scores.len(), labels.len());
    }
    let auc = auc_roc(&scores, labels)?;
    println!("{auc:.4}");

    let summary_path = args.output.join("summary.json");
    let mut summary = if summary_path.exists() {
        let text = std::fs::read_to_string(&summary_path)?;
        serde_json::from_str(&text).with_context(|| format!("cannot parse {}", summary_path.display()))?
    } else {
        json!({})
    };
    match summary.as_object_mut() {
        Some(obj) => {
            obj.insert("auc".into(), json!(auc));
        }
        None => bail!("{} is not a JSON object", summary_path.display()),
    }
    write_json(&summary_path, &summary)
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let mut config = if args.full_scale { SimConfig::full_scale(args.seed) } else { SimConfig::desk(args.seed) };
    config.alpha = args.alpha;
    if let Some(n) = args.combos {
        config.n_param_combos = n;
    }
    if let Some(n) = args.datasets {
        config.datasets_per_combo = n;
    }
    if let Some(n) = args.samples {
        config.samples_per_dataset = n;
    }
    if let Some(n) = args.label_draws {
        config.guessed_labels_per_dataset = n;
    }
    let report = run_simulation::<f64>(&config)?;

    let rows = [
        ("guessed", "mle", report.guessed.mle),
        ("guessed", "camle", report.guessed.camle),
        ("true", "mle", report.true_labels.mle),
        ("true", "camle", report.true_labels.camle),
    ];
    let cells = |m: &ParamMads<f64>| [m.mu, m.sigma, m.p];
    write_csv(
        &args.output.join("mad_table.csv"),
        &["labels", "method", "mu", "sigma", "p"],
        rows.iter().map(|(l, m, mads)| {
            let mut row = vec![l.to_string(), m.to_string()];
            row.extend(cells(mads).iter().map(f64::to_string));
            row
        }),
    )?;

    println!("{:<8} {:<6} {:>10} {:>10} {:>10}", "labels", "method", "mu", "sigma", "p");
    for (l, m, mads) in &rows {
        let [mu, sigma, p] = cells(mads);
        println!("{l:<8} {m:<6} {mu:>10.4} {sigma:>10.4} {p:>10.4}");
    }
    println!("cells: {}  failed: {}  empty combos: {}", report.n_cells, report.n_failed, report.n_empty_combos);
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let table = feature_table(&args.input, Some(&args.label_col))?;
    let labels = table.require_labels()?;
    let sweep = SweepConfig { n_offsets: args.offsets, pairs_per_offset: args.pairs, ..SweepConfig::default() };
    let config = args.model.config(CamleConfig::<f64>::default().afr);
    let points = run_sensitivity_sweep(&table.columns, labels, &sweep, &config)?;
    write_csv(
        &args.output.join("sweep.csv"),
        &["delta", "auc"],
        points.iter().map(|p| vec![p.delta.to_string(), p.auc.to_string()]),
    )?;
    for p in &points {
        println!("{:.4} {:.4}", p.delta, p.auc);
    }
    Ok(())
}
