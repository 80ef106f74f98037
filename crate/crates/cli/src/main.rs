//! `drscale`: fit scaling laws, extract frontiers, allocate budgets, and run
//! the simulation lab from experiment-record CSV files.
//!
//! Exit status is 0 on success, 1 on domain or parse errors, and 2 on usage
//! errors.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use drscale::budget::{allocate, budget_sweep, CostModel};
use drscale::frontier::write_normalized_tsv;
use drscale::io::{
    append_records, fit_records, frontier_report, normalized_series, read_records, write_atomic, Aspect,
    ExperimentRecord, LawDocument, Variable,
};
use drscale::simlab::{generate_task, pilot_omega0, train, Strategy, TaskConfig, TrainConfig, PILOT_WEIGHTS};
use drscale::{DataSize, ModelSize};

#[derive(Parser)]
#[command(name = "drscale", version, about = "Scaling laws for dense retriever robustness and effectiveness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a power law or joint law to one aspect of experiment records.
    Fit(FitArgs),
    /// Pareto frontier, knee, and initial Pareto weight of experiment records.
    Frontier(FrontierArgs),
    /// Budget-constrained model/data allocation under two joint laws.
    Budget(BudgetArgs),
    /// Train the synthetic retriever and report its contrastive entropies.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    variable: Variable,
    #[arg(long)]
    aspect: Aspect,
    /// Only use records of this strategy.
    #[arg(long)]
    strategy: Option<String>,
    /// Law document path; printed to stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct FrontierArgs {
    #[arg(long)]
    input: PathBuf,
    /// TSV of every record with both losses inverse-normalized.
    #[arg(long)]
    emit_normalized: Option<PathBuf>,
    /// Report path; printed to stdout when omitted.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct BudgetArgs {
    #[arg(long)]
    robustness_law: PathBuf,
    #[arg(long)]
    effectiveness_law: PathBuf,
    /// Budget in dollars.
    #[arg(long)]
    budget: f64,
    /// Weight on the robustness loss in the objective.
    #[arg(long, default_value_t = 0.5)]
    weight: f64,
    /// TSV of both predicted losses along a model-size grid.
    #[arg(long)]
    sweep: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    grid: usize,
    #[arg(long, default_value_t = CostModel::DEFAULT_Z_DATA)]
    z_data: f64,
    #[arg(long, default_value_t = CostModel::DEFAULT_Z_TRAIN)]
    z_train: f64,
    #[arg(long, default_value_t = CostModel::DEFAULT_Z_INFER)]
    z_infer: f64,
    #[arg(long, default_value_t = 1.0)]
    data_unit: f64,
    #[arg(long, default_value_t = 1.0)]
    model_unit: f64,
    /// Allocation path; printed to stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// One or more strategies, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "standard")]
    strategy: Vec<Strategy>,
    /// One or more training-set sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "4000")]
    train_pairs: Vec<usize>,
    #[arg(long, default_value_t = 16)]
    encode_dim: usize,
    #[arg(long, default_value_t = 64)]
    ambient_dim: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 2000)]
    steps: usize,
    /// Query noise scale; lower means cleaner annotations.
    #[arg(long, default_value_t = 1.0)]
    positive_noise: f64,
    #[arg(long, default_value_t = 0.5)]
    strategy_mix: f64,
    /// Initial Pareto weight; estimated from a pilot grid when omitted.
    #[arg(long)]
    omega0: Option<f64>,
    /// Append one record per run to this CSV.
    #[arg(long)]
    append: Option<PathBuf>,
    /// Result path; printed to stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, text.as_bytes()).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(out.flush()?)
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn load_law(path: &Path) -> Result<LawDocument> {
    let (doc, warnings) = LawDocument::load(path).with_context(|| format!("loading {}", path.display()))?;
    for w in warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
    Ok(doc)
}

fn run_fit(a: FitArgs) -> Result<()> {
    let records = read_records(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let provenance = match &a.strategy {
        Some(s) => format!("{} (strategy {s})", a.input.display()),
        None => a.input.display().to_string(),
    };
    let doc = fit_records(&records, a.variable, a.aspect, a.strategy.as_deref(), &provenance)?;
    emit(a.output.as_deref(), &doc.to_json()?)
}

fn run_frontier(a: FrontierArgs) -> Result<()> {
    let records = read_records(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let report = frontier_report(&records)?;
    if let Some(path) = &a.emit_normalized {
        let mut buf = Vec::new();
        write_normalized_tsv(&mut buf, &normalized_series(&records)?)?;
        write_atomic(path, &buf)?;
    }
    emit(a.report.as_deref(), &to_json(&report)?)
}

fn run_budget(a: BudgetArgs) -> Result<()> {
    let rob = load_law(&a.robustness_law)?.joint_law()?;
    let eff = load_law(&a.effectiveness_law)?.joint_law()?;
    let cm = CostModel::new(a.z_data, a.z_train, a.z_infer, a.data_unit, a.model_unit)?;
    let alloc = allocate(a.budget, &rob, &eff, &cm, a.weight)?;
    if let Some(path) = &a.sweep {
        let mut buf = b"# model_size\trobustness_ce\teffectiveness_ce\n".to_vec();
        for p in budget_sweep(a.budget, &rob, &eff, &cm, a.grid)? {
            writeln!(buf, "{}\t{}\t{}", p.model_size, p.predicted_robustness, p.predicted_effectiveness)?;
        }
        write_atomic(path, &buf)?;
    }
    emit(a.output.as_deref(), &to_json(&alloc)?)
}

fn run_simulate(a: SimulateArgs) -> Result<()> {
    let mut results = Vec::new();
    for &pairs in &a.train_pairs {
        let task = generate_task(&TaskConfig {
            ambient_dim: a.ambient_dim,
            encode_dim: a.encode_dim,
            train_pairs: pairs,
            positive_noise: a.positive_noise,
            seed: a.seed,
            ..TaskConfig::default()
        })?;
        for &strategy in &a.strategy {
            let mut cfg = TrainConfig {
                strategy,
                steps: a.steps,
                strategy_mix: a.strategy_mix,
                seed: a.seed,
                ..TrainConfig::default()
            };
            if strategy == Strategy::Pareto {
                let w = match a.omega0 {
                    Some(w) => drscale::frontier::Omega0::from_ratio(w)?,
                    None => pilot_omega0(&task, &cfg, &PILOT_WEIGHTS)?,
                };
                cfg.omega0 = w.omega0;
                cfg.omega_target = Some(w.ratio);
            }
            results.push(train(&task, &cfg)?);
        }
    }
    if let Some(path) = &a.append {
        let records = results
            .iter()
            .map(|r| -> Result<ExperimentRecord> {
                Ok(ExperimentRecord {
                    strategy: r.strategy.to_string(),
                    model_size: ModelSize::new(r.model_size as u64)?,
                    data_size: DataSize::new(r.train_pairs as u64)?,
                    ce_effectiveness: r.effectiveness_ce,
                    ce_ood: r.ood_ce,
                    ce_adversarial: Some(r.adversarial_ce),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        append_records(path, &records).with_context(|| format!("appending to {}", path.display()))?;
    }
    let text = if results.len() == 1 { to_json(&results[0])? } else { to_json(&results)? };
    emit(a.output.as_deref(), &text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Fit(a) => run_fit(a),
        Command::Frontier(a) => run_frontier(a),
        Command::Budget(a) => run_budget(a),
        Command::Simulate(a) => run_simulate(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
