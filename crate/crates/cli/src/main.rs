//! `nodesamp` command-line runner.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 1 anything else (I/O and the like).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nodesamp::experiment::{
    self, parse_suite, reconstruct_from_artifacts, run_experiment, run_suite, select_nodes,
    summary_to_csv, sweep_alpha, sweep_to_csv, write_artifacts, ExperimentConfig, SchemeChoice,
};
use nodesamp::io::{self as nio, GraphFile};
use nodesamp::{build_graph, Error};

#[derive(Parser)]
#[command(
    name = "nodesamp",
    version,
    about = "Node subsampling and reconstruction of graph signals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the configured graph and write graph.json.
    GenGraph(RunArgs),
    /// Run the full pipeline and write all artifacts.
    Run(RunArgs),
    /// Sweep the figure1a edge weight and emit a CSV table.
    SweepAlpha {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated alpha values.
        #[arg(long, value_delimiter = ',', required = true)]
        alphas: Vec<f64>,
    },
    /// Run every config in a JSON array and write summary.csv.
    Suite {
        /// Suite file (JSON array of configs).
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Node selection only; prints the selection as JSON.
    Select(RunArgs),
    /// Reconstruct again from artifacts written by `run`.
    Reconstruct {
        /// Artifact directory.
        #[arg(long)]
        dir: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Svd,
    Samp,
    Both,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (or CSV file for sweep-alpha). Falls back to the
    /// config's output_dir.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    seed_graph: Option<u64>,
    #[arg(long)]
    seed_coefficients: Option<u64>,
    #[arg(long)]
    seed_signal: Option<u64>,
    /// Use row sums over the remaining nodes only in the greedy tie-break.
    #[arg(long)]
    rowsum_active_only: bool,
}

impl RunArgs {
    fn load(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = ExperimentConfig::load(&self.config)?;
        if let Some(s) = self.scheme {
            cfg.scheme = match s {
                SchemeArg::Svd => SchemeChoice::Svd,
                SchemeArg::Samp => SchemeChoice::Samp,
                SchemeArg::Both => SchemeChoice::Both,
            };
        }
        if let Some(e) = self.epsilon {
            cfg.epsilon = e;
        }
        if let Some(s) = self.seed_graph {
            cfg.seeds.graph = s;
        }
        if let Some(s) = self.seed_coefficients {
            cfg.seeds.coefficients = s;
        }
        if let Some(s) = self.seed_signal {
            cfg.seeds.signal = s;
        }
        if self.rowsum_active_only {
            cfg.rowsum_active_only = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn out_dir(&self, cfg: &ExperimentConfig) -> Option<PathBuf> {
        self.out.clone().or_else(|| cfg.output_dir.clone())
    }
}

fn emit(path: Option<&Path>, name: &str, text: &str) -> Result<(), Error> {
    match path {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(name), text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn execute(command: Command) -> Result<(), Error> {
    match command {
        Command::GenGraph(args) => {
            let cfg = args.load()?;
            let graph = build_graph(&cfg.graph_template())?;
            let file = GraphFile::new(&graph, &cfg.graph, cfg.seeds.graph);
            emit(
                args.out_dir(&cfg).as_deref(),
                "graph.json",
                &nio::to_json(&file)?,
            )
        }
        Command::Run(args) => {
            let cfg = args.load()?;
            let outcome = run_experiment(&cfg)?;
            if let Some(dir) = args.out_dir(&cfg) {
                write_artifacts(&outcome, &dir)?;
            }
            println!(
                "family={} epsilon={} P={}",
                cfg.family(),
                cfg.epsilon,
                outcome.model.rank.rank
            );
            for run in &outcome.runs {
                let r = &run.report;
                println!(
                    "{} selected={:?} error_db={:.4} cond_ast={:.4}",
                    r.scheme, r.selected, r.error_db, r.condition_ast
                );
            }
            Ok(())
        }
        Command::SweepAlpha { run, alphas } => {
            let cfg = run.load()?;
            let csv = sweep_to_csv(&sweep_alpha(&cfg, &alphas)?);
            match run.out {
                Some(path) => {
                    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                        fs::create_dir_all(parent)?;
                    }
                    fs::write(path, csv)?;
                }
                None => print!("{csv}"),
            }
            Ok(())
        }
        Command::Suite { config, out } => {
            let entries = parse_suite(&fs::read_to_string(&config)?)?;
            let rows = run_suite(&entries, out.as_deref());
            let csv = summary_to_csv(&rows)?;
            for row in rows.iter().filter(|r| r.failed()) {
                eprintln!(
                    "config `{}` failed: {}",
                    row.family,
                    row.failure.as_deref().unwrap_or_default()
                );
            }
            emit(out.as_deref(), "summary.csv", &csv)
        }
        Command::Select(args) => {
            let cfg = args.load()?;
            let (model, selections) = select_nodes(&cfg)?;
            let file = experiment::SelectionFile {
                family: cfg.family(),
                epsilon: cfg.epsilon,
                rank: model.rank,
                singular_values: model.singular_values,
                selections,
            };
            emit(
                args.out_dir(&cfg).as_deref(),
                "selection.json",
                &nio::to_json(&file)?,
            )
        }
        Command::Reconstruct { dir } => {
            for r in reconstruct_from_artifacts(&dir)? {
                println!(
                    "{} selected={:?} error_db={:.4} cond_ast={:.4}",
                    r.scheme, r.selected, r.error_db, r.condition_ast
                );
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() {
                2
            } else if e.is_numerical() {
                3
            } else {
                1
            })
        }
    }
}
