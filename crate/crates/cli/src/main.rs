use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use riesz_teig_cli::{
    dump_gram, figure_data, run_experiment, table1, CliError, CliResult, ExperimentConfig, Formats, OneOrMany,
    Selector,
};
use serde_json::json;

/// Regularized minimal-norm solutions of first-kind Fredholm systems.
#[derive(Parser)]
#[command(name = "riesz-teig", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a built-in problem for every (n, delta, seed) combination.
    Solve(SolveArgs),
    /// Galerkin vs Riesz max-norm errors on the second test problem.
    Table1(CommonArgs),
    /// Grids needed to re-plot a figure (fig2, fig3, fig4, fig7, fig8, fig9, fig12, with -left/-right panels).
    FigureData {
        name: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Write the Gram matrix and its spectrum.
    DumpGram {
        #[arg(long)]
        problem: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        z0: Option<f64>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
}

#[derive(Args)]
struct CommonArgs {
    #[arg(long, default_value_t = 1000)]
    grid_points: usize,
    /// Defaults to $RIESZ_TEIG_OUTPUT_DIR, then ./riesz-teig-out.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

/// Flags override values from `--config`.
#[derive(Args)]
struct SolveArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// tp1, tp2, fdem:sigma1, fdem:sigma2 or fdem:sigma3.
    #[arg(long)]
    problem: Option<String>,
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    delta: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    seed: Option<Vec<u64>>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, value_enum)]
    selector: Option<Selector>,
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Comma-separated: csv, json.
    #[arg(long)]
    format: Option<String>,
    /// FDEM truncation depth.
    #[arg(long)]
    z0: Option<f64>,
    /// Skip the per-cell runtime files.
    #[arg(long)]
    no_timing: bool,
}

fn many<T: Clone>(v: Vec<T>) -> OneOrMany<T> {
    if v.len() == 1 {
        OneOrMany::One(v[0].clone())
    } else {
        OneOrMany::Many(v)
    }
}

impl SolveArgs {
    fn into_config(self) -> CliResult<ExperimentConfig> {
        let mut cfg = match (&self.config, &self.problem, &self.n) {
            (Some(path), _, _) => ExperimentConfig::from_json_file(path)?,
            (None, Some(p), Some(n)) if !n.is_empty() => ExperimentConfig::new(p.clone(), n[0]),
            _ => return Err(CliError::user("solve needs --config or both --problem and --n")),
        };
        if let Some(p) = self.problem {
            cfg.problem.name = p;
        }
        if let Some(n) = self.n {
            cfg.n = many(n);
        }
        if let Some(d) = self.delta {
            cfg.delta = many(d);
        }
        if let Some(s) = self.seed {
            cfg.seed = many(s);
        }
        if self.tau.is_some() {
            cfg.tau = self.tau;
        }
        if let Some(s) = self.selector {
            cfg.selector = s;
        }
        if let Some(g) = self.grid_points {
            cfg.grid_points = g;
        }
        if self.output_dir.is_some() {
            cfg.output_dir = self.output_dir;
        }
        if let Some(f) = self.format {
            cfg.formats = f.parse::<Formats>()?;
        }
        if self.z0.is_some() {
            cfg.problem.z0 = self.z0;
        }
        if self.no_timing {
            cfg.timing = false;
        }
        Ok(cfg)
    }
}

fn output_dir(flag: Option<PathBuf>) -> PathBuf {
    let mut cfg = ExperimentConfig::new("tp1", 2);
    cfg.output_dir = flag;
    cfg.resolved_output_dir()
}

fn run(cli: Cli) -> CliResult<serde_json::Value> {
    match cli.command {
        Command::Solve(args) => {
            let report = run_experiment(&args.into_config()?)?;
            let cells: Vec<_> = report
                .cells
                .iter()
                .map(|c| {
                    json!({
                        "problem": c.problem,
                        "n": c.n,
                        "delta": c.delta,
                        "seed": c.seed,
                        "cutoff": c.cutoff,
                        "kappa": c.solutions.iter().map(|s| (s.name.clone(), json!(s.kappa))).collect::<serde_json::Map<_, _>>(),
                        "max_error": c.solutions.iter().map(|s| (s.name.clone(), json!(s.max_error))).collect::<serde_json::Map<_, _>>(),
                        "notes": c.notes,
                    })
                })
                .collect();
            Ok(json!({ "output_dir": report.output_dir, "cells": cells, "files": report.files }))
        }
        Command::Table1(common) => {
            let dir = output_dir(common.output_dir);
            let rows = table1(&dir, common.grid_points)?;
            Ok(json!({ "output_dir": dir, "rows": rows }))
        }
        Command::FigureData { name, seed, common } => {
            let dir = output_dir(common.output_dir);
            let panels = figure_data(&name, &dir, seed, common.grid_points)?;
            Ok(json!({ "output_dir": dir, "panels": panels }))
        }
        Command::DumpGram {
            problem,
            n,
            z0,
            output_dir: dir,
        } => {
            let dir = output_dir(dir);
            let dump = dump_gram(problem.parse().map_err(CliError::from)?, n, z0, &dir)?;
            Ok(json!({ "output_dir": dir, "functionals": dump.functionals, "cutoff": dump.cutoff, "condition": dump.condition }))
        }
    }
}

fn main() -> ExitCode {
    let result = match Cli::try_parse() {
        Ok(cli) => run(cli),
        // --help and --version land here too; they are not failures.
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => Err(CliError::user(e.kind().to_string() + ": " + e.render().to_string().lines().next().unwrap_or(""))),
    };
    match result {
        Ok(report) => {
            println!("{}", serde_json::to_string_pretty(&report).unwrap_or_default());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", serde_json::to_string(&e.report()).unwrap_or_else(|_| e.to_string()));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
