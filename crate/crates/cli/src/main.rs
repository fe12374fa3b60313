//! `ncg-bench`: run benchmark grids and replay single instances.
//!
//! Exit codes: 0 on success, 1 on configuration or usage errors, 2 when at
//! least one solver run failed.

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ncg_core::bench::{
    emit_table, run_experiment, run_single, write_table, ExperimentConfig, GridCell, HolderSpec, OutputFormat,
    OutputSpec, SolverKind,
};
use ncg_core::problems::{Family, InfeasibilityRecipe, Instance};
use ncg_core::NcgError;

#[derive(Parser)]
#[command(name = "ncg-bench", version, about = "Newton-CG benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment grid and print or write the results table.
    Run(RunArgs),
    /// Generate or solve a single serialized instance.
    #[command(subcommand)]
    Instance(InstanceCommand),
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment config; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    family: Option<Family>,
    /// Solver to run (repeat or comma-separate): alg1, alg2, acrn.
    #[arg(long, value_delimiter = ',')]
    solver: Vec<SolverKind>,
    #[arg(long)]
    eps_g: Option<f64>,
    #[arg(long)]
    eps_h: Option<f64>,
    /// Base instance seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<OutputFormat>,
    /// Concurrent solves; 0 uses every core.
    #[arg(long)]
    jobs: Option<usize>,
    /// Single grid cell, replacing the config grid.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, requires = "n")]
    m: Option<usize>,
    #[arg(long, requires = "n")]
    p: Option<f64>,
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long, requires = "holder_h")]
    holder_nu: Option<f64>,
    #[arg(long, requires = "holder_nu")]
    holder_h: Option<f64>,
    #[arg(long)]
    recipe: Option<InfeasibilityRecipe>,
}

#[derive(Subcommand)]
enum InstanceCommand {
    /// Write a generated instance to a file.
    Generate {
        #[arg(long)]
        family: Family,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        m: usize,
        #[arg(long, default_value_t = 0.0)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        recipe: Option<InfeasibilityRecipe>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve an instance file and print a one-line summary.
    Solve {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, default_value = "alg2")]
        solver: SolverKind,
        #[arg(long, default_value_t = 1e-4)]
        eps_g: f64,
        #[arg(long)]
        eps_h: Option<f64>,
        #[arg(long, requires = "holder_h")]
        holder_nu: Option<f64>,
        #[arg(long, requires = "holder_nu")]
        holder_h: Option<f64>,
        /// Seed for the solver's randomized components.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

enum Failure {
    Config(String),
    Runs(String),
}

impl From<NcgError> for Failure {
    fn from(e: NcgError) -> Self {
        Failure::Config(e.to_string())
    }
}

fn build_config(args: &RunArgs) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => {
            let family = args.family.ok_or_else(|| Failure::Config("--family is required without --config".into()))?;
            let n = args.n.ok_or_else(|| Failure::Config("--n is required without --config".into()))?;
            let cell = GridCell { n, m: args.m.unwrap_or(0), p: args.p.unwrap_or(0.0) };
            let solvers = if args.solver.is_empty() { vec![SolverKind::Alg2] } else { args.solver.clone() };
            ExperimentConfig::new(family, cell, solvers, args.eps_g.unwrap_or(1e-4))
        }
    };
    if let Some(f) = args.family {
        cfg.family = f;
    }
    if !args.solver.is_empty() {
        cfg.solvers = args.solver.clone();
    }
    if let Some(e) = args.eps_g {
        cfg.eps_g = e;
    }
    if args.eps_h.is_some() {
        cfg.eps_h = args.eps_h;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(j) = args.jobs {
        cfg.jobs = j;
    }
    if let Some(n) = args.n {
        cfg.grid = vec![GridCell { n, m: args.m.unwrap_or(0), p: args.p.unwrap_or(0.0) }];
    }
    if let Some(k) = args.instances {
        cfg.instances_per_cell = k;
    }
    if let (Some(nu), Some(h_nu)) = (args.holder_nu, args.holder_h) {
        cfg.holder = Some(HolderSpec { nu, h_nu });
    }
    if let Some(r) = args.recipe {
        cfg.params.infeasibility_recipe = r;
    }
    match (&args.out, &mut cfg.output) {
        (Some(path), Some(out)) => out.path = path.clone(),
        (Some(path), None) => cfg.output = Some(OutputSpec { path: path.clone(), format: OutputFormat::Csv }),
        _ => {}
    }
    if let (Some(fmt), Some(out)) = (args.format, &mut cfg.output) {
        out.format = fmt;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let cfg = build_config(&args)?;
    let table = run_experiment(&cfg)?;
    match &cfg.output {
        Some(out) => write_table(&table.rows, out.format, &out.path).map_err(|e| Failure::Config(e.to_string()))?,
        None => print!("{}", emit_table(&table.rows, args.format.unwrap_or(OutputFormat::Markdown))?),
    }
    for row in &table.rows {
        if row.all_failed(cfg.instances_per_cell) {
            eprintln!("cell n={} m={} p={} solver={}: all runs failed", row.n, row.m, row.p, row.solver);
        }
    }
    for r in table.runs.iter().filter(|r| !r.succeeded()) {
        eprintln!(
            "run failed: cell {} seed {} {}: {:?} {}",
            r.cell,
            r.instance_seed,
            r.solver,
            r.status,
            r.message.as_deref().unwrap_or("")
        );
    }
    match table.total_failures() {
        0 => Ok(()),
        k => Err(Failure::Runs(format!("{k} run(s) failed"))),
    }
}

fn instance(cmd: InstanceCommand) -> Result<(), Failure> {
    match cmd {
        InstanceCommand::Generate { family, n, m, p, seed, recipe, out } => {
            let inst = Instance::generate_with(family, n, m, p, seed, recipe.unwrap_or_default())?;
            let file = File::create(&out).map_err(|e| Failure::Config(format!("{}: {e}", out.display())))?;
            inst.write_to(std::io::BufWriter::new(file))?;
            Ok(())
        }
        InstanceCommand::Solve { file, solver, eps_g, eps_h, holder_nu, holder_h, seed } => {
            let reader = File::open(&file).map_err(|e| Failure::Config(format!("{}: {e}", file.display())))?;
            let inst = Instance::read_from(BufReader::new(reader))?;
            let mut cfg = ExperimentConfig::new(inst.family(), GridCell { n: 1, m: 1, p: 3.0 }, vec![solver], eps_g);
            cfg.eps_h = eps_h;
            if let (Some(nu), Some(h_nu)) = (holder_nu, holder_h) {
                cfg.holder = Some(HolderSpec { nu, h_nu });
            }
            cfg.validate()?;
            let rec = run_single(&cfg, &inst, solver, seed);
            println!(
                "solver={} status={} objective={:e} grad_norm={:e} subproblems={} outer={}",
                rec.solver,
                rec.status.map_or("error".to_string(), |s| format!("{s:?}")),
                rec.objective,
                rec.grad_norm,
                rec.subproblems,
                rec.outer
            );
            if rec.succeeded() {
                Ok(())
            } else {
                Err(Failure::Runs(rec.message.unwrap_or_else(|| "solver did not converge".into())))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Instance(cmd) => instance(cmd),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runs(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
