//! `cascade`: config-driven runs of the cascade Stokes solver.

mod commands;
mod config;
mod ini;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{Failure, Outcome};
use config::{RunConfig, OUTPUT_ROOT_ENV};
use ini::Ini;

#[derive(Parser)]
#[command(
    name = "cascade",
    version,
    about = "Steady Stokes flow through one period of a planar profile cascade",
    after_help = "Exit status: 0 on success, 1 on invalid input, 2 on numerical failure.\n\
                  Relative output directories are placed under $CASCADE_OUTPUT_ROOT when it is set."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// INI config with [geometry], [mesh], [problem], [solver], [study] and [output] sections.
    config: PathBuf,
    /// Override one config value, e.g. `--set mesh.h=0.05`. Repeatable.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    set: Vec<String>,
    /// Output directory (same as `--set output.dir=DIR`).
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the mesh and write it in text form.
    Mesh(RunArgs),
    /// Solve once; writes the report, VTK field and coefficient CSV.
    Solve(RunArgs),
    /// Refinement study of a manufactured case; writes error tables, rates and gnuplot files.
    Mms(RunArgs),
    /// Build the divergence-free inflow lift and report its invariant residuals.
    LiftCheck(RunArgs),
    /// Build a tensor potential for the forcing and report its residuals.
    DivsolveCheck(RunArgs),
    /// Solve once and report solution, data and error norms.
    Norms(RunArgs),
    /// Solution-to-data ratios over seeded random data on a mesh family.
    StabilityProbe(RunArgs),
}

fn load(args: &RunArgs) -> Result<RunConfig, Failure> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| Failure::Validation(format!("cannot read config {}: {e}", args.config.display())))?;
    let mut ini = Ini::parse(&text, &args.config.display().to_string()).map_err(Failure::Validation)?;
    for s in &args.set {
        ini.set(s).map_err(Failure::Validation)?;
    }
    if let Some(dir) = &args.output {
        ini.insert("output", "dir", dir.display().to_string());
    }
    let base = args.config.parent().unwrap_or(Path::new("."));
    let root = std::env::var_os(OUTPUT_ROOT_ENV).map(PathBuf::from);
    RunConfig::from_ini(&ini, base, root.as_deref()).map_err(|e| Failure::Validation(e.to_string()))
}

fn run(cli: Cli) -> Result<Outcome, Failure> {
    let (args, body): (&RunArgs, fn(&RunConfig) -> Result<Outcome, Failure>) = match &cli.command {
        Command::Mesh(a) => (a, commands::mesh_cmd),
        Command::Solve(a) => (a, commands::solve_cmd),
        Command::Mms(a) => (a, commands::mms_cmd),
        Command::LiftCheck(a) => (a, commands::lift_check_cmd),
        Command::DivsolveCheck(a) => (a, commands::divsolve_check_cmd),
        Command::Norms(a) => (a, commands::norms_cmd),
        Command::StabilityProbe(a) => (a, commands::stability_cmd),
    };
    let cfg = load(args)?;
    let out = body(&cfg)?;
    let dir = commands::write_outcome(&cfg, &out)?;
    println!("{} -> {}", out.summary, dir.display());
    match &out.check_failure {
        Some(msg) => Err(Failure::Numerical(msg.clone())),
        None => Ok(out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(_) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
