use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nmhl::{parse_config_with, run, CliError};

#[derive(Parser)]
#[command(name = "nmhl", version, about = "Heat kernels, rate functions and small-time asymptotics on the torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Heat kernels p_t(x, ·) and the symbol table.
    Kernel(Args),
    /// Integration-by-parts identity for augmented operators.
    Ibp(Args),
    /// Rate function between endpoint pairs.
    Rate(Args),
    /// Small-time scaling of log|p_t| against the rate function.
    Varadhan(Args),
    /// Exit-mass decay and tilted-semigroup bounds.
    Exit(Args),
    /// Summary of earlier runs.
    Report(Args),
}

#[derive(clap::Args)]
struct Args {
    /// TOML or JSON run configuration.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Output directory, replacing `output.directory`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for the global pool.
    #[arg(long, env = "NMHL_THREADS")]
    threads: Option<usize>,
    /// `dotted.key=value`, applied before validation; repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl Command {
    fn parts(&self) -> (&'static str, &Args) {
        match self {
            Self::Kernel(a) => ("kernel", a),
            Self::Ibp(a) => ("ibp", a),
            Self::Rate(a) => ("rate", a),
            Self::Varadhan(a) => ("varadhan", a),
            Self::Exit(a) => ("exit", a),
            Self::Report(a) => ("report", a),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = cli.command.parts();
    match execute(kind, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(kind: &str, args: &Args) -> Result<bool, CliError> {
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(CliError::validation("--threads", "≥1"));
        }
        // fails only if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let text = match &args.config {
        Some(path) => std::fs::read_to_string(path).map_err(CliError::io(path))?,
        None => String::new(),
    };
    let mut cfg = parse_config_with(&text, &args.overrides, Some(kind))?;
    if let Some(out) = &args.out {
        cfg.output.directory = out.clone();
    }
    let summary = run(&cfg)?;
    println!(
        "{}: {} ({} files in {})",
        summary.experiment,
        if summary.pass { "PASS" } else { "FAIL" },
        summary.files.len(),
        cfg.output.directory.display()
    );
    for (key, value) in &summary.measured {
        println!("  {key} = {value:e}");
    }
    Ok(summary.pass)
}
