use std::path::PathBuf;
use std::process::ExitCode;

use asm3d_core::experiment::{run_with, CoarseChoice, EnrichmentChoice, ExperimentConfig};
use asm3d_core::tables::{build_tables, emit_tables};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "asm3d", version, about = "Two-level Schwarz experiments with adaptive coarse spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every cell of an experiment config and write tables.
    Run(RunArgs),
}

#[derive(clap::Args, Debug)]
struct RunArgs {
    /// TOML experiment config.
    config: PathBuf,
    /// Output directory; overrides the config and ASM3D_OUT_DIR.
    #[arg(long, env = "ASM3D_OUT_DIR")]
    out: Option<PathBuf>,
    /// Restrict the coarse spaces run.
    #[arg(long, value_enum)]
    coarse: Option<CoarseArg>,
    /// Run only the plain (non-enriched) coarse spaces.
    #[arg(long)]
    no_enrichment: bool,
    /// Write A, f and every coarse basis in Matrix Market format.
    #[arg(long)]
    emit_matrices: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CoarseArg {
    Wirebasket,
    Vertex,
    Both,
}

impl From<CoarseArg> for CoarseChoice {
    fn from(c: CoarseArg) -> Self {
        match c {
            CoarseArg::Wirebasket => CoarseChoice::Wirebasket,
            CoarseArg::Vertex => CoarseChoice::Vertex,
            CoarseArg::Both => CoarseChoice::Both,
        }
    }
}

fn run(args: RunArgs) -> asm3d_core::Result<bool> {
    let mut config = ExperimentConfig::load_unvalidated(&args.config)?;
    if let Some(out) = args.out {
        config.output.dir = out;
    }
    if let Some(c) = args.coarse {
        config.coarse_space = c.into();
    }
    if args.no_enrichment {
        config.enrichment = EnrichmentChoice::Off;
    }
    config.output.emit_matrices |= args.emit_matrices;
    config.validate()?;

    let out = config.output.dir.clone();
    let matrices = config.output.emit_matrices.then(|| out.join("matrices"));
    let records = run_with(&config, matrices.as_deref())?;
    emit_tables(&records, &out, &config.output.formats)?;
    for table in build_tables(&records) {
        println!("{}", table.to_text());
    }
    println!("results written to {}", out.display());
    let failed: Vec<String> = records
        .iter()
        .filter(|r| !r.report.converged)
        .map(|r| r.stem())
        .collect();
    if !failed.is_empty() {
        eprintln!("not converged within {} iterations: {}", config.solver.max_iter, failed.join(", "));
    }
    Ok(failed.is_empty())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => match run(args) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::from(2),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        },
    }
}
