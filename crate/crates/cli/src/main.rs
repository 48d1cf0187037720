//! `pgcl`: preexpectations, invariant checks, strategy synthesis and the
//! explicit-state oracle for nondeterministic probabilistic programs.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use report::CliError;

#[derive(Parser)]
#[command(name = "pgcl", version, about = "Verify and synthesize strategies for probabilistic programs")]
struct Cli {
    /// Print the report as JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// What to do when a run leaves the declared domain.
    #[arg(long, global = true, value_enum, default_value_t = Escape::Error)]
    escape: Escape,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Escape {
    Error,
    /// Cut the run off into a sink that earns nothing.
    Truncate,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TransformerArg {
    Dwp,
    Awp,
    WpreDwp,
    WpreAwp,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    Upper,
    Lower,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Min,
    Max,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProviderArg {
    Superinv,
    DastSubinv,
    DpastSubinv,
}

#[derive(Args)]
pub struct Input {
    /// Program file.
    pub file: PathBuf,
    /// Postexpectation; defaults to the file's `post` declaration.
    #[arg(long)]
    pub post: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a preexpectation.
    Wp {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = TransformerArg::Dwp)]
        transformer: TransformerArg,
        /// Evaluate at a state such as `x=1,y=2`; repeatable.
        #[arg(long)]
        eval: Vec<String>,
        /// Evaluate at every initial state of the domain.
        #[arg(long)]
        eval_all: bool,
    },
    /// Check the loop invariants of a program and, optionally, a threshold.
    Check {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum)]
        provider: Option<ProviderArg>,
        /// Transformer the bound is about; must match the provider.
        #[arg(long, value_enum)]
        transformer: Option<TransformerArg>,
        #[arg(long)]
        threshold: Option<String>,
        #[arg(long, value_enum)]
        direction: Option<DirectionArg>,
    },
    /// Restrict the nondeterminism of a program to choices that preserve
    /// its preexpectation.
    Transform {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum)]
        direction: Option<DirectionArg>,
        /// Break remaining ties towards the first branch.
        #[arg(long)]
        determinize: bool,
        /// With --determinize, break ties towards the second branch.
        #[arg(long, requires = "determinize")]
        right: bool,
        /// Slack allowed when comparing oracle values with the bound.
        #[arg(long, default_value_t = 0.0)]
        tolerance: f64,
    },
    /// Build and solve the operational Markov decision process.
    Mdp {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// Write the model as text to this path.
        #[arg(long)]
        export: Option<PathBuf>,
        /// Report the optimal memoryless strategy.
        #[arg(long)]
        strategy: bool,
    },
    /// Compare transformers with the oracle on random loop-free programs.
    Selftest {
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        cases: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let ctx = commands::Context::new(cli.escape);
    let (name, file) = match &cli.command {
        Command::Wp { input, .. } => ("wp", input.file.display().to_string()),
        Command::Check { input, .. } => ("check", input.file.display().to_string()),
        Command::Transform { input, .. } => ("transform", input.file.display().to_string()),
        Command::Mdp { input, .. } => ("mdp", input.file.display().to_string()),
        Command::Selftest { .. } => ("selftest", String::new()),
    };
    let result = match &cli.command {
        Command::Wp { input, transformer, eval, eval_all } => commands::wp(input, *transformer, eval, *eval_all),
        Command::Check { input, provider, transformer, threshold, direction } => {
            commands::check(&ctx, input, *provider, *transformer, threshold.as_deref(), *direction)
        }
        Command::Transform { input, direction, determinize, right, tolerance } => {
            commands::transform(&ctx, input, *direction, *determinize, *right, *tolerance)
        }
        Command::Mdp { input, mode, export, strategy } => commands::mdp(&ctx, input, *mode, export.as_deref(), *strategy),
        Command::Selftest { seed, cases } => commands::selftest(*seed, *cases),
    };
    match result {
        Ok(mut report) => {
            report.timing_ms = start.elapsed().as_millis();
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&report).expect("reports serialize to JSON"));
            } else {
                print!("{}", report.human());
            }
            report.exit_code()
        }
        Err(e) => report_error(cli.json, name, &file, &e),
    }
}

fn report_error(json: bool, command: &str, file: &str, e: &CliError) -> ExitCode {
    if json {
        let v = serde_json::json!({
            "command": command,
            "file": file,
            "verdict": false,
            "error": e.to_string(),
            "exit_code": e.code(),
        });
        println!("{}", serde_json::to_string_pretty(&v).expect("errors serialize to JSON"));
    } else {
        eprintln!("error: {e}");
    }
    ExitCode::from(e.code())
}
