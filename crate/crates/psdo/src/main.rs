use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use psdo::commands::{execute, Command, Format, Options};

#[derive(Parser)]
#[command(name = "psdo", version, about = "Zero-order pseudodifferential calculus on circles, cones and edges")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// JSON run configuration (optional for `verify`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for randomized instances; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Run a single verification suite.
    #[arg(long, global = true)]
    only: Option<String>,
    /// Output directory; overrides the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// What to print on stdout.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Report)]
    format: FormatArg,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Compatibility and ellipticity of the configured symbols.
    Check,
    /// Quantize and write the operator container.
    Quantize,
    /// Finite-section index with a winding cross-check.
    Index,
    /// Run the invariant battery.
    Verify,
}

#[derive(ValueEnum, Clone, Copy)]
enum FormatArg {
    Report,
    Csv,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(psdo::exit::CONFIG as u8);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    if let Some(n) = std::env::var("PSDO_THREADS").ok().and_then(|s| s.parse::<usize>().ok()).filter(|n| *n > 0) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let cmd = match cli.command {
        Cmd::Check => Command::Check,
        Cmd::Quantize => Command::Quantize,
        Cmd::Index => Command::Index,
        Cmd::Verify => Command::Verify,
    };
    let opts = Options {
        config: cli.config,
        seed: cli.seed,
        only: cli.only,
        out: cli.out,
        format: match cli.format {
            FormatArg::Report => Format::Report,
            FormatArg::Csv => Format::Csv,
        },
    };
    ExitCode::from(execute(cmd, &opts) as u8)
}
