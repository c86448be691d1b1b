use std::path::PathBuf;
use std::process;

use clap::{Parser, Subcommand};
use stmcirc_cli::commands::{cmd_bound, cmd_design, cmd_junction, cmd_sweep, cmd_verify};
use stmcirc_cli::{load_config, parse_config, CliError, Format, Outputs, DEFAULT_CONFIG, EXIT_OK};

#[derive(Parser)]
#[command(name = "stmcirc", version, about = "Design and analysis of modulated (magnet-less) circulators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Configuration file (key = value); defaults to the reference junction.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::All)]
    format: Format,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Bare junction S-parameters and characteristic admittance.
    Junction,
    /// Synthesize the matching filter and evaluate the matched circulator.
    Design,
    /// Bandwidth-bound map over modulation frequency and depth.
    Sweep,
    /// Reflection budget and global bandwidth bound.
    Bound,
    /// Cross-check the models against independent oracles.
    Verify,
}

fn run(cli: &Cli) -> Result<String, CliError> {
    let cfg = match &cli.config {
        Some(path) => load_config(path)?,
        None => parse_config(DEFAULT_CONFIG)?,
    };
    let mut out = Outputs::new(&cli.out, cli.format);
    match cli.command {
        Command::Junction => cmd_junction(&cfg, &mut out),
        Command::Design => cmd_design(&cfg, &mut out),
        Command::Sweep => cmd_sweep(&cfg, &mut out),
        Command::Bound => cmd_bound(&cfg, &mut out),
        Command::Verify => cmd_verify(&cfg, &mut out),
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(report) => {
            print!("{report}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    process::exit(code);
}
