use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use esbgk_cli::{error_exit_code, init_thread_pool, lemma, parse_list, solve, sweep, verify};

/// Stationary ES-BGK solver on the slab [0, 1].
///
/// Worker threads default to the number of cores; set ESBGK_THREADS to cap them.
#[derive(Parser)]
#[command(name = "esbgk", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the fixed-point iteration and write profile.csv and report.json.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Overrides output.dir from the configuration.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Also write the full distribution as field.bin.
        #[arg(long)]
        dump_field: bool,
    },
    /// Run the property battery and print a pass/fail table.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Solve once per value of one parameter and write a summary CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// nu, tau, delta or discrepancy
        #[arg(long)]
        axis: sweep::Axis,
        /// Comma-separated values.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Evaluate the kernel estimate at several relaxation times.
    LemmaCheck {
        /// Comma-separated relaxation times, each above 1.
        #[arg(long)]
        tau_list: String,
        #[arg(long, default_value_t = 1.0)]
        decay: f64,
    },
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    init_thread_pool()?;
    match cli.command {
        Command::Solve { config, out_dir, dump_field } => solve::cmd_solve(&config, out_dir, dump_field),
        Command::Verify { config, seed } => verify::cmd_verify(&config, seed),
        Command::Sweep { config, axis, values, out_dir } => {
            sweep::cmd_sweep(&config, axis, &parse_list(&values)?, out_dir)
        }
        Command::LemmaCheck { tau_list, decay } => lemma::cmd_lemma_check(&parse_list(&tau_list)?, decay),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // usage errors are configuration errors; clap's own code 2 means "iteration limit" here
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { esbgk_cli::EXIT_CONFIG as u8 } else { 0 });
        }
    };
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            error_exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
