use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use robann::cli::{self, beta_table, exit};
use robann::params::RhoFn;

#[derive(Parser)]
#[command(name = "robann", version, about = "Robust approximate nearest neighbor experiments")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config file.
    Run {
        config: PathBuf,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the beta(c) curve as CSV.
    Beta {
        #[arg(long, default_value_t = 1.5)]
        c_min: f64,
        #[arg(long, default_value_t = 20.0)]
        c_max: f64,
        #[arg(long, default_value_t = 0.5)]
        step: f64,
        #[arg(long, default_value = "hamming_opt")]
        rho: RhoFn,
    },
    /// Describe the columns of every output file.
    Schema,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::CONFIG_ERROR as u8 } else { 0 });
        }
    };
    match args.command {
        Command::Run { config, seed, out } => {
            let (code, msg) = cli::run_config_file(&config, seed, out);
            if code == exit::OK {
                println!("{msg}");
            } else {
                eprintln!("robann: {msg}");
            }
            ExitCode::from(code as u8)
        }
        Command::Beta {
            c_min,
            c_max,
            step,
            rho,
        } => {
            let section = cli::config::BetaSection {
                c_min,
                c_max,
                step,
                rho: vec![rho],
            };
            match section.grid() {
                Ok(cs) => {
                    let art = beta_table(&cs, &[rho]).finish("beta.csv");
                    print!("{}", String::from_utf8_lossy(&art.bytes));
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("robann: {e}");
                    ExitCode::from(exit::CONFIG_ERROR as u8)
                }
            }
        }
        Command::Schema => {
            print!("{}", cli::SCHEMA);
            ExitCode::SUCCESS
        }
    }
}
