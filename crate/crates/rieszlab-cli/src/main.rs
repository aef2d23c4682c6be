use clap::Parser;
use rieszlab_cli::{run, Command, RunOptions};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "rieszlab", version, about = "Jellium, UEG and transport experiments for Riesz kernels")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Caps the worker pool.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    tolerance: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = RunOptions { config: cli.config, out: cli.out, seed: cli.seed, threads: cli.threads, tolerance: cli.tolerance };
    match run(cli.command, &opts) {
        Ok(report) => {
            println!("{}", report.csv.display());
            println!("{}", report.summary.display());
            for p in report.extras {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
