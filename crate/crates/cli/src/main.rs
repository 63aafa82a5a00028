use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use summability_cli::runner::{load_config, run_config, RunOptions, EXIT_CONFIG};

#[derive(Parser)]
#[command(name = "summa", version, about = "Run summability experiments from JSON configs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a config file (or the name of a built-in example config).
    Run {
        config: String,
        /// Also write an SVG chart per experiment.
        #[arg(long)]
        plots: bool,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Override every experiment tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// List built-in methods, spaces, generators and example configs.
    List {
        /// Print the catalog as JSON.
        #[arg(long)]
        json: bool,
        /// Print the JSON of one example config.
        #[arg(long)]
        show: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List { json, show } => {
            if let Some(name) = show {
                return match summability_cli::catalog::example(&name) {
                    Some(ex) => {
                        print!("{}", ex.json);
                        ExitCode::SUCCESS
                    }
                    None => {
                        eprintln!("error: no example config named `{name}`");
                        ExitCode::from(EXIT_CONFIG as u8)
                    }
                };
            }
            let cat = summability_cli::list_builtins();
            if json {
                println!("{}", serde_json::to_string_pretty(&cat).expect("catalog serializes"));
            } else {
                print!("{cat}");
            }
            ExitCode::SUCCESS
        }
        Command::Run { config, plots, out, threads, tol } => {
            let opts = RunOptions { out, plots, threads, tol };
            let (name, text) = match load_config(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_CONFIG as u8);
                }
            };
            match run_config(&name, &text, &opts) {
                Ok(manifest) => {
                    for e in &manifest.experiments {
                        match (&e.summary, &e.error) {
                            (Some(s), _) => println!("{:<28} {:<10} {s}", e.id, e.status),
                            (_, Some(err)) => println!("{:<28} {:<10} {err}", e.id, e.status),
                            _ => println!("{:<28} {}", e.id, e.status),
                        }
                    }
                    println!("results in {} ({:.1} s)", opts.out.display(), manifest.wall_time_seconds);
                    ExitCode::from(manifest.exit_code() as u8)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
    }
}
