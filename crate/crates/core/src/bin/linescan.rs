use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use linescan::config::{load_config, Overrides};
use linescan::export::write_text;
use linescan::pipeline::{
    output_dir, profile_table, run_coverage, run_optimize, write_coverage, write_optimize,
};
use linescan::Error;

#[derive(Parser)]
#[command(
    name = "linescan",
    version,
    about = "Dual-fan line-laser coverage simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Energy maps, area classes and coverage metrics for one schedule.
    Coverage {
        config: PathBuf,
        /// Azimuth step expansion ratio.
        #[arg(long)]
        alpha: Option<f64>,
        /// Initial azimuth step in degrees.
        #[arg(long)]
        dphi0: Option<f64>,
        /// Grid cell size in metres.
        #[arg(long = "grid-res")]
        grid_res: Option<f64>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Grid search over the azimuth schedule.
    Optimize {
        config: PathBuf,
        #[arg(long)]
        out: Option<String>,
    },
    /// Line-axis beam cuts as CSV, on stdout unless --out is given.
    Profile {
        config: PathBuf,
        #[arg(long)]
        out: Option<String>,
    },
}

fn run(cli: Cli) -> linescan::Result<()> {
    match cli.command {
        Command::Coverage {
            config,
            alpha,
            dphi0,
            grid_res,
            out,
        } => {
            let cfg = load_config(&config)?;
            let o = Overrides {
                alpha,
                dphi0_deg: dphi0,
                grid_resolution_m: grid_res,
                output_dir: out,
            };
            let run = run_coverage(&cfg, &o)?;
            let dir = output_dir(&cfg, &o);
            write_coverage(&run, &dir)?;
            let c = run.report.coverage.as_ref().expect("coverage present");
            println!(
                "hole_ratio {:.6}  classes {:?}  -> {}",
                c.hole_ratio,
                c.area_fractions,
                dir.display()
            );
        }
        Command::Optimize { config, out } => {
            let cfg = load_config(&config)?;
            let o = Overrides {
                output_dir: out,
                ..Overrides::default()
            };
            let run = run_optimize(&cfg, &o)?;
            let dir = output_dir(&cfg, &o);
            write_optimize(&run, &dir)?;
            let b = &run.result.best.candidate;
            println!(
                "best alpha {} dphi0 {} deg  objective {:.6}  -> {}",
                b.alpha,
                b.dphi0.to_degrees(),
                run.result.best.objective.unwrap_or(f64::NAN),
                dir.display()
            );
        }
        Command::Profile { config, out } => {
            let cfg = load_config(&config)?;
            let table = profile_table(&cfg)?;
            match out {
                Some(dir) => {
                    write_text(std::path::Path::new(&dir), "profile.csv", &table)?;
                }
                None => print!("{table}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_line(&e));
            ExitCode::FAILURE
        }
    }
}

/// One machine-parsable JSON line.
fn error_line(e: &Error) -> String {
    let mut v = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
    if let Error::Config { path, .. } = e {
        v["path"] = path.clone().into();
    }
    v.to_string()
}
