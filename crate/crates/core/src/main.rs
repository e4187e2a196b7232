use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use choreoqep::cli::commands::{self, SurfaceGrid, Which};
use choreoqep::cli::config::{Experiment, ExperimentConfig};
use choreoqep::cli::export::write_file;
use choreoqep::Result;

#[derive(Parser)]
#[command(name = "choreoqep", version, about = "Classical and discrete Euler-Lagrange experiments for quadratically interacting particles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV and SVG files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = WhichArg::Cel)]
    which: WhichArg,
    #[arg(long, global = true, value_enum, default_value_t = GridArg::Gamma)]
    grid: GridArg,
    /// Worker threads for sweeps (all cores when omitted).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Seed for randomized residual checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    Validate,
    Spectrum,
    Solve,
    ErrorSurface,
    Converge,
    Choreo,
}

#[derive(Clone, Copy, ValueEnum)]
enum WhichArg {
    Cel,
    Del,
}

#[derive(Clone, Copy, ValueEnum)]
enum GridArg {
    Gamma,
    K,
}

fn load(path: &Option<PathBuf>) -> Result<Experiment> {
    let path = path
        .as_deref()
        .ok_or_else(|| choreoqep::Error::ConfigParse("--config is required".into()))?;
    ExperimentConfig::load(path)?.resolve()
}

fn report_files(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn run(cli: &Cli) -> Result<()> {
    let exp = load(&cli.config)?;
    let which = match cli.which {
        WhichArg::Cel => Which::Cel,
        WhichArg::Del => Which::Del,
    };
    let out: &Path = &cli.out;
    commands::with_workers(cli.workers, || match cli.command {
        Command::Validate => {
            for line in commands::cmd_validate(&exp).lines() {
                println!("{line}");
            }
            Ok(())
        }
        Command::Spectrum => {
            let csv = commands::cmd_spectrum(&exp, which)?;
            report_files(&[write_file(out, &format!("spectrum_{}.csv", which.label()), &csv)?]);
            Ok(())
        }
        Command::Solve => {
            let solved = commands::cmd_solve(&exp, which, cli.seed)?;
            println!("relative residual: {:.3e}", solved.residual);
            if let Some(c) = solved.condition {
                println!("boundary system condition: {c:.3e}");
            }
            report_files(&commands::export_trajectory(out, &format!("trajectory_{}", which.label()), &solved.trajectory)?);
            Ok(())
        }
        Command::ErrorSurface => {
            let (grid, name) = match cli.grid {
                GridArg::Gamma => (SurfaceGrid::Gamma, "error_surface_gamma.csv"),
                GridArg::K => (SurfaceGrid::K, "error_surface_k.csv"),
            };
            let csv = commands::cmd_error_surface(&exp, grid)?;
            report_files(&[write_file(out, name, &csv)?]);
            Ok(())
        }
        Command::Converge => {
            let (result, csv) = commands::cmd_converge(&exp)?;
            match result.estimated_order {
                Some(o) => println!("estimated order: {o:.4}"),
                None => println!("estimated order: unavailable (fewer than three usable step sizes)"),
            }
            for p in result.points.iter().filter(|p| p.note.is_some()) {
                println!("epsilon {:.6e}: {}", p.epsilon, p.note.as_deref().unwrap_or_default());
            }
            report_files(&[write_file(out, "converge.csv", &csv)?]);
            Ok(())
        }
        Command::Choreo => {
            let run = commands::cmd_choreo(&exp, which)?;
            let r = &run.report;
            println!("period: {:.12}", run.period);
            println!("period defect: {:.3e}", r.period_defect);
            println!("delay defect: {:.3e}", r.delay_defect);
            println!("centre defect: {:.3e}", r.centre_defect);
            println!("choreography: {}", if r.passes() { "verified" } else { "failed" });
            report_files(&commands::export_trajectory(out, &format!("choreo_{}", which.label()), &run.trajectory)?);
            Ok(())
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
