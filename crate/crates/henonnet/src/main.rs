use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use henonnet::config::ExperimentConfig;
use henonnet::experiment::{self, TrainOptions};
use henonnet::io::{self, Checkpoint};
use henonnet::{CliError, Result};
use henonnet_core::diagnostics::{max_error, random_nets};

#[derive(Parser)]
#[command(name = "henonnet", version, about = "Train and check Hénon-map flow-map networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the training set and the test trajectory of a config.
    GenData {
        #[arg(long)]
        config: PathBuf,
        /// Replaces the data and initialization seeds.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (default: the config's output_dir).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a network and write checkpoint, log, evaluation and report.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Number of epochs (full-batch Adam steps) to run.
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Continue from the checkpoint and optimizer state in the output directory.
        #[arg(long)]
        resume: bool,
    },
    /// Roll a checkpoint out along a stored trajectory.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        trajectory: PathBuf,
        /// CSV path for `step,t,rel_err` (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Structural checks on a checkpoint or on freshly drawn networks.
    Diagnose {
        #[arg(long, conflicts_with = "fresh")]
        checkpoint: Option<PathBuf>,
        /// variant:layers:width:d, e.g. T:5:30:1 (one random network per case).
        #[arg(long)]
        fresh: Option<String>,
        #[arg(long, default_value_t = 100)]
        cases: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also print the O(1/m) composition tables.
        #[arg(long)]
        composition: bool,
        /// Directory for diagnostics.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize a run directory.
    Report {
        dir: Option<PathBuf>,
        /// Rollout error ratio between two run directories (first / second).
        #[arg(long, num_args = 2, value_names = ["A", "B"])]
        compare: Option<Vec<PathBuf>>,
        /// Where to write the comparison CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig> {
    let cfg = ExperimentConfig::load(path)?;
    Ok(match seed {
        Some(s) => cfg.with_seed(s),
        None => cfg,
    })
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::GenData { config, seed, out } => {
            let cfg = load_config(&config, seed)?;
            let out = out.unwrap_or_else(|| cfg.output_dir.clone());
            let (ds, traj) = experiment::gen_data(&cfg, &out)?;
            println!(
                "wrote {} samples to {} and {} states to {}",
                ds.len(),
                out.join(experiment::DATASET_FILE).display(),
                traj.states.len(),
                out.join(experiment::TRAJECTORY_FILE).display()
            );
        }
        Command::Train { config, seed, epochs, out, resume } => {
            let cfg = load_config(&config, seed)?;
            let out = out.unwrap_or_else(|| cfg.output_dir.clone());
            let result = experiment::train(&cfg, &out, TrainOptions { epochs, resume })?;
            let r = &result.report;
            println!("trained {} epochs in {:.1} s", r.epochs_run, result.wall_clock_seconds);
            println!("final loss {:.6e}, max rel. error {:.6e}", r.final_loss, r.max_rel_err);
            println!("artifacts in {}", out.display());
        }
        Command::Eval { checkpoint, trajectory, out } => {
            let ck = io::read_checkpoint(&checkpoint)?;
            let traj = io::read_trajectory(&trajectory)?;
            let points = experiment::eval(&ck, &traj)?;
            for p in points.iter().filter(|p| p.absolute) {
                eprintln!("step {}: reference state is zero, error is absolute", p.step);
            }
            match out {
                Some(path) => {
                    io::write_rollout(&path, &points)?;
                    println!("max rel. error {:.6e}", max_error(&points));
                }
                None => {
                    println!("step,t,rel_err");
                    for p in &points {
                        let t = p.t.map(henonnet::json::format_f64).unwrap_or_default();
                        println!("{},{},{}", p.step, t, henonnet::json::format_f64(p.error));
                    }
                }
            }
        }
        Command::Diagnose { checkpoint, fresh, cases, seed, composition, out } => {
            if cases == 0 {
                return Err(CliError::config("--cases", "must be at least 1"));
            }
            let reports = match (checkpoint, fresh) {
                (Some(path), _) => match io::read_checkpoint(&path)? {
                    Checkpoint::Net(net) => experiment::structural_checks(&[net], cases, seed)?,
                    ck @ Checkpoint::Oracle(_) => {
                        let map = ck.flow_map()?;
                        experiment::structural_checks(&[map], cases, seed)?
                    }
                },
                (None, Some(spec)) => {
                    let arch = experiment::parse_fresh(&spec)?;
                    let nets = random_nets(&arch, cases, seed)?;
                    experiment::structural_checks(&nets, cases, seed)?
                }
                (None, None) if composition => Vec::new(),
                (None, None) => {
                    return Err(CliError::config("diagnose", "give --checkpoint, --fresh or --composition"))
                }
            };
            print!("{}", experiment::format_reports(&reports));
            if let Some(dir) = out {
                io::write_diagnostics(&dir.join(experiment::DIAGNOSTICS_FILE), &reports)?;
            }
            let mut ok = !experiment::any_failed(&reports);
            if composition {
                for (name, table) in experiment::composition_tables()? {
                    print!("{}", experiment::format_composition(name, &table));
                    ok &= table.ratios_within(1.6, 2.4);
                }
            }
            return Ok(ok);
        }
        Command::Report { dir, compare, out } => {
            if let Some(dir) = dir {
                print!("{}", experiment::format_summary(&experiment::summarize(&dir)?));
            }
            if let Some(pair) = compare {
                let c = experiment::compare(&pair[0], &pair[1])?;
                println!("max rel. error {}: {:.6e}", pair[0].display(), c.max_a);
                println!("max rel. error {}: {:.6e}", pair[1].display(), c.max_b);
                println!("ratio (first / second): {:.6e}", c.ratio);
                if let Some(path) = out {
                    experiment::write_comparison(&path, &c)?;
                }
            }
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        // a diagnostic check failed
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
