//! Command-line front end: `annotate`, `predict`, `tune` and `eval`.
//!
//! Exit codes: 0 on success, 1 for data and runtime errors, 2 for usage and
//! validation errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::annotation::AnnotationConfig;
use crate::error::Result;
use crate::io::to_json_pretty;
use crate::pipeline::{run_annotate, run_eval, run_predict, run_tune, PredictInputs};

#[derive(Debug, Parser)]
#[command(name = "trajpost", version, about = "Trajectory prediction by intention and cost ranking")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Label logged tracks with future trajectories, exits and lane sequences.
    Annotate {
        /// Obstacle log (JSON lines).
        #[arg(long)]
        log: PathBuf,
        /// Lane graph (JSON).
        #[arg(long)]
        map: PathBuf,
        /// Ego plan (JSON lines); validated only.
        #[arg(long)]
        ego: Option<PathBuf>,
        /// Label horizon in seconds.
        #[arg(long, value_parser = positive_f64)]
        horizon: f64,
        /// Spacing between anchors in seconds.
        #[arg(long, value_parser = positive_f64)]
        stride: f64,
        /// Dataset output (JSON lines).
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate, score and rank candidate trajectories for every obstacle.
    Predict {
        /// Obstacle log (JSON lines).
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        ego: Option<PathBuf>,
        /// Intention priors (JSON lines) keyed by obstacle and anchor time.
        #[arg(long)]
        priors: Option<PathBuf>,
        /// Cost weights (JSON).
        #[arg(long)]
        weights: PathBuf,
        /// Generation and triage config (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Predictions output (JSON lines).
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit cost weights to logged trajectories by max-margin descent.
    Tune {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        tuner_config: PathBuf,
        /// Tuned weights output (JSON).
        #[arg(long)]
        out: PathBuf,
    },
    /// Score predictions against labels with ADE and FDE.
    Eval {
        /// Predictions, or dataset records for self-evaluation (JSON lines).
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        /// Comma-separated horizons in seconds, e.g. `1,3`.
        #[arg(long, value_parser = horizon_list)]
        horizons: Horizons,
        /// Metric report output (JSON).
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Horizons(pub Vec<f64>);

fn positive_f64(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("must be positive, got {v}"))
    }
}

fn horizon_list(s: &str) -> std::result::Result<Horizons, String> {
    s.split(',').map(positive_f64).collect::<std::result::Result<_, _>>().map(Horizons)
}

fn execute(command: Command, stdout: &mut dyn Write) -> Result<()> {
    let line = |out: &mut dyn Write, text: &str| {
        // a closed stdout is not worth failing a completed run over
        let _ = out.write_all(text.as_bytes());
    };
    match command {
        Command::Annotate {
            log,
            map,
            ego,
            horizon,
            stride,
            out,
        } => {
            let cfg = AnnotationConfig {
                horizon_secs: horizon,
                stride_secs: stride,
                ..Default::default()
            };
            let summary = run_annotate(&log, &map, ego.as_deref(), &cfg, &out)?;
            line(stdout, &to_json_pretty(&summary));
        }
        Command::Predict {
            scene,
            map,
            ego,
            priors,
            weights,
            config,
            out,
        } => {
            let inputs = PredictInputs {
                scene: &scene,
                map: &map,
                ego: ego.as_deref(),
                priors: priors.as_deref(),
                weights: &weights,
                config: &config,
            };
            let summary = run_predict(&inputs, &out)?;
            line(stdout, &to_json_pretty(&summary));
        }
        Command::Tune {
            predictions,
            dataset,
            tuner_config,
            out,
        } => {
            let report = run_tune(&predictions, &dataset, &tuner_config, &out)?;
            line(stdout, &to_json_pretty(&report));
        }
        Command::Eval {
            predictions,
            dataset,
            horizons,
            out,
        } => {
            let report = run_eval(&predictions, &dataset, &horizons.0, &out)?;
            line(stdout, &report.table());
        }
    }
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the exit
/// code. Diagnostics go to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    2
                }
            };
        }
    };
    match execute(cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
