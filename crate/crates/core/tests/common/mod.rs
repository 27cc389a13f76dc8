#![allow(dead_code)]

use std::path::{Path, PathBuf};

use trajpost::cli;

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

/// Runs the CLI in-process and returns `(exit code, stdout, stderr)`.
pub fn run_cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["trajpost"];
    argv.extend_from_slice(args);
    let code = cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

pub const OUTPUTS: [&str; 4] = ["dataset.jsonl", "predictions.jsonl", "tuned_weights.json", "eval_report.json"];

/// annotate → predict → tune → eval on the bundled scene, writing the four
/// outputs into `dir`.
pub fn run_fixture_pipeline(dir: &Path) -> Result<(), String> {
    let f = |n: &str| fixture(n).display().to_string();
    let o = |n: &str| dir.join(n).display().to_string();
    let steps: [Vec<String>; 4] = [
        vec![
            "annotate".into(), "--log".into(), f("obstacle_log.jsonl"), "--map".into(), f("intersection_map.json"),
            "--ego".into(), f("ego_plan.jsonl"), "--horizon".into(), "8".into(), "--stride".into(), "1".into(),
            "--out".into(), o("dataset.jsonl"),
        ],
        vec![
            "predict".into(), "--scene".into(), f("obstacle_log.jsonl"), "--map".into(), f("intersection_map.json"),
            "--ego".into(), f("ego_plan.jsonl"), "--priors".into(), f("priors.jsonl"), "--weights".into(),
            f("weights.json"), "--config".into(), f("predict_config.json"), "--out".into(), o("predictions.jsonl"),
        ],
        vec![
            "tune".into(), "--predictions".into(), o("predictions.jsonl"), "--dataset".into(), o("dataset.jsonl"),
            "--tuner-config".into(), f("tuner_config.json"), "--out".into(), o("tuned_weights.json"),
        ],
        vec![
            "eval".into(), "--predictions".into(), o("predictions.jsonl"), "--dataset".into(), o("dataset.jsonl"),
            "--horizons".into(), "1,3".into(), "--out".into(), o("eval_report.json"),
        ],
    ];
    for step in &steps {
        let args: Vec<&str> = step.iter().map(String::as_str).collect();
        let (code, _, err) = run_cli(&args);
        if code != 0 {
            return Err(format!("{} exited {code}: {err}", step[0]));
        }
    }
    Ok(())
}
