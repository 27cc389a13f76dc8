//! annotate, predict, tune and eval on the bundled scene, in memory.

use std::path::Path;

use trajpost::annotation::{build_dataset, AnnotationConfig};
use trajpost::autotune::TunerConfig;
use trajpost::costing::CostWeights;
use trajpost::evaluation::evaluate_run;
use trajpost::generation::load_priors;
use trajpost::io::read_json;
use trajpost::pipeline::{predict_scene, tune_from_records, PredictConfig};
use trajpost::scene::load_scene;

fn main() -> trajpost::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let scene = load_scene(
        &dir.join("obstacle_log.jsonl"),
        &dir.join("intersection_map.json"),
        Some(&dir.join("ego_plan.jsonl")),
    )?;

    let (dataset, ds) = build_dataset("fixture", &scene.tracks, &scene.map, &AnnotationConfig::default())?;
    println!("annotate: {} records, {} skipped", ds.records, ds.skipped);

    let cfg: PredictConfig = read_json(&dir.join("predict_config.json"))?;
    let weights = CostWeights::load(&dir.join("weights.json"))?;
    let priors = load_priors(&dir.join("priors.jsonl"))?;
    let (predictions, ps) = predict_scene(&scene, Some(&priors), &weights, &cfg)?;
    println!("predict: {} predictions, {} anchors skipped", ps.predictions, ps.skipped.len());

    let tuner: TunerConfig = read_json(&dir.join("tuner_config.json"))?;
    let tuned = tune_from_records(&predictions, &dataset, &tuner)?;
    let w = &tuned.weights;
    println!(
        "tune: θ = ({:.3}, {:.3}, {:.3}), loss {:.3} after {} iterations",
        w.theta_acc, w.theta_centripetal, w.theta_collision, w.final_loss, w.iterations
    );

    let report = evaluate_run(&predictions, &dataset, &[1.0, 3.0])?;
    print!("{}", report.table());
    Ok(())
}
