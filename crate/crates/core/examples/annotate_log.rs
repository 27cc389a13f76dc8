//! Label the bundled log: future positions, exit taken and lane sequence.

use std::path::Path;

use trajpost::annotation::{build_dataset, AnnotationConfig};
use trajpost::scene::load_scene;

fn main() -> trajpost::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let scene = load_scene(&dir.join("obstacle_log.jsonl"), &dir.join("intersection_map.json"), None)?;
    let cfg = AnnotationConfig {
        horizon_secs: 3.0,
        ..Default::default()
    };
    let (records, summary) = build_dataset("fixture", &scene.tracks, &scene.map, &cfg)?;
    println!("{} records, {} anchors skipped", summary.records, summary.skipped);
    for r in records.iter().filter(|r| r.obstacle_id == "veh_left") {
        println!(
            "t = {:>4.1}  exit {:<8} lanes {:?}",
            r.anchor_time,
            r.exit_label.as_deref().unwrap_or("-"),
            r.lane_sequence_label.as_deref().unwrap_or(&[])
        );
    }
    Ok(())
}
