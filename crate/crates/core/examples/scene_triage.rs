//! Load the bundled scene and classify each obstacle's scenario and priority.

use std::path::Path;

use trajpost::scene::{classify_priority, classify_scenario, load_scene, TriageConfig};

fn main() -> trajpost::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let scene = load_scene(
        &dir.join("obstacle_log.jsonl"),
        &dir.join("intersection_map.json"),
        Some(&dir.join("ego_plan.jsonl")),
    )?;
    let triage = TriageConfig::default();
    println!("{} lanes, {} exits", scene.map.lanes.len(), scene.map.exits.len());
    for track in &scene.tracks {
        let last = track.latest();
        println!(
            "{:<14} {} samples, last at ({:.1}, {:.1}): {:?}, {:?}",
            track.obstacle_id(),
            track.states().len(),
            last.position.x,
            last.position.y,
            classify_scenario(track, &scene.map, triage.scenario_buffer_m),
            classify_priority(track, scene.ego.as_ref(), triage.caution_threshold_m),
        );
    }
    Ok(())
}
