//! Enumerate lane paths per exit and sample speed profiles along them.

use std::path::Path;

use trajpost::generation::{generate_candidates, search_paths, GenerationConfig, Intention};
use trajpost::scene::load_scene;

fn main() -> trajpost::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let scene = load_scene(&dir.join("obstacle_log.jsonl"), &dir.join("intersection_map.json"), None)?;
    let track = scene.tracks.iter().find(|t| t.obstacle_id() == "veh_straight").unwrap();
    let state = track.state_at(1.0).unwrap();
    let cfg = GenerationConfig::default();

    for exit in scene.map.exits.keys() {
        let intention = Intention::Exit(exit.clone());
        let paths = search_paths(
            exit,
            &intention,
            &state,
            &scene.map,
            cfg.min_path_length_m,
            cfg.max_lanes,
            cfg.lane_capture_m,
        )?;
        let candidates = generate_candidates(exit, &intention, &state, &scene.map, &cfg)?;
        println!("{exit}: {} path(s), {} candidates", paths.len(), candidates.len());
        for c in &candidates {
            let end = c.points.last().unwrap();
            println!(
                "  a = {:>4.1}  ends at ({:>7.2}, {:>7.2}) speed {:>5.2}",
                c.profile.accel, end.position.x, end.position.y, end.speed
            );
        }
    }
    Ok(())
}
