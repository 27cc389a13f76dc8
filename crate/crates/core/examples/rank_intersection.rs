//! Score candidates and turn priors 0.4/0.4/0.2 into posteriors over exits.

use std::path::Path;

use trajpost::costing::{rank_intentions, CostWeights, IntentionCandidates};
use trajpost::generation::{generate_candidates, GenerationConfig, Intention};
use trajpost::scene::load_scene;

fn main() -> trajpost::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let scene = load_scene(
        &dir.join("obstacle_log.jsonl"),
        &dir.join("intersection_map.json"),
        Some(&dir.join("ego_plan.jsonl")),
    )?;
    let track = scene.tracks.iter().find(|t| t.obstacle_id() == "veh_left").unwrap();
    let state = track.state_at(3.0).unwrap();
    let cfg = GenerationConfig::default();
    let weights = CostWeights::default_for_points(cfg.step_count());

    let mut groups = Vec::new();
    for (exit, prior) in [("E_north", 0.4), ("E_west", 0.4), ("E_east", 0.2)] {
        let intention = Intention::Exit(exit.into());
        groups.push(IntentionCandidates {
            intention_id: exit.into(),
            prior,
            candidates: generate_candidates(exit, &intention, &state, &scene.map, &cfg)?,
        });
    }
    let result = rank_intentions("veh_left", 3.0, &groups, scene.ego.as_ref(), &weights)?;
    println!("{:<8} {:>6} {:>9} {:>10} {:>9}", "exit", "prior", "min cost", "likelihood", "posterior");
    for i in &result.intentions {
        println!(
            "{:<8} {:>6.2} {:>9.4} {:>10.4} {:>9.4}",
            i.intention_id, i.prior, i.min_cost, i.likelihood, i.posterior
        );
    }
    let best = &result.selected().best_trajectory;
    println!("selected {} via {:?} at a = {}", result.selected_intention, best.lane_ids, best.accel);
    Ok(())
}
