//! Scene-level prediction and the file-to-file stages behind the CLI.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::annotation::{anchor_grid, build_dataset, AnnotationConfig, DatasetRecord, DatasetSummary};
use crate::autotune::{extract_examples, tune_weights, JoinSummary, TunerConfig};
use crate::costing::{rank_intentions, CostWeights, IntentionCandidates, IntentionResult, PredictionResult};
use crate::error::{Error, Result};
use crate::evaluation::{evaluate_forecasts, Forecast, MetricReport};
use crate::generation::{
    associate_lane, generate_candidates, heuristic_exit_priors, load_priors, normalize_priors,
    CandidateTrajectory, GenerationConfig, Intention, IntentionPrior, PriorTable,
};
use crate::geometry::Point2;
use crate::io::{self, time_key};
use crate::scene::{
    load_scene, priority_at, scenario_at, EgoPlan, ObstacleState, Priority, Scenario, Scene,
    TriageConfig,
};

/// One line of the predictions file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub obstacle_id: String,
    pub anchor_time: f64,
    pub scenario: Scenario,
    pub priority: Priority,
    /// Weights the candidates were scored with.
    pub weights: CostWeights,
    /// Ego positions `[dt, x, y]` on the prediction grid, when a plan was given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ego_reference: Option<Vec<[f64; 3]>>,
    pub intentions: Vec<IntentionResult>,
    pub selected_intention: String,
}

impl PredictionRecord {
    fn new(
        result: PredictionResult,
        scenario: Scenario,
        priority: Priority,
        weights: CostWeights,
        ego_reference: Option<Vec<[f64; 3]>>,
    ) -> Self {
        Self {
            obstacle_id: result.obstacle_id,
            anchor_time: result.anchor_time,
            scenario,
            priority,
            weights,
            ego_reference,
            intentions: result.intentions,
            selected_intention: result.selected_intention,
        }
    }

    pub fn selected(&self) -> &IntentionResult {
        self.intentions
            .iter()
            .find(|i| i.intention_id == self.selected_intention)
            .expect("selected intention is one of the intentions")
    }

    /// The ego plan the collision costs were computed against, in absolute time.
    pub fn ego_plan(&self) -> Result<Option<EgoPlan>> {
        self.ego_reference
            .as_ref()
            .map(|r| {
                EgoPlan::new(
                    r.iter()
                        .map(|&[dt, x, y]| (self.anchor_time + dt, Point2::new(x, y)))
                        .collect(),
                )
            })
            .transpose()
    }
}

/// Generation and triage settings read from the predict config file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PredictConfig {
    #[serde(flatten)]
    pub generation: GenerationConfig,
    pub triage: TriageConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkippedAnchor {
    pub obstacle_id: String,
    pub anchor_time: f64,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PredictSummary {
    pub predictions: usize,
    pub skipped: Vec<SkippedAnchor>,
}

fn ego_reference(ego: &EgoPlan, anchor: f64, cfg: &GenerationConfig) -> Vec<[f64; 3]> {
    (1..=cfg.step_count())
        .map(|k| {
            let dt = k as f64 * cfg.resolution_secs;
            let p = ego.position_at(anchor + dt).expect("plan is nonempty");
            [dt, p.x, p.y]
        })
        .collect()
}

/// Candidate groups with their priors, or the reason the anchor is skipped.
fn intention_groups(
    state: &ObstacleState,
    scene: &Scene,
    priors: Option<&[IntentionPrior]>,
    cfg: &GenerationConfig,
) -> Result<std::result::Result<Vec<IntentionCandidates>, String>> {
    let map = &scene.map;
    if associate_lane(state, map, cfg.lane_capture_m).is_none() {
        return Ok(Err("no lane association".into()));
    }
    let generate = |id: &str, intention: &Intention| generate_candidates(id, intention, state, map, cfg);

    if let Some(priors) = priors {
        let mut groups = Vec::with_capacity(priors.len());
        for p in priors {
            let candidates = generate(&p.intention_id, &Intention::resolve(&p.intention_id, map)?)?;
            if candidates.is_empty() {
                return Ok(Err(format!("intention {} is unreachable", p.intention_id)));
            }
            groups.push(IntentionCandidates {
                intention_id: p.intention_id.clone(),
                prior: p.prior,
                candidates,
            });
        }
        return Ok(Ok(groups));
    }

    if !map.exits.is_empty() {
        let mut reachable = Vec::new();
        for p in heuristic_exit_priors(state, map, cfg.temperature)? {
            let candidates = generate(&p.intention_id, &Intention::Exit(p.intention_id.clone()))?;
            if !candidates.is_empty() {
                reachable.push((p, candidates));
            }
        }
        if reachable.is_empty() {
            return Ok(Err("no reachable exit".into()));
        }
        let renormalized =
            match normalize_priors(reachable.iter().map(|(p, _)| p.clone()).collect()) {
                Ok(r) => r,
                Err(_) => return Ok(Err("exit priors vanish".into())),
            };
        return Ok(Ok(renormalized
            .into_iter()
            .zip(reachable)
            .map(|(p, (_, candidates))| IntentionCandidates {
                intention_id: p.intention_id,
                prior: p.prior,
                candidates,
            })
            .collect()));
    }

    // No exits: every reachable lane sequence is an intention, uniformly likely.
    let mut by_sequence: BTreeMap<String, Vec<CandidateTrajectory>> = BTreeMap::new();
    for mut c in generate("", &Intention::Any)? {
        let id = Intention::lane_sequence_id(&c.lane_ids);
        c.intention_id = id.clone();
        by_sequence.entry(id).or_default().push(c);
    }
    if by_sequence.is_empty() {
        return Ok(Err("no lane path".into()));
    }
    let prior = 1.0 / by_sequence.len() as f64;
    Ok(Ok(by_sequence
        .into_iter()
        .map(|(intention_id, candidates)| IntentionCandidates {
            intention_id,
            prior,
            candidates,
        })
        .collect()))
}

/// Predicts every obstacle at every anchor of the annotation grid. Output is
/// ordered by obstacle id, then anchor time. Obstacles off the lane graph are
/// reported in the summary rather than failing the run.
pub fn predict_scene(
    scene: &Scene,
    priors: Option<&PriorTable>,
    weights: &CostWeights,
    cfg: &PredictConfig,
) -> Result<(Vec<PredictionRecord>, PredictSummary)> {
    let gen = &cfg.generation;
    gen.validate()?;
    weights.validate()?;
    let mut tracks: Vec<_> = scene.tracks.iter().collect();
    tracks.sort_by(|a, b| a.obstacle_id().cmp(b.obstacle_id()));

    let mut out = Vec::new();
    let mut summary = PredictSummary::default();
    for track in tracks {
        for anchor in anchor_grid(track, gen.anchor_stride_secs, gen.min_history_secs) {
            let state = track.state_at(anchor).expect("anchor lies inside the track");
            let key = (track.obstacle_id().to_string(), time_key(anchor));
            let file_priors = priors.and_then(|t| t.get(&key)).map(Vec::as_slice);
            let groups = match intention_groups(&state, scene, file_priors, gen)? {
                Ok(g) => g,
                Err(reason) => {
                    summary.skipped.push(SkippedAnchor {
                        obstacle_id: key.0,
                        anchor_time: anchor,
                        reason,
                    });
                    continue;
                }
            };
            let ego = scene.ego.as_ref().filter(|e| !e.is_empty());
            let result = rank_intentions(track.obstacle_id(), anchor, &groups, ego, weights)?;
            out.push(PredictionRecord::new(
                result,
                scenario_at(&state.position, &scene.map, cfg.triage.scenario_buffer_m),
                priority_at(&state.position, ego, cfg.triage.caution_threshold_m),
                *weights,
                ego.map(|e| ego_reference(e, anchor, gen)),
            ));
        }
    }
    summary.predictions = out.len();
    Ok((out, summary))
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Reads a log and map, labels every anchor and writes the dataset. The road
/// test id is the log's file stem. An ego plan, when given, is parsed and
/// validated but does not affect labels.
pub fn run_annotate(
    log: &Path,
    map: &Path,
    ego: Option<&Path>,
    cfg: &AnnotationConfig,
    out: &Path,
) -> Result<DatasetSummary> {
    cfg.validate()?;
    let scene = load_scene(log, map, ego)?;
    let (records, summary) = build_dataset(&stem(log), &scene.tracks, &scene.map, cfg)?;
    io::write_atomic(out, &io::to_jsonl(&records))?;
    Ok(summary)
}

pub struct PredictInputs<'a> {
    pub scene: &'a Path,
    pub map: &'a Path,
    pub ego: Option<&'a Path>,
    pub priors: Option<&'a Path>,
    pub weights: &'a Path,
    pub config: &'a Path,
}

pub fn run_predict(inputs: &PredictInputs, out: &Path) -> Result<PredictSummary> {
    let cfg: PredictConfig = io::read_json(inputs.config)?;
    cfg.generation.validate()?;
    let weights = CostWeights::load(inputs.weights)?;
    let priors = inputs.priors.map(load_priors).transpose()?;
    let scene = load_scene(inputs.scene, inputs.map, inputs.ego)?;
    let (records, summary) = predict_scene(&scene, priors.as_ref(), &weights, &cfg)?;
    io::write_atomic(out, &io::to_jsonl(&records))?;
    Ok(summary)
}

pub fn read_predictions(path: &Path) -> Result<Vec<PredictionRecord>> {
    Ok(io::read_jsonl(path)?.into_iter().map(|(_, r)| r).collect())
}

pub fn read_dataset(path: &Path) -> Result<Vec<DatasetRecord>> {
    Ok(io::read_jsonl(path)?.into_iter().map(|(_, r)| r).collect())
}

/// Contents of the tuned weights file. It is also a valid weights file for
/// `predict`; the extra fields are ignored there.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TunedWeights {
    pub theta_acc: f64,
    pub theta_centripetal: f64,
    pub theta_collision: f64,
    pub z1: f64,
    pub z2: f64,
    pub final_loss: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneReport {
    #[serde(flatten)]
    pub weights: TunedWeights,
    pub join: JoinSummary,
}

/// Tunes thetas on the joined data. The normalizers are carried over from the
/// weights recorded in the predictions, which must all agree.
pub fn tune_from_records(
    predictions: &[PredictionRecord],
    dataset: &[DatasetRecord],
    cfg: &TunerConfig,
) -> Result<TuneReport> {
    cfg.validate()?;
    let (examples, join) = extract_examples(predictions, dataset)?;
    if examples.is_empty() {
        return Err(Error::NoTuningExamples);
    }
    let z = predictions[0].weights;
    if let Some(p) = predictions
        .iter()
        .find(|p| p.weights.z1 != z.z1 || p.weights.z2 != z.z2)
    {
        return Err(Error::InvalidValue(format!(
            "predictions disagree on normalizers (obstacle {} at {})",
            p.obstacle_id, p.anchor_time
        )));
    }
    let outcome = tune_weights(&examples, cfg)?;
    let [theta_acc, theta_centripetal, theta_collision] = outcome.theta;
    Ok(TuneReport {
        weights: TunedWeights {
            theta_acc,
            theta_centripetal,
            theta_collision,
            z1: z.z1,
            z2: z.z2,
            final_loss: outcome.final_loss(),
            iterations: outcome.iterations,
        },
        join,
    })
}

pub fn run_tune(predictions: &Path, dataset: &Path, tuner_config: &Path, out: &Path) -> Result<TuneReport> {
    let cfg: TunerConfig = io::read_json(tuner_config)?;
    let report = tune_from_records(&read_predictions(predictions)?, &read_dataset(dataset)?, &cfg)?;
    io::write_atomic(out, &io::to_json_pretty(&report.weights))?;
    Ok(report)
}

/// A line of the file being evaluated: a prediction, or a labeled record used
/// as its own forecast.
#[derive(Deserialize)]
#[serde(untagged)]
enum EvalInput {
    Prediction(Box<PredictionRecord>),
    Label(Box<DatasetRecord>),
}

pub fn read_forecasts(path: &Path) -> Result<Vec<Forecast>> {
    Ok(io::read_jsonl::<EvalInput>(path)?
        .into_iter()
        .map(|(_, r)| match r {
            EvalInput::Prediction(p) => Forecast::from(p.as_ref()),
            EvalInput::Label(d) => Forecast::from(d.as_ref()),
        })
        .collect())
}

pub fn run_eval(predictions: &Path, dataset: &Path, horizons: &[f64], out: &Path) -> Result<MetricReport> {
    if horizons.is_empty() || horizons.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
        return Err(Error::InvalidValue("horizons must be positive".into()));
    }
    let report = evaluate_forecasts(&read_forecasts(predictions)?, &read_dataset(dataset)?, horizons)?;
    io::write_atomic(out, &io::to_json_pretty(&report))?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{parse_ego_plan, parse_obstacle_log, MapGraph};

    const MAP: &str = r#"{
        "lanes": [
            {"id": "A", "centerline": [[0,0],[60,0]], "successors": ["B", "C"]},
            {"id": "B", "centerline": [[60,0],[200,0]], "successors": []},
            {"id": "C", "centerline": [[60,0],[60,140]], "successors": []}
        ],
        "exits": []
    }"#;

    fn scene(with_ego: bool) -> Scene {
        let mut log = String::new();
        for k in 0..20 {
            let t = k as f64 * 0.1;
            log.push_str(&format!(
                "{{\"obstacle_id\":\"a\",\"t\":{t},\"x\":{},\"y\":0.5,\"heading\":0,\"speed\":5}}\n",
                5.0 * t
            ));
            log.push_str(&format!(
                "{{\"obstacle_id\":\"off\",\"t\":{t},\"x\":300,\"y\":300,\"heading\":0,\"speed\":0}}\n"
            ));
        }
        let ego = "{\"t\":0,\"x\":0,\"y\":-20}\n{\"t\":20,\"x\":100,\"y\":-20}\n";
        Scene {
            tracks: parse_obstacle_log(&log, "log").unwrap(),
            map: MapGraph::from_json_str(MAP, "map").unwrap(),
            ego: with_ego.then(|| parse_ego_plan(ego, "ego").unwrap()),
        }
    }

    fn cfg() -> PredictConfig {
        let mut c = PredictConfig::default();
        c.generation.horizon_secs = 3.0;
        c.generation.accel_set = vec![-1.0, 0.0, 1.0];
        c
    }

    #[test]
    fn lane_sequences_become_uniform_intentions() {
        let c = cfg();
        let w = CostWeights::default_for_points(c.generation.step_count());
        let (recs, summary) = predict_scene(&scene(false), None, &w, &c).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(summary.skipped.len(), 2);
        assert!(summary.skipped.iter().all(|s| s.obstacle_id == "off"));
        let ids: Vec<_> = recs[0].intentions.iter().map(|i| i.intention_id.as_str()).collect();
        assert_eq!(ids, ["A>B", "A>C"]);
        assert!(recs[0].intentions.iter().all(|i| i.prior == 0.5));
        assert!(recs[0].ego_reference.is_none());
        // straight is cheaper than turning
        assert_eq!(recs[0].selected_intention, "A>B");
    }

    #[test]
    fn ego_reference_round_trips_collision_cost() {
        let c = cfg();
        let w = CostWeights::default_for_points(c.generation.step_count());
        let sc = scene(true);
        let (recs, _) = predict_scene(&sc, None, &w, &c).unwrap();
        let rec = &recs[1];
        let reference = rec.ego_reference.as_ref().unwrap();
        assert_eq!(reference.len(), 30);
        let rebuilt = rec.ego_plan().unwrap().unwrap();
        let best = &rec.selected().best_trajectory;
        let direct = crate::costing::cost_collision(&best.points, rec.anchor_time, sc.ego.as_ref(), w.z2);
        let via = crate::costing::cost_collision(&best.points, rec.anchor_time, Some(&rebuilt), w.z2);
        assert!((direct - via).abs() < 1e-15);
        assert!((best.cost.c_collision - direct).abs() < 1e-15);
    }

    #[test]
    fn file_priors_override_and_unreachable_skips() {
        let c = cfg();
        let w = CostWeights::default_for_points(c.generation.step_count());
        let priors = crate::generation::parse_priors(
            "{\"obstacle_id\":\"a\",\"anchor_time\":0,\"intentions\":[{\"id\":\"A>C\",\"prior\":3},{\"id\":\"A>B\",\"prior\":1}]}\n\
             {\"obstacle_id\":\"a\",\"anchor_time\":1,\"intentions\":[{\"id\":\"B\",\"prior\":1}]}\n",
            "priors",
        )
        .unwrap();
        let (recs, summary) = predict_scene(&scene(false), Some(&priors), &w, &c).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].intentions[0].intention_id, "A>C");
        assert_eq!(recs[0].intentions[0].prior, 0.75);
        assert!(summary.skipped.iter().any(|s| s.obstacle_id == "a" && s.reason.contains("B")));
    }

    #[test]
    fn tune_requires_joined_examples() {
        let err = tune_from_records(&[], &[], &TunerConfig::default()).unwrap_err();
        assert!(matches!(err, Error::NoTuningExamples));
    }
}
