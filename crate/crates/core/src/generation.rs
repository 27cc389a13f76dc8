//! Candidate trajectory generation.
//!
//! For each intention an obstacle may pursue, lane sequences are enumerated
//! from the obstacle's current lane, constant-acceleration speed profiles are
//! sampled within physical limits, and every (path, profile) pair is realized
//! as a timestamped trajectory along the path centerline.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::annotation::step_count;
use crate::error::{Error, Result};
use crate::geometry::{normalize_angle, Curve, Point2};
use crate::io;
use crate::scene::{MapGraph, ObstacleState};

const TIME_EPS: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntentionPrior {
    #[serde(rename = "id")]
    pub intention_id: String,
    pub prior: f64,
}

/// Rescales priors to sum to one. Negative, non-finite or all-zero priors are
/// rejected.
pub fn normalize_priors(mut priors: Vec<IntentionPrior>) -> Result<Vec<IntentionPrior>> {
    if priors.iter().any(|p| !(p.prior.is_finite() && p.prior >= 0.0)) {
        return Err(Error::InvalidValue("priors must be finite and non-negative".into()));
    }
    let total: f64 = priors.iter().map(|p| p.prior).sum();
    if total <= 0.0 {
        return Err(Error::InvalidValue("priors sum to zero".into()));
    }
    for p in &mut priors {
        p.prior /= total;
    }
    Ok(priors)
}

/// Softmax over negative heading misalignment between the obstacle and the
/// bearing to each exit. Stands in for a learned exit classifier.
pub fn heuristic_exit_priors(
    state: &ObstacleState,
    map: &MapGraph,
    temperature: f64,
) -> Result<Vec<IntentionPrior>> {
    if map.exits.is_empty() {
        return Err(Error::InvalidValue("map has no exits".into()));
    }
    if !(temperature > 0.0) {
        return Err(Error::InvalidValue(format!("temperature must be positive, got {temperature}")));
    }
    let logits: Vec<(String, f64)> = map
        .exits
        .values()
        .map(|e| {
            let d = e.position.sub(&state.position);
            let bearing = d.y.atan2(d.x);
            let misalignment = normalize_angle(bearing - state.heading).abs();
            (e.exit_id.clone(), -misalignment / temperature)
        })
        .collect();
    let max = logits.iter().map(|l| l.1).fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logits.iter().map(|l| (l.1 - max).exp()).collect();
    let z: f64 = weights.iter().sum();
    Ok(logits
        .into_iter()
        .zip(weights)
        .map(|((id, _), w)| IntentionPrior {
            intention_id: id,
            prior: w / z,
        })
        .collect())
}

#[derive(Debug, Deserialize, Serialize)]
pub struct PriorsRecord {
    pub obstacle_id: String,
    pub anchor_time: f64,
    pub intentions: Vec<IntentionPrior>,
}

/// Priors keyed by `(obstacle_id, anchor time key)`.
pub type PriorTable = BTreeMap<(String, i64), Vec<IntentionPrior>>;

pub fn parse_priors(text: &str, file: &str) -> Result<PriorTable> {
    let mut table = PriorTable::new();
    for (line, rec) in io::parse_jsonl::<PriorsRecord>(text, file)? {
        let priors = normalize_priors(rec.intentions).map_err(|e| Error::parse(file, line, e))?;
        let key = (rec.obstacle_id.clone(), io::time_key(rec.anchor_time));
        if table.insert(key, priors).is_some() {
            return Err(Error::KeyCollision {
                obstacle_id: rec.obstacle_id,
                anchor_time: rec.anchor_time,
            });
        }
    }
    Ok(table)
}

pub fn load_priors(path: &Path) -> Result<PriorTable> {
    parse_priors(&io::read_to_string(path)?, &path.display().to_string())
}

/// What an intention id refers to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Intention {
    /// Leave the intersection through this exit.
    Exit(String),
    /// Follow these lanes in order.
    LaneSequence(Vec<String>),
    /// Any lane sequence.
    Any,
}

pub const LANE_SEQUENCE_SEP: char = '>';

impl Intention {
    /// Resolves an id: exit ids first, then `A>B>C` lane sequences.
    pub fn resolve(id: &str, map: &MapGraph) -> Result<Self> {
        if map.exits.contains_key(id) {
            return Ok(Intention::Exit(id.to_string()));
        }
        let lanes: Vec<String> = id.split(LANE_SEQUENCE_SEP).map(str::to_string).collect();
        if lanes.iter().all(|l| map.lanes.contains_key(l)) {
            return Ok(Intention::LaneSequence(lanes));
        }
        Err(Error::InvalidValue(format!("unknown intention {id}")))
    }

    pub fn lane_sequence_id(lanes: &[String]) -> String {
        lanes.join(&LANE_SEQUENCE_SEP.to_string())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathCandidate {
    pub intention_id: String,
    pub lane_ids: Vec<String>,
    pub curve: Curve,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerationConfig {
    pub accel_set: Vec<f64>,
    pub a_min: f64,
    pub a_max: f64,
    pub v_max: f64,
    pub horizon_secs: f64,
    pub resolution_secs: f64,
    pub min_path_length_m: f64,
    pub max_lanes: usize,
    pub temperature: f64,
    /// Maximum distance from a lane centerline for the obstacle to be on it.
    pub lane_capture_m: f64,
    /// Prediction anchors are placed on the same grid as annotation anchors.
    pub anchor_stride_secs: f64,
    pub min_history_secs: f64,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            accel_set: vec![-4.0, -2.0, -1.0, 0.0, 1.0, 2.0],
            a_min: -6.0,
            a_max: 4.0,
            v_max: 25.0,
            horizon_secs: 8.0,
            resolution_secs: 0.1,
            min_path_length_m: 100.0,
            max_lanes: 5,
            temperature: 0.5,
            lane_capture_m: 2.0,
            anchor_stride_secs: 1.0,
            min_history_secs: 0.0,
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidValue(m));
        if self.accel_set.is_empty() || self.accel_set.iter().any(|a| !a.is_finite()) {
            return bad("accel_set must be a nonempty list of finite numbers".into());
        }
        if !(self.a_min <= self.a_max) {
            return bad(format!("a_min {} exceeds a_max {}", self.a_min, self.a_max));
        }
        for (name, v) in [
            ("v_max", self.v_max),
            ("horizon_secs", self.horizon_secs),
            ("resolution_secs", self.resolution_secs),
            ("min_path_length_m", self.min_path_length_m),
            ("temperature", self.temperature),
            ("lane_capture_m", self.lane_capture_m),
            ("anchor_stride_secs", self.anchor_stride_secs),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if self.max_lanes == 0 {
            return bad("max_lanes must be at least 1".into());
        }
        if !(self.min_history_secs >= 0.0) {
            return bad("min_history_secs must be non-negative".into());
        }
        Ok(())
    }

    pub fn limits(&self) -> ProfileLimits {
        ProfileLimits {
            a_min: self.a_min,
            a_max: self.a_max,
            v_max: self.v_max,
        }
    }

    pub fn step_count(&self) -> usize {
        step_count(self.horizon_secs, self.resolution_secs)
    }
}

/// The lane the obstacle is driving on: nearest centerline within `capture`
/// whose direction at the projection is within 90° of the obstacle heading.
pub fn associate_lane<'m>(
    state: &ObstacleState,
    map: &'m MapGraph,
    capture: f64,
) -> Option<(&'m str, f64)> {
    let mut best: Option<(&str, f64, f64)> = None;
    for lane in map.lanes.values() {
        let proj = lane.centerline.project_point(&state.position);
        if proj.distance > capture {
            continue;
        }
        let (_, tangent) = lane.centerline.point_at_s(proj.s).expect("s >= 0");
        if normalize_angle(tangent - state.heading).abs() > FRAC_PI_2 {
            continue;
        }
        if best.is_none_or(|b| proj.distance < b.2) {
            best = Some((&lane.lane_id, proj.s, proj.distance));
        }
    }
    best.map(|(id, s, _)| (id, s))
}

struct PathSearch<'a> {
    map: &'a MapGraph,
    min_length: f64,
    max_lanes: usize,
    /// Lanes that must be followed, in order, from the start lane.
    forced: &'a [String],
    /// Lane the sequence must contain before it may stop.
    target: Option<&'a str>,
    found: Vec<Vec<String>>,
}

impl PathSearch<'_> {
    fn visit(&mut self, seq: &mut Vec<String>, length: f64) {
        let reached = self.target.is_none_or(|t| seq.iter().any(|l| l == t));
        let depth = seq.len();
        if (reached && length >= self.min_length && depth >= self.forced.len())
            || depth == self.max_lanes
        {
            if reached {
                self.found.push(seq.clone());
            }
            return;
        }
        let lane = &self.map.lanes[seq.last().expect("nonempty")];
        let next: Vec<&String> = match self.forced.get(depth) {
            Some(f) => lane.successor_ids.iter().filter(|s| *s == f).collect(),
            None => lane.successor_ids.iter().collect(),
        };
        let mut extended = false;
        for succ in next {
            if seq.contains(succ) {
                continue;
            }
            extended = true;
            let len = self.map.lanes[succ].centerline.length();
            seq.push(succ.clone());
            self.visit(seq, length + len);
            seq.pop();
        }
        if !extended && reached && depth >= self.forced.len() {
            self.found.push(seq.clone());
        }
    }
}

/// Enumerates lane-sequence paths for one intention from the obstacle's
/// current lane. Each path curve starts at the obstacle's projection onto its
/// lane.
pub fn search_paths(
    intention_id: &str,
    intention: &Intention,
    start: &ObstacleState,
    map: &MapGraph,
    min_length: f64,
    max_lanes: usize,
    lane_capture: f64,
) -> Result<Vec<PathCandidate>> {
    let (start_lane, start_s) =
        associate_lane(start, map, lane_capture).ok_or_else(|| Error::NoAssociation {
            obstacle_id: start.obstacle_id.clone(),
        })?;

    let (forced, target): (&[String], Option<&str>) = match intention {
        Intention::Any => (&[], None),
        Intention::Exit(e) => (&[], Some(map.exits[e].associated_lane_id.as_str())),
        Intention::LaneSequence(lanes) => match lanes.iter().position(|l| l == start_lane) {
            Some(j) => (&lanes[j..], None),
            None => return Ok(Vec::new()),
        },
    };

    let first = &map.lanes[start_lane];
    let mut search = PathSearch {
        map,
        min_length,
        max_lanes,
        forced,
        target,
        found: Vec::new(),
    };
    let mut seq = vec![start_lane.to_string()];
    search.visit(&mut seq, first.centerline.length() - start_s);

    search
        .found
        .into_iter()
        .map(|lane_ids| {
            let head = first.centerline.trimmed_from(start_s)?;
            let tail = lane_ids[1..]
                .iter()
                .flat_map(|id| map.lanes[id].centerline.points().iter().copied());
            let curve = Curve::from_points_dedup(head.points().iter().copied().chain(tail))?;
            Ok(PathCandidate {
                intention_id: intention_id.to_string(),
                lane_ids,
                curve,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileLimits {
    pub a_min: f64,
    pub a_max: f64,
    pub v_max: f64,
}

/// Constant-acceleration speed profile with speed clamped to `[0, v_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeedProfile {
    pub v0: f64,
    pub accel: f64,
    pub duration: f64,
    pub resolution: f64,
    pub v_max: f64,
}

impl SpeedProfile {
    fn raw_speed(&self, t: f64) -> f64 {
        self.v0 + self.accel * t
    }

    pub fn speed_at(&self, t: f64) -> f64 {
        self.raw_speed(t).clamp(0.0, self.v_max)
    }

    /// Acceleration actually applied at `t`: zero once a clamp is active.
    pub fn effective_accel_at(&self, t: f64) -> f64 {
        let v = self.raw_speed(t);
        if v > 0.0 && v < self.v_max {
            self.accel
        } else {
            0.0
        }
    }

    /// Exact travelled distance over `[0, t]`, integrating the clamped speed
    /// piecewise between the times the unclamped speed crosses 0 and `v_max`.
    pub fn distance_at(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let mut breaks = vec![0.0, t];
        if self.accel != 0.0 {
            for crossing in [-self.v0 / self.accel, (self.v_max - self.v0) / self.accel] {
                if crossing > 0.0 && crossing < t {
                    breaks.push(crossing);
                }
            }
        }
        breaks.sort_by(f64::total_cmp);
        breaks
            .windows(2)
            .map(|w| {
                let (ta, tb) = (w[0], w[1]);
                let mid = self.raw_speed(0.5 * (ta + tb));
                if mid <= 0.0 {
                    0.0
                } else if mid >= self.v_max {
                    self.v_max * (tb - ta)
                } else {
                    self.v0 * (tb - ta) + 0.5 * self.accel * (tb * tb - ta * ta)
                }
            })
            .sum()
    }

    pub fn step_count(&self) -> usize {
        step_count(self.duration, self.resolution)
    }
}

/// One profile per admissible acceleration, in `accel_set` order.
pub fn sample_profiles(
    v0: f64,
    accel_set: &[f64],
    horizon: f64,
    resolution: f64,
    limits: &ProfileLimits,
) -> Vec<SpeedProfile> {
    accel_set
        .iter()
        .filter(|a| (limits.a_min..=limits.a_max).contains(*a))
        .map(|&accel| SpeedProfile {
            v0: v0.max(0.0),
            accel,
            duration: horizon,
            resolution,
            v_max: limits.v_max,
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 7]", into = "[f64; 7]")]
pub struct TrajectoryPoint {
    /// Seconds since the trajectory's start time.
    pub t: f64,
    pub position: Point2,
    pub heading: f64,
    pub speed: f64,
    pub curvature: f64,
    pub accel: f64,
}

impl From<[f64; 7]> for TrajectoryPoint {
    fn from([t, x, y, heading, speed, curvature, accel]: [f64; 7]) -> Self {
        Self {
            t,
            position: Point2::new(x, y),
            heading,
            speed,
            curvature,
            accel,
        }
    }
}

impl From<TrajectoryPoint> for [f64; 7] {
    fn from(p: TrajectoryPoint) -> Self {
        [
            p.t,
            p.position.x,
            p.position.y,
            p.heading,
            p.speed,
            p.curvature,
            p.accel,
        ]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CandidateTrajectory {
    pub intention_id: String,
    pub lane_ids: Vec<String>,
    /// Absolute time of the anchor; point times are relative to it.
    pub start_time: f64,
    pub points: Vec<TrajectoryPoint>,
    pub profile: SpeedProfile,
}

pub fn realize_trajectory(
    path: &PathCandidate,
    profile: &SpeedProfile,
    start_time: f64,
) -> CandidateTrajectory {
    let points = (1..=profile.step_count())
        .map(|k| {
            let t = k as f64 * profile.resolution;
            let s = profile.distance_at(t);
            let (position, heading) = path.curve.point_at_s(s).expect("distance is non-negative");
            TrajectoryPoint {
                t,
                position,
                heading,
                speed: profile.speed_at(t),
                curvature: path.curve.curvature_at_s(s),
                accel: profile.effective_accel_at(t),
            }
        })
        .collect();
    CandidateTrajectory {
        intention_id: path.intention_id.clone(),
        lane_ids: path.lane_ids.clone(),
        start_time,
        points,
        profile: *profile,
    }
}

/// All `paths × profiles` candidates for one intention.
pub fn generate_candidates(
    intention_id: &str,
    intention: &Intention,
    start: &ObstacleState,
    map: &MapGraph,
    cfg: &GenerationConfig,
) -> Result<Vec<CandidateTrajectory>> {
    let paths = search_paths(
        intention_id,
        intention,
        start,
        map,
        cfg.min_path_length_m,
        cfg.max_lanes,
        cfg.lane_capture_m,
    )?;
    let profiles = sample_profiles(
        start.speed,
        &cfg.accel_set,
        cfg.horizon_secs,
        cfg.resolution_secs,
        &cfg.limits(),
    );
    Ok(paths
        .iter()
        .flat_map(|path| {
            profiles
                .iter()
                .map(move |prof| realize_trajectory(path, prof, start.timestamp))
        })
        .collect())
}

/// Extends a trajectory to `target_horizon` by constant turn rate and velocity
/// propagation from its tail. Turn rate and arc speed come from the last three
/// points (last two with zero turn rate when only two exist).
pub fn extend_trajectory(
    traj: &[(f64, Point2)],
    target_horizon: f64,
    resolution: f64,
) -> Result<Vec<(f64, Point2)>> {
    if traj.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: traj.len(),
        });
    }
    if !(resolution > 0.0) {
        return Err(Error::InvalidValue(format!("resolution must be positive, got {resolution}")));
    }
    let mut out = traj.to_vec();
    let (t_last, p_last) = *traj.last().expect("len >= 2");
    if t_last >= target_horizon - TIME_EPS {
        return Ok(out);
    }

    let (t_prev, p_prev) = traj[traj.len() - 2];
    let chord = p_last.sub(&p_prev);
    let dt = t_last - t_prev;
    let chord_heading = chord.y.atan2(chord.x);
    let turn_rate = if traj.len() >= 3 && chord.norm() > 0.0 {
        let (t_first, p_first) = traj[traj.len() - 3];
        let before = p_prev.sub(&p_first);
        if before.norm() > 0.0 {
            normalize_angle(chord_heading - before.y.atan2(before.x)) / (0.5 * (t_last - t_first))
        } else {
            0.0
        }
    } else {
        0.0
    };
    // a chord subtending angle φ is shorter than its arc by sin(φ/2)/(φ/2)
    let half = 0.5 * turn_rate * dt;
    let arc_factor = if half.abs() > 1e-12 { half / half.sin() } else { 1.0 };
    let speed = chord.norm() / dt * arc_factor;
    let heading = chord_heading + half;

    let mut k = 1;
    loop {
        let tau = k as f64 * resolution;
        let t = t_last + tau;
        let p = if turn_rate.abs() < 1e-12 {
            p_last.add(&Point2::new(heading.cos(), heading.sin()).scale(speed * tau))
        } else {
            let r = speed / turn_rate;
            let th = heading + turn_rate * tau;
            Point2::new(
                p_last.x + r * (th.sin() - heading.sin()),
                p_last.y - r * (th.cos() - heading.cos()),
            )
        };
        out.push((t, p));
        if t >= target_horizon - TIME_EPS {
            break;
        }
        k += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn state(x: f64, y: f64, heading: f64, speed: f64) -> ObstacleState {
        ObstacleState {
            obstacle_id: "o".into(),
            timestamp: 0.0,
            position: Point2::new(x, y),
            heading,
            speed,
            polygon: None,
        }
    }

    fn map(json: &str) -> MapGraph {
        MapGraph::from_json_str(json, "m").unwrap()
    }

    fn chain() -> MapGraph {
        map(r#"{"lanes": [
            {"id": "A", "centerline": [[0,0],[50,0]], "successors": ["B"]},
            {"id": "B", "centerline": [[50,0],[100,0]], "successors": ["C"]},
            {"id": "C", "centerline": [[100,0],[150,0]], "successors": []}
        ]}"#)
    }

    fn straight_path(len: f64) -> PathCandidate {
        PathCandidate {
            intention_id: "i".into(),
            lane_ids: vec!["A".into()],
            curve: Curve::new(vec![Point2::new(0.0, 0.0), Point2::new(len, 0.0)]).unwrap(),
        }
    }

    fn profile(v0: f64, accel: f64, v_max: f64, duration: f64) -> SpeedProfile {
        SpeedProfile {
            v0,
            accel,
            duration,
            resolution: 0.1,
            v_max,
        }
    }

    #[test]
    fn singleton_and_symmetric_priors() {
        let one = map(r#"{"lanes": [{"id": "A", "centerline": [[0,0],[1,0]]}],
            "exits": [{"id": "E", "x": 10, "y": 5, "heading": 0, "lane_id": "A"}]}"#);
        let p = heuristic_exit_priors(&state(0.0, 0.0, 0.0, 1.0), &one, 0.5).unwrap();
        assert_eq!(p.len(), 1);
        assert!((p[0].prior - 1.0).abs() < 1e-15);

        let two = map(r#"{"lanes": [{"id": "A", "centerline": [[0,0],[1,0]]}],
            "exits": [{"id": "L", "x": 10, "y": 10, "heading": 0, "lane_id": "A"},
                      {"id": "R", "x": 10, "y": -10, "heading": 0, "lane_id": "A"}]}"#);
        let p = heuristic_exit_priors(&state(0.0, 0.0, 0.0, 1.0), &two, 0.5).unwrap();
        assert!((p[0].prior - 0.5).abs() < 1e-12 && (p[1].prior - 0.5).abs() < 1e-12);
        // facing left exit
        let p = heuristic_exit_priors(&state(0.0, 0.0, PI / 4.0, 1.0), &two, 0.5).unwrap();
        assert!(p[0].prior > 0.9);
    }

    #[test]
    fn prior_file_overrides_and_normalizes() {
        let text = r#"{"obstacle_id":"o","anchor_time":1.0,"intentions":[{"id":"L","prior":0.4},{"id":"S","prior":0.4},{"id":"R","prior":0.2}]}
{"obstacle_id":"o","anchor_time":2.0,"intentions":[{"id":"L","prior":2},{"id":"S","prior":2}]}
"#;
        let table = parse_priors(text, "p").unwrap();
        let p = &table[&("o".to_string(), io::time_key(1.0))];
        assert_eq!(p.iter().map(|x| x.prior).collect::<Vec<_>>(), vec![0.4, 0.4, 0.2]);
        let p = &table[&("o".to_string(), io::time_key(2.0))];
        assert_eq!(p[0].prior, 0.5);

        let dup = format!("{}{}", text.lines().next().unwrap(), "\n").repeat(2);
        assert!(matches!(parse_priors(&dup, "p"), Err(Error::KeyCollision { .. })));
    }

    #[test]
    fn linear_chain_single_path() {
        let m = chain();
        let paths = search_paths("i", &Intention::Any, &state(10.0, 0.5, 0.0, 5.0), &m, 80.0, 5, 2.0).unwrap();
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].lane_ids, vec!["A", "B"]);
        // trimmed at the projection (x = 10)
        assert_eq!(paths[0].curve.points()[0], Point2::new(10.0, 0.0));
        assert!((paths[0].curve.length() - 90.0).abs() < 1e-12);
    }

    #[test]
    fn fork_yields_two_paths() {
        let m = map(r#"{"lanes": [
            {"id": "A", "centerline": [[0,0],[50,0]], "successors": ["B", "C"]},
            {"id": "B", "centerline": [[50,0],[100,0]], "successors": []},
            {"id": "C", "centerline": [[50,0],[50,50]], "successors": []}
        ], "exits": [{"id": "EC", "x": 50, "y": 50, "heading": 1.57, "lane_id": "C"}]}"#);
        let s = state(10.0, 0.0, 0.0, 5.0);
        let paths = search_paths("i", &Intention::Any, &s, &m, 60.0, 5, 2.0).unwrap();
        let ids: Vec<_> = paths.iter().map(|p| p.lane_ids.clone()).collect();
        assert_eq!(ids, vec![vec!["A", "B"], vec!["A", "C"]]);

        let exit = search_paths("EC", &Intention::Exit("EC".into()), &s, &m, 60.0, 5, 2.0).unwrap();
        assert_eq!(exit.len(), 1);
        assert_eq!(exit[0].lane_ids, vec!["A", "C"]);

        let seq = Intention::resolve("A>B", &m).unwrap();
        let p = search_paths("A>B", &seq, &s, &m, 60.0, 5, 2.0).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].lane_ids, vec!["A", "B"]);
    }

    #[test]
    fn cycles_terminate() {
        let m = map(r#"{"lanes": [
            {"id": "A", "centerline": [[0,0],[50,0]], "successors": ["B"]},
            {"id": "B", "centerline": [[50,0],[50,10],[0,10],[0,0.0001]], "successors": ["A"]}
        ]}"#);
        let paths = search_paths("i", &Intention::Any, &state(1.0, 0.0, 0.0, 5.0), &m, 1000.0, 10, 2.0).unwrap();
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].lane_ids, vec!["A", "B"]);
    }

    #[test]
    fn off_map_is_an_error() {
        let err = search_paths("i", &Intention::Any, &state(10.0, 30.0, 0.0, 5.0), &chain(), 50.0, 5, 2.0);
        assert!(matches!(err, Err(Error::NoAssociation { .. })));
        // wrong-way travel does not associate either
        let err = search_paths("i", &Intention::Any, &state(10.0, 0.0, PI, 5.0), &chain(), 50.0, 5, 2.0);
        assert!(matches!(err, Err(Error::NoAssociation { .. })));
    }

    #[test]
    fn profile_filtering() {
        let lim = ProfileLimits { a_min: -4.0, a_max: 4.0, v_max: 30.0 };
        assert_eq!(sample_profiles(10.0, &[-2.0, 0.0, 2.0], 3.0, 0.1, &lim).len(), 3);
        assert!(sample_profiles(10.0, &[-6.0], 3.0, 0.1, &lim).is_empty());
    }

    #[test]
    fn profile_clamps_at_v_max() {
        let p = profile(10.0, 2.0, 12.0, 3.0);
        assert_eq!(p.speed_at(0.5), 11.0);
        assert_eq!(p.speed_at(1.0), 12.0);
        assert_eq!(p.speed_at(2.5), 12.0);
        // 11 m over the ramp, then 12 m/s
        assert!((p.distance_at(3.0) - (11.0 + 24.0)).abs() < 1e-12);
        assert_eq!(p.effective_accel_at(0.5), 2.0);
        assert_eq!(p.effective_accel_at(1.5), 0.0);
    }

    #[test]
    fn stopping_profile_saturates() {
        let p = profile(2.0, -2.0, 25.0, 3.0);
        assert!((p.distance_at(1.0) - 1.0).abs() < 1e-15);
        assert!((p.distance_at(3.0) - 1.0).abs() < 1e-15);
        assert_eq!(p.speed_at(2.0), 0.0);
    }

    #[test]
    fn uniform_motion_on_straight_path() {
        let traj = realize_trajectory(&straight_path(100.0), &profile(10.0, 0.0, 25.0, 3.0), 0.0);
        assert_eq!(traj.points.len(), 30);
        for (k, p) in traj.points.iter().enumerate() {
            assert!((p.position.x - (k + 1) as f64).abs() < 1e-9);
            assert_eq!(p.curvature, 0.0);
            assert_eq!(p.accel, 0.0);
        }
        let traj = realize_trajectory(&straight_path(100.0), &profile(5.0, 2.0, 25.0, 3.0), 0.0);
        assert!((traj.points[29].position.x - 24.0).abs() < 1e-9);
    }

    #[test]
    fn straight_extension() {
        let tail: Vec<_> = (0..5).map(|k| (k as f64 * 0.1, Point2::new(k as f64, 2.0))).collect();
        let ext = extend_trajectory(&tail, 1.0, 0.1).unwrap();
        assert_eq!(ext.len(), 11);
        for (t, p) in &ext {
            assert!((p.x - t * 10.0).abs() < 1e-9 && (p.y - 2.0).abs() < 1e-12);
        }
        assert_eq!(extend_trajectory(&tail, 0.3, 0.1).unwrap(), tail);
        assert!(matches!(
            extend_trajectory(&tail[..1], 1.0, 0.1),
            Err(Error::TooFewPoints { .. })
        ));
    }

    #[test]
    fn two_point_extension_goes_straight() {
        let tail = [(0.0, Point2::new(0.0, 0.0)), (0.5, Point2::new(3.0, 4.0))];
        let ext = extend_trajectory(&tail, 1.0, 0.5).unwrap();
        assert!(ext[2].1.distance(&Point2::new(6.0, 8.0)) < 1e-12);
    }

    #[test]
    fn circular_extension_stays_on_circle() {
        let (r, omega) = (15.0, 0.4);
        let tail: Vec<_> = (0..10)
            .map(|k| {
                let t = k as f64 * 0.1;
                (t, Point2::new(r * (omega * t).cos(), r * (omega * t).sin()))
            })
            .collect();
        let ext = extend_trajectory(&tail, 0.9 + 2.0, 0.1).unwrap();
        assert_eq!(ext.len(), 30);
        for (t, p) in &ext[10..] {
            assert!((p.norm() - r).abs() < 0.01 * r);
            // analytic arc position
            let q = Point2::new(r * (omega * t).cos(), r * (omega * t).sin());
            assert!(p.distance(&q) < 1e-9, "t={t}");
        }
    }
}
