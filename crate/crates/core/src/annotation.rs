//! Offboard labeling of logged tracks: future positions, the intersection exit
//! taken and the lane sequence followed.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::scene::{MapGraph, ObstacleRecord, ObstacleTrack};

const TIME_EPS: f64 = 1e-9;

/// Number of whole `resolution` steps in `horizon`.
pub fn step_count(horizon: f64, resolution: f64) -> usize {
    (horizon / resolution + TIME_EPS).floor() as usize
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryLabel {
    pub obstacle_id: String,
    pub anchor_time: f64,
    pub horizon: f64,
    pub resolution: f64,
    /// `(relative_time, position)`, first entry at one resolution step.
    pub future_points: Vec<(f64, Point2)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IntentionKind {
    ExitTaken(String),
    LaneSequence(Vec<String>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntentionLabel {
    pub obstacle_id: String,
    pub anchor_time: f64,
    pub kind: IntentionKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnotationConfig {
    pub horizon_secs: f64,
    pub resolution_secs: f64,
    pub stride_secs: f64,
    pub min_history_secs: f64,
    /// Length of the history window stored with each record.
    pub history_secs: f64,
    pub exit_capture_m: f64,
    pub lane_capture_m: f64,
}

impl Default for AnnotationConfig {
    fn default() -> Self {
        Self {
            horizon_secs: 8.0,
            resolution_secs: 0.1,
            stride_secs: 1.0,
            min_history_secs: 0.0,
            history_secs: 2.0,
            exit_capture_m: 3.0,
            lane_capture_m: 2.0,
        }
    }
}

impl AnnotationConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("horizon_secs", self.horizon_secs),
            ("resolution_secs", self.resolution_secs),
            ("stride_secs", self.stride_secs),
            ("exit_capture_m", self.exit_capture_m),
            ("lane_capture_m", self.lane_capture_m),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidValue(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.min_history_secs >= 0.0 && self.history_secs >= 0.0) {
            return Err(Error::InvalidValue("history lengths must be non-negative".into()));
        }
        Ok(())
    }
}

pub fn label_future_trajectory(
    track: &ObstacleTrack,
    anchor_time: f64,
    horizon: f64,
    resolution: f64,
) -> Result<TrajectoryLabel> {
    if !(resolution > 0.0 && horizon > 0.0) {
        return Err(Error::InvalidValue(format!(
            "horizon {horizon} and resolution {resolution} must be positive"
        )));
    }
    let n = step_count(horizon, resolution);
    let needed = anchor_time + n as f64 * resolution;
    if anchor_time < track.start_time() - TIME_EPS || needed > track.end_time() + TIME_EPS {
        return Err(Error::InsufficientCoverage {
            needed,
            available: track.end_time(),
        });
    }
    let future_points = (1..=n)
        .map(|k| {
            let dt = k as f64 * resolution;
            let t = (anchor_time + dt).min(track.end_time());
            let p = track.position_at(t).expect("coverage checked above");
            (dt, p)
        })
        .collect();
    Ok(TrajectoryLabel {
        obstacle_id: track.obstacle_id().to_string(),
        anchor_time,
        horizon,
        resolution,
        future_points,
    })
}

/// Vertices of the piecewise-linear track restricted to `[from, to]`.
fn sub_track(track: &ObstacleTrack, from: f64, to: f64) -> Vec<(f64, Point2)> {
    let from = from.max(track.start_time());
    let to = to.min(track.end_time());
    if from > to {
        return Vec::new();
    }
    let mut pts = vec![(from, track.position_at(from).expect("in span"))];
    pts.extend(
        track
            .states()
            .iter()
            .filter(|s| s.timestamp > from && s.timestamp < to)
            .map(|s| (s.timestamp, s.position)),
    );
    if to > from {
        pts.push((to, track.position_at(to).expect("in span")));
    }
    pts
}

/// Earliest time the piecewise-linear motion enters the disc of `radius`
/// around `target`.
fn first_entry_time(path: &[(f64, Point2)], target: &Point2, radius: f64) -> Option<f64> {
    let (t0, p0) = path.first()?;
    if p0.distance(target) <= radius {
        return Some(*t0);
    }
    for w in path.windows(2) {
        let ((ta, a), (tb, b)) = (w[0], w[1]);
        let d = b.sub(&a);
        let f = a.sub(target);
        let qa = d.dot(&d);
        let qb = 2.0 * d.dot(&f);
        let qc = f.dot(&f) - radius * radius;
        if qa == 0.0 {
            continue;
        }
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            continue;
        }
        let u = (-qb - disc.sqrt()) / (2.0 * qa);
        if (0.0..=1.0).contains(&u) {
            return Some(ta + u * (tb - ta));
        }
    }
    None
}

/// Every exit captured within the horizon with its first capture time,
/// ordered by time then exit id.
pub fn exit_passages(
    track: &ObstacleTrack,
    anchor_time: f64,
    map: &MapGraph,
    horizon: f64,
    capture_radius: f64,
) -> Vec<(String, f64)> {
    let path = sub_track(track, anchor_time, anchor_time + horizon);
    let mut hits: Vec<(String, f64)> = map
        .exits
        .values()
        .filter_map(|e| {
            first_entry_time(&path, &e.position, capture_radius).map(|t| (e.exit_id.clone(), t))
        })
        .collect();
    hits.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    hits
}

pub fn label_exit_taken(
    track: &ObstacleTrack,
    anchor_time: f64,
    map: &MapGraph,
    horizon: f64,
    capture_radius: f64,
) -> Option<IntentionLabel> {
    exit_passages(track, anchor_time, map, horizon, capture_radius)
        .into_iter()
        .next()
        .map(|(exit_id, _)| IntentionLabel {
            obstacle_id: track.obstacle_id().to_string(),
            anchor_time,
            kind: IntentionKind::ExitTaken(exit_id),
        })
}

pub fn label_lane_sequence(
    track: &ObstacleTrack,
    anchor_time: f64,
    map: &MapGraph,
    horizon: f64,
    resolution: f64,
    lateral_capture: f64,
) -> Option<IntentionLabel> {
    let mut seen = BTreeSet::new();
    let mut sequence = Vec::new();
    for k in 1..=step_count(horizon, resolution) {
        let Some(p) = track.position_at(anchor_time + k as f64 * resolution) else {
            break;
        };
        if let Some((lane, _)) = map.nearest_lane(&p, lateral_capture) {
            if seen.insert(lane.lane_id.clone()) {
                sequence.push(lane.lane_id.clone());
            }
        }
    }
    (!sequence.is_empty()).then(|| IntentionLabel {
        obstacle_id: track.obstacle_id().to_string(),
        anchor_time,
        kind: IntentionKind::LaneSequence(sequence),
    })
}

/// Anchor times `start + min_history + k * stride` inside the logged span.
pub fn anchor_grid(track: &ObstacleTrack, stride: f64, min_history: f64) -> Vec<f64> {
    let t0 = track.start_time() + min_history;
    (0..)
        .map(|k| t0 + k as f64 * stride)
        .take_while(|t| *t <= track.end_time() + TIME_EPS)
        .collect()
}

/// One line of the dataset file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub road_test_id: String,
    pub obstacle_id: String,
    pub anchor_time: f64,
    pub history: Vec<ObstacleRecord>,
    /// `[dt, x, y]` triples.
    pub future: Vec<[f64; 3]>,
    pub exit_label: Option<String>,
    pub lane_sequence_label: Option<Vec<String>>,
}

impl DatasetRecord {
    pub fn future_points(&self) -> Vec<(f64, Point2)> {
        self.future
            .iter()
            .map(|&[dt, x, y]| (dt, Point2::new(x, y)))
            .collect()
    }

    pub fn trajectory_label(&self) -> TrajectoryLabel {
        let resolution = self.future.first().map_or(0.0, |f| f[0]);
        TrajectoryLabel {
            obstacle_id: self.obstacle_id.clone(),
            anchor_time: self.anchor_time,
            horizon: self.future.last().map_or(0.0, |f| f[0]),
            resolution,
            future_points: self.future_points(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub records: usize,
    pub skipped: usize,
}

/// Labels every anchor of every track. Output is ordered by obstacle id, then
/// anchor time; anchors without full horizon coverage are skipped and counted.
pub fn build_dataset(
    road_test_id: &str,
    tracks: &[ObstacleTrack],
    map: &MapGraph,
    cfg: &AnnotationConfig,
) -> Result<(Vec<DatasetRecord>, DatasetSummary)> {
    cfg.validate()?;
    let mut sorted: Vec<&ObstacleTrack> = tracks.iter().collect();
    sorted.sort_by(|a, b| a.obstacle_id().cmp(b.obstacle_id()));

    let mut records = Vec::new();
    let mut summary = DatasetSummary::default();
    for track in sorted {
        for anchor in anchor_grid(track, cfg.stride_secs, cfg.min_history_secs) {
            let label = match label_future_trajectory(
                track,
                anchor,
                cfg.horizon_secs,
                cfg.resolution_secs,
            ) {
                Ok(l) => l,
                Err(Error::InsufficientCoverage { .. }) => {
                    summary.skipped += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let exit_label =
                label_exit_taken(track, anchor, map, cfg.horizon_secs, cfg.exit_capture_m)
                    .and_then(|l| match l.kind {
                        IntentionKind::ExitTaken(id) => Some(id),
                        IntentionKind::LaneSequence(_) => None,
                    });
            let lane_sequence_label = label_lane_sequence(
                track,
                anchor,
                map,
                cfg.horizon_secs,
                cfg.resolution_secs,
                cfg.lane_capture_m,
            )
            .and_then(|l| match l.kind {
                IntentionKind::LaneSequence(ids) => Some(ids),
                IntentionKind::ExitTaken(_) => None,
            });
            records.push(DatasetRecord {
                road_test_id: road_test_id.to_string(),
                obstacle_id: track.obstacle_id().to_string(),
                anchor_time: anchor,
                history: track
                    .window(anchor - cfg.history_secs, anchor)
                    .iter()
                    .map(|s| s.to_record())
                    .collect(),
                future: label
                    .future_points
                    .iter()
                    .map(|(dt, p)| [*dt, p.x, p.y])
                    .collect(),
                exit_label,
                lane_sequence_label,
            });
        }
    }
    summary.records = records.len();
    Ok((records, summary))
}
