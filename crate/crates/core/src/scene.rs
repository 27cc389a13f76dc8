//! Obstacle histories, ego plans and the lane/exit map, plus the onboard
//! scenario and priority triage.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{normalize_angle, Curve, Point2};
use crate::io;

#[derive(Clone, Debug, PartialEq)]
pub struct ObstacleState {
    pub obstacle_id: String,
    pub timestamp: f64,
    pub position: Point2,
    /// Radians in (−π, π].
    pub heading: f64,
    /// m/s, never negative.
    pub speed: f64,
    pub polygon: Option<Vec<Point2>>,
}

/// One row of the obstacle log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObstacleRecord {
    pub obstacle_id: String,
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub speed: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polygon: Option<Vec<Point2>>,
}

impl ObstacleState {
    pub fn from_record(rec: ObstacleRecord) -> std::result::Result<Self, String> {
        let finite = [rec.t, rec.x, rec.y, rec.heading, rec.speed]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err("non-finite numeric field".into());
        }
        if rec.speed < 0.0 {
            return Err(format!("negative speed {}", rec.speed));
        }
        Ok(Self {
            obstacle_id: rec.obstacle_id,
            timestamp: rec.t,
            position: Point2::new(rec.x, rec.y),
            heading: normalize_angle(rec.heading),
            speed: rec.speed,
            polygon: rec.polygon,
        })
    }

    pub fn to_record(&self) -> ObstacleRecord {
        ObstacleRecord {
            obstacle_id: self.obstacle_id.clone(),
            t: self.timestamp,
            x: self.position.x,
            y: self.position.y,
            heading: self.heading,
            speed: self.speed,
            polygon: self.polygon.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObstacleTrack {
    obstacle_id: String,
    states: Vec<ObstacleState>,
}

impl ObstacleTrack {
    /// Sorts states by timestamp. Equal timestamps or mixed ids are rejected.
    pub fn new(mut states: Vec<ObstacleState>) -> Result<Self> {
        let first = states
            .first()
            .ok_or_else(|| Error::InvalidValue("track needs at least one state".into()))?;
        let obstacle_id = first.obstacle_id.clone();
        if let Some(other) = states.iter().find(|s| s.obstacle_id != obstacle_id) {
            return Err(Error::InvalidValue(format!(
                "track mixes obstacle ids {obstacle_id} and {}",
                other.obstacle_id
            )));
        }
        states.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
        if let Some(w) = states.windows(2).find(|w| w[0].timestamp >= w[1].timestamp) {
            return Err(Error::DuplicateTimestamp {
                obstacle_id,
                timestamp: w[1].timestamp,
            });
        }
        Ok(Self {
            obstacle_id,
            states,
        })
    }

    pub fn obstacle_id(&self) -> &str {
        &self.obstacle_id
    }

    pub fn states(&self) -> &[ObstacleState] {
        &self.states
    }

    pub fn latest(&self) -> &ObstacleState {
        self.states.last().expect("track is nonempty")
    }

    pub fn start_time(&self) -> f64 {
        self.states[0].timestamp
    }

    pub fn end_time(&self) -> f64 {
        self.latest().timestamp
    }

    /// Index `k` such that `states[k].t <= t <= states[k+1].t`, or `None` outside
    /// the logged span.
    fn bracket(&self, t: f64) -> Option<usize> {
        if t < self.start_time() || t > self.end_time() {
            return None;
        }
        let k = self.states.partition_point(|s| s.timestamp <= t);
        Some(k.saturating_sub(1).min(self.states.len().saturating_sub(2)))
    }

    /// Piecewise-linear position at time `t`; `None` outside the logged span.
    pub fn position_at(&self, t: f64) -> Option<Point2> {
        let k = self.bracket(t)?;
        if self.states.len() == 1 {
            return Some(self.states[0].position);
        }
        let (a, b) = (&self.states[k], &self.states[k + 1]);
        let u = (t - a.timestamp) / (b.timestamp - a.timestamp);
        Some(a.position.lerp(&b.position, u))
    }

    /// Interpolated state at `t`. Heading takes the short way round.
    pub fn state_at(&self, t: f64) -> Option<ObstacleState> {
        let k = self.bracket(t)?;
        if self.states.len() == 1 {
            return Some(self.states[0].clone());
        }
        let (a, b) = (&self.states[k], &self.states[k + 1]);
        let u = (t - a.timestamp) / (b.timestamp - a.timestamp);
        Some(ObstacleState {
            obstacle_id: self.obstacle_id.clone(),
            timestamp: t,
            position: a.position.lerp(&b.position, u),
            heading: normalize_angle(a.heading + u * normalize_angle(b.heading - a.heading)),
            speed: a.speed + u * (b.speed - a.speed),
            polygon: if u < 0.5 { a.polygon.clone() } else { b.polygon.clone() },
        })
    }

    /// States with timestamps in `[from, to]`.
    pub fn window(&self, from: f64, to: f64) -> &[ObstacleState] {
        let lo = self.states.partition_point(|s| s.timestamp < from);
        let hi = self.states.partition_point(|s| s.timestamp <= to);
        &self.states[lo..hi.max(lo)]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EgoPose {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EgoPlan {
    poses: Vec<(f64, Point2)>,
}

impl EgoPlan {
    pub fn new(poses: Vec<(f64, Point2)>) -> Result<Self> {
        if let Some(w) = poses.windows(2).find(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidValue(format!(
                "ego plan timestamps not strictly increasing at t={}",
                w[1].0
            )));
        }
        Ok(Self { poses })
    }

    pub fn poses(&self) -> &[(f64, Point2)] {
        &self.poses
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    /// Linearly interpolated ego position; queries outside the plan are
    /// clamped to the first or final pose.
    pub fn position_at(&self, t: f64) -> Option<Point2> {
        let first = self.poses.first()?;
        let last = self.poses.last()?;
        if t <= first.0 {
            return Some(first.1);
        }
        if t >= last.0 {
            return Some(last.1);
        }
        let k = self.poses.partition_point(|p| p.0 <= t) - 1;
        let (t0, p0) = self.poses[k];
        let (t1, p1) = self.poses[k + 1];
        Some(p0.lerp(&p1, (t - t0) / (t1 - t0)))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lane {
    pub lane_id: String,
    pub centerline: Curve,
    pub successor_ids: Vec<String>,
    pub speed_limit: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntersectionExit {
    pub exit_id: String,
    pub position: Point2,
    pub heading: f64,
    pub associated_lane_id: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MapGraph {
    pub lanes: BTreeMap<String, Lane>,
    pub exits: BTreeMap<String, IntersectionExit>,
    pub intersection_polygon: Option<Vec<Point2>>,
}

#[derive(Debug, Deserialize)]
struct LaneRecord {
    id: String,
    centerline: Vec<Point2>,
    #[serde(default)]
    successors: Vec<String>,
    #[serde(default)]
    speed_limit: Option<f64>,
}

#[derive(Debug, Deserialize)]
struct ExitRecord {
    id: String,
    x: f64,
    y: f64,
    heading: f64,
    lane_id: String,
}

#[derive(Debug, Deserialize)]
struct MapFile {
    lanes: Vec<LaneRecord>,
    #[serde(default)]
    exits: Vec<ExitRecord>,
    #[serde(default)]
    intersection_polygon: Option<Vec<Point2>>,
}

impl MapGraph {
    pub fn from_json_str(text: &str, file: &str) -> Result<Self> {
        let raw: MapFile =
            serde_json::from_str(text).map_err(|e| Error::parse(file, e.line(), e))?;
        let mut map = MapGraph {
            intersection_polygon: raw.intersection_polygon,
            ..Default::default()
        };
        for lane in raw.lanes {
            let centerline = Curve::new(lane.centerline)
                .map_err(|e| Error::parse(file, 0, format!("lane {}: {e}", lane.id)))?;
            let id = lane.id.clone();
            let prev = map.lanes.insert(
                id.clone(),
                Lane {
                    lane_id: lane.id,
                    centerline,
                    successor_ids: lane.successors,
                    speed_limit: lane.speed_limit,
                },
            );
            if prev.is_some() {
                return Err(Error::parse(file, 0, format!("duplicate lane id {id}")));
            }
        }
        for exit in raw.exits {
            let id = exit.id.clone();
            let prev = map.exits.insert(
                id.clone(),
                IntersectionExit {
                    exit_id: exit.id,
                    position: Point2::new(exit.x, exit.y),
                    heading: normalize_angle(exit.heading),
                    associated_lane_id: exit.lane_id,
                },
            );
            if prev.is_some() {
                return Err(Error::parse(file, 0, format!("duplicate exit id {id}")));
            }
        }
        map.validate()?;
        Ok(map)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json_str(&io::read_to_string(path)?, &path.display().to_string())
    }

    /// Checks that every successor and exit lane reference resolves.
    pub fn validate(&self) -> Result<()> {
        for lane in self.lanes.values() {
            for succ in &lane.successor_ids {
                if !self.lanes.contains_key(succ) {
                    return Err(Error::DanglingReference {
                        kind: "successor lane",
                        id: format!("{} -> {succ}", lane.lane_id),
                    });
                }
            }
        }
        for exit in self.exits.values() {
            if !self.lanes.contains_key(&exit.associated_lane_id) {
                return Err(Error::DanglingReference {
                    kind: "exit lane",
                    id: format!("{} -> {}", exit.exit_id, exit.associated_lane_id),
                });
            }
        }
        Ok(())
    }

    /// Lane whose centerline is nearest to `p` within `max_distance`. Ties go to
    /// the smaller lane id.
    pub fn nearest_lane(&self, p: &Point2, max_distance: f64) -> Option<(&Lane, f64)> {
        self.lanes
            .values()
            .map(|l| (l, l.centerline.project_point(p).distance))
            .filter(|(_, d)| *d <= max_distance)
            .fold(None, |best: Option<(&Lane, f64)>, (l, d)| match best {
                Some((_, bd)) if bd <= d => best,
                _ => Some((l, d)),
            })
    }
}

/// Parses an obstacle log and groups it into tracks sorted by obstacle id.
pub fn parse_obstacle_log(text: &str, file: &str) -> Result<Vec<ObstacleTrack>> {
    let mut grouped: BTreeMap<String, Vec<ObstacleState>> = BTreeMap::new();
    for (line, rec) in io::parse_jsonl::<ObstacleRecord>(text, file)? {
        let state = ObstacleState::from_record(rec).map_err(|m| Error::parse(file, line, m))?;
        grouped
            .entry(state.obstacle_id.clone())
            .or_default()
            .push(state);
    }
    grouped.into_values().map(ObstacleTrack::new).collect()
}

pub fn parse_ego_plan(text: &str, file: &str) -> Result<EgoPlan> {
    let mut poses = Vec::new();
    for (line, p) in io::parse_jsonl::<EgoPose>(text, file)? {
        if !(p.t.is_finite() && p.x.is_finite() && p.y.is_finite()) {
            return Err(Error::parse(file, line, "non-finite ego pose"));
        }
        poses.push((p.t, Point2::new(p.x, p.y)));
    }
    EgoPlan::new(poses)
}

#[derive(Clone, Debug)]
pub struct Scene {
    pub tracks: Vec<ObstacleTrack>,
    pub map: MapGraph,
    pub ego: Option<EgoPlan>,
}

pub fn load_scene(obstacle_log: &Path, map_file: &Path, ego_file: Option<&Path>) -> Result<Scene> {
    let tracks = parse_obstacle_log(
        &io::read_to_string(obstacle_log)?,
        &obstacle_log.display().to_string(),
    )?;
    let map = MapGraph::load(map_file)?;
    let ego = ego_file
        .map(|p| parse_ego_plan(&io::read_to_string(p)?, &p.display().to_string()))
        .transpose()?;
    Ok(Scene { tracks, map, ego })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Intersection,
    RegularRoad,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Priority {
    Caution,
    Normal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TriageConfig {
    /// Distance around the intersection polygon still counted as inside.
    pub scenario_buffer_m: f64,
    /// Obstacles strictly closer than this to the ego plan are cautious.
    pub caution_threshold_m: f64,
}

impl Default for TriageConfig {
    fn default() -> Self {
        Self {
            scenario_buffer_m: 2.0,
            caution_threshold_m: 10.0,
        }
    }
}

fn point_in_polygon(p: &Point2, poly: &[Point2]) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + n - 1) % n]);
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}

fn distance_to_polygon_boundary(p: &Point2, poly: &[Point2]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            let d = b.sub(&a);
            let len2 = d.dot(&d);
            let t = if len2 > 0.0 {
                (p.sub(&a).dot(&d) / len2).clamp(0.0, 1.0)
            } else {
                0.0
            };
            p.distance(&a.add(&d.scale(t)))
        })
        .fold(f64::INFINITY, f64::min)
}

/// Scenario of the track's latest position.
pub fn classify_scenario(track: &ObstacleTrack, map: &MapGraph, buffer_m: f64) -> Scenario {
    scenario_at(&track.latest().position, map, buffer_m)
}

pub fn scenario_at(p: &Point2, map: &MapGraph, buffer_m: f64) -> Scenario {
    let Some(poly) = map.intersection_polygon.as_deref().filter(|p| p.len() >= 3) else {
        return Scenario::RegularRoad;
    };
    if point_in_polygon(p, poly) || distance_to_polygon_boundary(p, poly) <= buffer_m {
        Scenario::Intersection
    } else {
        Scenario::RegularRoad
    }
}

/// Priority of the track's latest position.
pub fn classify_priority(track: &ObstacleTrack, ego: Option<&EgoPlan>, threshold_m: f64) -> Priority {
    priority_at(&track.latest().position, ego, threshold_m)
}

pub fn priority_at(p: &Point2, ego: Option<&EgoPlan>, threshold_m: f64) -> Priority {
    let min_dist = ego
        .map(|e| {
            e.poses()
                .iter()
                .map(|(_, q)| q.distance(p))
                .fold(f64::INFINITY, f64::min)
        })
        .unwrap_or(f64::INFINITY);
    if min_dist < threshold_m {
        Priority::Caution
    } else {
        Priority::Normal
    }
}
