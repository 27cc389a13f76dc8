//! Max-margin tuning of the cost weights.
//!
//! Logged human trajectories are assumed to be (statistically) optimal, so the
//! weights θ should make the ground-truth trajectory of every datum cheaper
//! than each of that datum's sampled candidates by a margin δ:
//!
//! ```text
//! L(θ) = Σ_data Σ_candidates max(0, θ·c(ground truth) − θ·c(candidate) + δ)
//! ```
//!
//! `L` is convex and piecewise linear in θ. It is minimized by projected
//! subgradient descent onto θ ≥ 0. The margin rules out the trivial θ = 0,
//! where every term equals δ.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::annotation::{DatasetRecord, TrajectoryLabel};
use crate::costing::{self, SubCosts};
use crate::error::{Error, Result};
use crate::generation::TrajectoryPoint;
use crate::geometry::{menger_curvature, Point2};
use crate::io::time_key;
use crate::pipeline::PredictionRecord;
use crate::scene::EgoPlan;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuningExample {
    pub obstacle_id: String,
    pub anchor_time: f64,
    pub gt: SubCosts,
    pub candidates: Vec<SubCosts>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TunerConfig {
    pub delta: f64,
    pub learning_rate: f64,
    pub max_iters: usize,
    pub convergence_tol: f64,
    pub seed: u64,
    pub theta_init: [f64; 3],
}

impl Default for TunerConfig {
    fn default() -> Self {
        Self {
            delta: 0.1,
            learning_rate: 0.01,
            max_iters: 1000,
            convergence_tol: 1e-8,
            seed: 0,
            theta_init: [1.0, 1.0, 1.0],
        }
    }
}

impl TunerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::InvalidValue(format!("delta must be positive, got {}", self.delta)));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::InvalidValue(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(self.convergence_tol >= 0.0) {
            return Err(Error::InvalidValue("convergence_tol must be non-negative".into()));
        }
        if self.theta_init.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::InvalidValue("theta_init must be finite and non-negative".into()));
        }
        Ok(())
    }
}

/// Speeds, accelerations and curvatures of a sampled position sequence on a
/// uniform time grid, by second-order finite differences (central inside,
/// one-sided at the ends).
pub fn label_kinematics(points: &[(f64, Point2)]) -> Result<Vec<TrajectoryPoint>> {
    let n = points.len();
    if n < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: n });
    }
    let h = (points[n - 1].0 - points[0].0) / (n - 1) as f64;
    let pos: Vec<Point2> = points.iter().map(|p| p.1).collect();

    let diff = |f: &dyn Fn(usize) -> Point2| -> Vec<Point2> {
        (0..n)
            .map(|k| {
                let d = if k == 0 {
                    f(0).scale(-3.0).add(&f(1).scale(4.0)).sub(&f(2))
                } else if k == n - 1 {
                    f(n - 1).scale(3.0).sub(&f(n - 2).scale(4.0)).add(&f(n - 3))
                } else {
                    f(k + 1).sub(&f(k - 1))
                };
                d.scale(1.0 / (2.0 * h))
            })
            .collect()
    };

    let velocity = diff(&|k| pos[k]);
    let speed: Vec<f64> = velocity.iter().map(Point2::norm).collect();
    let accel = diff(&|k| Point2::new(speed[k], 0.0));
    let curvature: Vec<f64> = (0..n)
        .map(|k| {
            let m = k.clamp(1, n - 2);
            menger_curvature(&pos[m - 1], &pos[m], &pos[m + 1])
        })
        .collect();

    Ok((0..n)
        .map(|k| TrajectoryPoint {
            t: points[k].0,
            position: pos[k],
            heading: velocity[k].y.atan2(velocity[k].x),
            speed: speed[k],
            curvature: curvature[k],
            accel: accel[k].x,
        })
        .collect())
}

/// Sub-costs of an observed future, with kinematics from finite differences.
pub fn ground_truth_subcosts(label: &TrajectoryLabel, ego: Option<&EgoPlan>, z1: f64, z2: f64) -> Result<SubCosts> {
    let pts = label_kinematics(&label.future_points)?;
    Ok(SubCosts {
        c_acc: costing::cost_acc(&pts),
        c_centripetal: costing::cost_centripetal(&pts, z1),
        c_collision: costing::cost_collision(&pts, label.anchor_time, ego, z2),
    })
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `(gt − candidate)` sub-cost differences; each hinge term is
/// `max(0, θ·diff + δ)`.
fn hinge_terms<'a>(examples: &'a [TuningExample]) -> impl Iterator<Item = [f64; 3]> + 'a {
    examples.iter().flat_map(|ex| {
        let gt = ex.gt.as_array();
        ex.candidates.iter().map(move |c| {
            let c = c.as_array();
            [gt[0] - c[0], gt[1] - c[1], gt[2] - c[2]]
        })
    })
}

pub fn hinge_objective(examples: &[TuningExample], theta: &[f64; 3], delta: f64) -> f64 {
    hinge_terms(examples)
        .map(|d| {
            // written out so that a NaN margin is not swallowed by max
            let m = dot(theta, &d) + delta;
            if m < 0.0 {
                0.0
            } else {
                m
            }
        })
        .sum()
}

/// Sum of `(gt − candidate)` over strictly active hinge terms.
pub fn hinge_subgradient(examples: &[TuningExample], theta: &[f64; 3], delta: f64) -> [f64; 3] {
    hinge_terms(examples)
        .filter(|d| dot(theta, d) + delta > 0.0)
        .fold([0.0; 3], |g, d| [g[0] + d[0], g[1] + d[1], g[2] + d[2]])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneOutcome {
    pub theta: [f64; 3],
    /// Loss before the first step, then after each step.
    pub loss_history: Vec<f64>,
    pub iterations: usize,
}

impl TuneOutcome {
    pub fn final_loss(&self) -> f64 {
        *self.loss_history.last().expect("history starts with the initial loss")
    }
}

/// Projected subgradient descent from `cfg.theta_init`. The full batch is used
/// every iteration, so the result depends only on the inputs.
pub fn tune_weights(examples: &[TuningExample], cfg: &TunerConfig) -> Result<TuneOutcome> {
    cfg.validate()?;
    if examples.is_empty() {
        return Err(Error::NoTuningExamples);
    }
    let mut theta = cfg.theta_init;
    let mut loss = hinge_objective(examples, &theta, cfg.delta);
    if !loss.is_finite() {
        return Err(Error::NonFiniteLoss { iteration: 0 });
    }
    let mut history = vec![loss];
    let mut iterations = 0;
    while loss > 0.0 && iterations < cfg.max_iters {
        iterations += 1;
        let g = hinge_subgradient(examples, &theta, cfg.delta);
        for (t, gi) in theta.iter_mut().zip(g) {
            *t = (*t - cfg.learning_rate * gi).max(0.0);
        }
        let next = hinge_objective(examples, &theta, cfg.delta);
        if !next.is_finite() {
            return Err(Error::NonFiniteLoss { iteration: iterations });
        }
        history.push(next);
        let change = (next - loss).abs();
        loss = next;
        if change < cfg.convergence_tol {
            break;
        }
    }
    Ok(TuneOutcome {
        theta,
        loss_history: history,
        iterations,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct JoinSummary {
    pub examples: usize,
    pub skipped: usize,
}

/// Joins predictions with labels on `(obstacle_id, anchor_time)`. The ground
/// truth is truncated to the prediction horizon; anchors with no label, or a
/// label shorter than the prediction, are skipped.
pub fn extract_examples(
    predictions: &[PredictionRecord],
    dataset: &[DatasetRecord],
) -> Result<(Vec<TuningExample>, JoinSummary)> {
    let labels = index_dataset(dataset)?;
    let mut seen = BTreeMap::new();
    let mut examples = Vec::new();
    let mut summary = JoinSummary::default();
    for pred in predictions {
        let key = (pred.obstacle_id.clone(), time_key(pred.anchor_time));
        if seen.insert(key.clone(), ()).is_some() {
            return Err(Error::KeyCollision {
                obstacle_id: pred.obstacle_id.clone(),
                anchor_time: pred.anchor_time,
            });
        }
        let Some(record) = labels.get(&key) else {
            summary.skipped += 1;
            continue;
        };
        let n = pred.selected().best_trajectory.points.len();
        let mut label = record.trajectory_label();
        if label.future_points.len() < n.max(3) {
            summary.skipped += 1;
            continue;
        }
        label.future_points.truncate(n);
        let ego = pred.ego_plan()?;
        let gt = ground_truth_subcosts(&label, ego.as_ref(), pred.weights.z1, pred.weights.z2)?;
        let candidates = pred
            .intentions
            .iter()
            .flat_map(|i| i.candidates.iter().map(|c| c.cost.sub_costs()))
            .collect();
        examples.push(TuningExample {
            obstacle_id: pred.obstacle_id.clone(),
            anchor_time: pred.anchor_time,
            gt,
            candidates,
        });
    }
    examples.sort_by(|a, b| {
        a.obstacle_id
            .cmp(&b.obstacle_id)
            .then(a.anchor_time.total_cmp(&b.anchor_time))
    });
    summary.examples = examples.len();
    Ok((examples, summary))
}

/// Dataset records keyed by `(obstacle_id, anchor time key)`; duplicates are
/// an error.
pub fn index_dataset(dataset: &[DatasetRecord]) -> Result<BTreeMap<(String, i64), &DatasetRecord>> {
    let mut out = BTreeMap::new();
    for r in dataset {
        if out
            .insert((r.obstacle_id.clone(), time_key(r.anchor_time)), r)
            .is_some()
        {
            return Err(Error::KeyCollision {
                obstacle_id: r.obstacle_id.clone(),
                anchor_time: r.anchor_time,
            });
        }
    }
    Ok(out)
}
