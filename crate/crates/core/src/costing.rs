//! Trajectory costs, likelihood and the posterior over intentions.
//!
//! Each candidate is scored by three sub-costs: squared longitudinal
//! acceleration, normalized squared centripetal acceleration, and a normalized
//! Gaussian-kernel proximity to the ego vehicle's planned positions. The
//! weighted total `C` gives likelihood `exp(-C)`; an intention's likelihood is
//! that of its cheapest candidate, and posteriors are priors reweighted by
//! likelihood and normalized per obstacle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generation::{CandidateTrajectory, TrajectoryPoint};
use crate::io;
use crate::scene::EgoPlan;

/// Reference speed and curvature for the default centripetal normalizer.
pub const V_REF: f64 = 15.0;
pub const KAPPA_REF: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostWeights {
    pub theta_acc: f64,
    pub theta_centripetal: f64,
    pub theta_collision: f64,
    pub z1: f64,
    pub z2: f64,
}

impl CostWeights {
    /// Unit thetas with normalizers that make each sub-cost O(1) for
    /// trajectories of `n_points` points.
    pub fn default_for_points(n_points: usize) -> Self {
        let n = n_points.max(1) as f64;
        Self {
            theta_acc: 1.0,
            theta_centripetal: 1.0,
            theta_collision: 1.0,
            z1: n * (V_REF * V_REF * KAPPA_REF).powi(2),
            z2: n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.theta_acc,
            self.theta_centripetal,
            self.theta_collision,
            self.z1,
            self.z2,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidValue("cost weights must be finite".into()));
        }
        if self.thetas().iter().any(|t| *t < 0.0) {
            return Err(Error::InvalidValue("cost thetas must be non-negative".into()));
        }
        if !(self.z1 > 0.0 && self.z2 > 0.0) {
            return Err(Error::InvalidValue("normalizers z1, z2 must be positive".into()));
        }
        Ok(())
    }

    pub fn thetas(&self) -> [f64; 3] {
        [self.theta_acc, self.theta_centripetal, self.theta_collision]
    }

    pub fn with_thetas(self, [a, c, k]: [f64; 3]) -> Self {
        Self {
            theta_acc: a,
            theta_centripetal: c,
            theta_collision: k,
            ..self
        }
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let w: Self = io::read_json(path)?;
        w.validate()?;
        Ok(w)
    }
}

/// The three normalized sub-costs of one trajectory.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SubCosts {
    pub c_acc: f64,
    pub c_centripetal: f64,
    pub c_collision: f64,
}

impl SubCosts {
    pub fn as_array(&self) -> [f64; 3] {
        [self.c_acc, self.c_centripetal, self.c_collision]
    }

    pub fn weighted(&self, thetas: &[f64; 3]) -> f64 {
        thetas[0] * self.c_acc + thetas[1] * self.c_centripetal + thetas[2] * self.c_collision
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub c_acc: f64,
    pub c_centripetal: f64,
    pub c_collision: f64,
    pub total: f64,
}

impl CostBreakdown {
    pub fn sub_costs(&self) -> SubCosts {
        SubCosts {
            c_acc: self.c_acc,
            c_centripetal: self.c_centripetal,
            c_collision: self.c_collision,
        }
    }
}

/// Σ aᵢ²
pub fn cost_acc(points: &[TrajectoryPoint]) -> f64 {
    points.iter().map(|p| p.accel * p.accel).sum()
}

/// (1/z1) Σ (vᵢ² κᵢ)²
pub fn cost_centripetal(points: &[TrajectoryPoint], z1: f64) -> f64 {
    points
        .iter()
        .map(|p| (p.speed * p.speed * p.curvature).powi(2))
        .sum::<f64>()
        / z1
}

/// (1/z2) Σ exp(−dᵢ²), with dᵢ the distance to the ego position at the same
/// absolute time. No ego plan means no collision cost.
pub fn cost_collision(points: &[TrajectoryPoint], start_time: f64, ego: Option<&EgoPlan>, z2: f64) -> f64 {
    let Some(ego) = ego.filter(|e| !e.is_empty()) else {
        return 0.0;
    };
    points
        .iter()
        .map(|p| {
            let q = ego.position_at(start_time + p.t).expect("plan is nonempty");
            let d = p.position.distance(&q);
            (-d * d).exp()
        })
        .sum::<f64>()
        / z2
}

pub fn sub_costs(points: &[TrajectoryPoint], start_time: f64, ego: Option<&EgoPlan>, weights: &CostWeights) -> SubCosts {
    SubCosts {
        c_acc: cost_acc(points),
        c_centripetal: cost_centripetal(points, weights.z1),
        c_collision: cost_collision(points, start_time, ego, weights.z2),
    }
}

pub fn total_cost(traj: &CandidateTrajectory, ego: Option<&EgoPlan>, weights: &CostWeights) -> CostBreakdown {
    breakdown(sub_costs(&traj.points, traj.start_time, ego, weights), weights)
}

pub fn breakdown(sub: SubCosts, weights: &CostWeights) -> CostBreakdown {
    CostBreakdown {
        c_acc: sub.c_acc,
        c_centripetal: sub.c_centripetal,
        c_collision: sub.c_collision,
        total: sub.weighted(&weights.thetas()),
    }
}

pub fn likelihood(cost: f64) -> f64 {
    (-cost).exp()
}

/// Candidates sampled for one intention together with its prior.
#[derive(Clone, Debug)]
pub struct IntentionCandidates {
    pub intention_id: String,
    pub prior: f64,
    pub candidates: Vec<CandidateTrajectory>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateSummary {
    pub lane_ids: Vec<String>,
    pub accel: f64,
    #[serde(flatten)]
    pub cost: CostBreakdown,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BestTrajectory {
    pub lane_ids: Vec<String>,
    pub accel: f64,
    pub v0: f64,
    pub cost: CostBreakdown,
    /// `[t, x, y, heading, speed, curvature, accel]` rows.
    pub points: Vec<TrajectoryPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntentionResult {
    pub intention_id: String,
    pub prior: f64,
    pub min_cost: f64,
    pub likelihood: f64,
    pub posterior: f64,
    pub best_trajectory: BestTrajectory,
    pub candidates: Vec<CandidateSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionResult {
    pub obstacle_id: String,
    pub anchor_time: f64,
    pub intentions: Vec<IntentionResult>,
    pub selected_intention: String,
}

impl PredictionResult {
    pub fn selected(&self) -> &IntentionResult {
        self.intentions
            .iter()
            .find(|i| i.intention_id == self.selected_intention)
            .expect("selected intention is one of the intentions")
    }
}

/// Index of the cheapest candidate: lowest total, then smallest |a|, then
/// lowest index.
fn best_index(costs: &[CostBreakdown], candidates: &[CandidateTrajectory]) -> usize {
    (0..costs.len())
        .min_by(|&i, &j| {
            costs[i]
                .total
                .total_cmp(&costs[j].total)
                .then(
                    candidates[i]
                        .profile
                        .accel
                        .abs()
                        .total_cmp(&candidates[j].profile.accel.abs()),
                )
                .then(i.cmp(&j))
        })
        .expect("nonempty")
}

/// Posterior ∝ prior · exp(−min_cost), computed relative to the smallest
/// min-cost among intentions with positive prior so that large costs cannot
/// underflow the normalizer.
pub fn posteriors(priors: &[f64], min_costs: &[f64]) -> Vec<f64> {
    let shift = priors
        .iter()
        .zip(min_costs)
        .filter(|(p, _)| **p > 0.0)
        .map(|(_, c)| *c)
        .fold(f64::INFINITY, f64::min);
    let unnorm: Vec<f64> = priors
        .iter()
        .zip(min_costs)
        .map(|(p, c)| if *p > 0.0 { p * likelihood(c - shift) } else { 0.0 })
        .collect();
    let z: f64 = unnorm.iter().sum();
    unnorm.into_iter().map(|u| u / z).collect()
}

pub fn rank_intentions(
    obstacle_id: &str,
    anchor_time: f64,
    groups: &[IntentionCandidates],
    ego: Option<&EgoPlan>,
    weights: &CostWeights,
) -> Result<PredictionResult> {
    if groups.is_empty() {
        return Err(Error::InvalidValue(format!("obstacle {obstacle_id} has no intentions")));
    }
    let prior_sum: f64 = groups.iter().map(|g| g.prior).sum();
    if (prior_sum - 1.0).abs() > 1e-6 || groups.iter().any(|g| !(g.prior >= 0.0)) {
        return Err(Error::InvalidValue(format!(
            "priors for obstacle {obstacle_id} must be non-negative and sum to 1, got {prior_sum}"
        )));
    }

    let mut partial = Vec::with_capacity(groups.len());
    for g in groups {
        if g.candidates.is_empty() {
            return Err(Error::NoCandidates {
                intention_id: g.intention_id.clone(),
            });
        }
        let costs: Vec<CostBreakdown> = g
            .candidates
            .iter()
            .map(|c| total_cost(c, ego, weights))
            .collect();
        let best = best_index(&costs, &g.candidates);
        partial.push((g, costs, best));
    }

    let priors: Vec<f64> = partial.iter().map(|(g, _, _)| g.prior).collect();
    let min_costs: Vec<f64> = partial.iter().map(|(_, c, b)| c[*b].total).collect();
    let post = posteriors(&priors, &min_costs);

    let intentions: Vec<IntentionResult> = partial
        .into_iter()
        .zip(post)
        .map(|((g, costs, best), posterior)| {
            let b = &g.candidates[best];
            IntentionResult {
                intention_id: g.intention_id.clone(),
                prior: g.prior,
                min_cost: costs[best].total,
                likelihood: likelihood(costs[best].total),
                posterior,
                best_trajectory: BestTrajectory {
                    lane_ids: b.lane_ids.clone(),
                    accel: b.profile.accel,
                    v0: b.profile.v0,
                    cost: costs[best],
                    points: b.points.clone(),
                },
                candidates: g
                    .candidates
                    .iter()
                    .zip(&costs)
                    .map(|(c, cost)| CandidateSummary {
                        lane_ids: c.lane_ids.clone(),
                        accel: c.profile.accel,
                        cost: *cost,
                    })
                    .collect(),
            }
        })
        .collect();

    let selected = intentions
        .iter()
        .enumerate()
        .max_by(|(i, a), (j, b)| a.posterior.total_cmp(&b.posterior).then(j.cmp(i)))
        .map(|(_, r)| r.intention_id.clone())
        .expect("nonempty");

    Ok(PredictionResult {
        obstacle_id: obstacle_id.to_string(),
        anchor_time,
        intentions,
        selected_intention: selected,
    })
}
