//! Displacement metrics and the run-level evaluation report.

use serde::{Deserialize, Serialize};

use crate::annotation::DatasetRecord;
use crate::autotune::index_dataset;
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::io::time_key;
use crate::pipeline::PredictionRecord;

const TIME_EPS: f64 = 1e-6;

/// `(relative_time, position)` samples on a shared grid.
pub type TimedPoints = [(f64, Point2)];

/// Aligned pairs with `relative_time <= horizon`. Both sequences must reach
/// the horizon and agree on their time stamps.
fn aligned_prefix<'a>(
    pred: &'a TimedPoints,
    truth: &'a TimedPoints,
    horizon: f64,
) -> Result<impl Iterator<Item = (&'a Point2, &'a Point2)>> {
    for seq in [pred, truth] {
        let last = seq.last().map_or(f64::NEG_INFINITY, |p| p.0);
        if last < horizon - TIME_EPS {
            return Err(Error::InsufficientCoverage {
                needed: horizon,
                available: last,
            });
        }
    }
    let n = pred.iter().take_while(|p| p.0 <= horizon + TIME_EPS).count();
    if n == 0 {
        return Err(Error::InsufficientCoverage {
            needed: horizon,
            available: 0.0,
        });
    }
    for (index, (a, b)) in pred.iter().zip(truth).take(n).enumerate() {
        if (a.0 - b.0).abs() > TIME_EPS {
            return Err(Error::GridMismatch {
                index,
                left: a.0,
                right: b.0,
            });
        }
    }
    Ok(pred.iter().zip(truth).take(n).map(|(a, b)| (&a.1, &b.1)))
}

/// Mean displacement over points with relative time ≤ `horizon`.
pub fn ade(pred: &TimedPoints, truth: &TimedPoints, horizon: f64) -> Result<f64> {
    let (sum, n) = aligned_prefix(pred, truth, horizon)?
        .fold((0.0, 0usize), |(s, n), (a, b)| (s + a.distance(b), n + 1));
    Ok(sum / n as f64)
}

/// Displacement at the last grid point with relative time ≤ `horizon`.
pub fn fde(pred: &TimedPoints, truth: &TimedPoints, horizon: f64) -> Result<f64> {
    let (a, b) = aligned_prefix(pred, truth, horizon)?
        .last()
        .expect("aligned prefix is nonempty");
    Ok(a.distance(b))
}

/// (1/N) Σ [(xᵢ − x̂ᵢ)² + (yᵢ − ŷᵢ)²]
pub fn mse(pred: &[Point2], truth: &[Point2]) -> Result<f64> {
    if pred.len() != truth.len() || pred.is_empty() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    let sum: f64 = pred
        .iter()
        .zip(truth)
        .map(|(a, b)| (a.x - b.x).powi(2) + (a.y - b.y).powi(2))
        .sum();
    Ok(sum / pred.len() as f64)
}

/// Bivariate normal with correlated axes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianPoint {
    pub mu_x: f64,
    pub mu_y: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub rho: f64,
}

impl GaussianPoint {
    pub fn new(mu_x: f64, mu_y: f64, sigma_x: f64, sigma_y: f64, rho: f64) -> Result<Self> {
        let g = Self {
            mu_x,
            mu_y,
            sigma_x,
            sigma_y,
            rho,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_x > 0.0 && self.sigma_y > 0.0) {
            return Err(Error::InvalidValue(format!(
                "sigmas must be positive, got ({}, {})",
                self.sigma_x, self.sigma_y
            )));
        }
        if !(self.rho.abs() < 1.0) {
            return Err(Error::InvalidValue(format!("|rho| must be < 1, got {}", self.rho)));
        }
        Ok(())
    }

    pub fn log_density(&self, p: &Point2) -> f64 {
        let zx = (p.x - self.mu_x) / self.sigma_x;
        let zy = (p.y - self.mu_y) / self.sigma_y;
        let one_m_rho2 = 1.0 - self.rho * self.rho;
        let q = (zx * zx - 2.0 * self.rho * zx * zy + zy * zy) / one_m_rho2;
        -(std::f64::consts::TAU * self.sigma_x * self.sigma_y * one_m_rho2.sqrt()).ln() - 0.5 * q
    }
}

/// −(1/N) Σ log P(truthᵢ)
pub fn gaussian_nll(pred: &[GaussianPoint], truth: &[Point2]) -> Result<f64> {
    if pred.len() != truth.len() || pred.is_empty() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    let mut sum = 0.0;
    for (g, p) in pred.iter().zip(truth) {
        g.validate()?;
        sum += g.log_density(p);
    }
    Ok(-sum / pred.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HorizonMetrics {
    pub h: f64,
    pub ade: f64,
    pub fde: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub horizons: Vec<HorizonMetrics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mse: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nll: Option<f64>,
    /// Anchors present in only one of the two inputs.
    pub skipped: usize,
}

impl MetricReport {
    /// Fixed-width table of the headline metrics.
    pub fn table(&self) -> String {
        let mut out = format!("{:>8} {:>10} {:>10} {:>8}\n", "horizon", "ADE", "FDE", "count");
        for h in &self.horizons {
            out.push_str(&format!(
                "{:>7}s {:>10.4} {:>10.4} {:>8}\n",
                h.h, h.ade, h.fde, h.count
            ));
        }
        out
    }
}

/// A point forecast for one `(obstacle_id, anchor_time)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Forecast {
    pub obstacle_id: String,
    pub anchor_time: f64,
    pub points: Vec<(f64, Point2)>,
}

impl From<&PredictionRecord> for Forecast {
    /// The best trajectory of the selected intention.
    fn from(pred: &PredictionRecord) -> Self {
        Self {
            obstacle_id: pred.obstacle_id.clone(),
            anchor_time: pred.anchor_time,
            points: pred
                .selected()
                .best_trajectory
                .points
                .iter()
                .map(|q| (q.t, q.position))
                .collect(),
        }
    }
}

impl From<&DatasetRecord> for Forecast {
    fn from(rec: &DatasetRecord) -> Self {
        Self {
            obstacle_id: rec.obstacle_id.clone(),
            anchor_time: rec.anchor_time,
            points: rec.future_points(),
        }
    }
}

/// Scores each prediction's selected best trajectory against its label.
pub fn evaluate_run(
    predictions: &[PredictionRecord],
    dataset: &[DatasetRecord],
    horizons: &[f64],
) -> Result<MetricReport> {
    let forecasts: Vec<Forecast> = predictions.iter().map(Forecast::from).collect();
    evaluate_forecasts(&forecasts, dataset, horizons)
}

/// Anchors whose label or forecast stops short of a horizon are left out of
/// that horizon only.
pub fn evaluate_forecasts(
    predictions: &[Forecast],
    dataset: &[DatasetRecord],
    horizons: &[f64],
) -> Result<MetricReport> {
    let labels = index_dataset(dataset)?;
    let mut sums = vec![(0.0, 0.0, 0usize); horizons.len()];
    let mut mse_sum = 0.0;
    let mut mse_count = 0usize;
    let mut joined = 0usize;
    for pred in predictions {
        let Some(record) = labels.get(&(pred.obstacle_id.clone(), time_key(pred.anchor_time))) else {
            continue;
        };
        joined += 1;
        let p = &pred.points;
        let truth = record.future_points();
        for (slot, &h) in sums.iter_mut().zip(horizons) {
            match (ade(p, &truth, h), fde(p, &truth, h)) {
                (Ok(a), Ok(f)) => {
                    slot.0 += a;
                    slot.1 += f;
                    slot.2 += 1;
                }
                (Err(Error::InsufficientCoverage { .. }), _) => {}
                (Err(e), _) | (_, Err(e)) => return Err(e),
            }
        }
        let n = p.len().min(truth.len());
        if n > 0 {
            let a: Vec<Point2> = p[..n].iter().map(|x| x.1).collect();
            let b: Vec<Point2> = truth[..n].iter().map(|x| x.1).collect();
            mse_sum += mse(&a, &b)?;
            mse_count += 1;
        }
    }
    let skipped = (predictions.len() - joined) + (dataset.len() - joined);
    Ok(MetricReport {
        horizons: horizons
            .iter()
            .zip(sums)
            .map(|(&h, (a, f, count))| HorizonMetrics {
                h,
                ade: if count > 0 { a / count as f64 } else { 0.0 },
                fde: if count > 0 { f / count as f64 } else { 0.0 },
                count,
            })
            .collect(),
        mse: (mse_count > 0).then(|| mse_sum / mse_count as f64),
        nll: None,
        skipped,
    })
}
