//! Planar polylines parametrized by arc length.
//!
//! A [`Curve`] stores its vertices together with the cumulative arc length at
//! each vertex. Evaluation past the final vertex continues along the tangent
//! of the last segment, so speed profiles that overrun a short lane path still
//! produce well-defined positions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vertices closer than this are treated as duplicates.
pub const DUPLICATE_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn sub(&self, other: &Point2) -> Point2 {
        Point2::new(self.x - other.x, self.y - other.y)
    }

    pub fn add(&self, other: &Point2) -> Point2 {
        Point2::new(self.x + other.x, self.y + other.y)
    }

    pub fn scale(&self, k: f64) -> Point2 {
        Point2::new(self.x * k, self.y * k)
    }

    pub fn dot(&self, other: &Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(&self, other: &Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Linear interpolation, `t = 0` gives `self`.
    pub fn lerp(&self, other: &Point2, t: f64) -> Point2 {
        Point2::new(
            self.x + (other.x - self.x) * t,
            self.y + (other.y - self.y) * t,
        )
    }
}

impl From<[f64; 2]> for Point2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Point2::new(x, y)
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

/// Wraps an angle into (−π, π].
pub fn normalize_angle(angle: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut a = angle.rem_euclid(TAU);
    if a > PI {
        a -= TAU;
    }
    a
}

/// Signed Menger curvature of three points: reciprocal circumradius, positive
/// when `a -> b -> c` turns counter-clockwise.
pub fn menger_curvature(a: &Point2, b: &Point2, c: &Point2) -> f64 {
    let ab = b.sub(a);
    let bc = c.sub(b);
    let ca = a.sub(c);
    let denom = ab.norm() * bc.norm() * ca.norm();
    if denom < DUPLICATE_EPS {
        return 0.0;
    }
    2.0 * ab.cross(&bc) / denom
}

/// Result of projecting a point onto a curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Projection {
    /// Arc length of the closest point.
    pub s: f64,
    /// Signed perpendicular component, positive to the left of travel.
    pub lateral_offset: f64,
    /// Euclidean distance from the query to the closest point.
    pub distance: f64,
    pub point: Point2,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    points: Vec<Point2>,
    cumulative_s: Vec<f64>,
}

impl Curve {
    pub fn new(points: Vec<Point2>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidCurve(format!(
                "need at least 2 vertices, got {}",
                points.len()
            )));
        }
        let mut cumulative_s = Vec::with_capacity(points.len());
        cumulative_s.push(0.0);
        for (k, w) in points.windows(2).enumerate() {
            if !w[0].is_finite() || !w[1].is_finite() {
                return Err(Error::InvalidCurve(format!("non-finite vertex near index {k}")));
            }
            let d = w[0].distance(&w[1]);
            if d < DUPLICATE_EPS {
                return Err(Error::InvalidCurve(format!(
                    "duplicate consecutive vertices at index {k}"
                )));
            }
            cumulative_s.push(cumulative_s[k] + d);
        }
        Ok(Self {
            points,
            cumulative_s,
        })
    }

    /// Builds a curve after dropping consecutive near-duplicate vertices.
    pub fn from_points_dedup(points: impl IntoIterator<Item = Point2>) -> Result<Self> {
        let mut kept: Vec<Point2> = Vec::new();
        for p in points {
            if kept.last().is_none_or(|q| q.distance(&p) >= DUPLICATE_EPS) {
                kept.push(p);
            }
        }
        Self::new(kept)
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn cumulative_s(&self) -> &[f64] {
        &self.cumulative_s
    }

    pub fn length(&self) -> f64 {
        *self.cumulative_s.last().expect("curve has vertices")
    }

    /// Index of the segment containing `s`. A vertex belongs to its outgoing
    /// segment; anything at or past the end maps to the last segment.
    fn segment_index(&self, s: f64) -> usize {
        let last = self.points.len() - 2;
        // first k with cumulative_s[k] > s, minus one
        let k = self.cumulative_s.partition_point(|&c| c <= s);
        k.saturating_sub(1).min(last)
    }

    fn segment_heading(&self, k: usize) -> f64 {
        let d = self.points[k + 1].sub(&self.points[k]);
        d.y.atan2(d.x)
    }

    /// Position and heading at arc length `s`. Past the end the last segment's
    /// tangent is followed.
    pub fn point_at_s(&self, s: f64) -> Result<(Point2, f64)> {
        if s < 0.0 || s.is_nan() {
            return Err(Error::NegativeArcLength(s));
        }
        let k = self.segment_index(s);
        let a = self.points[k];
        let b = self.points[k + 1];
        let seg_len = self.cumulative_s[k + 1] - self.cumulative_s[k];
        let t = (s - self.cumulative_s[k]) / seg_len;
        Ok((a.lerp(&b, t), self.segment_heading(k)))
    }

    /// Signed curvature at `s` from the vertex triple centred on the vertex
    /// nearest to `s`. Two-vertex curves and the tangent extension past the end
    /// are straight.
    pub fn curvature_at_s(&self, s: f64) -> f64 {
        let n = self.points.len();
        if n < 3 || s > self.length() || s < 0.0 {
            return 0.0;
        }
        let k = self.segment_index(s);
        let mid = if s - self.cumulative_s[k] < self.cumulative_s[k + 1] - s {
            k
        } else {
            k + 1
        };
        let mid = mid.clamp(1, n - 2);
        menger_curvature(
            &self.points[mid - 1],
            &self.points[mid],
            &self.points[mid + 1],
        )
    }

    /// Closest point on the polyline. Ties go to the smaller arc length.
    pub fn project_point(&self, p: &Point2) -> Projection {
        let mut best: Option<Projection> = None;
        for k in 0..self.points.len() - 1 {
            let a = self.points[k];
            let d = self.points[k + 1].sub(&a);
            let len = self.cumulative_s[k + 1] - self.cumulative_s[k];
            let t = (p.sub(&a).dot(&d) / (len * len)).clamp(0.0, 1.0);
            let proj = a.add(&d.scale(t));
            let distance = p.distance(&proj);
            if best.as_ref().is_none_or(|b| distance < b.distance) {
                best = Some(Projection {
                    s: self.cumulative_s[k] + t * len,
                    lateral_offset: d.scale(1.0 / len).cross(&p.sub(&proj)),
                    distance,
                    point: proj,
                });
            }
        }
        best.expect("curve has at least one segment")
    }

    /// The part of the curve from arc length `s` onwards. When fewer than two
    /// distinct vertices remain, a unit-length piece of the final tangent is
    /// returned instead.
    pub fn trimmed_from(&self, s: f64) -> Result<Curve> {
        let (start, heading) = self.point_at_s(s.max(0.0))?;
        let k = self.segment_index(s.max(0.0));
        let tail = self.points[k + 1..].iter().copied();
        let trimmed = Curve::from_points_dedup(std::iter::once(start).chain(tail));
        match trimmed {
            Ok(c) if s < self.length() => Ok(c),
            _ => Curve::new(vec![
                start,
                start.add(&Point2::new(heading.cos(), heading.sin())),
            ]),
        }
    }
}
