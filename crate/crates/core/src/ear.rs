//! Eye aspect ratio from six eye landmarks.
//!
//! Landmark order: `p1` is the outer corner, then counterclockwise in image
//! coordinates `p2`, `p3` along the upper lid, `p4` the inner corner, `p5`,
//! `p6` along the lower lid. `(p2, p6)` and `(p3, p5)` are the vertical pairs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_THRESHOLD: f64 = 0.2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EarError {
    #[error("eye corners coincide, horizontal extent is zero")]
    DegenerateEye,
    #[error("no EAR values to summarize")]
    EmptyBatch,
    #[error("expected 12 coordinates per eye, got {0}")]
    WrongArity(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    fn dist(self, o: Point2) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EyeLandmarks {
    pub points: [Point2; 6],
}

impl EyeLandmarks {
    pub fn new(points: [Point2; 6]) -> Self {
        Self { points }
    }

    /// From `x1, y1, ..., x6, y6`.
    pub fn from_flat(coords: &[f64]) -> Result<Self, EarError> {
        if coords.len() != 12 {
            return Err(EarError::WrongArity(coords.len()));
        }
        let mut points = [Point2::new(0.0, 0.0); 6];
        for (p, xy) in points.iter_mut().zip(coords.chunks_exact(2)) {
            *p = Point2::new(xy[0], xy[1]);
        }
        Ok(Self { points })
    }

    /// 1-based landmark accessor.
    pub fn p(&self, i: usize) -> Point2 {
        self.points[i - 1]
    }

    pub fn map(&self, f: impl Fn(Point2) -> Point2) -> Self {
        Self {
            points: self.points.map(f),
        }
    }
}

pub fn ear(l: &EyeLandmarks) -> Result<f64, EarError> {
    let width = l.p(1).dist(l.p(4));
    if !(width > 0.0) {
        return Err(EarError::DegenerateEye);
    }
    Ok((l.p(2).dist(l.p(6)) + l.p(3).dist(l.p(5))) / (2.0 * width))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EyeState {
    Open,
    Closed,
}

/// Open only when strictly above the threshold.
pub fn classify(value: f64, threshold: f64) -> EyeState {
    if value > threshold {
        EyeState::Open
    } else {
        EyeState::Closed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EarReading {
    pub value: f64,
    pub open: bool,
    pub threshold: f64,
}

impl EarReading {
    pub fn from_landmarks(l: &EyeLandmarks, threshold: f64) -> Result<Self, EarError> {
        let value = ear(l)?;
        Ok(Self {
            value,
            open: classify(value, threshold) == EyeState::Open,
            threshold,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchStats {
    pub mean: f64,
    pub min: f64,
    pub fraction_open: f64,
}

pub fn batch_stats(values: &[f64], threshold: f64) -> Result<BatchStats, EarError> {
    if values.is_empty() {
        return Err(EarError::EmptyBatch);
    }
    let n = values.len() as f64;
    let open = values
        .iter()
        .filter(|&&v| classify(v, threshold) == EyeState::Open)
        .count();
    Ok(BatchStats {
        mean: values.iter().sum::<f64>() / n,
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        fraction_open: open as f64 / n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eye(width: f64, gap_a: f64, gap_b: f64) -> EyeLandmarks {
        EyeLandmarks::new([
            Point2::new(0.0, 0.0),
            Point2::new(width / 3.0, gap_a / 2.0),
            Point2::new(2.0 * width / 3.0, gap_b / 2.0),
            Point2::new(width, 0.0),
            Point2::new(2.0 * width / 3.0, -gap_b / 2.0),
            Point2::new(width / 3.0, -gap_a / 2.0),
        ])
    }

    #[test]
    fn half_ratio() {
        let l = EyeLandmarks::from_flat(&[0., 0., 1., 1., 3., 1., 4., 0., 3., -1., 1., -1.]).unwrap();
        assert!((ear(&l).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn closed_eye_is_zero() {
        assert_eq!(ear(&eye(4.0, 0.0, 0.0)).unwrap(), 0.0);
    }

    #[test]
    fn squinting_reading() {
        let v = ear(&eye(3.0, 0.2, 0.2)).unwrap();
        assert!((v - 0.0667).abs() < 1e-4);
        assert_eq!(classify(v, DEFAULT_THRESHOLD), EyeState::Closed);
    }

    #[test]
    fn degenerate() {
        assert_eq!(ear(&eye(0.0, 1.0, 1.0)), Err(EarError::DegenerateEye));
        assert_eq!(EyeLandmarks::from_flat(&[1.0; 11]), Err(EarError::WrongArity(11)));
    }

    #[test]
    fn strict_threshold() {
        assert_eq!(classify(0.5, 0.2), EyeState::Open);
        assert_eq!(classify(0.2, 0.2), EyeState::Closed);
    }

    #[test]
    fn batches() {
        let s = batch_stats(&[0.5], 0.2).unwrap();
        assert_eq!((s.mean, s.min, s.fraction_open), (0.5, 0.5, 1.0));
        let s = batch_stats(&[0.0667, 0.5], 0.2).unwrap();
        assert!((s.mean - 0.28335).abs() < 1e-12);
        assert_eq!(s.min, 0.0667);
        assert_eq!(s.fraction_open, 0.5);
        assert_eq!(batch_stats(&[], 0.2), Err(EarError::EmptyBatch));
    }

    #[test]
    fn reading_json_shape() {
        let r = EarReading::from_landmarks(&eye(4.0, 2.0, 2.0), 0.2).unwrap();
        let v = serde_json::to_value(r).unwrap();
        assert_eq!(v["open"], true);
        assert_eq!(v["threshold"], 0.2);
    }
}
