//! The labeled shelf grid.
//!
//! Shelf coordinates put the origin at the panel's top-left corner with x to
//! the right and y downward. Cells are numbered from 1 at the top-left in
//! row-major order. Each cell owns the half-open box `[lo, hi)` on both axes,
//! except that the panel's right and bottom edges belong to the last column
//! and row, so every point of the closed panel lands in exactly one cell.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{ConfigError, ShelfConfig};

const UNIT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("cell index {index} outside 1..={max}")]
    IndexOutOfRange { index: u32, max: u32 },
    #[error("point ({x_cm}, {y_cm}) lies outside the panel")]
    OutOfPanel { x_cm: f64, y_cm: f64 },
    #[error("gaze ray does not reach the shelf plane")]
    NoIntersection,
    #[error("invalid gaze ray: {0}")]
    InvalidRay(&'static str),
    #[error("panel does not divide evenly into cells")]
    UnevenCells,
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanePoint {
    pub x_cm: f64,
    pub y_cm: f64,
}

impl PlanePoint {
    pub const fn new(x_cm: f64, y_cm: f64) -> Self {
        Self { x_cm, y_cm }
    }

    pub fn distance(&self, other: &PlanePoint) -> f64 {
        (self.x_cm - other.x_cm).hypot(self.y_cm - other.y_cm)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub panel_width_cm: f64,
    pub panel_height_cm: f64,
    pub rows: u32,
    pub cols: u32,
    pub cell_w_cm: f64,
    pub cell_h_cm: f64,
    /// Camera pinhole in shelf coordinates.
    pub camera_point: PlanePoint,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::from_config(&ShelfConfig::default()).expect("default shelf tiles evenly")
    }
}

impl GridSpec {
    pub fn from_config(cfg: &ShelfConfig) -> Result<Self, GridError> {
        cfg.validate()?;
        if !cfg.cells_fit_exactly() {
            return Err(GridError::UnevenCells);
        }
        Ok(Self {
            panel_width_cm: cfg.panel_width_cm,
            panel_height_cm: cfg.panel_height_cm,
            rows: cfg.grid_rows,
            cols: cfg.grid_cols,
            cell_w_cm: cfg.cell_width_cm(),
            cell_h_cm: cfg.cell_height_cm(),
            camera_point: PlanePoint::new(cfg.camera_x_cm, cfg.camera_drop_cm),
        })
    }

    pub fn cell_count(&self) -> u32 {
        self.rows * self.cols
    }

    /// Zero-based (row, col) of a 1-based cell index.
    pub fn row_col(&self, index: u32) -> Result<(u32, u32), GridError> {
        if index == 0 || index > self.cell_count() {
            return Err(GridError::IndexOutOfRange {
                index,
                max: self.cell_count(),
            });
        }
        Ok(((index - 1) / self.cols, (index - 1) % self.cols))
    }

    pub fn contains(&self, p: &PlanePoint) -> bool {
        (0.0..=self.panel_width_cm).contains(&p.x_cm) && (0.0..=self.panel_height_cm).contains(&p.y_cm)
    }
}

pub fn cell_center(g: &GridSpec, index: u32) -> Result<PlanePoint, GridError> {
    let (row, col) = g.row_col(index)?;
    Ok(PlanePoint::new(
        (f64::from(col) + 0.5) * g.cell_w_cm,
        (f64::from(row) + 0.5) * g.cell_h_cm,
    ))
}

/// Cell slot of `v` along an axis of `n` cells of size `size`.
fn axis_slot(v: f64, size: f64, n: u32) -> u32 {
    let last = n - 1;
    let mut slot = ((v / size).floor().max(0.0) as u32).min(last);
    // Division can round across a boundary; settle against the edges
    // themselves so membership matches `lo <= v < hi` exactly.
    if slot > 0 && v < f64::from(slot) * size {
        slot -= 1;
    } else if slot < last && v >= f64::from(slot + 1) * size {
        slot += 1;
    }
    slot
}

pub fn point_to_cell(g: &GridSpec, p: &PlanePoint) -> Result<u32, GridError> {
    if !g.contains(p) {
        return Err(GridError::OutOfPanel {
            x_cm: p.x_cm,
            y_cm: p.y_cm,
        });
    }
    let col = axis_slot(p.x_cm, g.cell_w_cm, g.cols);
    let row = axis_slot(p.y_cm, g.cell_h_cm, g.rows);
    Ok(row * g.cols + col + 1)
}

pub fn to_camera_coords(g: &GridSpec, p: &PlanePoint) -> PlanePoint {
    PlanePoint::new(p.x_cm - g.camera_point.x_cm, p.y_cm - g.camera_point.y_cm)
}

pub fn from_camera_coords(g: &GridSpec, p: &PlanePoint) -> PlanePoint {
    PlanePoint::new(p.x_cm + g.camera_point.x_cm, p.y_cm + g.camera_point.y_cm)
}

/// A gaze ray in shelf coordinates extended by `z`, the distance in front of
/// the shelf plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GazeRay {
    pub eye: [f64; 3],
    pub direction: [f64; 3],
}

impl GazeRay {
    pub fn new(eye: [f64; 3], direction: [f64; 3]) -> Result<Self, GridError> {
        if !eye.iter().chain(direction.iter()).all(|v| v.is_finite()) {
            return Err(GridError::InvalidRay("non-finite component"));
        }
        if eye[2] <= 0.0 {
            return Err(GridError::InvalidRay("eye must be in front of the shelf (z > 0)"));
        }
        let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > UNIT_TOLERANCE {
            return Err(GridError::InvalidRay("direction must be a unit vector"));
        }
        Ok(Self { eye, direction })
    }

    /// Normalizes `direction` before validating.
    pub fn normalized(eye: [f64; 3], direction: [f64; 3]) -> Result<Self, GridError> {
        let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(GridError::InvalidRay("zero direction"));
        }
        Self::new(eye, direction.map(|v| v / norm))
    }

    /// Ray from `eye` toward a point on the shelf plane.
    pub fn aimed_at(eye: [f64; 3], target: &PlanePoint) -> Result<Self, GridError> {
        Self::normalized(
            eye,
            [target.x_cm - eye[0], target.y_cm - eye[1], -eye[2]],
        )
    }
}

pub fn ray_to_cell(g: &GridSpec, ray: &GazeRay) -> Result<(PlanePoint, u32), GridError> {
    let dz = ray.direction[2];
    if dz >= 0.0 {
        return Err(GridError::NoIntersection);
    }
    let t = -ray.eye[2] / dz;
    let hit = PlanePoint::new(
        ray.eye[0] + t * ray.direction[0],
        ray.eye[1] + t * ray.direction[1],
    );
    let cell = point_to_cell(g, &hit)?;
    Ok((hit, cell))
}
