//! Side-view geometry of a person looking at the shelf panel.
//!
//! Vertical positions are heights above the floor. The panel's top edge
//! coincides with the shelf top, so a camera drop is measured from either.
//! Ray elevations are signed, positive above the eye line.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Eye heights at or above this are treated as bad input (likely a unit slip).
pub const MAX_EYE_HEIGHT_CM: f64 = 250.0;

const CELL_FIT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("panel height {panel} cm must be in (0, shelf height {shelf}]")]
    PanelHeight { panel: f64, shelf: f64 },
    #[error("panel width {0} cm must be positive")]
    PanelWidth(f64),
    #[error("camera drop {drop} cm outside [0, {panel}]")]
    CameraDrop { drop: f64, panel: f64 },
    #[error("camera x {x} cm outside [0, {width}]")]
    CameraX { x: f64, width: f64 },
    #[error("eye-to-crown offset {0} cm must be finite and non-negative")]
    EyeOffset(f64),
    #[error("grid must have at least one row and one column")]
    EmptyGrid,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("eye height {eye} cm is not above the panel bottom at {bottom} cm")]
    EyeBelowPanelBottom { eye: f64, bottom: f64 },
    #[error("eye height {0} cm is not a plausible value")]
    EyeHeightOutOfRange(f64),
    #[error("standing distance {0} cm must be positive")]
    NonPositiveDistance(f64),
    #[error("camera drop {drop} cm outside [0, {panel}]")]
    DropOutOfRange { drop: f64, panel: f64 },
}

/// Physical layout of the shelf, the display panel on it and the camera.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShelfConfig {
    pub shelf_height_cm: f64,
    pub panel_height_cm: f64,
    pub panel_width_cm: f64,
    pub camera_x_cm: f64,
    pub camera_drop_cm: f64,
    pub eye_crown_offset_cm: f64,
    pub grid_rows: u32,
    pub grid_cols: u32,
}

impl Default for ShelfConfig {
    fn default() -> Self {
        Self {
            shelf_height_cm: 181.0,
            panel_height_cm: 138.0,
            panel_width_cm: 102.0,
            camera_x_cm: 51.0,
            camera_drop_cm: 55.5,
            eye_crown_offset_cm: 4.8,
            grid_rows: 6,
            grid_cols: 6,
        }
    }
}

impl ShelfConfig {
    /// Height of the panel's bottom edge above the floor.
    pub fn panel_bottom_height_cm(&self) -> f64 {
        self.shelf_height_cm - self.panel_height_cm
    }

    pub fn cell_width_cm(&self) -> f64 {
        self.panel_width_cm / f64::from(self.grid_cols)
    }

    pub fn cell_height_cm(&self) -> f64 {
        self.panel_height_cm / f64::from(self.grid_rows)
    }

    pub fn with_camera_drop(mut self, drop_cm: f64) -> Self {
        self.camera_drop_cm = drop_cm;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let finite = [
            self.shelf_height_cm,
            self.panel_height_cm,
            self.panel_width_cm,
            self.camera_x_cm,
            self.camera_drop_cm,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite || self.panel_height_cm <= 0.0 || self.panel_height_cm > self.shelf_height_cm {
            return Err(ConfigError::PanelHeight {
                panel: self.panel_height_cm,
                shelf: self.shelf_height_cm,
            });
        }
        if self.panel_width_cm <= 0.0 {
            return Err(ConfigError::PanelWidth(self.panel_width_cm));
        }
        if !(0.0..=self.panel_height_cm).contains(&self.camera_drop_cm) {
            return Err(ConfigError::CameraDrop {
                drop: self.camera_drop_cm,
                panel: self.panel_height_cm,
            });
        }
        if !(0.0..=self.panel_width_cm).contains(&self.camera_x_cm) {
            return Err(ConfigError::CameraX {
                x: self.camera_x_cm,
                width: self.panel_width_cm,
            });
        }
        if !self.eye_crown_offset_cm.is_finite() || self.eye_crown_offset_cm < 0.0 {
            return Err(ConfigError::EyeOffset(self.eye_crown_offset_cm));
        }
        if self.grid_rows == 0 || self.grid_cols == 0 {
            return Err(ConfigError::EmptyGrid);
        }
        Ok(())
    }

    /// True when the panel splits into equal cells whose products reproduce
    /// the panel dimensions to within floating point rounding.
    pub fn cells_fit_exactly(&self) -> bool {
        let w = self.cell_width_cm() * f64::from(self.grid_cols);
        let h = self.cell_height_cm() * f64::from(self.grid_rows);
        (w - self.panel_width_cm).abs() <= CELL_FIT_TOLERANCE
            && (h - self.panel_height_cm).abs() <= CELL_FIT_TOLERANCE
    }
}

/// One person: where their eyes are and how far they stand from the shelf.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PersonSample {
    pub stature_cm: f64,
    pub eye_height_cm: f64,
    pub distance_cm: f64,
}

impl PersonSample {
    pub fn from_stature(
        cfg: &ShelfConfig,
        stature_cm: f64,
        distance_cm: f64,
    ) -> Result<Self, GeometryError> {
        let eye = stature_cm - cfg.eye_crown_offset_cm;
        Self::build(stature_cm, eye, distance_cm)
    }

    pub fn from_eye_height(
        cfg: &ShelfConfig,
        eye_height_cm: f64,
        distance_cm: f64,
    ) -> Result<Self, GeometryError> {
        Self::build(eye_height_cm + cfg.eye_crown_offset_cm, eye_height_cm, distance_cm)
    }

    fn build(stature_cm: f64, eye_height_cm: f64, distance_cm: f64) -> Result<Self, GeometryError> {
        if !(distance_cm.is_finite() && distance_cm > 0.0) {
            return Err(GeometryError::NonPositiveDistance(distance_cm));
        }
        if !(eye_height_cm.is_finite() && eye_height_cm > 0.0 && eye_height_cm < MAX_EYE_HEIGHT_CM)
        {
            return Err(GeometryError::EyeHeightOutOfRange(eye_height_cm));
        }
        Ok(Self {
            stature_cm,
            eye_height_cm,
            distance_cm,
        })
    }

    /// Rejects eyes at or below the panel's bottom edge for this shelf.
    pub fn check_against(&self, cfg: &ShelfConfig) -> Result<(), GeometryError> {
        let bottom = cfg.panel_bottom_height_cm();
        if self.eye_height_cm <= bottom {
            return Err(GeometryError::EyeBelowPanelBottom {
                eye: self.eye_height_cm,
                bottom,
            });
        }
        Ok(())
    }
}

/// Distances from the eye to both panel edges and the bisector split point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitResult {
    pub ab_cm: f64,
    pub ac_cm: f64,
    pub db_cm: f64,
    pub alpha1_rad: f64,
    pub alpha2_rad: f64,
}

/// Which closed form to use for the split point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DropFormula {
    /// `BC * AB / (AB + AC)`: the camera sits on the angle bisector.
    #[default]
    Bisector,
    /// `BC * AC / (AB + AC)`: the variant with the edge distances swapped.
    /// Kept only for comparison; it does not equalize the two angles.
    PrintedAcNumerator,
}

/// Eye to shelf top.
pub fn eye_to_top(cfg: &ShelfConfig, p: &PersonSample) -> f64 {
    p.distance_cm.hypot(cfg.shelf_height_cm - p.eye_height_cm)
}

/// Eye to panel bottom.
pub fn eye_to_bottom(cfg: &ShelfConfig, p: &PersonSample) -> Result<f64, GeometryError> {
    p.check_against(cfg)?;
    Ok(p.distance_cm.hypot(p.eye_height_cm - cfg.panel_bottom_height_cm()))
}

pub fn bisector_split(cfg: &ShelfConfig, p: &PersonSample) -> Result<SplitResult, GeometryError> {
    bisector_split_with(cfg, p, DropFormula::Bisector)
}

pub fn bisector_split_with(
    cfg: &ShelfConfig,
    p: &PersonSample,
    formula: DropFormula,
) -> Result<SplitResult, GeometryError> {
    let ac = eye_to_bottom(cfg, p)?;
    let ab = eye_to_top(cfg, p);
    let numerator = match formula {
        DropFormula::Bisector => ab,
        DropFormula::PrintedAcNumerator => ac,
    };
    let db = cfg.panel_height_cm * numerator / (ab + ac);
    let (alpha1, alpha2) = split_angles(cfg, p, cfg.camera_drop_cm);
    Ok(SplitResult {
        ab_cm: ab,
        ac_cm: ac,
        db_cm: db,
        alpha1_rad: alpha1,
        alpha2_rad: alpha2,
    })
}

/// Signed `alpha1 - alpha2` for a camera `camera_drop_cm` below the shelf
/// top. Negative when the camera sits above the bisector point, zero on it.
pub fn angular_imbalance(
    cfg: &ShelfConfig,
    p: &PersonSample,
    camera_drop_cm: f64,
) -> Result<f64, GeometryError> {
    if !(0.0..=cfg.panel_height_cm).contains(&camera_drop_cm) {
        return Err(GeometryError::DropOutOfRange {
            drop: camera_drop_cm,
            panel: cfg.panel_height_cm,
        });
    }
    p.check_against(cfg)?;
    let (alpha1, alpha2) = split_angles(cfg, p, camera_drop_cm);
    Ok(alpha1 - alpha2)
}

/// Angle subtended at the eye by the whole panel.
pub fn panel_angle(cfg: &ShelfConfig, p: &PersonSample) -> f64 {
    elevation(p, cfg.shelf_height_cm) - elevation(p, cfg.panel_bottom_height_cm())
}

fn elevation(p: &PersonSample, height_cm: f64) -> f64 {
    (height_cm - p.eye_height_cm).atan2(p.distance_cm)
}

fn split_angles(cfg: &ShelfConfig, p: &PersonSample, camera_drop_cm: f64) -> (f64, f64) {
    let top = elevation(p, cfg.shelf_height_cm);
    let cam = elevation(p, cfg.shelf_height_cm - camera_drop_cm);
    let bottom = elevation(p, cfg.panel_bottom_height_cm());
    ((top - cam).abs(), (cam - bottom).abs())
}
