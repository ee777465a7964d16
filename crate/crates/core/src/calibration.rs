//! Few-shot calibration plans over the shelf grid.
//!
//! Every planned point gets `frames_per_point` recorded frames. A seeded
//! shuffle of the frame ids picks the training frames first and the
//! validation frames next, so the two never overlap.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{cell_center, to_camera_coords, GridError, GridSpec, PlanePoint};

pub const VALIDATION_CELLS: [u32; 4] = [8, 11, 26, 29];

/// Fine-tuning point sets keyed by size.
pub fn default_training_sets() -> BTreeMap<usize, Vec<u32>> {
    BTreeMap::from([
        (2, vec![6, 31]),
        (4, vec![3, 13, 18, 33]),
        (8, vec![1, 3, 6, 13, 18, 31, 33, 36]),
        (
            16,
            vec![1, 3, 4, 6, 13, 15, 16, 18, 19, 21, 22, 24, 31, 33, 34, 36],
        ),
        (
            32,
            vec![
                1, 2, 3, 4, 5, 6, 7, 9, 10, 12, 13, 14, 15, 16, 17, 18, 19, 20, 21, 22, 23, 24, 25,
                27, 28, 30, 31, 32, 33, 34, 35, 36,
            ],
        ),
    ])
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CalibrationError {
    #[error("no training set of size {0}")]
    UnknownSetSize(usize),
    #[error("calibration spec is inconsistent: {0:?}")]
    InvalidSpec(Vec<Violation>),
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationSpec {
    pub frames_per_point: u32,
    pub train_frames_per_point: u32,
    pub val_frames_per_point: u32,
    pub validation_cells: Vec<u32>,
    pub training_sets: BTreeMap<usize, Vec<u32>>,
    pub seed: u64,
}

impl Default for CalibrationSpec {
    fn default() -> Self {
        Self {
            frames_per_point: 10,
            train_frames_per_point: 3,
            val_frames_per_point: 1,
            validation_cells: VALIDATION_CELLS.to_vec(),
            training_sets: default_training_sets(),
            seed: 0,
        }
    }
}

/// A problem found by [`validate_spec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Overlap { set_size: usize, cell: u32 },
    CellOutOfRange { cell: u32 },
    /// No validation cell sits at this cell's mirror position across the
    /// panel's vertical centerline.
    AsymmetricValidation { cell: u32 },
    FrameBudget { train: u32, val: u32, available: u32 },
}

impl Violation {
    /// Symmetry is advisory; everything else makes a plan meaningless.
    pub fn is_fatal(&self) -> bool {
        !matches!(self, Violation::AsymmetricValidation { .. })
    }
}

pub fn validate_spec(spec: &CalibrationSpec, grid: &GridSpec) -> Vec<Violation> {
    let mut out = Vec::new();
    let max = grid.cell_count();
    let in_range = |c: u32| (1..=max).contains(&c);

    let all_cells: BTreeSet<u32> = spec
        .validation_cells
        .iter()
        .chain(spec.training_sets.values().flatten())
        .copied()
        .collect();
    out.extend(
        all_cells
            .iter()
            .filter(|&&c| !in_range(c))
            .map(|&cell| Violation::CellOutOfRange { cell }),
    );

    let validation: BTreeSet<u32> = spec.validation_cells.iter().copied().collect();
    for (&set_size, cells) in &spec.training_sets {
        for &cell in cells.iter().filter(|c| validation.contains(c)) {
            out.push(Violation::Overlap { set_size, cell });
        }
    }

    let centers: Vec<(u32, PlanePoint)> = validation
        .iter()
        .filter_map(|&c| cell_center(grid, c).ok().map(|p| (c, p)))
        .collect();
    let mirror_x = grid.panel_width_cm / 2.0;
    for &(cell, p) in &centers {
        let has_mirror = centers.iter().any(|(_, q)| {
            (q.x_cm - (2.0 * mirror_x - p.x_cm)).abs() < 1e-9 && (q.y_cm - p.y_cm).abs() < 1e-9
        });
        if !has_mirror {
            out.push(Violation::AsymmetricValidation { cell });
        }
    }

    if spec.train_frames_per_point + spec.val_frames_per_point > spec.frames_per_point {
        out.push(Violation::FrameBudget {
            train: spec.train_frames_per_point,
            val: spec.val_frames_per_point,
            available: spec.frames_per_point,
        });
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointRole {
    Training,
    Validation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanEntry {
    pub cell: u32,
    pub role: PointRole,
    pub target: PlanePoint,
    pub train_frames: Vec<u32>,
    pub val_frames: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CalibrationPlan {
    pub entries: Vec<PlanEntry>,
}

/// Training cells in table order, then the validation cells.
pub fn plan(
    spec: &CalibrationSpec,
    set_size: usize,
    grid: &GridSpec,
) -> Result<CalibrationPlan, CalibrationError> {
    let training = spec
        .training_sets
        .get(&set_size)
        .ok_or(CalibrationError::UnknownSetSize(set_size))?;
    let fatal: Vec<Violation> = validate_spec(spec, grid)
        .into_iter()
        .filter(Violation::is_fatal)
        .collect();
    if !fatal.is_empty() {
        return Err(CalibrationError::InvalidSpec(fatal));
    }

    let points = training
        .iter()
        .map(|&c| (c, PointRole::Training))
        .chain(spec.validation_cells.iter().map(|&c| (c, PointRole::Validation)));

    let entries = points
        .map(|(cell, role)| {
            let (train_frames, val_frames) = draw_frames(spec, cell);
            Ok(PlanEntry {
                cell,
                role,
                target: cell_center(grid, cell)?,
                train_frames,
                val_frames,
            })
        })
        .collect::<Result<_, CalibrationError>>()?;
    Ok(CalibrationPlan { entries })
}

/// Frame draw for one cell. Each cell has its own stream, so a cell's frames
/// do not depend on which set it appears in.
fn draw_frames(spec: &CalibrationSpec, cell: u32) -> (Vec<u32>, Vec<u32>) {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(u64::from(cell));
    let mut ids: Vec<u32> = (0..spec.frames_per_point).collect();
    ids.shuffle(&mut rng);
    let train = spec.train_frames_per_point as usize;
    let val = spec.val_frames_per_point as usize;
    (ids[..train].to_vec(), ids[train..train + val].to_vec())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
}

/// One line of the ground-truth file:
/// `{"frame":..,"cell":..,"shelf":[x,y],"camera":[x,y],"split":"train"|"val"}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthRecord {
    pub frame: u32,
    pub cell: u32,
    pub shelf: [f64; 2],
    pub camera: [f64; 2],
    pub split: Split,
}

pub fn emit_ground_truth(plan: &CalibrationPlan, grid: &GridSpec) -> Vec<GroundTruthRecord> {
    plan.entries
        .iter()
        .flat_map(|entry| {
            let cam = to_camera_coords(grid, &entry.target);
            let record = move |frame: u32, split: Split| GroundTruthRecord {
                frame,
                cell: entry.cell,
                shelf: [entry.target.x_cm, entry.target.y_cm],
                camera: [cam.x_cm, cam.y_cm],
                split,
            };
            entry
                .train_frames
                .iter()
                .map(move |&f| record(f, Split::Train))
                .chain(entry.val_frames.iter().map(move |&f| record(f, Split::Val)))
        })
        .collect()
}
