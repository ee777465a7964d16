//! Planning and simulation toolkit for shelf-mounted gaze capture.
//!
//! The crate covers the side-view camera placement geometry ([`geometry`]),
//! Monte Carlo placement over a population ([`placement`]), the labeled
//! shelf grid ([`grid`]), eye aspect ratio diagnostics ([`ear`]), the
//! latest-frame pipeline simulator ([`pipeline`]) and few-shot calibration
//! planning ([`calibration`]).
//!
//! All lengths are centimeters unless a name says otherwise.

pub mod calibration;
pub mod ear;
pub mod geometry;
pub mod grid;
pub mod pipeline;
pub mod placement;
pub mod units;

pub use calibration::{
    emit_ground_truth, plan, validate_spec, CalibrationError, CalibrationPlan, CalibrationSpec,
    GroundTruthRecord, PlanEntry, PointRole, Split, Violation,
};
pub use ear::{batch_stats, classify, ear, BatchStats, EarError, EarReading, EyeLandmarks, EyeState, Point2};
pub use geometry::{
    angular_imbalance, bisector_split, bisector_split_with, eye_to_bottom, eye_to_top, ConfigError,
    DropFormula, GeometryError, PersonSample, ShelfConfig, SplitResult,
};
pub use grid::{
    cell_center, from_camera_coords, point_to_cell, ray_to_cell, to_camera_coords, GazeRay,
    GridError, GridSpec, PlanePoint,
};
pub use pipeline::{
    simulate, sweep_processing_time, trace, Event, EventKind, LatencyStats, ProcessingTime,
    QueuePolicy, SimConfig, SimError, SimMetrics, Simulation, SweepRow,
};
pub use placement::{
    distance_table, imbalance_sweep, optimize_camera_drop, recommended_distance,
    recommended_distance_for_eye, DistanceRow, ImbalanceRow, PlacementError, PlacementResult,
    PopulationSpec, RowStatus,
};
