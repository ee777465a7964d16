use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use shelfgaze_core::ProcessingTime;

#[derive(Debug, Parser)]
#[command(
    name = "shelfgaze",
    version,
    about = "Camera placement, shelf grid, EAR and pipeline planning for shelf gaze capture"
)]
pub struct Cli {
    #[command(flatten)]
    pub shelf: ShelfArgs,

    #[command(subcommand)]
    pub command: Command,
}

/// Shelf layout. A JSON config file is applied first, then individual flags.
/// Defaults: 181 cm shelf, 138 x 102 cm panel, camera 51 cm from the left
/// and 55.5 cm below the top, 4.8 cm eye-to-crown offset, 6 x 6 grid.
#[derive(Debug, Args, Default)]
pub struct ShelfArgs {
    /// JSON file with ShelfConfig fields
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Shelf height in cm [default: 181]
    #[arg(long, global = true)]
    pub shelf_height: Option<f64>,
    /// Panel height in cm [default: 138]
    #[arg(long, global = true)]
    pub panel_height: Option<f64>,
    /// Panel width in cm [default: 102]
    #[arg(long, global = true)]
    pub panel_width: Option<f64>,
    /// Camera offset from the panel's left edge in cm [default: 51]
    #[arg(long, global = true)]
    pub camera_x: Option<f64>,
    /// Camera depth below the shelf top in cm [default: 55.5]
    #[arg(long, global = true)]
    pub camera_drop: Option<f64>,
    /// Eye level to top of head in cm [default: 4.8]
    #[arg(long, global = true)]
    pub eye_offset: Option<f64>,
    /// Grid rows [default: 6]
    #[arg(long, global = true)]
    pub rows: Option<u32>,
    /// Grid columns [default: 6]
    #[arg(long, global = true)]
    pub cols: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo estimate of the optimal camera drop
    Optimize(OptimizeArgs),
    /// Recommended standing distance per stature (CSV: stature_mm,distance_mm,status)
    DistanceTable(DistanceTableArgs),
    /// Angular imbalance across camera drops (CSV: drop_cm,residual_rad)
    Sweep(SweepArgs),
    /// Cell center by index, or cell containing a point
    Cell(CellArgs),
    /// Resolve a gaze ray to a shelf cell
    Gaze(GazeArgs),
    /// Eye aspect ratio readings for a file of landmarks
    Ear(EarArgs),
    /// Simulate the latest-frame processing pipeline
    Simulate(SimulateArgs),
    /// Calibration plan as line-delimited JSON ground truth
    CalibPlan(CalibPlanArgs),
    /// Check a calibration spec for overlaps, symmetry and frame budget
    ValidateCalib(ValidateCalibArgs),
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Mean stature in cm
    #[arg(long, default_value_t = 165.0)]
    pub height_mean: f64,
    /// Stature standard deviation in cm
    #[arg(long, default_value_t = 6.0)]
    pub height_std: f64,
    /// Nearest standing distance in cm
    #[arg(long, default_value_t = 75.0)]
    pub distance_min: f64,
    /// Farthest standing distance in cm
    #[arg(long, default_value_t = 150.0)]
    pub distance_max: f64,
    /// Worker threads (output does not depend on this)
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct DistanceTableArgs {
    /// Statures in millimeters
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "1500,1550,1600,1650,1700,1750,1800"
    )]
    pub statures_mm: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Eye height in cm
    #[arg(long, conflicts_with = "stature", required_unless_present = "stature")]
    pub eye_height: Option<f64>,
    /// Stature in cm (eye offset is subtracted)
    #[arg(long)]
    pub stature: Option<f64>,
    /// Standing distance in cm
    #[arg(long, default_value_t = 112.5)]
    pub distance: f64,
    /// Explicit camera drops in cm; overrides --from/--to/--step
    #[arg(long, value_delimiter = ',')]
    pub drops: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.0)]
    pub from: f64,
    /// Last drop in cm [default: panel height]
    #[arg(long)]
    pub to: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub step: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct CellArgs {
    /// 1-based cell index, row-major from the top-left
    #[arg(long, conflicts_with_all = ["x", "y"], required_unless_present_all = ["x", "y"])]
    pub index: Option<u32>,
    /// Shelf x in cm (origin top-left, x right)
    #[arg(long, requires = "y", allow_negative_numbers = true)]
    pub x: Option<f64>,
    /// Shelf y in cm (y down)
    #[arg(long, requires = "x", allow_negative_numbers = true)]
    pub y: Option<f64>,
    /// Report the point relative to the camera pinhole instead
    #[arg(long)]
    pub camera_coords: bool,
}

#[derive(Debug, Args)]
pub struct GazeArgs {
    /// Eye position x,y,z in cm (z = distance in front of the shelf)
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub eye: Vec<f64>,
    /// Gaze direction dx,dy,dz (normalized before use)
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        conflicts_with = "target",
        required_unless_present = "target"
    )]
    pub dir: Option<Vec<f64>>,
    /// Aim at a shelf point x,y instead of giving a direction
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub target: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LandmarkFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct EarArgs {
    /// Landmark file (`-` for stdin): CSV rows x1,y1,...,x6,y6 or a JSON array
    #[arg(long)]
    pub input: PathBuf,
    /// Input format [default: from the file extension, else csv]
    #[arg(long, value_enum)]
    pub input_format: Option<LandmarkFormat>,
    #[arg(long, default_value_t = 0.2)]
    pub threshold: f64,
    /// Print mean, min and open fraction instead of per-eye readings
    #[arg(long)]
    pub summary: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Processing time: fixed:MS, uniform:LO:HI or normal:MEAN:STD
    #[arg(long = "proc", default_value = "fixed:83.33")]
    pub processing: ProcessingTime,
    #[arg(long, default_value_t = 30.0)]
    pub fps: f64,
    /// Simulated seconds
    #[arg(long, default_value_t = 60.0)]
    pub duration: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Uniform capture jitter half-width in ms
    #[arg(long, default_value_t = 0.0)]
    pub jitter: f64,
    /// Emit the event trace as CSV (t_ms,event,frame_id)
    #[arg(long)]
    pub trace: bool,
    /// Maximum trace events
    #[arg(long, requires = "trace")]
    pub trace_limit: Option<usize>,
    /// Sweep fixed processing times in ms (CSV: time_ms,effective_fps,mean_skips)
    #[arg(long, value_delimiter = ',', conflicts_with = "trace")]
    pub sweep: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlanOutput {
    GroundTruth,
    Plan,
}

#[derive(Debug, Args)]
pub struct CalibPlanArgs {
    /// Number of training points: 2, 4, 8, 16 or 32
    #[arg(long, default_value_t = 4)]
    pub size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON file with CalibrationSpec fields
    #[arg(long, value_name = "PATH")]
    pub calib_config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = PlanOutput::GroundTruth)]
    pub output: PlanOutput,
}

#[derive(Debug, Args)]
pub struct ValidateCalibArgs {
    /// JSON file with CalibrationSpec fields
    #[arg(long, value_name = "PATH")]
    pub calib_config: Option<PathBuf>,
    /// Override the validation cells [default: 8,11,26,29]
    #[arg(long, value_delimiter = ',')]
    pub validation_cells: Option<Vec<u32>>,
}
