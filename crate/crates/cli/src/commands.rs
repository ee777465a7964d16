use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use anyhow::{anyhow, Context};
use serde::Serialize;
use shelfgaze_core::placement::drop_range;
use shelfgaze_core::units::{cm_to_mm, mm_to_cm};
use shelfgaze_core::{
    batch_stats, cell_center, distance_table, emit_ground_truth, imbalance_sweep,
    optimize_camera_drop, plan, point_to_cell, ray_to_cell, simulate, sweep_processing_time,
    to_camera_coords, trace, validate_spec, CalibrationSpec, EarReading, EyeLandmarks, GazeRay,
    GridSpec, PersonSample, PlanePoint, PopulationSpec, RowStatus, ShelfConfig, SimConfig,
    Simulation, Violation,
};

use crate::args::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Domain,
}

impl ErrorKind {
    pub fn code(self) -> u8 {
        match self {
            ErrorKind::Input => 1,
            ErrorKind::Domain => 2,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub inner: anyhow::Error,
}

type CliResult<T = ()> = Result<T, CliError>;

fn input<E: Into<anyhow::Error>>(e: E) -> CliError {
    CliError {
        kind: ErrorKind::Input,
        inner: e.into(),
    }
}

fn domain<E: Into<anyhow::Error>>(e: E) -> CliError {
    CliError {
        kind: ErrorKind::Domain,
        inner: e.into(),
    }
}

fn io_err(e: io::Error) -> CliError {
    input(anyhow::Error::new(e).context("writing output"))
}

pub fn run(cli: Cli, out: &mut impl Write) -> CliResult {
    let shelf = shelf_config(&cli.shelf)?;
    match cli.command {
        Command::Optimize(a) => optimize(&shelf, a, out),
        Command::DistanceTable(a) => distances(&shelf, a, out),
        Command::Sweep(a) => sweep(&shelf, a, out),
        Command::Cell(a) => cell(&shelf, a, out),
        Command::Gaze(a) => gaze(&shelf, a, out),
        Command::Ear(a) => ear(a, out),
        Command::Simulate(a) => simulate_cmd(a, out),
        Command::CalibPlan(a) => calib_plan(&shelf, a, out),
        Command::ValidateCalib(a) => validate_calib(&shelf, a, out),
    }
}

fn read_json_file<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(input)?;
    serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(input)
}

fn shelf_config(a: &ShelfArgs) -> CliResult<ShelfConfig> {
    let mut cfg: ShelfConfig = match &a.config {
        Some(path) => read_json_file(path)?,
        None => ShelfConfig::default(),
    };
    let overrides = [
        (a.shelf_height, &mut cfg.shelf_height_cm),
        (a.panel_height, &mut cfg.panel_height_cm),
        (a.panel_width, &mut cfg.panel_width_cm),
        (a.camera_x, &mut cfg.camera_x_cm),
        (a.camera_drop, &mut cfg.camera_drop_cm),
        (a.eye_offset, &mut cfg.eye_crown_offset_cm),
    ];
    for (flag, field) in overrides {
        if let Some(v) = flag {
            *field = v;
        }
    }
    if let Some(r) = a.rows {
        cfg.grid_rows = r;
    }
    if let Some(c) = a.cols {
        cfg.grid_cols = c;
    }
    cfg.validate().map_err(input)?;
    Ok(cfg)
}

fn grid(cfg: &ShelfConfig) -> CliResult<GridSpec> {
    GridSpec::from_config(cfg).map_err(input)
}

fn write_json<T: Serialize>(out: &mut impl Write, value: &T) -> CliResult {
    serde_json::to_writer(&mut *out, value).map_err(input)?;
    writeln!(out).map_err(io_err)
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

fn optimize(cfg: &ShelfConfig, a: OptimizeArgs, out: &mut impl Write) -> CliResult {
    let pop = PopulationSpec {
        height_mean_cm: a.height_mean,
        height_std_cm: a.height_std,
        distance_min_cm: a.distance_min,
        distance_max_cm: a.distance_max,
        sample_count: a.samples,
        seed: a.seed,
    };
    pop.validate().map_err(input)?;
    let result = match a.threads {
        Some(n) => rayon_pool(n)?.install(|| optimize_camera_drop(cfg, &pop)),
        None => optimize_camera_drop(cfg, &pop),
    }
    .map_err(domain)?;
    write_json(out, &result)
}

fn rayon_pool(threads: usize) -> CliResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(input)
}

#[derive(Serialize)]
struct DistanceCsvRow {
    stature_mm: f64,
    distance_mm: Option<f64>,
    status: &'static str,
}

fn distances(cfg: &ShelfConfig, a: DistanceTableArgs, out: &mut impl Write) -> CliResult {
    if a.statures_mm.is_empty() {
        return Err(input(anyhow!("no statures given")));
    }
    let statures: Vec<f64> = a.statures_mm.iter().map(|&s| mm_to_cm(s)).collect();
    let rows = distance_table(cfg, &statures);
    let csv_rows: Vec<DistanceCsvRow> = rows
        .iter()
        .zip(&a.statures_mm)
        .map(|(r, &mm)| DistanceCsvRow {
            stature_mm: mm,
            distance_mm: r.distance_cm.map(cm_to_mm),
            status: r.status.as_str(),
        })
        .collect();
    match a.format {
        Format::Csv => {
            let mut w = csv_writer(&mut *out);
            for row in &csv_rows {
                w.serialize(row).map_err(input)?;
            }
            w.flush().map_err(io_err)?;
        }
        Format::Json => write_json(out, &csv_rows)?,
    }
    if rows.iter().all(|r| r.status != RowStatus::Ok) {
        return Err(domain(anyhow!("no stature has a valid standing distance")));
    }
    Ok(())
}

fn sweep(cfg: &ShelfConfig, a: SweepArgs, out: &mut impl Write) -> CliResult {
    let person = match (a.eye_height, a.stature) {
        (Some(eye), _) => PersonSample::from_eye_height(cfg, eye, a.distance),
        (None, Some(stature)) => PersonSample::from_stature(cfg, stature, a.distance),
        (None, None) => return Err(input(anyhow!("give --eye-height or --stature"))),
    }
    .map_err(input)?;
    let drops = match a.drops {
        Some(d) => d,
        None => drop_range(a.from, a.to.unwrap_or(cfg.panel_height_cm), a.step),
    };
    let rows = imbalance_sweep(cfg, &person, drops).map_err(domain)?;
    match a.format {
        Format::Csv => {
            let mut w = csv_writer(&mut *out);
            for row in &rows {
                w.serialize(row).map_err(input)?;
            }
            w.flush().map_err(io_err)
        }
        Format::Json => write_json(out, &rows),
    }
}

#[derive(Serialize)]
struct CellOutput {
    x_cm: f64,
    y_cm: f64,
    cell: u32,
}

fn cell(cfg: &ShelfConfig, a: CellArgs, out: &mut impl Write) -> CliResult {
    let g = grid(cfg)?;
    let (point, index) = match (a.index, a.x, a.y) {
        (Some(i), _, _) => (cell_center(&g, i).map_err(domain)?, i),
        (None, Some(x), Some(y)) => {
            let p = PlanePoint::new(x, y);
            (p, point_to_cell(&g, &p).map_err(domain)?)
        }
        _ => return Err(input(anyhow!("give --index or both --x and --y"))),
    };
    let shown = if a.camera_coords {
        to_camera_coords(&g, &point)
    } else {
        point
    };
    write_json(
        out,
        &CellOutput {
            x_cm: shown.x_cm,
            y_cm: shown.y_cm,
            cell: index,
        },
    )
}

fn gaze(cfg: &ShelfConfig, a: GazeArgs, out: &mut impl Write) -> CliResult {
    let g = grid(cfg)?;
    let eye: [f64; 3] = a
        .eye
        .as_slice()
        .try_into()
        .map_err(|_| input(anyhow!("--eye needs x,y,z")))?;
    let ray = match (a.dir, a.target) {
        (Some(d), _) => {
            let d: [f64; 3] = d
                .as_slice()
                .try_into()
                .map_err(|_| input(anyhow!("--dir needs dx,dy,dz")))?;
            GazeRay::normalized(eye, d)
        }
        (None, Some(t)) if t.len() == 2 => GazeRay::aimed_at(eye, &PlanePoint::new(t[0], t[1])),
        _ => return Err(input(anyhow!("give --dir dx,dy,dz or --target x,y"))),
    }
    .map_err(input)?;
    let (hit, index) = ray_to_cell(&g, &ray).map_err(domain)?;
    write_json(
        out,
        &CellOutput {
            x_cm: hit.x_cm,
            y_cm: hit.y_cm,
            cell: index,
        },
    )
}

#[derive(serde::Deserialize)]
#[serde(untagged)]
enum JsonEye {
    Flat(Vec<f64>),
    Pairs(Vec<[f64; 2]>),
}

fn parse_landmarks(text: &str, format: LandmarkFormat) -> CliResult<Vec<EyeLandmarks>> {
    match format {
        LandmarkFormat::Json => {
            let eyes: Vec<JsonEye> = serde_json::from_str(text).map_err(input)?;
            eyes.into_iter()
                .map(|e| {
                    let flat: Vec<f64> = match e {
                        JsonEye::Flat(v) => v,
                        JsonEye::Pairs(p) => p.into_iter().flatten().collect(),
                    };
                    EyeLandmarks::from_flat(&flat).map_err(input)
                })
                .collect()
        }
        LandmarkFormat::Csv => {
            let mut reader = csv::ReaderBuilder::new()
                .has_headers(false)
                .comment(Some(b'#'))
                .trim(csv::Trim::All)
                .from_reader(text.as_bytes());
            reader
                .records()
                .enumerate()
                .map(|(line, rec)| {
                    let rec = rec.map_err(input)?;
                    let coords = rec
                        .iter()
                        .map(|f| f.parse::<f64>())
                        .collect::<Result<Vec<_>, _>>()
                        .with_context(|| format!("row {}", line + 1))
                        .map_err(input)?;
                    EyeLandmarks::from_flat(&coords)
                        .with_context(|| format!("row {}", line + 1))
                        .map_err(input)
                })
                .collect()
        }
    }
}

fn ear(a: EarArgs, out: &mut impl Write) -> CliResult {
    if !(a.threshold > 0.0) {
        return Err(input(anyhow!("threshold must be positive")));
    }
    let text = if a.input.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(input)?;
        s
    } else {
        fs::read_to_string(&a.input)
            .with_context(|| format!("reading {}", a.input.display()))
            .map_err(input)?
    };
    let format = a.input_format.unwrap_or_else(|| {
        match a.input.extension().and_then(|e| e.to_str()) {
            Some("json") => LandmarkFormat::Json,
            _ => LandmarkFormat::Csv,
        }
    });
    let eyes = parse_landmarks(&text, format)?;
    let readings = eyes
        .iter()
        .map(|l| EarReading::from_landmarks(l, a.threshold))
        .collect::<Result<Vec<_>, _>>()
        .map_err(domain)?;
    if a.summary {
        let values: Vec<f64> = readings.iter().map(|r| r.value).collect();
        write_json(out, &batch_stats(&values, a.threshold).map_err(domain)?)
    } else {
        write_json(out, &readings)
    }
}

fn simulate_cmd(a: SimulateArgs, out: &mut impl Write) -> CliResult {
    let cfg = SimConfig {
        capture_fps: a.fps,
        processing: a.processing,
        duration_s: a.duration,
        seed: a.seed,
        capture_jitter_ms: a.jitter,
        ..SimConfig::default()
    };
    cfg.validate().map_err(input)?;
    if let Some(times) = a.sweep {
        let rows = sweep_processing_time(&cfg, &times).map_err(input)?;
        let mut w = csv_writer(&mut *out);
        for row in &rows {
            w.serialize(row).map_err(input)?;
        }
        return w.flush().map_err(io_err);
    }
    if a.trace {
        let events = match a.trace_limit {
            Some(limit) => trace(&cfg, limit).map_err(input)?,
            None => Simulation::new(cfg).map_err(input)?.collect(),
        };
        let mut w = csv_writer(&mut *out);
        if events.is_empty() {
            w.write_record(["t_ms", "event", "frame_id"]).map_err(input)?;
        }
        for e in &events {
            w.serialize(e).map_err(input)?;
        }
        return w.flush().map_err(io_err);
    }
    write_json(out, &simulate(&cfg).map_err(input)?)
}

fn calibration_spec(path: &Option<std::path::PathBuf>) -> CliResult<CalibrationSpec> {
    match path {
        Some(p) => read_json_file(p),
        None => Ok(CalibrationSpec::default()),
    }
}

fn calib_plan(cfg: &ShelfConfig, a: CalibPlanArgs, out: &mut impl Write) -> CliResult {
    let g = grid(cfg)?;
    let mut spec = calibration_spec(&a.calib_config)?;
    spec.seed = a.seed;
    let p = plan(&spec, a.size, &g).map_err(input)?;
    match a.output {
        PlanOutput::Plan => write_json(out, &p),
        PlanOutput::GroundTruth => {
            for record in emit_ground_truth(&p, &g) {
                write_json(out, &record)?;
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct ValidationReport {
    violations: Vec<Violation>,
    horizontal_symmetry: bool,
}

fn validate_calib(cfg: &ShelfConfig, a: ValidateCalibArgs, out: &mut impl Write) -> CliResult {
    let g = grid(cfg)?;
    let mut spec = calibration_spec(&a.calib_config)?;
    if let Some(cells) = a.validation_cells {
        spec.validation_cells = cells;
    }
    let violations = validate_spec(&spec, &g);
    let report = ValidationReport {
        horizontal_symmetry: !violations
            .iter()
            .any(|v| matches!(v, Violation::AsymmetricValidation { .. })),
        violations,
    };
    write_json(out, &report)?;
    if report.violations.is_empty() {
        Ok(())
    } else {
        Err(domain(anyhow!(
            "{} calibration violation(s)",
            report.violations.len()
        )))
    }
}
