//! Discrete-event model of the camera / gaze-worker pipeline.
//!
//! A camera produces frames at a fixed rate into a single overwrite slot.
//! One worker, whenever idle, takes the newest frame, discards anything older
//! that it never got to, and processes it for a sampled duration.
//!
//! Event order at equal timestamps: a capture is applied before a
//! completion, so a worker finishing exactly on a capture tick takes that
//! fresh frame. Frames skipped by a take are logged as `drop` events at the
//! take's timestamp. Frames still waiting in the slot when the clock runs
//! out are dropped at the end time; work still in flight is not counted as
//! processed.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

const PROCESSING_STREAM: u64 = 0;
const JITTER_STREAM: u64 = 1;
const MAX_NORMAL_REDRAWS: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("cannot parse processing time {0:?}; expected fixed:MS, uniform:LO:HI or normal:MEAN:STD")]
    BadProcessingSpec(String),
    #[error("processing time list is empty")]
    EmptySweep,
}

/// Distribution of per-frame processing time, in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProcessingTime {
    Fixed { ms: f64 },
    Uniform { lo_ms: f64, hi_ms: f64 },
    /// Truncated to positive values by redrawing.
    Normal { mean_ms: f64, std_ms: f64 },
}

impl ProcessingTime {
    fn validate(&self) -> Result<(), SimError> {
        let ok = match *self {
            ProcessingTime::Fixed { ms } => ms.is_finite() && ms > 0.0,
            ProcessingTime::Uniform { lo_ms, hi_ms } => {
                lo_ms.is_finite() && hi_ms.is_finite() && lo_ms > 0.0 && lo_ms <= hi_ms
            }
            ProcessingTime::Normal { mean_ms, std_ms } => {
                mean_ms.is_finite() && std_ms.is_finite() && mean_ms > 0.0 && std_ms >= 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(SimError::InvalidConfig(format!(
                "processing time {self} must be positive"
            )))
        }
    }

    /// Smallest value the distribution can produce (0 for the normal).
    pub fn min_ms(&self) -> f64 {
        match *self {
            ProcessingTime::Fixed { ms } => ms,
            ProcessingTime::Uniform { lo_ms, .. } => lo_ms,
            ProcessingTime::Normal { .. } => 0.0,
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            ProcessingTime::Fixed { ms } => ms,
            ProcessingTime::Uniform { lo_ms, hi_ms } => {
                if lo_ms == hi_ms {
                    lo_ms
                } else {
                    rng.random_range(lo_ms..hi_ms)
                }
            }
            ProcessingTime::Normal { mean_ms, std_ms } => {
                let normal = Normal::new(mean_ms, std_ms).expect("validated parameters");
                (0..MAX_NORMAL_REDRAWS)
                    .map(|_| normal.sample(rng))
                    .find(|&v| v > 0.0)
                    .unwrap_or(mean_ms)
            }
        }
    }
}

impl fmt::Display for ProcessingTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProcessingTime::Fixed { ms } => write!(f, "fixed:{ms}"),
            ProcessingTime::Uniform { lo_ms, hi_ms } => write!(f, "uniform:{lo_ms}:{hi_ms}"),
            ProcessingTime::Normal { mean_ms, std_ms } => write!(f, "normal:{mean_ms}:{std_ms}"),
        }
    }
}

impl FromStr for ProcessingTime {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SimError::BadProcessingSpec(s.to_string());
        let mut parts = s.split(':');
        let kind = parts.next().ok_or_else(bad)?;
        let nums: Vec<f64> = parts
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_, _>>()?;
        match (kind.trim(), nums.as_slice()) {
            ("fixed", [ms]) => Ok(ProcessingTime::Fixed { ms: *ms }),
            ("uniform", [lo, hi]) => Ok(ProcessingTime::Uniform {
                lo_ms: *lo,
                hi_ms: *hi,
            }),
            ("normal", [mean, std]) => Ok(ProcessingTime::Normal {
                mean_ms: *mean,
                std_ms: *std,
            }),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QueuePolicy {
    /// Single slot; a new capture overwrites whatever is waiting.
    #[default]
    LatestOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub capture_fps: f64,
    pub processing: ProcessingTime,
    pub duration_s: f64,
    pub seed: u64,
    pub queue_policy: QueuePolicy,
    /// Half-width of uniform capture-time jitter. Zero disables it.
    pub capture_jitter_ms: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            capture_fps: 30.0,
            processing: ProcessingTime::Fixed { ms: 83.33 },
            duration_s: 60.0,
            seed: 0,
            queue_policy: QueuePolicy::LatestOnly,
            capture_jitter_ms: 0.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.capture_fps.is_finite() && self.capture_fps > 0.0) {
            return Err(SimError::InvalidConfig("capture fps must be positive".into()));
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(SimError::InvalidConfig("duration must be positive".into()));
        }
        self.processing.validate()?;
        let interval = self.capture_interval_ms();
        if !(self.capture_jitter_ms >= 0.0 && self.capture_jitter_ms < interval / 2.0) {
            return Err(SimError::InvalidConfig(format!(
                "capture jitter must be in [0, {}) ms",
                interval / 2.0
            )));
        }
        Ok(())
    }

    pub fn capture_interval_ms(&self) -> f64 {
        1000.0 / self.capture_fps
    }

    fn capture_time_ms(&self, frame: u64) -> f64 {
        frame as f64 * 1000.0 / self.capture_fps
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Capture,
    Take,
    Drop,
    Complete,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::Capture => "capture",
            EventKind::Take => "take",
            EventKind::Drop => "drop",
            EventKind::Complete => "complete",
        }
    }
}

/// One trace line. Field names match the CSV header `t_ms,event,frame_id`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t_ms: f64,
    pub event: EventKind,
    pub frame_id: u64,
}

#[derive(Debug, Clone, Copy)]
struct InFlight {
    frame: u64,
    done_ms: f64,
}

/// The event-driven engine, yielding events in chronological order.
pub struct Simulation {
    cfg: SimConfig,
    duration_ms: f64,
    processing_rng: ChaCha8Rng,
    jitter_rng: ChaCha8Rng,
    next_frame: u64,
    next_capture_ms: f64,
    slot: Option<u64>,
    busy: Option<InFlight>,
    last_taken: Option<u64>,
    last_captured: Option<u64>,
    pending: VecDeque<Event>,
    finished: bool,
}

impl Simulation {
    pub fn new(cfg: SimConfig) -> Result<Self, SimError> {
        cfg.validate()?;
        let mut processing_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        processing_rng.set_stream(PROCESSING_STREAM);
        let mut jitter_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        jitter_rng.set_stream(JITTER_STREAM);
        let mut sim = Self {
            cfg,
            duration_ms: cfg.duration_s * 1000.0,
            processing_rng,
            jitter_rng,
            next_frame: 0,
            next_capture_ms: 0.0,
            slot: None,
            busy: None,
            last_taken: None,
            last_captured: None,
            pending: VecDeque::new(),
            finished: false,
        };
        sim.next_capture_ms = sim.capture_time(0);
        Ok(sim)
    }

    fn capture_time(&mut self, frame: u64) -> f64 {
        let base = self.cfg.capture_time_ms(frame);
        let j = self.cfg.capture_jitter_ms;
        if j > 0.0 {
            (base + self.jitter_rng.random_range(-j..=j)).max(0.0)
        } else {
            base
        }
    }

    fn emit(&mut self, t_ms: f64, event: EventKind, frame_id: u64) {
        self.pending.push_back(Event {
            t_ms,
            event,
            frame_id,
        });
    }

    /// Frames captured after the last take and older than `upto`.
    fn drop_skipped(&mut self, t_ms: f64, upto: u64) {
        let first = self.last_taken.map_or(0, |f| f + 1);
        for frame in first..upto {
            self.emit(t_ms, EventKind::Drop, frame);
        }
    }

    fn take(&mut self, t_ms: f64) {
        let Some(frame) = self.slot.take() else {
            return;
        };
        self.drop_skipped(t_ms, frame);
        self.emit(t_ms, EventKind::Take, frame);
        self.last_taken = Some(frame);
        let work = self.cfg.processing.sample(&mut self.processing_rng);
        self.busy = Some(InFlight {
            frame,
            done_ms: t_ms + work,
        });
    }

    /// Advances to the next instant and queues its events.
    fn step(&mut self) {
        let capture = (self.next_capture_ms < self.duration_ms).then_some(self.next_capture_ms);
        let complete = self.busy.filter(|b| b.done_ms <= self.duration_ms);
        match (capture, complete) {
            (Some(t), c) if c.map_or(true, |c| t <= c.done_ms) => {
                let frame = self.next_frame;
                self.emit(t, EventKind::Capture, frame);
                self.slot = Some(frame);
                self.last_captured = Some(frame);
                self.next_frame += 1;
                self.next_capture_ms = self.capture_time(self.next_frame);
                if self.busy.is_none() {
                    self.take(t);
                }
            }
            (_, Some(done)) => {
                self.emit(done.done_ms, EventKind::Complete, done.frame);
                self.busy = None;
                self.take(done.done_ms);
            }
            _ => {
                if let Some(last) = self.last_captured {
                    if self.slot.is_some() {
                        self.drop_skipped(self.duration_ms, last + 1);
                    }
                }
                self.finished = true;
            }
        }
    }
}

impl Iterator for Simulation {
    type Item = Event;

    fn next(&mut self) -> Option<Event> {
        while self.pending.is_empty() && !self.finished {
            self.step();
        }
        self.pending.pop_front()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencyStats {
    pub mean: f64,
    pub p95: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimMetrics {
    pub captured_count: u64,
    pub processed_count: u64,
    pub dropped_count: u64,
    pub in_flight_count: u64,
    pub duration_s: f64,
    pub effective_fps: f64,
    pub mean_skips: f64,
    /// Frames discarded between consecutive processed frames -> occurrences.
    pub skips_per_processed: BTreeMap<u64, u64>,
    pub latency_ms: LatencyStats,
}

impl SimMetrics {
    /// Rebuilds metrics from a complete event log.
    pub fn from_events<'a>(events: impl IntoIterator<Item = &'a Event>, duration_s: f64) -> Self {
        let mut acc = Accumulator::default();
        for e in events {
            acc.observe(e);
        }
        acc.finish(duration_s)
    }
}

#[derive(Default)]
struct Accumulator {
    capture_ms: BTreeMap<u64, f64>,
    captured: u64,
    taken: u64,
    dropped: u64,
    latencies: Vec<f64>,
    last_processed: Option<u64>,
    skips: BTreeMap<u64, u64>,
}

impl Accumulator {
    fn observe(&mut self, e: &Event) {
        match e.event {
            EventKind::Capture => {
                self.captured += 1;
                self.capture_ms.insert(e.frame_id, e.t_ms);
            }
            EventKind::Take => self.taken += 1,
            EventKind::Drop => {
                self.dropped += 1;
                self.capture_ms.remove(&e.frame_id);
            }
            EventKind::Complete => {
                if let Some(captured_at) = self.capture_ms.remove(&e.frame_id) {
                    self.latencies.push(e.t_ms - captured_at);
                }
                if let Some(prev) = self.last_processed {
                    *self.skips.entry(e.frame_id - prev - 1).or_default() += 1;
                }
                self.last_processed = Some(e.frame_id);
            }
        }
    }

    fn finish(self, duration_s: f64) -> SimMetrics {
        let processed = self.latencies.len() as u64;
        let intervals: u64 = self.skips.values().sum();
        let skipped: u64 = self.skips.iter().map(|(k, n)| k * n).sum();
        let mut sorted = self.latencies.clone();
        sorted.sort_by(f64::total_cmp);
        let latency_ms = if sorted.is_empty() {
            LatencyStats {
                mean: 0.0,
                p95: 0.0,
                max: 0.0,
            }
        } else {
            let rank = ((0.95 * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
            LatencyStats {
                mean: self.latencies.iter().sum::<f64>() / sorted.len() as f64,
                p95: sorted[rank - 1],
                max: sorted[sorted.len() - 1],
            }
        };
        SimMetrics {
            captured_count: self.captured,
            processed_count: processed,
            dropped_count: self.dropped,
            in_flight_count: self.taken - processed,
            duration_s,
            effective_fps: processed as f64 / duration_s,
            mean_skips: if intervals == 0 {
                0.0
            } else {
                skipped as f64 / intervals as f64
            },
            skips_per_processed: self.skips,
            latency_ms,
        }
    }
}

pub fn simulate(cfg: &SimConfig) -> Result<SimMetrics, SimError> {
    let mut acc = Accumulator::default();
    for e in Simulation::new(*cfg)? {
        acc.observe(&e);
    }
    Ok(acc.finish(cfg.duration_s))
}

/// The first `limit` events of the run.
pub fn trace(cfg: &SimConfig, limit: usize) -> Result<Vec<Event>, SimError> {
    Ok(Simulation::new(*cfg)?.take(limit).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub time_ms: f64,
    pub effective_fps: f64,
    pub mean_skips: f64,
}

/// Runs the template once per fixed processing time, every row on the
/// template's seed.
pub fn sweep_processing_time(
    template: &SimConfig,
    times_ms: &[f64],
) -> Result<Vec<SweepRow>, SimError> {
    if times_ms.is_empty() {
        return Err(SimError::EmptySweep);
    }
    times_ms
        .iter()
        .map(|&time_ms| {
            let cfg = SimConfig {
                processing: ProcessingTime::Fixed { ms: time_ms },
                ..*template
            };
            let m = simulate(&cfg)?;
            Ok(SweepRow {
                time_ms,
                effective_fps: m.effective_fps,
                mean_skips: m.mean_skips,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixed(ms: f64, duration_s: f64) -> SimConfig {
        SimConfig {
            processing: ProcessingTime::Fixed { ms },
            duration_s,
            ..SimConfig::default()
        }
    }

    #[test]
    fn parse_processing_specs() {
        assert_eq!(
            "fixed:83.33".parse::<ProcessingTime>().unwrap(),
            ProcessingTime::Fixed { ms: 83.33 }
        );
        assert_eq!(
            "uniform:66.7:100".parse::<ProcessingTime>().unwrap(),
            ProcessingTime::Uniform {
                lo_ms: 66.7,
                hi_ms: 100.0
            }
        );
        assert!("normal:80:5".parse::<ProcessingTime>().is_ok());
        assert!("fixed".parse::<ProcessingTime>().is_err());
        assert!("gamma:1:2".parse::<ProcessingTime>().is_err());
        let p: ProcessingTime = "uniform:1:2".parse().unwrap();
        assert_eq!(p.to_string().parse::<ProcessingTime>().unwrap(), p);
    }

    #[test]
    fn fast_consumer_keeps_up() {
        let m = simulate(&fixed(20.0, 10.0)).unwrap();
        assert!((299..=300).contains(&m.processed_count));
        assert_eq!(m.dropped_count, 0);
        assert!((m.effective_fps - 30.0).abs() <= 0.1);
        assert_eq!(m.mean_skips, 0.0);
    }

    #[test]
    fn hand_traced_prefix() {
        let events = trace(&fixed(83.33, 60.0), 10).unwrap();
        let kinds: Vec<(EventKind, u64)> = events.iter().map(|e| (e.event, e.frame_id)).collect();
        use EventKind::*;
        assert_eq!(
            kinds,
            vec![
                (Capture, 0),
                (Take, 0),
                (Capture, 1),
                (Capture, 2),
                (Complete, 0),
                (Drop, 1),
                (Take, 2),
                (Capture, 3),
                (Capture, 4),
                (Complete, 2),
            ]
        );
        assert_eq!(events[4].t_ms, 83.33);
        assert_eq!(events[5].t_ms, 83.33);
        assert!((events[3].t_ms - 200.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_limit_and_short_run() {
        assert!(trace(&fixed(83.33, 60.0), 0).unwrap().is_empty());
        let events = trace(&fixed(83.33, 0.01), 100).unwrap();
        let captures = events.iter().filter(|e| e.event == EventKind::Capture).count();
        assert!(captures <= 1);
    }

    #[test]
    fn tie_goes_to_capture() {
        // Completion lands exactly on the 100 ms tick (frame 3).
        let cfg = SimConfig {
            capture_fps: 10.0,
            ..fixed(100.0, 1.0)
        };
        let events = trace(&cfg, 6).unwrap();
        use EventKind::*;
        let kinds: Vec<_> = events.iter().map(|e| (e.event, e.frame_id)).collect();
        assert_eq!(
            kinds,
            vec![(Capture, 0), (Take, 0), (Capture, 1), (Complete, 0), (Take, 1), (Capture, 2)]
        );
    }

    #[test]
    fn leftover_frame_is_dropped_at_end() {
        // Frames 1 and 2 are still waiting when the clock stops at 80 ms.
        let cfg = fixed(83.33, 0.08);
        let events: Vec<_> = Simulation::new(cfg).unwrap().collect();
        let m = SimMetrics::from_events(&events, cfg.duration_s);
        assert_eq!(
            m.captured_count,
            m.processed_count + m.dropped_count + m.in_flight_count
        );
        assert_eq!((m.processed_count, m.dropped_count, m.in_flight_count), (0, 2, 1));
        let last = events.last().unwrap();
        assert_eq!((last.event, last.frame_id), (EventKind::Drop, 2));
        assert_eq!(last.t_ms, 80.0);
    }

    #[test]
    fn invalid_configs() {
        assert!(simulate(&SimConfig {
            capture_fps: 0.0,
            ..SimConfig::default()
        })
        .is_err());
        assert!(simulate(&fixed(-1.0, 1.0)).is_err());
        assert!(simulate(&fixed(10.0, 0.0)).is_err());
        assert!(simulate(&SimConfig {
            capture_jitter_ms: 20.0,
            ..SimConfig::default()
        })
        .is_err());
        assert_eq!(
            sweep_processing_time(&SimConfig::default(), &[]),
            Err(SimError::EmptySweep)
        );
    }

    #[test]
    fn normal_processing_is_positive() {
        let cfg = SimConfig {
            processing: ProcessingTime::Normal {
                mean_ms: 5.0,
                std_ms: 10.0,
            },
            duration_s: 5.0,
            ..SimConfig::default()
        };
        let events: Vec<_> = Simulation::new(cfg).unwrap().collect();
        for w in events.windows(2) {
            assert!(w[0].t_ms <= w[1].t_ms);
        }
    }

    #[test]
    fn jitter_keeps_order() {
        let cfg = SimConfig {
            capture_jitter_ms: 5.0,
            seed: 3,
            ..fixed(50.0, 5.0)
        };
        let events: Vec<_> = Simulation::new(cfg).unwrap().collect();
        for w in events.windows(2) {
            assert!(w[0].t_ms <= w[1].t_ms);
        }
        let m = simulate(&cfg).unwrap();
        assert_eq!(SimMetrics::from_events(&events, cfg.duration_s), m);
    }
}
