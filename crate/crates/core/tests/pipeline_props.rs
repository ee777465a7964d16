use std::collections::BTreeMap;

use proptest::prelude::*;
use shelfgaze_core::{
    simulate, sweep_processing_time, trace, EventKind, ProcessingTime, SimConfig, SimMetrics,
    Simulation,
};

fn fixed(ms: f64, duration_s: f64) -> SimConfig {
    SimConfig {
        processing: ProcessingTime::Fixed { ms },
        duration_s,
        ..SimConfig::default()
    }
}

/// Direct recurrence for a worker that is never idle (processing time at
/// least one capture interval): take times advance by the processing time
/// and each take grabs the newest frame captured at or before it.
fn busy_worker_model(cfg: &SimConfig, work_ms: f64) -> (u64, BTreeMap<u64, u64>) {
    let duration_ms = cfg.duration_s * 1000.0;
    let capture = |k: u64| k as f64 * 1000.0 / cfg.capture_fps;
    let mut t = 0.0;
    let mut newest = 0u64;
    let mut processed = 0;
    let mut prev: Option<u64> = None;
    let mut skips = BTreeMap::new();
    loop {
        while capture(newest + 1) <= t && capture(newest + 1) < duration_ms {
            newest += 1;
        }
        let done = t + work_ms;
        if done > duration_ms {
            break;
        }
        processed += 1;
        if let Some(p) = prev {
            *skips.entry(newest - p - 1).or_default() += 1;
        }
        prev = Some(newest);
        t = done;
    }
    (processed, skips)
}

#[test]
fn matches_busy_worker_recurrence() {
    for (work, fps, dur) in [(83.33, 30.0, 60.0), (50.0, 30.0, 20.0), (200.0, 30.0, 30.0), (41.0, 25.0, 10.0)] {
        let cfg = SimConfig {
            capture_fps: fps,
            ..fixed(work, dur)
        };
        let m = simulate(&cfg).unwrap();
        let (processed, skips) = busy_worker_model(&cfg, work);
        assert_eq!(m.processed_count, processed, "work {work}");
        assert_eq!(m.skips_per_processed, skips, "work {work}");
    }
}

#[test]
fn twelve_fps_operating_point() {
    let m = simulate(&fixed(83.33, 60.0)).unwrap();
    assert!((m.effective_fps - 12.0).abs() <= 0.1);
    assert!((m.mean_skips - 1.5).abs() <= 0.1);
    assert_eq!(m.skips_per_processed.keys().copied().collect::<Vec<_>>(), vec![1, 2]);
}

#[test]
fn sweep_rows() {
    let template = SimConfig {
        duration_s: 60.0,
        ..SimConfig::default()
    };
    let rows = sweep_processing_time(&template, &[20.0, 83.33, 200.0]).unwrap();
    for (row, want) in rows.iter().zip([30.0, 12.0, 5.0]) {
        assert!((row.effective_fps - want).abs() <= 0.2, "{row:?}");
    }
    let single = sweep_processing_time(&template, &[83.33]).unwrap();
    let direct = simulate(&fixed(83.33, 60.0)).unwrap();
    assert_eq!(single[0].effective_fps, direct.effective_fps);
    assert_eq!(single[0].mean_skips, direct.mean_skips);
}

#[test]
fn sweep_fps_non_increasing_in_time() {
    let times: Vec<f64> = (1..=40).map(|i| i as f64 * 7.5).collect();
    let rows = sweep_processing_time(&fixed(10.0, 30.0), &times).unwrap();
    for w in rows.windows(2) {
        assert!(w[1].effective_fps <= w[0].effective_fps, "{w:?}");
    }
}

fn processing() -> impl Strategy<Value = ProcessingTime> {
    prop_oneof![
        (1.0f64..300.0).prop_map(|ms| ProcessingTime::Fixed { ms }),
        (1.0f64..150.0, 0.0f64..150.0).prop_map(|(lo, w)| ProcessingTime::Uniform {
            lo_ms: lo,
            hi_ms: lo + w
        }),
        (5.0f64..150.0, 0.0f64..60.0).prop_map(|(m, s)| ProcessingTime::Normal {
            mean_ms: m,
            std_ms: s
        }),
    ]
}

fn config() -> impl Strategy<Value = SimConfig> {
    (processing(), 5.0f64..60.0, 0.05f64..8.0, any::<u64>(), 0.0f64..0.45).prop_map(
        |(processing, fps, duration_s, seed, jitter_frac)| SimConfig {
            capture_fps: fps,
            processing,
            duration_s,
            seed,
            capture_jitter_ms: jitter_frac * 500.0 / fps,
            ..SimConfig::default()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn frames_are_conserved(cfg in config()) {
        let m = simulate(&cfg).unwrap();
        prop_assert!(m.in_flight_count <= 1);
        prop_assert_eq!(m.captured_count, m.processed_count + m.dropped_count + m.in_flight_count);
        prop_assert!(m.effective_fps <= cfg.capture_fps + 1.0 / cfg.duration_s);
        let min = cfg.processing.min_ms();
        if min > 0.0 {
            prop_assert!(m.effective_fps <= (1000.0 / min).min(cfg.capture_fps) + 1.0 / cfg.duration_s);
        }
    }

    #[test]
    fn frames_are_taken_fresh_and_in_order(cfg in config()) {
        let events: Vec<_> = Simulation::new(cfg).unwrap().collect();
        let taken: Vec<u64> = events.iter().filter(|e| e.event == EventKind::Take).map(|e| e.frame_id).collect();
        prop_assert!(taken.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(events.windows(2).all(|w| w[0].t_ms <= w[1].t_ms));
        // Each take picks the newest frame captured so far.
        let mut newest = None;
        for e in &events {
            match e.event {
                EventKind::Capture => newest = Some(e.frame_id),
                EventKind::Take => prop_assert_eq!(Some(e.frame_id), newest),
                _ => {}
            }
        }
    }

    #[test]
    fn trace_replays_to_metrics(cfg in config()) {
        let events: Vec<_> = Simulation::new(cfg).unwrap().collect();
        prop_assert_eq!(SimMetrics::from_events(&events, cfg.duration_s), simulate(&cfg).unwrap());
        let prefix = trace(&cfg, 17).unwrap();
        prop_assert_eq!(&prefix[..], &events[..events.len().min(17)]);
    }

    #[test]
    fn deterministic_for_seed(cfg in config()) {
        let a: Vec<_> = Simulation::new(cfg).unwrap().collect();
        let b: Vec<_> = Simulation::new(cfg).unwrap().collect();
        prop_assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }
}
