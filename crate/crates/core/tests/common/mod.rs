//! Test-only oracles, kept independent of the library's closed forms.
#![allow(dead_code)]

use shelfgaze_core::{angular_imbalance, PersonSample, ShelfConfig};

/// Plain bisection for a sign change of `f` on `[lo, hi]`.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut f_lo = f(lo);
    assert!(f_lo * f(hi) <= 0.0, "no sign change on [{lo}, {hi}]");
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Camera drop that equalizes the two angles, found numerically.
pub fn bisector_drop_by_root(cfg: &ShelfConfig, p: &PersonSample) -> f64 {
    bisect(
        |drop| angular_imbalance(cfg, p, drop).unwrap(),
        0.0,
        cfg.panel_height_cm,
        1e-12,
    )
}

/// Standing distance that equalizes the angles for the configured camera,
/// found numerically over `[lo, hi]`.
pub fn distance_by_root(cfg: &ShelfConfig, eye_height_cm: f64, lo: f64, hi: f64) -> f64 {
    bisect(
        |d| {
            let p = PersonSample::from_eye_height(cfg, eye_height_cm, d).unwrap();
            angular_imbalance(cfg, &p, cfg.camera_drop_cm).unwrap()
        },
        lo,
        hi,
        1e-12,
    )
}

/// Angle at the eye between the rays to the shelf top and the panel bottom,
/// from the dot product of the two ray vectors.
pub fn panel_angle_by_dot(cfg: &ShelfConfig, p: &PersonSample) -> f64 {
    let top = (p.distance_cm, cfg.shelf_height_cm - p.eye_height_cm);
    let bottom = (p.distance_cm, cfg.panel_bottom_height_cm() - p.eye_height_cm);
    let dot = top.0 * bottom.0 + top.1 * bottom.1;
    let norms = top.0.hypot(top.1) * bottom.0.hypot(bottom.1);
    (dot / norms).clamp(-1.0, 1.0).acos()
}

/// Reference standing distances for a camera 55.5 cm below the shelf top:
/// (stature mm, distance mm).
pub const REFERENCE_DISTANCES: [(f64, f64); 7] = [
    (1500.0, 851.453),
    (1550.0, 928.174),
    (1600.0, 996.515),
    (1650.0, 1058.101),
    (1700.0, 1114.053),
    (1750.0, 1165.182),
    (1800.0, 1212.100),
];
