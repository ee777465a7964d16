//! Unit conversions. Internal lengths are centimeters.

pub const MM_PER_CM: f64 = 10.0;

pub fn mm_to_cm(mm: f64) -> f64 {
    mm / MM_PER_CM
}

pub fn cm_to_mm(cm: f64) -> f64 {
    cm * MM_PER_CM
}
