//! Angle normalization helpers.

use std::f64::consts::{PI, TAU};

/// Wraps an angle to the half-open interval `(-pi, pi]`.
///
/// Values already in range are returned unchanged, which makes the function
/// exactly idempotent.
pub fn wrap_angle(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}
