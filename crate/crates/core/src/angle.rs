use std::f64::consts::{PI, TAU};

/// Wraps an angle to `[0, 2pi)`.
pub fn wrap_positive(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Wraps an angular difference to `(-pi, pi]`.
pub fn wrap_residual(d: f64) -> f64 {
    let w = (d + PI).rem_euclid(TAU) - PI;
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}
