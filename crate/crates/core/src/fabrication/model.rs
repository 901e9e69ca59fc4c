//! Closed-form relations between DH parameters and the fold geometry on a
//! cylindrical body of radius `r`.

use std::f64::consts::PI;

use super::FabricationError;

/// Sign function with `sgn(0) = 0` (unlike `f64::signum`).
pub fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Axial distance between the two body points joined to create a bend of
/// `theta` radians, when the fastener leaves a residual gap `d_g`:
///
/// `s̃ = 2·d_g / √(2 + 2·cos θ) + 2·r·θ`
///
/// With `d_g = 0` this is exactly `2·r·θ`.
pub fn axial_fold_distance(theta: f64, r: f64, d_g: f64) -> Result<f64, FabricationError> {
    if !(r.is_finite() && r > 0.0) {
        return Err(FabricationError::InvalidInput(format!(
            "radius must be > 0, got {r}"
        )));
    }
    if !(d_g.is_finite() && d_g >= 0.0) {
        return Err(FabricationError::InvalidInput(format!(
            "gap must be >= 0, got {d_g}"
        )));
    }
    if !theta.is_finite() || theta.abs() > PI {
        return Err(FabricationError::InvalidInput(format!(
            "joint angle {theta} outside (-pi, pi)"
        )));
    }
    if theta.abs() == PI {
        return Err(FabricationError::Singularity { theta });
    }
    let gap_term = if d_g == 0.0 {
        0.0
    } else {
        2.0 * d_g / (2.0 + 2.0 * theta.cos()).sqrt()
    };
    Ok(gap_term + 2.0 * r * theta)
}

/// Length of the straight cylinder between two folds:
/// `l = a − (s̃ᵢ + s̃ᵢ₊₁) / 4`.
///
/// Fails when the result is not strictly positive; the error carries the
/// link length at which the cylinder would vanish.
pub fn cylinder_length(a: f64, s_tilde: f64, s_tilde_next: f64) -> Result<f64, FabricationError> {
    if a < 0.0 || s_tilde < 0.0 || s_tilde_next < 0.0 {
        return Err(FabricationError::InvalidInput(format!(
            "cylinder inputs must be >= 0 (a={a}, s_i={s_tilde}, s_next={s_tilde_next})"
        )));
    }
    let min_a = (s_tilde + s_tilde_next) / 4.0;
    let l = a - min_a;
    if l <= 0.0 {
        return Err(FabricationError::InfeasibleLength { a, min_a });
    }
    Ok(l)
}

/// Circumferential arc from joint `i` to joint `i + 1`:
/// `s = r · sgn(θᵢ·θᵢ₊₁) · (α − min(0, π·sgn(θᵢ₊₁)))`.
///
/// Collapses to zero whenever either joint angle is zero.
pub fn arc_offset(alpha: f64, theta: f64, theta_next: f64, r: f64) -> f64 {
    r * sgn(theta * theta_next) * (alpha - f64::min(0.0, PI * sgn(theta_next)))
}

/// Largest angle accepted by the root finder.
pub const MAX_INVERTIBLE_THETA: f64 = PI - 1e-6;
const BISECTION_TOL: f64 = 1e-12;

/// Solves `axial_fold_distance(θ, r, d_g) = s_tilde` for `θ ∈ [0, π)` by
/// bisection. The function is strictly increasing there, so the root is
/// unique when it exists.
pub fn invert_fold_distance(s_tilde: f64, r: f64, d_g: f64) -> Result<f64, FabricationError> {
    let f = |t: f64| axial_fold_distance(t, r, d_g);
    let lo_val = f(0.0)?;
    let hi_val = f(MAX_INVERTIBLE_THETA)?;
    if !s_tilde.is_finite() || s_tilde < lo_val || s_tilde > hi_val {
        return Err(FabricationError::Inversion {
            s_tilde,
            min: lo_val,
            max: hi_val,
        });
    }
    let (mut lo, mut hi) = (0.0_f64, MAX_INVERTIBLE_THETA);
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if f(mid)? < s_tilde {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
