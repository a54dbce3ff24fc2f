//! Closed-form jump kernels used by the walkers.
//!
//! A walker that drifts far outside the launch circle would take an
//! unbounded number of sphere jumps to wander back (the planar walk is
//! recurrent but only barely), so the far-field excursion is collapsed
//! into a single draw: the first-hitting distribution of the circle
//! `|w| = r` seen from an exterior point `z` is the exterior Poisson
//! kernel, whose angular inverse CDF has a closed form.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Angle offset relative to `arg z` at which the walk from `z` first hits
/// the circle, for radius ratio `rho = r / |z| ∈ [0, 1)`, driven by the
/// uniform variate `u ∈ [0, 1)`.
///
/// The hitting density `p(φ) ∝ (1 − ρ²) / (1 − 2ρ cos φ + ρ²)` peaks at
/// `φ = 0` (the near side of the circle) and flattens to uniform as
/// `ρ → 0`; inverting its CDF gives
/// `φ = 2·atan( (1−ρ)/(1+ρ) · tan(π(u − ½)) )`.
pub fn hitting_angle(rho: f64, u: f64) -> f64 {
    debug_assert!((0.0..1.0).contains(&rho), "radius ratio out of range: {rho}");
    2.0 * ((1.0 - rho) / (1.0 + rho) * (PI * (u - 0.5)).tan()).atan()
}

/// Point on the circle `|w| = r` where the walk from `z` (with `|z| > r`)
/// first returns, driven by the uniform variate `u`.
pub fn reentry_point(z: Complex64, r: f64, u: f64) -> Complex64 {
    let rho = r / z.norm();
    Complex64::from_polar(r, z.arg() + hitting_angle(rho, u))
}
