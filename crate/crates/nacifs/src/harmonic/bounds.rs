//! Hitting-probability floors inside the localization disk.
//!
//! Two sanity experiments on the bounded domain `D_γ ∖ 𝕏`:
//!
//! * from every direction on the unit circle, a walker should reach the
//!   set with probability bounded away from zero (reported as the minimum
//!   over a fixed angular grid);
//! * starting ever closer to the set, the miss probability `1 − ω̂(x)`
//!   should vanish like a power of the distance (reported as the slope of
//!   a log-log regression along a geometric ladder of standoffs).
//!
//! Walkers here absorb on *two* boundaries: the leaf enclosures (success)
//! and the circle `|z| = γ` (escape), jumping each time on the largest
//! circle avoiding both.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::sync::Arc;

use super::approx::DiskApproximation;
use super::walk::WalkerConfig;
use crate::conformal::SystemSpec;
use crate::error::Error;
use crate::numeric::fit_line;
use crate::rng;
use crate::Result;

/// Number of probe points on the unit circle.
const UNIT_GRID: usize = 16;
/// Rungs of the standoff ladder.
const LADDER_RUNGS: usize = 6;
/// Widest standoff probed by the ladder.
const LADDER_MAX_DELTA: f64 = 0.3;
/// Narrowest standoff probed by the ladder.
const LADDER_MIN_DELTA: f64 = 1e-3;

/// Estimated hitting probability from one start point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub point: Complex64,
    /// Fraction of walkers absorbed on the set rather than on `|z| = γ`.
    pub omega_hat: f64,
    pub stderr: f64,
}

/// One rung of the standoff ladder.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LadderRung {
    /// Standoff added to the anchor leaf's radius.
    pub delta: f64,
    /// Measured distance from the start point to the approximation.
    pub distance: f64,
    pub omega_hat: f64,
    pub stderr: f64,
}

/// Results of the bounded-domain hitting experiments.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LowerBoundReport {
    /// Hitting estimates from the angular grid on `|z| = 1`.
    pub unit_circle: Vec<BoundaryPoint>,
    /// Empirical uniform floor over the grid.
    pub min_unit_omega: f64,
    /// Hitting estimate from a point on `|z| = γ` itself — exactly zero,
    /// since such a walker is absorbed by the outer boundary immediately.
    pub gamma_circle_omega: f64,
    pub ladder: Vec<LadderRung>,
    /// Slope of `log(1 − ω̂)` against `log distance` over the ladder:
    /// the empirical decay exponent of the miss probability.
    pub decay_exponent: Option<f64>,
    pub decay_intercept: Option<f64>,
    pub gamma: f64,
    pub approx_depth: usize,
    pub walkers_per_point: u64,
    pub seed: u64,
}

/// Runs one two-boundary walker. `Ok(true)` means absorbed on the set,
/// `Ok(false)` means escaped through `|z| = γ`.
fn run_bounded_walker(
    approx: &DiskApproximation,
    gamma: f64,
    cfg: &WalkerConfig,
    start: Complex64,
    label: &str,
    index: u64,
    scratch: &mut Vec<(f64, usize, usize)>,
) -> Result<bool> {
    let mut rng = rng::stream(cfg.seed, label, index);
    let mut z = start;
    for _ in 0..cfg.max_steps {
        let near = approx.nearest_with(z, scratch);
        if near.distance < cfg.eps_abs * near.radius {
            return Ok(true);
        }
        let outer = gamma - z.norm();
        if outer < cfg.eps_abs * gamma {
            return Ok(false);
        }
        let jump = near.distance.min(outer);
        z += Complex64::from_polar(jump, TAU * rng.gen::<f64>());
    }
    Err(Error::WalkerStalled {
        walker: index,
        steps: cfg.max_steps,
    })
}

/// Estimates the hitting probability from `start`, walkers indexed within
/// stream `label` starting at `base_index`.
fn hitting_probability(
    approx: &DiskApproximation,
    gamma: f64,
    cfg: &WalkerConfig,
    start: Complex64,
    label: &str,
    base_index: u64,
) -> Result<(f64, f64)> {
    let hits = (0..cfg.walkers)
        .into_par_iter()
        .try_fold(
            || (0u64, Vec::new()),
            |(mut hits, mut scratch), i| {
                if run_bounded_walker(approx, gamma, cfg, start, label, base_index + i, &mut scratch)? {
                    hits += 1;
                }
                Ok::<_, Error>((hits, scratch))
            },
        )
        .try_reduce(|| (0, Vec::new()), |(a, s), (b, _)| Ok((a + b, s)))?
        .0;
    let p = hits as f64 / cfg.walkers as f64;
    Ok((p, (p * (1.0 - p) / cfg.walkers as f64).sqrt()))
}

/// Runs both bounded-domain experiments on the system's first `approx_depth`
/// generations.
pub fn lower_bound_checks(
    system: &Arc<SystemSpec>,
    approx_depth: usize,
    cfg: &WalkerConfig,
) -> Result<LowerBoundReport> {
    cfg.validate(system.domain().eta)?;
    let gamma = system.domain().gamma;
    let approx = DiskApproximation::new(system, 0, approx_depth)?;

    // Angular grid on the unit circle (inside D_γ, outside the set).
    let mut unit_circle = Vec::with_capacity(UNIT_GRID);
    for j in 0..UNIT_GRID {
        let point = Complex64::from_polar(1.0, TAU * j as f64 / UNIT_GRID as f64);
        let (omega_hat, stderr) = hitting_probability(
            &approx,
            gamma,
            cfg,
            point,
            "bound-unit",
            j as u64 * cfg.walkers,
        )?;
        unit_circle.push(BoundaryPoint {
            point,
            omega_hat,
            stderr,
        });
    }
    let min_unit_omega = unit_circle
        .iter()
        .map(|p| p.omega_hat)
        .fold(f64::INFINITY, f64::min);

    // A start on the outer boundary itself is absorbed there immediately.
    let gamma_point = Complex64::from_polar(gamma, 0.3);
    let (gamma_circle_omega, _) =
        hitting_probability(&approx, gamma, cfg, gamma_point, "bound-gamma", 0)?;

    // Standoff ladder walking away from the first leaf, radially outward.
    let anchor = approx.leaf_disk(0);
    let direction = if anchor.center.norm() > 0.0 {
        anchor.center / anchor.center.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let headroom = gamma - (anchor.center.norm() + anchor.radius);
    if headroom <= 0.0 {
        return Err(Error::Config(format!(
            "anchor leaf touches the localization circle (headroom {headroom})"
        )));
    }
    let delta_hi = LADDER_MAX_DELTA.min(0.5 * headroom);
    let delta_lo = LADDER_MIN_DELTA.min(delta_hi / 100.0);
    let mut ladder = Vec::with_capacity(LADDER_RUNGS);
    for t in 0..LADDER_RUNGS {
        let frac = t as f64 / (LADDER_RUNGS - 1) as f64;
        let delta = delta_lo * (delta_hi / delta_lo).powf(frac);
        let start = anchor.center + direction * (anchor.radius + delta);
        let distance = approx.nearest(start).distance;
        let (omega_hat, stderr) = hitting_probability(
            &approx,
            gamma,
            cfg,
            start,
            "bound-ladder",
            t as u64 * cfg.walkers,
        )?;
        ladder.push(LadderRung {
            delta,
            distance,
            omega_hat,
            stderr,
        });
    }
    let points: Vec<(f64, f64)> = ladder
        .iter()
        .filter(|r| r.omega_hat > 0.0 && r.omega_hat < 1.0 && r.distance > 0.0)
        .map(|r| (r.distance.ln(), (1.0 - r.omega_hat).ln()))
        .collect();
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let (decay_exponent, decay_intercept) = match fit_line(&xs, &ys) {
        Some((slope, intercept, _)) => (Some(slope), Some(intercept)),
        None => (None, None),
    };

    Ok(LowerBoundReport {
        unit_circle,
        min_unit_omega,
        gamma_circle_omega,
        ladder,
        decay_exponent,
        decay_intercept,
        gamma,
        approx_depth,
        walkers_per_point: cfg.walkers,
        seed: cfg.seed,
    })
}
