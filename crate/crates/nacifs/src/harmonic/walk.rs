//! Walk-on-spheres estimation of the exit distribution.
//!
//! Each walker starts on the launch circle, repeatedly jumps to a uniform
//! point on the largest disk that avoids the leaf enclosures, collapses
//! far-field excursions through the exterior re-entry kernel, and is
//! absorbed once it stands within a relative tolerance of the nearest
//! leaf. The absorbing leaf's ancestor at the assignment depth gets the
//! count.
//!
//! Launching uniformly on a circle enclosing the whole target set is
//! exact, not an approximation of remote starts: by rotational symmetry
//! of the walk and the inversion `w ↦ 1/w`, the exit distribution seen
//! from infinity equals the average of exit distributions over any
//! origin-centered circle outside the set.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::sync::Arc;

use super::approx::DiskApproximation;
use super::estimate::MeasureEstimate;
use super::kernel::reentry_point;
use crate::conformal::SystemSpec;
use crate::error::Error;
use crate::Result;
use crate::rng;

/// Tuning for a batch of walkers.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct WalkerConfig {
    /// Radius of the launch circle; must lie outside the enclosure of the
    /// whole construction (strictly more than `1 + eta`).
    pub r_launch: f64,
    /// Far-field trigger: past this radius an excursion is collapsed into
    /// a single re-entry draw onto the launch circle.
    pub r_out: f64,
    /// Absorption tolerance, relative to the nearest leaf's radius.
    pub eps_abs: f64,
    /// Hard cap on jumps per walker; exceeding it aborts the whole run.
    pub max_steps: u64,
    /// Number of walkers.
    pub walkers: u64,
    /// Base seed; each walker draws from its own counter-derived stream.
    pub seed: u64,
}

impl Default for WalkerConfig {
    fn default() -> Self {
        Self {
            r_launch: 8.0,
            r_out: 16.0,
            eps_abs: 1e-3,
            max_steps: 100_000,
            walkers: 10_000,
            seed: 0,
        }
    }
}

impl WalkerConfig {
    /// Checks the geometric and budget constraints against the band `eta`
    /// of the system the walkers will run on.
    pub fn validate(&self, eta: f64) -> Result<()> {
        if !(self.r_launch > 1.0 + eta) {
            return Err(Error::Config(format!(
                "launch radius {} must exceed 1 + eta = {}",
                self.r_launch,
                1.0 + eta
            )));
        }
        if !(self.r_out > self.r_launch) {
            return Err(Error::Config(format!(
                "far-field radius {} must exceed launch radius {}",
                self.r_out, self.r_launch
            )));
        }
        if !(self.eps_abs > 0.0) {
            return Err(Error::Config(format!(
                "absorption tolerance must be positive, got {}",
                self.eps_abs
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::Config("step cap must be positive".into()));
        }
        if self.walkers == 0 {
            return Err(Error::Config("walker count must be positive".into()));
        }
        Ok(())
    }
}

/// Runs one walker to absorption. Returns the absorbing leaf index and the
/// number of jumps taken.
fn run_walker(
    approx: &DiskApproximation,
    cfg: &WalkerConfig,
    walker: u64,
    scratch: &mut Vec<(f64, usize, usize)>,
) -> Result<(usize, u64)> {
    let mut rng = rng::stream(cfg.seed, "walker", walker);
    let mut z = Complex64::from_polar(cfg.r_launch, TAU * rng.gen::<f64>());
    for step in 1..=cfg.max_steps {
        let near = approx.nearest_with(z, scratch);
        if near.distance < cfg.eps_abs * near.radius {
            return Ok((near.index, step - 1));
        }
        if z.norm() > cfg.r_out {
            z = reentry_point(z, cfg.r_launch, rng.gen::<f64>());
        } else {
            z += Complex64::from_polar(near.distance, TAU * rng.gen::<f64>());
        }
    }
    Err(Error::WalkerStalled {
        walker,
        steps: cfg.max_steps,
    })
}

/// Estimates the exit distribution of the system shifted by `offset`,
/// resolving geometry to depth `approx_depth` and assigning absorptions to
/// cylinders of depth `assign_depth`.
///
/// Output is a pure function of `(system, offset, depths, cfg)`: walkers
/// use counter-derived streams and integer tallies, so any thread count
/// produces bit-identical counts.
pub fn estimate_direct(
    system: &Arc<SystemSpec>,
    offset: usize,
    approx_depth: usize,
    assign_depth: usize,
    cfg: &WalkerConfig,
) -> Result<MeasureEstimate> {
    if assign_depth > approx_depth {
        return Err(Error::InsufficientDepth {
            requested: assign_depth,
            available: approx_depth,
        });
    }
    if assign_depth == 0 {
        return Err(Error::Config(
            "assignment depth must be at least 1".into(),
        ));
    }
    cfg.validate(system.domain().eta)?;
    let approx = DiskApproximation::new(system, offset, approx_depth)?;
    let slots: usize = approx.degrees()[..assign_depth].iter().product();

    let make_state = || (vec![0u64; slots], 0u64, Vec::new());
    let (counts, total_steps, _) = (0..cfg.walkers)
        .into_par_iter()
        .try_fold(make_state, |(mut counts, mut steps, mut scratch), walker| {
            let (leaf, taken) = run_walker(&approx, cfg, walker, &mut scratch)?;
            counts[approx.ancestor_index(leaf, assign_depth)] += 1;
            steps += taken;
            Ok::<_, Error>((counts, steps, scratch))
        })
        .try_reduce(make_state, |(mut c1, s1, scratch), (c2, s2, _)| {
            for (a, b) in c1.iter_mut().zip(&c2) {
                *a += b;
            }
            Ok((c1, s1 + s2, scratch))
        })?;

    Ok(MeasureEstimate {
        offset,
        assign_depth,
        degrees: approx.degrees()[..assign_depth].to_vec(),
        counts,
        total: cfg.walkers,
        total_steps,
        config: cfg.clone(),
    })
}
