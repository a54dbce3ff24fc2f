//! Structured perturbations of a system and the continuity experiment.
//!
//! [`perturb_system`] displaces one coefficient of every map by a chosen
//! step, backing off per map until the displaced system validates and stays
//! branch-compatible with the base. [`continuity_experiment`] sweeps a range
//! of step sizes and tabulates, per step, the coefficient distance, the
//! exact diameter-conditional gap, the Monte-Carlo harmonic-conditional gap,
//! and the dimension interval of the perturbed harmonic estimate —
//! quantifying how smoothly the whole pipeline responds to small changes of
//! the maps.

mod continuity;
mod plan;

pub use continuity::{continuity_experiment, ContinuityConfig, ContinuityRow, ContinuityTable};
pub use plan::{
    alpha_exponent, perturb_system, PerturbMode, PerturbationPlan, JIGGLE_SCALE, MAX_SHRINKS,
    SHRINK_FACTOR,
};
