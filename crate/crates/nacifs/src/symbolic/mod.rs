//! Positive functionals on cylinder trees and the machinery built on them:
//! conditional values, brackets and mass, the convexity check, the
//! conditional-ratio distance, sibling-invariance discrepancy estimation
//! with its exponential decay fit, and uniformity/compatibility diagnostics.
//!
//! A [`Functional`] assigns a strictly positive value to every word of a
//! cylinder tree up to a depth; everything downstream — dimension proxies,
//! continuity experiments, Monte Carlo measure estimates — consumes this
//! interface rather than a concrete representation.

mod asi;
mod backings;
mod compat;
mod functional;
mod ops;

pub use asi::{
    asi_discrepancy, asi_discrepancy_exhaustive, asi_report, fit_exponential_decay, AsiReport,
    AsiRow, DecayFit,
};
pub use backings::{BernoulliMeasure, DenseTable, DerivProxyDiameter, UniformMeasure};
pub use compat::{
    alpha_diagnostic, compatibility_witness, AlphaDiagnostic, AlphaLevel, CompatibilityWitness,
    GammaRule, WitnessRow,
};
pub use functional::{Extensions, Functional};
pub(crate) use backings::MEASURE_SUM_TOL;
pub(crate) use functional::common_degrees;
pub use ops::{
    bracket, bracket_log, bracket_log_ratio, dcal_distance, jensen_check, mass, relative,
    JensenCheck, JENSEN_EQUALITY_TOL, JENSEN_HOLDS_TOL,
};
