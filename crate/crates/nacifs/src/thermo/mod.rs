//! Entropy, contraction, and dimension statistics over cylinder functionals.
//!
//! The cylinder partition at depth `n` turns a measure and a diameter
//! functional into three numbers: an entropy rate, a contraction
//! (Lyapunov) rate, and their ratio — the zero of the affine pressure
//! line `t ↦ H − t·χ`, which is the natural dimension proxy at that
//! depth. [`pressure_record`] computes one depth; [`dimension_report`]
//! sweeps a range of depths and brackets the limit. The `pointwise`
//! half draws individual words from the measure and reads the same
//! rates off single trajectories.

mod pointwise;
mod records;

pub use pointwise::{pointwise_samples, sample_words, PointwiseSample};
pub use records::{dimension_report, pressure_record, DimensionReport, PressureRecord};
