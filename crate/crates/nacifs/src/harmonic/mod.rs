//! Monte-Carlo estimation of the exit distribution of planar Brownian
//! motion over the cylinder structure of a contraction system.
//!
//! Walkers launched far from the invariant set perform walk-on-spheres
//! steps until they are absorbed near a leaf enclosure of a
//! [`DiskApproximation`]; absorption counts per leaf yield a
//! [`MeasureEstimate`] of the exit distribution, which plugs into the
//! symbolic layer as a [`Functional`](crate::symbolic::Functional).

mod approx;
mod asi;
mod bounds;
mod estimate;
mod factorized;
mod kernel;
mod walk;

pub use approx::{DiskApproximation, NearestLeaf};
pub use asi::{asi_report_harmonic, HarmonicAsiReport, HarmonicAsiRow};
pub use bounds::{lower_bound_checks, BoundaryPoint, LadderRung, LowerBoundReport};
pub use estimate::MeasureEstimate;
pub use factorized::{
    estimate_factorized, FactorizedEstimator, DEFAULT_APPROX_MARGIN, FACTOR_HIT_FLOOR,
};
pub use kernel::{hitting_angle, reentry_point};
pub use walk::{estimate_direct, WalkerConfig};
