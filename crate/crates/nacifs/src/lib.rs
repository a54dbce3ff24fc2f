//! Numerical laboratory for non-autonomous conformal Cantor sets in the unit
//! disk and the harmonic measure of their complements.
//!
//! A system is a sequence of generations, each a finite family of injective
//! conformal contractions `z -> a z + b + c z^2` mapping a neighbourhood of the
//! closed unit disk into the open unit disk with uniformly separated images.
//! Iterating one map per generation produces a Cantor set; the library
//! estimates the harmonic measure of its complement seen from infinity,
//! evaluates entropy / Lyapunov / pressure functionals of measures indexed by
//! the branching alphabet, and derives Hausdorff and packing dimension proxies
//! together with their behaviour under small perturbations of the maps.
//!
//! Module map:
//! - [`conformal`]: map and system specifications, generation validation,
//!   word composition with certified image enclosures, system distance.
//! - [`symbolic`]: positive functionals on cylinder words (tables, product
//!   measures, derivative proxies), brackets, Jensen checks, asymptotic
//!   shift-invariance diagnostics, and the log-ratio distance between
//!   functionals.
//! - [`harmonic`]: walk-on-spheres estimation of harmonic measure against a
//!   disk approximation of the set, a buffered factorized estimator for deep
//!   cylinders, and lower-bound diagnostics.
//! - [`thermo`]: entropy/Lyapunov records, the pressure line, and dimension
//!   reports with delta-method error bars.
//! - [`perturb`]: structured perturbations of a system and the continuity
//!   experiment tabulating geometric and measure-theoretic distances.
//! - [`cli`]: the `nacifs` command-line front end with reproducible run
//!   manifests.

pub mod cli;
pub mod conformal;
pub mod error;
pub mod harmonic;
pub mod io;
pub mod numeric;
pub mod perturb;
pub mod rng;
pub mod symbolic;
pub mod thermo;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
