//! Conformal contraction systems on the unit disk.
//!
//! A *system* is a sequence of generations; generation `k` is a finite family
//! of maps `psi(z) = a z + b + c z^2`, each injective on the closed disk of
//! radius `1 + eta` and satisfying, with `V` that disk:
//!
//! - bounded contraction: `eta < |psi'| < 1 - eta` on `V`,
//! - separation: the images `psi_i(V)` are pairwise disjoint,
//! - containment: every `psi_i(V)` lies inside the disk of radius `1 - eta`.
//!
//! A *word* picks one branch per generation starting at some offset; composing
//! its maps innermost-first sends the unit disk onto an exponentially small
//! cylinder. The intersection over depths of the cylinder unions is the limit
//! Cantor set of the shifted system.
//!
//! Everything here is certified with disk enclosures rather than symbolic
//! bounds: the image of a disk under `psi` is bracketed by the disk around
//! `psi(center)` of radius `radius * sup |psi'|`, where the sup is the exact
//! interval bound `|a| + 2|c| * maxmod` on the argument disk.

mod compose;
mod disk;
mod distance;
mod generation;
mod map;
mod system;
mod word;

pub use compose::{
    compose_word, cylinder_diameter, evaluate_word, ComposedMapInfo, DiameterMethod,
};
pub use disk::Disk;
pub use distance::{system_distance, SystemDistance};
pub use generation::{
    distortion_ratio, validate_generation, GenerationReport, GenerationSpec, MapReport,
};
pub use map::{ConformalMap, MapKind};
pub use system::{
    autonomous_similarities, DomainConfig, DomainSpec, ModeTag, SeededBoxes, SystemConfig,
    SystemMode, SystemSpec,
};
pub use word::{word_from_index, word_index, Word};
