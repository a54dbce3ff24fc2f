//! Distance between two systems over a common horizon.
//!
//! The distance is the sup over generations and branches of
//! `max_{|z| = gamma_bar} |psi_i(z) - psi_tilde_i(z)|`, evaluated on a
//! 1024-point circle sample (exact for coefficient-wise perturbations whose
//! difference has constant modulus on circles, e.g. pure translations).
//!
//! Before measuring, the systems must be *matched*: same alphabet sizes, same
//! contraction band, and branch `i` of one system intersects branch `j` of
//! the other exactly when `i = j`. Intersection for `i = j` is certified by
//! overlapping inner disks (disks the images provably cover); disjointness
//! for `i != j` by separated outer enclosures. If neither certificate fires
//! the comparison is refused rather than guessed.

use serde::{Deserialize, Serialize};

use super::system::SystemSpec;
use crate::{Error, Result};

use num_complex::Complex64;

/// Circle sample density for the sup-norm evaluation.
pub const DISTANCE_CIRCLE_SAMPLES: usize = 1024;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SystemDistance {
    /// Sup over compared generations.
    pub distance: f64,
    /// Per-generation sup distances for `0..horizon`.
    pub per_generation: Vec<f64>,
    /// Radius the sup-norm was taken on: `max(gamma, gamma_tilde)`.
    pub gamma_bar: f64,
}

/// Measures the distance between matched systems over `0..horizon`.
pub fn system_distance(a: &SystemSpec, b: &SystemSpec, horizon: usize) -> Result<SystemDistance> {
    if a.domain().eta != b.domain().eta {
        return Err(Error::IncompatibleSystems(format!(
            "contraction bands differ: {} vs {}",
            a.domain().eta,
            b.domain().eta
        )));
    }
    let eta = a.domain().eta;
    let gamma_bar = a.domain().gamma.max(b.domain().gamma);

    let mut per_generation = Vec::with_capacity(horizon);
    for k in 0..horizon {
        let ga = a.generation(k)?;
        let gb = b.generation(k)?;
        if ga.degree() != gb.degree() {
            return Err(Error::IncompatibleSystems(format!(
                "generation {k}: degrees {} vs {}",
                ga.degree(),
                gb.degree()
            )));
        }
        let d = ga.degree();
        for i in 0..d {
            for j in 0..d {
                if i == j {
                    let inner_a = ga.inner_disk(i, eta);
                    let inner_b = gb.inner_disk(i, eta);
                    if inner_a.gap(&inner_b) >= 0.0 {
                        return Err(Error::IncompatibleSystems(format!(
                            "generation {k}: branch {i} images not certified to intersect"
                        )));
                    }
                } else {
                    let outer_a = ga.image_enclosure(i, eta);
                    let outer_b = gb.image_enclosure(j, eta);
                    if outer_a.gap(&outer_b) <= 0.0 {
                        return Err(Error::IncompatibleSystems(format!(
                            "generation {k}: branches {i} and {j} not certified disjoint"
                        )));
                    }
                }
            }
        }

        let mut sup = 0.0f64;
        for i in 0..d {
            let ma = ga.maps[i];
            let mb = gb.maps[i];
            let da = ma.a - mb.a;
            let db = ma.b - mb.b;
            let dc = ma.c - mb.c;
            for s in 0..DISTANCE_CIRCLE_SAMPLES {
                let th = 2.0 * std::f64::consts::PI * s as f64 / DISTANCE_CIRCLE_SAMPLES as f64;
                let z = gamma_bar * Complex64::new(th.cos(), th.sin());
                sup = sup.max((da * z + db + dc * z * z).norm());
            }
        }
        per_generation.push(sup);
    }

    let distance = per_generation.iter().cloned().fold(0.0, f64::max);
    Ok(SystemDistance { distance, per_generation, gamma_bar })
}
