//! Word composition with certified enclosures.
//!
//! For a word at offset `p` with branches `(w_0, ..., w_{n-1})` the composed
//! map is `psi_{p,w_0} o psi_{p+1,w_1} o ... o psi_{p+n-1,w_{n-1}}`: deeper
//! letters act first. Folding from the innermost map outward tracks
//!
//! - the image point `psi_X(0)` and derivative `psi_X'(0)` (chain rule),
//! - a disk enclosure of `psi_X(closed unit disk)`, via the interval bound
//!   `sup |psi'| <= |a| + 2|c| maxmod` on each intermediate disk,
//! - a distortion bound: the product over fold steps of
//!   `sup |psi'| / inf |psi'`` on the intermediate disk, which bounds
//!   `|psi_X'(u) / psi_X'(v)|` for `u, v` in the unit disk.
//!
//! Inverse branches are never needed: every functional downstream is indexed
//! by forward words.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::disk::Disk;
use super::system::SystemSpec;
use super::word::{word_from_index, Word};
use crate::{Error, Result};

/// Composition facts for one word.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComposedMapInfo {
    pub word: Word,
    /// `psi_X(0)`, the cylinder's nominal center.
    pub center: Complex64,
    /// `psi_X'(0)`; its modulus is the derivative-proxy diameter.
    pub deriv0: Complex64,
    /// Radius of a disk around `center` certainly containing the image of the
    /// closed unit disk.
    pub radius_bound: f64,
    /// Upper bound for `|psi_X'(u)/psi_X'(v)|`, `u, v` in the unit disk.
    pub distortion_bound: f64,
}

impl ComposedMapInfo {
    pub fn enclosure(&self) -> Disk {
        Disk::new(self.center, self.radius_bound)
    }
}

/// Composes the maps selected by `word`.
pub fn compose_word(system: &SystemSpec, word: &Word) -> Result<ComposedMapInfo> {
    let mut z = Complex64::new(0.0, 0.0);
    let mut d = Complex64::new(1.0, 0.0);
    let mut disk = Disk::unit();
    let mut distortion = 1.0f64;

    for (i, &branch) in word.branches().iter().enumerate().rev() {
        let map = system.map(word.offset() + i, branch)?;
        let maxmod = disk.max_modulus();
        let spread = 2.0 * map.c.norm() * maxmod;
        let hi = map.a.norm() + spread;
        let lo = map.a.norm() - spread;
        if lo <= 0.0 {
            return Err(Error::NonPositive(format!(
                "derivative bound vanished composing {word} at letter {i}"
            )));
        }
        distortion *= hi / lo;
        disk = Disk::new(map.eval(disk.center), disk.radius * hi);
        d *= map.deriv(z);
        z = map.eval(z);
    }

    Ok(ComposedMapInfo {
        word: word.clone(),
        center: z,
        deriv0: d,
        radius_bound: disk.radius,
        distortion_bound: distortion,
    })
}

/// Evaluates `(psi_X(z), psi_X'(z))` at an arbitrary point.
pub fn evaluate_word(system: &SystemSpec, word: &Word, z: Complex64) -> Result<(Complex64, Complex64)> {
    let mut w = z;
    let mut d = Complex64::new(1.0, 0.0);
    for (i, &branch) in word.branches().iter().enumerate().rev() {
        let map = system.map(word.offset() + i, branch)?;
        d *= map.deriv(w);
        w = map.eval(w);
    }
    Ok((w, d))
}

/// How to turn a word into a diameter figure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiameterMethod {
    /// `|psi_X'(0)|`: cheap, exact for similarity systems, comparable to the
    /// true diameter within the distortion bound otherwise.
    DerivProxy,
    /// Diameter of `psi_X` applied to the centers of the depth-`m` cylinders
    /// of the shifted system (the point sample of the limit set the cylinder
    /// actually contains).
    SampleImage { m: usize },
}

impl Default for DiameterMethod {
    fn default() -> Self {
        DiameterMethod::SampleImage { m: 4 }
    }
}

/// Diameter figure for the cylinder of `word`.
pub fn cylinder_diameter(system: &SystemSpec, word: &Word, method: DiameterMethod) -> Result<f64> {
    match method {
        DiameterMethod::DerivProxy => Ok(compose_word(system, word)?.deriv0.norm()),
        DiameterMethod::SampleImage { m } => {
            let tail_offset = word.offset() + word.len();
            let degrees = system.degrees(tail_offset, m)?;
            let total: usize = degrees.iter().product();
            let mut points = Vec::with_capacity(total);
            for idx in 0..total {
                let tail = Word::new(tail_offset, word_from_index(idx, &degrees));
                let tail_center = compose_word(system, &tail)?.center;
                let (image, _) = evaluate_word(system, word, tail_center)?;
                points.push(image);
            }
            let mut diam = 0.0f64;
            for i in 0..points.len() {
                for j in (i + 1)..points.len() {
                    diam = diam.max((points[i] - points[j]).norm());
                }
            }
            Ok(diam)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::system::autonomous_similarities;
    use crate::conformal::{ConformalMap, DomainConfig, ModeTag, SystemConfig, SystemSpec};
    use std::sync::Arc;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn symmetric_pair() -> Arc<SystemSpec> {
        autonomous_similarities(0.1, &[(0.3, 0.5), (0.3, -0.5)], 32).unwrap()
    }

    #[test]
    fn two_letter_similarity_composition() {
        let sys = symmetric_pair();
        // first letter uses map +0.5, second letter -0.5 applied innermost
        let info = compose_word(&sys, &Word::new(0, vec![0, 1])).unwrap();
        assert!((info.center - c64(0.35, 0.0)).norm() < 1e-15);
        assert!((info.deriv0 - c64(0.09, 0.0)).norm() < 1e-15);
        assert!((info.radius_bound - 0.09).abs() < 1e-15);
        assert_eq!(info.distortion_bound, 1.0);
    }

    #[test]
    fn empty_word_is_identity() {
        let sys = symmetric_pair();
        let info = compose_word(&sys, &Word::empty(3)).unwrap();
        assert_eq!(info.center, c64(0.0, 0.0));
        assert_eq!(info.deriv0, c64(1.0, 0.0));
        assert_eq!(info.radius_bound, 1.0);
    }

    #[test]
    fn deriv0_within_contraction_band() {
        let sys = symmetric_pair();
        let eta = sys.domain().eta;
        for n in 1..=8 {
            let word = Word::new(0, vec![0; n]);
            let v = compose_word(&sys, &word).unwrap().deriv0.norm();
            assert!(v >= eta.powi(n as i32) && v <= (1.0 - eta).powi(n as i32));
        }
    }

    #[test]
    fn enclosures_nest_down_the_tree() {
        let sys = quadratic_pair();
        let mut word = Word::empty(0);
        for letter in [0u32, 1, 0, 1, 1] {
            let parent = compose_word(&sys, &word).unwrap().enclosure();
            word = word.extended(&[letter]);
            let child = compose_word(&sys, &word).unwrap().enclosure();
            assert!(parent.contains(&child), "child escaped parent at {word}");
            assert!(child.radius < parent.radius);
        }
    }

    fn quadratic_pair() -> Arc<SystemSpec> {
        let maps = vec![
            ConformalMap::quadratic(c64(0.3, 0.0), c64(0.5, 0.0), c64(0.01, 0.0)),
            ConformalMap::quadratic(c64(0.3, 0.0), c64(-0.5, 0.0), c64(0.01, 0.0)),
        ];
        SystemSpec::from_config(SystemConfig {
            domain: DomainConfig { eta: 0.1, gamma: None },
            mode: ModeTag::Periodic,
            prefix: Vec::new(),
            period: Some(vec![maps]),
            seed: None,
            seeded: None,
            horizon: 32,
            degree_cap: 8,
        })
        .unwrap()
    }

    #[test]
    fn sample_diameter_matches_proxy_for_similarities() {
        let sys = symmetric_pair();
        let word = Word::new(0, vec![0, 1, 0]);
        let proxy = cylinder_diameter(&sys, &word, DiameterMethod::DerivProxy).unwrap();
        let sampled =
            cylinder_diameter(&sys, &word, DiameterMethod::SampleImage { m: 4 }).unwrap();
        // for similarities the image sample scales exactly by |psi_X'|;
        // the ratio equals the diameter of the depth-4 point sample itself
        let tail_sample =
            cylinder_diameter(&sys, &Word::empty(3), DiameterMethod::SampleImage { m: 4 }).unwrap();
        assert!((sampled / proxy - tail_sample).abs() < 1e-12);
    }

    #[test]
    fn sample_and_proxy_comparable_within_distortion() {
        let sys = quadratic_pair();
        for idx in 0..8u32 {
            let word = Word::new(0, vec![(idx >> 2) & 1, (idx >> 1) & 1, idx & 1]);
            let info = compose_word(&sys, &word).unwrap();
            let proxy = info.deriv0.norm();
            let sampled =
                cylinder_diameter(&sys, &word, DiameterMethod::SampleImage { m: 4 }).unwrap();
            let tail_sample = cylinder_diameter(
                &sys,
                &Word::empty(word.offset() + word.len()),
                DiameterMethod::SampleImage { m: 4 },
            )
            .unwrap();
            // sampled image diameter = (tail sample diameter) * |psi_X'(xi)| for
            // intermediate points xi, so the ratio to the proxy is controlled by
            // the fold's distortion bound
            let ratio = sampled / (proxy * tail_sample);
            assert!(
                ratio <= info.distortion_bound + 1e-9
                    && ratio >= 2.0 - info.distortion_bound - 1e-9,
                "ratio {ratio} outside distortion bound {} for {word}",
                info.distortion_bound
            );
        }
    }

    #[test]
    fn word_evaluation_needs_valid_branches() {
        let sys = symmetric_pair();
        assert!(compose_word(&sys, &Word::new(0, vec![2])).is_err());
        assert!(compose_word(&sys, &Word::new(31, vec![0, 0])).is_err());
    }
}
