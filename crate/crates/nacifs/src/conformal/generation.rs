//! Generations and their validation report.
//!
//! Validation uses interval and sampled bounds, not symbolic proof: the
//! derivative of `a z + b + c z^2` is affine, so on the circle of radius
//! `1 + eta` the exact modulus range is `|a| +- 2|c|(1+eta)`; a 512-point
//! circle sample cross-checks the interval and feeds the report.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::disk::Disk;
use super::map::{ConformalMap, MapKind};
use super::system::DomainSpec;
use crate::{Error, Result};

/// Number of boundary sample points used for reported min/max derivative
/// moduli. The pass/fail decision itself uses the interval bound.
pub const VALIDATION_CIRCLE_SAMPLES: usize = 512;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationSpec {
    pub maps: Vec<ConformalMap>,
}

impl GenerationSpec {
    pub fn new(maps: Vec<ConformalMap>) -> Self {
        Self { maps }
    }

    pub fn degree(&self) -> usize {
        self.maps.len()
    }

    /// Enclosure of `psi_i(V)`, `V` the closed `(1 + eta)` disk: center
    /// `psi_i(0) = b`, radius `(1+eta) * sup_V |psi_i'|`.
    pub fn image_enclosure(&self, i: usize, eta: f64) -> Disk {
        let m = &self.maps[i];
        let (_, hi) = m.deriv_bounds(1.0 + eta);
        Disk::new(m.b, (1.0 + eta) * hi)
    }

    /// Disk certainly contained in `psi_i(V)`: injectivity makes the image
    /// cover the disk around `psi_i(0)` of radius `min_{|z|=1+eta} |psi_i(z) -
    /// psi_i(0)| >= (1+eta)(|a| - |c|(1+eta))`.
    pub fn inner_disk(&self, i: usize, eta: f64) -> Disk {
        let m = &self.maps[i];
        let r = 1.0 + eta;
        Disk::new(m.b, r * (m.a.norm() - m.c.norm() * r).max(0.0))
    }
}

/// Per-map validation facts.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MapReport {
    /// Interval bound for `|psi'|` on the `(1+eta)` disk.
    pub deriv_lo: f64,
    pub deriv_hi: f64,
    /// Sampled extremes on the boundary circle (diagnostic).
    pub deriv_lo_sampled: f64,
    pub deriv_hi_sampled: f64,
    /// Bounded contraction `eta < |psi'| < 1 - eta` via the interval bound.
    pub contraction_ok: bool,
    /// Image enclosure of the `(1+eta)` disk.
    pub enclosure: Disk,
    /// Slack of `enclosure` inside the `(1-eta)` disk; containment holds iff
    /// nonnegative.
    pub containment_margin: f64,
}

/// Validation report for one generation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GenerationReport {
    pub generation: usize,
    pub degree: usize,
    /// Contraction band `(eta, 1 - eta)` the interval bounds were tested
    /// against.
    pub eta: f64,
    pub maps: Vec<MapReport>,
    /// Pairwise enclosure gaps `(i, j, gap)`; separation holds iff all
    /// positive.
    pub separation_gaps: Vec<(usize, usize, f64)>,
    pub ok: bool,
}

impl GenerationReport {
    /// First human-readable defect, if any.
    pub fn first_defect(&self) -> Option<String> {
        for (i, m) in self.maps.iter().enumerate() {
            if !m.contraction_ok {
                return Some(format!(
                    "map {i}: |psi'| in [{:.6}, {:.6}] escapes ({:.6}, {:.6})",
                    m.deriv_lo,
                    m.deriv_hi,
                    self.eta,
                    1.0 - self.eta
                ));
            }
            if m.containment_margin < 0.0 {
                return Some(format!(
                    "map {i}: image enclosure escapes the (1-eta) disk by {:.6}",
                    -m.containment_margin
                ));
            }
        }
        for &(i, j, gap) in &self.separation_gaps {
            if gap <= 0.0 {
                return Some(format!("maps {i} and {j}: enclosures overlap, gap {gap:.6}"));
            }
        }
        None
    }
}

/// Validates one generation against the domain constants.
///
/// `generation` is only used to label the report and errors.
pub fn validate_generation(
    gen: &GenerationSpec,
    domain: &DomainSpec,
    generation: usize,
    degree_cap: usize,
) -> Result<GenerationReport> {
    let eta = domain.eta;
    let d = gen.degree();
    if d < 2 || d > degree_cap {
        return Err(Error::ValidationFailed {
            generation,
            detail: format!("degree {d} outside [2, {degree_cap}]"),
        });
    }

    let mut maps = Vec::with_capacity(d);
    let mut ok = true;
    for (i, m) in gen.maps.iter().enumerate() {
        m.check_kind(eta).map_err(|e| Error::ValidationFailed {
            generation,
            detail: format!("map {i}: {e}"),
        })?;
        let (lo, hi) = m.deriv_bounds(1.0 + eta);
        let (slo, shi) = sampled_deriv_range(m, 1.0 + eta);
        let contraction_ok = lo > eta && hi < 1.0 - eta;
        let enclosure = gen.image_enclosure(i, eta);
        let containment_margin = enclosure.containment_margin(1.0 - eta);
        ok &= contraction_ok && containment_margin >= 0.0;
        maps.push(MapReport {
            deriv_lo: lo,
            deriv_hi: hi,
            deriv_lo_sampled: slo,
            deriv_hi_sampled: shi,
            contraction_ok,
            enclosure,
            containment_margin,
        });
    }

    let mut separation_gaps = Vec::with_capacity(d * (d - 1) / 2);
    for i in 0..d {
        for j in (i + 1)..d {
            let gap = maps[i].enclosure.gap(&maps[j].enclosure);
            ok &= gap > 0.0;
            separation_gaps.push((i, j, gap));
        }
    }

    Ok(GenerationReport { generation, degree: d, eta, maps, separation_gaps, ok })
}

fn sampled_deriv_range(m: &ConformalMap, r: f64) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for k in 0..VALIDATION_CIRCLE_SAMPLES {
        let th = 2.0 * std::f64::consts::PI * k as f64 / VALIDATION_CIRCLE_SAMPLES as f64;
        let z = r * Complex64::new(th.cos(), th.sin());
        let v = m.deriv(z).norm();
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

/// Largest ratio `|psi'(x)| / |psi'(y)|` over a circle sample of the given
/// radius. For a similarity this is exactly 1; for a quadratic the extremes
/// of the affine derivative sit on the circle, so the sampled ratio converges
/// to `(|a| + 2|c|r) / (|a| - 2|c|r)` as the sample grows.
pub fn distortion_ratio(map: &ConformalMap, region_radius: f64, samples: usize) -> f64 {
    if map.kind == MapKind::Similarity {
        return 1.0;
    }
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for k in 0..samples {
        let th = 2.0 * std::f64::consts::PI * k as f64 / samples as f64;
        let z = region_radius * Complex64::new(th.cos(), th.sin());
        let v = map.deriv(z).norm();
        lo = lo.min(v);
        hi = hi.max(v);
    }
    hi / lo
}
