//! Closed disks in the plane, the enclosure currency of the whole crate.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: Complex64,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: Complex64, radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn unit() -> Self {
        Self::new(Complex64::new(0.0, 0.0), 1.0)
    }

    /// Signed distance from `z` to the disk: negative inside, zero on the
    /// boundary circle, positive outside.
    pub fn signed_distance(&self, z: Complex64) -> f64 {
        (z - self.center).norm() - self.radius
    }

    /// Largest modulus attained on the disk.
    pub fn max_modulus(&self) -> f64 {
        self.center.norm() + self.radius
    }

    /// Gap between two disks; positive iff they are disjoint with that margin.
    pub fn gap(&self, other: &Disk) -> f64 {
        (self.center - other.center).norm() - self.radius - other.radius
    }

    /// Margin by which `self` sits inside the origin-centred disk of radius
    /// `r`; positive iff contained with that slack.
    pub fn containment_margin(&self, r: f64) -> f64 {
        r - self.max_modulus()
    }

    /// Whether `self` contains `other` (non-strict).
    pub fn contains(&self, other: &Disk) -> bool {
        (self.center - other.center).norm() + other.radius <= self.radius
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn distance_sign_convention() {
        let d = Disk::new(c(1.0, 0.0), 0.5);
        assert!(d.signed_distance(c(1.0, 0.0)) < 0.0);
        assert_eq!(d.signed_distance(c(2.0, 0.0)), 0.5);
        assert!((d.signed_distance(c(1.5, 0.0))).abs() < 1e-15);
    }

    #[test]
    fn gap_and_containment() {
        let a = Disk::new(c(-0.5, 0.0), 0.3);
        let b = Disk::new(c(0.5, 0.0), 0.3);
        assert!((a.gap(&b) - 0.4).abs() < 1e-15);
        assert!((a.containment_margin(0.9) - 0.1).abs() < 1e-15);
        assert!(Disk::unit().contains(&a));
        assert!(!a.contains(&Disk::unit()));
    }
}
