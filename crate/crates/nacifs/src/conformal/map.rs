//! Individual conformal contractions `psi(z) = a z + b + c z^2`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapKind {
    /// `c = 0`: derivative is the constant `a`.
    Similarity,
    /// `c != 0`, injectivity on the `(1 + eta)` disk guaranteed by
    /// `2 |c| (1 + eta) < |a|` (the derivative never vanishes there).
    Quadratic,
}

/// One branch map. Coefficients are serialized as `[re, im]` pairs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MapRepr", into = "MapRepr")]
pub struct ConformalMap {
    pub kind: MapKind,
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MapRepr {
    kind: MapKind,
    a: [f64; 2],
    b: [f64; 2],
    c: [f64; 2],
}

impl TryFrom<MapRepr> for ConformalMap {
    type Error = String;

    fn try_from(r: MapRepr) -> std::result::Result<Self, String> {
        let map = ConformalMap {
            kind: r.kind,
            a: Complex64::new(r.a[0], r.a[1]),
            b: Complex64::new(r.b[0], r.b[1]),
            c: Complex64::new(r.c[0], r.c[1]),
        };
        if map.kind == MapKind::Similarity && map.c != Complex64::new(0.0, 0.0) {
            return Err("similarity map with nonzero quadratic coefficient".into());
        }
        for (name, v) in [("a", map.a), ("b", map.b), ("c", map.c)] {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(format!("non-finite coefficient {name}"));
            }
        }
        Ok(map)
    }
}

impl From<ConformalMap> for MapRepr {
    fn from(m: ConformalMap) -> MapRepr {
        MapRepr {
            kind: m.kind,
            a: [m.a.re, m.a.im],
            b: [m.b.re, m.b.im],
            c: [m.c.re, m.c.im],
        }
    }
}

impl ConformalMap {
    pub fn similarity(a: Complex64, b: Complex64) -> Self {
        Self { kind: MapKind::Similarity, a, b, c: Complex64::new(0.0, 0.0) }
    }

    pub fn quadratic(a: Complex64, b: Complex64, c: Complex64) -> Self {
        Self { kind: MapKind::Quadratic, a, b, c }
    }

    /// `psi(z)`.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.a * z + self.b + self.c * z * z
    }

    /// `psi'(z) = a + 2 c z`.
    pub fn deriv(&self, z: Complex64) -> Complex64 {
        self.a + 2.0 * self.c * z
    }

    /// Exact bounds for `|psi'|` on the closed disk of radius `r` about the
    /// origin: `|a| +- 2 |c| r`. The lower bound can be negative for invalid
    /// maps; validation rejects those.
    pub fn deriv_bounds(&self, r: f64) -> (f64, f64) {
        let spread = 2.0 * self.c.norm() * r;
        (self.a.norm() - spread, self.a.norm() + spread)
    }

    /// Checks the kind-specific validity constraint on the `(1 + eta)` disk.
    pub fn check_kind(&self, eta: f64) -> Result<()> {
        match self.kind {
            MapKind::Similarity => {
                if self.c != Complex64::new(0.0, 0.0) {
                    return Err(Error::Config(
                        "similarity map with nonzero quadratic coefficient".into(),
                    ));
                }
            }
            MapKind::Quadratic => {
                if !(2.0 * self.c.norm() * (1.0 + eta) < self.a.norm()) {
                    return Err(Error::Config(format!(
                        "quadratic coefficient too large for injectivity: 2|c|(1+eta) = {} >= |a| = {}",
                        2.0 * self.c.norm() * (1.0 + eta),
                        self.a.norm()
                    )));
                }
            }
        }
        Ok(())
    }
}
