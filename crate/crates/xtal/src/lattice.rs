use serde::{Deserialize, Serialize};

use crate::{Result, XtalError};

/// Unit-cell lattice parameters: lengths in angstroms, angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Lattice {
    pub fn new(a: f64, b: f64, c: f64, alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        let l = Lattice { a, b, c, alpha, beta, gamma };
        l.validate()?;
        Ok(l)
    }

    pub fn cubic(a: f64) -> Result<Self> {
        Lattice::new(a, a, a, 90.0, 90.0, 90.0)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("a", self.a), ("b", self.b), ("c", self.c)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(XtalError::BadLattice(format!("length {name} = {v}")));
            }
        }
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)] {
            if !(v > 0.0 && v < 180.0) {
                return Err(XtalError::BadLattice(format!("angle {name} = {v}")));
            }
        }
        if self.angle_factor_sq() <= 1e-12 {
            return Err(XtalError::BadLattice(format!(
                "angle triple ({}, {}, {}) admits no positive cell volume",
                self.alpha, self.beta, self.gamma
            )));
        }
        Ok(())
    }

    /// 1 − cos²α − cos²β − cos²γ + 2 cosα cosβ cosγ; positive iff the angles
    /// define a valid metric.
    fn angle_factor_sq(&self) -> f64 {
        let (ca, cb, cg) = (cos_deg(self.alpha), cos_deg(self.beta), cos_deg(self.gamma));
        1.0 - ca * ca - cb * cb - cg * cg + 2.0 * ca * cb * cg
    }

    /// Row-vector cell matrix: rows are the a, b, c lattice vectors in a
    /// Cartesian frame with a along x and b in the xy plane.
    pub fn cell_vectors(&self) -> [[f64; 3]; 3] {
        let (ca, cb) = (cos_deg(self.alpha), cos_deg(self.beta));
        let (cg, sg) = (cos_deg(self.gamma), sin_deg(self.gamma));
        let v = self.angle_factor_sq().max(0.0).sqrt();
        [
            [self.a, 0.0, 0.0],
            [self.b * cg, self.b * sg, 0.0],
            [self.c * cb, self.c * (ca - cb * cg) / sg, self.c * v / sg],
        ]
    }

    pub fn volume(&self) -> f64 {
        self.a * self.b * self.c * self.angle_factor_sq().max(0.0).sqrt()
    }

    pub fn frac_to_cart(&self, frac: [f64; 3]) -> [f64; 3] {
        let m = self.cell_vectors();
        let mut out = [0.0; 3];
        for k in 0..3 {
            for (row, f) in m.iter().zip(frac) {
                out[k] += f * row[k];
            }
        }
        out
    }

    /// Perpendicular spacing between lattice planes normal to each axis
    /// (volume over the area of the opposing face). Bounds how many periodic
    /// images a distance search must visit.
    pub fn plane_spacings(&self) -> [f64; 3] {
        let m = self.cell_vectors();
        let vol = self.volume();
        let areas = [
            cross_norm(m[1], m[2]),
            cross_norm(m[2], m[0]),
            cross_norm(m[0], m[1]),
        ];
        [vol / areas[0], vol / areas[1], vol / areas[2]]
    }
}

/// Cosine in degrees, exact at the crystallographic special angles so that
/// right-angled cells produce bit-exact Cartesian frames.
pub(crate) fn cos_deg(deg: f64) -> f64 {
    if deg == 90.0 {
        0.0
    } else if deg == 120.0 {
        -0.5
    } else if deg == 60.0 {
        0.5
    } else {
        deg.to_radians().cos()
    }
}

pub(crate) fn sin_deg(deg: f64) -> f64 {
    if deg == 90.0 {
        1.0
    } else {
        deg.to_radians().sin()
    }
}

fn cross_norm(u: [f64; 3], v: [f64; 3]) -> f64 {
    let c = [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ];
    (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt()
}
