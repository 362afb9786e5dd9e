use crysflow_xtal::{element, Atom, CrystalStructure, Lattice};

use crate::group::SpaceGroup;
use crate::{Result, SpacegroupError};

/// Default deduplication tolerance for orbit points, fractional.
pub const ORBIT_DEDUP_TOL: f64 = 1e-6;
/// Tolerance below which expanded images of different reference atoms are
/// considered the same site, fractional.
pub const MERGE_TOL: f64 = 1e-3;

/// A crystallographic orbit: the distinct images of a point under every
/// operation of a group.
#[derive(Debug, Clone)]
pub struct Orbit {
    pub representative: [f64; 3],
    pub points: Vec<[f64; 3]>,
}

impl Orbit {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Shortest wrapped fractional displacement between two coordinates.
fn frac_distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    let mut acc = 0.0;
    for k in 0..3 {
        let mut d = (a[k] - b[k]).rem_euclid(1.0);
        if d > 0.5 {
            d = 1.0 - d;
        }
        acc += d * d;
    }
    acc.sqrt()
}

/// All distinct images of `x` under the group, deduplicated at `tol`
/// (fractional). Points are kept in first-seen op order.
pub fn orbit(group: &SpaceGroup, x: [f64; 3], tol: f64) -> Orbit {
    let mut points: Vec<[f64; 3]> = Vec::new();
    for op in group.ops() {
        let img = op.apply(x);
        if !points.iter().any(|p| frac_distance(*p, img) < tol) {
            points.push(img);
        }
    }
    Orbit { representative: x, points }
}

/// Expand reference atoms into a full structure: the union of their orbits
/// under `group`, with coincident images merged when the element matches and
/// rejected when it does not.
///
/// The lattice must already satisfy the group's constraint exactly.
pub fn expand_structure(
    reference_atoms: &[(u8, [f64; 3])],
    group: &SpaceGroup,
    lattice: &Lattice,
) -> Result<CrystalStructure> {
    if !group.constraint().satisfied_by(lattice) {
        return Err(SpacegroupError::UnprojectedLattice {
            number: group.number,
            detail: format!(
                "({}, {}, {}, {}, {}, {}) violates the {} constraint",
                lattice.a,
                lattice.b,
                lattice.c,
                lattice.alpha,
                lattice.beta,
                lattice.gamma,
                group.family.name()
            ),
        });
    }
    let mut accepted: Vec<(u8, [f64; 3])> = Vec::new();
    for &(z, frac) in reference_atoms {
        for img in orbit(group, frac, ORBIT_DEDUP_TOL).points {
            let mut duplicate = false;
            for &(az, af) in &accepted {
                if frac_distance(af, img) < MERGE_TOL {
                    if az == z {
                        duplicate = true;
                        break;
                    }
                    return Err(SpacegroupError::Collision {
                        symbol_a: element(az).symbol,
                        symbol_b: element(z).symbol,
                        x: img[0],
                        y: img[1],
                        z: img[2],
                    });
                }
            }
            if !duplicate {
                accepted.push((z, img));
            }
        }
    }
    let atoms = accepted
        .into_iter()
        .map(|(z, frac)| Atom::new(z, frac))
        .collect::<crysflow_xtal::Result<Vec<_>>>()?;
    Ok(CrystalStructure::new(*lattice, atoms)?)
}
