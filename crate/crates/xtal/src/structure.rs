use serde::{Deserialize, Serialize};

use crate::elements::{element, MAX_Z};
use crate::{Lattice, Result, XtalError, DENSITY_CONV};

/// One site: atomic number and fractional coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub z: u8,
    pub frac: [f64; 3],
}

impl Atom {
    pub fn new(z: u8, frac: [f64; 3]) -> Result<Self> {
        if !(1..=MAX_Z).contains(&z) {
            return Err(XtalError::BadAtom(format!("atomic number {z}")));
        }
        if frac.iter().any(|v| !v.is_finite()) {
            return Err(XtalError::BadAtom(format!("non-finite coordinate {frac:?}")));
        }
        Ok(Atom { z, frac: reduce_mod1(frac) })
    }

    pub fn symbol(&self) -> &'static str {
        element(self.z).symbol
    }
}

pub(crate) fn reduce_mod1(f: [f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (o, v) in out.iter_mut().zip(f) {
        let r = v.rem_euclid(1.0);
        // rem_euclid can return exactly 1.0 for tiny negative inputs
        *o = if r >= 1.0 { 0.0 } else { r };
    }
    out
}

/// A periodic crystal: lattice plus an ordered atom list with fractional
/// coordinates reduced into [0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct CrystalStructure {
    pub lattice: Lattice,
    pub atoms: Vec<Atom>,
}

impl CrystalStructure {
    pub fn new(lattice: Lattice, atoms: Vec<Atom>) -> Result<Self> {
        lattice.validate()?;
        let atoms = atoms
            .into_iter()
            .map(|a| Atom::new(a.z, a.frac))
            .collect::<Result<Vec<_>>>()?;
        Ok(CrystalStructure { lattice, atoms })
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Element -> count map of the cell contents.
    pub fn composition(&self) -> std::collections::BTreeMap<u8, usize> {
        let mut out = std::collections::BTreeMap::new();
        for a in &self.atoms {
            *out.entry(a.z).or_insert(0) += 1;
        }
        out
    }

    /// Composition with counts divided by their gcd, e.g. Na2Cl2 -> NaCl.
    pub fn reduced_composition(&self) -> std::collections::BTreeMap<u8, usize> {
        let comp = self.composition();
        let g = comp.values().fold(0usize, |acc, &c| gcd(acc, c));
        if g <= 1 {
            return comp;
        }
        comp.into_iter().map(|(z, c)| (z, c / g)).collect()
    }

    /// Formula string of the reduced composition, ordered by atomic number.
    pub fn reduced_formula(&self) -> String {
        let mut s = String::new();
        for (z, count) in self.reduced_composition() {
            s.push_str(element(z).symbol);
            if count > 1 {
                s.push_str(&count.to_string());
            }
        }
        s
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// Unit cell mass over volume, in g/cm^3.
pub fn density(s: &CrystalStructure) -> Result<f64> {
    if s.is_empty() {
        return Err(XtalError::EmptyStructure);
    }
    let vol = s.lattice.volume();
    if vol <= 0.0 {
        return Err(XtalError::BadLattice("zero cell volume".into()));
    }
    let mass: f64 = s.atoms.iter().map(|a| element(a.z).mass).sum();
    Ok(mass * DENSITY_CONV / vol)
}
