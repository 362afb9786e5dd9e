//! Lossless JSON mirror of a structure:
//! `{"lattice":{"a":..,"b":..,"c":..,"alpha":..,"beta":..,"gamma":..},
//!   "atoms":[{"z":8,"frac":[x,y,z]}, ...]}`

use serde::{Deserialize, Serialize};

use crate::{Atom, CrystalStructure, Lattice, Result, XtalError};

#[derive(Serialize, Deserialize)]
struct Mirror {
    lattice: Lattice,
    atoms: Vec<Atom>,
}

pub fn structure_to_json(s: &CrystalStructure) -> String {
    let m = Mirror { lattice: s.lattice, atoms: s.atoms.clone() };
    serde_json::to_string_pretty(&m).expect("structure serialization cannot fail")
}

pub fn structure_from_json(text: &str) -> Result<CrystalStructure> {
    let m: Mirror = serde_json::from_str(text).map_err(|e| XtalError::Json(e.to_string()))?;
    CrystalStructure::new(m.lattice, m.atoms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_roundtrip_is_exact() {
        let s = CrystalStructure::new(
            Lattice::new(4.1, 5.2, 6.3, 88.0, 92.5, 101.0).unwrap(),
            vec![Atom::new(3, [0.123456789012345, 0.5, 0.25]).unwrap()],
        )
        .unwrap();
        let parsed = structure_from_json(&structure_to_json(&s)).unwrap();
        assert_eq!(parsed, s);
    }

    #[test]
    fn invalid_json_is_reported() {
        assert!(structure_from_json("{\"nope\":1}").is_err());
    }
}
