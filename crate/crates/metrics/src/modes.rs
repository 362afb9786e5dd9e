use std::collections::BTreeSet;

use crysflow_xtal::CrystalStructure;

use crate::validity::{composition_validity, structure_validity};

/// Running unique-mode counter over a stream of terminal structures.
///
/// A structure counts as a new mode when it is structure-valid (minimum
/// interatomic distance), composition-valid (charge neutral), has negative
/// formation energy, and its reduced composition has not been counted before.
#[derive(Debug, Default, Clone)]
pub struct ModeRegistry {
    seen_compositions: BTreeSet<String>,
    modes: usize,
    offered: usize,
}

impl ModeRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Offer one terminal structure with its (clamped) formation energy per
    /// atom; returns true when it was counted as a new mode.
    pub fn offer(&mut self, s: &CrystalStructure, energy_per_atom: f64) -> bool {
        self.offered += 1;
        if energy_per_atom >= 0.0 {
            return false;
        }
        if !structure_validity(s) || !composition_validity(s) {
            return false;
        }
        let formula = s.reduced_formula();
        if self.seen_compositions.contains(&formula) {
            return false;
        }
        self.seen_compositions.insert(formula);
        self.modes += 1;
        true
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn offered(&self) -> usize {
        self.offered
    }
}
