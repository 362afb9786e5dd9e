use std::collections::BTreeSet;

use crysflow_spacegroup::group_ops;
use crysflow_xtal::{build_graph, CrystalGraph, CrystalStructure, Lattice};
use serde::{Deserialize, Serialize};

use crate::{Result, TrainerError};

/// Hierarchical versus flat (single-level, no symmetry replication) sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyMode {
    Hierarchical,
    Flat,
}

/// Mutual-exclusion groups over element choices, e.g. allow at most one of
/// the alkali metals in a composition.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CompositionConstraint {
    pub at_most_one_of: Vec<Vec<u8>>,
}

impl CompositionConstraint {
    /// Battery-material setting: one alkali species per structure.
    pub fn one_alkali() -> Self {
        CompositionConstraint { at_most_one_of: vec![vec![3, 11, 19]] }
    }

    /// Which element-set entries may be sampled given the elements already
    /// present among the reference atoms.
    pub fn allowed(&self, element_set: &[u8], present: &BTreeSet<u8>) -> Vec<bool> {
        element_set
            .iter()
            .map(|z| {
                for group in &self.at_most_one_of {
                    if group.contains(z) {
                        let taken = group.iter().any(|g| present.contains(g) && g != z);
                        if taken {
                            return false;
                        }
                    }
                }
                true
            })
            .collect()
    }
}

/// Sampler bounds and limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// reference atoms placed per trajectory
    pub steps: usize,
    /// lattice length bounds, angstrom
    pub min_length: f64,
    pub max_length: f64,
    /// lattice angle bounds, degrees
    pub min_angle: f64,
    pub max_angle: f64,
    /// expanded structures above this atom count are rejected and resampled
    pub max_atoms: usize,
    /// rejection-resampling bound per trajectory
    pub max_retries: usize,
    pub mode: PolicyMode,
    pub constraint: CompositionConstraint,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            steps: 3,
            min_length: 2.0,
            max_length: 12.0,
            min_angle: 60.0,
            max_angle: 120.0,
            max_atoms: 96,
            max_retries: 1000,
            mode: PolicyMode::Hierarchical,
            constraint: CompositionConstraint::one_alkali(),
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(TrainerError::BadConfig("steps must be at least 1".into()));
        }
        if !(self.min_length < self.max_length) {
            return Err(TrainerError::BadConfig(format!(
                "length bounds [{}, {}]",
                self.min_length, self.max_length
            )));
        }
        if !(self.min_angle < self.max_angle) {
            return Err(TrainerError::BadConfig(format!(
                "angle bounds [{}, {}]",
                self.min_angle, self.max_angle
            )));
        }
        if !(self.min_length > 0.0 && self.min_angle > 0.0 && self.max_angle < 180.0) {
            return Err(TrainerError::BadConfig("bounds outside physical ranges".into()));
        }
        if self.max_atoms == 0 || self.max_retries == 0 {
            return Err(TrainerError::BadConfig("max_atoms and max_retries must be positive".into()));
        }
        Ok(())
    }

    pub fn length_width(&self) -> f64 {
        self.max_length - self.min_length
    }

    pub fn angle_width(&self) -> f64 {
        self.max_angle - self.min_angle
    }
}

/// One sampler state: the chosen space group, a lattice satisfying its
/// constraint, the reference atoms, and the expanded structure/graph cache.
#[derive(Debug, Clone)]
pub struct CrystalState {
    pub space_group: u16,
    pub lattice: Lattice,
    pub reference_atoms: Vec<(u8, [f64; 3])>,
    /// expanded structure (hierarchical) or the bare reference atoms (flat)
    pub structure: CrystalStructure,
    pub graph: CrystalGraph,
}

impl CrystalState {
    /// The fixed source state: space group 1, a 4 A cube, no atoms.
    pub fn initial() -> Self {
        let lattice = Lattice::cubic(4.0).expect("valid initial lattice");
        CrystalState {
            space_group: 1,
            lattice,
            reference_atoms: Vec::new(),
            structure: CrystalStructure::new(lattice, vec![]).expect("empty structure"),
            graph: CrystalGraph::empty(),
        }
    }

    pub fn present_elements(&self) -> BTreeSet<u8> {
        self.reference_atoms.iter().map(|(z, _)| *z).collect()
    }

    /// Rebuild the structure/graph caches for the current group, lattice, and
    /// reference atoms. Hierarchical states expand the reference atoms over
    /// the group's orbits; flat states keep them as-is.
    pub fn rebuild(
        &mut self,
        mode: PolicyMode,
        max_atoms: usize,
        graph_cutoff: f64,
        graph_max_neighbors: usize,
    ) -> Result<()> {
        let structure = match mode {
            PolicyMode::Hierarchical => {
                let group = group_ops(self.space_group)?;
                crysflow_spacegroup::expand_structure(&self.reference_atoms, group, &self.lattice)
                    .map_err(|e| TrainerError::Rejected(e.to_string()))?
            }
            PolicyMode::Flat => {
                let atoms = self
                    .reference_atoms
                    .iter()
                    .map(|&(z, frac)| crysflow_xtal::Atom::new(z, frac))
                    .collect::<crysflow_xtal::Result<Vec<_>>>()?;
                CrystalStructure::new(self.lattice, atoms)?
            }
        };
        if structure.len() > max_atoms {
            return Err(TrainerError::Rejected(format!(
                "expanded to {} atoms, cap is {max_atoms}",
                structure.len()
            )));
        }
        self.graph = build_graph(&structure, graph_cutoff, graph_max_neighbors)?;
        self.structure = structure;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_state_matches_the_source_definition() {
        let s = CrystalState::initial();
        assert_eq!(s.space_group, 1);
        assert_eq!(s.lattice, Lattice::cubic(4.0).unwrap());
        assert!(s.reference_atoms.is_empty());
        assert!(s.graph.nodes.is_empty());
    }

    #[test]
    fn alkali_exclusion_masks_other_alkalis() {
        let constraint = CompositionConstraint::one_alkali();
        let elements = [3u8, 11, 19, 8];
        let mut present = BTreeSet::new();
        assert_eq!(constraint.allowed(&elements, &present), vec![true; 4]);
        present.insert(11); // Na present
        assert_eq!(
            constraint.allowed(&elements, &present),
            vec![false, true, false, true]
        );
    }

    #[test]
    fn config_validation_catches_inverted_bounds() {
        let mut cfg = SamplerConfig::default();
        cfg.min_length = 13.0;
        assert!(cfg.validate().is_err());
        let mut cfg = SamplerConfig::default();
        cfg.steps = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn hierarchical_rebuild_expands_orbits() {
        let mut s = CrystalState::initial();
        s.space_group = 131;
        s.lattice = crysflow_spacegroup::group_ops(131)
            .unwrap()
            .constraint()
            .project(&s.lattice);
        s.reference_atoms.push((8, [0.0, 0.0, 0.0]));
        s.rebuild(PolicyMode::Hierarchical, 20, 8.0, 12).unwrap();
        assert_eq!(s.structure.len(), 2);
        let mut flat = s.clone();
        flat.rebuild(PolicyMode::Flat, 20, 8.0, 12).unwrap();
        assert_eq!(flat.structure.len(), 1);
    }

    #[test]
    fn atom_cap_rejects_large_expansions() {
        let mut s = CrystalState::initial();
        s.space_group = 225;
        s.lattice = crysflow_spacegroup::group_ops(225)
            .unwrap()
            .constraint()
            .project(&s.lattice);
        s.reference_atoms.push((8, [0.123, 0.456, 0.789]));
        // general position of Fm-3m has 192 images
        assert!(matches!(
            s.rebuild(PolicyMode::Hierarchical, 20, 8.0, 12),
            Err(TrainerError::Rejected(_))
        ));
    }
}
