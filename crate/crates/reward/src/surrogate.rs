//! Builtin pair-potential energy surrogate.
//!
//! Stands in for an external learned energy model: a shifted Morse potential
//! per unordered neighbor pair, with the well at the pair's empirical average
//! bond distance and the depth scaled by electronegativity difference,
//! normalized per atom and clamped. Deterministic by construction.

use crysflow_xtal::{element, neighbor_list, CrystalStructure};

use crate::bond::BondStatsTable;
use crate::oracle::{EnergyOracle, OracleError};
use crate::ENERGY_CLAMP;

/// Interaction range; pairs beyond it contribute nothing, so an isolated
/// atom scores exactly 0 eV/atom.
pub const SURROGATE_CUTOFF: f64 = 6.0;
const BASE_DEPTH: f64 = 0.5;
/// The repulsive branch is this much steeper than the attractive one, so a
/// single pair squeezed under its empirical minimum distance dominates the
/// whole cell's energy instead of hiding behind per-atom averaging.
const REPULSIVE_STEEPNESS: f64 = 2.0;

#[derive(Debug, Clone)]
pub struct SurrogatePotential {
    stats: BondStatsTable,
}

impl SurrogatePotential {
    pub fn new(stats: BondStatsTable) -> Self {
        SurrogatePotential { stats }
    }

    pub fn with_default_stats() -> Self {
        SurrogatePotential { stats: BondStatsTable::default_table() }
    }

    /// Energy per atom plus the number of pairs skipped for lack of bond
    /// statistics (those contribute 0 and are worth surfacing to callers).
    pub fn evaluate(&self, s: &CrystalStructure) -> crate::Result<(f64, usize)> {
        if s.is_empty() {
            return Err(crate::RewardError::EmptyStructure);
        }
        let lists = neighbor_list(s, SURROGATE_CUTOFF, None)?;
        let mut total = 0.0;
        let mut skipped = 0usize;
        for (i, nbrs) in lists.iter().enumerate() {
            for n in nbrs {
                match self.stats.get(s.atoms[i].z, s.atoms[n.atom].z) {
                    Some((d_min, d_avg)) => {
                        let depth = BASE_DEPTH
                            * (1.0
                                + (element(s.atoms[i].z).electronegativity
                                    - element(s.atoms[n.atom].z).electronegativity)
                                    .abs());
                        // width scaled so the attractive branch reaches one
                        // e-folding at the observed minimum distance; the
                        // repulsive branch is steeper
                        let width = if d_avg > d_min { 1.0 / (d_avg - d_min) } else { 1.5 };
                        total += 0.5 * pair_energy(n.distance, d_avg, depth, width);
                    }
                    None => skipped += 1,
                }
            }
        }
        let per_atom = total / s.len() as f64;
        Ok((per_atom.clamp(-ENERGY_CLAMP, ENERGY_CLAMP), skipped / 2))
    }
}

/// Asymmetric Morse well: minimum of `-depth` exactly at `d_eq`, an
/// attractive branch shifted to zero at the cutoff, and a repulsive branch
/// steepened by `REPULSIVE_STEEPNESS`. Both branches meet at the minimum, so
/// the potential is continuous and the constant shift cannot move it.
fn pair_energy(d: f64, d_eq: f64, depth: f64, width: f64) -> f64 {
    if d >= SURROGATE_CUTOFF {
        return 0.0;
    }
    let w = if d < d_eq { REPULSIVE_STEEPNESS * width } else { width };
    morse(d, d_eq, depth, w) - morse(SURROGATE_CUTOFF, d_eq, depth, width)
}

fn morse(d: f64, d_eq: f64, depth: f64, width: f64) -> f64 {
    let e = (-width * (d - d_eq)).exp();
    depth * ((1.0 - e) * (1.0 - e) - 1.0)
}

impl EnergyOracle for SurrogatePotential {
    fn formation_energy(&self, s: &CrystalStructure) -> Result<f64, OracleError> {
        self.evaluate(s)
            .map(|(e, _)| e)
            .map_err(|e| OracleError::Process(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crysflow_xtal::{Atom, Lattice};

    fn li_o_at(distance: f64) -> CrystalStructure {
        // 20 A box: only the single in-cell pair is inside the cutoff
        CrystalStructure::new(
            Lattice::cubic(20.0).unwrap(),
            vec![
                Atom::new(3, [0.0; 3]).unwrap(),
                Atom::new(8, [0.0, 0.0, distance / 20.0]).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn isolated_atom_scores_zero() {
        let s = CrystalStructure::new(
            Lattice::cubic(20.0).unwrap(),
            vec![Atom::new(8, [0.0; 3]).unwrap()],
        )
        .unwrap();
        let (e, _) = SurrogatePotential::with_default_stats().evaluate(&s).unwrap();
        assert_eq!(e, 0.0);
    }

    #[test]
    fn equilibrium_is_the_radial_minimum() {
        // 1-D scan over the pair distance: the minimum must sit at d_avg
        let surrogate = SurrogatePotential::with_default_stats();
        let d_avg = 3.02;
        let (e_eq, _) = surrogate.evaluate(&li_o_at(d_avg)).unwrap();
        let mut best = f64::INFINITY;
        let mut best_d = 0.0;
        let mut d = 1.0;
        while d < 5.5 {
            let (e, _) = surrogate.evaluate(&li_o_at(d)).unwrap();
            if e < best {
                best = e;
                best_d = d;
            }
            d += 0.01;
        }
        assert!(e_eq <= best + 1e-9, "scan found {best} at {best_d}, eq gives {e_eq}");
        assert!((best_d - d_avg).abs() < 0.02, "minimum at {best_d}, expected {d_avg}");
        assert!(e_eq < 0.0);
    }

    #[test]
    fn compression_below_dmin_raises_energy() {
        let surrogate = SurrogatePotential::with_default_stats();
        let (e_at_min, _) = surrogate.evaluate(&li_o_at(1.63)).unwrap();
        for d in [1.4, 1.2, 1.0, 0.8] {
            let (e, _) = surrogate.evaluate(&li_o_at(d)).unwrap();
            assert!(e > e_at_min, "E({d}) = {e} not above E(1.63) = {e_at_min}");
        }
    }

    #[test]
    fn missing_pair_is_neutral_and_counted() {
        let s = CrystalStructure::new(
            Lattice::cubic(20.0).unwrap(),
            vec![
                Atom::new(26, [0.0; 3]).unwrap(),
                Atom::new(26, [0.0, 0.0, 0.15]).unwrap(),
            ],
        )
        .unwrap();
        let (e, skipped) = SurrogatePotential::with_default_stats().evaluate(&s).unwrap();
        assert_eq!(e, 0.0);
        assert_eq!(skipped, 1);
    }

    #[test]
    fn deterministic_across_calls() {
        let surrogate = SurrogatePotential::with_default_stats();
        let s = li_o_at(2.5);
        let a = surrogate.evaluate(&s).unwrap();
        let b = surrogate.evaluate(&s).unwrap();
        assert_eq!(a, b);
    }
}
