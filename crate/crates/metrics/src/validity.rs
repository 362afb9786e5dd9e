use crysflow_reward::composition_term;
use crysflow_xtal::{periodic_min_distance, CrystalStructure};

/// Structures with any interatomic distance at or below this are invalid, in
/// angstroms. The criterion is strict: exactly 0.5 fails.
pub const MIN_INTERATOMIC_DISTANCE: f64 = 0.5;

/// True iff every periodic pairwise distance (self-images included) exceeds
/// the threshold.
pub fn structure_validity(s: &CrystalStructure) -> bool {
    if s.is_empty() {
        return false;
    }
    for i in 0..s.len() {
        for j in i..s.len() {
            match periodic_min_distance(s, i, j) {
                Ok(d) => {
                    if d <= MIN_INTERATOMIC_DISTANCE {
                        return false;
                    }
                }
                Err(_) => return false,
            }
        }
    }
    true
}

/// Charge neutrality of the composition, shared with the reward term.
pub fn composition_validity(s: &CrystalStructure) -> bool {
    composition_term(s).0 == 1
}
