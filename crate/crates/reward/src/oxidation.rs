//! Charge-neutrality screening over embedded common oxidation states.

use crysflow_xtal::CrystalStructure;

/// Compositions larger than this (after formula reduction) are not searched;
/// the dynamic program over charge sums is bounded to keep scoring cheap.
pub const MAX_NEUTRALITY_ATOMS: usize = 20;

const MAX_ABS_STATE: i32 = 8;

/// Common oxidation states per element, indexed by atomic number 1..=94.
/// Empty slices mark elements without tabulated states (noble gases).
pub fn oxidation_states(z: u8) -> &'static [i32] {
    OXIDATION[z as usize - 1]
}

#[rustfmt::skip]
static OXIDATION: [&[i32]; 94] = [
    /* H  */ &[-1, 1],
    /* He */ &[],
    /* Li */ &[1],
    /* Be */ &[2],
    /* B  */ &[3],
    /* C  */ &[-4, -3, -2, -1, 1, 2, 3, 4],
    /* N  */ &[-3, -2, -1, 1, 2, 3, 4, 5],
    /* O  */ &[-2, -1],
    /* F  */ &[-1],
    /* Ne */ &[],
    /* Na */ &[1],
    /* Mg */ &[2],
    /* Al */ &[3],
    /* Si */ &[-4, 4],
    /* P  */ &[-3, 3, 5],
    /* S  */ &[-2, 2, 4, 6],
    /* Cl */ &[-1, 1, 3, 5, 7],
    /* Ar */ &[],
    /* K  */ &[1],
    /* Ca */ &[2],
    /* Sc */ &[3],
    /* Ti */ &[2, 3, 4],
    /* V  */ &[2, 3, 4, 5],
    /* Cr */ &[2, 3, 6],
    /* Mn */ &[2, 3, 4, 6, 7],
    /* Fe */ &[2, 3],
    /* Co */ &[2, 3],
    /* Ni */ &[2],
    /* Cu */ &[1, 2],
    /* Zn */ &[2],
    /* Ga */ &[3],
    /* Ge */ &[-4, 2, 4],
    /* As */ &[-3, 3, 5],
    /* Se */ &[-2, 2, 4, 6],
    /* Br */ &[-1, 1, 3, 5],
    /* Kr */ &[],
    /* Rb */ &[1],
    /* Sr */ &[2],
    /* Y  */ &[3],
    /* Zr */ &[4],
    /* Nb */ &[3, 5],
    /* Mo */ &[2, 3, 4, 5, 6],
    /* Tc */ &[4, 7],
    /* Ru */ &[2, 3, 4],
    /* Rh */ &[3],
    /* Pd */ &[2, 4],
    /* Ag */ &[1],
    /* Cd */ &[2],
    /* In */ &[1, 3],
    /* Sn */ &[-4, 2, 4],
    /* Sb */ &[-3, 3, 5],
    /* Te */ &[-2, 2, 4, 6],
    /* I  */ &[-1, 1, 3, 5, 7],
    /* Xe */ &[],
    /* Cs */ &[1],
    /* Ba */ &[2],
    /* La */ &[3],
    /* Ce */ &[3, 4],
    /* Pr */ &[3],
    /* Nd */ &[3],
    /* Pm */ &[3],
    /* Sm */ &[2, 3],
    /* Eu */ &[2, 3],
    /* Gd */ &[3],
    /* Tb */ &[3, 4],
    /* Dy */ &[3],
    /* Ho */ &[3],
    /* Er */ &[3],
    /* Tm */ &[3],
    /* Yb */ &[2, 3],
    /* Lu */ &[3],
    /* Hf */ &[4],
    /* Ta */ &[5],
    /* W  */ &[2, 3, 4, 5, 6],
    /* Re */ &[2, 4, 6, 7],
    /* Os */ &[2, 3, 4, 6, 8],
    /* Ir */ &[2, 3, 4],
    /* Pt */ &[2, 4],
    /* Au */ &[1, 3],
    /* Hg */ &[1, 2],
    /* Tl */ &[1, 3],
    /* Pb */ &[2, 4],
    /* Bi */ &[3, 5],
    /* Po */ &[-2, 2, 4],
    /* At */ &[-1, 1],
    /* Rn */ &[],
    /* Fr */ &[1],
    /* Ra */ &[2],
    /* Ac */ &[3],
    /* Th */ &[4],
    /* Pa */ &[4, 5],
    /* U  */ &[3, 4, 5, 6],
    /* Np */ &[3, 4, 5, 6],
    /* Pu */ &[3, 4, 5, 6],
];

/// 1 if some per-atom assignment of allowed oxidation states over the reduced
/// composition sums to zero, else 0; a missing-data or size-bound fallout is
/// reported through the flag.
///
/// Single-element compositions count as neutral (the elemental-solid case).
pub fn composition_term(s: &CrystalStructure) -> (u8, Option<String>) {
    let comp = s.reduced_composition();
    if comp.is_empty() {
        return (0, Some("empty structure".into()));
    }
    if comp.len() == 1 {
        return (1, None);
    }
    for (&z, _) in &comp {
        if oxidation_states(z).is_empty() {
            return (
                0,
                Some(format!(
                    "no oxidation states for {}",
                    crysflow_xtal::element(z).symbol
                )),
            );
        }
    }
    let total: usize = comp.values().sum();
    if total > MAX_NEUTRALITY_ATOMS {
        return (0, Some(format!("composition of {total} atoms exceeds search bound")));
    }

    // dynamic program over reachable charge sums, one atom at a time
    let bound = (total as i32) * MAX_ABS_STATE;
    let offset = bound;
    let width = (2 * bound + 1) as usize;
    let mut reachable = vec![false; width];
    reachable[offset as usize] = true;
    for (&z, &count) in &comp {
        let states = oxidation_states(z);
        for _ in 0..count {
            let mut next = vec![false; width];
            for (idx, ok) in reachable.iter().enumerate() {
                if !ok {
                    continue;
                }
                let sum = idx as i32 - offset;
                for &st in states {
                    let ns = sum + st;
                    if ns.abs() <= bound {
                        next[(ns + offset) as usize] = true;
                    }
                }
            }
            reachable = next;
        }
    }
    (u8::from(reachable[offset as usize]), None)
}
