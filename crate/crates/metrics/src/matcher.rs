use crysflow_xtal::CrystalStructure;

/// Structure-matching tolerances: angles in degrees, lengths as a relative
/// ratio, sites as a fraction of the per-atom length scale (V/n)^(1/3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchTolerances {
    pub angle_tol: f64,
    pub length_tol: f64,
    pub site_tol: f64,
}

impl Default for MatchTolerances {
    fn default() -> Self {
        MatchTolerances { angle_tol: 10.0, length_tol: 1.0, site_tol: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchOutcome {
    pub matched: bool,
    /// rms site displacement normalized by (V/n)^(1/3), present when the site
    /// assignment succeeded
    pub rms: Option<f64>,
}

/// Heuristic periodic structure matcher.
///
/// Two structures match when their reduced compositions and atom counts
/// agree, lattice angles agree within `angle_tol`, volume-normalized lengths
/// agree within `length_tol` (relative), and some common fractional
/// translation maps every site of `a` onto a distinct same-element site of
/// `b` within `site_tol` x (V/n)^(1/3). Candidate translations are all site
/// pairs of the least-frequent element species (exact for identical
/// structures, heuristic otherwise); the assignment per candidate is greedy
/// nearest-neighbor and the candidate with the smallest maximum displacement
/// wins.
pub fn match_structures(
    a: &CrystalStructure,
    b: &CrystalStructure,
    tol: &MatchTolerances,
) -> MatchOutcome {
    if a.is_empty() || b.is_empty() {
        return MatchOutcome { matched: false, rms: None };
    }
    if a.len() != b.len() || a.reduced_composition() != b.reduced_composition() {
        return MatchOutcome { matched: false, rms: None };
    }
    let (la, lb) = (&a.lattice, &b.lattice);
    if (la.alpha - lb.alpha).abs() > tol.angle_tol
        || (la.beta - lb.beta).abs() > tol.angle_tol
        || (la.gamma - lb.gamma).abs() > tol.angle_tol
    {
        return MatchOutcome { matched: false, rms: None };
    }
    let (va, vb) = (la.volume().cbrt(), lb.volume().cbrt());
    for (x, y) in [(la.a, lb.a), (la.b, lb.b), (la.c, lb.c)] {
        let ratio = (x / va) / (y / vb);
        if (ratio - 1.0).abs() > tol.length_tol {
            return MatchOutcome { matched: false, rms: None };
        }
    }

    // pick the least-frequent species of `a` for translation candidates
    let comp = a.composition();
    let probe_z = comp
        .iter()
        .min_by_key(|(_, &count)| count)
        .map(|(&z, _)| z)
        .expect("non-empty");
    let mut candidates: Vec<[f64; 3]> = Vec::new();
    for sa in a.atoms.iter().filter(|at| at.z == probe_z) {
        for sb in b.atoms.iter().filter(|at| at.z == probe_z) {
            candidates.push([
                sb.frac[0] - sa.frac[0],
                sb.frac[1] - sa.frac[1],
                sb.frac[2] - sa.frac[2],
            ]);
        }
    }
    let scale = (lb.volume() / b.len() as f64).cbrt();
    let threshold = tol.site_tol * scale;
    let mut best: Option<(f64, f64)> = None; // (max displacement, rms)
    for t in candidates {
        if let Some((max_d, rms)) = assign(a, b, t) {
            let better = match best {
                Some((bm, _)) => max_d < bm,
                None => true,
            };
            if better {
                best = Some((max_d, rms));
            }
        }
    }
    match best {
        Some((max_d, rms)) if max_d <= threshold => {
            MatchOutcome { matched: true, rms: Some(rms / scale) }
        }
        Some((_, _)) => MatchOutcome { matched: false, rms: None },
        None => MatchOutcome { matched: false, rms: None },
    }
}

/// Greedy same-element assignment of `a`'s sites (shifted by `t`) onto `b`'s;
/// returns (max displacement, rms displacement) in angstroms, or None if some
/// site has no same-element partner left.
fn assign(a: &CrystalStructure, b: &CrystalStructure, t: [f64; 3]) -> Option<(f64, f64)> {
    let mut used = vec![false; b.len()];
    let mut max_d: f64 = 0.0;
    let mut sum_sq = 0.0;
    for sa in &a.atoms {
        let target = [sa.frac[0] + t[0], sa.frac[1] + t[1], sa.frac[2] + t[2]];
        let mut best: Option<(usize, f64)> = None;
        for (j, sb) in b.atoms.iter().enumerate() {
            if used[j] || sb.z != sa.z {
                continue;
            }
            let d = wrapped_cart_distance(&b.lattice, target, sb.frac);
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        let (j, d) = best?;
        used[j] = true;
        max_d = max_d.max(d);
        sum_sq += d * d;
    }
    Some((max_d, (sum_sq / a.len() as f64).sqrt()))
}

fn wrapped_cart_distance(
    lattice: &crysflow_xtal::Lattice,
    fa: [f64; 3],
    fb: [f64; 3],
) -> f64 {
    let mut df = [0.0; 3];
    for k in 0..3 {
        let mut d = (fb[k] - fa[k]).rem_euclid(1.0);
        if d > 0.5 {
            d -= 1.0;
        }
        df[k] = d;
    }
    let c = lattice.frac_to_cart(df);
    (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crysflow_xtal::{Atom, Lattice};

    fn nacl() -> CrystalStructure {
        CrystalStructure::new(
            Lattice::cubic(5.64).unwrap(),
            vec![
                Atom::new(11, [0.0; 3]).unwrap(),
                Atom::new(11, [0.5, 0.5, 0.0]).unwrap(),
                Atom::new(17, [0.5, 0.0, 0.0]).unwrap(),
                Atom::new(17, [0.0, 0.5, 0.0]).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn identity_matches_with_zero_rms() {
        let s = nacl();
        let m = match_structures(&s, &s, &MatchTolerances::default());
        assert!(m.matched);
        assert_eq!(m.rms, Some(0.0));
    }

    #[test]
    fn rigid_translation_matches_with_zero_rms() {
        let s = nacl();
        let shifted = CrystalStructure::new(
            s.lattice,
            s.atoms
                .iter()
                .map(|a| {
                    Atom::new(a.z, [a.frac[0] + 0.3, a.frac[1] + 0.3, a.frac[2] + 0.3]).unwrap()
                })
                .collect(),
        )
        .unwrap();
        let m = match_structures(&s, &shifted, &MatchTolerances::default());
        assert!(m.matched);
        assert!(m.rms.unwrap() < 1e-12);
    }

    #[test]
    fn small_perturbation_matches_with_hand_computed_rms() {
        let s = nacl();
        let mut atoms = s.atoms.clone();
        atoms[2] = Atom::new(17, [0.505, 0.0, 0.0]).unwrap();
        let perturbed = CrystalStructure::new(s.lattice, atoms).unwrap();
        let m = match_structures(&s, &perturbed, &MatchTolerances::default());
        assert!(m.matched);
        // displacement 0.005 * 5.64 A on one of four sites
        let d: f64 = 0.005 * 5.64;
        let expected_rms = (d * d / 4.0).sqrt();
        let scale = (s.lattice.volume() / 4.0).cbrt();
        assert!((m.rms.unwrap() - expected_rms / scale).abs() < 1e-9);
    }

    #[test]
    fn composition_mismatch_never_matches() {
        let s = nacl();
        let kcl = CrystalStructure::new(
            s.lattice,
            s.atoms
                .iter()
                .map(|a| Atom::new(if a.z == 11 { 19 } else { 17 }, a.frac).unwrap())
                .collect(),
        )
        .unwrap();
        assert!(!match_structures(&s, &kcl, &MatchTolerances::default()).matched);
    }

    #[test]
    fn angle_violation_fails() {
        let s = nacl();
        let sheared = CrystalStructure::new(
            Lattice::new(5.64, 5.64, 5.64, 90.0, 90.0, 75.0).unwrap(),
            s.atoms.clone(),
        )
        .unwrap();
        let tol = MatchTolerances { angle_tol: 10.0, ..Default::default() };
        assert!(!match_structures(&s, &sheared, &tol).matched);
    }

    #[test]
    fn matching_is_symmetric_on_a_perturbed_pair() {
        let s = nacl();
        let mut atoms = s.atoms.clone();
        atoms[1] = Atom::new(11, [0.51, 0.5, 0.0]).unwrap();
        let p = CrystalStructure::new(s.lattice, atoms).unwrap();
        let ab = match_structures(&s, &p, &MatchTolerances::default());
        let ba = match_structures(&p, &s, &MatchTolerances::default());
        assert_eq!(ab.matched, ba.matched);
    }
}
