use crate::{CrystalStructure, Result, XtalError};

/// One periodic neighbor of an atom: target atom index, the lattice image the
/// target sits in, and the Cartesian distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub atom: usize,
    pub image: [i32; 3],
    pub distance: f64,
}

fn quantize(d: f64) -> i64 {
    (d * 1e9).round() as i64
}

fn check_index(s: &CrystalStructure, i: usize) -> Result<()> {
    if i >= s.len() {
        return Err(XtalError::IndexOutOfRange { index: i, len: s.len() });
    }
    Ok(())
}

fn dist_with_image(s: &CrystalStructure, delta_f: [f64; 3], image: [i32; 3]) -> f64 {
    let f = [
        delta_f[0] + image[0] as f64,
        delta_f[1] + image[1] as f64,
        delta_f[2] + image[2] as f64,
    ];
    let c = s.lattice.frac_to_cart(f);
    (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt()
}

/// Minimum periodic distance between atoms `i` and `j` over all lattice
/// images. For `i == j` this is the shortest self-image distance.
///
/// A candidate distance from the surrounding 3x3x3 images bounds the search;
/// the search box is then widened to every image that could still beat it
/// (|m_k| <= d/h_k + 1 per axis, h_k the perpendicular plane spacing).
pub fn periodic_min_distance(s: &CrystalStructure, i: usize, j: usize) -> Result<f64> {
    check_index(s, i)?;
    check_index(s, j)?;
    s.lattice.validate()?;
    let delta = [
        s.atoms[j].frac[0] - s.atoms[i].frac[0],
        s.atoms[j].frac[1] - s.atoms[i].frac[1],
        s.atoms[j].frac[2] - s.atoms[i].frac[2],
    ];
    let self_pair = i == j;
    let mut best = f64::INFINITY;
    for mx in -1..=1 {
        for my in -1..=1 {
            for mz in -1..=1 {
                if self_pair && mx == 0 && my == 0 && mz == 0 {
                    continue;
                }
                best = best.min(dist_with_image(s, delta, [mx, my, mz]));
            }
        }
    }
    let h = s.lattice.plane_spacings();
    let range: Vec<i32> = h.iter().map(|hk| (best / hk).ceil() as i32 + 1).collect();
    for mx in -range[0]..=range[0] {
        for my in -range[1]..=range[1] {
            for mz in -range[2]..=range[2] {
                if self_pair && mx == 0 && my == 0 && mz == 0 {
                    continue;
                }
                let d = dist_with_image(s, delta, [mx, my, mz]);
                if d < best {
                    best = d;
                }
            }
        }
    }
    Ok(best)
}

/// All periodic neighbors within `cutoff` for every atom, each list sorted by
/// (distance, neighbor index, lexicographic image) and truncated to the
/// `max_k` nearest when given. Neighbors include images of the atom itself.
///
/// Fractional deltas are wrapped into [-1/2, 1/2] to keep the image box
/// tight, and candidate images are pruned per axis against the perpendicular
/// plane spacings before any Cartesian arithmetic.
pub fn neighbor_list(
    s: &CrystalStructure,
    cutoff: f64,
    max_k: Option<usize>,
) -> Result<Vec<Vec<Neighbor>>> {
    if !(cutoff > 0.0) {
        return Err(XtalError::BadLattice(format!("cutoff {cutoff} must be positive")));
    }
    s.lattice.validate()?;
    let h = s.lattice.plane_spacings();
    let m = s.lattice.cell_vectors();
    let range: [i32; 3] = [
        (cutoff / h[0] + 0.5).ceil() as i32,
        (cutoff / h[1] + 0.5).ceil() as i32,
        (cutoff / h[2] + 0.5).ceil() as i32,
    ];
    let cutoff_sq = cutoff * cutoff;

    let mut out = Vec::with_capacity(s.len());
    for i in 0..s.len() {
        let mut nbrs = Vec::new();
        for j in 0..s.len() {
            // wrap the delta, remembering the shift so emitted images refer
            // to the stored coordinates
            let mut delta = [0.0f64; 3];
            let mut base = [0i32; 3];
            for k in 0..3 {
                let raw = s.atoms[j].frac[k] - s.atoms[i].frac[k];
                let w = raw.round();
                delta[k] = raw - w;
                base[k] = w as i32;
            }
            for mx in -range[0]..=range[0] {
                let fx = mx as f64 + delta[0];
                if fx.abs() * h[0] > cutoff {
                    continue;
                }
                let px = [fx * m[0][0], fx * m[0][1], fx * m[0][2]];
                for my in -range[1]..=range[1] {
                    let fy = my as f64 + delta[1];
                    if fy.abs() * h[1] > cutoff {
                        continue;
                    }
                    let pxy =
                        [px[0] + fy * m[1][0], px[1] + fy * m[1][1], px[2] + fy * m[1][2]];
                    for mz in -range[2]..=range[2] {
                        let fz = mz as f64 + delta[2];
                        if fz.abs() * h[2] > cutoff {
                            continue;
                        }
                        if i == j && mx == base[0] && my == base[1] && mz == base[2] {
                            // the atom's own original copy
                            continue;
                        }
                        let c = [
                            pxy[0] + fz * m[2][0],
                            pxy[1] + fz * m[2][1],
                            pxy[2] + fz * m[2][2],
                        ];
                        let d_sq = c[0] * c[0] + c[1] * c[1] + c[2] * c[2];
                        if d_sq <= cutoff_sq {
                            nbrs.push(Neighbor {
                                atom: j,
                                image: [mx - base[0], my - base[1], mz - base[2]],
                                distance: d_sq.sqrt(),
                            });
                        }
                    }
                }
            }
        }
        // distances compared at 1e-9 A resolution so that symmetry-equal
        // shells fall through to the (index, image) tie-break deterministically
        nbrs.sort_by(|a, b| {
            quantize(a.distance)
                .cmp(&quantize(b.distance))
                .then(a.atom.cmp(&b.atom))
                .then(a.image.cmp(&b.image))
        });
        if let Some(k) = max_k {
            nbrs.truncate(k);
        }
        out.push(nbrs);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Atom, Lattice};

    fn cubic(a: f64, atoms: Vec<Atom>) -> CrystalStructure {
        CrystalStructure::new(Lattice::cubic(a).unwrap(), atoms).unwrap()
    }

    #[test]
    fn axis_aligned_pair() {
        let s = cubic(
            4.0,
            vec![Atom::new(6, [0.0; 3]).unwrap(), Atom::new(6, [0.0, 0.0, 0.5]).unwrap()],
        );
        assert!((periodic_min_distance(&s, 0, 1).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn self_image_distance_is_cell_edge() {
        let s = cubic(4.0, vec![Atom::new(6, [0.1, 0.2, 0.3]).unwrap()]);
        assert!((periodic_min_distance(&s, 0, 0).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn wrapped_pair_uses_nearest_image() {
        let s = cubic(
            4.0,
            vec![Atom::new(6, [0.05, 0.0, 0.0]).unwrap(), Atom::new(6, [0.95, 0.0, 0.0]).unwrap()],
        );
        // nearest image is across the boundary: 0.1 * 4 = 0.4
        assert!((periodic_min_distance(&s, 0, 1).unwrap() - 0.4).abs() < 1e-12);
    }

    #[test]
    fn single_carbon_twelve_neighbors_with_tie_break() {
        let s = cubic(4.0, vec![Atom::new(6, [0.0; 3]).unwrap()]);
        let nbrs = &neighbor_list(&s, 8.0, Some(12)).unwrap()[0];
        assert_eq!(nbrs.len(), 12);
        for n in &nbrs[..6] {
            assert!((n.distance - 4.0).abs() < 1e-9);
        }
        let second_shell = 32.0f64.sqrt();
        for n in &nbrs[6..] {
            assert!((n.distance - second_shell).abs() < 1e-9);
        }
        // among the 12 equidistant second-shell images the first 6 in
        // lexicographic image order win
        let images: Vec<[i32; 3]> = nbrs[6..].iter().map(|n| n.image).collect();
        assert_eq!(
            images,
            vec![
                [-1, -1, 0],
                [-1, 0, -1],
                [-1, 0, 1],
                [-1, 1, 0],
                [0, -1, -1],
                [0, -1, 1]
            ]
        );
    }

    #[test]
    fn cutoff_below_shortest_pair_gives_empty_sets() {
        let s = cubic(
            5.64,
            vec![Atom::new(11, [0.0; 3]).unwrap(), Atom::new(17, [0.5; 3]).unwrap()],
        );
        let lists = neighbor_list(&s, 2.0, None).unwrap();
        assert!(lists.iter().all(|l| l.is_empty()));
    }

    #[test]
    fn neighbor_relation_is_symmetric() {
        let s = CrystalStructure::new(
            Lattice::new(3.0, 4.0, 5.0, 80.0, 85.0, 95.0).unwrap(),
            vec![
                Atom::new(3, [0.1, 0.7, 0.3]).unwrap(),
                Atom::new(8, [0.6, 0.2, 0.9]).unwrap(),
            ],
        )
        .unwrap();
        let lists = neighbor_list(&s, 6.0, None).unwrap();
        for (i, nbrs) in lists.iter().enumerate() {
            for n in nbrs {
                let mirrored = [-n.image[0], -n.image[1], -n.image[2]];
                let found = lists[n.atom].iter().any(|m| {
                    m.atom == i && m.image == mirrored && (m.distance - n.distance).abs() < 1e-9
                });
                assert!(found, "missing mirror of {i}->{n:?}");
            }
        }
    }
}
