use crysflow_spacegroup::CrystalFamily;
use crysflow_xtal::{element, neighbor_list, CrystalStructure};

/// Neighbor cutoff used for the coordination-number component, angstroms.
const CN_CUTOFF: f64 = 4.0;
/// Histogram range and bin width for neighbor distances.
const HIST_MAX: f64 = 8.0;
const HIST_BIN: f64 = 0.5;
const HIST_BINS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FingerprintKind {
    Structure,
    Composition,
}

/// Fixed-width descriptor vector of a structure or composition.
#[derive(Debug, Clone, PartialEq)]
pub struct Fingerprint {
    pub kind: FingerprintKind,
    pub values: Vec<f64>,
}

impl Fingerprint {
    pub fn euclidean_distance(&self, other: &Fingerprint) -> f64 {
        assert_eq!(self.kind, other.kind, "fingerprint kinds differ");
        assert_eq!(self.values.len(), other.values.len());
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Geometry descriptor: per-site [coordination number, 16-bin histogram of
/// neighbor distances over 0-8 A, mean, std of those distances], averaged
/// over sites. A documented simplification of coordination-feature
/// fingerprints; comparable only within this artifact.
pub fn structure_fingerprint(s: &CrystalStructure) -> Fingerprint {
    let width = 1 + HIST_BINS + 2;
    if s.is_empty() {
        return Fingerprint { kind: FingerprintKind::Structure, values: vec![0.0; width] };
    }
    let lists = neighbor_list(s, HIST_MAX, None).expect("valid lattice");
    let mut acc = vec![0.0; width];
    for nbrs in &lists {
        let mut site = vec![0.0; width];
        let cn = nbrs.iter().filter(|n| n.distance <= CN_CUTOFF).count();
        site[0] = cn as f64;
        let mut sum = 0.0;
        for n in nbrs {
            let bin = ((n.distance / HIST_BIN) as usize).min(HIST_BINS - 1);
            site[1 + bin] += 1.0;
            sum += n.distance;
        }
        if !nbrs.is_empty() {
            let mean = sum / nbrs.len() as f64;
            let var = nbrs
                .iter()
                .map(|n| (n.distance - mean) * (n.distance - mean))
                .sum::<f64>()
                / nbrs.len() as f64;
            site[1 + HIST_BINS] = mean;
            site[2 + HIST_BINS] = var.sqrt();
        }
        for (a, v) in acc.iter_mut().zip(&site) {
            *a += v;
        }
    }
    for a in acc.iter_mut() {
        *a /= s.len() as f64;
    }
    Fingerprint { kind: FingerprintKind::Structure, values: acc }
}

/// Stoichiometry-weighted statistics (mean, std, min, max, range) of element
/// properties (mass, electronegativity, covalent radius, row, group), from
/// the reduced composition so formula scaling does not matter.
pub fn composition_fingerprint(s: &CrystalStructure) -> Fingerprint {
    let comp = s.reduced_composition();
    let total: usize = comp.values().sum();
    let mut values = Vec::with_capacity(25);
    let props: [fn(&crysflow_xtal::Element) -> f64; 5] = [
        |e| e.mass,
        |e| e.electronegativity,
        |e| e.covalent_radius,
        |e| e.row as f64,
        |e| e.group as f64,
    ];
    for prop in props {
        let mut mean = 0.0;
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for (&z, &count) in &comp {
            let v = prop(element(z));
            let w = count as f64 / total.max(1) as f64;
            mean += w * v;
            min = min.min(v);
            max = max.max(v);
        }
        let mut var = 0.0;
        for (&z, &count) in &comp {
            let v = prop(element(z));
            let w = count as f64 / total.max(1) as f64;
            var += w * (v - mean) * (v - mean);
        }
        if comp.is_empty() {
            values.extend_from_slice(&[0.0; 5]);
        } else {
            values.extend_from_slice(&[mean, var.sqrt(), min, max, max - min]);
        }
    }
    Fingerprint { kind: FingerprintKind::Composition, values }
}

/// Mean pairwise Euclidean distance over unordered fingerprint pairs.
/// Needs at least two entries.
pub fn diversity(fingerprints: &[Fingerprint]) -> Option<f64> {
    let n = fingerprints.len();
    if n < 2 {
        return None;
    }
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            sum += fingerprints[i].euclidean_distance(&fingerprints[j]);
            pairs += 1;
        }
    }
    Some(sum / pairs as f64)
}

/// Shannon-Wiener index over the six crystal families of the given
/// space-group numbers. Zero when every structure shares a family, ln 6 at
/// the uniform maximum.
pub fn family_diversity(space_groups: &[u16]) -> f64 {
    let mut counts = [0usize; 6];
    let mut total = 0usize;
    for &n in space_groups {
        if let Some(f) = CrystalFamily::from_number(n) {
            let idx = CrystalFamily::ALL.iter().position(|x| *x == f).unwrap();
            counts[idx] += 1;
            total += 1;
        }
    }
    if total == 0 {
        return 0.0;
    }
    let mut h = 0.0;
    for c in counts {
        if c > 0 {
            let p = c as f64 / total as f64;
            h -= p * p.ln();
        }
    }
    h
}
