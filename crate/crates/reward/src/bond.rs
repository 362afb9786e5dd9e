use std::collections::BTreeMap;

use crysflow_xtal::{element, neighbor_list, symbol_to_z, CrystalStructure};

use crate::{Result, RewardError};

/// Empirical minimum and average bond distances per unordered element pair.
#[derive(Debug, Clone, Default)]
pub struct BondStatsTable {
    entries: BTreeMap<(u8, u8), (f64, f64)>,
}

fn key(z1: u8, z2: u8) -> (u8, u8) {
    if z1 <= z2 { (z1, z2) } else { (z2, z1) }
}

impl BondStatsTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// The curated table shipped with the crate (battery element set).
    pub fn default_table() -> Self {
        Self::parse_csv(include_str!("../data/bond_stats_default.csv"))
            .expect("embedded bond table is valid")
    }

    pub fn insert(&mut self, z1: u8, z2: u8, d_min: f64, d_avg: f64) -> Result<()> {
        if !(d_min > 0.0) || d_min > d_avg {
            return Err(RewardError::BadBondStats(format!(
                "pair {}-{}: need 0 < d_min <= d_avg, got ({d_min}, {d_avg})",
                element(z1).symbol,
                element(z2).symbol
            )));
        }
        if self.entries.insert(key(z1, z2), (d_min, d_avg)).is_some() {
            return Err(RewardError::BadBondStats(format!(
                "duplicate pair {}-{}",
                element(z1).symbol,
                element(z2).symbol
            )));
        }
        Ok(())
    }

    pub fn get(&self, z1: u8, z2: u8) -> Option<(f64, f64)> {
        self.entries.get(&key(z1, z2)).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Parse `element_a,element_b,d_min,d_avg` CSV rows. `#` lines and the
    /// header row are skipped; all violations name the offending row.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut table = BondStatsTable::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("element_a") {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(RewardError::BadBondStats(format!(
                    "row {}: expected 4 columns, got {}",
                    lineno + 1,
                    fields.len()
                )));
            }
            let z1 = symbol_to_z(fields[0]).ok_or_else(|| {
                RewardError::BadBondStats(format!("row {}: unknown element {}", lineno + 1, fields[0]))
            })?;
            let z2 = symbol_to_z(fields[1]).ok_or_else(|| {
                RewardError::BadBondStats(format!("row {}: unknown element {}", lineno + 1, fields[1]))
            })?;
            let d_min: f64 = fields[2].parse().map_err(|_| {
                RewardError::BadBondStats(format!("row {}: bad d_min `{}`", lineno + 1, fields[2]))
            })?;
            let d_avg: f64 = fields[3].parse().map_err(|_| {
                RewardError::BadBondStats(format!("row {}: bad d_avg `{}`", lineno + 1, fields[3]))
            })?;
            table.insert(z1, z2, d_min, d_avg).map_err(|e| {
                RewardError::BadBondStats(format!("row {}: {e}", lineno + 1))
            })?;
        }
        Ok(table)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("element_a,element_b,d_min,d_avg\n");
        for ((z1, z2), (d_min, d_avg)) in &self.entries {
            out.push_str(&format!(
                "{},{},{},{}\n",
                element(*z1).symbol,
                element(*z2).symbol,
                d_min,
                d_avg
            ));
        }
        out
    }
}

/// Bond-length preference score.
///
/// Over unordered bonds (i, j) within `cutoff` (periodic, so images in
/// adjacent cells count once per distinct image pair):
///   raw = sum |d - d_avg| / n_bond + sum e^(2 (d_min - d))
/// and the score is e^(-raw), in (0, 1]. Zero bonds give raw = 0, score 1.
pub fn bond_term(
    s: &CrystalStructure,
    stats: &BondStatsTable,
    cutoff: f64,
) -> Result<(f64, usize)> {
    if s.is_empty() {
        return Err(RewardError::EmptyStructure);
    }
    let lists = neighbor_list(s, cutoff, None)?;
    let mut sum_abs = 0.0;
    let mut sum_exp = 0.0;
    let mut ordered = 0usize;
    for (i, nbrs) in lists.iter().enumerate() {
        for n in nbrs {
            let (d_min, d_avg) = stats.get(s.atoms[i].z, s.atoms[n.atom].z).ok_or(
                RewardError::MissingBondPair(
                    element(s.atoms[i].z).symbol,
                    element(s.atoms[n.atom].z).symbol,
                ),
            )?;
            sum_abs += (n.distance - d_avg).abs();
            sum_exp += (2.0 * (d_min - n.distance)).exp();
            ordered += 1;
        }
    }
    // every bond appears in both directions of the neighbor relation
    debug_assert!(ordered % 2 == 0);
    let n_bond = ordered / 2;
    if n_bond == 0 {
        return Ok((1.0, 0));
    }
    let raw = (sum_abs / 2.0) / n_bond as f64 + sum_exp / 2.0;
    Ok(((-raw).exp(), n_bond))
}
