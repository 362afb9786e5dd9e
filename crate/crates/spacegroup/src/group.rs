use std::collections::BTreeSet;
use std::sync::OnceLock;

use crate::family::CrystalFamily;
use crate::symop::SymOp;
use crate::{LatticeConstraint, Result, SpacegroupError};

pub const GROUP_COUNT: usize = 230;

/// Embedded generator table, one line per group (see crate docs for the
/// setting conventions). Versioned; the loader rejects other versions.
const TABLE_TEXT: &str = include_str!("../data/space_groups_v1.txt");
const TABLE_VERSION: &str = "v1";

/// A space group: its number, Hermann-Mauguin symbol, full conventional-cell
/// operation set, and crystal family.
#[derive(Debug, Clone)]
pub struct SpaceGroup {
    pub number: u16,
    pub hm_symbol: String,
    pub family: CrystalFamily,
    ops: Vec<SymOp>,
}

impl SpaceGroup {
    pub fn ops(&self) -> &[SymOp] {
        &self.ops
    }

    pub fn order(&self) -> usize {
        self.ops.len()
    }

    pub fn constraint(&self) -> LatticeConstraint {
        self.family.constraint()
    }
}

fn registry() -> &'static Vec<SpaceGroup> {
    static REGISTRY: OnceLock<Vec<SpaceGroup>> = OnceLock::new();
    REGISTRY.get_or_init(|| load_table().expect("embedded space-group table is valid"))
}

/// Look up a space group by number (1..=230). The full operation sets are
/// produced by closure over the generator table on first use and memoized.
pub fn group_ops(number: u16) -> Result<&'static SpaceGroup> {
    if !(1..=GROUP_COUNT as u16).contains(&number) {
        return Err(SpacegroupError::BadNumber(number));
    }
    Ok(&registry()[number as usize - 1])
}

fn load_table() -> Result<Vec<SpaceGroup>> {
    let mut header_ok = false;
    let mut groups = Vec::with_capacity(GROUP_COUNT);
    for (lineno, raw) in TABLE_TEXT.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('#') {
            if lineno == 0 {
                if !line.contains(TABLE_VERSION) {
                    return Err(SpacegroupError::BadTable(format!(
                        "expected table version {TABLE_VERSION}, header is `{line}`"
                    )));
                }
                header_ok = true;
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('|').collect();
        if fields.len() != 4 {
            return Err(SpacegroupError::BadTable(format!(
                "line {}: expected 4 fields, got {}",
                lineno + 1,
                fields.len()
            )));
        }
        let number: u16 = fields[0]
            .parse()
            .map_err(|_| SpacegroupError::BadTable(format!("line {}: bad number", lineno + 1)))?;
        let hm_symbol = fields[1].to_string();
        let expected: usize = fields[2].parse().map_err(|_| {
            SpacegroupError::BadTable(format!("line {}: bad op count", lineno + 1))
        })?;
        let mut generators = vec![SymOp::identity()];
        for g in fields[3].split(';').filter(|g| !g.is_empty()) {
            generators.push(SymOp::parse_triplet(g)?);
        }
        let ops = close_over(&generators);
        if ops.len() != expected {
            return Err(SpacegroupError::BadTable(format!(
                "group {number}: closure produced {} ops, table records {expected}",
                ops.len()
            )));
        }
        let family = CrystalFamily::from_number(number)
            .ok_or(SpacegroupError::BadNumber(number))?;
        groups.push(SpaceGroup { number, hm_symbol, family, ops });
    }
    if !header_ok {
        return Err(SpacegroupError::BadTable("missing version header".into()));
    }
    if groups.len() != GROUP_COUNT {
        return Err(SpacegroupError::BadTable(format!(
            "table has {} groups, expected {GROUP_COUNT}",
            groups.len()
        )));
    }
    for (i, g) in groups.iter().enumerate() {
        if g.number as usize != i + 1 {
            return Err(SpacegroupError::BadTable(format!(
                "table out of order at position {}: group {}",
                i + 1,
                g.number
            )));
        }
    }
    Ok(groups)
}

/// Breadth-first closure of a generator set under composition mod 1.
fn close_over(generators: &[SymOp]) -> Vec<SymOp> {
    let mut seen: BTreeSet<SymOp> = BTreeSet::new();
    let mut ordered = Vec::new();
    let mut queue = vec![SymOp::identity()];
    seen.insert(SymOp::identity());
    while let Some(op) = queue.pop() {
        ordered.push(op);
        for g in generators {
            let next = op.compose(g);
            if seen.insert(next) {
                queue.push(next);
            }
        }
    }
    ordered.sort();
    ordered
}

/// Full group-axiom check: identity present, closed under composition, every
/// op has an inverse in the set, and rotation determinants are all ±1.
pub fn verify_group_axioms(group: &SpaceGroup) -> Result<()> {
    let set: BTreeSet<&SymOp> = group.ops.iter().collect();
    if !set.contains(&SymOp::identity()) {
        return Err(SpacegroupError::BadTable(format!(
            "group {}: identity missing",
            group.number
        )));
    }
    for a in &group.ops {
        let d = a.det();
        if d != 1 && d != -1 {
            return Err(SpacegroupError::BadTable(format!(
                "group {}: op determinant {d}",
                group.number
            )));
        }
        if !set.contains(&a.inverse()) {
            return Err(SpacegroupError::BadTable(format!(
                "group {}: inverse of {} missing",
                group.number,
                a.to_triplet()
            )));
        }
        for b in &group.ops {
            if !set.contains(&a.compose(b)) {
                return Err(SpacegroupError::BadTable(format!(
                    "group {}: {} * {} escapes the set",
                    group.number,
                    a.to_triplet(),
                    b.to_triplet()
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p1_is_identity_only() {
        let g = group_ops(1).unwrap();
        assert_eq!(g.order(), 1);
        assert_eq!(g.ops()[0], SymOp::identity());
        assert_eq!(g.hm_symbol, "P1");
    }

    #[test]
    fn p_minus_1_has_identity_and_inversion() {
        let g = group_ops(2).unwrap();
        assert_eq!(g.order(), 2);
        assert!(g.ops().contains(&SymOp::parse_triplet("-x,-y,-z").unwrap()));
    }

    #[test]
    fn fm3m_has_192_conventional_ops() {
        let g = group_ops(225).unwrap();
        assert_eq!(g.order(), 192);
        assert_eq!(g.hm_symbol, "Fm-3m");
    }

    #[test]
    fn out_of_range_numbers_rejected() {
        assert!(group_ops(0).is_err());
        assert!(group_ops(231).is_err());
    }

    #[test]
    fn axioms_hold_for_a_sample_of_groups() {
        for number in [1, 2, 15, 70, 131, 148, 186, 225, 230] {
            verify_group_axioms(group_ops(number).unwrap()).unwrap();
        }
    }
}
