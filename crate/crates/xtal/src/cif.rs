//! Minimal CIF 1.1 reader/writer for P1-expanded structures.

use crate::elements::symbol_to_z;
use crate::{Atom, CrystalStructure, Lattice, Result, XtalError};

/// Serialize a structure as CIF text with every site listed explicitly.
///
/// When `symmetry` is given, the sampled space-group number is recorded via
/// `_symmetry_Int_Tables_number`; the site list itself is always the full
/// P1 expansion.
pub fn export_cif(s: &CrystalStructure, symmetry: Option<u16>) -> String {
    let mut out = String::new();
    out.push_str("data_crysflow\n");
    let l = &s.lattice;
    out.push_str(&format!("_cell_length_a    {:.9}\n", l.a));
    out.push_str(&format!("_cell_length_b    {:.9}\n", l.b));
    out.push_str(&format!("_cell_length_c    {:.9}\n", l.c));
    out.push_str(&format!("_cell_angle_alpha {:.9}\n", l.alpha));
    out.push_str(&format!("_cell_angle_beta  {:.9}\n", l.beta));
    out.push_str(&format!("_cell_angle_gamma {:.9}\n", l.gamma));
    match symmetry {
        Some(n) => out.push_str(&format!("_symmetry_Int_Tables_number {n}\n")),
        None => out.push_str("_symmetry_space_group_name_H-M 'P 1'\n"),
    }
    out.push_str("loop_\n");
    out.push_str("_atom_site_type_symbol\n");
    out.push_str("_atom_site_label\n");
    out.push_str("_atom_site_fract_x\n");
    out.push_str("_atom_site_fract_y\n");
    out.push_str("_atom_site_fract_z\n");
    for (idx, a) in s.atoms.iter().enumerate() {
        out.push_str(&format!(
            "{} {}{} {:.9} {:.9} {:.9}\n",
            a.symbol(),
            a.symbol(),
            idx + 1,
            a.frac[0],
            a.frac[1],
            a.frac[2]
        ));
    }
    out
}

/// Parse CIF text into a structure. Requires the six cell parameters and an
/// atom-site loop with type symbol and fractional coordinates; coordinates
/// are reduced mod 1.
pub fn parse_cif(text: &str) -> Result<CrystalStructure> {
    let mut cell: [Option<f64>; 6] = [None; 6];
    const CELL_KEYS: [&str; 6] = [
        "_cell_length_a",
        "_cell_length_b",
        "_cell_length_c",
        "_cell_angle_alpha",
        "_cell_angle_beta",
        "_cell_angle_gamma",
    ];
    let mut atoms: Vec<Atom> = Vec::new();
    let mut lines = text.lines().enumerate().peekable();

    while let Some((lineno, raw)) = lines.next() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('_') {
            let mut parts = rest.splitn(2, char::is_whitespace);
            let key = format!("_{}", parts.next().unwrap_or(""));
            if let Some(value) = parts.next() {
                if let Some(slot) = CELL_KEYS.iter().position(|k| *k == key) {
                    cell[slot] = Some(parse_number(value.trim(), lineno + 1)?);
                }
            }
            continue;
        }
        if line == "loop_" {
            // collect column headers
            let mut columns = Vec::new();
            while let Some((_, peek)) = lines.peek() {
                let t = peek.trim();
                if t.starts_with('_') {
                    columns.push(t.split_whitespace().next().unwrap().to_string());
                    lines.next();
                } else {
                    break;
                }
            }
            let is_site_loop = columns.iter().any(|c| c == "_atom_site_fract_x");
            if !is_site_loop {
                // skip this loop's data rows
                while let Some((_, peek)) = lines.peek() {
                    let t = peek.trim();
                    if t.is_empty() || t.starts_with('_') || t == "loop_" || t.starts_with("data_")
                    {
                        break;
                    }
                    lines.next();
                }
                continue;
            }
            let col = |name: &str, lineno: usize| -> Result<usize> {
                columns.iter().position(|c| c == name).ok_or_else(|| XtalError::CifParse {
                    line: lineno,
                    message: format!("atom site loop missing {name}"),
                })
            };
            let c_sym = columns
                .iter()
                .position(|c| c == "_atom_site_type_symbol")
                .or_else(|| columns.iter().position(|c| c == "_atom_site_label"));
            let c_sym = c_sym.ok_or_else(|| XtalError::CifParse {
                line: lineno + 1,
                message: "atom site loop missing _atom_site_type_symbol".into(),
            })?;
            let (cx, cy, cz) = (
                col("_atom_site_fract_x", lineno + 1)?,
                col("_atom_site_fract_y", lineno + 1)?,
                col("_atom_site_fract_z", lineno + 1)?,
            );
            while let Some((row_no, peek)) = lines.peek().copied() {
                let t = peek.trim();
                if t.is_empty() || t.starts_with('_') || t == "loop_" || t.starts_with("data_") {
                    break;
                }
                lines.next();
                let fields: Vec<&str> = t.split_whitespace().collect();
                if fields.len() < columns.len() {
                    return Err(XtalError::CifParse {
                        line: row_no + 1,
                        message: format!(
                            "expected {} fields, found {}",
                            columns.len(),
                            fields.len()
                        ),
                    });
                }
                let symbol = clean_symbol(fields[c_sym]);
                let z = symbol_to_z(&symbol).ok_or_else(|| XtalError::CifParse {
                    line: row_no + 1,
                    message: format!("unknown element symbol `{}`", fields[c_sym]),
                })?;
                let frac = [
                    parse_number(fields[cx], row_no + 1)?,
                    parse_number(fields[cy], row_no + 1)?,
                    parse_number(fields[cz], row_no + 1)?,
                ];
                atoms.push(Atom::new(z, frac)?);
            }
        }
    }

    for (slot, key) in CELL_KEYS.iter().enumerate() {
        if cell[slot].is_none() {
            return Err(XtalError::CifParse {
                line: 0,
                message: format!("missing required field {key}"),
            });
        }
    }
    let lattice = Lattice::new(
        cell[0].unwrap(),
        cell[1].unwrap(),
        cell[2].unwrap(),
        cell[3].unwrap(),
        cell[4].unwrap(),
        cell[5].unwrap(),
    )?;
    CrystalStructure::new(lattice, atoms)
}

/// Strip standard-uncertainty suffixes like `4.123(5)` before parsing.
fn parse_number(raw: &str, line: usize) -> Result<f64> {
    let cleaned = match raw.find('(') {
        Some(i) => &raw[..i],
        None => raw,
    };
    cleaned.parse::<f64>().map_err(|_| XtalError::CifParse {
        line,
        message: format!("malformed number `{raw}`"),
    })
}

/// `Na+`, `O2-`, `Fe3+` -> bare element symbols.
fn clean_symbol(raw: &str) -> String {
    let alpha: String = raw.chars().take_while(|c| c.is_ascii_alphabetic()).collect();
    // labels like "Na1" keep their element prefix; try longest-first
    if alpha.len() >= 2 {
        let two = &alpha[..2];
        if symbol_to_z(two).is_some() {
            return two.to_string();
        }
    }
    if !alpha.is_empty() {
        let one = &alpha[..1];
        if symbol_to_z(one).is_some() {
            return one.to_string();
        }
    }
    alpha
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CrystalStructure {
        CrystalStructure::new(
            Lattice::new(4.1, 5.2, 6.3, 88.0, 92.5, 101.0).unwrap(),
            vec![
                Atom::new(3, [0.123456789, 0.5, 0.25]).unwrap(),
                Atom::new(8, [0.0, 0.75, 0.99]).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn roundtrip_preserves_lattice_and_coords() {
        let s = sample();
        let parsed = parse_cif(&export_cif(&s, Some(131))).unwrap();
        assert!((parsed.lattice.a - s.lattice.a).abs() < 1e-6);
        assert!((parsed.lattice.gamma - s.lattice.gamma).abs() < 1e-6);
        assert_eq!(parsed.len(), s.len());
        for (a, b) in parsed.atoms.iter().zip(&s.atoms) {
            assert_eq!(a.z, b.z);
            for k in 0..3 {
                assert!((a.frac[k] - b.frac[k]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn one_atom_one_site_row() {
        let s = CrystalStructure::new(
            Lattice::cubic(4.0).unwrap(),
            vec![Atom::new(6, [0.0; 3]).unwrap()],
        )
        .unwrap();
        let text = export_cif(&s, None);
        let rows = text.lines().filter(|l| l.starts_with("C C")).count();
        assert_eq!(rows, 1);
    }

    #[test]
    fn coordinate_above_one_reduces() {
        let text = "\
data_x
_cell_length_a 4.0
_cell_length_b 4.0
_cell_length_c 4.0
_cell_angle_alpha 90.0
_cell_angle_beta 90.0
_cell_angle_gamma 90.0
loop_
_atom_site_type_symbol
_atom_site_fract_x
_atom_site_fract_y
_atom_site_fract_z
O 1.25 0.0 0.0
";
        let s = parse_cif(text).unwrap();
        assert!((s.atoms[0].frac[0] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn missing_cell_length_names_the_field() {
        let text = "\
data_x
_cell_length_b 4.0
_cell_length_c 4.0
_cell_angle_alpha 90.0
_cell_angle_beta 90.0
_cell_angle_gamma 90.0
";
        let err = parse_cif(text).unwrap_err();
        assert!(err.to_string().contains("_cell_length_a"), "{err}");
    }

    #[test]
    fn malformed_number_reports_line() {
        let text = "\
data_x
_cell_length_a abc
";
        let err = parse_cif(text).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn charged_symbols_are_cleaned() {
        assert_eq!(clean_symbol("Na+"), "Na");
        assert_eq!(clean_symbol("O2-"), "O");
        assert_eq!(clean_symbol("Cl1"), "Cl");
    }
}
