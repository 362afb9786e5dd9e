//! Static per-element data for Z = 1..=94: standard atomic weight (u),
//! Pauling electronegativity (0.0 where none is defined), covalent radius
//! (angstroms), and periodic-table row/group.

/// Highest atomic number covered by the table.
pub const MAX_Z: u8 = 94;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Element {
    pub z: u8,
    pub symbol: &'static str,
    pub mass: f64,
    pub electronegativity: f64,
    pub covalent_radius: f64,
    pub row: u8,
    pub group: u8,
}

/// Look up an element by atomic number. Panics outside 1..=94; callers
/// validate atoms at construction.
pub fn element(z: u8) -> &'static Element {
    assert!(
        (1..=MAX_Z).contains(&z),
        "atomic number {z} outside supported range 1..={MAX_Z}"
    );
    &TABLE[z as usize - 1]
}

/// Atomic number for a chemical symbol, if known.
pub fn symbol_to_z(symbol: &str) -> Option<u8> {
    TABLE.iter().find(|e| e.symbol == symbol).map(|e| e.z)
}

const fn e(
    z: u8,
    symbol: &'static str,
    mass: f64,
    electronegativity: f64,
    covalent_radius: f64,
    row: u8,
    group: u8,
) -> Element {
    Element { z, symbol, mass, electronegativity, covalent_radius, row, group }
}

#[rustfmt::skip]
static TABLE: [Element; 94] = [
    e(1,  "H",  1.008,    2.20, 0.31, 1, 1),
    e(2,  "He", 4.0026,   0.00, 0.28, 1, 18),
    e(3,  "Li", 6.94,     0.98, 1.28, 2, 1),
    e(4,  "Be", 9.0122,   1.57, 0.96, 2, 2),
    e(5,  "B",  10.81,    2.04, 0.84, 2, 13),
    e(6,  "C",  12.011,   2.55, 0.76, 2, 14),
    e(7,  "N",  14.007,   3.04, 0.71, 2, 15),
    e(8,  "O",  15.999,   3.44, 0.66, 2, 16),
    e(9,  "F",  18.998,   3.98, 0.57, 2, 17),
    e(10, "Ne", 20.180,   0.00, 0.58, 2, 18),
    e(11, "Na", 22.990,   0.93, 1.66, 3, 1),
    e(12, "Mg", 24.305,   1.31, 1.41, 3, 2),
    e(13, "Al", 26.982,   1.61, 1.21, 3, 13),
    e(14, "Si", 28.085,   1.90, 1.11, 3, 14),
    e(15, "P",  30.974,   2.19, 1.07, 3, 15),
    e(16, "S",  32.06,    2.58, 1.05, 3, 16),
    e(17, "Cl", 35.45,    3.16, 1.02, 3, 17),
    e(18, "Ar", 39.948,   0.00, 1.06, 3, 18),
    e(19, "K",  39.098,   0.82, 2.03, 4, 1),
    e(20, "Ca", 40.078,   1.00, 1.76, 4, 2),
    e(21, "Sc", 44.956,   1.36, 1.70, 4, 3),
    e(22, "Ti", 47.867,   1.54, 1.60, 4, 4),
    e(23, "V",  50.942,   1.63, 1.53, 4, 5),
    e(24, "Cr", 51.996,   1.66, 1.39, 4, 6),
    e(25, "Mn", 54.938,   1.55, 1.39, 4, 7),
    e(26, "Fe", 55.845,   1.83, 1.32, 4, 8),
    e(27, "Co", 58.933,   1.88, 1.26, 4, 9),
    e(28, "Ni", 58.693,   1.91, 1.24, 4, 10),
    e(29, "Cu", 63.546,   1.90, 1.32, 4, 11),
    e(30, "Zn", 65.38,    1.65, 1.22, 4, 12),
    e(31, "Ga", 69.723,   1.81, 1.22, 4, 13),
    e(32, "Ge", 72.630,   2.01, 1.20, 4, 14),
    e(33, "As", 74.922,   2.18, 1.19, 4, 15),
    e(34, "Se", 78.971,   2.55, 1.20, 4, 16),
    e(35, "Br", 79.904,   2.96, 1.20, 4, 17),
    e(36, "Kr", 83.798,   3.00, 1.16, 4, 18),
    e(37, "Rb", 85.468,   0.82, 2.20, 5, 1),
    e(38, "Sr", 87.62,    0.95, 1.95, 5, 2),
    e(39, "Y",  88.906,   1.22, 1.90, 5, 3),
    e(40, "Zr", 91.224,   1.33, 1.75, 5, 4),
    e(41, "Nb", 92.906,   1.60, 1.64, 5, 5),
    e(42, "Mo", 95.95,    2.16, 1.54, 5, 6),
    e(43, "Tc", 98.0,     1.90, 1.47, 5, 7),
    e(44, "Ru", 101.07,   2.20, 1.46, 5, 8),
    e(45, "Rh", 102.91,   2.28, 1.42, 5, 9),
    e(46, "Pd", 106.42,   2.20, 1.39, 5, 10),
    e(47, "Ag", 107.87,   1.93, 1.45, 5, 11),
    e(48, "Cd", 112.41,   1.69, 1.44, 5, 12),
    e(49, "In", 114.82,   1.78, 1.42, 5, 13),
    e(50, "Sn", 118.71,   1.96, 1.39, 5, 14),
    e(51, "Sb", 121.76,   2.05, 1.39, 5, 15),
    e(52, "Te", 127.60,   2.10, 1.38, 5, 16),
    e(53, "I",  126.90,   2.66, 1.39, 5, 17),
    e(54, "Xe", 131.29,   2.60, 1.40, 5, 18),
    e(55, "Cs", 132.91,   0.79, 2.44, 6, 1),
    e(56, "Ba", 137.33,   0.89, 2.15, 6, 2),
    e(57, "La", 138.91,   1.10, 2.07, 6, 3),
    e(58, "Ce", 140.12,   1.12, 2.04, 6, 3),
    e(59, "Pr", 140.91,   1.13, 2.03, 6, 3),
    e(60, "Nd", 144.24,   1.14, 2.01, 6, 3),
    e(61, "Pm", 145.0,    1.13, 1.99, 6, 3),
    e(62, "Sm", 150.36,   1.17, 1.98, 6, 3),
    e(63, "Eu", 151.96,   1.20, 1.98, 6, 3),
    e(64, "Gd", 157.25,   1.20, 1.96, 6, 3),
    e(65, "Tb", 158.93,   1.10, 1.94, 6, 3),
    e(66, "Dy", 162.50,   1.22, 1.92, 6, 3),
    e(67, "Ho", 164.93,   1.23, 1.92, 6, 3),
    e(68, "Er", 167.26,   1.24, 1.89, 6, 3),
    e(69, "Tm", 168.93,   1.25, 1.90, 6, 3),
    e(70, "Yb", 173.05,   1.10, 1.87, 6, 3),
    e(71, "Lu", 174.97,   1.27, 1.87, 6, 3),
    e(72, "Hf", 178.49,   1.30, 1.75, 6, 4),
    e(73, "Ta", 180.95,   1.50, 1.70, 6, 5),
    e(74, "W",  183.84,   2.36, 1.62, 6, 6),
    e(75, "Re", 186.21,   1.90, 1.51, 6, 7),
    e(76, "Os", 190.23,   2.20, 1.44, 6, 8),
    e(77, "Ir", 192.22,   2.20, 1.41, 6, 9),
    e(78, "Pt", 195.08,   2.28, 1.36, 6, 10),
    e(79, "Au", 196.97,   2.54, 1.36, 6, 11),
    e(80, "Hg", 200.59,   2.00, 1.32, 6, 12),
    e(81, "Tl", 204.38,   1.62, 1.45, 6, 13),
    e(82, "Pb", 207.2,    2.33, 1.46, 6, 14),
    e(83, "Bi", 208.98,   2.02, 1.48, 6, 15),
    e(84, "Po", 209.0,    2.00, 1.40, 6, 16),
    e(85, "At", 210.0,    2.20, 1.50, 6, 17),
    e(86, "Rn", 222.0,    2.20, 1.50, 6, 18),
    e(87, "Fr", 223.0,    0.70, 2.60, 7, 1),
    e(88, "Ra", 226.0,    0.90, 2.21, 7, 2),
    e(89, "Ac", 227.0,    1.10, 2.15, 7, 3),
    e(90, "Th", 232.04,   1.30, 2.06, 7, 3),
    e(91, "Pa", 231.04,   1.50, 2.00, 7, 3),
    e(92, "U",  238.03,   1.38, 1.96, 7, 3),
    e(93, "Np", 237.0,    1.36, 1.90, 7, 3),
    e(94, "Pu", 244.0,    1.28, 1.87, 7, 3),
];
