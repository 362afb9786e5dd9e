use crysflow_xtal::Lattice;

/// The six crystal families, assigned by space-group number range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CrystalFamily {
    Triclinic,
    Monoclinic,
    Orthorhombic,
    Tetragonal,
    Hexagonal,
    Cubic,
}

/// Named lattice parameters, used to size the per-group action space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatticeParam {
    A,
    B,
    C,
    Alpha,
    Beta,
    Gamma,
}

impl CrystalFamily {
    pub fn from_number(number: u16) -> Option<CrystalFamily> {
        Some(match number {
            1..=2 => CrystalFamily::Triclinic,
            3..=15 => CrystalFamily::Monoclinic,
            16..=74 => CrystalFamily::Orthorhombic,
            75..=142 => CrystalFamily::Tetragonal,
            143..=194 => CrystalFamily::Hexagonal,
            195..=230 => CrystalFamily::Cubic,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            CrystalFamily::Triclinic => "triclinic",
            CrystalFamily::Monoclinic => "monoclinic",
            CrystalFamily::Orthorhombic => "orthorhombic",
            CrystalFamily::Tetragonal => "tetragonal",
            CrystalFamily::Hexagonal => "hexagonal",
            CrystalFamily::Cubic => "cubic",
        }
    }

    pub const ALL: [CrystalFamily; 6] = [
        CrystalFamily::Triclinic,
        CrystalFamily::Monoclinic,
        CrystalFamily::Orthorhombic,
        CrystalFamily::Tetragonal,
        CrystalFamily::Hexagonal,
        CrystalFamily::Cubic,
    ];

    pub fn constraint(&self) -> LatticeConstraint {
        LatticeConstraint { family: *self }
    }

    /// The free lattice parameters of this family, in canonical order.
    /// Monoclinic is unique axis c here, so gamma is the free angle.
    pub fn free_parameters(&self) -> &'static [LatticeParam] {
        use LatticeParam::*;
        match self {
            CrystalFamily::Triclinic => &[A, B, C, Alpha, Beta, Gamma],
            CrystalFamily::Monoclinic => &[A, B, C, Gamma],
            CrystalFamily::Orthorhombic => &[A, B, C],
            CrystalFamily::Tetragonal => &[A, C],
            CrystalFamily::Hexagonal => &[A, C],
            CrystalFamily::Cubic => &[A],
        }
    }
}

/// Length ties and fixed angles implied by a crystal family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeConstraint {
    pub family: CrystalFamily,
}

impl LatticeConstraint {
    /// Project a lattice onto the constraint surface: tied lengths copy the
    /// first free parameter's value, fixed angles are overwritten exactly.
    pub fn project(&self, l: &Lattice) -> Lattice {
        match self.family {
            CrystalFamily::Triclinic => *l,
            CrystalFamily::Monoclinic => Lattice {
                a: l.a,
                b: l.b,
                c: l.c,
                alpha: 90.0,
                beta: 90.0,
                gamma: l.gamma,
            },
            CrystalFamily::Orthorhombic => Lattice {
                a: l.a,
                b: l.b,
                c: l.c,
                alpha: 90.0,
                beta: 90.0,
                gamma: 90.0,
            },
            CrystalFamily::Tetragonal => Lattice {
                a: l.a,
                b: l.a,
                c: l.c,
                alpha: 90.0,
                beta: 90.0,
                gamma: 90.0,
            },
            CrystalFamily::Hexagonal => Lattice {
                a: l.a,
                b: l.a,
                c: l.c,
                alpha: 90.0,
                beta: 90.0,
                gamma: 120.0,
            },
            CrystalFamily::Cubic => Lattice {
                a: l.a,
                b: l.a,
                c: l.a,
                alpha: 90.0,
                beta: 90.0,
                gamma: 90.0,
            },
        }
    }

    /// Whether a lattice already satisfies the constraint exactly.
    pub fn satisfied_by(&self, l: &Lattice) -> bool {
        let p = self.project(l);
        p == *l
    }
}
