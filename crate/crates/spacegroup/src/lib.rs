//! The 230 crystallographic space groups as executable data: symmetry
//! operation sets built by closure over an embedded generator table, orbit
//! expansion of reference atoms, and per-family lattice constraints.
//!
//! Conventions baked into the data file: monoclinic groups use unique axis c
//! (so the free angle is gamma), rhombohedral groups use hexagonal axes, and
//! centrosymmetric groups with two origins use origin choice 2.

mod family;
mod group;
mod orbit;
mod symop;

pub use family::{CrystalFamily, LatticeConstraint, LatticeParam};
pub use group::{group_ops, verify_group_axioms, SpaceGroup, GROUP_COUNT};
pub use orbit::{expand_structure, orbit, Orbit};
pub use symop::SymOp;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpacegroupError {
    #[error("space group number {0} outside 1..=230")]
    BadNumber(u16),
    #[error("generator table: {0}")]
    BadTable(String),
    #[error("lattice not projected for group {number}: {detail}")]
    UnprojectedLattice { number: u16, detail: String },
    #[error(
        "symmetry collision: {symbol_a} and {symbol_b} images coincide at \
         ({x:.6}, {y:.6}, {z:.6}) within merge tolerance"
    )]
    Collision { symbol_a: &'static str, symbol_b: &'static str, x: f64, y: f64, z: f64 },
    #[error(transparent)]
    Xtal(#[from] crysflow_xtal::XtalError),
}

pub type Result<T> = std::result::Result<T, SpacegroupError>;
