//! Crystal-structure fundamentals: lattice geometry, periodic distances and
//! neighbor lists, crystal graphs, density, and CIF/JSON structure I/O.
//!
//! Fractional coordinates are the canonical representation everywhere;
//! Cartesian values are always derived from the lattice on demand.

mod cif;
mod elements;
mod graph;
mod lattice;
mod mirror;
mod neighbors;
mod structure;

pub use cif::{export_cif, parse_cif};
pub use elements::{element, symbol_to_z, Element, MAX_Z};
pub use graph::{build_graph, CrystalGraph, GraphEdge};
pub use lattice::Lattice;
pub use mirror::{structure_from_json, structure_to_json};
pub use neighbors::{neighbor_list, periodic_min_distance, Neighbor};
pub use structure::{density, Atom, CrystalStructure};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum XtalError {
    #[error("invalid lattice: {0}")]
    BadLattice(String),
    #[error("invalid atom: {0}")]
    BadAtom(String),
    #[error("empty structure where at least one atom is required")]
    EmptyStructure,
    #[error("atom index {index} out of range (structure has {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("cif parse error at line {line}: {message}")]
    CifParse { line: usize, message: String },
    #[error("json structure: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, XtalError>;

/// u / A^3 -> g / cm^3
pub const DENSITY_CONV: f64 = 1.66054;
