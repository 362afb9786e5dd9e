//! Physics-informed reward for sampled crystal structures: a formation-energy
//! term behind a pluggable oracle, a bond-length preference term against
//! empirical statistics, a density Gaussian, a charge-neutrality composition
//! term, and an optional band-gap term.

mod bond;
mod oracle;
mod oxidation;
mod surrogate;
mod terms;

pub use bond::{bond_term, BondStatsTable};
pub use oracle::{BandGapOracle, ConstGapOracle, ConstOracle, EnergyOracle, OracleError, PipeOracle};
pub use oxidation::{composition_term, oxidation_states};
pub use surrogate::SurrogatePotential;
pub use terms::{
    band_gap_term, composite_reward, density_term, energy_term, BandGapConfig, GaussianParams,
    RewardBreakdown, RewardConfig,
};

use thiserror::Error;

/// Formation-energy estimates are clamped to this window (eV/atom) before any
/// use; predictions for far-from-valid structures are unreliable.
pub const ENERGY_CLAMP: f64 = 10.0;

#[derive(Debug, Error)]
pub enum RewardError {
    #[error("bond statistics: {0}")]
    BadBondStats(String),
    #[error("no bond statistics for element pair {0}-{1}")]
    MissingBondPair(&'static str, &'static str),
    #[error("reward requires a non-empty terminal structure")]
    EmptyStructure,
    #[error(transparent)]
    Xtal(#[from] crysflow_xtal::XtalError),
}

pub type Result<T> = std::result::Result<T, RewardError>;
