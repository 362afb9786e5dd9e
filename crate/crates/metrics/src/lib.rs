//! Evaluation suite: validity thresholds, fingerprint diversity, crystal
//! family entropy, unique-mode counting, and structure matching.

mod fingerprint;
mod matcher;
mod modes;
mod report;
mod validity;

pub use fingerprint::{
    composition_fingerprint, diversity, family_diversity, structure_fingerprint, Fingerprint,
    FingerprintKind,
};
pub use matcher::{match_structures, MatchOutcome, MatchTolerances};
pub use modes::ModeRegistry;
pub use report::EvaluationReport;
pub use validity::{composition_validity, structure_validity, MIN_INTERATOMIC_DISTANCE};
