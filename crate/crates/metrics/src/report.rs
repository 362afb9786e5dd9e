use serde::{Deserialize, Serialize};

/// Evaluation summary emitted by the CLI. Field names are the external
/// contract; match-rate fields are null when no reference set was supplied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub structure_validity_rate: f64,
    pub composition_validity_rate: f64,
    pub diversity_structure: Option<f64>,
    pub diversity_composition: Option<f64>,
    pub family_diversity: f64,
    pub modes: usize,
    pub match_rate: Option<f64>,
    pub mean_rms: Option<f64>,
}
