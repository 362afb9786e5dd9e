use std::path::Path;

use anyhow::{bail, Context};
use crysflow_policy::{EncoderKind, PolicyConfig};
use crysflow_reward::{BandGapConfig, BondStatsTable, GaussianParams, RewardConfig};
use crysflow_trainer::{CompositionConstraint, PolicyMode, SamplerConfig, TrainConfig};
use crysflow_xtal::symbol_to_z;
use serde::{Deserialize, Serialize};

pub const CONFIG_VERSION: u32 = 1;

/// One run configuration file (TOML). Defaults mirror the reported training
/// setup: batch 32, Adam at 1e-3 (0.1 for log Z), reward weights
/// 0.2/0.2/0.5/0.1, and the light-element battery set with one alkali.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub version: u32,
    pub elements: ElementsSection,
    pub sampler: SamplerSection,
    pub policy: PolicySection,
    pub reward: RewardSection,
    pub train: TrainSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementsSection {
    pub set: Vec<String>,
    #[serde(default)]
    pub at_most_one_of: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerSection {
    pub steps: usize,
    pub min_length: f64,
    pub max_length: f64,
    pub min_angle: f64,
    pub max_angle: f64,
    pub max_atoms: usize,
    pub max_retries: usize,
    pub mode: PolicyMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySection {
    pub encoder: EncoderKind,
    pub node_width: usize,
    pub edge_width: usize,
    pub lattice_width: usize,
    pub sg_embed_width: usize,
    pub head_hidden: usize,
    pub message_passing_layers: usize,
    pub graph_cutoff: f64,
    pub graph_max_neighbors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardSection {
    pub w_energy: f64,
    pub w_density: f64,
    pub w_bond: f64,
    pub w_comp: f64,
    pub energy_t: f64,
    pub bond_cutoff: f64,
    pub density_gaussian: GaussianParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band_gap: Option<BandGapConfig>,
    /// path to a bond-statistics CSV; the embedded table when absent
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bond_stats: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSection {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub learning_rate_log_z: f64,
    pub seed: u64,
    pub checkpoint_every: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_visited_states: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let policy = PolicyConfig::default();
        let sampler = SamplerConfig::default();
        let reward = RewardConfig::default();
        let train = TrainConfig::default();
        RunConfig {
            version: CONFIG_VERSION,
            elements: ElementsSection {
                set: vec![
                    "Li", "Na", "K", "Be", "B", "C", "N", "O", "Si", "P", "S", "Cl",
                ]
                .into_iter()
                .map(String::from)
                .collect(),
                at_most_one_of: vec![vec![
                    "Li".to_string(),
                    "Na".to_string(),
                    "K".to_string(),
                ]],
            },
            sampler: SamplerSection {
                steps: sampler.steps,
                min_length: sampler.min_length,
                max_length: sampler.max_length,
                min_angle: sampler.min_angle,
                max_angle: sampler.max_angle,
                max_atoms: sampler.max_atoms,
                max_retries: sampler.max_retries,
                mode: sampler.mode,
            },
            policy: PolicySection {
                encoder: policy.encoder,
                node_width: policy.node_width,
                edge_width: policy.edge_width,
                lattice_width: policy.lattice_width,
                sg_embed_width: policy.sg_embed_width,
                head_hidden: policy.head_hidden,
                message_passing_layers: policy.message_passing_layers,
                graph_cutoff: policy.graph_cutoff,
                graph_max_neighbors: policy.graph_max_neighbors,
            },
            reward: RewardSection {
                w_energy: reward.w_energy,
                w_density: reward.w_density,
                w_bond: reward.w_bond,
                w_comp: reward.w_comp,
                energy_t: reward.energy_t,
                bond_cutoff: reward.bond_cutoff,
                density_gaussian: reward.density_gaussian,
                band_gap: None,
                bond_stats: None,
            },
            train: TrainSection {
                epochs: train.epochs,
                batch_size: train.batch_size,
                learning_rate: train.learning_rate,
                learning_rate_log_z: train.learning_rate_log_z,
                seed: train.seed,
                checkpoint_every: train.checkpoint_every,
                max_visited_states: train.max_visited_states,
            },
        }
    }
}

/// Everything a run needs, resolved and validated.
#[derive(Debug)]
pub struct ResolvedConfig {
    pub policy: PolicyConfig,
    pub sampler: SamplerConfig,
    pub reward: RewardConfig,
    pub train: TrainConfig,
    pub bond_stats: BondStatsTable,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: RunConfig = toml::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        if cfg.version != CONFIG_VERSION {
            bail!(
                "config version {} unsupported (this build reads version {CONFIG_VERSION})",
                cfg.version
            );
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Validate against every module's preconditions and resolve symbols.
    pub fn resolve(&self, config_dir: &Path) -> anyhow::Result<ResolvedConfig> {
        let mut element_set = Vec::with_capacity(self.elements.set.len());
        for symbol in &self.elements.set {
            let z = symbol_to_z(symbol)
                .with_context(|| format!("unknown element symbol `{symbol}` in elements.set"))?;
            if element_set.contains(&z) {
                bail!("duplicate element `{symbol}` in elements.set");
            }
            element_set.push(z);
        }
        if element_set.is_empty() {
            bail!("elements.set must not be empty");
        }
        let mut groups = Vec::new();
        for group in &self.elements.at_most_one_of {
            let mut zs = Vec::new();
            for symbol in group {
                let z = symbol_to_z(symbol).with_context(|| {
                    format!("unknown element symbol `{symbol}` in at_most_one_of")
                })?;
                zs.push(z);
            }
            groups.push(zs);
        }

        let policy = PolicyConfig {
            encoder: self.policy.encoder,
            node_width: self.policy.node_width,
            edge_width: self.policy.edge_width,
            lattice_width: self.policy.lattice_width,
            sg_embed_width: self.policy.sg_embed_width,
            head_hidden: self.policy.head_hidden,
            message_passing_layers: self.policy.message_passing_layers,
            element_set,
            graph_cutoff: self.policy.graph_cutoff,
            graph_max_neighbors: self.policy.graph_max_neighbors,
        };
        let sampler = SamplerConfig {
            steps: self.sampler.steps,
            min_length: self.sampler.min_length,
            max_length: self.sampler.max_length,
            min_angle: self.sampler.min_angle,
            max_angle: self.sampler.max_angle,
            max_atoms: self.sampler.max_atoms,
            max_retries: self.sampler.max_retries,
            mode: self.sampler.mode,
            constraint: CompositionConstraint { at_most_one_of: groups },
        };
        sampler.validate().map_err(|e| anyhow::anyhow!("sampler config: {e}"))?;
        let reward = RewardConfig {
            w_energy: self.reward.w_energy,
            w_density: self.reward.w_density,
            w_bond: self.reward.w_bond,
            w_comp: self.reward.w_comp,
            energy_t: self.reward.energy_t,
            bond_cutoff: self.reward.bond_cutoff,
            density_gaussian: self.reward.density_gaussian,
            band_gap: self.reward.band_gap,
        };
        reward.validate().map_err(|e| anyhow::anyhow!("reward config: {e}"))?;
        let bond_stats = match &self.reward.bond_stats {
            Some(rel) => {
                let path = config_dir.join(rel);
                let text = std::fs::read_to_string(&path)
                    .with_context(|| format!("reading bond stats {}", path.display()))?;
                BondStatsTable::parse_csv(&text)
                    .map_err(|e| anyhow::anyhow!("bond stats {}: {e}", path.display()))?
            }
            None => BondStatsTable::default_table(),
        };
        let train = TrainConfig {
            epochs: self.train.epochs,
            batch_size: self.train.batch_size,
            learning_rate: self.train.learning_rate,
            learning_rate_log_z: self.train.learning_rate_log_z,
            seed: self.train.seed,
            checkpoint_every: self.train.checkpoint_every,
            max_visited_states: self.train.max_visited_states,
        };
        if train.batch_size == 0 {
            bail!("train.batch_size must be positive");
        }
        Ok(ResolvedConfig { policy, sampler, reward, train, bond_stats })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_roundtrips_as_a_fixed_point() {
        let cfg = RunConfig::default();
        let text = cfg.to_toml();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.to_toml(), text);
    }

    #[test]
    fn default_config_resolves() {
        let cfg = RunConfig::default();
        let resolved = cfg.resolve(Path::new(".")).unwrap();
        assert_eq!(resolved.policy.element_set.len(), 12);
        assert_eq!(resolved.reward.w_bond, 0.5);
        assert_eq!(resolved.train.batch_size, 32);
        assert_eq!(resolved.train.learning_rate, 0.001);
        assert_eq!(resolved.train.learning_rate_log_z, 0.1);
    }

    #[test]
    fn unknown_element_is_diagnosed() {
        let mut cfg = RunConfig::default();
        cfg.elements.set.push("Xq".into());
        let err = cfg.resolve(Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("Xq"), "{err}");
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let mut cfg = RunConfig::default();
        cfg.version = 99;
        let text = cfg.to_toml();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.toml");
        std::fs::write(&path, text).unwrap();
        assert!(RunConfig::load(&path).is_err());
    }
}
