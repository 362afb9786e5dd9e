use std::collections::BTreeMap;

use crysflow_tensor::{Checkpoint, Tape, Tensor, Var};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::{PolicyError, Result};

pub const SPACE_GROUP_COUNT: usize = 230;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncoderKind {
    Megnet,
    Gcn,
}

/// Network widths and encoder choice. The element set fixes the size of the
/// type head and the meaning of its indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub encoder: EncoderKind,
    pub node_width: usize,
    pub edge_width: usize,
    pub lattice_width: usize,
    pub sg_embed_width: usize,
    pub head_hidden: usize,
    pub message_passing_layers: usize,
    /// atomic numbers the type head can emit, in index order
    pub element_set: Vec<u8>,
    /// graph construction for the state encoder
    pub graph_cutoff: f64,
    pub graph_max_neighbors: usize,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig {
            encoder: EncoderKind::Megnet,
            node_width: 32,
            edge_width: 16,
            lattice_width: 32,
            sg_embed_width: 32,
            head_hidden: 64,
            message_passing_layers: 2,
            element_set: vec![3, 11, 19, 4, 5, 6, 7, 8, 14, 15, 16, 17],
            graph_cutoff: 8.0,
            graph_max_neighbors: 12,
        }
    }
}

impl PolicyConfig {
    /// width of the concatenated state embedding (h_sg, h_graph, h_lattice)
    pub fn state_width(&self) -> usize {
        self.sg_embed_width + self.node_width + self.lattice_width
    }

    /// conditioned heads also see the embedding of the newly chosen group
    pub fn conditioned_width(&self) -> usize {
        self.state_width() + self.sg_embed_width
    }

    pub fn element_index(&self, z: u8) -> Option<usize> {
        self.element_set.iter().position(|&e| e == z)
    }
}

/// All learnable tensors of the forward and backward policies plus the scalar
/// log-partition value, keyed by name for optimization and checkpointing.
#[derive(Debug, Clone)]
pub struct PolicyParameters {
    pub config: PolicyConfig,
    pub entries: BTreeMap<String, Tensor>,
}

fn shapes(cfg: &PolicyConfig) -> Vec<(String, Vec<usize>)> {
    let (wv, we, wl, wsg, h) = (
        cfg.node_width,
        cfg.edge_width,
        cfg.lattice_width,
        cfg.sg_embed_width,
        cfg.head_hidden,
    );
    let d = cfg.state_width();
    let dc = cfg.conditioned_width();
    let ne = cfg.element_set.len();
    let mut out: Vec<(String, Vec<usize>)> = vec![
        ("enc.node_in.w".into(), vec![1, wv]),
        ("enc.node_in.b".into(), vec![1, wv]),
        ("enc.edge_in.w".into(), vec![1, we]),
        ("enc.edge_in.b".into(), vec![1, we]),
        ("enc.lattice.w1".into(), vec![9, wl]),
        ("enc.lattice.b1".into(), vec![1, wl]),
        ("enc.lattice.w2".into(), vec![wl, wl]),
        ("enc.lattice.b2".into(), vec![1, wl]),
        ("enc.sg_embed".into(), vec![SPACE_GROUP_COUNT, wsg]),
        ("log_z".into(), vec![]),
    ];
    for l in 0..cfg.message_passing_layers {
        match cfg.encoder {
            EncoderKind::Megnet => {
                out.push((format!("enc.mp{l}.e_src.w"), vec![wv, we]));
                out.push((format!("enc.mp{l}.e_dst.w"), vec![wv, we]));
                out.push((format!("enc.mp{l}.e_feat.w"), vec![we, we]));
                out.push((format!("enc.mp{l}.e.b"), vec![1, we]));
                out.push((format!("enc.mp{l}.v_agg.w"), vec![we, wv]));
                out.push((format!("enc.mp{l}.v_self.w"), vec![wv, wv]));
                out.push((format!("enc.mp{l}.v.b"), vec![1, wv]));
            }
            EncoderKind::Gcn => {
                out.push((format!("enc.gcn{l}.w"), vec![wv, wv]));
                out.push((format!("enc.gcn{l}.b"), vec![1, wv]));
            }
        }
    }
    for dir in ["fwd", "bwd"] {
        out.push((format!("{dir}.sg.w1"), vec![d, h]));
        out.push((format!("{dir}.sg.b1"), vec![1, h]));
        out.push((format!("{dir}.sg.w2"), vec![h, SPACE_GROUP_COUNT]));
        out.push((format!("{dir}.sg.b2"), vec![1, SPACE_GROUP_COUNT]));
        for (head, width) in [("lattice", 12), ("coord", 6), ("elem", ne)] {
            out.push((format!("{dir}.{head}.w1"), vec![dc, h]));
            out.push((format!("{dir}.{head}.b1"), vec![1, h]));
            out.push((format!("{dir}.{head}.w2"), vec![h, width]));
            out.push((format!("{dir}.{head}.b2"), vec![1, width]));
        }
    }
    out
}

impl PolicyParameters {
    /// Fresh parameters: Xavier-uniform weights, zero biases and embeddings
    /// drawn small, log_z at 0.0. The output biases of the Beta heads start
    /// at softplus^-1(1) so continuous actions begin uniform over their
    /// supports rather than piled at the bounds. Deterministic in the seed.
    pub fn init(config: PolicyConfig, seed: u64) -> Self {
        // softplus(x) + floor = 1
        let uniform_bias = ((1.0f64 - crate::BETA_CONCENTRATION_FLOOR).exp() - 1.0).ln();
        let mut rng = StdRng::seed_from_u64(seed);
        let mut entries = BTreeMap::new();
        for (name, shape) in shapes(&config) {
            let numel: usize = shape.iter().product();
            let beta_head_output = (name.contains(".lattice.") || name.contains(".coord."))
                && name.ends_with(".b2");
            let tensor = if name == "log_z" {
                Tensor::scalar(0.0)
            } else if beta_head_output {
                Tensor::full(shape, uniform_bias)
            } else if name.ends_with(".b") || name.contains(".b1") || name.contains(".b2") {
                Tensor::zeros(shape)
            } else if name == "enc.sg_embed" {
                let vals = (0..numel).map(|_| rng.random_range(-0.05..0.05)).collect();
                Tensor::new(shape, vals)
            } else {
                let (fan_in, fan_out) = (shape[0], shape[shape.len() - 1]);
                let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let vals = (0..numel).map(|_| rng.random_range(-bound..bound)).collect();
                Tensor::new(shape, vals)
            };
            entries.insert(name, tensor);
        }
        PolicyParameters { config, entries }
    }

    /// All-zero weights; heads then emit the documented baseline distribution
    /// (uniform categoricals, Beta(softplus(0) + floor, same)).
    pub fn zeroed(config: PolicyConfig) -> Self {
        let entries = shapes(&config)
            .into_iter()
            .map(|(name, shape)| (name, Tensor::zeros(shape)))
            .collect();
        PolicyParameters { config, entries }
    }

    pub fn log_z(&self) -> f64 {
        self.entries["log_z"].item()
    }

    /// Insert every parameter as a differentiable leaf on the tape.
    pub fn bind<'p>(&'p self, tape: &mut Tape) -> BoundPolicy<'p> {
        let vars = self
            .entries
            .iter()
            .map(|(name, tensor)| (name.as_str(), tape.leaf(tensor.clone())))
            .collect();
        BoundPolicy { config: &self.config, vars }
    }

    /// Restore from checkpoint entries (names and shapes must match).
    pub fn from_checkpoint(config: PolicyConfig, ckpt: &Checkpoint) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (name, shape) in shapes(&config) {
            let tensor = ckpt
                .get(&name)
                .ok_or_else(|| PolicyError::MissingParameter(name.clone()))?;
            if tensor.shape() != shape.as_slice() {
                return Err(PolicyError::ParameterShape {
                    name,
                    found: tensor.shape().to_vec(),
                    expected: shape,
                });
            }
            entries.insert(name, tensor.clone());
        }
        Ok(PolicyParameters { config, entries })
    }

    pub fn parameter_count(&self) -> usize {
        self.entries.values().map(|t| t.numel()).sum()
    }
}

/// Parameters bound onto a tape for one differentiable pass.
pub struct BoundPolicy<'p> {
    pub config: &'p PolicyConfig,
    vars: BTreeMap<&'p str, Var>,
}

impl<'p> BoundPolicy<'p> {
    pub fn var(&self, name: &str) -> Var {
        *self
            .vars
            .get(name)
            .unwrap_or_else(|| panic!("unknown parameter `{name}`"))
    }

    pub fn log_z(&self) -> Var {
        self.var("log_z")
    }

    pub fn vars(&self) -> &BTreeMap<&'p str, Var> {
        &self.vars
    }

    /// 2-layer tanh MLP: x [1,in] -> [1,out] (linear output layer).
    pub(crate) fn mlp2(&self, tape: &mut Tape, prefix: &str, x: Var) -> Var {
        let z1 = tape.matmul(x, self.var(&format!("{prefix}.w1")));
        let z1b = tape.add(z1, self.var(&format!("{prefix}.b1")));
        let h = tape.tanh(z1b);
        let z2 = tape.matmul(h, self.var(&format!("{prefix}.w2")));
        tape.add(z2, self.var(&format!("{prefix}.b2")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_is_deterministic_in_seed() {
        let a = PolicyParameters::init(PolicyConfig::default(), 7);
        let b = PolicyParameters::init(PolicyConfig::default(), 7);
        assert_eq!(a.entries, b.entries);
        let c = PolicyParameters::init(PolicyConfig::default(), 8);
        assert_ne!(a.entries, c.entries);
    }

    #[test]
    fn log_z_initialized_to_zero() {
        let p = PolicyParameters::init(PolicyConfig::default(), 1);
        assert_eq!(p.log_z(), 0.0);
    }

    #[test]
    fn checkpoint_roundtrip_via_entries() {
        let p = PolicyParameters::init(PolicyConfig::default(), 3);
        let ckpt: Checkpoint = p.entries.clone();
        let q = PolicyParameters::from_checkpoint(p.config.clone(), &ckpt).unwrap();
        assert_eq!(p.entries, q.entries);
    }

    #[test]
    fn missing_checkpoint_entry_is_reported() {
        let p = PolicyParameters::init(PolicyConfig::default(), 3);
        let mut ckpt: Checkpoint = p.entries.clone();
        ckpt.remove("fwd.sg.w1");
        assert!(matches!(
            PolicyParameters::from_checkpoint(p.config.clone(), &ckpt),
            Err(PolicyError::MissingParameter(_))
        ));
    }

    #[test]
    fn parameter_count_is_desk_scale() {
        let p = PolicyParameters::init(PolicyConfig::default(), 1);
        let n = p.parameter_count();
        assert!(n > 50_000 && n < 2_000_000, "parameter count {n}");
    }
}
