use crysflow_spacegroup::{CrystalFamily, LatticeParam};
use crysflow_tensor::{Tape, Var};

use crate::distributions::BETA_CONCENTRATION_FLOOR;
use crate::encoder::StateEmbedding;
use crate::params::BoundPolicy;
use crate::{PolicyError, Result};

/// Forward action distributions at one step: logits over the 230 space
/// groups, a Beta concentration pair per free lattice parameter of the chosen
/// group, per-axis coordinate Betas, and masked element logits.
pub struct ActionDistributions {
    pub sg_logits: Var,
    pub lattice_beta: Vec<(LatticeParam, Var, Var)>,
    pub coord_beta: [(Var, Var); 3],
    pub elem_logits: Var,
    pub elem_allowed: Vec<bool>,
}

/// Backward (reconstruction) distributions at one step: the predecessor's
/// space-group logits, the predecessor's free-lattice Betas, and the removed
/// atom's coordinate/type distributions.
pub struct BackwardDistributions {
    pub sg_logits: Var,
    pub lattice_beta: Vec<(LatticeParam, Var, Var)>,
    pub coord_beta: [(Var, Var); 3],
    pub elem_logits: Var,
}

impl BoundPolicy<'_> {
    /// Space-group logits of the forward policy, conditioned on the current
    /// state embedding.
    pub fn forward_sg_logits(&self, tape: &mut Tape, emb: &StateEmbedding) -> Var {
        self.mlp2(tape, "fwd.sg", emb.h_state)
    }

    /// Atom-lattice distributions of the forward policy, conditioned on the
    /// current state and `cond_sg` (whose embedding is concatenated onto the
    /// state embedding; the hierarchical sampler passes the newly chosen
    /// group, the flat ablation the pre-step one). Beta pairs are emitted for
    /// exactly the free lattice parameters of `lattice_family`.
    pub fn forward_action_dists(
        &self,
        tape: &mut Tape,
        emb: &StateEmbedding,
        cond_sg: u16,
        lattice_family: CrystalFamily,
        elem_allowed: &[bool],
    ) -> Result<ActionDistributions> {
        if elem_allowed.iter().all(|a| !a) {
            return Err(PolicyError::AllElementsMasked);
        }
        let sg_logits = self.forward_sg_logits(tape, emb);
        let cond = self.conditioned_input(tape, emb, cond_sg);
        let lattice_beta = self.lattice_pairs(tape, "fwd.lattice", cond, lattice_family);
        let coord_beta = self.coord_pairs(tape, "fwd.coord", cond);
        let elem_logits = self.mlp2(tape, "fwd.elem", cond);
        Ok(ActionDistributions {
            sg_logits,
            lattice_beta,
            coord_beta,
            elem_logits,
            elem_allowed: elem_allowed.to_vec(),
        })
    }

    /// Predecessor space-group logits of the backward policy.
    pub fn backward_sg_logits(&self, tape: &mut Tape, emb: &StateEmbedding) -> Var {
        self.mlp2(tape, "bwd.sg", emb.h_state)
    }

    /// Backward reconstruction distributions conditioned on `cond_sg`, with
    /// lattice Beta pairs for the predecessor family's free parameters.
    pub fn backward_action_dists(
        &self,
        tape: &mut Tape,
        emb: &StateEmbedding,
        cond_sg: u16,
        lattice_family: CrystalFamily,
    ) -> BackwardDistributions {
        let sg_logits = self.backward_sg_logits(tape, emb);
        let cond = self.conditioned_input(tape, emb, cond_sg);
        let lattice_beta = self.lattice_pairs(tape, "bwd.lattice", cond, lattice_family);
        let coord_beta = self.coord_pairs(tape, "bwd.coord", cond);
        let elem_logits = self.mlp2(tape, "bwd.elem", cond);
        BackwardDistributions { sg_logits, lattice_beta, coord_beta, elem_logits }
    }

    fn conditioned_input(&self, tape: &mut Tape, emb: &StateEmbedding, sg: u16) -> Var {
        let sg_emb = self.sg_embedding(tape, sg);
        let cat = tape.concat(&[emb.h_state, sg_emb]);
        tape.reshape(cat, vec![1, self.config.conditioned_width()])
    }

    /// Concentration pairs for the free lattice parameters of `family`, in
    /// canonical parameter order. The head emits all six slots; constrained
    /// slots are dropped.
    fn lattice_pairs(
        &self,
        tape: &mut Tape,
        prefix: &str,
        cond: Var,
        family: CrystalFamily,
    ) -> Vec<(LatticeParam, Var, Var)> {
        let raw = self.mlp2(tape, prefix, cond);
        let slot = |p: LatticeParam| match p {
            LatticeParam::A => 0,
            LatticeParam::B => 1,
            LatticeParam::C => 2,
            LatticeParam::Alpha => 3,
            LatticeParam::Beta => 4,
            LatticeParam::Gamma => 5,
        };
        family
            .free_parameters()
            .iter()
            .map(|&p| {
                let s = slot(p);
                let alpha = self.concentration(tape, raw, 2 * s);
                let beta = self.concentration(tape, raw, 2 * s + 1);
                (p, alpha, beta)
            })
            .collect()
    }

    fn coord_pairs(&self, tape: &mut Tape, prefix: &str, cond: Var) -> [(Var, Var); 3] {
        let raw = self.mlp2(tape, prefix, cond);
        [0, 1, 2].map(|axis| {
            let alpha = self.concentration(tape, raw, 2 * axis);
            let beta = self.concentration(tape, raw, 2 * axis + 1);
            (alpha, beta)
        })
    }

    /// softplus + floor keeps every concentration strictly positive.
    fn concentration(&self, tape: &mut Tape, raw: Var, index: usize) -> Var {
        let x = tape.pick(raw, index);
        let sp = tape.softplus(x);
        tape.add_const(sp, BETA_CONCENTRATION_FLOOR)
    }
}
