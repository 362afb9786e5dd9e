use crysflow_policy::{
    beta_log_prob, categorical_log_prob, sample_beta, sample_categorical, BoundPolicy,
    PolicyParameters, StateInput,
};
use crysflow_spacegroup::{group_ops, CrystalFamily, LatticeParam};
use crysflow_tensor::{Tape, Var};
use crysflow_xtal::{CrystalStructure, Lattice};
use rand::rngs::StdRng;

use crate::state::{CrystalState, PolicyMode, SamplerConfig};
use crate::{Result, TrainerError};

/// One sampled action, stored in unit-interval coordinates so densities can
/// be replayed exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct StepAction {
    pub space_group: u16,
    /// unit-interval draws for the free lattice parameters of `space_group`,
    /// in the family's canonical order
    pub lattice_units: Vec<f64>,
    /// unit-interval coordinate of the new reference atom
    pub coord_units: [f64; 3],
    /// index into the policy's element set
    pub element_index: usize,
}

#[derive(Debug, Clone)]
pub struct TrajectoryStep {
    pub action: StepAction,
    pub state_after: CrystalState,
}

/// A complete sampled trajectory with recorded per-direction log-densities.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub steps: Vec<TrajectoryStep>,
    pub terminal: CrystalStructure,
    pub log_pf: f64,
    pub log_pb: f64,
    /// trajectories rejected (symmetry collision or atom-cap overflow) before
    /// this one succeeded
    pub rejected: usize,
}

impl TrajectoryRecord {
    pub fn actions(&self) -> Vec<StepAction> {
        self.steps.iter().map(|s| s.action.clone()).collect()
    }
}

/// Differentiable log-densities of one trajectory on a tape.
pub struct TrajectoryLogProb {
    pub log_pf: Var,
    pub log_pb: Var,
}

/// Where actions come from: drawn from the policy or replayed/forced.
pub enum ActionSource<'a> {
    Draw(&'a mut StdRng),
    Given(&'a [StepAction]),
}

/// Space groups whose worst-case expansion (group order times reference-atom
/// count) would exceed the atom cap are masked out of the categorical before
/// sampling, so the cap is a support restriction with properly normalized
/// densities instead of a rejection loop the objective cannot see. The flat
/// mode never replicates atoms, so nothing is masked there.
fn allowed_groups(cfg: &SamplerConfig, refs_after: usize) -> Vec<bool> {
    match cfg.mode {
        PolicyMode::Flat => vec![true; 230],
        PolicyMode::Hierarchical => (1..=230u16)
            .map(|g| {
                let order = group_ops(g).expect("all groups load").order();
                order * refs_after.max(1) <= cfg.max_atoms
            })
            .collect(),
    }
}

fn lattice_unit_values(cfg: &SamplerConfig, lattice: &Lattice, family: CrystalFamily) -> Vec<f64> {
    family
        .free_parameters()
        .iter()
        .map(|p| {
            let (value, lo, width) = match p {
                LatticeParam::A => (lattice.a, cfg.min_length, cfg.length_width()),
                LatticeParam::B => (lattice.b, cfg.min_length, cfg.length_width()),
                LatticeParam::C => (lattice.c, cfg.min_length, cfg.length_width()),
                LatticeParam::Alpha => (lattice.alpha, cfg.min_angle, cfg.angle_width()),
                LatticeParam::Beta => (lattice.beta, cfg.min_angle, cfg.angle_width()),
                LatticeParam::Gamma => (lattice.gamma, cfg.min_angle, cfg.angle_width()),
            };
            (value - lo) / width
        })
        .collect()
}

fn lattice_from_units(
    cfg: &SamplerConfig,
    base: &Lattice,
    group: u16,
    units: &[f64],
) -> Result<Lattice> {
    let family = CrystalFamily::from_number(group)
        .ok_or(TrainerError::BadConfig(format!("group {group}")))?;
    let mut l = *base;
    for (p, &u) in family.free_parameters().iter().zip(units) {
        let value = match p {
            LatticeParam::A | LatticeParam::B | LatticeParam::C => {
                cfg.min_length + u * cfg.length_width()
            }
            _ => cfg.min_angle + u * cfg.angle_width(),
        };
        match p {
            LatticeParam::A => l.a = value,
            LatticeParam::B => l.b = value,
            LatticeParam::C => l.c = value,
            LatticeParam::Alpha => l.alpha = value,
            LatticeParam::Beta => l.beta = value,
            LatticeParam::Gamma => l.gamma = value,
        }
    }
    Ok(family.constraint().project(&l))
}

/// Run one trajectory on the given tape, recording forward and backward
/// log-density terms. With `ActionSource::Draw` the policy is sampled; with
/// `ActionSource::Given` the provided actions are replayed (also the "forced
/// actions" path), so gradients can be re-derived for any recorded
/// trajectory.
pub fn sample_trajectory_on(
    tape: &mut Tape,
    bound: &BoundPolicy,
    cfg: &SamplerConfig,
    mut source: ActionSource,
) -> Result<(TrajectoryRecord, TrajectoryLogProb)> {
    cfg.validate()?;
    let policy_cfg = bound.config;
    let mut state = CrystalState::initial();
    let mut steps: Vec<TrajectoryStep> = Vec::with_capacity(cfg.steps);
    let mut log_pf_terms: Vec<Var> = Vec::new();
    let mut log_pb_terms: Vec<Var> = Vec::new();

    let mut emb = bound.encode_state(
        tape,
        &StateInput {
            space_group: state.space_group,
            lattice: &state.lattice,
            graph: &state.graph,
        },
    );

    for t in 0..cfg.steps {
        // ---- forward: space-group level ----
        let sg_logits = bound.forward_sg_logits(tape, &emb);
        let sg_allowed = allowed_groups(cfg, state.reference_atoms.len() + 1);
        let new_sg: u16 = match &mut source {
            ActionSource::Draw(rng) => {
                let logits = tape.value(sg_logits).values().to_vec();
                (sample_categorical(&logits, &sg_allowed, rng)? + 1) as u16
            }
            ActionSource::Given(actions) => actions[t].space_group,
        };
        let lp_sg =
            categorical_log_prob(tape, sg_logits, &sg_allowed, new_sg as usize - 1)?;
        log_pf_terms.push(lp_sg);

        // ---- forward: atom-lattice level, conditioned on the new group in
        // hierarchical mode and on the pre-step state alone in flat mode ----
        let cond_sg = match cfg.mode {
            PolicyMode::Hierarchical => new_sg,
            PolicyMode::Flat => state.space_group,
        };
        let allowed = cfg
            .constraint
            .allowed(&policy_cfg.element_set, &state.present_elements());
        let family = CrystalFamily::from_number(new_sg).expect("group in range");
        let dists = bound.forward_action_dists(tape, &emb, cond_sg, family, &allowed)?;

        let free = family.free_parameters();
        let mut lattice_units = Vec::with_capacity(free.len());
        for (k, p) in free.iter().enumerate() {
            let (pair_param, alpha, beta) = dists.lattice_beta[k];
            debug_assert_eq!(pair_param, *p);
            let u = match &mut source {
                ActionSource::Draw(rng) => {
                    sample_beta(tape.value(alpha).item(), tape.value(beta).item(), rng)
                }
                ActionSource::Given(actions) => actions[t].lattice_units[k],
            };
            let width = match p {
                LatticeParam::A | LatticeParam::B | LatticeParam::C => cfg.length_width(),
                _ => cfg.angle_width(),
            };
            log_pf_terms.push(beta_log_prob(tape, alpha, beta, u, width));
            lattice_units.push(u);
        }

        let mut coord_units = [0.0; 3];
        for axis in 0..3 {
            let (alpha, beta) = dists.coord_beta[axis];
            let u = match &mut source {
                ActionSource::Draw(rng) => {
                    sample_beta(tape.value(alpha).item(), tape.value(beta).item(), rng)
                }
                ActionSource::Given(actions) => actions[t].coord_units[axis],
            };
            log_pf_terms.push(beta_log_prob(tape, alpha, beta, u, 1.0));
            coord_units[axis] = u;
        }

        let element_index = match &mut source {
            ActionSource::Draw(rng) => {
                let logits = tape.value(dists.elem_logits).values().to_vec();
                sample_categorical(&logits, &allowed, rng)?
            }
            ActionSource::Given(actions) => actions[t].element_index,
        };
        log_pf_terms.push(categorical_log_prob(
            tape,
            dists.elem_logits,
            &allowed,
            element_index,
        )?);
        let element_z = *policy_cfg
            .element_set
            .get(element_index)
            .ok_or(crysflow_policy::PolicyError::BadElementChoice(element_index))?;

        // ---- apply the action ----
        let action = StepAction { space_group: new_sg, lattice_units, coord_units, element_index };
        let prev_state = state.clone();
        state.space_group = new_sg;
        state.lattice = lattice_from_units(cfg, &prev_state.lattice, new_sg, &action.lattice_units)?;
        state.reference_atoms.push((element_z, coord_units));
        state.rebuild(
            cfg.mode,
            cfg.max_atoms,
            policy_cfg.graph_cutoff,
            policy_cfg.graph_max_neighbors,
        )?;

        // ---- backward densities from the post-step state ----
        let emb_after = bound.encode_state(
            tape,
            &StateInput {
                space_group: state.space_group,
                lattice: &state.lattice,
                graph: &state.graph,
            },
        );
        let bwd_sg_logits = bound.backward_sg_logits(tape, &emb_after);
        let prev_allowed = allowed_groups(cfg, prev_state.reference_atoms.len());
        log_pb_terms.push(categorical_log_prob(
            tape,
            bwd_sg_logits,
            &prev_allowed,
            prev_state.space_group as usize - 1,
        )?);
        let bwd_cond = match cfg.mode {
            PolicyMode::Hierarchical => prev_state.space_group,
            PolicyMode::Flat => state.space_group,
        };
        let prev_family =
            CrystalFamily::from_number(prev_state.space_group).expect("group in range");
        let bwd = bound.backward_action_dists(tape, &emb_after, bwd_cond, prev_family);
        let prev_units = lattice_unit_values(cfg, &prev_state.lattice, prev_family);
        for (k, p) in prev_family.free_parameters().iter().enumerate() {
            let (_, alpha, beta) = bwd.lattice_beta[k];
            let width = match p {
                LatticeParam::A | LatticeParam::B | LatticeParam::C => cfg.length_width(),
                _ => cfg.angle_width(),
            };
            log_pb_terms.push(beta_log_prob(tape, alpha, beta, prev_units[k], width));
        }
        for axis in 0..3 {
            let (alpha, beta) = bwd.coord_beta[axis];
            log_pb_terms.push(beta_log_prob(tape, alpha, beta, coord_units[axis], 1.0));
        }
        let full_elements = vec![true; policy_cfg.element_set.len()];
        log_pb_terms.push(categorical_log_prob(
            tape,
            bwd.elem_logits,
            &full_elements,
            element_index,
        )?);

        steps.push(TrajectoryStep { action, state_after: state.clone() });
        emb = emb_after;
    }

    let log_pf = sum_vars(tape, &log_pf_terms);
    let log_pb = sum_vars(tape, &log_pb_terms);
    let record = TrajectoryRecord {
        terminal: state.structure.clone(),
        steps,
        log_pf: tape.value(log_pf).item(),
        log_pb: tape.value(log_pb).item(),
        rejected: 0,
    };
    Ok((record, TrajectoryLogProb { log_pf, log_pb }))
}

fn sum_vars(tape: &mut Tape, terms: &[Var]) -> Var {
    let mut acc = tape.constant_scalar(0.0);
    for &t in terms {
        acc = tape.add(acc, t);
    }
    acc
}

/// Sample one trajectory with rejection-resampling on symmetry collisions
/// and atom-cap overflows. Forced/replayed runs do not retry.
pub fn sample_trajectory(
    params: &PolicyParameters,
    cfg: &SamplerConfig,
    mut source: ActionSource,
) -> Result<TrajectoryRecord> {
    let mut rejected = 0usize;
    loop {
        let mut tape = Tape::new();
        let bound = params.bind(&mut tape);
        let inner = match &mut source {
            ActionSource::Draw(rng) => {
                sample_trajectory_on(&mut tape, &bound, cfg, ActionSource::Draw(rng))
            }
            ActionSource::Given(actions) => {
                return sample_trajectory_on(&mut tape, &bound, cfg, ActionSource::Given(actions))
                    .map(|(rec, _)| rec);
            }
        };
        match inner {
            Ok((mut rec, _)) => {
                rec.rejected = rejected;
                return Ok(rec);
            }
            Err(TrainerError::Rejected(_)) => {
                rejected += 1;
                if rejected >= cfg.max_retries {
                    return Err(TrainerError::RetriesExhausted(rejected));
                }
            }
            Err(other) => return Err(other),
        }
    }
}
