use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use crysflow_metrics::ModeRegistry;
use crysflow_policy::PolicyParameters;
use crysflow_reward::{
    composite_reward, BandGapOracle, BondStatsTable, EnergyOracle, RewardConfig,
};
use crysflow_tensor::{load_checkpoint, save_checkpoint, Adam, Checkpoint, Tape, Tensor};
use rand::rngs::StdRng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::loss::tb_loss;
use crate::sampler::{sample_trajectory_on, ActionSource, TrajectoryRecord};
use crate::state::SamplerConfig;
use crate::{Result, TrainerError};

/// Optimization settings; defaults follow the reported training setup
/// (batch 32, Adam at 1e-3 with a separate 0.1 rate for log Z, constant
/// schedule).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub learning_rate_log_z: f64,
    pub seed: u64,
    pub checkpoint_every: usize,
    /// optional visited-state budget; training stops once reached
    pub max_visited_states: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            batch_size: 32,
            learning_rate: 0.001,
            learning_rate_log_z: 0.1,
            seed: 0,
            checkpoint_every: 50,
            max_visited_states: None,
        }
    }
}

/// One line of the metrics log; field order is the external contract.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub mean_reward: f64,
    pub r_energy: f64,
    pub r_bond: f64,
    pub r_density: f64,
    pub r_comp: f64,
    pub modes: usize,
    pub states_visited: usize,
    pub loss: f64,
    #[serde(rename = "logZ")]
    pub log_z: f64,
}

/// Deterministic per-rollout stream: every (seed, epoch, index) triple maps
/// to its own generator, so resumed runs resample identical trajectories.
pub fn rollout_seed(seed: u64, epoch: usize, index: usize) -> u64 {
    splitmix64(seed ^ splitmix64((epoch as u64) << 20 | index as u64))
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// On-policy trajectory-balance trainer.
pub struct Trainer {
    pub params: PolicyParameters,
    pub sampler: SamplerConfig,
    pub reward: RewardConfig,
    pub train: TrainConfig,
    bond_stats: BondStatsTable,
    energy_oracle: Box<dyn EnergyOracle>,
    gap_oracle: Option<Box<dyn BandGapOracle>>,
    opt_main: Adam,
    opt_z: Adam,
    modes: ModeRegistry,
    states_visited: usize,
    next_epoch: usize,
}

impl Trainer {
    pub fn new(
        params: PolicyParameters,
        sampler: SamplerConfig,
        reward: RewardConfig,
        train: TrainConfig,
        bond_stats: BondStatsTable,
        energy_oracle: Box<dyn EnergyOracle>,
        gap_oracle: Option<Box<dyn BandGapOracle>>,
    ) -> Result<Self> {
        sampler.validate()?;
        reward
            .validate()
            .map_err(|e| TrainerError::BadConfig(e.to_string()))?;
        let opt_main = Adam::new(train.learning_rate);
        let opt_z = Adam::new(train.learning_rate_log_z);
        Ok(Trainer {
            params,
            sampler,
            reward,
            train,
            bond_stats,
            energy_oracle,
            gap_oracle,
            opt_main,
            opt_z,
            modes: ModeRegistry::new(),
            states_visited: 0,
            next_epoch: 0,
        })
    }

    pub fn modes_found(&self) -> usize {
        self.modes.modes()
    }

    pub fn states_visited(&self) -> usize {
        self.states_visited
    }

    pub fn next_epoch(&self) -> usize {
        self.next_epoch
    }

    /// Sample a batch, score terminal rewards, take one optimizer step on the
    /// mean trajectory-balance loss, and return the epoch log line.
    ///
    /// Rollouts run in parallel (read-only parameters, one rng stream per
    /// rollout index); results are merged in index order, so the epoch is
    /// bit-identical to a sequential run.
    pub fn run_epoch(&mut self) -> Result<EpochLog> {
        let epoch = self.next_epoch;
        let batch = self.train.batch_size;
        let mut grads: BTreeMap<String, Tensor> = BTreeMap::new();
        let mut mean = MeanAccumulator::default();

        let threads = std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
            .min(batch)
            .max(1);
        type RolloutOutput = (
            usize,
            Result<(TrajectoryRecord, crysflow_reward::RewardBreakdown, f64, Vec<(String, Tensor)>)>,
        );
        let mut results: Vec<RolloutOutput> = std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for t in 0..threads {
                let me = &*self;
                handles.push(scope.spawn(move || {
                    let mut chunk = Vec::new();
                    let mut idx = t;
                    while idx < batch {
                        let mut rng =
                            StdRng::seed_from_u64(rollout_seed(me.train.seed, epoch, idx));
                        chunk.push((idx, me.rollout(&mut rng)));
                        idx += threads;
                    }
                    chunk
                }));
            }
            handles.into_iter().flat_map(|h| h.join().expect("rollout thread")).collect()
        });
        results.sort_by_key(|(idx, _)| *idx);

        for (idx, outcome) in results {
            let (record, breakdown, loss_value, rollout_grads) = outcome?;
            if !loss_value.is_finite() {
                return Err(TrainerError::Diverged {
                    epoch,
                    detail: format!("rollout {idx} produced loss {loss_value}"),
                });
            }
            for (name, grad) in rollout_grads {
                match grads.get_mut(&name) {
                    Some(acc) => {
                        let v = acc.values_mut();
                        for (a, g) in v.iter_mut().zip(grad.values()) {
                            *a += g / batch as f64;
                        }
                    }
                    None => {
                        let scaled = Tensor::new(
                            grad.shape().to_vec(),
                            grad.values().iter().map(|g| g / batch as f64).collect(),
                        );
                        grads.insert(name, scaled);
                    }
                }
            }
            mean.add(loss_value, &breakdown);
            self.states_visited += self.sampler.steps;
            self.modes.offer(&record.terminal, breakdown.energy_per_atom);
        }

        let mut z_grads = BTreeMap::new();
        if let Some(g) = grads.remove("log_z") {
            z_grads.insert("log_z".to_string(), g);
        }
        self.opt_main.step(&mut self.params.entries, &grads)?;
        self.opt_z.step(&mut self.params.entries, &z_grads)?;
        self.next_epoch += 1;

        Ok(EpochLog {
            epoch,
            mean_reward: mean.reward / batch as f64,
            r_energy: mean.r_energy / batch as f64,
            r_bond: mean.r_bond / batch as f64,
            r_density: mean.r_density / batch as f64,
            r_comp: mean.r_comp / batch as f64,
            modes: self.modes.modes(),
            states_visited: self.states_visited,
            loss: mean.loss / batch as f64,
            log_z: self.params.log_z(),
        })
    }

    /// One trajectory: sample on a fresh tape, score the terminal structure,
    /// differentiate the TB loss, and hand back per-parameter gradients.
    #[allow(clippy::type_complexity)]
    fn rollout(
        &self,
        rng: &mut StdRng,
    ) -> Result<(
        TrajectoryRecord,
        crysflow_reward::RewardBreakdown,
        f64,
        Vec<(String, Tensor)>,
    )> {
        let mut rejected = 0usize;
        loop {
            let mut tape = Tape::new();
            let bound = self.params.bind(&mut tape);
            match sample_trajectory_on(&mut tape, &bound, &self.sampler, ActionSource::Draw(rng))
            {
                Ok((mut record, logp)) => {
                    record.rejected = rejected;
                    let breakdown = composite_reward(
                        &record.terminal,
                        &self.reward,
                        &self.bond_stats,
                        self.energy_oracle.as_ref(),
                        self.gap_oracle.as_deref(),
                    )?;
                    let loss = tb_loss(
                        &mut tape,
                        bound.log_z(),
                        logp.log_pf,
                        logp.log_pb,
                        breakdown.composite,
                    );
                    let loss_value = tape.value(loss).item();
                    let grads = tape.backward(loss)?;
                    let named: Vec<(String, Tensor)> = bound
                        .vars()
                        .iter()
                        .map(|(name, var)| (name.to_string(), grads.wrt(&tape, *var)))
                        .collect();
                    return Ok((record, breakdown, loss_value, named));
                }
                Err(TrainerError::Rejected(_)) => {
                    rejected += 1;
                    if rejected >= self.sampler.max_retries {
                        return Err(TrainerError::RetriesExhausted(rejected));
                    }
                }
                Err(other) => return Err(other),
            }
        }
    }

    /// Run epochs until the configured count or the visited-state budget,
    /// writing one JSONL metrics line per epoch and periodic checkpoints.
    pub fn train_to(&mut self, out_dir: Option<&Path>) -> Result<Vec<EpochLog>> {
        let mut logs = Vec::new();
        let mut metrics_file = match out_dir {
            Some(dir) => {
                std::fs::create_dir_all(dir.join("checkpoints"))?;
                Some(std::fs::File::create(dir.join("metrics.jsonl"))?)
            }
            None => None,
        };
        for _ in 0..self.train.epochs {
            if let Some(budget) = self.train.max_visited_states {
                if self.states_visited >= budget {
                    break;
                }
            }
            let log = match self.run_epoch() {
                Ok(log) => log,
                Err(TrainerError::Diverged { epoch, detail }) => {
                    if let Some(dir) = out_dir {
                        let _ = self.save_checkpoint(&dir.join("checkpoints/diverged.cftn"));
                    }
                    return Err(TrainerError::Diverged { epoch, detail });
                }
                Err(other) => return Err(other),
            };
            if let Some(f) = metrics_file.as_mut() {
                let line = serde_json::to_string(&log).expect("log serializes");
                writeln!(f, "{line}")?;
            }
            let finished = log.epoch + 1;
            if let Some(dir) = out_dir {
                if self.train.checkpoint_every > 0 && finished % self.train.checkpoint_every == 0 {
                    self.save_checkpoint(
                        &dir.join(format!("checkpoints/ckpt_{finished:06}.cftn")),
                    )?;
                }
            }
            logs.push(log);
        }
        if let Some(dir) = out_dir {
            self.save_checkpoint(&dir.join("checkpoints/ckpt_final.cftn"))?;
        }
        Ok(logs)
    }

    /// Parameters, optimizer moments, and the epoch cursor in one container.
    pub fn save_checkpoint(&self, path: &PathBuf) -> Result<()> {
        let mut entries: Checkpoint = self.params.entries.clone();
        for (k, v) in self.opt_main.state_tensors() {
            entries.insert(format!("opt_main.{k}"), v);
        }
        for (k, v) in self.opt_z.state_tensors() {
            entries.insert(format!("opt_z.{k}"), v);
        }
        entries.insert("meta.epoch".into(), Tensor::scalar(self.next_epoch as f64));
        entries.insert(
            "meta.states_visited".into(),
            Tensor::scalar(self.states_visited as f64),
        );
        save_checkpoint(path, &entries)?;
        Ok(())
    }

    /// Restore a trainer from a checkpoint written by [`Trainer::save_checkpoint`].
    /// With the same seed, the next epoch resamples identical trajectories.
    #[allow(clippy::too_many_arguments)]
    pub fn resume(
        path: &Path,
        config: crysflow_policy::PolicyConfig,
        sampler: SamplerConfig,
        reward: RewardConfig,
        train: TrainConfig,
        bond_stats: BondStatsTable,
        energy_oracle: Box<dyn EnergyOracle>,
        gap_oracle: Option<Box<dyn BandGapOracle>>,
    ) -> Result<Self> {
        let entries = load_checkpoint(path)?;
        let params = PolicyParameters::from_checkpoint(config, &entries)?;
        let mut trainer =
            Trainer::new(params, sampler, reward, train, bond_stats, energy_oracle, gap_oracle)?;
        let mut main_state = BTreeMap::new();
        let mut z_state = BTreeMap::new();
        for (k, v) in &entries {
            if let Some(rest) = k.strip_prefix("opt_main.") {
                main_state.insert(rest.to_string(), v.clone());
            } else if let Some(rest) = k.strip_prefix("opt_z.") {
                z_state.insert(rest.to_string(), v.clone());
            }
        }
        trainer.opt_main.restore(&main_state);
        trainer.opt_z.restore(&z_state);
        if let Some(e) = entries.get("meta.epoch") {
            trainer.next_epoch = e.item() as usize;
        }
        if let Some(s) = entries.get("meta.states_visited") {
            trainer.states_visited = s.item() as usize;
        }
        Ok(trainer)
    }
}

#[derive(Default)]
struct MeanAccumulator {
    loss: f64,
    reward: f64,
    r_energy: f64,
    r_bond: f64,
    r_density: f64,
    r_comp: f64,
}

impl MeanAccumulator {
    fn add(&mut self, loss: f64, b: &crysflow_reward::RewardBreakdown) {
        self.loss += loss;
        self.reward += b.composite;
        self.r_energy += b.r_energy;
        self.r_bond += b.r_bond;
        self.r_density += b.r_density;
        self.r_comp += b.r_comp;
    }
}
