//! Enumerable grid environment for validating the trajectory-balance
//! objective: walk `steps` moves right/up from the origin; terminals are the
//! anti-diagonal cells, each carrying a fixed positive reward. Multiple paths
//! reach the same terminal, the backward policy is uniform over
//! predecessors, and the partition value is computable exactly.

use std::collections::BTreeMap;

use crysflow_tensor::{Adam, Tape, Tensor, Var};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::loss::tb_loss;

#[derive(Debug, Clone)]
pub struct ToyGrid {
    pub steps: usize,
    /// reward of terminal (i, steps - i) for i in 0..=steps
    pub rewards: Vec<f64>,
}

impl ToyGrid {
    pub fn new(steps: usize, rewards: Vec<f64>) -> Self {
        assert_eq!(rewards.len(), steps + 1);
        assert!(rewards.iter().all(|r| *r > 0.0));
        ToyGrid { steps, rewards }
    }

    /// A mildly multi-modal default.
    pub fn default_case() -> Self {
        ToyGrid::new(6, vec![0.2, 3.0, 0.5, 2.5, 0.1, 1.5, 1.0])
    }

    pub fn exact_z(&self) -> f64 {
        self.rewards.iter().sum()
    }

    pub fn true_distribution(&self) -> Vec<f64> {
        let z = self.exact_z();
        self.rewards.iter().map(|r| r / z).collect()
    }

    /// Non-terminal states are cells with i + j < steps.
    pub fn state_count(&self) -> usize {
        (0..self.steps).map(|s| s + 1).sum()
    }

    /// Index of the non-terminal cell (i, j), states enumerated level by
    /// level.
    pub fn state_index(&self, i: usize, j: usize) -> usize {
        let level = i + j;
        debug_assert!(level < self.steps);
        (0..level).map(|s| s + 1).sum::<usize>() + i
    }

    fn predecessors(&self, i: usize, j: usize) -> usize {
        usize::from(i > 0) + usize::from(j > 0)
    }
}

/// Tabular policy: one logit pair (right, up) per non-terminal state, plus
/// the log-partition scalar.
#[derive(Debug, Clone)]
pub struct ToyPolicy {
    pub logits: Tensor,
    pub log_z: Tensor,
}

impl ToyPolicy {
    pub fn zeros(grid: &ToyGrid) -> Self {
        ToyPolicy {
            logits: Tensor::zeros(vec![grid.state_count(), 2]),
            log_z: Tensor::scalar(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToyTrajectory {
    /// choices per step: 0 = right (+i), 1 = up (+j)
    pub choices: Vec<usize>,
}

impl ToyTrajectory {
    pub fn terminal_i(&self) -> usize {
        self.choices.iter().filter(|&&c| c == 0).count()
    }
}

pub fn toy_sample(policy: &ToyPolicy, grid: &ToyGrid, rng: &mut StdRng) -> ToyTrajectory {
    let mut choices = Vec::with_capacity(grid.steps);
    let (mut i, mut j) = (0usize, 0usize);
    for _ in 0..grid.steps {
        let idx = grid.state_index(i, j);
        let l0 = policy.logits.values()[2 * idx];
        let l1 = policy.logits.values()[2 * idx + 1];
        let m = l0.max(l1);
        let p0 = (l0 - m).exp() / ((l0 - m).exp() + (l1 - m).exp());
        let c = usize::from(rng.random::<f64>() >= p0);
        choices.push(c);
        if c == 0 {
            i += 1;
        } else {
            j += 1;
        }
    }
    ToyTrajectory { choices }
}

/// Differentiable TB loss of one toy trajectory: forward log-probs from the
/// tabular logits, backward log-probs from the fixed uniform-over-predecessors
/// policy.
pub fn toy_tb_loss(
    tape: &mut Tape,
    logits: Var,
    log_z: Var,
    grid: &ToyGrid,
    traj: &ToyTrajectory,
) -> Var {
    let (mut i, mut j) = (0usize, 0usize);
    let mut log_pf = tape.constant_scalar(0.0);
    let mut log_pb_const = 0.0;
    for &c in &traj.choices {
        let idx = grid.state_index(i, j);
        let pair = tape.gather(logits, &[2 * idx, 2 * idx + 1]);
        let picked = tape.pick(pair, c);
        let lse = tape.log_sum_exp(pair);
        let lp = tape.sub(picked, lse);
        log_pf = tape.add(log_pf, lp);
        if c == 0 {
            i += 1;
        } else {
            j += 1;
        }
        log_pb_const += (1.0 / grid.predecessors(i, j) as f64).ln();
    }
    let log_pb = tape.constant_scalar(log_pb_const);
    let reward = grid.rewards[i];
    tb_loss(tape, log_z, log_pf, log_pb, reward)
}

/// On-policy TB training of the tabular policy; returns the trained policy
/// and the per-epoch mean losses.
pub fn toy_train(
    grid: &ToyGrid,
    epochs: usize,
    batch: usize,
    lr: f64,
    lr_z: f64,
    seed: u64,
) -> (ToyPolicy, Vec<f64>) {
    let mut policy = ToyPolicy::zeros(grid);
    let mut opt = Adam::new(lr);
    let mut opt_z = Adam::new(lr_z);
    let mut rng = StdRng::seed_from_u64(seed);
    let mut losses = Vec::with_capacity(epochs);
    for _ in 0..epochs {
        let mut grad_logits = vec![0.0; policy.logits.numel()];
        let mut grad_z = 0.0;
        let mut mean_loss = 0.0;
        for _ in 0..batch {
            let traj = toy_sample(&policy, grid, &mut rng);
            let mut tape = Tape::new();
            let logits = tape.leaf(policy.logits.clone());
            let log_z = tape.leaf(policy.log_z.clone());
            let loss = toy_tb_loss(&mut tape, logits, log_z, grid, &traj);
            mean_loss += tape.value(loss).item() / batch as f64;
            let grads = tape.backward(loss).expect("finite loss");
            for (g, d) in grad_logits.iter_mut().zip(grads.wrt(&tape, logits).values()) {
                *g += d / batch as f64;
            }
            grad_z += grads.wrt(&tape, log_z).item() / batch as f64;
        }
        let mut params = BTreeMap::new();
        params.insert("logits".to_string(), policy.logits.clone());
        let mut grads = BTreeMap::new();
        grads.insert(
            "logits".to_string(),
            Tensor::new(policy.logits.shape().to_vec(), grad_logits),
        );
        opt.step(&mut params, &grads).expect("shapes agree");
        policy.logits = params.remove("logits").unwrap();

        let mut zp = BTreeMap::new();
        zp.insert("log_z".to_string(), policy.log_z.clone());
        let mut zg = BTreeMap::new();
        zg.insert("log_z".to_string(), Tensor::scalar(grad_z));
        opt_z.step(&mut zp, &zg).expect("shapes agree");
        policy.log_z = zp.remove("log_z").unwrap();

        losses.push(mean_loss);
    }
    (policy, losses)
}

/// L1 distance between the empirical terminal distribution of the policy and
/// the exact reward distribution R/Z.
pub fn toy_empirical_l1(policy: &ToyPolicy, grid: &ToyGrid, samples: usize, seed: u64) -> f64 {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut counts = vec![0usize; grid.steps + 1];
    for _ in 0..samples {
        let traj = toy_sample(policy, grid, &mut rng);
        counts[traj.terminal_i()] += 1;
    }
    let truth = grid.true_distribution();
    counts
        .iter()
        .zip(&truth)
        .map(|(&c, p)| (c as f64 / samples as f64 - p).abs())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_indexing_is_a_bijection() {
        let grid = ToyGrid::default_case();
        let mut seen = std::collections::BTreeSet::new();
        for level in 0..grid.steps {
            for i in 0..=level {
                let idx = grid.state_index(i, level - i);
                assert!(seen.insert(idx), "duplicate index {idx}");
                assert!(idx < grid.state_count());
            }
        }
        assert_eq!(seen.len(), grid.state_count());
    }

    #[test]
    fn exact_z_is_the_reward_sum() {
        let grid = ToyGrid::default_case();
        assert!((grid.exact_z() - 8.8).abs() < 1e-12);
        let p = grid.true_distribution();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_policy_sampling_is_binomial() {
        let grid = ToyGrid::new(4, vec![1.0; 5]);
        let policy = ToyPolicy::zeros(&grid);
        let mut rng = StdRng::seed_from_u64(5);
        let n = 20_000;
        let mut counts = vec![0usize; 5];
        for _ in 0..n {
            counts[toy_sample(&policy, &grid, &mut rng).terminal_i()] += 1;
        }
        // binomial(4, 1/2): (1, 4, 6, 4, 1) / 16
        let expected = [1.0, 4.0, 6.0, 4.0, 1.0].map(|c| c / 16.0);
        for (c, e) in counts.iter().zip(expected) {
            assert!((*c as f64 / n as f64 - e).abs() < 0.02);
        }
    }

    #[test]
    fn training_reduces_the_loss_and_fits_log_z() {
        let grid = ToyGrid::default_case();
        let (policy, losses) = toy_train(&grid, 400, 16, 0.05, 0.1, 3);
        let first: f64 = losses[..40].iter().sum::<f64>() / 40.0;
        let last: f64 = losses[losses.len() - 40..].iter().sum::<f64>() / 40.0;
        assert!(last < first * 0.2, "loss {first} -> {last}");
        assert!(
            (policy.log_z.item() - grid.exact_z().ln()).abs() < 0.2,
            "log_z {} vs exact {}",
            policy.log_z.item(),
            grid.exact_z().ln()
        );
    }
}
