// scratch: calibrate the desk-scale acceptance run
use crysflow_policy::{PolicyConfig, PolicyParameters};
use crysflow_reward::{composite_reward, BondStatsTable, RewardConfig, SurrogatePotential};
use crysflow_metrics::{composition_validity, structure_validity};
use crysflow_trainer::{sample_trajectory, ActionSource, PolicyMode, SamplerConfig, TrainConfig, Trainer};
use rand::rngs::StdRng;
use rand::SeedableRng;
use std::time::Instant;

fn main() {
    let budget: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(50_000);
    let seed: u64 = std::env::args().nth(5).and_then(|s| s.parse().ok()).unwrap_or(0);
    let lr: f64 = std::env::args().nth(3).and_then(|s| s.parse().ok()).unwrap_or(0.001);
    let energy_t: f64 = std::env::args().nth(4).and_then(|s| s.parse().ok()).unwrap_or(1.0);
    let mode = match std::env::args().nth(2).as_deref() {
        Some("flat") => PolicyMode::Flat,
        _ => PolicyMode::Hierarchical,
    };
    let policy_cfg = PolicyConfig {
        node_width: 16, edge_width: 8, lattice_width: 16,
        sg_embed_width: 16, head_hidden: 24, message_passing_layers: 2,
        graph_cutoff: 4.0, ..PolicyConfig::default()
    };
    let steps: usize = std::env::args().nth(6).and_then(|s| s.parse().ok()).unwrap_or(3);
    let sampler = SamplerConfig { steps, mode, ..SamplerConfig::default() };
    let params = PolicyParameters::init(policy_cfg, seed);
    let reward_cfg = RewardConfig { energy_t, ..RewardConfig::default() };
    let mut trainer = Trainer::new(
        params, sampler.clone(), reward_cfg.clone(),
        TrainConfig { epochs: 100_000, batch_size: 32, seed, checkpoint_every: 0,
                      learning_rate: lr,
                      max_visited_states: Some(budget), ..TrainConfig::default() },
        BondStatsTable::default_table(),
        Box::new(SurrogatePotential::with_default_stats()), None,
    ).unwrap();
    let t0 = Instant::now();
    let logs = trainer.train_to(None).unwrap();
    let dt = t0.elapsed().as_secs_f64();
    let q = logs.len() / 4;
    let first: f64 = logs[..q].iter().map(|l| l.mean_reward).sum::<f64>() / q as f64;
    let last: f64 = logs[logs.len()-q..].iter().map(|l| l.mean_reward).sum::<f64>() / q as f64;
    let curve: Vec<usize> = logs.iter().step_by(100).map(|l| l.modes).collect();
    println!("  mode curve every 100 epochs: {curve:?}");
    let comp_first: f64 = logs[..q].iter().map(|l| l.r_comp).sum::<f64>() / q as f64;
    let comp_last: f64 = logs[logs.len()-q..].iter().map(|l| l.r_comp).sum::<f64>() / q as f64;
    println!("seed {seed} mode {:?} lr {} T {}: {} epochs in {:.0}s; modes {}; reward q1 {:.3} -> q4 {:.3}; r_comp {:.2} -> {:.2}; logZ {:.2}",
             mode, lr, energy_t, logs.len(), dt, trainer.modes_found(), first, last, comp_first, comp_last, logs.last().unwrap().log_z);

    // criterion-7 style: sample 400, rank, top-100 validity
    let mut rng = StdRng::seed_from_u64(1);
    let stats = BondStatsTable::default_table();
    let oracle = SurrogatePotential::with_default_stats();
    let t1 = Instant::now();
    let mut scored = Vec::new();
    for _ in 0..400 {
        let rec = sample_trajectory(&trainer.params, &sampler, ActionSource::Draw(&mut rng)).unwrap();
        let b = composite_reward(&rec.terminal, &reward_cfg, &stats, &oracle, None).unwrap();
        scored.push((rec.terminal, b.composite));
    }
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    let top: Vec<_> = scored.iter().take(100).collect();
    let sv = top.iter().filter(|(s, _)| structure_validity(s)).count();
    let cv = top.iter().filter(|(s, _)| composition_validity(s)).count();
    println!("top-100 of 400 (sampled in {:.0}s): structure validity {}/100, composition validity {}/100",
             t1.elapsed().as_secs_f64(), sv, cv);
}
