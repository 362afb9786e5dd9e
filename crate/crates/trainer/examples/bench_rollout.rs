// scratch benchmark: per-epoch training cost at candidate widths
use crysflow_policy::{PolicyConfig, PolicyParameters};
use crysflow_reward::{BondStatsTable, RewardConfig, SurrogatePotential};
use crysflow_trainer::{SamplerConfig, TrainConfig, Trainer};
use std::time::Instant;

fn main() {
    for (wv, we, wl, wsg, h) in [(16usize, 8usize, 16usize, 16usize, 24usize), (32, 16, 32, 32, 64)] {
        let params = PolicyParameters::init(
            PolicyConfig {
                node_width: wv, edge_width: we, lattice_width: wl,
                sg_embed_width: wsg, head_hidden: h, message_passing_layers: 2,
                ..PolicyConfig::default()
            },
            7,
        );
        println!("widths ({wv},{we},{wl},{wsg},{h}): {} params", params.parameter_count());
        let mut t = Trainer::new(
            params,
            SamplerConfig::default(),
            RewardConfig::default(),
            TrainConfig { epochs: 10, batch_size: 32, seed: 9, checkpoint_every: 0, ..TrainConfig::default() },
            BondStatsTable::default_table(),
            Box::new(SurrogatePotential::with_default_stats()),
            None,
        ).unwrap();
        let start = Instant::now();
        let logs = t.train_to(None).unwrap();
        let dt = start.elapsed().as_secs_f64();
        println!("  10 epochs x 32 traj x 3 steps: {dt:.2}s  ({:.1} ms/traj)  mean loss {:.1}", 
                 dt * 1000.0 / 320.0, logs.last().unwrap().loss);
    }
}
