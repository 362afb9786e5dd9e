// scratch: where does trajectory time go
use crysflow_policy::{PolicyConfig, PolicyParameters};
use crysflow_trainer::{sample_trajectory, ActionSource, SamplerConfig};
use crysflow_xtal::{build_graph, neighbor_list};
use rand::rngs::StdRng;
use rand::SeedableRng;
use std::time::Instant;

fn main() {
    let params = PolicyParameters::init(PolicyConfig::default(), 7);
    let cfg = SamplerConfig::default();
    let mut rng = StdRng::seed_from_u64(3);
    // collect terminal structures from some trajectories
    let mut structures = Vec::new();
    let t0 = Instant::now();
    for _ in 0..50 {
        let r = sample_trajectory(&params, &cfg, ActionSource::Draw(&mut rng)).unwrap();
        structures.push(r.terminal.clone());
    }
    println!("50 trajectories sampled in {:.2}s", t0.elapsed().as_secs_f64());
    let natoms: usize = structures.iter().map(|s| s.len()).sum();
    println!("mean atoms/terminal: {:.1}", natoms as f64 / 50.0);

    let t1 = Instant::now();
    for s in &structures {
        let _ = build_graph(s, 8.0, 12).unwrap();
    }
    println!("50 graph builds (8 A): {:.3}s", t1.elapsed().as_secs_f64());
    let t2 = Instant::now();
    for s in &structures {
        let _ = neighbor_list(s, 4.0, None).unwrap();
    }
    println!("50 neighbor lists (4 A): {:.3}s", t2.elapsed().as_secs_f64());
}
