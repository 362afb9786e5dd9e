//! Reward-term invariance properties: rigid translation, atom reindexing,
//! monotone weighting, and score ranges on random structures.

use crysflow_reward::{
    composite_reward, BondStatsTable, ConstOracle, RewardConfig, SurrogatePotential,
};
use crysflow_xtal::{Atom, CrystalStructure, Lattice};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const BATTERY: [u8; 12] = [3, 11, 19, 4, 5, 6, 7, 8, 14, 15, 16, 17];

fn random_structure(seed: u64, n: usize) -> CrystalStructure {
    let mut rng = StdRng::seed_from_u64(seed);
    let lattice = loop {
        if let Ok(l) = Lattice::new(
            rng.random_range(3.0..9.0),
            rng.random_range(3.0..9.0),
            rng.random_range(3.0..9.0),
            rng.random_range(70.0..110.0),
            rng.random_range(70.0..110.0),
            rng.random_range(70.0..110.0),
        ) {
            break l;
        }
    };
    let atoms: Vec<Atom> = (0..n)
        .map(|_| {
            Atom::new(
                BATTERY[rng.random_range(0..BATTERY.len())],
                [rng.random(), rng.random(), rng.random()],
            )
            .unwrap()
        })
        .collect();
    CrystalStructure::new(lattice, atoms).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn terms_invariant_under_translation_and_reindexing(
        seed in 0u64..500,
        n in 2usize..5,
        shift in prop::array::uniform3(0.0..1.0f64),
    ) {
        let s = random_structure(seed, n);
        let stats = BondStatsTable::default_table();
        let cfg = RewardConfig::default();
        let oracle = SurrogatePotential::with_default_stats();

        let translated = CrystalStructure::new(
            s.lattice,
            s.atoms
                .iter()
                .map(|a| Atom::new(a.z, [
                    a.frac[0] + shift[0],
                    a.frac[1] + shift[1],
                    a.frac[2] + shift[2],
                ]).unwrap())
                .collect(),
        )
        .unwrap();
        let reversed = CrystalStructure::new(
            s.lattice,
            s.atoms.iter().rev().cloned().collect(),
        )
        .unwrap();

        let base = composite_reward(&s, &cfg, &stats, &oracle, None).unwrap();
        for other in [&translated, &reversed] {
            let b = composite_reward(other, &cfg, &stats, &oracle, None).unwrap();
            prop_assert!((b.r_bond - base.r_bond).abs() < 1e-8, "bond {} vs {}", b.r_bond, base.r_bond);
            prop_assert!((b.r_energy - base.r_energy).abs() < 1e-8);
            prop_assert!((b.r_density - base.r_density).abs() < 1e-12);
            prop_assert_eq!(b.r_comp, base.r_comp);
            prop_assert!((b.composite - base.composite).abs() < 1e-8);
        }
    }

    #[test]
    fn score_ranges_hold_on_random_structures(seed in 500u64..900, n in 1usize..5) {
        let s = random_structure(seed, n);
        let stats = BondStatsTable::default_table();
        let cfg = RewardConfig::default();
        let b = composite_reward(&s, &cfg, &stats, &ConstOracle(-1.0), None).unwrap();
        prop_assert!(b.r_bond > 0.0 && b.r_bond <= 1.0, "r_bond {}", b.r_bond);
        prop_assert!(b.r_density >= 0.0 && b.r_density <= cfg.density_gaussian.a);
        prop_assert!(b.r_comp == 0.0 || b.r_comp == 1.0);
        prop_assert!(b.composite.is_finite());
    }

    #[test]
    fn composite_is_monotone_in_each_term(seed in 900u64..1200) {
        // same structure, oracle energy improved -> composite cannot drop
        let s = random_structure(seed, 3);
        let stats = BondStatsTable::default_table();
        let cfg = RewardConfig::default();
        let worse = composite_reward(&s, &cfg, &stats, &ConstOracle(2.0), None).unwrap();
        let better = composite_reward(&s, &cfg, &stats, &ConstOracle(-2.0), None).unwrap();
        prop_assert!(better.composite >= worse.composite);
    }
}
