use serde::{Deserialize, Serialize};

use crysflow_xtal::{density, CrystalStructure};

use crate::bond::{bond_term, BondStatsTable};
use crate::oracle::{BandGapOracle, EnergyOracle};
use crate::oxidation::composition_term;
use crate::{Result, RewardError, ENERGY_CLAMP};

/// Gaussian `a * exp(-(x - b)^2 / (2 c^2))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl GaussianParams {
    pub fn evaluate(&self, x: f64) -> f64 {
        let d = x - self.b;
        self.a * (-(d * d) / (2.0 * self.c * self.c)).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandGapConfig {
    pub weight: f64,
    pub gaussian: GaussianParams,
}

impl Default for BandGapConfig {
    fn default() -> Self {
        // near-zero-gap preference
        BandGapConfig { weight: 0.1, gaussian: GaussianParams { a: 3.0, b: 0.0, c: 0.5 } }
    }
}

/// Weights and constants of the composite reward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardConfig {
    pub w_energy: f64,
    pub w_density: f64,
    pub w_bond: f64,
    pub w_comp: f64,
    /// normalization temperature of the energy term, eV/atom
    pub energy_t: f64,
    pub density_gaussian: GaussianParams,
    /// neighbor cutoff of the bond term, angstrom
    pub bond_cutoff: f64,
    /// present only when a band-gap oracle is configured
    pub band_gap: Option<BandGapConfig>,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig {
            w_energy: 0.2,
            w_density: 0.2,
            w_bond: 0.5,
            w_comp: 0.1,
            energy_t: 1.0,
            density_gaussian: GaussianParams { a: 1.0, b: 3.0, c: 1.5 },
            bond_cutoff: 4.0,
            band_gap: None,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, w) in [
            ("w_energy", self.w_energy),
            ("w_density", self.w_density),
            ("w_bond", self.w_bond),
            ("w_comp", self.w_comp),
        ] {
            if w < 0.0 || !w.is_finite() {
                return Err(RewardError::BadBondStats(format!("weight {name} = {w}")));
            }
        }
        if !(self.energy_t > 0.0) {
            return Err(RewardError::BadBondStats(format!("energy_t = {}", self.energy_t)));
        }
        if !(self.density_gaussian.c > 0.0) {
            return Err(RewardError::BadBondStats("density gaussian c must be positive".into()));
        }
        if !(self.bond_cutoff > 0.0) {
            return Err(RewardError::BadBondStats("bond_cutoff must be positive".into()));
        }
        Ok(())
    }
}

/// Per-term values and the weighted composite for one structure.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub r_energy: f64,
    pub r_bond: f64,
    pub r_density: f64,
    pub r_comp: f64,
    pub r_bandgap: Option<f64>,
    pub n_bond: usize,
    pub energy_per_atom: f64,
    pub composite: f64,
    pub flags: Vec<String>,
}

/// `exp(-clamp(E)/T)`. An oracle failure scores the structure at the worst
/// clamp (+10 eV/atom) and records a flag rather than aborting a batch.
pub fn energy_term(
    s: &CrystalStructure,
    oracle: &dyn EnergyOracle,
    t: f64,
) -> Result<(f64, f64, Option<String>)> {
    if s.is_empty() {
        return Err(RewardError::EmptyStructure);
    }
    let (raw, flag) = match oracle.formation_energy(s) {
        Ok(e) => (e, None),
        Err(err) => (ENERGY_CLAMP, Some(format!("energy oracle failed: {err}"))),
    };
    let clamped = raw.clamp(-ENERGY_CLAMP, ENERGY_CLAMP);
    Ok(((-clamped / t).exp(), clamped, flag))
}

/// Gaussian of the structure density.
pub fn density_term(s: &CrystalStructure, gaussian: &GaussianParams) -> Result<f64> {
    Ok(gaussian.evaluate(density(s)?))
}

/// Gaussian of the predicted band gap; peak at zero gap with the default
/// constants (a = 3.0, b = 0.0, c = 0.5).
pub fn band_gap_term(
    s: &CrystalStructure,
    oracle: &dyn BandGapOracle,
    cfg: &BandGapConfig,
) -> Result<(f64, Option<String>)> {
    if s.is_empty() {
        return Err(RewardError::EmptyStructure);
    }
    match oracle.band_gap(s) {
        Ok(gap) => Ok((cfg.gaussian.evaluate(gap), None)),
        Err(err) => Ok((0.0, Some(format!("band-gap oracle failed: {err}")))),
    }
}

/// Weighted composite of every enabled term, with the per-term breakdown
/// retained for logging.
pub fn composite_reward(
    s: &CrystalStructure,
    cfg: &RewardConfig,
    stats: &BondStatsTable,
    energy_oracle: &dyn EnergyOracle,
    gap_oracle: Option<&dyn BandGapOracle>,
) -> Result<RewardBreakdown> {
    if s.is_empty() {
        return Err(RewardError::EmptyStructure);
    }
    let mut flags = Vec::new();
    let (r_energy, energy_per_atom, flag) = energy_term(s, energy_oracle, cfg.energy_t)?;
    if let Some(f) = flag {
        flags.push(f);
    }
    let (r_bond, n_bond) = bond_term(s, stats, cfg.bond_cutoff)?;
    let r_density = density_term(s, &cfg.density_gaussian)?;
    let (comp, comp_flag) = composition_term(s);
    if let Some(f) = comp_flag {
        flags.push(f);
    }
    let r_comp = comp as f64;

    let mut composite = cfg.w_energy * r_energy
        + cfg.w_density * r_density
        + cfg.w_bond * r_bond
        + cfg.w_comp * r_comp;

    let r_bandgap = match (gap_oracle, &cfg.band_gap) {
        (Some(oracle), Some(bg)) => {
            let (val, flag) = band_gap_term(s, oracle, bg)?;
            if let Some(f) = flag {
                flags.push(f);
            }
            composite += bg.weight * val;
            Some(val)
        }
        (None, Some(_)) => {
            flags.push("band-gap term configured but no oracle wired; term omitted".into());
            None
        }
        _ => None,
    };

    debug_assert!(composite.is_finite());
    Ok(RewardBreakdown {
        r_energy,
        r_bond,
        r_density,
        r_comp,
        r_bandgap,
        n_bond,
        energy_per_atom,
        composite,
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{ConstGapOracle, ConstOracle};
    use crysflow_xtal::{Atom, Lattice};

    fn one_atom() -> CrystalStructure {
        CrystalStructure::new(
            Lattice::cubic(4.0).unwrap(),
            vec![Atom::new(8, [0.0; 3]).unwrap()],
        )
        .unwrap()
    }

    #[test]
    fn zero_energy_scores_one_for_any_t() {
        for t in [0.5, 1.0, 10.0] {
            let (score, _, _) = energy_term(&one_atom(), &ConstOracle(0.0), t).unwrap();
            assert_eq!(score, 1.0);
        }
    }

    #[test]
    fn clamp_floor_with_t_ten_gives_e() {
        let (score, clamped, _) = energy_term(&one_atom(), &ConstOracle(-10.0), 10.0).unwrap();
        assert!((score - std::f64::consts::E).abs() < 1e-12);
        assert_eq!(clamped, -10.0);
    }

    #[test]
    fn runaway_prediction_is_clamped() {
        let (score, clamped, _) = energy_term(&one_atom(), &ConstOracle(-50.0), 10.0).unwrap();
        let (ref_score, _, _) = energy_term(&one_atom(), &ConstOracle(-10.0), 10.0).unwrap();
        assert_eq!(score, ref_score);
        assert_eq!(clamped, -10.0);
    }

    #[test]
    fn failed_oracle_scores_worst_clamp_and_flags() {
        struct Failing;
        impl EnergyOracle for Failing {
            fn formation_energy(
                &self,
                _s: &CrystalStructure,
            ) -> std::result::Result<f64, crate::OracleError> {
                Err(crate::OracleError::Process("boom".into()))
            }
        }
        let (score, clamped, flag) = energy_term(&one_atom(), &Failing, 1.0).unwrap();
        assert_eq!(clamped, ENERGY_CLAMP);
        assert!((score - (-ENERGY_CLAMP).exp()).abs() < 1e-15);
        assert!(flag.unwrap().contains("boom"));
    }

    #[test]
    fn density_gaussian_peak_sigma_and_tail() {
        let g = GaussianParams { a: 1.0, b: 3.0, c: 1.5 };
        assert_eq!(g.evaluate(3.0), 1.0);
        assert!((g.evaluate(4.5) - (-0.5f64).exp()).abs() < 1e-12);
        assert!((g.evaluate(1.5) - (-0.5f64).exp()).abs() < 1e-12);
        assert!(g.evaluate(1e6) == 0.0);
    }

    #[test]
    fn band_gap_constants_from_defaults() {
        let cfg = BandGapConfig::default();
        let s = one_atom();
        let (at_zero, _) = band_gap_term(&s, &ConstGapOracle(0.0), &cfg).unwrap();
        assert_eq!(at_zero, 3.0);
        let (at_half, _) = band_gap_term(&s, &ConstGapOracle(0.5), &cfg).unwrap();
        assert!((at_half - 3.0 * (-0.5f64).exp()).abs() < 1e-12);
        assert!((at_half - 1.8196).abs() < 1e-3);
        let (at_five, _) = band_gap_term(&s, &ConstGapOracle(5.0), &cfg).unwrap();
        assert!(at_five < 1e-12);
    }

    #[test]
    fn composite_is_the_weighted_sum_and_maxes_at_one() {
        // Na-Cl pair with one bond at exactly d_avg, E = 0, neutral
        let stats = BondStatsTable::default_table();
        let (d_min, d_avg) = stats.get(11, 17).unwrap();
        let a = 12.0;
        let s = CrystalStructure::new(
            Lattice::cubic(a).unwrap(),
            vec![
                Atom::new(11, [0.0; 3]).unwrap(),
                Atom::new(17, [0.0, 0.0, d_avg / a]).unwrap(),
            ],
        )
        .unwrap();
        let cfg = RewardConfig::default();
        let b = composite_reward(&s, &cfg, &stats, &ConstOracle(0.0), None).unwrap();
        assert_eq!(b.r_energy, 1.0);
        assert_eq!(b.r_comp, 1.0);
        assert_eq!(b.n_bond, 1);
        // at d = d_avg only the e^{2(d_min - d)} summand remains
        let expected_bond = (-(2.0f64 * (d_min - d_avg)).exp()).exp();
        assert!((b.r_bond - expected_bond).abs() < 1e-9);
        let expected = 0.2 * b.r_energy + 0.2 * b.r_density + 0.5 * b.r_bond + 0.1 * b.r_comp;
        assert!((b.composite - expected).abs() < 1e-12);
        // all four terms at their analytic maxima give exactly 1 with the
        // default weights; the composite never exceeds it without a band-gap term
        assert_eq!(0.2 * 1.0 + 0.2 * 1.0 + 0.5 * 1.0 + 0.1 * 1.0, 1.0);
        assert!(b.composite <= 1.0 + 1e-12);
    }

    #[test]
    fn comp_zero_drops_composite_by_its_weight() {
        // NaCl2 is not neutral; all other terms held fixed
        let stats = BondStatsTable::default_table();
        let s_good = CrystalStructure::new(
            Lattice::cubic(12.0).unwrap(),
            vec![
                Atom::new(11, [0.0; 3]).unwrap(),
                Atom::new(17, [0.5, 0.5, 0.5]).unwrap(),
            ],
        )
        .unwrap();
        let s_bad = CrystalStructure::new(
            Lattice::cubic(12.0).unwrap(),
            vec![
                Atom::new(11, [0.0; 3]).unwrap(),
                Atom::new(17, [0.5, 0.5, 0.5]).unwrap(),
                Atom::new(17, [0.25, 0.75, 0.25]).unwrap(),
            ],
        )
        .unwrap();
        let cfg = RewardConfig::default();
        let good = composite_reward(&s_good, &cfg, &stats, &ConstOracle(0.0), None).unwrap();
        let bad = composite_reward(&s_bad, &cfg, &stats, &ConstOracle(0.0), None).unwrap();
        assert_eq!(good.r_comp, 1.0);
        assert_eq!(bad.r_comp, 0.0);
    }

    #[test]
    fn empty_structure_rejected() {
        let s = CrystalStructure::new(Lattice::cubic(4.0).unwrap(), vec![]).unwrap();
        let stats = BondStatsTable::default_table();
        assert!(matches!(
            composite_reward(&s, &RewardConfig::default(), &stats, &ConstOracle(0.0), None),
            Err(RewardError::EmptyStructure)
        ));
    }
}
