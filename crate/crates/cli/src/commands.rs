use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context};
use crysflow_metrics::{
    composition_fingerprint, diversity, family_diversity, match_structures, structure_fingerprint,
    structure_validity, EvaluationReport, MatchTolerances, ModeRegistry,
};
use crysflow_policy::PolicyParameters;
use crysflow_reward::{
    composite_reward, BandGapOracle, BondStatsTable, EnergyOracle, PipeOracle, RewardBreakdown,
    SurrogatePotential,
};
use crysflow_tensor::load_checkpoint;
use crysflow_trainer::{sample_trajectory, ActionSource, Trainer};
use crysflow_xtal::{export_cif, parse_cif, structure_from_json, structure_to_json, CrystalStructure};
use rand::rngs::StdRng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

pub const ENERGY_ORACLE_ENV: &str = "CRYSFLOW_ENERGY_ORACLE";
pub const GAP_ORACLE_ENV: &str = "CRYSFLOW_GAP_ORACLE";
const ORACLE_TIMEOUT: Duration = Duration::from_secs(60);

/// The energy oracle: an external process when the environment names one,
/// otherwise the builtin pair-potential surrogate.
pub fn energy_oracle(stats: &BondStatsTable) -> anyhow::Result<Box<dyn EnergyOracle>> {
    match std::env::var(ENERGY_ORACLE_ENV) {
        Ok(command) if !command.trim().is_empty() => {
            let mut parts = command.split_whitespace();
            let program = parts.next().expect("non-empty command");
            let args: Vec<String> = parts.map(String::from).collect();
            let oracle = PipeOracle::spawn(program, &args, "energy_per_atom", ORACLE_TIMEOUT)
                .with_context(|| format!("spawning energy oracle `{command}`"))?;
            Ok(Box::new(oracle))
        }
        _ => Ok(Box::new(SurrogatePotential::new(stats.clone()))),
    }
}

pub fn gap_oracle() -> anyhow::Result<Option<Box<dyn BandGapOracle>>> {
    match std::env::var(GAP_ORACLE_ENV) {
        Ok(command) if !command.trim().is_empty() => {
            let mut parts = command.split_whitespace();
            let program = parts.next().expect("non-empty command");
            let args: Vec<String> = parts.map(String::from).collect();
            let oracle = PipeOracle::spawn(program, &args, "band_gap", ORACLE_TIMEOUT)
                .with_context(|| format!("spawning band-gap oracle `{command}`"))?;
            Ok(Some(Box::new(oracle)))
        }
        _ => Ok(None),
    }
}

pub fn cmd_train(
    config_path: &Path,
    out: Option<PathBuf>,
    seed_override: Option<u64>,
) -> anyhow::Result<PathBuf> {
    let mut run_config = RunConfig::load(config_path)?;
    if let Some(seed) = seed_override {
        run_config.train.seed = seed;
    }
    let config_dir = config_path.parent().unwrap_or(Path::new("."));
    let resolved = run_config.resolve(config_dir)?;

    let out_dir = match out {
        Some(dir) => dir,
        None => {
            let stamp = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .expect("clock after epoch")
                .as_secs();
            PathBuf::from(format!("runs/{stamp}"))
        }
    };
    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    std::fs::write(out_dir.join("config.toml"), run_config.to_toml())?;

    let oracle = energy_oracle(&resolved.bond_stats)?;
    let gap = gap_oracle()?;
    let params = PolicyParameters::init(resolved.policy.clone(), resolved.train.seed);
    let mut trainer = Trainer::new(
        params,
        resolved.sampler,
        resolved.reward,
        resolved.train,
        resolved.bond_stats,
        oracle,
        gap,
    )?;
    let logs = trainer.train_to(Some(&out_dir))?;
    eprintln!(
        "trained {} epochs, {} states visited, {} modes; outputs in {}",
        logs.len(),
        trainer.states_visited(),
        trainer.modes_found(),
        out_dir.display()
    );
    Ok(out_dir)
}

/// Per-sample entry of the sampling index, sorted by composite reward
/// descending.
#[derive(Debug, Serialize, Deserialize)]
pub struct SampleEntry {
    pub file: String,
    pub space_group: u16,
    pub formula: String,
    pub reward: RewardBreakdown,
}

pub fn cmd_sample(
    config_path: &Path,
    checkpoint: &Path,
    n: usize,
    out_dir: &Path,
    seed: u64,
) -> anyhow::Result<()> {
    let run_config = RunConfig::load(config_path)?;
    let config_dir = config_path.parent().unwrap_or(Path::new("."));
    let resolved = run_config.resolve(config_dir)?;
    let entries = load_checkpoint(checkpoint)
        .with_context(|| format!("loading checkpoint {}", checkpoint.display()))?;
    let params = PolicyParameters::from_checkpoint(resolved.policy.clone(), &entries)?;
    let oracle = energy_oracle(&resolved.bond_stats)?;
    let gap = gap_oracle()?;

    std::fs::create_dir_all(out_dir)?;
    let mut rng = StdRng::seed_from_u64(seed);
    let mut samples: Vec<(CrystalStructure, u16, RewardBreakdown)> = Vec::with_capacity(n);
    for _ in 0..n {
        let record = sample_trajectory(&params, &resolved.sampler, ActionSource::Draw(&mut rng))?;
        let group = record.steps.last().map(|s| s.action.space_group).unwrap_or(1);
        let breakdown = composite_reward(
            &record.terminal,
            &resolved.reward,
            &resolved.bond_stats,
            oracle.as_ref(),
            gap.as_deref(),
        )?;
        samples.push((record.terminal, group, breakdown));
    }
    samples.sort_by(|a, b| b.2.composite.partial_cmp(&a.2.composite).expect("finite rewards"));

    let mut index = Vec::with_capacity(n);
    for (i, (structure, group, breakdown)) in samples.into_iter().enumerate() {
        let file = format!("sample_{i:04}.cif");
        std::fs::write(out_dir.join(&file), export_cif(&structure, Some(group)))?;
        index.push(SampleEntry {
            file,
            space_group: group,
            formula: structure.reduced_formula(),
            reward: breakdown,
        });
    }
    std::fs::write(
        out_dir.join("index.json"),
        serde_json::to_string_pretty(&index).expect("index serializes"),
    )?;
    eprintln!("wrote {n} samples to {}", out_dir.display());
    Ok(())
}

/// Evaluate a directory of sampled CIFs (plus its index for space-group
/// assignments). An optional reference directory with same-named files turns
/// on match-rate reporting.
pub fn cmd_evaluate(
    sample_dir: &Path,
    relaxed_dir: Option<&Path>,
    bond_stats: &BondStatsTable,
) -> anyhow::Result<EvaluationReport> {
    let mut cif_paths: Vec<PathBuf> = std::fs::read_dir(sample_dir)
        .with_context(|| format!("reading {}", sample_dir.display()))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().map(|x| x == "cif").unwrap_or(false))
        .collect();
    cif_paths.sort();
    if cif_paths.is_empty() {
        bail!("no .cif files in {}", sample_dir.display());
    }
    let mut structures = Vec::with_capacity(cif_paths.len());
    for path in &cif_paths {
        let text = std::fs::read_to_string(path)?;
        let s = parse_cif(&text)
            .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
        structures.push(s);
    }

    // space groups from the sampling index when present
    let mut groups_by_file: BTreeMap<String, u16> = BTreeMap::new();
    let index_path = sample_dir.join("index.json");
    if index_path.exists() {
        let entries: Vec<SampleEntry> =
            serde_json::from_str(&std::fs::read_to_string(&index_path)?)
                .with_context(|| "parsing index.json")?;
        for e in entries {
            groups_by_file.insert(e.file, e.space_group);
        }
    }
    let groups: Vec<u16> = cif_paths
        .iter()
        .filter_map(|p| {
            let name = p.file_name()?.to_string_lossy().to_string();
            groups_by_file.get(&name).copied()
        })
        .collect();

    let n = structures.len();
    let struct_valid =
        structures.iter().filter(|s| structure_validity(s)).count() as f64 / n as f64;
    let comp_valid = structures
        .iter()
        .filter(|s| crysflow_metrics::composition_validity(s))
        .count() as f64
        / n as f64;
    let sfp: Vec<_> = structures.iter().map(structure_fingerprint).collect();
    let cfp: Vec<_> = structures.iter().map(composition_fingerprint).collect();

    let surrogate = SurrogatePotential::new(bond_stats.clone());
    let mut registry = ModeRegistry::new();
    for s in &structures {
        let (e, _) = surrogate.evaluate(s)?;
        registry.offer(s, e);
    }

    let (match_rate, mean_rms) = match relaxed_dir {
        Some(dir) => {
            let mut matched = 0usize;
            let mut rms_sum = 0.0;
            let mut rms_count = 0usize;
            for (path, s) in cif_paths.iter().zip(&structures) {
                let name = path.file_name().expect("file name");
                let reference = dir.join(name);
                if !reference.exists() {
                    continue;
                }
                let text = std::fs::read_to_string(&reference)?;
                let r = parse_cif(&text)
                    .map_err(|e| anyhow::anyhow!("{}: {e}", reference.display()))?;
                let outcome = match_structures(s, &r, &MatchTolerances::default());
                if outcome.matched {
                    matched += 1;
                    if let Some(rms) = outcome.rms {
                        rms_sum += rms;
                        rms_count += 1;
                    }
                }
            }
            (
                Some(matched as f64 / n as f64),
                if rms_count > 0 { Some(rms_sum / rms_count as f64) } else { None },
            )
        }
        None => (None, None),
    };

    Ok(EvaluationReport {
        structure_validity_rate: struct_valid,
        composition_validity_rate: comp_valid,
        diversity_structure: diversity(&sfp),
        diversity_composition: diversity(&cfp),
        family_diversity: family_diversity(&groups),
        modes: registry.modes(),
        match_rate,
        mean_rms,
    })
}

/// Validate a bond-statistics CSV and install it next to the config.
pub fn cmd_bond_stats(csv: &Path, out: &Path) -> anyhow::Result<usize> {
    let text = std::fs::read_to_string(csv)
        .with_context(|| format!("reading {}", csv.display()))?;
    let table = BondStatsTable::parse_csv(&text).map_err(|e| anyhow::anyhow!("{e}"))?;
    std::fs::write(out, table.to_csv())?;
    Ok(table.len())
}

/// Convert a structure between the CIF and JSON mirror formats, inferring
/// directions from the file extensions.
pub fn cmd_export(input: &Path, output: &Path) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(input)
        .with_context(|| format!("reading {}", input.display()))?;
    let ext = |p: &Path| {
        p.extension()
            .map(|e| e.to_string_lossy().to_lowercase())
            .unwrap_or_default()
    };
    let structure = match ext(input).as_str() {
        "cif" => parse_cif(&text).map_err(|e| anyhow::anyhow!("{}: {e}", input.display()))?,
        "json" => {
            structure_from_json(&text).map_err(|e| anyhow::anyhow!("{}: {e}", input.display()))?
        }
        other => bail!("unsupported input extension `{other}` (use .cif or .json)"),
    };
    let rendered = match ext(output).as_str() {
        "cif" => export_cif(&structure, None),
        "json" => structure_to_json(&structure),
        other => bail!("unsupported output extension `{other}` (use .cif or .json)"),
    };
    std::fs::write(output, rendered)?;
    Ok(())
}
