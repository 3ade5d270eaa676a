use std::path::Path;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::array::SECTOR_COUNT;
use crate::error::{Error, Result};
use crate::estimators::{build_training_sets, AoaInput, DatasetRequest, SectorModels};
use crate::neural::{architectures, train, LabeledSet, Mlp, Task, TrainConfig};
use crate::rng;
use crate::scenario::ScenarioConfig;

/// Dataset sizes and optimizer settings for both networks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingPlan {
    pub aoa_per_sector: usize,
    pub as_per_sector: usize,
    /// Independent simulation jobs the samples are split across.
    pub chunks: usize,
    pub aoa_input: AoaInput,
    pub aoa: TrainConfig,
    pub spread: TrainConfig,
    pub seed: u64,
}

impl Default for TrainingPlan {
    fn default() -> Self {
        Self {
            aoa_per_sector: 100_000,
            as_per_sector: 20_000,
            chunks: 16,
            aoa_input: AoaInput::Normalized,
            aoa: TrainConfig {
                learning_rate: 0.1,
                max_epochs: 400,
                patience: 30,
                ..TrainConfig::default()
            },
            spread: TrainConfig {
                learning_rate: 0.1,
                max_epochs: 400,
                patience: 30,
                ..TrainConfig::default()
            },
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainedModels {
    pub aoa: SectorModels,
    pub spread: SectorModels,
}

/// Per-sector AoA and spread training sets simulated from `cfg`.
pub fn build_datasets(
    cfg: &ScenarioConfig,
    plan: &TrainingPlan,
) -> Result<(Vec<LabeledSet>, Vec<LabeledSet>)> {
    if plan.chunks == 0 {
        return Err(Error::config("chunks", "must be at least 1"));
    }
    let per = |total: usize| total.div_ceil(plan.chunks);
    let request = DatasetRequest {
        aoa_per_sector: per(plan.aoa_per_sector),
        as_per_sector: per(plan.as_per_sector),
        aoa_input: plan.aoa_input,
    };
    let parts = (0..plan.chunks)
        .into_par_iter()
        .map(|j| {
            let mut r = rng::stream(plan.seed, &[rng::tag::DATASET, j as u64]);
            build_training_sets(cfg, &request, &mut r)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut parts = parts.into_iter();
    let (mut aoa, mut spread) = parts.next().ok_or(Error::Empty("dataset chunks"))?;
    for (a, s) in parts {
        for (dst, src) in aoa.iter_mut().zip(&a) {
            dst.extend(src)?;
        }
        for (dst, src) in spread.iter_mut().zip(&s) {
            dst.extend(src)?;
        }
    }
    Ok((aoa, spread))
}

/// Fits one network per sector. Sectors with an empty set are left without
/// a network.
pub fn train_sector_models(
    task: Task,
    sets: &[LabeledSet],
    cfg: &ScenarioConfig,
    tc: &TrainConfig,
    aoa_input: AoaInput,
    seed: u64,
) -> Result<SectorModels> {
    if sets.len() != SECTOR_COUNT {
        return Err(Error::dim(format!(
            "{} training sets for {SECTOR_COUNT} sectors",
            sets.len()
        )));
    }
    let arch = architectures(cfg.beams_per_sector, task)?;
    let fitted = sets
        .par_iter()
        .enumerate()
        .map(|(s, set)| {
            if set.is_empty() {
                return Ok(None);
            }
            let task_id = task as u64;
            let mut net = Mlp::seeded(
                &arch[s],
                rng::derive_seed(seed, &[rng::tag::INIT, task_id, s as u64]),
            )?;
            let c = TrainConfig {
                seed: rng::derive_seed(tc.seed, &[rng::tag::SHUFFLE, task_id, s as u64]),
                ..tc.clone()
            };
            let report = train(&mut net, set, &c)?;
            Ok(Some((net, report)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut models = SectorModels::empty(task, cfg.beams_per_sector);
    models.aoa_input = aoa_input;
    models.sigma_range = (cfg.sigma_min, cfg.sigma_max);
    for (s, f) in fitted.into_iter().enumerate() {
        if let Some((net, report)) = f {
            models.set(s, net)?;
            models.set_report(s, report);
        }
    }
    Ok(models)
}

/// Simulates the training data and fits both model bundles.
pub fn train_models(cfg: &ScenarioConfig, plan: &TrainingPlan) -> Result<TrainedModels> {
    cfg.validate()?;
    plan.aoa.validate()?;
    plan.spread.validate()?;
    let (aoa_sets, as_sets) = build_datasets(cfg, plan)?;
    let aoa = train_sector_models(
        Task::Aoa,
        &aoa_sets,
        cfg,
        &plan.aoa,
        plan.aoa_input,
        plan.seed,
    )?;
    let spread = train_sector_models(
        Task::As,
        &as_sets,
        cfg,
        &plan.spread,
        plan.aoa_input,
        plan.seed,
    )?;
    Ok(TrainedModels { aoa, spread })
}

/// Writes a labeled set as CSV: columns `x0..x{n-1}` then `y0..`, one
/// sample per row.
pub fn write_dataset(set: &LabeledSet, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    let header: Vec<String> = (0..set.n_inputs())
        .map(|i| format!("x{i}"))
        .chain((0..set.n_outputs()).map(|i| format!("y{i}")))
        .collect();
    w.write_record(&header)?;
    let mut row = Vec::with_capacity(header.len());
    for j in 0..set.len() {
        row.clear();
        row.extend(set.inputs.column(j).iter().map(f64::to_string));
        row.extend(set.targets.column(j).iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dataset(path: &Path) -> Result<LabeledSet> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.clone();
    let n_in = header.iter().filter(|h| h.starts_with('x')).count();
    let n_out = header.len() - n_in;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for rec in r.records() {
        let rec = rec?;
        let vals = rec
            .iter()
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
            })
            .collect::<Result<Vec<_>>>()?;
        xs.extend_from_slice(&vals[..n_in]);
        ys.extend_from_slice(&vals[n_in..]);
    }
    let m = ys.len() / n_out.max(1);
    LabeledSet::new(
        DMatrix::from_vec(n_in, m, xs),
        DMatrix::from_vec(n_out, m, ys),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_training_run() {
        let cfg = ScenarioConfig {
            n_antennas: 128,
            n_users: 4,
            pilot_len: 32,
            n_realizations: 4,
            ..Default::default()
        };
        let plan = TrainingPlan {
            aoa_per_sector: 300,
            as_per_sector: 150,
            chunks: 2,
            aoa: TrainConfig {
                max_epochs: 3,
                batch_size: 32,
                ..Default::default()
            },
            spread: TrainConfig {
                max_epochs: 3,
                batch_size: 32,
                ..Default::default()
            },
            ..Default::default()
        };
        let m = train_models(&cfg, &plan).unwrap();
        assert!(m.aoa.is_complete() && m.spread.is_complete());
        assert_eq!(m.spread.sigma_range, (0.6, 3.0));
        for s in 0..SECTOR_COUNT {
            assert!(
                m.aoa.report(s).unwrap().n_train + m.aoa.report(s).unwrap().n_validation >= 300
            );
        }
        let again = train_models(&cfg, &plan).unwrap();
        assert_eq!(again.aoa.net(3).unwrap(), m.aoa.net(3).unwrap());
    }

    #[test]
    fn narrow_angle_range_leaves_sectors_empty() {
        let cfg = ScenarioConfig {
            n_antennas: 128,
            n_users: 4,
            pilot_len: 32,
            n_realizations: 3,
            theta_min: -10.0,
            theta_max: 10.0,
            ..Default::default()
        };
        let plan = TrainingPlan {
            aoa_per_sector: 64,
            as_per_sector: 0,
            chunks: 1,
            aoa: TrainConfig {
                max_epochs: 1,
                batch_size: 16,
                ..Default::default()
            },
            ..Default::default()
        };
        let (aoa, spread) = build_datasets(&cfg, &plan).unwrap();
        assert!(aoa[0].is_empty() && aoa[7].is_empty());
        assert!(aoa[3].len() >= 64 && aoa[4].len() >= 64);
        assert!(spread.iter().all(|s| s.is_empty()));
        let m = train_sector_models(Task::Aoa, &aoa, &cfg, &plan.aoa, plan.aoa_input, 0).unwrap();
        assert!(!m.is_complete());
        assert!(m.net(3).is_ok() && m.net(0).is_err());
    }

    #[test]
    fn dataset_csv_round_trip() {
        let set = LabeledSet::from_rows(
            &[vec![0.1, 1.0 / 3.0], vec![2.5, -1e-17]],
            &[vec![0.25], vec![0.75]],
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        write_dataset(&set, &p).unwrap();
        assert!(std::fs::read_to_string(&p)
            .unwrap()
            .starts_with("x0,x1,y0\n"));
        assert_eq!(read_dataset(&p).unwrap(), set);
    }
}
