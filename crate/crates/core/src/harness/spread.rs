use rayon::prelude::*;

use crate::airlink::generate_pilots;
use crate::array::sector_plan;
use crate::error::{Error, Result};
use crate::estimators::{dnn_as_estimate, observe_scenario, Method, SectorModels};
use crate::neural::Task;
use crate::rng;
use crate::scenario::sample_scenario;

use super::metrics::mse;
use super::spec::ExperimentSpec;
use super::table::MetricsTable;

#[derive(Debug, Clone)]
pub struct AsRun {
    pub table: MetricsTable,
    /// Signed spread errors `σ̂ − σ` per axis value.
    pub errors: Vec<Vec<f64>>,
}

/// Spread-network MSE over the axis; `spec.methods` is ignored.
pub fn run_as_sweep(spec: &ExperimentSpec, models: &SectorModels) -> Result<AsRun> {
    spec.validate()?;
    if models.task != Task::As || !models.is_complete() {
        return Err(Error::InvalidArgument(
            "a complete spread model bundle is required".into(),
        ));
    }
    if models.beams_per_sector != spec.base.beams_per_sector {
        return Err(Error::dim("model and experiment beam counts differ"));
    }
    let mut table = MetricsTable::new();
    let mut all = Vec::with_capacity(spec.axis_values.len());
    for (ai, &value) in spec.axis_values.iter().enumerate() {
        let cfg = spec.config_at(ai)?;
        let beams = sector_plan(cfg.beams_per_sector, cfg.n_antennas)?.all_beams();
        let per_trial = (0..spec.n_trials)
            .into_par_iter()
            .map(|t| -> Result<Vec<f64>> {
                let mut r = rng::stream(spec.seed, &[rng::tag::TRIAL, ai as u64, t as u64]);
                let scenario = sample_scenario(&cfg, &mut r)?;
                let pilots = generate_pilots(cfg.n_users, cfg.pilot_len, &mut r)?;
                let obs = observe_scenario(&scenario, &pilots, &beams, &mut r, false)?;
                obs.iter()
                    .zip(&scenario.taps)
                    .map(|(o, tap)| Ok(dnn_as_estimate(models, o)? - tap.spread_deg))
                    .collect()
            })
            .collect::<Result<Vec<_>>>()?;
        let errors: Vec<f64> = per_trial.into_iter().flatten().collect();
        table.add(
            Method::DnnAs.name(),
            spec.axis.name(),
            value,
            "mse",
            mse(&errors)?,
            errors.len(),
            spec.seed,
        )?;
        all.push(errors);
    }
    Ok(AsRun { table, errors: all })
}
