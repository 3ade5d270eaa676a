use crate::array::sector_bounds;
use crate::error::{Error, Result};
use crate::neural::Task;

use super::features::aoa_input_with;
use super::{as_dnn_input, SectorModels, TapObservation};

/// Median; the mean of the two middle values for an even count.
pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("median input"));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Ok(if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    })
}

/// Maps a network output in `[0, 1]` to an angle inside the sector.
pub fn decode_aoa(sector: usize, output: f64) -> f64 {
    let (lo, hi) = sector_bounds(sector);
    lo + (hi - lo) * output
}

pub fn decode_as(sigma_min: f64, sigma_max: f64, output: f64) -> f64 {
    (sigma_min + (sigma_max - sigma_min) * output).clamp(sigma_min, sigma_max)
}

fn check_task(models: &SectorModels, task: Task) -> Result<()> {
    if models.task != task {
        return Err(Error::InvalidArgument(format!(
            "expected {} models, got {}",
            task.name(),
            models.task.name()
        )));
    }
    Ok(())
}

/// Unclamped per-realization AoA estimates in degrees.
pub fn dnn_aoa_per_realization(models: &SectorModels, obs: &TapObservation) -> Result<Vec<f64>> {
    check_task(models, Task::Aoa)?;
    let net = models.net(obs.sector_id)?;
    obs.beamspace
        .iter()
        .map(|b| {
            let x = aoa_input_with(b, models.aoa_input);
            Ok(decode_aoa(obs.sector_id, net.predict(&x)?[0]))
        })
        .collect()
}

/// Median of the per-realization estimates, clamped to the sector.
pub fn dnn_aoa_estimate(models: &SectorModels, obs: &TapObservation) -> Result<f64> {
    let per = dnn_aoa_per_realization(models, obs)?;
    let (lo, hi) = sector_bounds(obs.sector_id);
    Ok(median(&per)?.clamp(lo, hi))
}

pub fn dnn_as_estimate(models: &SectorModels, obs: &TapObservation) -> Result<f64> {
    check_task(models, Task::As)?;
    let net = models.net(obs.sector_id)?;
    let x = as_dnn_input(obs, models.as_beam_count())?;
    let (lo, hi) = models.sigma_range;
    Ok(decode_as(lo, hi, net.predict(&x)?[0]))
}
