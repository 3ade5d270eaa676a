use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;

use crate::airlink::generate_pilots;
use crate::array::sector_plan;
use crate::beamform::{
    capon, geb, interference_from_total, sinr, steer_bf, BeamformerKind, InterferenceModel,
};
use crate::ccm::{ccm_default, sample_from_factor, Ccm};
use crate::error::{Error, Result};
use crate::estimators::{
    dnn_aoa_estimate, dnn_as_estimate, estimate_ccm, observe_scenario, power_estimate, SectorModels,
};
use crate::linalg::{CMatrix, CVector};
use crate::neural::Task;
use crate::rng;
use crate::scenario::{linear_to_db, sample_scenario, Scenario, ScenarioConfig};

use super::metrics::{mean, quantile};
use super::spec::ExperimentSpec;
use super::table::MetricsTable;

#[derive(Debug, Clone)]
pub struct SinrRun {
    pub table: MetricsTable,
    /// Per axis value, per-user SINRs in dB keyed by `{pipeline}_{beamformer}`
    /// with pipeline `perfect` or `estimated`.
    pub samples: Vec<BTreeMap<String, Vec<f64>>>,
}

fn total_covariance(ccms: &[Ccm], n0: f64, n: usize) -> CMatrix {
    let mut total = CMatrix::identity(n, n).scale(n0);
    for c in ccms {
        total += c.matrix();
    }
    total
}

fn strongest(taps: &[usize], power: impl Fn(usize) -> f64) -> usize {
    let mut best = taps[0];
    for &t in &taps[1..] {
        if power(t) > power(best) {
            best = t;
        }
    }
    best
}

struct Design<'a> {
    h: &'a CVector,
    served: &'a Ccm,
    theta: f64,
    design: &'a InterferenceModel,
    truth: &'a InterferenceModel,
}

fn evaluate(kind: BeamformerKind, d: &Design, n: usize) -> Result<f64> {
    let w = match kind {
        BeamformerKind::Capon => capon(d.h, d.design)?,
        BeamformerKind::Geb => geb(d.served, d.design)?,
        BeamformerKind::Steer => steer_bf(d.theta, n),
    };
    Ok(linear_to_db(sinr(&w.weights, d.h, d.truth)))
}

fn sinr_trial<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    spec: &ExperimentSpec,
    estimators: Option<(&SectorModels, &SectorModels)>,
    rng: &mut R,
) -> Result<BTreeMap<String, Vec<f64>>> {
    let n = cfg.n_antennas;
    let n0 = cfg.noise_var();
    let scenario: Scenario = sample_scenario(cfg, rng)?;
    let n_taps = scenario.taps.len();
    let truth: Vec<Ccm> = scenario
        .taps
        .iter()
        .map(|t| ccm_default(t.aoa_deg, t.spread_deg, t.snr_linear, n))
        .collect::<Result<_>>()?;
    let total = total_covariance(&truth, n0, n);

    let estimated = match estimators {
        Some((aoa, spread)) => {
            let beams = sector_plan(cfg.beams_per_sector, n)?.all_beams();
            let pilots = generate_pilots(cfg.n_users, cfg.pilot_len, rng)?;
            let obs = observe_scenario(&scenario, &pilots, &beams, rng, false)?;
            let est = obs
                .iter()
                .map(|o| {
                    estimate_ccm(
                        dnn_aoa_estimate(aoa, o)?,
                        dnn_as_estimate(spread, o)?,
                        power_estimate(o, cfg.pilot_len, n)?,
                        n,
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            let ccms: Vec<Ccm> = est.iter().map(|e| e.ccm.clone()).collect();
            let total_hat = total_covariance(&ccms, n0, n);
            Some((est, total_hat))
        }
        None => None,
    };

    let channels: Vec<CVector> = truth
        .iter()
        .map(|c| sample_from_factor(c.factor(), rng))
        .collect();
    let mut out: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for user in 0..cfg.n_users {
        let taps: Vec<usize> = (0..n_taps)
            .filter(|&t| scenario.taps[t].user_index == user)
            .collect();
        if taps.is_empty() {
            continue;
        }
        let s = strongest(&taps, |t| scenario.taps[t].snr_linear);
        let im = interference_from_total(&total, &truth[s], s, n_taps)?;
        let d = Design {
            h: &channels[s],
            served: &truth[s],
            theta: scenario.taps[s].aoa_deg,
            design: &im,
            truth: &im,
        };
        for &kind in &spec.beamformers {
            out.entry(format!("perfect_{}", kind.name()))
                .or_default()
                .push(evaluate(kind, &d, n)?);
        }
        if let Some((est, total_hat)) = &estimated {
            let s = strongest(&taps, |t| est[t].rho_hat);
            let im_true = interference_from_total(&total, &truth[s], s, n_taps)?;
            let im_hat = interference_from_total(total_hat, &est[s].ccm, s, n_taps)?;
            let d = Design {
                h: &channels[s],
                served: &est[s].ccm,
                theta: est[s].theta_hat,
                design: &im_hat,
                truth: &im_true,
            };
            for &kind in &spec.beamformers {
                out.entry(format!("estimated_{}", kind.name()))
                    .or_default()
                    .push(evaluate(kind, &d, n)?);
            }
        }
    }
    Ok(out)
}

/// Per-user SINR of the strongest tap with beamformers designed from true
/// or estimated CCMs, always scored against the true interference. The
/// instantaneous channel of the served tap is known in both pipelines.
pub fn run_sinr_cdf(
    spec: &ExperimentSpec,
    estimators: Option<(&SectorModels, &SectorModels)>,
) -> Result<SinrRun> {
    spec.validate()?;
    if spec.beamformers.is_empty() {
        return Err(Error::config(
            "beamformers",
            "at least one beamformer is required",
        ));
    }
    if let Some((aoa, spread)) = estimators {
        if aoa.task != Task::Aoa || spread.task != Task::As {
            return Err(Error::InvalidArgument(
                "expected AoA and spread model bundles".into(),
            ));
        }
        if !aoa.is_complete() || !spread.is_complete() {
            return Err(Error::InvalidArgument("model bundle is incomplete".into()));
        }
    }
    let mut table = MetricsTable::new();
    let mut samples = Vec::with_capacity(spec.axis_values.len());
    for (ai, &value) in spec.axis_values.iter().enumerate() {
        let cfg = spec.config_at(ai)?;
        let trials = (0..spec.n_trials)
            .into_par_iter()
            .map(|t| {
                let mut r = rng::stream(spec.seed, &[rng::tag::BEAMFORM, ai as u64, t as u64]);
                sinr_trial(&cfg, spec, estimators, &mut r)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut pooled: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for t in trials {
            for (k, v) in t {
                pooled.entry(k).or_default().extend(v);
            }
        }
        for (label, v) in &pooled {
            let axis = spec.axis.name();
            table.add(
                label,
                axis,
                value,
                "median_sinr_db",
                quantile(v, 0.5)?,
                v.len(),
                spec.seed,
            )?;
            table.add(
                label,
                axis,
                value,
                "mean_sinr_db",
                mean(v)?,
                v.len(),
                spec.seed,
            )?;
            table.add(
                label,
                axis,
                value,
                "p10_sinr_db",
                quantile(v, 0.1)?,
                v.len(),
                spec.seed,
            )?;
        }
        samples.push(pooled);
    }
    Ok(SinrRun { table, samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_pipeline_shapes() {
        let spec = ExperimentSpec {
            base: ScenarioConfig {
                n_antennas: 32,
                n_users: 4,
                ..Default::default()
            },
            axis_values: vec![20.0],
            n_trials: 3,
            ..Default::default()
        };
        let run = run_sinr_cdf(&spec, None).unwrap();
        let s = &run.samples[0];
        assert_eq!(s.len(), 3);
        for v in s.values() {
            assert_eq!(v.len(), 12);
            assert!(v.iter().all(|x| x.is_finite()));
        }
        for ((c, g), st) in s["perfect_capon"]
            .iter()
            .zip(&s["perfect_geb"])
            .zip(&s["perfect_steer"])
        {
            assert!(c + 1e-9 >= *g && c + 1e-9 >= *st);
        }
        assert_eq!(run.table.len(), 9);
        assert_eq!(run_sinr_cdf(&spec, None).unwrap().table, run.table);
    }
}
