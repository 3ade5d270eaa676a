use nalgebra::DMatrix;
use rand::Rng;

use crate::airlink::{
    generate_pilots, matched_filter, matched_filter_marginal, synthesize_rx, tap_correlations,
    PilotBook,
};
use crate::array::{project, sector_bounds, sector_plan, BeamMatrix, SECTOR_COUNT};
use crate::ccm::{
    default_quad_nodes, quadrature_factor, sample_from_factor, CcmParams, Normalization,
};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};
use crate::neural::{as_beam_count, LabeledSet};
use crate::scenario::{sample_scenario, Scenario, ScenarioConfig};

use super::features::aoa_input_with;
use super::{as_dnn_input, AoaInput};

/// Everything the estimators see of one tap across `T_r` realizations.
#[derive(Debug, Clone, PartialEq)]
pub struct TapObservation {
    /// Per realization, `b = U^H y` with `y` the matched-filter output.
    pub beamspace: Vec<CVector>,
    /// Per realization, the full-array channel estimate `ĥ = y/√T`.
    pub full: Option<Vec<CVector>>,
    pub sector_id: usize,
    pub true_params: Option<CcmParams>,
}

impl TapObservation {
    pub fn realizations(&self) -> usize {
        self.beamspace.len()
    }
}

/// Exact covariance factors of every tap of a scenario.
pub fn tap_factors(scenario: &Scenario) -> Result<Vec<CMatrix>> {
    let n = scenario.config.n_antennas;
    scenario
        .taps
        .iter()
        .map(|t| {
            quadrature_factor(
                t.aoa_deg,
                t.spread_deg,
                t.snr_linear,
                n,
                default_quad_nodes(n, t.spread_deg),
                Normalization::PerAntenna,
            )
        })
        .collect()
}

fn params_of(scenario: &Scenario) -> Vec<CcmParams> {
    scenario
        .taps
        .iter()
        .map(|t| CcmParams {
            theta_deg: t.aoa_deg,
            sigma_deg: t.spread_deg,
            rho: t.snr_linear,
        })
        .collect()
}

fn check_beams(scenario: &Scenario, beams: &[BeamMatrix]) -> Result<()> {
    if beams.len() != SECTOR_COUNT {
        return Err(Error::dim(format!(
            "{} beam sets for {SECTOR_COUNT} sectors",
            beams.len()
        )));
    }
    if beams
        .iter()
        .any(|b| b.n_antennas() != scenario.config.n_antennas)
    {
        return Err(Error::dim("beam sets do not match the array size"));
    }
    Ok(())
}

fn empty_observations(scenario: &Scenario, keep_full: bool) -> Vec<TapObservation> {
    let tr = scenario.config.n_realizations;
    params_of(scenario)
        .into_iter()
        .zip(&scenario.taps)
        .map(|(p, t)| TapObservation {
            beamspace: Vec::with_capacity(tr),
            full: keep_full.then(|| Vec::with_capacity(tr)),
            sector_id: t.sector_id,
            true_params: Some(p),
        })
        .collect()
}

fn push(obs: &mut TapObservation, y: CVector, beams: &BeamMatrix, sqrt_t: f64) -> Result<()> {
    obs.beamspace.push(project(&y, beams)?);
    if let Some(full) = obs.full.as_mut() {
        full.push(y.unscale(sqrt_t));
    }
    Ok(())
}

/// Runs `T_r` realizations of the uplink for a scenario: fresh channels and
/// noise each time, a synthesized `N × T` block, then one matched filter and
/// beamspace projection per tap. `beams[s]` are the beams of sector `s`.
pub fn observe_scenario<R: Rng + ?Sized>(
    scenario: &Scenario,
    pilots: &PilotBook,
    beams: &[BeamMatrix],
    rng: &mut R,
    keep_full: bool,
) -> Result<Vec<TapObservation>> {
    check_beams(scenario, beams)?;
    let cfg = &scenario.config;
    let factors = tap_factors(scenario)?;
    let sqrt_t = (pilots.len() as f64).sqrt();
    let mut out = empty_observations(scenario, keep_full);
    for r in 0..cfg.n_realizations {
        let channels: Vec<CVector> = factors.iter().map(|f| sample_from_factor(f, rng)).collect();
        let block = synthesize_rx(scenario, &channels, pilots, cfg.noise_var(), rng, r)?;
        for (obs, tap) in out.iter_mut().zip(&scenario.taps) {
            let y = matched_filter(&block.y, pilots.pilot(tap.user_index), tap.delay_taps)?;
            push(obs, y, &beams[tap.sector_id], sqrt_t)?;
        }
    }
    Ok(out)
}

/// Like [`observe_scenario`] but matched-filter outputs come from the pilot
/// correlations with independent per-tap noise, skipping the `N × T` block.
pub fn observe_scenario_marginal<R: Rng + ?Sized>(
    scenario: &Scenario,
    pilots: &PilotBook,
    beams: &[BeamMatrix],
    rng: &mut R,
    keep_full: bool,
) -> Result<Vec<TapObservation>> {
    check_beams(scenario, beams)?;
    let cfg = &scenario.config;
    let factors = tap_factors(scenario)?;
    let corr = tap_correlations(scenario, pilots);
    let sqrt_t = (pilots.len() as f64).sqrt();
    let mut out = empty_observations(scenario, keep_full);
    for _ in 0..cfg.n_realizations {
        let channels: Vec<CVector> = factors.iter().map(|f| sample_from_factor(f, rng)).collect();
        let ys = matched_filter_marginal(&channels, &corr, cfg.noise_var(), pilots.len(), rng)?;
        for ((obs, tap), y) in out.iter_mut().zip(&scenario.taps).zip(ys) {
            push(obs, y, &beams[tap.sector_id], sqrt_t)?;
        }
    }
    Ok(out)
}

/// Samples requested per sector; zero skips a task.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DatasetRequest {
    /// AoA samples; each realization of a tap is one sample.
    pub aoa_per_sector: usize,
    /// Spread samples; each tap is one sample.
    pub as_per_sector: usize,
    pub aoa_input: AoaInput,
}

struct Rows {
    x: Vec<f64>,
    y: Vec<f64>,
    n_in: usize,
}

impl Rows {
    fn new(n_in: usize) -> Self {
        Self {
            x: Vec::new(),
            y: Vec::new(),
            n_in,
        }
    }

    fn len(&self) -> usize {
        self.y.len()
    }

    fn into_set(self) -> Result<LabeledSet> {
        let m = self.y.len();
        LabeledSet::new(
            DMatrix::from_vec(self.n_in, m, self.x),
            DMatrix::from_vec(1, m, self.y),
        )
    }
}

/// Whether taps drawn from `cfg` can land in `sector`.
pub fn sector_reachable(cfg: &ScenarioConfig, sector: usize) -> bool {
    let (lo, hi) = sector_bounds(sector);
    cfg.theta_max > lo && cfg.theta_min < hi
}

/// Simulates scenarios drawn from `cfg` until every sector holds the
/// requested number of AoA and spread samples; sectors outside the angle
/// range stay empty. Returns one set per sector
/// for each task. AoA targets are the in-sector offset `(θ − lo)/width`;
/// spread targets are `(σ − σ_min)/(σ_max − σ_min)`.
pub fn build_training_sets<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    request: &DatasetRequest,
    rng: &mut R,
) -> Result<(Vec<LabeledSet>, Vec<LabeledSet>)> {
    cfg.validate()?;
    let plan = sector_plan(cfg.beams_per_sector, cfg.n_antennas)?;
    let beams = plan.all_beams();
    let n2 = as_beam_count(cfg.beams_per_sector)?;
    if request.as_per_sector > 0 && cfg.n_realizations < 2 {
        return Err(Error::config(
            "n_realizations",
            "spread features need at least 2 realizations",
        ));
    }
    let sigma_width = cfg.sigma_max - cfg.sigma_min;
    let mut aoa: Vec<Rows> = (0..SECTOR_COUNT)
        .map(|_| Rows::new(cfg.beams_per_sector))
        .collect();
    let mut spread: Vec<Rows> = (0..SECTOR_COUNT).map(|_| Rows::new(2 * n2)).collect();
    let active: Vec<bool> = (0..SECTOR_COUNT)
        .map(|s| sector_reachable(cfg, s))
        .collect();
    let done = |aoa: &[Rows], spread: &[Rows]| {
        (0..SECTOR_COUNT).all(|s| {
            !active[s]
                || (aoa[s].len() >= request.aoa_per_sector
                    && spread[s].len() >= request.as_per_sector)
        })
    };
    while !done(&aoa, &spread) {
        let scenario = sample_scenario(cfg, rng)?;
        let pilots = generate_pilots(cfg.n_users, cfg.pilot_len, rng)?;
        let obs = observe_scenario_marginal(&scenario, &pilots, &beams, rng, false)?;
        for (o, tap) in obs.iter().zip(&scenario.taps) {
            let s = tap.sector_id;
            let rows = &mut aoa[s];
            if rows.len() < request.aoa_per_sector {
                let (lo, hi) = sector_bounds(s);
                let target = (tap.aoa_deg - lo) / (hi - lo);
                for b in &o.beamspace {
                    if rows.len() == request.aoa_per_sector {
                        break;
                    }
                    rows.x.extend(aoa_input_with(b, request.aoa_input));
                    rows.y.push(target);
                }
            }
            let rows = &mut spread[s];
            if rows.len() < request.as_per_sector {
                rows.x.extend(as_dnn_input(o, n2)?);
                rows.y.push(if sigma_width > 0.0 {
                    (tap.spread_deg - cfg.sigma_min) / sigma_width
                } else {
                    0.0
                });
            }
        }
    }
    let a = aoa
        .into_iter()
        .map(Rows::into_set)
        .collect::<Result<Vec<_>>>()?;
    let b = spread
        .into_iter()
        .map(Rows::into_set)
        .collect::<Result<Vec<_>>>()?;
    Ok((a, b))
}

fn single_sector(
    cfg: &ScenarioConfig,
    sector: usize,
    n_samples: usize,
    aoa: bool,
    rng: &mut (impl Rng + ?Sized),
) -> Result<LabeledSet> {
    if sector >= SECTOR_COUNT {
        return Err(Error::IndexOutOfRange {
            index: sector,
            len: SECTOR_COUNT,
        });
    }
    let (lo, hi) = sector_bounds(sector);
    if !sector_reachable(cfg, sector) {
        return Err(Error::InvalidArgument(format!(
            "sector {sector} lies outside the configured angle range"
        )));
    }
    let beams = sector_plan(cfg.beams_per_sector, cfg.n_antennas)?.all_beams();
    let n2 = as_beam_count(cfg.beams_per_sector)?;
    let sigma_width = cfg.sigma_max - cfg.sigma_min;
    let mut rows = Rows::new(if aoa { cfg.beams_per_sector } else { 2 * n2 });
    while rows.len() < n_samples {
        let scenario = sample_scenario(cfg, rng)?;
        let pilots = generate_pilots(cfg.n_users, cfg.pilot_len, rng)?;
        let obs = observe_scenario_marginal(&scenario, &pilots, &beams, rng, false)?;
        for (o, tap) in obs.iter().zip(&scenario.taps) {
            if tap.sector_id != sector {
                continue;
            }
            if aoa {
                for b in &o.beamspace {
                    if rows.len() == n_samples {
                        break;
                    }
                    rows.x.extend(aoa_input_with(b, AoaInput::Normalized));
                    rows.y.push((tap.aoa_deg - lo) / (hi - lo));
                }
            } else if rows.len() < n_samples {
                rows.x.extend(as_dnn_input(o, n2)?);
                rows.y.push(if sigma_width > 0.0 {
                    (tap.spread_deg - cfg.sigma_min) / sigma_width
                } else {
                    0.0
                });
            }
        }
    }
    rows.into_set()
}

/// AoA training set for one sector.
pub fn build_aoa_dataset<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    sector: usize,
    n_samples: usize,
    rng: &mut R,
) -> Result<LabeledSet> {
    cfg.validate()?;
    single_sector(cfg, sector, n_samples, true, rng)
}

/// Spread training set for one sector.
pub fn build_as_dataset<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    sector: usize,
    n_samples: usize,
    rng: &mut R,
) -> Result<LabeledSet> {
    cfg.validate()?;
    if cfg.n_realizations < 2 {
        return Err(Error::config(
            "n_realizations",
            "spread features need at least 2 realizations",
        ));
    }
    single_sector(cfg, sector, n_samples, false, rng)
}
