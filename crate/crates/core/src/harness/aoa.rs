use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;

use crate::airlink::generate_pilots;
use crate::array::{
    sector_plan, BeamMatrix, SectorPlan, SteeringGrid, SECTOR_HIGH_DEG, SECTOR_LOW_DEG,
};
use crate::error::{Error, Result};
use crate::estimators::{
    dnn_aoa_estimate, maxbeam, maxbeam_hbf, music, music_hbf, observe_scenario, FlopLedger,
    FlopParams, Method, SectorModels, TapObservation,
};
use crate::neural::Task;
use crate::rng;
use crate::scenario::{sample_scenario, ScenarioConfig};

use super::metrics::{histogram, mse, p_out, Histogram, P_OUT_HALF_BW_DEG};
use super::spec::{DbfGrid, ExperimentSpec};
use super::table::MetricsTable;

/// Search grids: one per sector, and one over the whole coverage used by
/// the digital baselines when `dbf` is [`DbfGrid::Full`].
#[derive(Debug, Clone)]
pub struct Grids {
    pub sectors: Vec<SteeringGrid>,
    pub full: SteeringGrid,
    pub dbf: DbfGrid,
}

impl Grids {
    pub fn new(plan: &SectorPlan, step_deg: f64, dbf: DbfGrid) -> Result<Self> {
        let n = plan.n_antennas;
        let sectors = plan
            .sector_bounds
            .iter()
            .map(|&(lo, hi)| SteeringGrid::uniform(lo, hi, step_deg, n))
            .collect::<Result<Vec<_>>>()?;
        let full = SteeringGrid::uniform(SECTOR_LOW_DEG, SECTOR_HIGH_DEG, step_deg, n)?;
        Ok(Self { sectors, full, dbf })
    }

    /// Grid searched by `method` for a tap in `sector`.
    pub fn for_method(&self, method: Method, sector: usize) -> &SteeringGrid {
        match (method, self.dbf) {
            (Method::MusicDbf | Method::MaxbeamDbf, DbfGrid::Full) => &self.full,
            _ => &self.sectors[sector],
        }
    }
}

fn flop_params(cfg: &ScenarioConfig, n_grid: usize, dnn_nodes: usize) -> FlopParams {
    FlopParams {
        n: cfg.n_antennas,
        n_sec: cfg.beams_per_sector,
        t_r: cfg.n_realizations,
        n_grid,
        dnn_nodes,
    }
}

fn estimate(
    method: Method,
    obs: &TapObservation,
    beams: &[BeamMatrix],
    grids: &Grids,
    models: Option<&SectorModels>,
) -> Result<f64> {
    let s = obs.sector_id;
    let full = || {
        obs.full
            .as_deref()
            .ok_or(Error::Empty("full-array snapshots"))
    };
    match method {
        Method::Dnn => dnn_aoa_estimate(models.ok_or(Error::MissingNetwork(s))?, obs),
        Method::MusicDbf => Ok(music(full()?, grids.for_method(method, s), 1)?[0]),
        Method::MaxbeamDbf => maxbeam(full()?, grids.for_method(method, s)),
        Method::MusicHbf => music_hbf(obs, &beams[s], grids.for_method(method, s)),
        Method::MaxbeamHbf => maxbeam_hbf(obs, &beams[s], grids.for_method(method, s)),
        Method::DnnAs => Err(Error::InvalidArgument("dnn_as is not an AoA method".into())),
    }
}

/// One scenario drop: signed errors `θ̂ − θ` per method over all taps, and
/// the flops spent.
pub fn aoa_trial<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    plan: &SectorPlan,
    grids: &Grids,
    methods: &[Method],
    models: Option<&SectorModels>,
    rng: &mut R,
) -> Result<(BTreeMap<Method, Vec<f64>>, FlopLedger)> {
    let beams = plan.all_beams();
    let scenario = sample_scenario(cfg, rng)?;
    let pilots = generate_pilots(cfg.n_users, cfg.pilot_len, rng)?;
    let keep_full = methods.iter().any(|m| !m.is_hybrid());
    let obs = observe_scenario(&scenario, &pilots, &beams, rng, keep_full)?;
    let mut errors: BTreeMap<Method, Vec<f64>> = BTreeMap::new();
    let mut ledger = FlopLedger::new();
    for (o, tap) in obs.iter().zip(&scenario.taps) {
        for &m in methods {
            let e = estimate(m, o, &beams, grids, models)? - tap.aoa_deg;
            errors.entry(m).or_default().push(e);
            let (n_grid, nodes) = match m {
                Method::Dnn => (0, models.map_or(Ok(0), |md| md.forward_macs(o.sector_id))?),
                _ => (grids.for_method(m, o.sector_id).len(), 0),
            };
            ledger.record(m, &flop_params(cfg, n_grid, nodes));
        }
    }
    Ok((errors, ledger))
}

/// Raw results of an AoA sweep; index `i` belongs to `spec.axis_values[i]`.
#[derive(Debug, Clone)]
pub struct AoaRun {
    pub table: MetricsTable,
    pub errors: Vec<BTreeMap<Method, Vec<f64>>>,
    pub flops: Vec<FlopLedger>,
}

fn check_models(spec: &ExperimentSpec, models: Option<&SectorModels>) -> Result<()> {
    if !spec.methods.contains(&Method::Dnn) {
        return Ok(());
    }
    let m = models
        .ok_or_else(|| Error::InvalidArgument("the dnn method needs trained AoA models".into()))?;
    if m.task != Task::Aoa {
        return Err(Error::InvalidArgument(
            "the dnn method needs AoA models".into(),
        ));
    }
    if m.beams_per_sector != spec.base.beams_per_sector {
        return Err(Error::dim(format!(
            "models use {} beams per sector, the experiment {}",
            m.beams_per_sector, spec.base.beams_per_sector
        )));
    }
    if !m.is_complete() {
        return Err(Error::InvalidArgument(
            "AoA model bundle is incomplete".into(),
        ));
    }
    Ok(())
}

/// Runs every method on `n_trials` drops per axis value and tabulates MSE
/// and outage probability. Trials run in parallel on independent streams.
pub fn run_aoa_sweep(spec: &ExperimentSpec, models: Option<&SectorModels>) -> Result<AoaRun> {
    spec.validate()?;
    if spec.methods.contains(&Method::DnnAs) {
        return Err(Error::InvalidArgument("dnn_as is not an AoA method".into()));
    }
    check_models(spec, models)?;
    let mut run = AoaRun {
        table: MetricsTable::new(),
        errors: Vec::new(),
        flops: Vec::new(),
    };
    for (ai, &value) in spec.axis_values.iter().enumerate() {
        let cfg = spec.config_at(ai)?;
        let plan = sector_plan(cfg.beams_per_sector, cfg.n_antennas)?;
        let grids = Grids::new(&plan, spec.grid_step_deg, spec.dbf_grid)?;
        let trials = (0..spec.n_trials)
            .into_par_iter()
            .map(|t| {
                let mut r = rng::stream(spec.seed, &[rng::tag::TRIAL, ai as u64, t as u64]);
                aoa_trial(&cfg, &plan, &grids, &spec.methods, models, &mut r)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut errors: BTreeMap<Method, Vec<f64>> = BTreeMap::new();
        let mut ledger = FlopLedger::new();
        for (e, l) in trials {
            for (m, v) in e {
                errors.entry(m).or_default().extend(v);
            }
            ledger.merge(&l);
        }
        for &m in &spec.methods {
            let e = errors.entry(m).or_default();
            let axis = spec.axis.name();
            run.table
                .add(m.name(), axis, value, "mse", mse(e)?, e.len(), spec.seed)?;
            run.table.add(
                m.name(),
                axis,
                value,
                "p_out",
                p_out(e, P_OUT_HALF_BW_DEG)?,
                e.len(),
                spec.seed,
            )?;
        }
        run.errors.push(errors);
        run.flops.push(ledger);
    }
    Ok(run)
}

/// Signed-error histograms over `[lo, hi]`, pooling every axis value.
pub fn run_error_hist(
    spec: &ExperimentSpec,
    models: Option<&SectorModels>,
    lo: f64,
    hi: f64,
    bins: usize,
) -> Result<BTreeMap<Method, Histogram>> {
    let run = run_aoa_sweep(spec, models)?;
    let mut pooled: BTreeMap<Method, Vec<f64>> = BTreeMap::new();
    for per_axis in run.errors {
        for (m, e) in per_axis {
            pooled.entry(m).or_default().extend(e);
        }
    }
    pooled
        .into_iter()
        .map(|(m, e)| Ok((m, histogram(&e, lo, hi, bins)?)))
        .collect()
}
