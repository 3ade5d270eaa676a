//! `ccmlab` command-line driver.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use ccmlab::estimators::{FlopParams, Method, SectorModels};
use ccmlab::harness::{
    build_datasets, empirical_cdf, histogram, read_results, run_aoa_sweep, run_as_sweep,
    run_sinr_cdf, train_models, write_dataset, write_results, ExperimentSpec, MetricsTable,
    RunManifest, TrainingPlan,
};
use ccmlab::scenario::Scenario;

#[derive(Parser, Debug)]
#[command(
    name = "ccmlab",
    version,
    about = "Parametric channel covariance estimation experiments"
)]
struct Cli {
    /// JSON run configuration with optional `experiment` and `training` sections.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Model bundle directory (holds `aoa/` and `as/`).
    #[arg(long, global = true)]
    models: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo drops per axis value.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample one scenario and print it as JSON.
    Scenario,
    /// Simulate labeled AoA and spread training sets.
    BuildData,
    /// Simulate data and fit the per-sector networks.
    Train,
    /// AoA MSE and outage sweep with error histograms.
    EvalAoa {
        /// Histogram bins over [-5, 5] degrees.
        #[arg(long, default_value_t = 40)]
        bins: usize,
    },
    /// Spread-network MSE sweep.
    EvalAs,
    /// Per-user SINR distributions.
    SinrCdf,
    /// Nominal flops per estimate, with counts taken from a short sweep.
    BenchFlops,
    /// Re-export a result file as tidy CSV, optionally filtered.
    PlotData {
        input: PathBuf,
        #[arg(long)]
        metric: Option<String>,
        #[arg(long)]
        method: Option<String>,
    },
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RunConfig {
    experiment: ExperimentSpec,
    training: TrainingPlan,
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.experiment.seed = seed;
        cfg.experiment.base.seed = seed;
        cfg.training.seed = seed;
    }
    if let Some(t) = cli.trials {
        cfg.experiment.n_trials = t;
    }
    cfg.experiment.validate()?;
    Ok(cfg)
}

fn out_dir(cli: &Cli) -> Result<PathBuf> {
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("results"));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn load_models(cli: &Cli, sub: &str) -> Result<Option<SectorModels>> {
    match &cli.models {
        Some(dir) => {
            let p = dir.join(sub);
            Ok(Some(SectorModels::load(&p).with_context(|| {
                format!("loading models from {}", p.display())
            })?))
        }
        None => Ok(None),
    }
}

fn save(table: &MetricsTable, path: &Path, command: &str, cfg: &RunConfig) -> Result<()> {
    let manifest = RunManifest::new(command, cfg.experiment.seed, &cfg.experiment)?;
    write_results(table, path, &manifest).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn eval_aoa(cli: &Cli, cfg: &RunConfig, bins: usize) -> Result<()> {
    let models = load_models(cli, "aoa")?;
    if cfg.experiment.methods.contains(&Method::Dnn) && models.is_none() {
        bail!("the dnn method needs --models");
    }
    let run = run_aoa_sweep(&cfg.experiment, models.as_ref())?;
    let dir = out_dir(cli)?;
    save(&run.table, &dir.join("aoa.csv"), "eval-aoa", cfg)?;
    let mut hist = MetricsTable::new();
    let mut raw = MetricsTable::new();
    let seed = cfg.experiment.seed;
    for (i, per) in run.errors.iter().enumerate() {
        let v = cfg.experiment.axis_values[i];
        for (m, e) in per {
            let h = histogram(e, -5.0, 5.0, bins)?;
            let label = format!("{}@{v}", m.name());
            for (c, mass) in h.centers().iter().zip(&h.mass) {
                hist.add(&label, "error_deg", *c, "mass", *mass, h.inside, seed)?;
            }
            hist.add(
                &label,
                "error_deg",
                0.0,
                "outside_fraction",
                h.outside as f64 / e.len() as f64,
                e.len(),
                seed,
            )?;
            for (k, x) in e.iter().enumerate() {
                raw.add(
                    m.name(),
                    cfg.experiment.axis.name(),
                    v,
                    "error_deg",
                    *x,
                    k,
                    seed,
                )?;
            }
        }
    }
    save(&hist, &dir.join("aoa_hist.csv"), "eval-aoa", cfg)?;
    save(&raw, &dir.join("aoa_errors.csv"), "eval-aoa", cfg)?;
    for row in run.table.rows() {
        println!(
            "{:12} {:>8} {:6} {:.5}",
            row.method, row.axis_value, row.metric, row.value
        );
    }
    Ok(())
}

fn sinr_cdf(cli: &Cli, cfg: &RunConfig) -> Result<()> {
    let aoa = load_models(cli, "aoa")?;
    let spread = load_models(cli, "as")?;
    let est = match (&aoa, &spread) {
        (Some(a), Some(s)) => Some((a, s)),
        _ => None,
    };
    let run = run_sinr_cdf(&cfg.experiment, est)?;
    let dir = out_dir(cli)?;
    save(&run.table, &dir.join("sinr.csv"), "sinr-cdf", cfg)?;
    let mut cdf = MetricsTable::new();
    for (i, per) in run.samples.iter().enumerate() {
        let v = cfg.experiment.axis_values[i];
        for (label, s) in per {
            for (x, f) in empirical_cdf(s)? {
                cdf.add(
                    &format!("{label}@{v}"),
                    "sinr_db",
                    x,
                    "cdf",
                    f,
                    s.len(),
                    cfg.experiment.seed,
                )?;
            }
        }
    }
    save(&cdf, &dir.join("sinr_cdf.csv"), "sinr-cdf", cfg)?;
    for row in run
        .table
        .rows()
        .iter()
        .filter(|r| r.metric == "median_sinr_db")
    {
        println!(
            "{:18} {:>8} median {:.2} dB",
            row.method, row.axis_value, row.value
        );
    }
    Ok(())
}

fn bench_flops(cli: &Cli, cfg: &RunConfig) -> Result<()> {
    let models = load_models(cli, "aoa")?;
    let mut spec = cfg.experiment.clone();
    if models.is_none() {
        spec.methods.retain(|m| *m != Method::Dnn);
    }
    if cli.trials.is_none() {
        spec.n_trials = 2;
    }
    let run = run_aoa_sweep(&spec, models.as_ref())?;
    let mut table = MetricsTable::new();
    for (i, ledger) in run.flops.iter().enumerate() {
        let cfg_i = spec.config_at(i)?;
        let v = spec.axis_values[i];
        for m in ledger.methods() {
            let per = ledger.per_call(m).unwrap_or(0.0);
            table.add(
                m.name(),
                spec.axis.name(),
                v,
                "flops_per_estimate",
                per,
                ledger.calls(m) as usize,
                spec.seed,
            )?;
            println!("{:12} {:>8} {:>14.0} flops/estimate", m.name(), v, per);
        }
        if models.is_none() {
            let nodes =
                ccmlab::neural::architectures(cfg_i.beams_per_sector, ccmlab::neural::Task::Aoa)?
                    [0]
                .windows(2)
                .map(|w| w[0] * w[1])
                .sum();
            let p = FlopParams {
                n: cfg_i.n_antennas,
                n_sec: cfg_i.beams_per_sector,
                t_r: cfg_i.n_realizations,
                n_grid: 0,
                dnn_nodes: nodes,
            };
            let f = Method::Dnn.nominal_flops(&p) as f64;
            table.add(
                Method::Dnn.name(),
                spec.axis.name(),
                v,
                "flops_per_estimate",
                f,
                0,
                spec.seed,
            )?;
            println!(
                "{:12} {:>8} {:>14.0} flops/estimate (untrained architecture)",
                "dnn", v, f
            );
        }
    }
    save(&table, &out_dir(cli)?.join("flops.csv"), "bench-flops", cfg)
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Scenario => {
            let scenario = Scenario::sample_seeded(&cfg.experiment.base)?;
            let text = serde_json::to_string_pretty(&scenario)?;
            match &cli.out {
                Some(_) => {
                    let p = out_dir(cli)?.join("scenario.json");
                    fs::write(&p, text)?;
                    println!("wrote {}", p.display());
                }
                None => println!("{text}"),
            }
        }
        Command::BuildData => {
            let (aoa, spread) = build_datasets(&cfg.experiment.base, &cfg.training)?;
            let dir = out_dir(cli)?;
            for (s, (a, b)) in aoa.iter().zip(&spread).enumerate() {
                if !a.is_empty() {
                    write_dataset(a, &dir.join(format!("aoa_sector{}.csv", s + 1)))?;
                }
                if !b.is_empty() {
                    write_dataset(b, &dir.join(format!("as_sector{}.csv", s + 1)))?;
                }
                println!(
                    "sector {}: {} aoa, {} spread samples",
                    s + 1,
                    a.len(),
                    b.len()
                );
            }
        }
        Command::Train => {
            let dir = cli
                .models
                .clone()
                .or_else(|| cli.out.clone())
                .unwrap_or_else(|| PathBuf::from("models"));
            let m = train_models(&cfg.experiment.base, &cfg.training)?;
            m.aoa.save(&dir.join("aoa"))?;
            m.spread.save(&dir.join("as"))?;
            for s in 0..ccmlab::array::SECTOR_COUNT {
                let a = m.aoa.report(s).map(|r| r.best_validation_mse);
                let b = m.spread.report(s).map(|r| r.best_validation_mse);
                println!("sector {}: aoa val mse {a:?}, spread val mse {b:?}", s + 1);
            }
            println!("wrote {}", dir.display());
        }
        Command::EvalAoa { bins } => eval_aoa(cli, &cfg, *bins)?,
        Command::EvalAs => {
            let Some(models) = load_models(cli, "as")? else {
                bail!("eval-as needs --models");
            };
            let run = run_as_sweep(&cfg.experiment, &models)?;
            save(&run.table, &out_dir(cli)?.join("as.csv"), "eval-as", &cfg)?;
            for row in run.table.rows() {
                println!("{:>8} mse {:.5}", row.axis_value, row.value);
            }
        }
        Command::SinrCdf => sinr_cdf(cli, &cfg)?,
        Command::BenchFlops => bench_flops(cli, &cfg)?,
        Command::PlotData {
            input,
            metric,
            method,
        } => {
            let table =
                read_results(input).with_context(|| format!("reading {}", input.display()))?;
            if table.is_empty() {
                bail!("{} has no rows", input.display());
            }
            let mut out = MetricsTable::new();
            for r in table.rows() {
                if metric.as_ref().is_some_and(|m| *m != r.metric)
                    || method.as_ref().is_some_and(|m| *m != r.method)
                {
                    continue;
                }
                out.push(r.clone())?;
            }
            let name = input.file_stem().and_then(|s| s.to_str()).unwrap_or("data");
            let manifest = RunManifest::new(
                "plot-data",
                table.rows()[0].seed,
                &serde_json::json!({ "input": input }),
            )?;
            let p = out_dir(cli)?.join(format!("{name}_tidy.csv"));
            write_results(&out, &p, &manifest)?;
            println!("wrote {} ({} rows)", p.display(), out.len());
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
