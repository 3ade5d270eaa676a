//! Monte Carlo experiments: AoA and spread error sweeps, error histograms,
//! SINR distributions, model training, and result files.

mod aoa;
mod metrics;
mod sinr;
mod spec;
mod spread;
mod table;
mod train;

pub use aoa::{aoa_trial, run_aoa_sweep, run_error_hist, AoaRun, Grids};
pub use metrics::{
    empirical_cdf, histogram, kurtosis, mean, mse, mse_standard_error, p_out, quantile,
    standard_error, Histogram, P_OUT_HALF_BW_DEG,
};
pub use sinr::{run_sinr_cdf, SinrRun};
pub use spec::{DbfGrid, ExperimentSpec, SweepAxis};
pub use spread::{run_as_sweep, AsRun};
pub use table::{
    manifest_path, read_manifest, read_results, write_results, MetricRow, MetricsTable,
    RunManifest, CSV_HEADER,
};
pub use train::{
    build_datasets, read_dataset, train_models, train_sector_models, write_dataset, TrainedModels,
    TrainingPlan,
};
