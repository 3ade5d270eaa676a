//! Estimation of the per-tap CCM parameters from beamspace observations,
//! plus the full-array and hybrid MUSIC / MaxBeam baselines.

mod baselines;
mod dnn;
mod features;
mod flops;
mod models;
mod observe;
mod power;

pub use baselines::{
    maxbeam, maxbeam_hbf, music, music_hbf, music_reference, reconstruct_snapshots,
};
pub use dnn::{
    decode_aoa, decode_as, dnn_aoa_estimate, dnn_aoa_per_realization, dnn_as_estimate, median,
};
pub use features::{aoa_dnn_input, as_dnn_input, as_window, select_as_beams, AoaInput};
pub use flops::{FlopLedger, FlopParams, Method};
pub use models::{ModelManifest, SectorEntry, SectorModels};
pub use observe::{
    build_aoa_dataset, build_as_dataset, build_training_sets, observe_scenario,
    observe_scenario_marginal, sector_reachable, tap_factors, DatasetRequest, TapObservation,
};
pub use power::{estimate_ccm, power_estimate, CcmEstimate};
