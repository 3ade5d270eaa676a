use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::beamform::BeamformerKind;
use crate::error::{Error, Result};
use crate::estimators::Method;
use crate::scenario::ScenarioConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Mean tap SNR in dB; the spread of the SNR distribution is unchanged.
    MeanSnrDb,
    /// Pilot length `T`.
    PilotLen,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::MeanSnrDb => "mean_snr_db",
            SweepAxis::PilotLen => "pilot_len",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Angle range searched by the digital baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DbfGrid {
    /// The tap's sector, like the hybrid baselines.
    #[default]
    Sector,
    /// The whole coverage range.
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub base: ScenarioConfig,
    pub axis: SweepAxis,
    pub axis_values: Vec<f64>,
    pub methods: Vec<Method>,
    pub beamformers: Vec<BeamformerKind>,
    /// Scenario drops per axis value.
    pub n_trials: usize,
    /// Angle grid step for the baselines, degrees.
    pub grid_step_deg: f64,
    pub dbf_grid: DbfGrid,
    pub output: Option<PathBuf>,
    pub seed: u64,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            base: ScenarioConfig::default(),
            axis: SweepAxis::MeanSnrDb,
            axis_values: vec![0.0, 15.0, 30.0],
            methods: Method::AOA.to_vec(),
            beamformers: vec![
                BeamformerKind::Capon,
                BeamformerKind::Geb,
                BeamformerKind::Steer,
            ],
            n_trials: 50,
            grid_step_deg: 0.05,
            dbf_grid: DbfGrid::Sector,
            output: None,
            seed: 0,
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.axis_values.is_empty() {
            return Err(Error::config(
                "axis_values",
                "at least one value is required",
            ));
        }
        if self.methods.is_empty() {
            return Err(Error::config("methods", "at least one method is required"));
        }
        if self.n_trials == 0 {
            return Err(Error::config("n_trials", "must be at least 1"));
        }
        if !(self.grid_step_deg > 0.0) {
            return Err(Error::config("grid_step_deg", "must be positive"));
        }
        for i in 0..self.axis_values.len() {
            self.config_at(i)?.validate()?;
        }
        Ok(())
    }

    /// Scenario configuration at axis point `index`.
    pub fn config_at(&self, index: usize) -> Result<ScenarioConfig> {
        let v = *self.axis_values.get(index).ok_or(Error::IndexOutOfRange {
            index,
            len: self.axis_values.len(),
        })?;
        let mut cfg = self.base.clone();
        match self.axis {
            SweepAxis::MeanSnrDb => cfg.rho_mean_db = v,
            SweepAxis::PilotLen => {
                if !(v >= 1.0) || v.fract() != 0.0 {
                    return Err(Error::config(
                        "axis_values",
                        format!("pilot length {v} is not a positive integer"),
                    ));
                }
                cfg.pilot_len = v as usize;
            }
        }
        Ok(cfg)
    }
}
