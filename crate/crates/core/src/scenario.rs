//! System configuration and angle-delay plane sampling.
//!
//! Each user carries between one and `l_max` taps. Every tap gets a delay,
//! a mean angle of arrival, a uniform angular spread and a log-normal SNR.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::array;
use crate::error::{Error, Result};
use crate::rng::{self, tag};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_antennas: usize,
    pub n_users: usize,
    pub l_max: usize,
    /// Channel delay spread in taps.
    pub l_ch: usize,
    pub theta_min: f64,
    pub theta_max: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub rho_mean_db: f64,
    pub rho_std_db: f64,
    /// Pilot length `T`.
    pub pilot_len: usize,
    /// Independent channel realizations `T_r` per CCM estimate.
    pub n_realizations: usize,
    /// Beams (RF chains) per sector, `N_sec`.
    pub beams_per_sector: usize,
    /// Noise power `N0` (linear).
    pub noise_var: f64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_antennas: 128,
            n_users: 16,
            l_max: 4,
            l_ch: 32,
            theta_min: -45.0,
            theta_max: 45.0,
            sigma_min: 0.6,
            sigma_max: 3.0,
            rho_mean_db: 30.0,
            rho_std_db: 3.0,
            pilot_len: 128,
            n_realizations: 10,
            beams_per_sector: 8,
            noise_var: 1.0,
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        validate_config(self)
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }
}

/// Checks every configuration invariant and names the first offending field.
pub fn validate_config(cfg: &ScenarioConfig) -> Result<()> {
    let finite = [
        ("theta_min", cfg.theta_min),
        ("theta_max", cfg.theta_max),
        ("sigma_min", cfg.sigma_min),
        ("sigma_max", cfg.sigma_max),
        ("rho_mean_db", cfg.rho_mean_db),
        ("rho_std_db", cfg.rho_std_db),
        ("noise_var", cfg.noise_var),
    ];
    for (field, v) in finite {
        if !v.is_finite() {
            return Err(Error::config(field, "must be finite"));
        }
    }
    if cfg.n_antennas == 0 {
        return Err(Error::config("n_antennas", "must be positive"));
    }
    if cfg.n_users == 0 {
        return Err(Error::config("n_users", "must be positive"));
    }
    if cfg.theta_min >= cfg.theta_max {
        return Err(Error::config("theta_min", "theta range empty"));
    }
    if cfg.theta_min < array::SECTOR_LOW_DEG || cfg.theta_max > array::SECTOR_HIGH_DEG {
        return Err(Error::config(
            "theta_max",
            "theta range must lie inside the sector plan [-45, 45]",
        ));
    }
    if cfg.sigma_min <= 0.0 {
        return Err(Error::config("sigma_min", "must be positive"));
    }
    if cfg.sigma_min > cfg.sigma_max {
        return Err(Error::config("sigma_max", "sigma range empty"));
    }
    if cfg.l_max == 0 {
        return Err(Error::config("l_max", "must be at least 1"));
    }
    if cfg.l_max > cfg.l_ch {
        return Err(Error::config("l_max", "must not exceed l_ch"));
    }
    if cfg.rho_std_db < 0.0 {
        return Err(Error::config("rho_std_db", "must be non-negative"));
    }
    if cfg.beams_per_sector != 4 && cfg.beams_per_sector != 8 {
        return Err(Error::config("beams_per_sector", "N_sec must be 4 or 8"));
    }
    if cfg.pilot_len == 0 {
        return Err(Error::config("pilot_len", "T must be at least 1"));
    }
    if cfg.n_realizations == 0 {
        return Err(Error::config("n_realizations", "T_r must be at least 1"));
    }
    if cfg.noise_var < 0.0 {
        return Err(Error::config("noise_var", "must be non-negative"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserTap {
    pub user_index: usize,
    pub tap_index: usize,
    pub aoa_deg: f64,
    pub spread_deg: f64,
    pub snr_linear: f64,
    pub delay_taps: usize,
    pub sector_id: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub config: ScenarioConfig,
    /// Taps in user order; the taps of one user are contiguous.
    pub taps: Vec<UserTap>,
}

impl Scenario {
    pub fn taps_of(&self, user: usize) -> impl Iterator<Item = &UserTap> {
        self.taps.iter().filter(move |t| t.user_index == user)
    }

    pub fn tap_count(&self, user: usize) -> usize {
        self.taps_of(user).count()
    }

    /// Samples with the stream derived from `cfg.seed` alone.
    pub fn sample_seeded(cfg: &ScenarioConfig) -> Result<Scenario> {
        sample_scenario(cfg, &mut rng::stream(cfg.seed, &[tag::SCENARIO]))
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn sample_scenario<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Result<Scenario> {
    validate_config(cfg)?;
    let mut taps = Vec::with_capacity(cfg.n_users * cfg.l_max);
    for k in 0..cfg.n_users {
        let n_taps = rng.random_range(1..=cfg.l_max);
        for l in 0..n_taps {
            let delay_taps = rng.random_range(0..cfg.l_ch);
            let aoa_deg = rng.random_range(cfg.theta_min..=cfg.theta_max);
            let spread_deg = if cfg.sigma_min == cfg.sigma_max {
                cfg.sigma_min
            } else {
                rng.random_range(cfg.sigma_min..=cfg.sigma_max)
            };
            let z: f64 = rng.sample(StandardNormal);
            let snr_linear = db_to_linear(cfg.rho_mean_db + cfg.rho_std_db * z);
            let sector_id = array::sector_of(aoa_deg)
                .expect("validated theta range lies inside the sector plan");
            taps.push(UserTap {
                user_index: k,
                tap_index: l,
                aoa_deg,
                spread_deg,
                snr_linear,
                delay_taps,
                sector_id,
            });
        }
    }
    Ok(Scenario {
        config: cfg.clone(),
        taps,
    })
}
