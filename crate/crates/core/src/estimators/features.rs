use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CVector;

use super::TapObservation;

/// How beam powers are presented to the AoA network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AoaInput {
    /// `|b_i|²` scaled to unit sum.
    #[default]
    Normalized,
    /// `|b_i|²` as observed.
    Raw,
}

fn unit_sum(mut p: Vec<f64>) -> Vec<f64> {
    let total: f64 = p.iter().sum();
    if total > 0.0 && total.is_finite() {
        p.iter_mut().for_each(|v| *v /= total);
    } else {
        let u = 1.0 / p.len() as f64;
        p.iter_mut().for_each(|v| *v = u);
    }
    p
}

/// Beam powers normalized to unit sum; an all-zero input maps to the
/// uniform vector.
pub fn aoa_dnn_input(b: &CVector) -> Vec<f64> {
    aoa_input_with(b, AoaInput::Normalized)
}

pub(crate) fn aoa_input_with(b: &CVector, mode: AoaInput) -> Vec<f64> {
    let p: Vec<f64> = b.iter().map(|z| z.norm_sqr()).collect();
    match mode {
        AoaInput::Normalized => unit_sum(p),
        AoaInput::Raw => p,
    }
}

fn argmax_power(b: &CVector) -> usize {
    let mut best = 0;
    let mut best_p = f64::NEG_INFINITY;
    for (i, z) in b.iter().enumerate() {
        let p = z.norm_sqr();
        if p > best_p {
            best = i;
            best_p = p;
        }
    }
    best
}

/// Window of `n2` consecutive beam positions centred on `peak`, slid inward
/// at the edges.
pub fn as_window(peak: usize, n_sec: usize, n2: usize) -> Range<usize> {
    assert!(n2 >= 1 && n2 <= n_sec && peak < n_sec);
    let half = (n2 - 1) / 2;
    let start = peak.saturating_sub(half).min(n_sec - n2);
    start..start + n2
}

/// The `n2` beams around the strongest one.
pub fn select_as_beams(b: &CVector, n2: usize) -> Result<CVector> {
    if n2 == 0 || n2 > b.len() {
        return Err(Error::InvalidArgument(format!(
            "cannot keep {n2} of {} beams",
            b.len()
        )));
    }
    let w = as_window(argmax_power(b), b.len(), n2);
    Ok(b.rows(w.start, w.len()).into_owned())
}

/// Spread features: a single window centred on the strongest beam over all
/// realizations, per-realization unit-sum powers in that window, then the
/// per-beam mean and population standard deviation across realizations.
pub fn as_dnn_input(obs: &TapObservation, n2: usize) -> Result<Vec<f64>> {
    let tr = obs.beamspace.len();
    if tr < 2 {
        return Err(Error::InvalidArgument(format!(
            "spread features need at least 2 realizations, got {tr}"
        )));
    }
    let n_sec = obs.beamspace[0].len();
    if n2 == 0 || n2 > n_sec {
        return Err(Error::InvalidArgument(format!(
            "cannot keep {n2} of {n_sec} beams"
        )));
    }
    let mut peak = (0, f64::NEG_INFINITY);
    for b in &obs.beamspace {
        if b.len() != n_sec {
            return Err(Error::dim("realizations have different beam counts"));
        }
        let i = argmax_power(b);
        let p = b[i].norm_sqr();
        if p > peak.1 {
            peak = (i, p);
        }
    }
    let w = as_window(peak.0, n_sec, n2);
    let rows: Vec<Vec<f64>> = obs
        .beamspace
        .iter()
        .map(|b| {
            unit_sum(
                b.as_slice()[w.clone()]
                    .iter()
                    .map(|z| z.norm_sqr())
                    .collect(),
            )
        })
        .collect();
    let t = tr as f64;
    let mean: Vec<f64> = (0..n2)
        .map(|i| rows.iter().map(|r| r[i]).sum::<f64>() / t)
        .collect();
    let mut out = mean.clone();
    out.extend((0..n2).map(|i| {
        let var = rows.iter().map(|r| (r[i] - mean[i]).powi(2)).sum::<f64>() / t;
        var.sqrt()
    }));
    Ok(out)
}
