//! Pilots, received blocks and matched filtering.
//!
//! Each user sends a length-`T` QPSK pilot. A tap with delay `τ` contributes
//! `h · shift(x, τ)` to the `N × T` block, where `shift` is a circular right
//! shift, i.e. the block is cyclic in time.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modulation {
    Qpsk,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PilotBook {
    pilots: Vec<Vec<Complex64>>,
    pub modulation: Modulation,
}

impl PilotBook {
    pub fn pilot(&self, user: usize) -> &[Complex64] {
        &self.pilots[user]
    }

    pub fn n_users(&self) -> usize {
        self.pilots.len()
    }

    pub fn len(&self) -> usize {
        self.pilots.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Random unit-modulus QPSK pilots, one per user. Pilots are not
/// orthogonalized.
pub fn generate_pilots<R: Rng + ?Sized>(k: usize, t: usize, rng: &mut R) -> Result<PilotBook> {
    if k == 0 || t == 0 {
        return Err(Error::InvalidArgument(format!(
            "pilot book needs K >= 1 and T >= 1, got K={k}, T={t}"
        )));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let pilots = (0..k)
        .map(|_| {
            (0..t)
                .map(|_| {
                    let re = if rng.random::<bool>() { s } else { -s };
                    let im = if rng.random::<bool>() { s } else { -s };
                    Complex64::new(re, im)
                })
                .collect()
        })
        .collect();
    Ok(PilotBook {
        pilots,
        modulation: Modulation::Qpsk,
    })
}

/// Circular right shift by `tau` symbols.
pub fn shift(x: &[Complex64], tau: usize) -> Vec<Complex64> {
    let t = x.len();
    let mut out = vec![linalg::ZERO; t];
    for (i, &v) in x.iter().enumerate() {
        out[(i + tau) % t] = v;
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct RxBlock {
    /// `N × T` received samples.
    pub y: CMatrix,
    pub realization_index: usize,
}

/// `Y = Σ_taps h · shift(x_k, τ) + n` with `n ~ CN(0, N0)` entrywise.
///
/// `channels[i]` is the instantaneous channel of `scenario.taps[i]`.
pub fn synthesize_rx<R: Rng + ?Sized>(
    scenario: &Scenario,
    channels: &[CVector],
    pilots: &PilotBook,
    n0: f64,
    rng: &mut R,
    realization_index: usize,
) -> Result<RxBlock> {
    if channels.len() != scenario.taps.len() {
        return Err(Error::dim(format!(
            "{} channels for {} taps",
            channels.len(),
            scenario.taps.len()
        )));
    }
    let n = scenario.config.n_antennas;
    let t = pilots.len();
    let mut y = CMatrix::zeros(n, t);
    for (tap, h) in scenario.taps.iter().zip(channels) {
        if h.len() != n {
            return Err(Error::dim(format!("channel length {} vs N = {n}", h.len())));
        }
        if tap.user_index >= pilots.n_users() {
            return Err(Error::dim(format!(
                "tap of user {} but only {} pilots",
                tap.user_index,
                pilots.n_users()
            )));
        }
        let x = pilots.pilot(tap.user_index);
        for (i, &sym) in x.iter().enumerate() {
            let col = (i + tap.delay_taps) % t;
            y.column_mut(col).axpy(sym, h, Complex64::new(1.0, 0.0));
        }
    }
    if n0 > 0.0 {
        let s = (n0 / 2.0).sqrt();
        for z in y.iter_mut() {
            *z += linalg::cn_sample(rng, s);
        }
    }
    Ok(RxBlock {
        y,
        realization_index,
    })
}

/// `(1/√T) · Y · shift(x, τ)^H`.
pub fn matched_filter(y: &CMatrix, pilot: &[Complex64], tau: usize) -> Result<CVector> {
    let t = y.ncols();
    if pilot.len() != t {
        return Err(Error::dim(format!(
            "pilot length {} vs block length {t}",
            pilot.len()
        )));
    }
    let mut out = CVector::zeros(y.nrows());
    for (i, &sym) in pilot.iter().enumerate() {
        let col = (i + tau) % t;
        out.axpy(sym.conj(), &y.column(col), Complex64::new(1.0, 0.0));
    }
    out.unscale_mut((t as f64).sqrt());
    Ok(out)
}

/// Removes the `√T` matched-filter gain so the estimate tracks `h`.
pub fn channel_estimate(mf_output: &CVector, pilot_len: usize) -> CVector {
    mf_output.unscale((pilot_len as f64).sqrt())
}

/// Pilot correlations `C[s][t] = shift(x_s, τ_s) · shift(x_t, τ_t)^H` between
/// every pair of taps.
pub fn tap_correlations(scenario: &Scenario, pilots: &PilotBook) -> CMatrix {
    let shifted: Vec<Vec<Complex64>> = scenario
        .taps
        .iter()
        .map(|tap| shift(pilots.pilot(tap.user_index), tap.delay_taps))
        .collect();
    let l = shifted.len();
    CMatrix::from_fn(l, l, |s, t| {
        shifted[s]
            .iter()
            .zip(&shifted[t])
            .map(|(a, b)| a * b.conj())
            .sum()
    })
}

/// Matched-filter outputs of every tap computed from the pilot correlations
/// instead of a synthesized block:
/// `y_t = (1/√T) Σ_s h_s C[s][t] + ñ_t`, with `ñ_t ~ CN(0, N0·I)` drawn
/// independently per tap.
///
/// The signal part is identical to filtering a synthesized block. The noise
/// of each output has the correct marginal law but the cross-tap noise
/// correlation is dropped, so use it where taps are consumed one at a time.
pub fn matched_filter_marginal<R: Rng + ?Sized>(
    channels: &[CVector],
    correlations: &CMatrix,
    n0: f64,
    pilot_len: usize,
    rng: &mut R,
) -> Result<Vec<CVector>> {
    let l = channels.len();
    if correlations.nrows() != l || correlations.ncols() != l {
        return Err(Error::dim("correlation matrix does not match tap count"));
    }
    let n = channels.first().map_or(0, |h| h.len());
    let inv = 1.0 / (pilot_len as f64).sqrt();
    let mut out = Vec::with_capacity(l);
    for t in 0..l {
        let mut y = if n0 > 0.0 {
            linalg::complex_gaussian(rng, n, n0)
        } else {
            CVector::zeros(n)
        };
        for (s, h) in channels.iter().enumerate() {
            y.axpy(correlations[(s, t)] * inv, h, Complex64::new(1.0, 0.0));
        }
        out.push(y);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::scenario::{ScenarioConfig, UserTap};

    fn tap(user: usize, delay: usize) -> UserTap {
        UserTap {
            user_index: user,
            tap_index: 0,
            aoa_deg: 0.0,
            spread_deg: 1.0,
            snr_linear: 1.0,
            delay_taps: delay,
            sector_id: 4,
        }
    }

    fn scenario(n: usize, taps: Vec<UserTap>) -> Scenario {
        Scenario {
            config: ScenarioConfig {
                n_antennas: n,
                ..Default::default()
            },
            taps,
        }
    }

    #[test]
    fn pilots_have_unit_symbols_and_energy_t() {
        let book = generate_pilots(3, 64, &mut rng::seeded(1)).unwrap();
        for k in 0..3 {
            let x = book.pilot(k);
            assert!(x.iter().all(|z| (z.norm() - 1.0).abs() < 1e-15));
            let e: Complex64 = x.iter().map(|z| z * z.conj()).sum();
            assert!((e.re - 64.0).abs() < 1e-12 && e.im.abs() < 1e-12);
        }
        assert_eq!(book, generate_pilots(3, 64, &mut rng::seeded(1)).unwrap());
        assert!(generate_pilots(0, 4, &mut rng::seeded(1)).is_err());
    }

    #[test]
    fn shift_is_circular() {
        let x: Vec<Complex64> = (0..4).map(|i| Complex64::new(i as f64, 0.0)).collect();
        let s = shift(&x, 1);
        assert_eq!(
            s.iter().map(|z| z.re).collect::<Vec<_>>(),
            vec![3.0, 0.0, 1.0, 2.0]
        );
        assert_eq!(shift(&x, 4), x);
    }

    #[test]
    fn single_tap_noiseless_block_is_outer_product() {
        let mut r = rng::seeded(2);
        let book = generate_pilots(1, 16, &mut r).unwrap();
        let h = linalg::complex_gaussian(&mut r, 4, 1.0);
        let sc = scenario(4, vec![tap(0, 0)]);
        let blk = synthesize_rx(&sc, std::slice::from_ref(&h), &book, 0.0, &mut r, 0).unwrap();
        let x = CVector::from_column_slice(book.pilot(0));
        let expected = &h * x.transpose();
        assert!((blk.y - expected).norm() < 1e-14);
    }

    #[test]
    fn two_taps_superpose_with_delay() {
        let mut r = rng::seeded(3);
        let book = generate_pilots(1, 8, &mut r).unwrap();
        let h0 = linalg::complex_gaussian(&mut r, 3, 1.0);
        let h1 = linalg::complex_gaussian(&mut r, 3, 1.0);
        let sc = scenario(3, vec![tap(0, 0), tap(0, 1)]);
        let blk = synthesize_rx(&sc, &[h0.clone(), h1.clone()], &book, 0.0, &mut r, 0).unwrap();
        let x0 = CVector::from_column_slice(book.pilot(0));
        let x1 = CVector::from_vec(shift(book.pilot(0), 1));
        let expected = &h0 * x0.transpose() + &h1 * x1.transpose();
        assert!((blk.y - expected).norm() < 1e-14);
    }

    #[test]
    fn noise_only_block_variance() {
        let mut r = rng::seeded(4);
        let book = generate_pilots(1, 1000, &mut r).unwrap();
        let sc = scenario(100, vec![]);
        let blk = synthesize_rx(&sc, &[], &book, 1.0, &mut r, 0).unwrap();
        let var = blk.y.iter().map(|z| z.norm_sqr()).sum::<f64>() / 1e5;
        assert!((var - 1.0).abs() < 0.02, "{var}");
    }

    #[test]
    fn dimension_mismatches_reported() {
        let mut r = rng::seeded(5);
        let book = generate_pilots(1, 8, &mut r).unwrap();
        let sc = scenario(4, vec![tap(0, 0)]);
        assert!(synthesize_rx(&sc, &[], &book, 0.0, &mut r, 0).is_err());
        assert!(synthesize_rx(&sc, &[CVector::zeros(3)], &book, 0.0, &mut r, 0).is_err());
        assert!(matched_filter(&CMatrix::zeros(4, 8), &book.pilot(0)[..4], 0).is_err());
    }

    #[test]
    fn matched_filter_recovers_sqrt_t_h() {
        let mut r = rng::seeded(6);
        let t = 32;
        let book = generate_pilots(1, t, &mut r).unwrap();
        let h = linalg::complex_gaussian(&mut r, 8, 2.0);
        for tau in [0, 5] {
            let sc = scenario(8, vec![tap(0, tau)]);
            let blk = synthesize_rx(&sc, std::slice::from_ref(&h), &book, 0.0, &mut r, 0).unwrap();
            let y = matched_filter(&blk.y, book.pilot(0), tau).unwrap();
            assert!((&y - h.scale((t as f64).sqrt())).norm() < 1e-12);
            assert!((channel_estimate(&y, t) - &h).norm() < 1e-12);
        }
    }

    #[test]
    fn orthogonal_pilots_have_no_cross_term() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let a = Complex64::new(s, s);
        let b = Complex64::new(-s, -s);
        // Walsh-like rows: [a a a a] and [a b a b].
        let x1 = vec![a, a, a, a];
        let x2 = vec![a, b, a, b];
        let book = PilotBook {
            pilots: vec![x1, x2],
            modulation: Modulation::Qpsk,
        };
        let mut r = rng::seeded(7);
        let h1 = linalg::complex_gaussian(&mut r, 4, 1.0);
        let h2 = linalg::complex_gaussian(&mut r, 4, 1.0);
        let sc = scenario(4, vec![tap(0, 0), tap(1, 0)]);
        let blk = synthesize_rx(&sc, &[h1.clone(), h2.clone()], &book, 0.0, &mut r, 0).unwrap();
        let y1 = matched_filter(&blk.y, book.pilot(0), 0).unwrap();
        let y2 = matched_filter(&blk.y, book.pilot(1), 0).unwrap();
        assert!((y1 - h1.scale(2.0)).norm() < 1e-12);
        assert!((y2 - h2.scale(2.0)).norm() < 1e-12);
    }

    #[test]
    fn channel_estimate_is_linear() {
        let mut r = rng::seeded(8);
        let y = linalg::complex_gaussian(&mut r, 5, 1.0);
        let c = Complex64::new(0.3, -2.0);
        let a = channel_estimate(&(&y * c), 16);
        let b = channel_estimate(&y, 16) * c;
        assert!((a - b).norm() < 1e-14);
    }

    #[test]
    fn marginal_path_matches_full_path_without_noise() {
        let mut r = rng::seeded(9);
        let book = generate_pilots(3, 16, &mut r).unwrap();
        let sc = scenario(6, vec![tap(0, 0), tap(0, 3), tap(1, 2), tap(2, 0)]);
        let hs: Vec<_> = (0..4)
            .map(|_| linalg::complex_gaussian(&mut r, 6, 1.0))
            .collect();
        let blk = synthesize_rx(&sc, &hs, &book, 0.0, &mut r, 0).unwrap();
        let c = tap_correlations(&sc, &book);
        let fast = matched_filter_marginal(&hs, &c, 0.0, 16, &mut r).unwrap();
        for (i, t) in sc.taps.iter().enumerate() {
            let y = matched_filter(&blk.y, book.pilot(t.user_index), t.delay_taps).unwrap();
            assert!((&y - &fast[i]).norm() < 1e-12);
        }
    }
}
