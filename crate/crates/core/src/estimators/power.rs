use crate::ccm::{ccm_default, Ccm};
use crate::error::{Error, Result};

use super::TapObservation;

/// Mean over realizations of `max_i |b_i|² / (T·N)`.
///
/// With `b = √T·U^H h` and a beam aligned with a zero-spread tap,
/// `E|u^H h|² = ρN`, so the ratio estimates the per-antenna power ρ.
pub fn power_estimate(obs: &TapObservation, pilot_len: usize, n_antennas: usize) -> Result<f64> {
    if obs.beamspace.is_empty() {
        return Err(Error::Empty("realizations"));
    }
    let scale = (pilot_len * n_antennas) as f64;
    let total: f64 = obs
        .beamspace
        .iter()
        .map(|b| b.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max) / scale)
        .sum();
    Ok(total / obs.beamspace.len() as f64)
}

#[derive(Debug, Clone)]
pub struct CcmEstimate {
    pub theta_hat: f64,
    pub sigma_hat: f64,
    pub rho_hat: f64,
    pub ccm: Ccm,
}

/// CCM rebuilt from estimated parameters; a zero power gives the zero matrix.
pub fn estimate_ccm(theta_hat: f64, sigma_hat: f64, rho_hat: f64, n: usize) -> Result<CcmEstimate> {
    if !theta_hat.is_finite() || !sigma_hat.is_finite() || !rho_hat.is_finite() {
        return Err(Error::InvalidArgument(
            "non-finite parameter estimate".into(),
        ));
    }
    if rho_hat < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "negative power estimate {rho_hat}"
        )));
    }
    let ccm = if rho_hat == 0.0 {
        Ccm::zeros(n)
    } else {
        ccm_default(theta_hat, sigma_hat, rho_hat, n)?
    };
    Ok(CcmEstimate {
        theta_hat,
        sigma_hat,
        rho_hat,
        ccm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{relative_frobenius, CVector};
    use num_complex::Complex64;

    #[test]
    fn power_is_quadratic_and_averaged() {
        let obs = TapObservation {
            beamspace: vec![
                CVector::from_vec(vec![Complex64::new(2.0, 0.0), Complex64::new(1.0, 0.0)]),
                CVector::from_vec(vec![Complex64::new(0.0, 4.0), Complex64::new(1.0, 0.0)]),
            ],
            full: None,
            sector_id: 0,
            true_params: None,
        };
        assert_eq!(
            power_estimate(&obs, 2, 2).unwrap(),
            (4.0 + 16.0) / 2.0 / 4.0
        );
        let doubled = TapObservation {
            beamspace: obs.beamspace.iter().map(|b| b.scale(2.0)).collect(),
            ..obs.clone()
        };
        assert_eq!(
            power_estimate(&doubled, 2, 2).unwrap(),
            4.0 * power_estimate(&obs, 2, 2).unwrap()
        );
    }

    #[test]
    fn ccm_estimate_matches_constructor_and_scales() {
        let e = estimate_ccm(10.0, 2.0, 3.0, 32).unwrap();
        let r = ccm_default(10.0, 2.0, 3.0, 32).unwrap();
        assert!(relative_frobenius(e.ccm.matrix(), r.matrix()) < 1e-14);
        let e2 = estimate_ccm(10.0, 2.0, 6.0, 32).unwrap();
        assert!(relative_frobenius(e2.ccm.matrix(), &r.matrix().scale(2.0)) < 1e-12);
        assert_eq!(estimate_ccm(0.0, 1.0, 0.0, 8).unwrap().ccm.trace(), 0.0);
        assert!(estimate_ccm(f64::NAN, 1.0, 1.0, 8).is_err());
    }
}
