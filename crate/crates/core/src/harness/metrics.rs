use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Half of the 3 dB beamwidth used for the outage probability.
pub const P_OUT_HALF_BW_DEG: f64 = 1.5;

fn non_empty(values: &[f64], what: &'static str) -> Result<()> {
    if values.is_empty() {
        Err(Error::Empty(what))
    } else {
        Ok(())
    }
}

pub fn mean(values: &[f64]) -> Result<f64> {
    non_empty(values, "values")?;
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Mean squared error of signed errors.
pub fn mse(errors: &[f64]) -> Result<f64> {
    non_empty(errors, "error list")?;
    Ok(errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64)
}

/// Fraction of errors whose magnitude strictly exceeds `half_bw`.
pub fn p_out(errors: &[f64], half_bw: f64) -> Result<f64> {
    non_empty(errors, "error list")?;
    if !(half_bw > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "half beamwidth must be positive, got {half_bw}"
        )));
    }
    Ok(errors.iter().filter(|e| e.abs() > half_bw).count() as f64 / errors.len() as f64)
}

/// Standard error of the sample mean (unbiased variance).
pub fn standard_error(values: &[f64]) -> Result<f64> {
    non_empty(values, "values")?;
    let n = values.len() as f64;
    if values.len() < 2 {
        return Ok(0.0);
    }
    let m = mean(values)?;
    let var = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((var / n).sqrt())
}

/// Standard error of [`mse`].
pub fn mse_standard_error(errors: &[f64]) -> Result<f64> {
    let sq: Vec<f64> = errors.iter().map(|e| e * e).collect();
    standard_error(&sq)
}

/// Sorted `(value, fraction of samples ≤ value)` pairs.
pub fn empirical_cdf(values: &[f64]) -> Result<Vec<(f64, f64)>> {
    non_empty(values, "values")?;
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut out = Vec::with_capacity(v.len());
    let mut i = 0;
    while i < v.len() {
        let mut j = i;
        while j + 1 < v.len() && v[j + 1] == v[i] {
            j += 1;
        }
        for _ in i..=j {
            out.push((v[i], (j + 1) as f64 / n));
        }
        i = j + 1;
    }
    Ok(out)
}

/// Linear-interpolated quantile, `q` in `[0, 1]`.
pub fn quantile(values: &[f64], q: f64) -> Result<f64> {
    non_empty(values, "values")?;
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidArgument(format!(
            "quantile {q} outside [0, 1]"
        )));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Ok(v[lo] + (v[hi] - v[lo]) * (pos - lo as f64))
}

/// Excess kurtosis.
pub fn kurtosis(values: &[f64]) -> Result<f64> {
    let m = mean(values)?;
    let n = values.len() as f64;
    let m2 = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
    let m4 = values.iter().map(|v| (v - m).powi(4)).sum::<f64>() / n;
    if m2 == 0.0 {
        return Err(Error::Degenerate("zero variance".into()));
    }
    Ok(m4 / (m2 * m2) - 3.0)
}

/// Fixed-width histogram. `mass` is normalized over the samples inside
/// `[lo, hi]`; samples outside are only counted in `outside`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub mass: Vec<f64>,
    pub inside: usize,
    pub outside: usize,
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.mass.len()
    }

    pub fn edges(&self) -> Vec<f64> {
        let w = (self.hi - self.lo) / self.bins() as f64;
        (0..=self.bins()).map(|i| self.lo + w * i as f64).collect()
    }

    pub fn centers(&self) -> Vec<f64> {
        let e = self.edges();
        e.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }
}

pub fn histogram(values: &[f64], lo: f64, hi: f64, bins: usize) -> Result<Histogram> {
    non_empty(values, "values")?;
    if bins == 0 || !(hi > lo) {
        return Err(Error::InvalidArgument(format!(
            "bad histogram range [{lo}, {hi}] with {bins} bins"
        )));
    }
    let mut counts = vec![0usize; bins];
    let mut outside = 0;
    let w = (hi - lo) / bins as f64;
    for &v in values {
        if !(lo..=hi).contains(&v) {
            outside += 1;
            continue;
        }
        let k = (((v - lo) / w).floor() as usize).min(bins - 1);
        counts[k] += 1;
    }
    let inside = values.len() - outside;
    let mass = counts
        .iter()
        .map(|&c| {
            if inside > 0 {
                c as f64 / inside as f64
            } else {
                0.0
            }
        })
        .collect();
    Ok(Histogram {
        lo,
        hi,
        mass,
        inside,
        outside,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mse_cases() {
        assert_eq!(mse(&[1.0, 2.0]).unwrap(), 2.5);
        assert_eq!(mse(&[0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(mse(&[-3.0]).unwrap(), 9.0);
        assert!(mse(&[]).is_err());
    }

    #[test]
    fn p_out_cases() {
        assert!((p_out(&[0.1, 2.0, 1.0], 1.5).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(p_out(&[1.5, -1.5], P_OUT_HALF_BW_DEG).unwrap(), 0.0);
        assert_eq!(p_out(&[-1.6], 1.5).unwrap(), 1.0);
        assert!(p_out(&[], 1.5).is_err());
        assert!(p_out(&[1.0], 0.0).is_err());
    }

    #[test]
    fn cdf_cases() {
        assert_eq!(empirical_cdf(&[3.0]).unwrap(), vec![(3.0, 1.0)]);
        let c = empirical_cdf(&[4.0, 2.0, 1.0, 2.0]).unwrap();
        assert_eq!(c, vec![(1.0, 0.25), (2.0, 0.75), (2.0, 0.75), (4.0, 1.0)]);
        assert!(empirical_cdf(&[]).is_err());
    }

    #[test]
    fn histogram_cases() {
        let h = histogram(&[-4.9, 0.1, 0.2, 4.99, 7.0], -5.0, 5.0, 10).unwrap();
        assert_eq!(h.inside, 4);
        assert_eq!(h.outside, 1);
        assert!((h.mass.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(h.mass[5], 0.5);
        assert_eq!(
            h.edges(),
            (0..=10).map(|i| -5.0 + i as f64).collect::<Vec<_>>()
        );
        assert!(histogram(&[1.0], 1.0, 1.0, 3).is_err());
    }

    #[test]
    fn summary_statistics() {
        assert_eq!(quantile(&[3.0, 1.0, 2.0], 0.5).unwrap(), 2.0);
        assert_eq!(quantile(&[1.0, 2.0], 0.5).unwrap(), 1.5);
        let se = standard_error(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert!(kurtosis(&[1.0, 1.0]).is_err());
        assert!((kurtosis(&[-1.0, 1.0]).unwrap() + 2.0).abs() < 1e-15);
    }
}
