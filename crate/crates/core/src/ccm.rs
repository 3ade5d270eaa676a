//! Parametric channel covariance matrices.
//!
//! A tap with mean angle θ, uniform angular spread σ and power ρ has
//!
//! ```text
//! R = (ρ·N/σ) ∫_{θ-σ/2}^{θ+σ/2} u(φ) u(φ)^H dφ
//! ```
//!
//! so that `trace(R) = ρ·N` and ρ is the mean per-antenna channel power.
//! The integral is evaluated with Gauss–Legendre quadrature, which also
//! yields an exact low-rank factor `R = F F^H` (one column per node) that is
//! cached for sampling `h ~ CN(0, R)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::array::{fill_steering, steering};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};

/// Relative eigenvalue cutoff used when a factor has to come from an
/// eigendecomposition.
pub const FACTOR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CcmParams {
    pub theta_deg: f64,
    pub sigma_deg: f64,
    pub rho: f64,
}

/// Scaling of the spread integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `trace(R) = ρ·N`.
    #[default]
    PerAntenna,
    /// `R = ρ ∫ u u^H dφ` with φ in radians, so `trace(R) = ρ·σ_rad`.
    Literal,
}

#[derive(Debug, Clone)]
pub struct Ccm {
    matrix: CMatrix,
    params: Option<CcmParams>,
    factor: CMatrix,
}

impl Ccm {
    /// Wraps an explicit Hermitian PSD matrix, factoring it by eigendecomposition.
    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::dim("CCM must be square"));
        }
        let factor = factor(&matrix, FACTOR_TOL)?;
        Ok(Self {
            matrix,
            params: None,
            factor,
        })
    }

    fn from_factor(factor: CMatrix, params: Option<CcmParams>) -> Self {
        let matrix = &factor * factor.adjoint();
        Self {
            matrix,
            params,
            factor,
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            matrix: CMatrix::zeros(n, n),
            params: None,
            factor: CMatrix::zeros(n, 0),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn params(&self) -> Option<&CcmParams> {
        self.params.as_ref()
    }

    /// Cached factor `F` with `F F^H = R`.
    pub fn factor(&self) -> &CMatrix {
        &self.factor
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.matrix).re
    }

    /// `c·R` for `c ≥ 0`.
    pub fn scaled(&self, c: f64) -> Ccm {
        assert!(c >= 0.0, "CCM scale must be non-negative");
        Ccm {
            matrix: self.matrix.scale(c),
            params: self.params.map(|p| CcmParams {
                rho: p.rho * c,
                ..p
            }),
            factor: self.factor.scale(c.sqrt()),
        }
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Default node count `max(16, ceil(4·N·σ_rad))`; the integrand's angular
/// bandwidth grows with `N·σ`.
pub fn default_quad_nodes(n: usize, sigma_deg: f64) -> usize {
    let k = (4.0 * n as f64 * sigma_deg.to_radians()).ceil() as usize;
    k.max(16)
}

fn check_params(sigma_deg: f64, rho: f64) -> Result<()> {
    if !(sigma_deg > 0.0) || !sigma_deg.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "angular spread must be positive, got {sigma_deg}"
        )));
    }
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "tap power must be positive, got {rho}"
        )));
    }
    Ok(())
}

/// Quadrature factor of the spread integral without forming `R`.
///
/// Column `q` is `sqrt(c·w_q)·u(φ_q)`; for the default normalization
/// `c = ρ·N/2`.
pub fn quadrature_factor(
    theta_deg: f64,
    sigma_deg: f64,
    rho: f64,
    n: usize,
    quad_nodes: usize,
    normalization: Normalization,
) -> Result<CMatrix> {
    check_params(sigma_deg, rho)?;
    if quad_nodes < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 quadrature nodes, got {quad_nodes}"
        )));
    }
    let (nodes, weights) = gauss_legendre(quad_nodes);
    let half = sigma_deg / 2.0;
    // ∫ over [θ-σ/2, θ+σ/2] in radians = (σ_rad/2) Σ w_q f(φ_q).
    let c = match normalization {
        Normalization::PerAntenna => rho * n as f64 / 2.0,
        Normalization::Literal => rho * sigma_deg.to_radians() / 2.0,
    };
    let mut f = CMatrix::zeros(n, quad_nodes);
    for (q, (&x, &w)) in nodes.iter().zip(&weights).enumerate() {
        let mut col = f.column_mut(q);
        fill_steering(theta_deg + half * x, col.as_mut_slice());
        col *= Complex64::new((c * w).sqrt(), 0.0);
    }
    Ok(f)
}

pub fn ccm_from_params(
    theta_deg: f64,
    sigma_deg: f64,
    rho: f64,
    n: usize,
    quad_nodes: usize,
) -> Result<Ccm> {
    ccm_from_params_with(
        theta_deg,
        sigma_deg,
        rho,
        n,
        quad_nodes,
        Normalization::PerAntenna,
    )
}

pub fn ccm_from_params_with(
    theta_deg: f64,
    sigma_deg: f64,
    rho: f64,
    n: usize,
    quad_nodes: usize,
    normalization: Normalization,
) -> Result<Ccm> {
    let f = quadrature_factor(theta_deg, sigma_deg, rho, n, quad_nodes, normalization)?;
    Ok(Ccm::from_factor(
        f,
        Some(CcmParams {
            theta_deg,
            sigma_deg,
            rho,
        }),
    ))
}

/// `ccm_from_params` with [`default_quad_nodes`].
pub fn ccm_default(theta_deg: f64, sigma_deg: f64, rho: f64, n: usize) -> Result<Ccm> {
    ccm_from_params(
        theta_deg,
        sigma_deg,
        rho,
        n,
        default_quad_nodes(n, sigma_deg),
    )
}

/// Zero-spread CCM `ρ·N·u(θ)u(θ)^H`.
pub fn ccm_rank1(theta_deg: f64, rho: f64, n: usize) -> Result<Ccm> {
    if !(rho > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tap power must be positive, got {rho}"
        )));
    }
    let u = steering(theta_deg, n).scale((rho * n as f64).sqrt());
    let f = CMatrix::from_columns(&[u]);
    let mut c = Ccm::from_factor(f, None);
    c.params = Some(CcmParams {
        theta_deg,
        sigma_deg: 0.0,
        rho,
    });
    Ok(c)
}

/// Discrete-beam CCM `Σ p_i·N·u(θ_i)u(θ_i)^H`.
pub fn ccm_discrete(angles_deg: &[f64], powers: &[f64], n: usize) -> Result<Ccm> {
    if angles_deg.len() != powers.len() {
        return Err(Error::dim(format!(
            "{} angles vs {} powers",
            angles_deg.len(),
            powers.len()
        )));
    }
    if let Some(p) = powers.iter().find(|&&p| !(p >= 0.0)) {
        return Err(Error::InvalidArgument(format!("negative beam power {p}")));
    }
    let mut matrix = CMatrix::zeros(n, n);
    let mut u = CVector::zeros(n);
    for (&a, &p) in angles_deg.iter().zip(powers) {
        fill_steering(a, u.as_mut_slice());
        let s = Complex64::new(p * n as f64, 0.0);
        matrix.gerc(s, &u, &u, Complex64::new(1.0, 0.0));
    }
    if angles_deg.len() <= n {
        let cols: Vec<CVector> = angles_deg
            .iter()
            .zip(powers)
            .map(|(&a, &p)| steering(a, n).scale((p * n as f64).sqrt()))
            .collect();
        let factor = if cols.is_empty() {
            CMatrix::zeros(n, 0)
        } else {
            CMatrix::from_columns(&cols)
        };
        return Ok(Ccm {
            matrix,
            params: None,
            factor,
        });
    }
    Ccm::from_matrix(matrix)
}

/// Eigen-truncated factor: keeps eigenpairs above `tol·λ_max`.
pub fn factor(matrix: &CMatrix, tol: f64) -> Result<CMatrix> {
    let n = matrix.nrows();
    let eig = linalg::hermitian_eigen(matrix);
    let max = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    let min = eig.values.last().copied().unwrap_or(0.0);
    if min < -tol * max.max(f64::MIN_POSITIVE) && min < 0.0 && max > 0.0 {
        return Err(Error::NotPsd {
            min_eig: min,
            max_eig: max,
            tol,
        });
    }
    if max <= 0.0 {
        if min < 0.0 {
            return Err(Error::NotPsd {
                min_eig: min,
                max_eig: max,
                tol,
            });
        }
        return Ok(CMatrix::zeros(n, 0));
    }
    let keep: Vec<usize> = (0..n).filter(|&i| eig.values[i] > tol * max).collect();
    let mut f = CMatrix::zeros(n, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        let s = eig.values[i].sqrt();
        f.set_column(j, &eig.vectors.column(i).scale(s));
    }
    Ok(f)
}

/// Draws `h = F z` with `z ~ CN(0, I)`.
pub fn sample_from_factor<R: Rng + ?Sized>(f: &CMatrix, rng: &mut R) -> CVector {
    if f.ncols() == 0 {
        return CVector::zeros(f.nrows());
    }
    let z = linalg::complex_gaussian(rng, f.ncols(), 1.0);
    f * z
}

pub fn sample_channel<R: Rng + ?Sized>(r: &Ccm, rng: &mut R) -> CVector {
    sample_from_factor(&r.factor, rng)
}

/// Number of eigenvalues above `cutoff·λ_max`.
pub fn effective_rank(r: &CMatrix, cutoff: f64) -> usize {
    let eig = linalg::hermitian_eigen(r);
    let max = eig.values[0];
    eig.values.iter().filter(|&&v| v > cutoff * max).count()
}
