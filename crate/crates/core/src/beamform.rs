//! Receive beamformers built from channel covariances and their SINR.

use std::fmt;
use std::str::FromStr;

use nalgebra::Cholesky;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::array::steering;
use crate::ccm::Ccm;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeamformerKind {
    Capon,
    Geb,
    Steer,
}

impl BeamformerKind {
    pub fn name(self) -> &'static str {
        match self {
            BeamformerKind::Capon => "capon",
            BeamformerKind::Geb => "geb",
            BeamformerKind::Steer => "steer",
        }
    }
}

impl fmt::Display for BeamformerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BeamformerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "capon" => Ok(BeamformerKind::Capon),
            "geb" => Ok(BeamformerKind::Geb),
            "steer" => Ok(BeamformerKind::Steer),
            _ => Err(Error::InvalidArgument(format!("unknown beamformer '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Beamformer {
    pub weights: CVector,
    pub kind: BeamformerKind,
}

/// Interference-plus-noise covariance seen by one served tap.
#[derive(Debug, Clone)]
pub struct InterferenceModel {
    pub r_eta: CMatrix,
    /// Indices of the taps summed into `r_eta`.
    pub taps: Vec<usize>,
    chol: Cholesky<Complex64, nalgebra::Dyn>,
}

impl InterferenceModel {
    /// Wraps an explicit Hermitian positive-definite covariance.
    pub fn new(r_eta: CMatrix, taps: Vec<usize>) -> Result<Self> {
        if !r_eta.is_square() {
            return Err(Error::dim("interference covariance must be square"));
        }
        let chol = Cholesky::new(r_eta.clone()).ok_or_else(|| {
            Error::Factorization("interference covariance is not positive definite".into())
        })?;
        Ok(Self { r_eta, taps, chol })
    }

    pub fn n(&self) -> usize {
        self.r_eta.nrows()
    }

    /// Solves `R_η x = b`.
    pub fn solve(&self, b: &CVector) -> CVector {
        self.chol.solve(b)
    }

    /// `L^{-1} x` for the Cholesky factor `R_η = L L^H`.
    fn whiten(&self, x: &CMatrix) -> CMatrix {
        self.chol
            .l_dirty()
            .solve_lower_triangular(x)
            .expect("Cholesky factor has a non-zero diagonal")
    }

    fn unwhiten(&self, z: &CVector) -> CVector {
        let l = self.chol.l();
        l.adjoint()
            .solve_upper_triangular(z)
            .expect("Cholesky factor has a non-zero diagonal")
    }
}

/// `Σ_{t ≠ served} R_t + N0·I`.
pub fn interference_ccm(ccms: &[Ccm], served: usize, n0: f64) -> Result<InterferenceModel> {
    if served >= ccms.len() {
        return Err(Error::UnknownTap(served));
    }
    if !(n0 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "noise power must be positive, got {n0}"
        )));
    }
    let n = ccms[served].n();
    let mut r = CMatrix::identity(n, n).scale(n0);
    let mut taps = Vec::with_capacity(ccms.len() - 1);
    for (t, c) in ccms.iter().enumerate() {
        if t == served {
            continue;
        }
        if c.n() != n {
            return Err(Error::dim("CCMs have different sizes"));
        }
        r += c.matrix();
        taps.push(t);
    }
    InterferenceModel::new(r, taps)
}

/// Same as [`interference_ccm`] given the precomputed total
/// `Σ_t R_t + N0·I` over all `n_taps` taps.
pub fn interference_from_total(
    total: &CMatrix,
    served: &Ccm,
    served_index: usize,
    n_taps: usize,
) -> Result<InterferenceModel> {
    if served_index >= n_taps {
        return Err(Error::UnknownTap(served_index));
    }
    let r = total - served.matrix();
    InterferenceModel::new(r, (0..n_taps).filter(|&t| t != served_index).collect())
}

/// `w = R_η^{-1} h`.
pub fn capon(h: &CVector, interference: &InterferenceModel) -> Result<Beamformer> {
    if h.len() != interference.n() {
        return Err(Error::dim(format!(
            "channel length {} vs {}",
            h.len(),
            interference.n()
        )));
    }
    if h.iter().all(|z| *z == linalg::ZERO) {
        return Err(Error::InvalidArgument("channel is zero".into()));
    }
    let w = interference.solve(h);
    if w.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Factorization(
            "Capon solve produced non-finite weights".into(),
        ));
    }
    Ok(Beamformer {
        weights: w,
        kind: BeamformerKind::Capon,
    })
}

/// Principal generalized eigenvector of `(R, R_η)`, unit norm.
///
/// With `R_η = L L^H` and `R = F F^H`, the reduced matrix
/// `L^{-1} R L^{-H} = G G^H` for `G = L^{-1} F`, whose top eigenvector is
/// taken from the small Gram matrix `G^H G`.
pub fn geb(served: &Ccm, interference: &InterferenceModel) -> Result<Beamformer> {
    if served.n() != interference.n() {
        return Err(Error::dim("served CCM and interference sizes differ"));
    }
    let f = served.factor();
    if f.ncols() == 0 {
        return Err(Error::Degenerate("served CCM is zero".into()));
    }
    let g = interference.whiten(f);
    let eig = linalg::hermitian_eigen(&g.ad_mul(&g));
    if !(eig.values[0] > 0.0) {
        return Err(Error::Degenerate("served CCM is zero".into()));
    }
    let z = &g * eig.vectors.column(0);
    let mut w = interference.unwhiten(&z);
    let norm = w.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::Factorization(
            "generalized eigenvector is degenerate".into(),
        ));
    }
    w.unscale_mut(norm);
    Ok(Beamformer {
        weights: w,
        kind: BeamformerKind::Geb,
    })
}

/// `w = u(θ̂)`.
pub fn steer_bf(theta_deg: f64, n: usize) -> Beamformer {
    Beamformer {
        weights: steering(theta_deg, n),
        kind: BeamformerKind::Steer,
    }
}

/// `|w^H h|² / (w^H R_η w)`.
pub fn sinr(w: &CVector, h: &CVector, interference: &InterferenceModel) -> f64 {
    let signal = linalg::inner(w.as_slice(), h.as_slice()).norm_sqr();
    let rw = &interference.r_eta * w;
    let denom = linalg::inner(w.as_slice(), rw.as_slice()).re;
    signal / denom
}
