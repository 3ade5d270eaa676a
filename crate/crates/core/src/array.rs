//! Uniform linear array geometry and DFT beamspace.
//!
//! Angles are in degrees at every public boundary. Element `n` (0-based) of
//! the half-wavelength ULA steering vector has phase `π·n·sin(φ)`, and DFT
//! column `n` equals the steering vector at [`beam_angle`]`(n, N)`.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};

pub const SECTOR_COUNT: usize = 8;
pub const SECTOR_LOW_DEG: f64 = -45.0;
pub const SECTOR_HIGH_DEG: f64 = 45.0;
pub const SECTOR_WIDTH_DEG: f64 = (SECTOR_HIGH_DEG - SECTOR_LOW_DEG) / SECTOR_COUNT as f64;

/// Geometry the beam table was designed for.
pub const TABLE_ANTENNAS: usize = 128;

/// DFT column indices (1-based) per sector, eight beams per sector.
const BEAMS_8: [[usize; 8]; SECTOR_COUNT] = [
    [37, 39, 40, 41, 42, 43, 44, 46],
    [26, 27, 29, 30, 31, 32, 34, 36],
    [14, 15, 17, 19, 20, 22, 24, 25],
    [1, 3, 5, 7, 8, 10, 12, 13],
    [1, 127, 125, 123, 122, 120, 118, 117],
    [116, 115, 113, 111, 110, 108, 106, 105],
    [104, 103, 101, 100, 99, 98, 96, 94],
    [93, 91, 90, 89, 88, 87, 86, 84],
];

/// DFT column indices (1-based) per sector, four beams per sector.
const BEAMS_4: [[usize; 4]; SECTOR_COUNT] = [
    [38, 41, 43, 46],
    [27, 30, 32, 35],
    [15, 18, 21, 24],
    [3, 6, 9, 12],
    [127, 124, 121, 118],
    [115, 112, 109, 106],
    [103, 100, 98, 95],
    [92, 89, 87, 84],
];

#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector {
    pub values: CVector,
    pub angle_deg: f64,
}

impl SteeringVector {
    pub fn into_inner(self) -> CVector {
        self.values
    }
}

/// Unit-norm steering vector of an `n`-element half-wavelength ULA.
pub fn steering_vector(phi_deg: f64, n: usize) -> SteeringVector {
    SteeringVector {
        values: steering(phi_deg, n),
        angle_deg: phi_deg,
    }
}

/// Same as [`steering_vector`] without the wrapper.
pub fn steering(phi_deg: f64, n: usize) -> CVector {
    let mut v = CVector::zeros(n);
    fill_steering(phi_deg, v.as_mut_slice());
    v
}

pub(crate) fn fill_steering(phi_deg: f64, out: &mut [Complex64]) {
    let n = out.len();
    let amp = 1.0 / (n as f64).sqrt();
    let step = PI * phi_deg.to_radians().sin();
    for (m, z) in out.iter_mut().enumerate() {
        *z = Complex64::from_polar(amp, step * m as f64);
    }
}

/// Column `index` (1-based) of the unitary `n`-point DFT matrix.
pub fn dft_column(index: usize, n: usize) -> Result<CVector> {
    if index == 0 || index > n {
        return Err(Error::IndexOutOfRange { index, len: n });
    }
    let amp = 1.0 / (n as f64).sqrt();
    Ok(CVector::from_fn(n, |m, _| {
        // Reduce the integer product first to keep the phase argument small.
        let e = ((m * (index - 1)) % n) as f64;
        Complex64::from_polar(amp, -2.0 * PI * e / n as f64)
    }))
}

/// Angle in degrees whose steering vector equals DFT column `index`.
///
/// The spatial frequency `-2(index-1)/n` is wrapped into `[-1, 1)`.
pub fn beam_angle(index: usize, n: usize) -> f64 {
    assert!(
        index >= 1 && index <= n,
        "beam index {index} out of 1..={n}"
    );
    let s = -2.0 * (index - 1) as f64 / n as f64;
    let wrapped = (s + 1.0).rem_euclid(2.0) - 1.0;
    wrapped.asin().to_degrees()
}

/// Sector containing `theta_deg`, or `None` outside [-45°, 45°].
/// Boundaries belong to the upper sector except at +45°.
pub fn sector_of(theta_deg: f64) -> Option<usize> {
    if !(SECTOR_LOW_DEG..=SECTOR_HIGH_DEG).contains(&theta_deg) {
        return None;
    }
    let idx = ((theta_deg - SECTOR_LOW_DEG) / SECTOR_WIDTH_DEG).floor() as usize;
    Some(idx.min(SECTOR_COUNT - 1))
}

pub fn sector_bounds(sector: usize) -> (f64, f64) {
    let lo = SECTOR_LOW_DEG + sector as f64 * SECTOR_WIDTH_DEG;
    (lo, lo + SECTOR_WIDTH_DEG)
}

/// Beams used for each angle sector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorPlan {
    pub n_sectors: usize,
    pub n_antennas: usize,
    pub beams_per_sector: usize,
    pub sector_bounds: Vec<(f64, f64)>,
    /// 1-based DFT column indices; each list runs monotonically in angle.
    pub beam_indices: Vec<Vec<usize>>,
    pub beam_angles: Vec<Vec<f64>>,
    /// Beams kept for angular-spread estimation, `N_sec,2`.
    pub as_beam_count: usize,
}

pub fn sector_plan(beams_per_sector: usize, n: usize) -> Result<SectorPlan> {
    if n != TABLE_ANTENNAS {
        return Err(Error::InvalidArgument(format!(
            "sector plan is defined for N = {TABLE_ANTENNAS}, got N = {n}"
        )));
    }
    let (beam_indices, as_beam_count): (Vec<Vec<usize>>, usize) = match beams_per_sector {
        8 => (BEAMS_8.iter().map(|r| r.to_vec()).collect(), 5),
        4 => (BEAMS_4.iter().map(|r| r.to_vec()).collect(), 4),
        other => {
            return Err(Error::InvalidArgument(format!(
                "unsupported beams per sector {other} (expected 4 or 8)"
            )))
        }
    };
    let beam_angles = beam_indices
        .iter()
        .map(|row| row.iter().map(|&i| beam_angle(i, n)).collect())
        .collect();
    Ok(SectorPlan {
        n_sectors: SECTOR_COUNT,
        n_antennas: n,
        beams_per_sector,
        sector_bounds: (0..SECTOR_COUNT).map(sector_bounds).collect(),
        beam_indices,
        beam_angles,
        as_beam_count,
    })
}

impl SectorPlan {
    pub fn beams(&self, sector: usize) -> BeamMatrix {
        BeamMatrix::from_dft_indices(&self.beam_indices[sector], self.n_antennas)
            .expect("table indices are in range")
    }

    pub fn all_beams(&self) -> Vec<BeamMatrix> {
        (0..self.n_sectors).map(|s| self.beams(s)).collect()
    }

    pub fn bounds(&self, sector: usize) -> (f64, f64) {
        self.sector_bounds[sector]
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Selected DFT columns `U(Φ)` stacked as an `N × P` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamMatrix {
    pub values: CMatrix,
    pub indices: Vec<usize>,
}

impl BeamMatrix {
    pub fn from_dft_indices(indices: &[usize], n: usize) -> Result<Self> {
        let cols = indices
            .iter()
            .map(|&i| dft_column(i, n))
            .collect::<Result<Vec<_>>>()?;
        let values = if cols.is_empty() {
            CMatrix::zeros(n, 0)
        } else {
            CMatrix::from_columns(&cols)
        };
        Ok(Self {
            values,
            indices: indices.to_vec(),
        })
    }

    pub fn n_antennas(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_beams(&self) -> usize {
        self.values.ncols()
    }
}

/// Beamspace projection `b = U^H y`.
pub fn project(y: &CVector, beams: &BeamMatrix) -> Result<CVector> {
    if y.len() != beams.n_antennas() {
        return Err(Error::dim(format!(
            "project: vector length {} vs {} antennas",
            y.len(),
            beams.n_antennas()
        )));
    }
    Ok(beams.values.ad_mul(y))
}

/// Low-rank reconstruction `h̃ = U d`.
pub fn reconstruct(d: &CVector, beams: &BeamMatrix) -> Result<CVector> {
    if d.len() != beams.n_beams() {
        return Err(Error::dim(format!(
            "reconstruct: vector length {} vs {} beams",
            d.len(),
            beams.n_beams()
        )));
    }
    Ok(&beams.values * d)
}

/// Uniform angle grid from `lo` to `hi` inclusive.
pub fn uniform_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    assert!(step > 0.0 && hi >= lo);
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    (0..count).map(|i| lo + i as f64 * step).collect()
}

/// Steering vectors of an angle grid, precomputed for scanning.
#[derive(Debug, Clone)]
pub struct SteeringGrid {
    pub angles: Vec<f64>,
    /// `N × G`, column `g` is `u(angles[g])`.
    pub table: CMatrix,
}

impl SteeringGrid {
    pub fn new(angles: Vec<f64>, n: usize) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::Empty("angle grid"));
        }
        let mut table = CMatrix::zeros(n, angles.len());
        for (g, &a) in angles.iter().enumerate() {
            fill_steering(a, table.column_mut(g).as_mut_slice());
        }
        Ok(Self { angles, table })
    }

    pub fn uniform(lo: f64, hi: f64, step: f64, n: usize) -> Result<Self> {
        Self::new(uniform_grid(lo, hi, step), n)
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn n_antennas(&self) -> usize {
        self.table.nrows()
    }

    /// `|u(θ_g)^H x|²` for every grid angle.
    pub fn response_power(&self, x: &CVector) -> DVector<f64> {
        self.table.ad_mul(x).map(|z| z.norm_sqr())
    }
}
