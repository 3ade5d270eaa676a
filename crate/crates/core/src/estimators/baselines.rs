use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::array::{BeamMatrix, SteeringGrid};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};

use super::{median, TapObservation};

fn stack(snapshots: &[CVector], n: usize) -> Result<CMatrix> {
    if snapshots.is_empty() {
        return Err(Error::Empty("snapshots"));
    }
    if let Some(s) = snapshots.iter().find(|s| s.len() != n) {
        return Err(Error::dim(format!(
            "snapshot length {} vs grid array size {n}",
            s.len()
        )));
    }
    Ok(CMatrix::from_columns(snapshots))
}

/// Index of the best value; on ties the smaller angle wins.
fn best_index(values: &[f64], angles: &[f64], better: impl Fn(f64, f64) -> bool) -> usize {
    let mut best = 0;
    for g in 1..values.len() {
        if better(values[g], values[best])
            || (values[g] == values[best] && angles[g] < angles[best])
        {
            best = g;
        }
    }
    best
}

/// Orthonormal basis of the `m` dominant eigenvectors of `(1/T_r) H H^H`.
///
/// With fewer snapshots than antennas the basis is lifted from the
/// eigenvectors of the `T_r × T_r` Gram matrix `H^H H`.
fn signal_subspace(h: &CMatrix, m: usize) -> Result<CMatrix> {
    let (n, tr) = h.shape();
    if h.iter().all(|z| *z == linalg::ZERO) {
        return Err(Error::Degenerate("all snapshots are zero".into()));
    }
    if tr < n {
        let gram = h.ad_mul(h);
        let eig = linalg::hermitian_eigen(&gram);
        let floor = eig.values[0] * 1e-12;
        if m <= tr && eig.values[m - 1] > floor {
            let mut e = CMatrix::zeros(n, m);
            for i in 0..m {
                let v = eig.vectors.column(i);
                let mut col = h * v;
                col.unscale_mut(eig.values[i].sqrt());
                e.set_column(i, &col);
            }
            return Ok(e);
        }
    }
    let r = h * h.adjoint();
    let eig = linalg::hermitian_eigen(&r);
    Ok(eig.vectors.columns(0, m).into_owned())
}

fn music_select(cost: &[f64], angles: &[f64], m: usize) -> Vec<f64> {
    if m == 1 {
        return vec![angles[best_index(cost, angles, |a, b| a < b)]];
    }
    let mut order: Vec<usize> = (0..angles.len()).collect();
    order.sort_by(|&a, &b| angles[a].total_cmp(&angles[b]));
    let g = order.len();
    let mut minima: Vec<usize> = (0..g)
        .filter(|&k| {
            let c = cost[order[k]];
            (k == 0 || c <= cost[order[k - 1]]) && (k + 1 == g || c <= cost[order[k + 1]])
        })
        .map(|k| order[k])
        .collect();
    minima.sort_by(|&a, &b| {
        cost[a]
            .total_cmp(&cost[b])
            .then(angles[a].total_cmp(&angles[b]))
    });
    let mut picked: Vec<usize> = minima.into_iter().take(m).collect();
    if picked.len() < m {
        let mut rest: Vec<usize> = (0..g).filter(|i| !picked.contains(i)).collect();
        rest.sort_by(|&a, &b| {
            cost[a]
                .total_cmp(&cost[b])
                .then(angles[a].total_cmp(&angles[b]))
        });
        picked.extend(rest.into_iter().take(m - picked.len()));
    }
    let mut out: Vec<f64> = picked.into_iter().map(|i| angles[i]).collect();
    out.sort_by(f64::total_cmp);
    out
}

/// MUSIC pseudo-spectrum search for `m` sources.
///
/// The noise-subspace cost `||V^H u(θ)||²` is evaluated as
/// `1 − ||E^H u(θ)||²` with `E` the signal subspace. For `m = 1` the global
/// minimum is returned; otherwise the `m` deepest local minima, sorted by
/// angle.
pub fn music(snapshots: &[CVector], grid: &SteeringGrid, m: usize) -> Result<Vec<f64>> {
    check_music_args(grid, m)?;
    let h = stack(snapshots, grid.n_antennas())?;
    if m >= grid.n_antennas() {
        return Err(Error::InvalidArgument(format!(
            "source count {m} leaves no noise subspace"
        )));
    }
    let e = signal_subspace(&h, m)?;
    let proj = e.ad_mul(&grid.table);
    let cost: Vec<f64> = proj
        .column_iter()
        .map(|c| 1.0 - c.iter().map(|z| z.norm_sqr()).sum::<f64>())
        .collect();
    Ok(music_select(&cost, &grid.angles, m))
}

/// MUSIC through a full eigendecomposition of the sample covariance and an
/// explicit noise subspace.
pub fn music_reference(snapshots: &[CVector], grid: &SteeringGrid, m: usize) -> Result<Vec<f64>> {
    check_music_args(grid, m)?;
    let h = stack(snapshots, grid.n_antennas())?;
    if h.iter().all(|z| *z == linalg::ZERO) {
        return Err(Error::Degenerate("all snapshots are zero".into()));
    }
    let n = h.nrows();
    let r = (&h * h.adjoint()).unscale(h.ncols() as f64);
    let eig = linalg::hermitian_eigen(&r);
    let noise = eig.vectors.columns(m, n - m);
    let proj = noise.ad_mul(&grid.table);
    let cost: Vec<f64> = proj
        .column_iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>())
        .collect();
    Ok(music_select(&cost, &grid.angles, m))
}

fn check_music_args(grid: &SteeringGrid, m: usize) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Empty("angle grid"));
    }
    if m == 0 {
        return Err(Error::InvalidArgument(
            "source count must be positive".into(),
        ));
    }
    Ok(())
}

/// `h̃_r = U d_r` for every realization.
pub fn reconstruct_snapshots(obs: &TapObservation, beams: &BeamMatrix) -> Result<Vec<CVector>> {
    obs.beamspace
        .iter()
        .map(|d| crate::array::reconstruct(d, beams))
        .collect()
}

/// MUSIC on beamspace reconstructions; pass the sector's grid.
pub fn music_hbf(obs: &TapObservation, beams: &BeamMatrix, grid: &SteeringGrid) -> Result<f64> {
    let snaps = reconstruct_snapshots(obs, beams)?;
    Ok(music(&snaps, grid, 1)?[0])
}

/// Per-snapshot argmax of `|ĥ^H u(θ)|` over the grid, then the median.
pub fn maxbeam(snapshots: &[CVector], grid: &SteeringGrid) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::Empty("angle grid"));
    }
    let h = stack(snapshots, grid.n_antennas())?;
    let resp: DMatrix<Complex64> = grid.table.ad_mul(&h);
    let mut picks = Vec::with_capacity(h.ncols());
    let mut power = vec![0.0; grid.len()];
    for col in resp.column_iter() {
        for (p, z) in power.iter_mut().zip(col.iter()) {
            *p = z.norm_sqr();
        }
        picks.push(grid.angles[best_index(&power, &grid.angles, |a, b| a > b)]);
    }
    median(&picks)
}

/// MaxBeam on beamspace reconstructions; pass the sector's grid.
pub fn maxbeam_hbf(obs: &TapObservation, beams: &BeamMatrix, grid: &SteeringGrid) -> Result<f64> {
    maxbeam(&reconstruct_snapshots(obs, beams)?, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::{sector_plan, steering};
    use crate::ccm::{ccm_default, sample_channel};
    use crate::rng;

    fn grid(lo: f64, hi: f64, n: usize) -> SteeringGrid {
        SteeringGrid::uniform(lo, hi, 0.05, n).unwrap()
    }

    #[test]
    fn noiseless_point_source_is_exact() {
        let g = grid(-10.0, 10.0, 64);
        let theta = g.angles[117];
        let u = steering(theta, 64);
        let snaps: Vec<_> = (0..4)
            .map(|k| u.scale(1.0 + k as f64) * Complex64::from_polar(1.0, k as f64))
            .collect();
        assert_eq!(music(&snaps, &g, 1).unwrap(), vec![theta]);
        assert_eq!(music_reference(&snaps, &g, 1).unwrap(), vec![theta]);
        assert_eq!(maxbeam(&snaps, &g).unwrap(), theta);
    }

    #[test]
    fn scaling_snapshots_changes_nothing() {
        let mut r = rng::seeded(1);
        let c = ccm_default(3.0, 2.0, 10.0, 32).unwrap();
        let snaps: Vec<_> = (0..6)
            .map(|_| sample_channel(&c, &mut r) + linalg::complex_gaussian(&mut r, 32, 1.0))
            .collect();
        let g = grid(-20.0, 20.0, 32);
        let k = Complex64::new(-0.3, 2.0);
        let scaled: Vec<_> = snaps.iter().map(|s| s * k).collect();
        assert_eq!(
            music(&snaps, &g, 1).unwrap(),
            music(&scaled, &g, 1).unwrap()
        );
        assert_eq!(maxbeam(&snaps, &g).unwrap(), maxbeam(&scaled, &g).unwrap());
    }

    #[test]
    fn fast_and_reference_music_agree() {
        let mut r = rng::seeded(2);
        let g = grid(-45.0, 45.0, 32);
        for trial in 0..20 {
            let theta = -40.0 + 4.0 * trial as f64;
            let c = ccm_default(theta, 1.5, 100.0, 32).unwrap();
            let snaps: Vec<_> = (0..5)
                .map(|_| sample_channel(&c, &mut r) + linalg::complex_gaussian(&mut r, 32, 1.0))
                .collect();
            assert_eq!(
                music(&snaps, &g, 1).unwrap(),
                music_reference(&snaps, &g, 1).unwrap()
            );
        }
    }

    #[test]
    fn two_sources_resolved() {
        let g = grid(-30.0, 30.0, 32);
        let a = g.angles[200];
        let b = g.angles[900];
        let ua = steering(a, 32);
        let ub = steering(b, 32);
        let snaps: Vec<_> = (0..6)
            .map(|k| {
                &ua * Complex64::from_polar(1.0, 0.7 * k as f64)
                    + &ub * Complex64::from_polar(0.8, -1.3 * k as f64)
            })
            .collect();
        assert_eq!(music(&snaps, &g, 2).unwrap(), vec![a, b]);
        assert_eq!(music_reference(&snaps, &g, 2).unwrap(), vec![a, b]);
    }

    #[test]
    fn degenerate_input_rejected() {
        let g = grid(-1.0, 1.0, 8);
        assert!(matches!(
            music(&[CVector::zeros(8)], &g, 1),
            Err(Error::Degenerate(_))
        ));
        assert!(music(&[], &g, 1).is_err());
        assert!(music(&[CVector::zeros(4)], &g, 1).is_err());
        assert!(music(&[steering(0.0, 8)], &g, 0).is_err());
    }

    #[test]
    fn hbf_exact_on_selected_beam() {
        let plan = sector_plan(8, 128).unwrap();
        let s = 5;
        let beams = plan.beams(s);
        let (lo, hi) = plan.bounds(s);
        let g = grid(lo, hi, 128);
        let theta = plan.beam_angles[s][3];
        let h = steering(theta, 128);
        let obs = TapObservation {
            beamspace: (0..3).map(|_| beams.values.ad_mul(&h)).collect(),
            full: None,
            sector_id: s,
            true_params: None,
        };
        assert!((music_hbf(&obs, &beams, &g).unwrap() - theta).abs() <= 0.025 + 1e-9);
        assert!((maxbeam_hbf(&obs, &beams, &g).unwrap() - theta).abs() <= 0.025 + 1e-9);
    }

    #[test]
    fn hbf_equals_dbf_on_projected_snapshots() {
        let plan = sector_plan(8, 128).unwrap();
        let beams = plan.beams(2);
        let g = grid(-22.5, -11.25, 128);
        let mut r = rng::seeded(3);
        let c = ccm_default(-17.0, 2.5, 1.0, 128).unwrap();
        let full: Vec<_> = (0..5).map(|_| sample_channel(&c, &mut r)).collect();
        let obs = TapObservation {
            beamspace: full.iter().map(|h| beams.values.ad_mul(h)).collect(),
            full: Some(full.clone()),
            sector_id: 2,
            true_params: None,
        };
        let projector = &beams.values * beams.values.adjoint();
        let projected: Vec<_> = full.iter().map(|h| &projector * h).collect();
        assert_eq!(
            maxbeam_hbf(&obs, &beams, &g).unwrap(),
            maxbeam(&projected, &g).unwrap()
        );
    }

    #[test]
    fn ties_resolve_to_smaller_angle() {
        assert_eq!(
            best_index(&[1.0, 3.0, 3.0], &[0.0, 2.0, 1.0], |a, b| a > b),
            2
        );
        assert_eq!(
            music_select(&[0.5, 0.1, 0.1], &[0.0, 2.0, 1.0], 1),
            vec![1.0]
        );
    }
}
