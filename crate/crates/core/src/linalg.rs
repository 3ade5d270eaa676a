//! Complex linear-algebra helpers shared by the signal-processing modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CVector = DVector<Complex64>;
pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Eigen-decomposition of a Hermitian matrix with eigenvalues sorted in
/// descending order; column `i` of `vectors` belongs to `values[i]`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

pub fn hermitian_eigen(m: &CMatrix) -> HermitianEigen {
    let n = m.nrows();
    // Symmetrize so rounding noise in the lower triangle cannot leak in.
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    HermitianEigen { values, vectors }
}

/// Draws a vector of i.i.d. circular complex Gaussians with the given
/// per-entry variance.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, len: usize, variance: f64) -> CVector {
    let s = (variance / 2.0).sqrt();
    CVector::from_fn(len, |_, _| cn_sample(rng, s))
}

#[inline]
pub(crate) fn cn_sample<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(scale * re, scale * im)
}

/// `x^H y`.
#[inline]
pub fn inner(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn relative_frobenius(a: &CMatrix, reference: &CMatrix) -> f64 {
    frobenius(&(a - reference)) / frobenius(reference)
}

/// Largest entrywise deviation from Hermitian symmetry.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Sample covariance `(1/M) Σ x x^H` of a set of equal-length vectors.
pub fn sample_covariance(samples: &[CVector]) -> CMatrix {
    let n = samples.first().map_or(0, |s| s.len());
    let mut acc = CMatrix::zeros(n, n);
    for s in samples {
        acc.gerc(Complex64::new(1.0, 0.0), s, s, Complex64::new(1.0, 0.0));
    }
    acc.unscale_mut(samples.len().max(1) as f64);
    acc
}

pub fn real_matrix_to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn eigen_sorted_descending_and_reconstructs() {
        let mut r = rng::seeded(1);
        let g = CMatrix::from_fn(6, 3, |_, _| cn_sample(&mut r, 1.0));
        let m = &g * g.adjoint();
        let e = hermitian_eigen(&m);
        assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        let d = CMatrix::from_diagonal(&CVector::from_iterator(
            6,
            e.values.iter().map(|&v| Complex64::new(v, 0.0)),
        ));
        let back = &e.vectors * d * e.vectors.adjoint();
        assert!(relative_frobenius(&back, &m) < 1e-12);
        // rank 3
        assert!(e.values[3].abs() < 1e-10 * e.values[0]);
    }

    #[test]
    fn complex_gaussian_variance() {
        let mut r = rng::seeded(2);
        let v = complex_gaussian(&mut r, 200_000, 2.0);
        let p = v.iter().map(|z| z.norm_sqr()).sum::<f64>() / v.len() as f64;
        assert!((p - 2.0).abs() < 0.03, "{p}");
    }

    #[test]
    fn sample_covariance_of_single_vector_is_outer_product() {
        let x = CVector::from_vec(vec![Complex64::new(1.0, 1.0), Complex64::new(0.0, 2.0)]);
        let c = sample_covariance(std::slice::from_ref(&x));
        assert!((c[(0, 1)] - x[0] * x[1].conj()).norm() < 1e-15);
        assert!(hermitian_defect(&c) < 1e-15);
    }
}
