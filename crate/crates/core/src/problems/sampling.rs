//! Random matrix laws used to build problem instances.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{StandardNormal, Uniform};

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, scale: f64, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the signs
/// of `R`'s diagonal folded into `Q`.
pub fn haar_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let g = gaussian_matrix(n, n, 1.0, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

fn uniform_values<R: Rng + ?Sized>(n: usize, low: f64, high: f64, rng: &mut R) -> DVector<f64> {
    if low == high {
        return DVector::from_element(n, low);
    }
    let dist = Uniform::new_inclusive(low, high).expect("valid uniform bounds");
    DVector::from_fn(n, |_, _| rng.sample(dist))
}

/// Symmetric positive-definite `Q diag(λ) Qᵀ` with eigenvalues uniform in `[low, high]`.
pub fn spd_matrix<R: Rng + ?Sized>(n: usize, low: f64, high: f64, rng: &mut R) -> DMatrix<f64> {
    let q = haar_orthogonal(n, rng);
    let eig = uniform_values(n, low, high, rng);
    let m = &q * DMatrix::from_diagonal(&eig) * q.transpose();
    symmetrize(m)
}

/// `U diag(s) Vᵀ` with singular values uniform in `[low, high]`.
pub fn spectral_matrix<R: Rng + ?Sized>(n: usize, low: f64, high: f64, rng: &mut R) -> DMatrix<f64> {
    let u = haar_orthogonal(n, rng);
    let v = haar_orthogonal(n, rng);
    let s = uniform_values(n, low, high, rng);
    u * DMatrix::from_diagonal(&s) * v.transpose()
}

pub fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// Singular values in decreasing order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Relative threshold below which a singular value counts as zero.
pub fn rank_tolerance(m: &DMatrix<f64>, largest: f64) -> f64 {
    largest.max(f64::MIN_POSITIVE) * (m.nrows().max(m.ncols()) as f64) * 1e-12
}

pub fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

pub fn from_row_major(rows: usize, cols: usize, data: &[f64]) -> Option<DMatrix<f64>> {
    (data.len() == rows * cols).then(|| DMatrix::from_row_slice(rows, cols, data))
}
