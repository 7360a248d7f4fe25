//! Linear-quadratic Gaussian GAN.
//!
//! Generator `G(w) = Ww`, discriminator `D(x) = xᵀAx`, data `x ~ N(0, Σ)`,
//! latent `w ~ N(0, I)`. The value is
//! `f(W, A) = E[xᵀAx] − E[wᵀWᵀAWw] = tr(A(Σ − WWᵀ))`, so
//! `∇_W f = −(A + Aᵀ)W` and `∇_A f = Σ − WWᵀ`.
//! The iterate is `vec(W) ‖ vec(A)`, both row-major.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct GaussianGanPayload {
    dim: usize,
    covariance: DMatrix<f64>,
    cholesky: DMatrix<f64>,
    batch_size: usize,
}

impl GaussianGanPayload {
    pub fn new(covariance: DMatrix<f64>, batch_size: usize) -> Result<Self> {
        let dim = covariance.nrows();
        if dim == 0 || !covariance.is_square() {
            return Err(Error::Config("covariance must be a non-empty square matrix".into()));
        }
        if batch_size == 0 {
            return Err(Error::Config("batch size must be positive".into()));
        }
        if (&covariance - covariance.transpose()).abs().max() > 1e-12 {
            return Err(Error::Config("covariance must be symmetric".into()));
        }
        let cholesky = covariance
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Config("covariance is not positive definite".into()))?
            .l();
        Ok(Self {
            dim,
            covariance,
            cholesky,
            batch_size,
        })
    }

    /// Side length of `W` and `A` (latent and data dimension).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    pub fn iterate_len(&self) -> usize {
        2 * self.dim * self.dim
    }

    /// Splits an iterate into `(W, A)`.
    pub fn unpack(&self, x: &DVector<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
        let k = self.dim * self.dim;
        let w = DMatrix::from_row_slice(self.dim, self.dim, &x.as_slice()[..k]);
        let a = DMatrix::from_row_slice(self.dim, self.dim, &x.as_slice()[k..]);
        (w, a)
    }

    pub fn pack(&self, w: &DMatrix<f64>, a: &DMatrix<f64>) -> DVector<f64> {
        let mut out = Vec::with_capacity(self.iterate_len());
        for m in [w, a] {
            for i in 0..self.dim {
                for j in 0..self.dim {
                    out.push(m[(i, j)]);
                }
            }
        }
        DVector::from_vec(out)
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        let (w, a) = self.unpack(x);
        let gap = &self.covariance - &w * w.transpose();
        (a * gap).trace()
    }

    pub fn field(&self, x: &DVector<f64>) -> DVector<f64> {
        let (w, a) = self.unpack(x);
        let grad_w = -((&a + a.transpose()) * &w);
        let neg_grad_a = &w * w.transpose() - &self.covariance;
        self.pack(&grad_w, &neg_grad_a)
    }

    /// Unbiased minibatch field: the expectations over `x` and `w` are
    /// replaced by empirical second moments of `batch_size` fresh draws.
    pub fn minibatch_field<R: Rng + ?Sized>(&self, x: &DVector<f64>, rng: &mut R) -> DVector<f64> {
        let n = self.dim;
        let b = self.batch_size as f64;
        let mut sx = DMatrix::<f64>::zeros(n, n);
        let mut sw = DMatrix::<f64>::zeros(n, n);
        let mut z = DVector::<f64>::zeros(n);
        for _ in 0..self.batch_size {
            z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
            let data = &self.cholesky * &z;
            sx.ger(1.0 / b, &data, &data, 1.0);
            z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
            sw.ger(1.0 / b, &z, &z, 1.0);
        }
        let (w, a) = self.unpack(x);
        let grad_w = -((&a + a.transpose()) * &w * &sw);
        let neg_grad_a = &w * sw * w.transpose() - sx;
        self.pack(&grad_w, &neg_grad_a)
    }

    /// Bound on `‖J_V‖` over `‖x‖ ≤ radius`.
    ///
    /// With `‖W‖, ‖A‖ ≤ R` the Jacobian blocks are bounded by
    /// `[[2R, 2R], [2R, 0]]`, whose norm is `(1 + √5)R`.
    pub fn lipschitz_on_ball(radius: f64) -> f64 {
        (1.0 + 5f64.sqrt()) * radius
    }
}
