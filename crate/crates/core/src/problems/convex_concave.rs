use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Payload of
/// `f(θ, φ) = (θᵀA₂θ)² + 2θᵀA₁θ + 4θᵀMφ − 2φᵀB₁φ − (φᵀB₂φ)²`.
///
/// The field is
/// `V = (4(θᵀA₂θ)A₂θ + 4A₁θ + 4Mφ, −4Mᵀθ + 4B₁φ + 4(φᵀB₂φ)B₂φ)`.
#[derive(Clone, Debug)]
pub struct ConvexConcavePayload {
    pub a1: DMatrix<f64>,
    pub a2: DMatrix<f64>,
    pub b1: DMatrix<f64>,
    pub b2: DMatrix<f64>,
    pub coupling: DMatrix<f64>,
}

impl ConvexConcavePayload {
    pub fn new(
        a1: DMatrix<f64>,
        a2: DMatrix<f64>,
        b1: DMatrix<f64>,
        b2: DMatrix<f64>,
        coupling: DMatrix<f64>,
    ) -> Result<Self> {
        let k = a1.nrows();
        for (name, m) in [("a1", &a1), ("a2", &a2), ("b1", &b1), ("b2", &b2), ("coupling", &coupling)] {
            if m.shape() != (k, k) {
                return Err(Error::Config(format!("{name} must be {k}x{k}, got {:?}", m.shape())));
            }
        }
        for (name, m) in [("a1", &a1), ("a2", &a2), ("b1", &b1), ("b2", &b2)] {
            if (m - m.transpose()).abs().max() > 1e-12 {
                return Err(Error::Config(format!("{name} must be symmetric")));
            }
        }
        Ok(Self { a1, a2, b1, b2, coupling })
    }

    pub fn dim_half(&self) -> usize {
        self.a1.nrows()
    }

    pub fn field(&self, x: &DVector<f64>) -> DVector<f64> {
        let k = self.dim_half();
        let theta = x.rows(0, k);
        let phi = x.rows(k, k);
        let a2t = &self.a2 * theta;
        let b2p = &self.b2 * phi;
        let qa = theta.dot(&a2t);
        let qb = phi.dot(&b2p);

        let mut out = DVector::zeros(2 * k);
        let mut top = out.rows_mut(0, k);
        top.gemv(4.0, &self.a1, &theta, 0.0);
        top.gemv(4.0, &self.coupling, &phi, 1.0);
        top.axpy(4.0 * qa, &a2t, 1.0);
        let mut bottom = out.rows_mut(k, k);
        bottom.gemv(4.0, &self.b1, &phi, 0.0);
        bottom.gemv_tr(-4.0, &self.coupling, &theta, 1.0);
        bottom.axpy(4.0 * qb, &b2p, 1.0);
        out
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        let k = self.dim_half();
        let theta = x.rows(0, k);
        let phi = x.rows(k, k);
        let qa2 = theta.dot(&(&self.a2 * theta));
        let qa1 = theta.dot(&(&self.a1 * theta));
        let bil = theta.dot(&(&self.coupling * phi));
        let qb1 = phi.dot(&(&self.b1 * phi));
        let qb2 = phi.dot(&(&self.b2 * phi));
        qa2 * qa2 + 2.0 * qa1 + 4.0 * bil - 2.0 * qb1 - qb2 * qb2
    }

    /// Strong-monotonicity modulus `4·min(λ_min(A₁), λ_min(B₁))`.
    ///
    /// The quartic terms are gradients of convex functions and the coupling is
    /// skew, so neither lowers the modulus of the quadratic part.
    pub fn monotonicity_modulus(&self) -> f64 {
        let la = min_eigenvalue(&self.a1);
        let lb = min_eigenvalue(&self.b1);
        4.0 * la.min(lb)
    }

    /// Bound on `‖J_V‖` over the ball `‖x‖ ≤ radius`:
    /// `max(4λ(A₁) + 12λ(A₂)²R², 4λ(B₁) + 12λ(B₂)²R²) + 4‖M‖`.
    pub fn lipschitz_on_ball(&self, radius: f64) -> f64 {
        let r2 = radius * radius;
        let ha = 4.0 * max_eigenvalue(&self.a1) + 12.0 * max_eigenvalue(&self.a2).powi(2) * r2;
        let hb = 4.0 * max_eigenvalue(&self.b1) + 12.0 * max_eigenvalue(&self.b2).powi(2) * r2;
        let m = self.coupling.singular_values().max();
        ha.max(hb) + 4.0 * m
    }
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigen().eigenvalues.min()
}

fn max_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigen().eigenvalues.max()
}
