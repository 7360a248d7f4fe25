use nalgebra::{DMatrix, DVector};

use super::sampling::{rank_tolerance, singular_values};
use crate::error::{Error, Result};

/// Affine field `x ↦ Mx + v`.
///
/// Bilinear games keep their `d₁ × d₂` coupling block so the field can be
/// evaluated without touching the zero diagonal blocks of `M`.
#[derive(Clone, Debug)]
pub struct AffinePayload {
    matrix: DMatrix<f64>,
    offset: DVector<f64>,
    pinv: DMatrix<f64>,
    coupling: Option<DMatrix<f64>>,
    largest_sv: f64,
    smallest_nonzero_sv: f64,
}

impl AffinePayload {
    pub fn new(matrix: DMatrix<f64>, offset: DVector<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Config(format!(
                "affine matrix must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if offset.len() != matrix.nrows() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                got: offset.len(),
            });
        }
        let sv = singular_values(&matrix);
        let largest = sv.first().copied().unwrap_or(0.0);
        let tol = rank_tolerance(&matrix, largest);
        let smallest_nonzero = sv.iter().rev().copied().find(|&s| s > tol).unwrap_or(0.0);
        let pinv = matrix
            .clone()
            .pseudo_inverse(tol)
            .map_err(|e| Error::Config(format!("pseudo-inverse failed: {e}")))?;

        // X* = {x : Mx + v = 0} is empty unless v lies in range(M).
        let consistency = &matrix * (&pinv * &offset) - &offset;
        let scale = 1.0 + offset.norm();
        if consistency.norm() > 1e-9 * scale {
            return Err(Error::Config(
                "offset is not in the range of the matrix; the solution set would be empty".into(),
            ));
        }
        Ok(Self {
            matrix,
            offset,
            pinv,
            coupling: None,
            largest_sv: largest,
            smallest_nonzero_sv: smallest_nonzero,
        })
    }

    /// Bilinear game `f(θ, φ) = θᵀBφ` with field `(Bφ, −Bᵀθ)`.
    pub fn bilinear(coupling: DMatrix<f64>) -> Result<Self> {
        let (p, q) = coupling.shape();
        let d = p + q;
        let mut full = DMatrix::zeros(d, d);
        full.view_mut((0, p), (p, q)).copy_from(&coupling);
        full.view_mut((p, 0), (q, p)).copy_from(&(-coupling.transpose()));
        let mut payload = Self::new(full, DVector::zeros(d))?;
        payload.coupling = Some(coupling);
        Ok(payload)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn offset(&self) -> &DVector<f64> {
        &self.offset
    }

    pub fn coupling(&self) -> Option<&DMatrix<f64>> {
        self.coupling.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn largest_singular_value(&self) -> f64 {
        self.largest_sv
    }

    pub fn smallest_nonzero_singular_value(&self) -> f64 {
        self.smallest_nonzero_sv
    }

    pub fn field(&self, x: &DVector<f64>) -> DVector<f64> {
        match &self.coupling {
            Some(b) => {
                let p = b.nrows();
                let theta = x.rows(0, p);
                let phi = x.rows(p, b.ncols());
                let mut out = DVector::zeros(x.len());
                out.rows_mut(0, p).gemv(1.0, b, &phi, 0.0);
                out.rows_mut(p, b.ncols()).gemv_tr(-1.0, b, &theta, 0.0);
                out
            }
            None => &self.matrix * x + &self.offset,
        }
    }

    /// Displacement from `x` to its projection on the solution subspace:
    /// `M⁺(Mx + v)` is the component of `x − x₀` orthogonal to `ker M`.
    pub fn solution_offset(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.pinv * self.field(x)
    }

    /// `f(θ, φ) = θᵀBφ` for bilinear payloads.
    pub fn bilinear_value(&self, x: &DVector<f64>) -> Option<f64> {
        let b = self.coupling.as_ref()?;
        let p = b.nrows();
        let theta = x.rows(0, p);
        let phi = x.rows(p, b.ncols());
        Some(theta.dot(&(b * phi)))
    }
}
