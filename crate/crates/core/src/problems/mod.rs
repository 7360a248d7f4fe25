//! Benchmark problems: vector fields with known solution geometry.
//!
//! Every instance carries a Lipschitz constant `L` and an error-bound
//! constant `τ` (`0` when unknown). For affine fields `L` is the largest and
//! `τ` the smallest non-zero singular value of the matrix. The
//! strongly convex-concave and GAN fields are only locally Lipschitz; their
//! `L` is valid on the ball of radius [`ProblemInstance::lipschitz_radius`].

mod affine;
mod convex_concave;
mod gan;
pub mod sampling;

pub use affine::AffinePayload;
pub use convex_concave::ConvexConcavePayload;
pub use gan::GaussianGanPayload;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use sampling::{from_row_major, gaussian_matrix, row_major, spd_matrix, spectral_matrix};

pub type Vector = DVector<f64>;

/// Radius on which the locally Lipschitz kinds report `L`.
pub const DEFAULT_LIPSCHITZ_RADIUS: f64 = 10.0;

/// Smallest singular value a sampled bilinear coupling must exceed.
pub const MIN_COUPLING_SINGULAR_VALUE: f64 = 1e-3;

const MAX_SAMPLING_ATTEMPTS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Planar,
    Affine,
    StronglyConvexConcave,
    GaussianGan,
}

impl std::fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ProblemKind::Planar => "planar",
            ProblemKind::Affine => "affine",
            ProblemKind::StronglyConvexConcave => "strongly_convex_concave",
            ProblemKind::GaussianGan => "gaussian_gan",
        })
    }
}

/// How the coupling matrix of a random bilinear game is drawn.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum BilinearLaw {
    /// i.i.d. `N(0, 1/k)` entries for a `k × k` block, resampled until the
    /// smallest singular value exceeds [`MIN_COUPLING_SINGULAR_VALUE`].
    Gaussian,
    /// `U diag(s) Vᵀ` with Haar `U`, `V` and `s` uniform in `[low, high]`.
    UniformSpectrum { low: f64, high: f64 },
}

#[derive(Clone, Debug)]
enum Payload {
    Planar(AffinePayload),
    Affine(AffinePayload),
    ConvexConcave(ConvexConcavePayload),
    Gan(GaussianGanPayload),
}

#[derive(Clone, Debug)]
pub struct ProblemInstance {
    payload: Payload,
    first_block: usize,
    lipschitz: f64,
    error_bound: f64,
    lipschitz_radius: Option<f64>,
}

impl ProblemInstance {
    pub fn kind(&self) -> ProblemKind {
        match self.payload {
            Payload::Planar(_) => ProblemKind::Planar,
            Payload::Affine(_) => ProblemKind::Affine,
            Payload::ConvexConcave(_) => ProblemKind::StronglyConvexConcave,
            Payload::Gan(_) => ProblemKind::GaussianGan,
        }
    }

    pub fn dim(&self) -> usize {
        match &self.payload {
            Payload::Planar(p) | Payload::Affine(p) => p.dim(),
            Payload::ConvexConcave(p) => 2 * p.dim_half(),
            Payload::Gan(p) => p.iterate_len(),
        }
    }

    /// Size of the minimizing player's block (`d₁`).
    pub fn first_block(&self) -> usize {
        self.first_block
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// Error-bound constant `τ`; `0` means unknown.
    pub fn error_bound(&self) -> f64 {
        self.error_bound
    }

    /// `None` when `L` holds globally.
    pub fn lipschitz_radius(&self) -> Option<f64> {
        self.lipschitz_radius
    }

    pub fn affine(&self) -> Option<&AffinePayload> {
        match &self.payload {
            Payload::Planar(p) | Payload::Affine(p) => Some(p),
            _ => None,
        }
    }

    pub fn convex_concave(&self) -> Option<&ConvexConcavePayload> {
        match &self.payload {
            Payload::ConvexConcave(p) => Some(p),
            _ => None,
        }
    }

    pub fn gan(&self) -> Option<&GaussianGanPayload> {
        match &self.payload {
            Payload::Gan(p) => Some(p),
            _ => None,
        }
    }

    /// The Jacobian when it does not depend on the point.
    pub fn constant_jacobian(&self) -> Option<&DMatrix<f64>> {
        self.affine().map(AffinePayload::matrix)
    }

    pub fn check_dim(&self, point: &Vector) -> Result<()> {
        if point.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: point.len(),
            });
        }
        Ok(())
    }

    /// Exact (expected) field `V(x)`.
    pub fn evaluate_field(&self, point: &Vector) -> Result<Vector> {
        self.check_dim(point)?;
        Ok(self.field_unchecked(point))
    }

    pub(crate) fn field_unchecked(&self, point: &Vector) -> Vector {
        match &self.payload {
            Payload::Planar(p) | Payload::Affine(p) => p.field(point),
            Payload::ConvexConcave(p) => p.field(point),
            Payload::Gan(p) => p.field(point),
        }
    }

    /// Value `f(θ, φ)` of the underlying saddle function, where one exists.
    pub fn value(&self, point: &Vector) -> Result<f64> {
        self.check_dim(point)?;
        match &self.payload {
            Payload::Planar(p) | Payload::Affine(p) => p.bilinear_value(point).ok_or_else(|| {
                Error::UnsupportedMetric("a general affine field has no saddle value function".into())
            }),
            Payload::ConvexConcave(p) => Ok(p.value(point)),
            Payload::Gan(p) => Ok(p.value(point)),
        }
    }

    /// Euclidean projection of `point` onto the solution set.
    pub fn project_to_solution(&self, point: &Vector) -> Result<Vector> {
        self.check_dim(point)?;
        match &self.payload {
            Payload::Planar(p) | Payload::Affine(p) => Ok(point - p.solution_offset(point)),
            Payload::ConvexConcave(_) => Ok(Vector::zeros(point.len())),
            Payload::Gan(_) => Err(Error::UnsupportedMetric(
                "the Gaussian GAN has no known solution set; use the residual norm".into(),
            )),
        }
    }

    /// `dist(x, X*)`.
    pub fn distance_to_solution(&self, point: &Vector) -> Result<f64> {
        self.check_dim(point)?;
        match &self.payload {
            Payload::Planar(p) | Payload::Affine(p) => Ok(p.solution_offset(point).norm()),
            Payload::ConvexConcave(_) => Ok(point.norm()),
            Payload::Gan(_) => Err(Error::UnsupportedMetric(
                "the Gaussian GAN has no known solution set; use the residual norm".into(),
            )),
        }
    }

    pub fn supports_distance(&self) -> bool {
        !matches!(self.payload, Payload::Gan(_))
    }

    /// A point of the solution set, when one is known in closed form.
    pub fn reference_solution(&self) -> Option<Vector> {
        match &self.payload {
            Payload::Planar(p) | Payload::Affine(p) => Some(-p.solution_offset(&Vector::zeros(p.dim()))),
            Payload::ConvexConcave(p) => Some(Vector::zeros(2 * p.dim_half())),
            Payload::Gan(_) => None,
        }
    }

    pub fn to_document(&self) -> ProblemDocument {
        match &self.payload {
            Payload::Planar(_) => ProblemDocument::Planar,
            Payload::Affine(p) => match p.coupling() {
                Some(b) => ProblemDocument::Bilinear {
                    rows: b.nrows(),
                    cols: b.ncols(),
                    coupling: row_major(b),
                },
                None => ProblemDocument::Affine {
                    dim: p.dim(),
                    matrix: row_major(p.matrix()),
                    offset: p.offset().iter().copied().collect(),
                    first_block: Some(self.first_block),
                },
            },
            Payload::ConvexConcave(p) => ProblemDocument::StronglyConvexConcave {
                dim_half: p.dim_half(),
                a1: row_major(&p.a1),
                a2: row_major(&p.a2),
                b1: row_major(&p.b1),
                b2: row_major(&p.b2),
                coupling: row_major(&p.coupling),
                lipschitz_radius: self.lipschitz_radius.unwrap_or(DEFAULT_LIPSCHITZ_RADIUS),
            },
            Payload::Gan(p) => ProblemDocument::GaussianGan {
                dim: p.dim(),
                batch_size: p.batch_size(),
                covariance: row_major(p.covariance()),
                lipschitz_radius: self.lipschitz_radius.unwrap_or(DEFAULT_LIPSCHITZ_RADIUS),
            },
        }
    }

    pub fn from_document(doc: &ProblemDocument) -> Result<Self> {
        let matrix = |rows: usize, cols: usize, data: &[f64], name: &str| {
            from_row_major(rows, cols, data).ok_or_else(|| {
                Error::Config(format!("{name}: expected {} entries, got {}", rows * cols, data.len()))
            })
        };
        match doc {
            ProblemDocument::Planar => Ok(make_planar()),
            ProblemDocument::Affine {
                dim,
                matrix: m,
                offset,
                first_block,
            } => {
                let m = matrix(*dim, *dim, m, "matrix")?;
                if offset.len() != *dim {
                    return Err(Error::DimensionMismatch {
                        expected: *dim,
                        got: offset.len(),
                    });
                }
                let mut p = make_affine(m, DVector::from_column_slice(offset))?;
                if let Some(k) = first_block {
                    p = p.with_first_block(*k)?;
                }
                Ok(p)
            }
            ProblemDocument::Bilinear { rows, cols, coupling } => {
                make_bilinear_from_matrix(matrix(*rows, *cols, coupling, "coupling")?)
            }
            ProblemDocument::StronglyConvexConcave {
                dim_half,
                a1,
                a2,
                b1,
                b2,
                coupling,
                lipschitz_radius,
            } => {
                let k = *dim_half;
                let payload = ConvexConcavePayload::new(
                    matrix(k, k, a1, "a1")?,
                    matrix(k, k, a2, "a2")?,
                    matrix(k, k, b1, "b1")?,
                    matrix(k, k, b2, "b2")?,
                    matrix(k, k, coupling, "coupling")?,
                )?;
                Ok(convex_concave_instance(payload, *lipschitz_radius))
            }
            ProblemDocument::GaussianGan {
                dim,
                batch_size,
                covariance,
                lipschitz_radius,
            } => {
                let payload = GaussianGanPayload::new(matrix(*dim, *dim, covariance, "covariance")?, *batch_size)?;
                Ok(gan_instance(payload, *lipschitz_radius))
            }
        }
    }

    /// Overrides the minimizer block size used by first-block noise.
    pub fn with_first_block(mut self, first_block: usize) -> Result<Self> {
        if first_block > self.dim() {
            return Err(Error::Config(format!(
                "first block {first_block} exceeds dimension {}",
                self.dim()
            )));
        }
        self.first_block = first_block;
        Ok(self)
    }
}

/// JSON form of a problem instance. Matrices are stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemDocument {
    Planar,
    Affine {
        dim: usize,
        matrix: Vec<f64>,
        offset: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        first_block: Option<usize>,
    },
    Bilinear {
        rows: usize,
        cols: usize,
        coupling: Vec<f64>,
    },
    StronglyConvexConcave {
        dim_half: usize,
        a1: Vec<f64>,
        a2: Vec<f64>,
        b1: Vec<f64>,
        b2: Vec<f64>,
        coupling: Vec<f64>,
        lipschitz_radius: f64,
    },
    GaussianGan {
        dim: usize,
        batch_size: usize,
        covariance: Vec<f64>,
        lipschitz_radius: f64,
    },
}

/// `min_θ max_φ θφ`, field `(φ, −θ)`.
pub fn make_planar() -> ProblemInstance {
    let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
    let payload = AffinePayload::new(m, Vector::zeros(2)).expect("planar matrix is valid");
    ProblemInstance {
        lipschitz: payload.largest_singular_value(),
        error_bound: payload.smallest_nonzero_singular_value(),
        payload: Payload::Planar(payload),
        first_block: 1,
        lipschitz_radius: None,
    }
}

/// General affine field `Mx + v`. Fails when `v ∉ range(M)`.
pub fn make_affine(matrix: DMatrix<f64>, offset: Vector) -> Result<ProblemInstance> {
    let payload = AffinePayload::new(matrix, offset)?;
    let dim = payload.dim();
    Ok(ProblemInstance {
        lipschitz: payload.largest_singular_value(),
        error_bound: payload.smallest_nonzero_singular_value(),
        payload: Payload::Affine(payload),
        first_block: dim,
        lipschitz_radius: None,
    })
}

/// Bilinear game `θᵀBφ` for a given coupling block.
pub fn make_bilinear_from_matrix(coupling: DMatrix<f64>) -> Result<ProblemInstance> {
    let first = coupling.nrows();
    let payload = AffinePayload::bilinear(coupling)?;
    Ok(ProblemInstance {
        lipschitz: payload.largest_singular_value(),
        error_bound: payload.smallest_nonzero_singular_value(),
        payload: Payload::Affine(payload),
        first_block: first,
        lipschitz_radius: None,
    })
}

/// Random bilinear game with a `dim_half × dim_half` Gaussian coupling.
pub fn make_bilinear(dim_half: usize, rng_seed: u64) -> Result<ProblemInstance> {
    make_bilinear_with_law(dim_half, BilinearLaw::Gaussian, rng_seed)
}

pub fn make_bilinear_with_law(dim_half: usize, law: BilinearLaw, rng_seed: u64) -> Result<ProblemInstance> {
    if dim_half == 0 {
        return Err(Error::Config("dim_half must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let coupling = match law {
        BilinearLaw::Gaussian => {
            let scale = 1.0 / (dim_half as f64).sqrt();
            let mut attempt = 0;
            loop {
                attempt += 1;
                let b = gaussian_matrix(dim_half, dim_half, scale, &mut rng);
                if b.singular_values().min() > MIN_COUPLING_SINGULAR_VALUE {
                    break b;
                }
                if attempt >= MAX_SAMPLING_ATTEMPTS {
                    return Err(Error::Sampling {
                        attempts: attempt,
                        reason: format!("smallest singular value never exceeded {MIN_COUPLING_SINGULAR_VALUE}"),
                    });
                }
            }
        }
        BilinearLaw::UniformSpectrum { low, high } => {
            if !(low > 0.0 && low <= high && high.is_finite()) {
                return Err(Error::Config(format!("invalid singular value range [{low}, {high}]")));
            }
            spectral_matrix(dim_half, low, high, &mut rng)
        }
    };
    make_bilinear_from_matrix(coupling)
}

fn convex_concave_instance(payload: ConvexConcavePayload, radius: f64) -> ProblemInstance {
    ProblemInstance {
        first_block: payload.dim_half(),
        lipschitz: payload.lipschitz_on_ball(radius),
        error_bound: payload.monotonicity_modulus(),
        lipschitz_radius: Some(radius),
        payload: Payload::ConvexConcave(payload),
    }
}

/// Random strongly convex-concave game with quartic terms.
///
/// `A₁, A₂, B₁, B₂` are `QDQᵀ` with eigenvalues uniform in `[0.5, 1.5]`;
/// the coupling has i.i.d. `N(0, 1/k)` entries.
pub fn make_strongly_convex_concave(dim_half: usize, rng_seed: u64) -> Result<ProblemInstance> {
    if dim_half == 0 {
        return Err(Error::Config("dim_half must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let k = dim_half;
    let a1 = spd_matrix(k, 0.5, 1.5, &mut rng);
    let a2 = spd_matrix(k, 0.5, 1.5, &mut rng);
    let b1 = spd_matrix(k, 0.5, 1.5, &mut rng);
    let b2 = spd_matrix(k, 0.5, 1.5, &mut rng);
    let coupling = gaussian_matrix(k, k, 1.0 / (k as f64).sqrt(), &mut rng);
    let payload = ConvexConcavePayload::new(a1, a2, b1, b2, coupling)?;
    Ok(convex_concave_instance(payload, DEFAULT_LIPSCHITZ_RADIUS))
}

pub fn make_strongly_convex_concave_from(payload: ConvexConcavePayload) -> ProblemInstance {
    convex_concave_instance(payload, DEFAULT_LIPSCHITZ_RADIUS)
}

fn gan_instance(payload: GaussianGanPayload, radius: f64) -> ProblemInstance {
    ProblemInstance {
        first_block: payload.dim() * payload.dim(),
        lipschitz: GaussianGanPayload::lipschitz_on_ball(radius),
        error_bound: 0.0,
        lipschitz_radius: Some(radius),
        payload: Payload::Gan(payload),
    }
}

/// Linear-quadratic Gaussian GAN with `Σ = QDQᵀ`, eigenvalues uniform in `[0.25, 4]`.
pub fn make_gaussian_gan(dim: usize, batch_size: usize, rng_seed: u64) -> Result<ProblemInstance> {
    if dim == 0 || batch_size == 0 {
        return Err(Error::Config("dim and batch_size must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let covariance = spd_matrix(dim, 0.25, 4.0, &mut rng);
    Ok(gan_instance(
        GaussianGanPayload::new(covariance, batch_size)?,
        DEFAULT_LIPSCHITZ_RADIUS,
    ))
}

pub fn make_gaussian_gan_from(covariance: DMatrix<f64>, batch_size: usize) -> Result<ProblemInstance> {
    Ok(gan_instance(
        GaussianGanPayload::new(covariance, batch_size)?,
        DEFAULT_LIPSCHITZ_RADIUS,
    ))
}

/// Central finite-difference estimate of the field from the value function:
/// `+∂f/∂x_i` on the minimizer block and `−∂f/∂x_i` on the maximizer block.
pub fn finite_difference_field(problem: &ProblemInstance, point: &Vector, step: f64) -> Result<Vector> {
    problem.check_dim(point)?;
    let mut out = Vector::zeros(point.len());
    let mut probe = point.clone();
    for i in 0..point.len() {
        let x0 = probe[i];
        probe[i] = x0 + step;
        let up = problem.value(&probe)?;
        probe[i] = x0 - step;
        let down = problem.value(&probe)?;
        probe[i] = x0;
        let d = (up - down) / (2.0 * step);
        out[i] = if i < problem.first_block() { d } else { -d };
    }
    Ok(out)
}
