//! Frames, frame bounds, tightening and equivalence certificates.
//!
//! A frame here is a finite ordered list of vectors in `R^n`, stored as the
//! columns of its synthesis matrix. The frame operator is `S = Σ x_j x_jᵀ`;
//! its extreme eigenvalues are the frame bounds `A <= B`.

use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::linalg::{self, Matrix};
use crate::scalar::Scalar;

/// Relative threshold below which the lower frame bound counts as zero.
pub const VALIDITY_TOL: f64 = 1e-12;
/// Tightness tolerance required by [`dimension_identity`].
pub const DIMENSION_IDENTITY_TOL: f64 = 1e-6;
/// Tolerance on symmetry and idempotence in [`frame_from_projection`].
pub const PROJECTION_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frame<T> {
    dim: usize,
    vectors: Vec<Vec<T>>,
}

impl<T: Scalar> Frame<T> {
    pub fn new(dim: usize, vectors: Vec<Vec<T>>) -> Result<Self> {
        if dim == 0 {
            return Err(FrameError::InvalidParameter(
                "frame dimension must be positive".into(),
            ));
        }
        for (index, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(FrameError::DimensionMismatch {
                    index,
                    expected: dim,
                    found: v.len(),
                });
            }
        }
        Ok(Self { dim, vectors })
    }

    /// Frame whose vectors are the columns of `synthesis`.
    pub fn from_synthesis(synthesis: &Matrix<T>) -> Result<Self> {
        Self::new(synthesis.rows(), synthesis.columns())
    }

    pub fn standard_basis(dim: usize) -> Self {
        let vectors = (0..dim)
            .map(|i| {
                let mut e = vec![T::zero(); dim];
                e[i] = T::one();
                e
            })
            .collect();
        Self { dim, vectors }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vec<T>] {
        &self.vectors
    }

    pub fn vector(&self, j: usize) -> &[T] {
        &self.vectors[j]
    }

    pub fn into_vectors(self) -> Vec<Vec<T>> {
        self.vectors
    }

    /// The `dim x len` matrix with the frame vectors as columns.
    pub fn synthesis(&self) -> Matrix<T> {
        Matrix::from_columns(self.dim, &self.vectors)
    }

    pub fn frame_operator(&self) -> Matrix<T> {
        self.synthesis().outer_gram()
    }

    pub fn norms(&self) -> Vec<T> {
        self.vectors.iter().map(|v| linalg::norm(v)).collect()
    }

    pub fn squared_norm_sum(&self) -> T {
        self.vectors.iter().map(|v| linalg::dot(v, v)).sum()
    }

    /// Indices of the vectors with nonzero norm.
    pub fn nonzero_indices(&self) -> Vec<usize> {
        self.vectors
            .iter()
            .enumerate()
            .filter(|(_, v)| v.iter().any(|&x| x != T::zero()))
            .map(|(j, _)| j)
            .collect()
    }

    /// Frame restricted to the given indices, in the given order.
    pub fn subsequence(&self, idx: &[usize]) -> Self {
        Self {
            dim: self.dim,
            vectors: idx.iter().map(|&j| self.vectors[j].clone()).collect(),
        }
    }

    /// Applies a linear map to every vector.
    pub fn map(&self, op: &Matrix<T>) -> Result<Self> {
        if op.cols() != self.dim {
            return Err(FrameError::DimensionMismatch {
                index: 0,
                expected: self.dim,
                found: op.cols(),
            });
        }
        Self::new(
            op.rows(),
            self.vectors.iter().map(|v| op.mul_vec(v)).collect(),
        )
    }
}

/// Optimal frame bounds `A <= B` and frame constant `(B/A)^(1/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameBounds<T> {
    pub lower: T,
    pub upper: T,
    /// Infinite when `lower` is zero.
    pub frame_constant: T,
}

impl<T: Scalar> FrameBounds<T> {
    fn from_extremes(lower: T, upper: T) -> Self {
        let lower = lower.max(T::zero());
        let upper = upper.max(lower);
        let frame_constant = if lower > T::zero() {
            (upper / lower).sqrt()
        } else {
            T::infinity()
        };
        Self {
            lower,
            upper,
            frame_constant,
        }
    }

    /// A genuine frame: `A > VALIDITY_TOL * max(B, 1)`.
    pub fn is_valid(&self) -> bool {
        self.lower > T::tol(VALIDITY_TOL) * self.upper.max(T::one())
    }

    /// `B / A <= 1 + tol`; tight up to scale.
    pub fn is_tight(&self, tol: T) -> bool {
        self.lower > T::zero() && self.upper / self.lower <= T::one() + tol
    }

    /// `A = B = 1` within `tol`.
    pub fn is_parseval(&self, tol: T) -> bool {
        (self.lower - T::one()).abs() <= tol && (self.upper - T::one()).abs() <= tol
    }

    fn require_valid(&self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(FrameError::NotAFrame {
                lower: self.lower.to_f64_lossy(),
                upper: self.upper.to_f64_lossy(),
            })
        }
    }
}

/// Extreme eigenvalues of the frame operator.
///
/// For long frames (`m > 4n`) the `n x n` frame operator is diagonalized;
/// otherwise the singular values of the synthesis matrix are used.
/// A degenerate frame is not an error here: check [`FrameBounds::is_valid`].
pub fn frame_bounds<T: Scalar>(frame: &Frame<T>) -> Result<FrameBounds<T>> {
    if frame.is_empty() {
        return Err(FrameError::Empty("frame has no vectors"));
    }
    let n = frame.dim();
    let m = frame.len();
    let (lower, upper) = if m > 4 * n {
        let values = linalg::sym_eigen(&frame.frame_operator()).values;
        (values[n - 1], values[0])
    } else {
        let sv = linalg::singular_values(&frame.synthesis());
        let lower = if m < n { T::zero() } else { sv[sv.len() - 1] };
        (lower * lower, sv[0] * sv[0])
    };
    Ok(FrameBounds::from_extremes(lower, upper))
}

pub fn is_tight<T: Scalar>(frame: &Frame<T>, tol: T) -> bool {
    frame_bounds(frame).is_ok_and(|b| b.is_tight(tol))
}

/// `S^(-1/2)`, the map taking a frame to its canonical tight frame.
///
/// Eigenvalues are clamped from below at the validity threshold.
pub fn tightening_operator<T: Scalar>(frame: &Frame<T>) -> Result<Matrix<T>> {
    frame_bounds(frame)?.require_valid()?;
    let eig = linalg::sym_eigen(&frame.frame_operator());
    let floor = T::tol(VALIDITY_TOL) * eig.values[0].max(T::one());
    let inv_sqrt: Vec<T> = eig
        .values
        .iter()
        .map(|&l| T::one() / l.max(floor).sqrt())
        .collect();
    let u = &eig.vectors;
    Ok(u
        .matmul(&Matrix::from_diagonal(&inv_sqrt))
        .matmul(&u.transpose()))
}

/// Canonical tight frame `(S^(-1/2) x_j)`, with `A = B = 1`.
pub fn tighten<T: Scalar>(frame: &Frame<T>) -> Result<Frame<T>> {
    let op = tightening_operator(frame)?;
    frame.map(&op)
}

/// The tight frame `(P e_j)` of an orthogonal projection, written in an
/// orthonormal basis of `range(P)`.
pub fn frame_from_projection<T: Scalar>(projection: &Matrix<T>) -> Result<Frame<T>> {
    if !projection.is_square() {
        return Err(FrameError::NotProjection("matrix is not square".into()));
    }
    let tol = T::tol(PROJECTION_TOL);
    let asym = projection.asymmetry();
    if asym > tol {
        return Err(FrameError::NotProjection(format!(
            "asymmetry {} exceeds {}",
            asym, tol
        )));
    }
    let idem = projection.matmul(projection).sub(projection).max_abs();
    if idem > tol {
        return Err(FrameError::NotProjection(format!(
            "|P^2 - P| = {} exceeds {}",
            idem, tol
        )));
    }
    let eig = linalg::sym_eigen(projection);
    let half = T::lit(0.5);
    let mut basis: Vec<Vec<T>> = Vec::new();
    for (k, &l) in eig.values.iter().enumerate() {
        if l <= half {
            break;
        }
        let mut q = eig.vectors.column(k);
        // sign convention: largest-magnitude coordinate positive
        let pivot = q
            .iter()
            .copied()
            .fold(T::zero(), |acc, x| if x.abs() > acc.abs() { x } else { acc });
        if pivot < T::zero() {
            q.iter_mut().for_each(|x| *x = -*x);
        }
        basis.push(q);
    }
    if basis.is_empty() {
        return Err(FrameError::NotProjection("projection has rank zero".into()));
    }
    let m = projection.rows();
    let vectors = (0..m)
        .map(|j| {
            let col = projection.column(j);
            basis.iter().map(|q| linalg::dot(q, &col)).collect()
        })
        .collect();
    Frame::new(basis.len(), vectors)
}

/// Synthesis matrix of the canonical tight frame; its rows are orthonormal.
pub fn row_orthonormal_form<T: Scalar>(frame: &Frame<T>) -> Result<Matrix<T>> {
    Ok(tighten(frame)?.synthesis())
}

/// `Σ ‖x_j‖²` of a tight frame with `A = B = 1`, which equals its dimension.
pub fn dimension_identity<T: Scalar>(frame: &Frame<T>) -> Result<T> {
    let bounds = frame_bounds(frame)?;
    if !bounds.is_parseval(T::tol(DIMENSION_IDENTITY_TOL)) {
        let ratio = if bounds.lower > T::zero() {
            (bounds.upper / bounds.lower).to_f64_lossy()
        } else {
            f64::INFINITY
        };
        return Err(FrameError::NotTight { ratio });
    }
    Ok(frame.squared_norm_sum())
}

/// Hilbertian constant `h = σ_max`, Besselian constant `b = 1/σ_min` and
/// equivalence constant `C = h·b` of a system against an orthonormal basis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceCertificate<T> {
    pub hilbertian: T,
    pub besselian: T,
    pub constant: T,
}

impl<T: Scalar> EquivalenceCertificate<T> {
    pub fn is_finite(&self) -> bool {
        self.constant.is_finite()
    }

    /// Certificate read off singular values sorted in descending order,
    /// `count` of them expected (missing ones are zero).
    pub fn from_singular_values(sv: &[T], count: usize, dim: usize) -> Self {
        let hilbertian = sv.first().copied().unwrap_or_else(T::zero);
        let smallest = if count > sv.len() || sv.is_empty() {
            T::zero()
        } else {
            sv[count - 1]
        };
        let rank_floor =
            T::epsilon() * T::lit(8.0) * T::from_usize_lossy(dim.max(count)) * hilbertian;
        let besselian = if smallest > rank_floor && smallest > T::zero() {
            T::one() / smallest
        } else {
            T::infinity()
        };
        let constant = if besselian.is_infinite() {
            T::infinity()
        } else {
            hilbertian * besselian
        };
        Self {
            hilbertian,
            besselian,
            constant,
        }
    }
}

pub fn equivalence_certificate<T: Scalar>(system: &[Vec<T>]) -> Result<EquivalenceCertificate<T>> {
    let dim = check_system(system)?;
    let k = system.len();
    let sv = if k <= dim {
        linalg::singular_values_of_columns(system.to_vec())
    } else {
        linalg::singular_values(&Matrix::from_columns(dim, system))
    };
    Ok(EquivalenceCertificate::from_singular_values(&sv, k, dim))
}

/// `G[i][j] = ⟨x_i, x_j⟩`.
pub fn gram_matrix<T: Scalar>(system: &[Vec<T>]) -> Matrix<T> {
    let k = system.len();
    let mut g = Matrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let v = linalg::dot(&system[i], &system[j]);
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}

pub(crate) fn check_system<T: Scalar>(system: &[Vec<T>]) -> Result<usize> {
    let first = system.first().ok_or(FrameError::Empty("system has no vectors"))?;
    let dim = first.len();
    for (index, v) in system.iter().enumerate() {
        if v.len() != dim {
            return Err(FrameError::DimensionMismatch {
                index,
                expected: dim,
                found: v.len(),
            });
        }
    }
    Ok(dim)
}
