//! Seeded random instances.
//!
//! Every generator draws from ChaCha8 seeded with `seed_from_u64(seed)`.
//! Uniforms are `rand`'s standard `f64` (53 random mantissa bits) and normals
//! come from the Box-Muller transform, both outputs of each pair used in
//! order (cosine first). Matrices are filled row by row. This keeps instances
//! identical across platforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::frame::Frame;
use crate::linalg::{self, Matrix};
use crate::scalar::Scalar;

pub struct Gaussian {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl Gaussian {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    pub fn sample(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.rng.gen::<f64>();
        let u2 = self.rng.gen::<f64>();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * std::f64::consts::PI * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }

    pub fn vector<T: Scalar>(&mut self, len: usize) -> Vec<T> {
        (0..len).map(|_| T::lit(self.sample())).collect()
    }

    pub fn unit_vector<T: Scalar>(&mut self, len: usize) -> Vec<T> {
        loop {
            let v = self.vector::<T>(len);
            let nv = linalg::norm(&v);
            if nv > T::zero() {
                return linalg::scaled(&v, T::one() / nv);
            }
        }
    }

    pub fn matrix<T: Scalar>(&mut self, rows: usize, cols: usize) -> Matrix<T> {
        let data: Vec<Vec<T>> = (0..rows).map(|_| self.vector(cols)).collect();
        Matrix::from_rows(&data)
    }
}

/// Frame of `m` standard Gaussian vectors in `R^n`.
pub fn random_frame<T: Scalar>(seed: u64, n: usize, m: usize) -> Frame<T> {
    let mut g = Gaussian::new(seed);
    let vectors = (0..m).map(|_| g.vector(n)).collect();
    Frame::new(n, vectors).expect("consistent dimensions")
}

/// `n x m` matrix with orthonormal rows (Gram-Schmidt on Gaussian rows).
pub fn random_row_orthonormal<T: Scalar>(seed: u64, n: usize, m: usize) -> Matrix<T> {
    assert!(n <= m, "need n <= m for orthonormal rows");
    let mut g = Gaussian::new(seed);
    loop {
        let rows = g.matrix::<T>(n, m).to_rows();
        let q = linalg::orthonormal_basis(&rows, T::tol(1e-8));
        if q.len() == n {
            return Matrix::from_rows(&q);
        }
    }
}

/// Tight frame with `A = B = 1`: the columns of a random row-orthonormal matrix.
pub fn random_tight_frame<T: Scalar>(seed: u64, n: usize, m: usize) -> Frame<T> {
    Frame::from_synthesis(&random_row_orthonormal(seed, n, m)).expect("n > 0")
}

/// Random orthogonal projection of rank `rank` in `R^ambient`.
pub fn random_projection<T: Scalar>(seed: u64, ambient: usize, rank: usize) -> Matrix<T> {
    let q = random_row_orthonormal::<T>(seed, rank, ambient);
    q.transpose().matmul(&q)
}

/// Random orthogonal `n x n` matrix.
pub fn random_rotation<T: Scalar>(seed: u64, n: usize) -> Matrix<T> {
    random_row_orthonormal(seed, n, n)
}

/// `m` random unit vectors in `R^n`.
pub fn random_unit_vectors<T: Scalar>(seed: u64, n: usize, m: usize) -> Vec<Vec<T>> {
    let mut g = Gaussian::new(seed);
    (0..m).map(|_| g.unit_vector(n)).collect()
}
