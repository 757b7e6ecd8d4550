//! Seeded random instances: Gaussian vectors, matrices, and orthonormal frames.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{orthonormalize, Matrix, C64, TOL_RANK};

/// Vector in `C^d` with i.i.d. standard normal real and imaginary parts.
pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<C64> {
    (0..d)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

/// Real standard normal vector embedded in `C^d`.
pub fn gaussian_real_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<C64> {
    (0..d)
        .map(|_| C64::new(rng.sample(StandardNormal), 0.0))
        .collect()
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    let columns: Vec<Vec<C64>> = (0..cols).map(|_| gaussian_vector(rng, rows)).collect();
    Matrix::from_columns(rows, &columns).expect("columns have the requested length")
}

/// Uniformly distributed orthonormal `k`-frame in `C^d` (`k <= d`).
pub fn random_frame<R: Rng + ?Sized>(rng: &mut R, d: usize, k: usize) -> Matrix {
    assert!(k <= d, "frame larger than ambient dimension");
    if k == 0 {
        return Matrix::zeros(d, 0);
    }
    loop {
        let vs: Vec<Vec<C64>> = (0..k).map(|_| gaussian_vector(rng, d)).collect();
        let b = orthonormalize(&vs, TOL_RANK).expect("non-empty finite input");
        if b.cols() == k {
            return b;
        }
    }
}

/// Random positive semidefinite `B* B` with `B` Gaussian `d x d`.
pub fn random_psd<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Matrix {
    let b = gaussian_matrix(rng, d, d);
    let mut s = &b.adjoint() * &b;
    for i in 0..d {
        s[(i, i)].im = 0.0;
    }
    s.hermitian_part()
}
