//! Dense complex linear algebra: matrices, SVD, Hermitian eigendecomposition,
//! orthonormalization, orthogonal projectors and the unitary DFT.
//!
//! Every scalar is a [`C64`]; real data is embedded with zero imaginary part.

mod hermitian;
mod svd;

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Index, IndexMut, Mul};

pub use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub use hermitian::{hermitian_eigen, HermitianEigen};
pub use svd::{svd, SvdResult};

/// Symmetry and idempotence tolerance for projectors.
pub const TOL_SYM: f64 = 1e-10;
/// Orthonormality tolerance for bases and unitary matrices.
pub const TOL_ORTH: f64 = 1e-10;
/// Default relative threshold below which a residual counts as linearly dependent.
pub const TOL_RANK: f64 = 1e-9;

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row vectors. Rows must share a length.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Builds a `rows x columns.len()` matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<C64>]) -> Result<Self> {
        let mut m = Matrix::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            if col.len() != rows {
                return Err(Error::DimensionMismatch {
                    expected: rows,
                    found: col.len(),
                });
            }
            for (i, z) in col.iter().enumerate() {
                m[(i, j)] = *z;
            }
        }
        Ok(m)
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows.iter().map(|r| real_vector(r)).collect();
        Matrix::from_rows(&rows)
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Matrix::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(*v, 0.0);
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn columns(&self) -> Vec<Vec<C64>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].conj();
            }
        }
        t
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: C64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    fn zip_with(&self, other: &Matrix, f: impl Fn(C64, C64) -> C64) -> Matrix {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "matrix shape mismatch"
        );
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }

    /// Matrix-vector product.
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, x.len(), "matrix-vector shape mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `A* x` without forming the adjoint.
    pub fn apply_adjoint(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(self.rows, x.len(), "matrix-vector shape mismatch");
        let mut out = vec![C64::new(0.0, 0.0); self.cols];
        for (i, xi) in x.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a.conj() * xi;
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.sub(other).max_abs()
    }

    /// Hermitian part `(A + A*) / 2`.
    pub fn hermitian_part(&self) -> Matrix {
        self.add(&self.adjoint()).scale(C64::new(0.5, 0.0))
    }

    /// Deviation of the columns from orthonormality, `max |B*B - I|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let gram = &self.adjoint() * self;
        gram.max_abs_diff(&Matrix::identity(self.cols))
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let row = rhs.row(k);
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }
}

/// Embeds a real vector.
pub fn real_vector(x: &[f64]) -> Vec<C64> {
    x.iter().map(|v| C64::new(*v, 0.0)).collect()
}

/// Standard basis vector `e_i` (zero-based) in `C^d`.
pub fn unit_vector(d: usize, i: usize) -> Vec<C64> {
    let mut e = vec![C64::new(0.0, 0.0); d];
    e[i] = C64::new(1.0, 0.0);
    e
}

/// Inner product `<x, y> = sum conj(x_i) y_i`.
pub fn inner(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm_sq(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

pub fn is_finite_vector(x: &[C64]) -> bool {
    x.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// `y += a * x`
pub fn axpy(a: C64, x: &[C64], y: &mut [C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Outer product `x y*`.
pub fn outer(x: &[C64], y: &[C64]) -> Matrix {
    let mut m = Matrix::zeros(x.len(), y.len());
    for (i, a) in x.iter().enumerate() {
        for (j, b) in y.iter().enumerate() {
            m[(i, j)] = a * b.conj();
        }
    }
    m
}

/// Orthonormal basis of the span of `vectors` via twice-iterated modified
/// Gram-Schmidt. A vector is dropped when its residual after projection onto
/// the accepted columns has norm at most `tol_rank * max_input_norm`.
pub fn orthonormalize(vectors: &[Vec<C64>], tol_rank: f64) -> Result<Matrix> {
    let d = match vectors.first() {
        Some(v) => v.len(),
        None => return Err(Error::invalid("orthonormalize needs at least one vector")),
    };
    if let Some(bad) = vectors.iter().find(|v| v.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: bad.len(),
        });
    }
    if !vectors.iter().all(|v| is_finite_vector(v)) {
        return Err(Error::NonFinite);
    }
    let max_norm = vectors.iter().map(|v| norm_sq(v).sqrt()).fold(0.0, f64::max);
    let threshold = tol_rank * max_norm;
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for v in vectors {
        if basis.len() == d {
            break;
        }
        let mut r = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = inner(b, &r);
                axpy(-c, b, &mut r);
            }
        }
        let n = norm_sq(&r).sqrt();
        if n > threshold && n > 0.0 {
            let inv = 1.0 / n;
            basis.push(r.into_iter().map(|z| z * inv).collect());
        }
    }
    Matrix::from_columns(d, &basis)
}

/// Extends an orthonormal column set with unit vectors orthogonal to it until
/// it has `target` columns. Standard basis vectors are tried in order of the
/// largest residual.
pub(crate) fn complete_orthonormal(columns: &mut Vec<Vec<C64>>, d: usize, target: usize) {
    while columns.len() < target {
        let mut best: Option<(f64, Vec<C64>)> = None;
        for i in 0..d {
            let mut r = unit_vector(d, i);
            for _ in 0..2 {
                for b in columns.iter() {
                    let c = inner(b, &r);
                    axpy(-c, b, &mut r);
                }
            }
            let n = norm_sq(&r);
            if best.as_ref().is_none_or(|(bn, _)| n > *bn) {
                best = Some((n, r));
            }
        }
        let (n, r) = best.expect("ambient dimension exceeds column count");
        let inv = 1.0 / n.sqrt();
        columns.push(r.into_iter().map(|z| z * inv).collect());
    }
}

/// Orthogonal projector onto a closed subspace of `C^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct Projector {
    matrix: Matrix,
}

impl Projector {
    /// Validates that `matrix` is self-adjoint and idempotent to [`TOL_SYM`].
    pub fn new(matrix: Matrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.rows(),
                found: matrix.cols(),
            });
        }
        if !matrix.is_finite() {
            return Err(Error::NonFinite);
        }
        let sym = matrix.max_abs_diff(&matrix.adjoint());
        let idem = (&matrix * &matrix).max_abs_diff(&matrix);
        let defect = sym.max(idem);
        if defect > TOL_SYM {
            return Err(Error::NotProjector(defect));
        }
        Ok(Projector { matrix })
    }

    pub fn zero(d: usize) -> Self {
        Projector {
            matrix: Matrix::zeros(d, d),
        }
    }

    pub fn identity(d: usize) -> Self {
        Projector {
            matrix: Matrix::identity(d),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    /// Trace, i.e. the rank of the range.
    pub fn rank(&self) -> usize {
        self.matrix.trace().re.round().max(0.0) as usize
    }
}

/// `P = B B*` for a basis `B` with orthonormal columns.
pub fn projector_from_basis(basis: &Matrix) -> Result<Projector> {
    if !basis.is_finite() {
        return Err(Error::NonFinite);
    }
    let defect = basis.orthonormality_defect();
    if defect > TOL_ORTH {
        return Err(Error::NotOrthonormal(defect));
    }
    let mut p = &*basis * &basis.adjoint();
    // exact Hermitian symmetry; the diagonal is real
    for i in 0..p.rows() {
        p[(i, i)].im = 0.0;
        for j in (i + 1)..p.cols() {
            let z = (p[(i, j)] + p[(j, i)].conj()) * 0.5;
            p[(i, j)] = z;
            p[(j, i)] = z.conj();
        }
    }
    Ok(Projector { matrix: p })
}

/// `I - P`.
pub fn complement_projector(p: &Projector) -> Projector {
    Projector {
        matrix: Matrix::identity(p.dim()).sub(&p.matrix),
    }
}

/// Unitary DFT matrix `W[j,k] = exp(-2 pi i jk / p) / sqrt(p)`.
pub fn dft_matrix(p: usize) -> Result<Matrix> {
    if p == 0 {
        return Err(Error::invalid("DFT order must be positive"));
    }
    let scale = 1.0 / (p as f64).sqrt();
    let mut w = Matrix::zeros(p, p);
    for j in 0..p {
        for k in 0..p {
            // reduce jk mod p before the trig call to keep the angle small
            let e = (j * k) % p;
            let theta = -2.0 * PI * e as f64 / p as f64;
            w[(j, k)] = C64::from_polar(scale, theta);
        }
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn orthonormalize_scales_axes() {
        let b = orthonormalize(&[real_vector(&[2.0, 0.0]), real_vector(&[0.0, 3.0])], TOL_RANK)
            .unwrap();
        assert_eq!(b.cols(), 2);
        assert!(b.max_abs_diff(&Matrix::identity(2)) < 1e-15);
    }

    #[test]
    fn orthonormalize_drops_near_dependence() {
        let b = orthonormalize(&[real_vector(&[1.0, 0.0]), real_vector(&[1.0, 1e-15])], 1e-9)
            .unwrap();
        assert_eq!(b.cols(), 1);
        assert!((b[(0, 0)] - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn orthonormalize_rejects_mismatch() {
        let err = orthonormalize(&[real_vector(&[1.0, 0.0]), real_vector(&[1.0])], TOL_RANK);
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
        assert!(orthonormalize(&[], TOL_RANK).is_err());
    }

    #[test]
    fn orthonormalize_zero_vectors_give_empty_basis() {
        let b = orthonormalize(&[vec![c(0.0); 3]], TOL_RANK).unwrap();
        assert_eq!((b.rows(), b.cols()), (3, 0));
    }

    /// Classical Gram-Schmidt written out on explicit coordinates, used as an
    /// independent route to the projector.
    fn gram_schmidt_projector(vs: &[Vec<C64>]) -> Matrix {
        let d = vs[0].len();
        let mut us: Vec<Vec<C64>> = Vec::new();
        for v in vs {
            let mut w = v.clone();
            for u in &us {
                let mut coef = c(0.0);
                for k in 0..d {
                    coef += u[k].conj() * v[k];
                }
                for k in 0..d {
                    w[k] -= coef * u[k];
                }
            }
            let n: f64 = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if n > 1e-8 {
                us.push(w.iter().map(|z| z / n).collect());
            }
        }
        let mut p = Matrix::zeros(d, d);
        for u in &us {
            for i in 0..d {
                for j in 0..d {
                    p[(i, j)] += u[i] * u[j].conj();
                }
            }
        }
        p
    }

    #[test]
    fn orthonormalize_generic_matches_gram_schmidt_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = crate::random::gaussian_vector(&mut rng, 4);
        let w = crate::random::gaussian_vector(&mut rng, 4);
        let v2: Vec<C64> = v.iter().map(|z| z * 2.0).collect();
        let basis = orthonormalize(&[v.clone(), v2, w.clone()], TOL_RANK).unwrap();
        assert_eq!(basis.cols(), 2);
        let p = projector_from_basis(&basis).unwrap();
        let oracle = gram_schmidt_projector(&[v, w]);
        assert!(p.matrix().max_abs_diff(&oracle) < 1e-12);
    }

    #[test]
    fn projector_examples() {
        let e1 = Matrix::from_columns(2, &[unit_vector(2, 0)]).unwrap();
        let p = projector_from_basis(&e1).unwrap();
        assert_eq!(p.matrix(), &Matrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]).unwrap());

        let empty = Matrix::zeros(3, 0);
        assert_eq!(projector_from_basis(&empty).unwrap(), Projector::zero(3));

        let s = 1.0 / 2f64.sqrt();
        let diag = Matrix::from_columns(2, &[real_vector(&[s, s])]).unwrap();
        let p = projector_from_basis(&diag).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((p.matrix()[(i, j)] - c(0.5)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn projector_rejects_non_orthonormal_basis() {
        let b = Matrix::from_columns(2, &[real_vector(&[2.0, 0.0])]).unwrap();
        assert!(matches!(projector_from_basis(&b), Err(Error::NotOrthonormal(_))));
        let not_idem = Matrix::diagonal(&[0.5, 1.0]);
        assert!(matches!(Projector::new(not_idem), Err(Error::NotProjector(_))));
    }

    #[test]
    fn complement_examples() {
        assert_eq!(complement_projector(&Projector::zero(3)), Projector::identity(3));
        assert_eq!(complement_projector(&Projector::identity(3)), Projector::zero(3));
        let e1 = projector_from_basis(&Matrix::from_columns(2, &[unit_vector(2, 0)]).unwrap())
            .unwrap();
        let q = complement_projector(&e1);
        assert_eq!(q.matrix(), &Matrix::diagonal(&[0.0, 1.0]));
        assert_eq!(complement_projector(&q), e1);
    }

    #[test]
    fn dft_examples() {
        assert_eq!(dft_matrix(1).unwrap(), Matrix::identity(1));
        let s = 1.0 / 2f64.sqrt();
        let w2 = dft_matrix(2).unwrap();
        let expect = Matrix::from_real_rows(&[&[s, s], &[s, -s]]).unwrap();
        assert!(w2.max_abs_diff(&expect) < 1e-15);
        let w4 = dft_matrix(4).unwrap();
        assert!((&w4 * &w4.adjoint()).max_abs_diff(&Matrix::identity(4)) < 1e-12);
        assert!(dft_matrix(0).is_err());
    }

    #[test]
    fn dft_unitary_up_to_64() {
        for p in 1..=64 {
            let w = dft_matrix(p).unwrap();
            let err = (&w.adjoint() * &w).max_abs_diff(&Matrix::identity(p));
            assert!(err < 1e-12, "p = {p}: {err:e}");
        }
    }
}
