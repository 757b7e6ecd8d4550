//! One-sided (Hestenes) Jacobi SVD for dense complex matrices.

use super::{complete_orthonormal, inner, norm_sq, Matrix, C64};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;
/// Columns whose mutual cosine is below this are treated as orthogonal.
const ORTH_EPS: f64 = 1e-15;
/// Singular values at or below `NULL_REL * sigma_max` get completed left vectors.
const NULL_REL: f64 = 1e-12;

/// Thin SVD `A = U diag(s) V*` with `r = min(rows, cols)` triplets.
#[derive(Clone, Debug)]
pub struct SvdResult {
    /// `rows x r`, orthonormal columns.
    pub left_vectors: Matrix,
    /// Non-increasing, non-negative.
    pub singular_values: Vec<f64>,
    /// `cols x r`, orthonormal columns.
    pub right_vectors: Matrix,
}

impl SvdResult {
    /// Number of singular values above `tol * sigma_max`.
    pub fn numerical_rank(&self, tol: f64) -> usize {
        let smax = self.singular_values.first().copied().unwrap_or(0.0);
        if smax == 0.0 {
            return 0;
        }
        self.singular_values
            .iter()
            .take_while(|s| **s > tol * smax)
            .count()
    }

    /// `U diag(s) V*`.
    pub fn reconstruct(&self) -> Matrix {
        let mut us = self.left_vectors.clone();
        for j in 0..us.cols() {
            for i in 0..us.rows() {
                us[(i, j)] *= self.singular_values[j];
            }
        }
        &us * &self.right_vectors.adjoint()
    }
}

/// Thin SVD. Each left singular vector is normalized so that its first entry
/// of modulus above `1e-12` is real and positive; the matching right vector
/// carries the same phase. Equal singular values keep the order in which the
/// Jacobi sweep produced them.
pub fn svd(a: &Matrix) -> Result<SvdResult> {
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    let (left, values, right) = if a.cols() > a.rows() {
        // A* = U' S V'*  =>  A = V' S U'*
        let (u, s, v) = jacobi_tall(&a.adjoint());
        (v, s, u)
    } else {
        jacobi_tall(a)
    };
    Ok(fix_phases(left, values, right))
}

/// Orthogonalizes the columns of a tall (`rows >= cols`) matrix. Returns
/// `(U, s, V)` as column lists, sorted by decreasing `s`.
fn jacobi_tall(a: &Matrix) -> (Vec<Vec<C64>>, Vec<f64>, Vec<Vec<C64>>) {
    let m = a.rows();
    let n = a.cols();
    let mut cols = a.columns();
    let mut v: Vec<Vec<C64>> = (0..n).map(|j| super::unit_vector(n, j)).collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in (i + 1)..n {
                let alpha = norm_sq(&cols[i]);
                let beta = norm_sq(&cols[j]);
                let gamma = inner(&cols[i], &cols[j]);
                let g = gamma.norm();
                if g == 0.0 || g <= ORTH_EPS * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // rotate column j by the conjugate phase so the pair's inner
                // product becomes the real number g
                let phase = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = if zeta == 0.0 {
                    1.0
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, i, j, phase, c, s);
                rotate(&mut v, i, j, phase, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<(usize, f64)> = cols
        .iter()
        .enumerate()
        .map(|(j, c)| (j, norm_sq(c).sqrt()))
        .collect();
    // stable: ties keep sweep order
    order.sort_by(|x, y| y.1.total_cmp(&x.1));
    let smax = order.first().map_or(0.0, |o| o.1);

    let mut left: Vec<Vec<C64>> = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    let mut right = Vec::with_capacity(n);
    let mut null_slots = 0;
    for (j, s) in &order {
        if *s > NULL_REL * smax && *s > 0.0 {
            let inv = 1.0 / s;
            left.push(cols[*j].iter().map(|z| z * inv).collect());
        } else {
            null_slots += 1;
        }
        values.push(*s);
        right.push(v[*j].clone());
    }
    if null_slots > 0 {
        let target = left.len() + null_slots;
        complete_orthonormal(&mut left, m, target);
    }
    (left, values, right)
}

fn rotate(cols: &mut [Vec<C64>], i: usize, j: usize, phase: C64, c: f64, s: f64) {
    let (lo, hi) = cols.split_at_mut(j);
    let ci = &mut lo[i];
    let cj = &mut hi[0];
    for (x, y) in ci.iter_mut().zip(cj.iter_mut()) {
        let a = *x;
        let b = *y * phase;
        *x = a * c - b * s;
        *y = a * s + b * c;
    }
}

fn fix_phases(mut left: Vec<Vec<C64>>, values: Vec<f64>, mut right: Vec<Vec<C64>>) -> SvdResult {
    let rows = left.first().map_or(0, Vec::len);
    let rrows = right.first().map_or(0, Vec::len);
    for (u, v) in left.iter_mut().zip(right.iter_mut()) {
        if let Some(lead) = u.iter().find(|z| z.norm() > 1e-12) {
            let ph = (lead.conj()) / lead.norm();
            for z in u.iter_mut() {
                *z *= ph;
            }
            for z in v.iter_mut() {
                *z *= ph;
            }
            // exact zero imaginary part on the pivot
            if let Some(p) = u.iter_mut().find(|z| z.norm() > 1e-12) {
                p.im = 0.0;
            }
        }
    }
    SvdResult {
        left_vectors: Matrix::from_columns(rows, &left).expect("consistent column lengths"),
        singular_values: values,
        right_vectors: Matrix::from_columns(rrows, &right).expect("consistent column lengths"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::gaussian_matrix;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn check_invariants(a: &Matrix, r: &SvdResult) {
        let k = a.rows().min(a.cols());
        assert_eq!(r.singular_values.len(), k);
        assert_eq!(r.left_vectors.cols(), k);
        assert_eq!(r.right_vectors.cols(), k);
        assert!(r.left_vectors.orthonormality_defect() < 1e-10);
        assert!(r.right_vectors.orthonormality_defect() < 1e-10);
        for w in r.singular_values.windows(2) {
            assert!(w[0] >= w[1]);
        }
        assert!(r.singular_values.iter().all(|s| *s >= 0.0));
        let smax = r.singular_values.first().copied().unwrap_or(0.0);
        assert!(r.reconstruct().max_abs_diff(a) <= 1e-10 * smax.max(1e-300));
    }

    #[test]
    fn diagonal() {
        let a = Matrix::diagonal(&[2.0, 1.0]);
        let r = svd(&a).unwrap();
        assert_eq!(r.singular_values, vec![2.0, 1.0]);
        check_invariants(&a, &r);
    }

    #[test]
    fn zero_matrix() {
        let a = Matrix::zeros(3, 2);
        let r = svd(&a).unwrap();
        assert_eq!(r.singular_values, vec![0.0, 0.0]);
        assert!(r.left_vectors.orthonormality_defect() < 1e-12);
    }

    #[test]
    fn rejects_nan() {
        let mut a = Matrix::zeros(2, 2);
        a[(0, 1)] = C64::new(f64::NAN, 0.0);
        assert_eq!(svd(&a).unwrap_err(), Error::NonFinite);
    }

    /// Real roots of the characteristic cubic of a 3x3 Hermitian matrix by the
    /// trigonometric formula; independent of any Jacobi machinery.
    fn hermitian3_eigenvalues(g: &Matrix) -> [f64; 3] {
        let e = |i: usize, j: usize| g[(i, j)];
        let tr = (e(0, 0) + e(1, 1) + e(2, 2)).re;
        let minors = (e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0))
            + (e(0, 0) * e(2, 2) - e(0, 2) * e(2, 0))
            + (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1));
        let det = e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1))
            - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
            + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0));
        // lambda^3 - tr lambda^2 + minors lambda - det = 0
        let (b, c, d) = (-tr, minors.re, -det.re);
        let shift = -b / 3.0;
        let p = c - b * b / 3.0;
        let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
        let m = 2.0 * (-p / 3.0).max(0.0).sqrt();
        let arg = if m == 0.0 {
            0.0
        } else {
            (3.0 * q / (p * m)).clamp(-1.0, 1.0)
        };
        let theta = arg.acos() / 3.0;
        let mut roots = [0.0; 3];
        for (k, r) in roots.iter_mut().enumerate() {
            *r = shift + m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos();
        }
        roots.sort_by(|a, b| b.total_cmp(a));
        roots
    }

    #[test]
    fn squared_singular_values_match_cubic_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let a = gaussian_matrix(&mut rng, 4, 3);
            let r = svd(&a).unwrap();
            check_invariants(&a, &r);
            let gram = &a.adjoint() * &a;
            let eig = hermitian3_eigenvalues(&gram);
            for (s, l) in r.singular_values.iter().zip(eig) {
                assert!((s * s - l).abs() <= 1e-8 * l.abs().max(1.0), "{} vs {}", s * s, l);
            }
        }
    }

    #[test]
    fn wide_and_rank_deficient() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = gaussian_matrix(&mut rng, 3, 7);
        check_invariants(&a, &svd(&a).unwrap());
        // rank one 5x4
        let u = gaussian_matrix(&mut rng, 5, 1);
        let v = gaussian_matrix(&mut rng, 1, 4);
        let a = &u * &v;
        let r = svd(&a).unwrap();
        check_invariants(&a, &r);
        assert_eq!(r.numerical_rank(1e-9), 1);
    }

    #[test]
    fn sign_convention() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = gaussian_matrix(&mut rng, 4, 4);
        let r = svd(&a).unwrap();
        for u in r.left_vectors.columns() {
            let lead = u.iter().find(|z| z.norm() > 1e-12).unwrap();
            assert_eq!(lead.im, 0.0);
            assert!(lead.re > 0.0);
        }
        // deterministic
        let r2 = svd(&a).unwrap();
        assert_eq!(r.left_vectors, r2.left_vectors);
    }

    proptest! {
        #[test]
        fn frobenius_identity(seed in any::<u64>(), d in 1usize..=8, m in 1usize..=8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = gaussian_matrix(&mut rng, d, m);
            let r = svd(&a).unwrap();
            check_invariants(&a, &r);
            let s2: f64 = r.singular_values.iter().map(|s| s * s).sum();
            let f2 = a.frobenius_norm().powi(2);
            prop_assert!((s2 - f2).abs() <= 1e-10 * f2);
        }
    }
}
