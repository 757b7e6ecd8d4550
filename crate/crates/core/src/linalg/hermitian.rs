//! Cyclic two-sided Jacobi eigensolver for small Hermitian matrices.

use super::{Matrix, C64};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Non-increasing.
    pub values: Vec<f64>,
    /// Unitary; column `i` belongs to `values[i]`.
    pub vectors: Matrix,
}

/// Eigendecomposition of the Hermitian part of `h`. Only the Hermitian part is
/// used, so callers may pass a matrix that is Hermitian up to rounding.
pub fn hermitian_eigen(h: &Matrix) -> Result<HermitianEigen> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch {
            expected: h.rows(),
            found: h.cols(),
        });
    }
    if !h.is_finite() {
        return Err(Error::NonFinite);
    }
    let n = h.rows();
    let mut a = h.hermitian_part();
    let mut v = Matrix::identity(n);
    let scale = a.frobenius_norm();

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |j| *j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let g = apq.norm();
                if g == 0.0 {
                    continue;
                }
                let phase = (apq / g).conj();
                let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * g);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let jpp = C64::new(c, 0.0);
                let jpq = C64::new(s, 0.0);
                let jqp = phase * (-s);
                let jqq = phase * c;
                for i in 0..n {
                    let hp = a[(i, p)];
                    let hq = a[(i, q)];
                    a[(i, p)] = hp * jpp + hq * jqp;
                    a[(i, q)] = hp * jpq + hq * jqq;
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = vp * jpp + vq * jqp;
                    v[(i, q)] = vp * jpq + vq * jqq;
                }
                for k in 0..n {
                    let mp = a[(p, k)];
                    let mq = a[(q, k)];
                    a[(p, k)] = jpp.conj() * mp + jqp.conj() * mq;
                    a[(q, k)] = jpq.conj() * mp + jqq.conj() * mq;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)].im = 0.0;
                a[(q, q)].im = 0.0;
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|x, y| a[(*y, *y)].re.total_cmp(&a[(*x, *x)].re));
    let values = order.iter().map(|i| a[(*i, *i)].re).collect();
    let cols: Vec<Vec<C64>> = order.iter().map(|i| v.column(*i)).collect();
    Ok(HermitianEigen {
        values,
        vectors: Matrix::from_columns(n, &cols)?,
    })
}
