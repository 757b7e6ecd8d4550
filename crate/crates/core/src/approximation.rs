//! The least-squares cost of a data set against a subspace, its projector form
//! `Phi_F(Q) = sum <Q f, f>`, optimal single-subspace fitting by truncated
//! SVD, and the decomposition of a positive functional `A -> tr(Sigma A)` into
//! a finite frame.

use crate::error::{Error, Result};
use crate::linalg::{
    complement_projector, hermitian_eigen, inner, is_finite_vector, norm_sq, orthonormalize,
    projector_from_basis, svd, Matrix, Projector, C64, TOL_ORTH, TOL_RANK,
};

/// Relative eigenvalue floor used by [`functional_to_frame`].
pub const TOL_PSD: f64 = 1e-9;

/// A finite, non-empty list of vectors of a common dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct DataSet {
    vectors: Vec<Vec<C64>>,
    pub label: Option<String>,
}

impl DataSet {
    pub fn new(vectors: Vec<Vec<C64>>) -> Result<Self> {
        let d = match vectors.first() {
            Some(v) => v.len(),
            None => return Err(Error::invalid("data set must contain at least one vector")),
        };
        if d == 0 {
            return Err(Error::invalid("vectors must have dimension at least 1"));
        }
        for v in &vectors {
            if v.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: v.len(),
                });
            }
            if !is_finite_vector(v) {
                return Err(Error::NonFinite);
            }
        }
        Ok(DataSet {
            vectors,
            label: None,
        })
    }

    pub fn from_real(rows: &[&[f64]]) -> Result<Self> {
        DataSet::new(rows.iter().map(|r| crate::linalg::real_vector(r)).collect())
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vec<C64>] {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> &[C64] {
        &self.vectors[i]
    }

    /// `alpha = sum ||f||^2`.
    pub fn energy(&self) -> f64 {
        self.vectors.iter().map(|v| norm_sq(v)).sum()
    }

    /// The `d x m` matrix whose columns are the data vectors.
    pub fn data_matrix(&self) -> Matrix {
        Matrix::from_columns(self.dim(), &self.vectors).expect("validated dimensions")
    }

    /// Vectors at `indices`, in that order. `None` for an empty selection.
    pub fn select(&self, indices: &[usize]) -> Option<DataSet> {
        if indices.is_empty() {
            return None;
        }
        Some(DataSet {
            vectors: indices.iter().map(|i| self.vectors[*i].clone()).collect(),
            label: None,
        })
    }
}

/// A subspace of `C^d` held as an orthonormal basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    basis: Matrix,
}

impl Subspace {
    /// Wraps a basis whose columns are orthonormal to [`TOL_ORTH`].
    pub fn from_basis(basis: Matrix) -> Result<Self> {
        if !basis.is_finite() {
            return Err(Error::NonFinite);
        }
        if basis.cols() > basis.rows() {
            return Err(Error::invalid("basis has more columns than the ambient dimension"));
        }
        let defect = basis.orthonormality_defect();
        if defect > TOL_ORTH {
            return Err(Error::NotOrthonormal(defect));
        }
        Ok(Subspace { basis })
    }

    /// Span of arbitrary generators in `C^d`.
    pub fn span(d: usize, generators: &[Vec<C64>]) -> Result<Self> {
        if generators.is_empty() {
            return Ok(Subspace::zero(d));
        }
        let basis = orthonormalize(generators, TOL_RANK)?;
        if basis.rows() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: basis.rows(),
            });
        }
        Ok(Subspace { basis })
    }

    pub fn zero(d: usize) -> Self {
        Subspace {
            basis: Matrix::zeros(d, 0),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn projector(&self) -> Projector {
        projector_from_basis(&self.basis).expect("basis validated at construction")
    }

    /// `P_V f`.
    pub fn project(&self, f: &[C64]) -> Vec<C64> {
        let coeffs = self.basis.apply_adjoint(f);
        self.basis.apply(&coeffs)
    }

    /// `f - P_V f`.
    pub fn residual(&self, f: &[C64]) -> Vec<C64> {
        let p = self.project(f);
        f.iter().zip(&p).map(|(a, b)| a - b).collect()
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                found,
            });
        }
        Ok(())
    }
}

/// `d^2(f, V) = ||f - P_V f||^2`.
pub fn distance_sq(f: &[C64], v: &Subspace) -> Result<f64> {
    v.check_dim(f.len())?;
    Ok(norm_sq(&v.residual(f)).max(0.0))
}

/// `e(F, V) = sum_f d^2(f, V)`.
pub fn cost_single(data: &DataSet, v: &Subspace) -> Result<f64> {
    v.check_dim(data.dim())?;
    Ok(data
        .vectors()
        .iter()
        .map(|f| norm_sq(&v.residual(f)))
        .sum())
}

/// `sum <Q f, f>` with its imaginary part, which vanishes for self-adjoint `Q`
/// up to rounding.
pub fn phi_complex(data: &DataSet, op: &Matrix) -> Result<C64> {
    if op.rows() != data.dim() || op.cols() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            found: op.rows().max(op.cols()),
        });
    }
    Ok(data
        .vectors()
        .iter()
        .map(|f| inner(f, &op.apply(f)))
        .sum())
}

/// `Phi_F(Q) = Re sum <Q f, f>`.
pub fn phi(data: &DataSet, op: &Matrix) -> Result<f64> {
    phi_complex(data, op).map(|z| z.re)
}

/// `Phi_F(I - P_V)`, which equals `cost_single(F, V)`.
pub fn phi_of_complement(data: &DataSet, v: &Subspace) -> Result<f64> {
    v.check_dim(data.dim())?;
    phi(data, complement_projector(&v.projector()).matrix())
}

/// Optimal subspace of dimension at most `rank`: the span of the leading left
/// singular vectors of the data matrix. The returned dimension is
/// `min(rank, numerical rank)`; the cost is the tail `sum_{i > dim} sigma_i^2`.
pub fn best_subspace(data: &DataSet, rank: usize) -> Result<(Subspace, f64)> {
    let d = data.dim();
    if rank > d {
        return Err(Error::invalid(format!(
            "rank {rank} exceeds ambient dimension {d}"
        )));
    }
    let s = svd(&data.data_matrix())?;
    let keep = rank.min(s.numerical_rank(TOL_RANK));
    let cost: f64 = s.singular_values[keep..].iter().map(|x| x * x).sum();
    let cols: Vec<Vec<C64>> = (0..keep).map(|j| s.left_vectors.column(j)).collect();
    let basis = Matrix::from_columns(d, &cols)?;
    Ok((Subspace { basis }, cost))
}

/// The functional `A -> tr(Sigma A)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricFunctional {
    sigma: Matrix,
}

impl SymmetricFunctional {
    pub fn new(sigma: Matrix) -> Result<Self> {
        if !sigma.is_square() {
            return Err(Error::DimensionMismatch {
                expected: sigma.rows(),
                found: sigma.cols(),
            });
        }
        if !sigma.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(SymmetricFunctional { sigma })
    }

    pub fn sigma(&self) -> &Matrix {
        &self.sigma
    }

    pub fn evaluate(&self, a: &Matrix) -> C64 {
        (&self.sigma * a).trace()
    }
}

/// Frame `F = { sqrt(lambda_i) u_i }` over the eigenpairs of the Hermitian part
/// of `Sigma` with `lambda_i > TOL_PSD * ||Sigma||`, so that
/// `tr(Sigma A) = Phi_F(A)` on positive `A`.
///
/// Rejects `Sigma` whose Hermitian part has an eigenvalue below
/// `-TOL_PSD * ||Sigma||`: such a functional is negative somewhere on the
/// positive cone. A zero functional maps to the single zero vector.
pub fn functional_to_frame(s: &SymmetricFunctional) -> Result<DataSet> {
    let d = s.sigma.rows();
    let scale = s.sigma.frobenius_norm();
    let bound = TOL_PSD * scale;
    let eig = hermitian_eigen(&s.sigma.hermitian_part())?;
    if let Some(low) = eig.values.last() {
        if *low < -bound {
            return Err(Error::NotPositive {
                eigenvalue: *low,
                bound,
            });
        }
    }
    let mut frame = Vec::new();
    for (i, lambda) in eig.values.iter().enumerate() {
        if *lambda > bound {
            let w = lambda.sqrt();
            frame.push(eig.vectors.column(i).into_iter().map(|z| z * w).collect());
        }
    }
    if frame.is_empty() {
        frame.push(vec![C64::new(0.0, 0.0); d]);
    }
    DataSet::new(frame)
}
