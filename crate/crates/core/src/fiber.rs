//! Shift-invariant subspace fitting for the cyclic group `Z/pZ` acting on
//! `C^{pq}` by shifting blocks of length `q`.
//!
//! Coordinate `n` sits in block `n / q` at offset `n % q`. A unitary DFT across
//! the block index splits `C^{pq}` into `p` fibers `C^q`, one per character,
//! on which the shift acts by the scalar `exp(-2 pi i j / p)`. An invariant
//! subspace is exactly a choice of one subspace per fiber, and since the
//! transform is an isometry the cost splits into independent per-fiber
//! low-rank problems.

use rayon::prelude::*;

use crate::approximation::{best_subspace, cost_single, DataSet, Subspace};
use crate::error::{Error, Result};
use crate::linalg::{dft_matrix, Matrix, C64};
use crate::union::{FitReport, Model, Partition};

/// `Z/pZ` acting on `C^{pq}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CyclicAction {
    p: usize,
    q: usize,
}

impl CyclicAction {
    pub fn new(p: usize, q: usize) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::invalid("group order and block size must be positive"));
        }
        Ok(CyclicAction { p, q })
    }

    pub fn order(&self) -> usize {
        self.p
    }

    pub fn block_size(&self) -> usize {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.p * self.q
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found,
            });
        }
        Ok(())
    }
}

/// Permutation matrix of the generator: `(S x)_n = x_{(n - q) mod pq}`.
pub fn shift_operator(action: CyclicAction) -> Matrix {
    let d = action.dim();
    let mut s = Matrix::zeros(d, d);
    for n in 0..d {
        s[(n, (n + d - action.q) % d)] = C64::new(1.0, 0.0);
    }
    s
}

/// Per-character components of a data set: `p` data sets of `m` vectors in
/// `C^q`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberData {
    action: CyclicAction,
    fibers: Vec<DataSet>,
}

impl FiberData {
    pub fn new(action: CyclicAction, fibers: Vec<DataSet>) -> Result<Self> {
        if fibers.len() != action.p {
            return Err(Error::DimensionMismatch {
                expected: action.p,
                found: fibers.len(),
            });
        }
        let m = fibers[0].len();
        for f in &fibers {
            if f.dim() != action.q {
                return Err(Error::DimensionMismatch {
                    expected: action.q,
                    found: f.dim(),
                });
            }
            if f.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: f.len(),
                });
            }
        }
        Ok(FiberData { action, fibers })
    }

    pub fn action(&self) -> CyclicAction {
        self.action
    }

    pub fn fibers(&self) -> &[DataSet] {
        &self.fibers
    }
}

fn decompose_vector(f: &[C64], q: usize, w: &Matrix) -> Vec<Vec<C64>> {
    let p = w.rows();
    (0..p)
        .map(|k| {
            let mut out = vec![C64::new(0.0, 0.0); q];
            for j in 0..p {
                let c = w[(k, j)];
                for (o, x) in out.iter_mut().zip(&f[j * q..(j + 1) * q]) {
                    *o += c * x;
                }
            }
            out
        })
        .collect()
}

fn recompose_vector(fibers: &[&[C64]], q: usize, w: &Matrix) -> Vec<C64> {
    let p = w.rows();
    let mut out = vec![C64::new(0.0, 0.0); p * q];
    for j in 0..p {
        let block = &mut out[j * q..(j + 1) * q];
        for (k, fk) in fibers.iter().enumerate() {
            let c = w[(k, j)].conj();
            for (o, x) in block.iter_mut().zip(fk.iter()) {
                *o += c * x;
            }
        }
    }
    out
}

/// Applies the unitary `p`-point DFT across block positions of every vector.
pub fn fiber_decompose(data: &DataSet, action: CyclicAction) -> Result<FiberData> {
    action.check_dim(data.dim())?;
    let w = dft_matrix(action.p)?;
    let mut per_fiber: Vec<Vec<Vec<C64>>> = vec![Vec::with_capacity(data.len()); action.p];
    for f in data.vectors() {
        for (k, comp) in decompose_vector(f, action.q, &w).into_iter().enumerate() {
            per_fiber[k].push(comp);
        }
    }
    let fibers = per_fiber
        .into_iter()
        .map(DataSet::new)
        .collect::<Result<Vec<_>>>()?;
    Ok(FiberData { action, fibers })
}

/// Inverse of [`fiber_decompose`].
pub fn fiber_recompose(fd: &FiberData) -> Result<DataSet> {
    let action = fd.action;
    if fd.fibers.len() != action.p {
        return Err(Error::DimensionMismatch {
            expected: action.p,
            found: fd.fibers.len(),
        });
    }
    let w = dft_matrix(action.p)?;
    let m = fd.fibers[0].len();
    let vectors = (0..m)
        .map(|i| {
            let comps: Vec<&[C64]> = fd.fibers.iter().map(|f| f.vector(i)).collect();
            recompose_vector(&comps, action.q, &w)
        })
        .collect();
    DataSet::new(vectors)
}

/// A shift-invariant subspace stored as one subspace of `C^q` per character.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberedModel {
    action: CyclicAction,
    fibers: Vec<Subspace>,
    pidim_bound: usize,
}

impl FiberedModel {
    pub fn new(action: CyclicAction, fibers: Vec<Subspace>, pidim_bound: usize) -> Result<Self> {
        if fibers.len() != action.p {
            return Err(Error::DimensionMismatch {
                expected: action.p,
                found: fibers.len(),
            });
        }
        for s in &fibers {
            if s.ambient_dim() != action.q {
                return Err(Error::DimensionMismatch {
                    expected: action.q,
                    found: s.ambient_dim(),
                });
            }
            if s.dim() > pidim_bound {
                return Err(Error::invalid(format!(
                    "fiber of dimension {} exceeds bound {pidim_bound}",
                    s.dim()
                )));
            }
        }
        Ok(FiberedModel {
            action,
            fibers,
            pidim_bound,
        })
    }

    pub fn action(&self) -> CyclicAction {
        self.action
    }

    pub fn fibers(&self) -> &[Subspace] {
        &self.fibers
    }

    pub fn pidim_bound(&self) -> usize {
        self.pidim_bound
    }

    /// The invariant subspace of `C^{pq}`: each fiber basis vector lifted
    /// through the inverse DFT with all other fibers zero.
    pub fn assemble(&self) -> Subspace {
        let (p, q) = (self.action.p, self.action.q);
        let w = dft_matrix(p).expect("positive order");
        let zero = vec![C64::new(0.0, 0.0); q];
        let mut cols = Vec::new();
        for (k, s) in self.fibers.iter().enumerate() {
            for b in s.basis().columns() {
                let comps: Vec<&[C64]> = (0..p)
                    .map(|j| if j == k { b.as_slice() } else { zero.as_slice() })
                    .collect();
                cols.push(recompose_vector(&comps, q, &w));
            }
        }
        let basis = Matrix::from_columns(p * q, &cols).expect("consistent lengths");
        Subspace::from_basis(basis).expect("lift of orthonormal fibers is orthonormal")
    }

    /// Cost as the sum of per-fiber costs.
    pub fn cost(&self, data: &DataSet) -> Result<f64> {
        let fd = fiber_decompose(data, self.action)?;
        fd.fibers
            .iter()
            .zip(&self.fibers)
            .map(|(f, s)| cost_single(f, s))
            .sum()
    }
}

/// Minimal number of generators of the assembled subspace under the action:
/// the largest fiber dimension.
pub fn pi_dimension(model: &FiberedModel) -> usize {
    model.fibers.iter().map(Subspace::dim).max().unwrap_or(0)
}

/// Optimal invariant subspace with every fiber of dimension at most `k`.
pub fn best_invariant(
    data: &DataSet,
    action: CyclicAction,
    k: usize,
) -> Result<(FiberedModel, FitReport)> {
    action.check_dim(data.dim())?;
    if k > action.q {
        return Err(Error::invalid(format!(
            "fiber dimension bound {k} exceeds block size {}",
            action.q
        )));
    }
    let fd = fiber_decompose(data, action)?;
    let fits = fd
        .fibers
        .par_iter()
        .map(|f| best_subspace(f, k))
        .collect::<Result<Vec<_>>>()?;
    let cost: f64 = fits.iter().map(|(_, c)| *c).sum();
    let model = FiberedModel::new(action, fits.into_iter().map(|(s, _)| s).collect(), k)?;
    let report = FitReport {
        cost,
        model: Model::Invariant(model.clone()),
        partition: Partition::new(vec![0; data.len()]),
        iterations: 1,
        restarts_used: 0,
        seed: 0,
        converged: true,
        trace: vec![cost],
        warnings: Vec::new(),
    };
    Ok((model, report))
}

/// `max |S P S* - P| <= tol` for the generator `S`.
pub fn is_invariant(v: &Subspace, action: CyclicAction, tol: f64) -> Result<bool> {
    action.check_dim(v.ambient_dim())?;
    Ok(invariance_defect(v, action) <= tol)
}

/// `max |S P S* - P|`.
pub fn invariance_defect(v: &Subspace, action: CyclicAction) -> f64 {
    let s = shift_operator(action);
    let p = v.projector();
    let conj = &(&s * p.matrix()) * &s.adjoint();
    conj.max_abs_diff(p.matrix())
}
