//! Least-squares subspace model fitting.
//!
//! Given a finite data set `F` in `C^d`, the crate minimizes
//! `e(F, V) = sum_f min_j d^2(f, V_j)` over
//!
//! * single subspaces of bounded dimension ([`approximation::best_subspace`]),
//! * unions of `l` such subspaces ([`union`]), with an exhaustive partition
//!   oracle and a K-subspaces heuristic,
//! * subspaces of `C^{pq}` invariant under the cyclic block shift
//!   ([`fiber`]), solved fiber by fiber after a unitary DFT.
//!
//! [`lab`] builds numerical evidence for attainment and non-attainment of
//! the infimum on explicitly parameterized subspace families, and [`cli`]
//! drives everything from the `subfit` binary.

pub mod approximation;
pub mod cli;
pub mod error;
pub mod fiber;
pub mod lab;
pub mod linalg;
pub mod random;
pub mod union;

pub use approximation::{DataSet, Subspace};
pub use error::{Error, Result};
pub use linalg::{Matrix, Projector, C64};
