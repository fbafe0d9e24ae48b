//! Self-contained linear-algebra kernels: sparse solves, dense symmetric
//! eigendecomposition, and smallest-singular-subspace extraction.

mod dense;
mod jacobi;
mod krylov;
mod scalar;
mod sparse;
mod svd;

pub use dense::{householder_lsq_functional, lu_solve_dense};
pub use jacobi::{eig_hermitian, eig_symmetric, DenseSymmetric};
pub use krylov::{cg_hermitian, gmres, solve_sparse};
pub use scalar::Scalar;
pub use sparse::SparseOperator;
pub use svd::{smallest_singular_subspace, smallest_singular_subspace_with_prec};
