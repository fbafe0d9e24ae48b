//! Numerical laboratory for flat SL(3) connections over a genus-2 hyperbolic
//! surface: Wang-equation solves, holomorphic differential bases, holonomy,
//! and the symplectic pairing with its complex-structure compatibility checks.

pub mod connections;
pub mod differentials;
pub mod error;
pub mod goldman;
pub mod numerics;
pub mod surface;
pub mod wang;

pub use error::Error;

/// Scalar used by all geometry modules.
pub type Real = f64;
/// Complex scalar used by all geometry modules.
pub type Cplx = num_complex::Complex<f64>;
/// Sparse operator over real entries.
pub type SparseReal = numerics::SparseOperator<f64>;
/// Sparse operator over complex entries.
pub type SparseCplx = numerics::SparseOperator<Cplx>;

/// Shorthand constructor for the complex scalar.
pub fn cplx(re: f64, im: f64) -> Cplx {
    Cplx::new(re, im)
}
