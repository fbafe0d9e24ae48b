//! The Bolza genus-2 surface: fundamental octagon in the Poincaré disk,
//! side-pairing isometries, triangulation with boundary identifications,
//! hyperbolic Laplacian, derivative operators, and quadrature.

mod cache;
mod domain;
mod mesh;
pub mod mobius;
mod ops;

pub use cache::{load_mesh, save_mesh};
pub use domain::{build_bolza_domain, FuchsianDomain};
pub use mesh::{build_mesh, BoundaryEdge, Mesh};
pub use ops::{derivative_operators, integrate, laplacian, stiffness_mass, Measure};
