//! k-differentials (k = 2, 3) on the identified octagon: transition
//! cocycles, the discrete d-bar operator, numerical holomorphic bases, and
//! the metric pairing of cubic differentials.

mod basis;
mod dbar;
mod field;
mod pairing;

pub(crate) use dbar::vertex_stencils;

pub use basis::{holomorphic_basis, holomorphic_basis_cached, holomorphic_basis_with_gap};
pub use dbar::{dbar_operator, DbarSystem};
pub use field::{conjugate, load_field, save_field, Chirality, DifferentialField};
pub use pairing::{pairing_h, pairing_h_with_constant, PAIRING_CONSTANT};
