//! Flat SL(3) connections of affine-sphere states on the identified
//! octagon: per-vertex assembly in the (dz, 1, 1/dz) frame, gauge-related
//! alternate forms, per-triangle curvature, holonomy along the surface-group
//! generators, and tangent representatives for the symplectic pairing.

mod curvature;
mod frame;
mod holonomy;
mod tangent;

pub use curvature::curvature_residual;
pub use frame::{
    assemble_d, assemble_d_model, assemble_d_prime, assemble_d_unchecked, DiscreteConnection,
    Mat3,
};
pub use holonomy::{holonomy, irr_embed, relation_word, sl2_word, HolonomyMatrix};
pub use tangent::{
    closedness_residual, fuchsian_tangent, path_tangent, FuchsianDirection, TangentRep,
};

pub(crate) use frame::{mat_add, mat_mul, mat_norm, mat_scale, mat_sub, mat_trace};
