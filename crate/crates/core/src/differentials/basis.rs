use std::path::Path;

use super::dbar::dbar_operator;
use super::field::{load_field, save_field, Chirality, DifferentialField};
use crate::error::Result;
use crate::numerics::{eig_hermitian, smallest_singular_subspace_with_prec};
use crate::surface::Mesh;
use crate::{Cplx, Error};

/// Expected complex kernel dimension of d-bar on K^k at genus 2.
pub(crate) fn kernel_dim(weight: u8) -> usize {
    match weight {
        2 => 3,
        3 => 5,
        _ => unreachable!(),
    }
}

/// Orthonormal basis of discrete holomorphic k-differentials from the
/// smallest singular subspace of the d-bar system, orthonormalized in the
/// L2 pairing weighted by lambda0^(1-k).
pub fn holomorphic_basis(mesh: &Mesh, weight: u8) -> Result<Vec<DifferentialField>> {
    holomorphic_basis_with_gap(mesh, weight).map(|(fields, _)| fields)
}

/// As `holomorphic_basis`, also reporting the singular-value gap ratio
/// separating the numerical kernel from the rest of the spectrum.
pub fn holomorphic_basis_with_gap(
    mesh: &Mesh,
    weight: u8,
) -> Result<(Vec<DifferentialField>, f64)> {
    if weight != 2 && weight != 3 {
        return Err(Error::InvalidInput(format!("weight {weight} not in {{2, 3}}")));
    }
    if mesh.level < 2 {
        return Err(Error::InvalidInput(format!(
            "holomorphic basis needs level >= 2, got {}",
            mesh.level
        )));
    }
    let dim = kernel_dim(weight);
    let sys = dbar_operator(mesh, weight)?;
    let at = sys.scaled();
    let (vecs, sigmas) =
        smallest_singular_subspace_with_prec(&at, dim + 1, None::<&fn(&[Cplx]) -> Vec<Cplx>>, 3000)?;
    let gap = sigmas[dim] / sigmas[dim - 1].max(f64::MIN_POSITIVE);
    if gap < 10.0 {
        return Err(Error::KernelGapFailure { gap });
    }
    let nd = mesh.n_dofs();
    let mut fields: Vec<DifferentialField> = vecs[..dim]
        .iter()
        .map(|y| {
            let values = (0..nd).map(|d| y[d] / sys.col_weights[d]).collect();
            DifferentialField::new(weight, Chirality::Dz, values, mesh)
        })
        .collect();

    // Orthonormalize in the quadrature inner product (Gram^-1/2 mixing).
    let mut gram = vec![Cplx::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            gram[i * dim + j] = fields[i].inner(&fields[j], mesh)?;
        }
    }
    let (evals, evecs) = eig_hermitian(dim, &gram);
    if evals[0] <= 0.0 {
        return Err(Error::DegenerateGram(format!(
            "kernel Gram eigenvalue {:e}",
            evals[0]
        )));
    }
    let mut mixed: Vec<Vec<Cplx>> = vec![vec![Cplx::new(0.0, 0.0); nd]; dim];
    for i in 0..dim {
        // column i of F * Gram^-1/2
        for j in 0..dim {
            let mut b = Cplx::new(0.0, 0.0);
            for l in 0..dim {
                b += evecs[j * dim + l] * evecs[i * dim + l].conj() / evals[l].sqrt();
            }
            for (o, v) in mixed[i].iter_mut().zip(&fields[j].values) {
                *o += b * v;
            }
        }
    }
    for (f, m) in fields.iter_mut().zip(mixed) {
        f.values = m;
    }

    // Fix the overall phase of each field so output is canonical: largest
    // coefficient made real positive.
    for f in &mut fields {
        let mut best = 0usize;
        for (i, v) in f.values.iter().enumerate() {
            if v.norm_sqr() > f.values[best].norm_sqr() {
                best = i;
            }
        }
        let v = f.values[best];
        if v.norm() > 0.0 {
            let ph = v.conj() / v.norm();
            for w in &mut f.values {
                *w *= ph;
            }
        }
    }
    Ok((fields, gap))
}

/// As `holomorphic_basis`, backed by a directory of saved fields keyed by
/// mesh checksum and weight. The kernel computation dominates high-level
/// runs, so repeated invocations (tests, command-line runs) reuse the files;
/// writes go through a temporary name and rename, so concurrent processes
/// at worst recompute.
pub fn holomorphic_basis_cached(
    mesh: &Mesh,
    weight: u8,
    dir: &Path,
) -> Result<Vec<DifferentialField>> {
    let dim = match weight {
        2 | 3 => kernel_dim(weight),
        _ => return Err(Error::InvalidInput(format!("weight {weight} not in {{2, 3}}"))),
    };
    let name = |i: usize| dir.join(format!("basis-k{weight}-{:016x}-{i}.txt", mesh.checksum()));
    let mut cached = Vec::with_capacity(dim);
    for i in 0..dim {
        match load_field(&name(i)) {
            Ok(f) if f.mesh_checksum == mesh.checksum() && f.weight == weight => cached.push(f),
            _ => break,
        }
    }
    if cached.len() == dim {
        return Ok(cached);
    }
    let fields = holomorphic_basis(mesh, weight)?;
    std::fs::create_dir_all(dir)?;
    for (i, f) in fields.iter().enumerate() {
        let tmp = dir.join(format!(
            "basis-k{weight}-{:016x}-{i}.tmp{}",
            mesh.checksum(),
            std::process::id()
        ));
        save_field(f, &tmp)?;
        std::fs::rename(&tmp, name(i))?;
    }
    Ok(fields)
}
