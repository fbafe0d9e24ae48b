use std::collections::HashMap;

use super::mesh::Mesh;
use crate::error::Result;
use crate::numerics::{householder_lsq_functional, Scalar, SparseOperator};
use crate::{Cplx, SparseCplx, SparseReal};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    ChartArea,
    HyperbolicArea,
}

/// Cotangent stiffness matrix K (Dirichlet energy u^t K u, conformally
/// invariant so chart geometry suffices) and the lumped hyperbolic mass
/// vector, both on dof indices.
pub fn stiffness_mass(mesh: &Mesh) -> (SparseReal, Vec<f64>) {
    let nd = mesh.n_dofs();
    let mut trip: Vec<(usize, usize, f64)> = Vec::with_capacity(mesh.tris.len() * 12);
    let mut mass = vec![0.0; nd];
    for (t, tri) in mesh.tris.iter().enumerate() {
        let d = [
            mesh.dof[tri[0] as usize] as usize,
            mesh.dof[tri[1] as usize] as usize,
            mesh.dof[tri[2] as usize] as usize,
        ];
        let z = [
            mesh.verts[tri[0] as usize],
            mesh.verts[tri[1] as usize],
            mesh.verts[tri[2] as usize],
        ];
        let am = mesh.chart_area(t) * Mesh::lambda0(mesh.centroid(t)) / 3.0;
        for k in 0..3 {
            mass[d[k]] += am;
            // Edge opposite corner k, cotangent weight at that corner.
            let (i, j) = ((k + 1) % 3, (k + 2) % 3);
            let v1 = z[i] - z[k];
            let v2 = z[j] - z[k];
            let cross = (v1 * v2.conj()).im.abs();
            let dot = (v1 * v2.conj()).re;
            let w = 0.5 * dot / cross;
            trip.push((d[i], d[i], w));
            trip.push((d[j], d[j], w));
            trip.push((d[i], d[j], -w));
            trip.push((d[j], d[i], -w));
        }
    }
    (SparseOperator::from_triplets(nd, nd, &trip), mass)
}

/// Hyperbolic Laplace operator -M^-1 K on dof vectors, together with the
/// lumped mass vector in whose inner product it is self-adjoint.
pub fn laplacian(mesh: &Mesh) -> (SparseReal, Vec<f64>) {
    let (k, mass) = stiffness_mass(mesh);
    let nd = mesh.n_dofs();
    let mut trip = k.to_triplets();
    for (r, _, v) in trip.iter_mut() {
        *v = -*v / mass[*r];
    }
    (SparseOperator::from_triplets(nd, nd, &trip), mass)
}

/// First-derivative operators d/dz and d/dzbar on dof vectors, from a
/// weighted quadratic fit over each vertex's one-ring (rings of boundary
/// and corner classes are assembled by transporting every copy's chart
/// neighbourhood to the representative).
pub fn derivative_operators(mesh: &Mesh) -> Result<(SparseCplx, SparseCplx)> {
    let nd = mesh.n_dofs();
    let mut trip_z: Vec<(usize, usize, Cplx)> = Vec::new();
    let mut trip_zb: Vec<(usize, usize, Cplx)> = Vec::new();
    for d in 0..nd {
        let r = mesh.roots[d] as usize;
        let z0 = mesh.verts[r];
        let tr_inv = mesh.transport[r].inverse();
        // Distinct transported sample points (dof, position).
        let mut samples: Vec<(usize, Cplx)> = Vec::new();
        let mut seen: HashMap<(i64, i64), ()> = HashMap::new();
        for &i in &mesh.copies[d] {
            let s = tr_inv.compose(&mesh.transport[i as usize]);
            debug_assert!((s.apply(mesh.verts[i as usize]) - z0).norm() < 1e-8);
            for &nb in &mesh.adj[i as usize] {
                let zeta = s.apply(mesh.verts[nb as usize]);
                let key = (
                    (zeta.re * 1e9).round() as i64,
                    (zeta.im * 1e9).round() as i64,
                );
                if seen.insert(key, ()).is_some() {
                    continue;
                }
                samples.push((mesh.dof[nb as usize] as usize, zeta));
            }
        }
        let m = samples.len();
        assert!(m >= 5, "one-ring of dof {d} has only {m} samples");
        let mut h = 0.0;
        for &(_, zeta) in &samples {
            h += (zeta - z0).norm();
        }
        h /= m as f64;
        // Model f(zeta) - f(z0) = a s + b sbar + quadratics, s = (zeta-z0)/h.
        let mut a = Vec::with_capacity(m * 5);
        let mut ws = Vec::with_capacity(m);
        for &(_, zeta) in &samples {
            let s = (zeta - z0) / h;
            let sb = s.conj();
            let w = 1.0 / (1.0 + s.norm().powi(3));
            ws.push(w);
            for c in [s, sb, s * s, s * sb, sb * sb] {
                a.push(c * w);
            }
        }
        for (coeff, trip) in [(0usize, &mut trip_z), (1usize, &mut trip_zb)] {
            let f = householder_lsq_functional(&a, m, 5, coeff)?;
            let mut acc: HashMap<usize, Cplx> = HashMap::new();
            let mut tot = Cplx::new(0.0, 0.0);
            for (j, &(dj, _)) in samples.iter().enumerate() {
                let val = f[j] * ws[j] / h;
                *acc.entry(dj).or_insert(Cplx::new(0.0, 0.0)) += val;
                tot += val;
            }
            *acc.entry(d).or_insert(Cplx::new(0.0, 0.0)) -= tot;
            for (dj, val) in acc {
                trip.push((d, dj, val));
            }
        }
    }
    Ok((
        SparseOperator::from_triplets(nd, nd, &trip_z),
        SparseOperator::from_triplets(nd, nd, &trip_zb),
    ))
}

/// Integral of a function given by values at chart vertices, by the
/// barycentric midpoint rule per triangle. Exact for piecewise-linear
/// integrands against the chart area measure.
pub fn integrate<T: Scalar<R = f64>>(mesh: &Mesh, values: &[T], measure: Measure) -> T {
    assert_eq!(values.len(), mesh.n_verts());
    let mut total = T::zero();
    for (t, tri) in mesh.tris.iter().enumerate() {
        let mean = (values[tri[0] as usize] + values[tri[1] as usize] + values[tri[2] as usize])
            .scale(1.0 / 3.0);
        let w = match measure {
            Measure::ChartArea => mesh.chart_area(t),
            Measure::HyperbolicArea => mesh.chart_area(t) * Mesh::lambda0(mesh.centroid(t)),
        };
        total += mean.scale(w);
    }
    total
}
