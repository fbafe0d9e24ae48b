use std::collections::HashMap;

use super::field::DifferentialField;
use crate::error::Result;
use crate::numerics::{householder_lsq_functional, SparseOperator};
use crate::surface::Mesh;
use crate::{Cplx, Error, SparseCplx};

/// Discrete d-bar system for weight-k coefficient fields: one row per
/// triangle estimating dzbar at the centroid from a cubic least-squares fit
/// over the corners' transported one-rings, with the (gamma')^k cocycle
/// applied to samples reached through identified edges.
#[derive(Debug, Clone)]
pub struct DbarSystem {
    pub weight: u8,
    /// ntris x ndofs, acting on raw per-dof coefficients.
    pub mat: SparseCplx,
    /// Per-row weight sqrt(chart_area * lambda0(centroid)^-k): rows of the
    /// scaled system carry the L2(lambda0^-k) measure.
    pub row_weights: Vec<f64>,
    /// Per-dof weight sqrt(chart_mass * lambda0^(1-k)): columns of the
    /// scaled system act on coefficients measured in the field L2 norm.
    pub col_weights: Vec<f64>,
}

impl DbarSystem {
    /// diag(row_weights) * mat * diag(1/col_weights); its singular vectors
    /// correspond to L2-normalized coefficient fields.
    pub fn scaled(&self) -> SparseCplx {
        let mut trip = self.mat.to_triplets();
        for (r, c, v) in trip.iter_mut() {
            *v *= self.row_weights[*r] / self.col_weights[*c];
        }
        SparseOperator::from_triplets(self.mat.nrows(), self.mat.ncols(), &trip)
    }

    /// Weighted norm of the discrete dzbar of a field, approximating the
    /// L2(lambda0^-k) norm of its antiholomorphic defect.
    pub fn residual(&self, field: &DifferentialField) -> Result<f64> {
        if field.weight != self.weight || field.values.len() != self.mat.ncols() {
            return Err(Error::MeshMismatch);
        }
        let r = self.mat.apply(&field.values);
        Ok(r
            .iter()
            .zip(&self.row_weights)
            .map(|(v, w)| (v * w).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }
}

/// Transported sample points around each chart vertex: (dof, position in the
/// vertex's chart, T_nb'(z_nb), S'(z_nb)) where S carries the neighbour's
/// chart copy into this vertex's chart.
pub(crate) fn vertex_stencils(mesh: &Mesh) -> Vec<Vec<(u32, Cplx, Cplx, Cplx)>> {
    let n = mesh.n_verts();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let ti_inv = mesh.transport[i].inverse();
        let mut pts: Vec<(u32, Cplx, Cplx, Cplx)> = Vec::new();
        let mut seen: HashMap<(i64, i64), ()> = HashMap::new();
        for &j in &mesh.copies[mesh.dof[i] as usize] {
            let s = ti_inv.compose(&mesh.transport[j as usize]);
            for &nb in &mesh.adj[j as usize] {
                let znb = mesh.verts[nb as usize];
                let zeta = s.apply(znb);
                let key = ((zeta.re * 1e9).round() as i64, (zeta.im * 1e9).round() as i64);
                if seen.insert(key, ()).is_some() {
                    continue;
                }
                let dt = mesh.transport[nb as usize].deriv(znb);
                let ds = s.deriv(znb);
                pts.push((mesh.dof[nb as usize], zeta, dt, ds));
            }
        }
        out.push(pts);
    }
    out
}

pub fn dbar_operator(mesh: &Mesh, weight: u8) -> Result<DbarSystem> {
    if weight != 2 && weight != 3 {
        return Err(Error::InvalidInput(format!("weight {weight} not in {{2, 3}}")));
    }
    let stencils = vertex_stencils(mesh);
    let nd = mesh.n_dofs();
    let ntris = mesh.tris.len();
    let kq = weight as i32;
    let mut trip: Vec<(usize, usize, Cplx)> = Vec::new();
    let mut row_weights = Vec::with_capacity(ntris);
    for (t, tri) in mesh.tris.iter().enumerate() {
        let cent = mesh.centroid(t);
        // Union of the three corners' stencils plus the corners themselves.
        let mut pts: Vec<(u32, Cplx, Cplx, Cplx)> = Vec::new();
        let mut seen: HashMap<(i64, i64), ()> = HashMap::new();
        for &v in tri {
            let zv = mesh.verts[v as usize];
            let key = ((zv.re * 1e9).round() as i64, (zv.im * 1e9).round() as i64);
            if seen.insert(key, ()).is_none() {
                let dt = mesh.transport[v as usize].deriv(zv);
                pts.push((mesh.dof[v as usize], zv, dt, Cplx::new(1.0, 0.0)));
            }
            for &(d, zeta, dt, ds) in &stencils[v as usize] {
                let key = ((zeta.re * 1e9).round() as i64, (zeta.im * 1e9).round() as i64);
                if seen.insert(key, ()).is_none() {
                    pts.push((d, zeta, dt, ds));
                }
            }
        }
        let m = pts.len();
        assert!(m >= 10, "triangle {t} stencil has only {m} points");
        let mut dist: Vec<f64> = pts.iter().map(|&(_, z, _, _)| (z - cent).norm()).collect();
        dist.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let h = dist[m / 2];
        // Cubic model in s = (zeta - cent)/h; functional for the sbar
        // coefficient yields dzbar f(cent) after dividing by h.
        let mut a = Vec::with_capacity(m * 10);
        let mut ws = Vec::with_capacity(m);
        for &(_, zeta, _, _) in &pts {
            let s = (zeta - cent) / h;
            let sb = s.conj();
            let w = 1.0 / (1.0 + s.norm().powi(3));
            ws.push(w);
            for mono in [
                Cplx::new(1.0, 0.0),
                s,
                sb,
                s * s,
                s * sb,
                sb * sb,
                s * s * s,
                s * s * sb,
                s * sb * sb,
                sb * sb * sb,
            ] {
                a.push(mono * w);
            }
        }
        let f = householder_lsq_functional(&a, m, 10, 2)?;
        for (j, &(d, _, dt, ds)) in pts.iter().enumerate() {
            let coeff = f[j] * ws[j] / h * dt.powi(kq) * ds.powi(-kq);
            trip.push((t, d as usize, coeff));
        }
        row_weights.push((mesh.chart_area(t) * Mesh::lambda0(cent).powi(-kq)).sqrt());
    }
    // Chart-area lumped mass per dof feeds the column normalization.
    let mut mass = vec![0.0; nd];
    for (t, tri) in mesh.tris.iter().enumerate() {
        let a3 = mesh.chart_area(t) / 3.0;
        for &v in tri {
            mass[mesh.dof[v as usize] as usize] += a3;
        }
    }
    let col_weights: Vec<f64> = (0..nd)
        .map(|d| {
            let lam = Mesh::lambda0(mesh.verts[mesh.roots[d] as usize]);
            (mass[d] * lam.powi(1 - kq)).sqrt()
        })
        .collect();
    Ok(DbarSystem {
        weight,
        mat: SparseOperator::from_triplets(ntris, nd, &trip),
        row_weights,
        col_weights,
    })
}
