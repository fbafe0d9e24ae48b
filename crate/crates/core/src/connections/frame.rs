use num_traits::Zero;

use crate::error::Result;
use crate::numerics::householder_lsq_functional;
use crate::surface::Mesh;
use crate::wang::{residual_g, AffineSphereData, WangOps};
use crate::{cplx, Cplx, Error, SparseCplx};

pub type Mat3 = [[Cplx; 3]; 3];

pub(crate) fn mat_zero() -> Mat3 {
    [[Cplx::zero(); 3]; 3]
}

pub(crate) fn mat_id() -> Mat3 {
    let mut m = mat_zero();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = cplx(1.0, 0.0);
    }
    m
}

pub(crate) fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut m = mat_zero();
    for i in 0..3 {
        for k in 0..3 {
            let aik = a[i][k];
            for j in 0..3 {
                m[i][j] += aik * b[k][j];
            }
        }
    }
    m
}

pub(crate) fn mat_add(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut m = *a;
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] += b[i][j];
        }
    }
    m
}

pub(crate) fn mat_sub(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut m = *a;
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] -= b[i][j];
        }
    }
    m
}

pub(crate) fn mat_scale(a: &Mat3, s: Cplx) -> Mat3 {
    let mut m = *a;
    for row in &mut m {
        for v in row {
            *v *= s;
        }
    }
    m
}

/// Frobenius norm.
pub(crate) fn mat_norm(a: &Mat3) -> f64 {
    a.iter()
        .flatten()
        .map(|v| v.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn mat_det(a: &Mat3) -> Cplx {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

pub(crate) fn mat_trace(a: &Mat3) -> Cplx {
    a[0][0] + a[1][1] + a[2][2]
}

/// Inverse by the adjugate; adequate for the well-conditioned denominators
/// arising in the scaled Pade approximant.
pub(crate) fn mat_inv(a: &Mat3) -> Result<Mat3> {
    let det = mat_det(a);
    if det.norm() < 1e-300 {
        return Err(Error::SingularOperator("3x3 inverse of a singular matrix".into()));
    }
    let mut adj = mat_zero();
    for i in 0..3 {
        for j in 0..3 {
            let r = [(i + 1) % 3, (i + 2) % 3];
            let c = [(j + 1) % 3, (j + 2) % 3];
            // Transposed cofactor.
            adj[j][i] = (a[r[0]][c[0]] * a[r[1]][c[1]] - a[r[0]][c[1]] * a[r[1]][c[0]]) / det;
        }
    }
    Ok(adj)
}

/// Matrix exponential by scaling-and-squaring with a degree-6 diagonal Pade
/// approximant.
pub(crate) fn expm3(a: &Mat3) -> Mat3 {
    let norm = mat_norm(a);
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let b = mat_scale(a, cplx(0.5f64.powi(s as i32), 0.0));
    // c_k = (12-k)! 6! / (12! k! (6-k)!) for the (6,6) approximant.
    let c = [
        1.0,
        0.5,
        5.0 / 44.0,
        1.0 / 66.0,
        1.0 / 792.0,
        1.0 / 15840.0,
        1.0 / 665280.0,
    ];
    let mut num = mat_scale(&mat_id(), cplx(c[0], 0.0));
    let mut den = num;
    let mut pow = mat_id();
    for (k, &ck) in c.iter().enumerate().skip(1) {
        pow = mat_mul(&pow, &b);
        let term = mat_scale(&pow, cplx(ck, 0.0));
        num = mat_add(&num, &term);
        if k % 2 == 0 {
            den = mat_add(&den, &term);
        } else {
            den = mat_sub(&den, &term);
        }
    }
    let mut r = mat_mul(&mat_inv(&den).expect("Pade denominator is singular"), &num);
    for _ in 0..s {
        r = mat_mul(&r, &r);
    }
    r
}

/// Connection matrices D = d + A_z dz + A_zbar dzbar stored per chart vertex
/// in the frame (dz, 1, 1/dz). Values at identified copies of a dof differ
/// by the frame cocycle diag(1/T', 1, T') and the 1-form component change,
/// both inherited from the cocycles of the scalar data, so the matrices are
/// assembled per vertex rather than per dof.
#[derive(Debug, Clone)]
pub struct DiscreteConnection {
    pub mesh_checksum: u64,
    pub a_z: Vec<Mat3>,
    pub a_zb: Vec<Mat3>,
    /// Per-vertex frame factor T_i'(z_i) of the K + O + K^-1 frame relative
    /// to the dof representative; a crossing from copy p to copy p' changes
    /// section components by diag(c_p'/c_p, 1, c_p/c_p'). All ones for a
    /// connection living on the trivial (unidentified) bundle.
    pub frame_cocycle: Vec<Cplx>,
}

pub(crate) fn mesh_frame_cocycle(mesh: &Mesh) -> Vec<Cplx> {
    (0..mesh.n_verts())
        .map(|i| mesh.transport[i].deriv(mesh.verts[i]))
        .collect()
}

/// Per-vertex chart values of the scalar ingredients shared by the three
/// connection forms.
pub(crate) struct ChartScalars {
    pub lam0: f64,
    pub lam: Cplx,
    /// d/dz log lambda and d/dzbar log lambda.
    pub dlam_z: Cplx,
    pub dlam_zb: Cplx,
    /// d/dz log lambda0 and d/dzbar log lambda0 (analytic).
    pub dlam0_z: Cplx,
    pub dlam0_zb: Cplx,
    /// Chart coefficients of the cubic data.
    pub q: Cplx,
    pub qb: Cplx,
}

pub(crate) fn chart_scalars(
    sigma: &AffineSphereData,
    mesh: &Mesh,
    derivs: &(SparseCplx, SparseCplx),
) -> Result<Vec<ChartScalars>> {
    let nd = mesh.n_dofs();
    if sigma.mesh_checksum != mesh.checksum()
        || sigma.u.len() != nd
        || derivs.0.ncols() != nd
        || derivs.1.ncols() != nd
    {
        return Err(Error::MeshMismatch);
    }
    let du_z = derivs.0.apply(&sigma.u);
    let du_zb = derivs.1.apply(&sigma.u);
    // Scalar factor of the metric density relative to the hyperbolic one;
    // an identification-invariant function, so its chart derivatives come
    // from the dof operators directly.
    let logr: Vec<Cplx> = (0..nd)
        .map(|d| {
            let l0 = Mesh::lambda0(mesh.verts[mesh.roots[d] as usize]);
            (sigma.lambda_base[d] / l0).ln()
        })
        .collect();
    let dlr_z = derivs.0.apply(&logr);
    let dlr_zb = derivs.1.apply(&logr);

    let mut out = Vec::with_capacity(mesh.n_verts());
    for i in 0..mesh.n_verts() {
        let z = mesh.verts[i];
        let d = mesh.dof[i] as usize;
        let ti = mesh.transport[i].deriv(z);
        let lam0 = Mesh::lambda0(z);
        let denom = 1.0 - z.norm_sqr();
        let dlam0_z = 2.0 * z.conj() / denom;
        let dlam0_zb = 2.0 * z / denom;
        let lam = logr[d].exp() * (2.0 * sigma.u[d]).exp() * lam0;
        out.push(ChartScalars {
            lam0,
            lam,
            dlam_z: (2.0 * du_z[d] + dlr_z[d]) * ti + dlam0_z,
            dlam_zb: (2.0 * du_zb[d] + dlr_zb[d]) * ti.conj() + dlam0_zb,
            dlam0_z,
            dlam0_zb,
            q: sigma.q1.values[d] * sigma.q1.cocycle(mesh, i),
            qb: sigma.qbar2.values[d] * sigma.qbar2.cocycle(mesh, i),
        });
    }
    Ok(out)
}

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Connection of the affine-sphere state in the frame (dz, 1, 1/dz) of the
/// line decomposition: assembled without checking that the state solves the
/// structure equation, so deliberately broken inputs can be probed for
/// curvature.
pub fn assemble_d_unchecked(
    sigma: &AffineSphereData,
    mesh: &Mesh,
    derivs: &(SparseCplx, SparseCplx),
) -> Result<DiscreteConnection> {
    let cs = chart_scalars(sigma, mesh, derivs)?;
    let zero = Cplx::zero();
    let one = cplx(1.0, 0.0);
    let mut a_z = Vec::with_capacity(cs.len());
    let mut a_zb = Vec::with_capacity(cs.len());
    for s in &cs {
        a_z.push([
            [-s.dlam_z, zero, s.q / SQRT2],
            [one, zero, zero],
            [zero, one, s.dlam_z],
        ]);
        let l2 = s.lam / 2.0;
        a_zb.push([
            [zero, l2, zero],
            [zero, zero, l2],
            [(4.0 / SQRT2) * s.qb / (s.lam * s.lam), zero, zero],
        ]);
    }
    Ok(DiscreteConnection {
        mesh_checksum: mesh.checksum(),
        a_z,
        a_zb,
        frame_cocycle: mesh_frame_cocycle(mesh),
    })
}

/// Connection of a solved state; the structure-equation residual is checked
/// first so that near-flatness is guaranteed.
pub fn assemble_d(
    sigma: &AffineSphereData,
    mesh: &Mesh,
    ops: &WangOps,
    derivs: &(SparseCplx, SparseCplx),
) -> Result<DiscreteConnection> {
    let g = residual_g(sigma, mesh, ops)?;
    let sup = g.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    if sup > 1e-6 {
        return Err(Error::UnsolvedState(sup));
    }
    assemble_d_unchecked(sigma, mesh, derivs)
}

/// Gauge-equivalent form of the same connection in the frame attached to the
/// conjugate structure: corner data swap roles and the holomorphic and
/// antiholomorphic blocks exchange.
pub fn assemble_d_prime(
    sigma: &AffineSphereData,
    mesh: &Mesh,
    derivs: &(SparseCplx, SparseCplx),
) -> Result<DiscreteConnection> {
    let cs = chart_scalars(sigma, mesh, derivs)?;
    let zero = Cplx::zero();
    let one = cplx(1.0, 0.0);
    let mut a_z = Vec::with_capacity(cs.len());
    let mut a_zb = Vec::with_capacity(cs.len());
    for s in &cs {
        let l2 = s.lam / 2.0;
        a_z.push([
            [zero, l2, zero],
            [zero, zero, l2],
            [(4.0 / SQRT2) * s.q / (s.lam * s.lam), zero, zero],
        ]);
        a_zb.push([
            [-s.dlam_zb, zero, s.qb / SQRT2],
            [one, zero, zero],
            [zero, one, s.dlam_zb],
        ]);
    }
    Ok(DiscreteConnection {
        mesh_checksum: mesh.checksum(),
        a_z,
        a_zb,
        frame_cocycle: mesh_frame_cocycle(mesh),
    })
}

/// The same connection transported onto the fixed hyperbolic-metric bundle:
/// diagonal terms built from lambda0 alone, with the metric ratio appearing
/// in the off-diagonal blocks. Coincides entrywise with the plain form at
/// the hyperbolic point.
pub fn assemble_d_model(
    sigma: &AffineSphereData,
    mesh: &Mesh,
    derivs: &(SparseCplx, SparseCplx),
) -> Result<DiscreteConnection> {
    let cs = chart_scalars(sigma, mesh, derivs)?;
    let zero = Cplx::zero();
    let mut a_z = Vec::with_capacity(cs.len());
    let mut a_zb = Vec::with_capacity(cs.len());
    for s in &cs {
        let ratio = s.lam / s.lam0;
        a_z.push([
            [-s.dlam0_z, zero, s.lam0 * s.lam0 * s.q / (SQRT2 * s.lam * s.lam)],
            [ratio, zero, zero],
            [zero, ratio, s.dlam0_z],
        ]);
        let l02 = cplx(s.lam0 / 2.0, 0.0);
        a_zb.push([
            [s.dlam_zb - s.dlam0_zb, l02, zero],
            [zero, zero, l02],
            [
                (4.0 / SQRT2) * s.qb / (s.lam0 * s.lam0),
                zero,
                s.dlam0_zb - s.dlam_zb,
            ],
        ]);
    }
    Ok(DiscreteConnection {
        mesh_checksum: mesh.checksum(),
        a_z,
        a_zb,
        frame_cocycle: mesh_frame_cocycle(mesh),
    })
}

/// Per-vertex chart gradients of the stored connection matrices, from a
/// local quadratic least-squares fit over the two-ring of each vertex.
/// Vertices on the octagon boundary get one-sided fits; the ring is widened
/// until the fit has enough well-spread samples.
pub(crate) struct ConnectionJet {
    pub a_z_dz: Vec<Mat3>,
    pub a_z_dzb: Vec<Mat3>,
    pub a_zb_dz: Vec<Mat3>,
    pub a_zb_dzb: Vec<Mat3>,
}

fn ring_samples(mesh: &Mesh, v: usize, rings: usize) -> Vec<usize> {
    let mut seen = vec![v];
    let mut frontier = vec![v];
    for _ in 0..rings {
        let mut next = Vec::new();
        for &u in &frontier {
            for &nb in &mesh.adj[u] {
                let nb = nb as usize;
                if !seen.contains(&nb) {
                    seen.push(nb);
                    next.push(nb);
                }
            }
        }
        frontier = next;
    }
    seen.sort_unstable();
    seen
}

pub(crate) fn connection_jet(conn: &DiscreteConnection, mesh: &Mesh) -> Result<ConnectionJet> {
    if conn.mesh_checksum != mesh.checksum() || conn.a_z.len() != mesh.n_verts() {
        return Err(Error::MeshMismatch);
    }
    let n = mesh.n_verts();
    let mut jet = ConnectionJet {
        a_z_dz: vec![mat_zero(); n],
        a_z_dzb: vec![mat_zero(); n],
        a_zb_dz: vec![mat_zero(); n],
        a_zb_dzb: vec![mat_zero(); n],
    };
    for v in 0..n {
        let mut rings = 2;
        let (fx, fy, samples, h) = loop {
            let samples = ring_samples(mesh, v, rings);
            let m = samples.len();
            if m < 6 {
                if samples.len() == ring_samples(mesh, v, rings + 1).len() {
                    return Err(Error::SingularOperator(
                        "too few samples for a quadratic gradient fit".into(),
                    ));
                }
                rings += 1;
                continue;
            }
            if m >= 8 || rings >= 4 {
                let zv = mesh.verts[v];
                let h = samples
                    .iter()
                    .map(|&s| (mesh.verts[s] - zv).norm())
                    .fold(0.0f64, f64::max)
                    .max(f64::MIN_POSITIVE);
                let mut a = Vec::with_capacity(m * 6);
                for &s in &samples {
                    let d = (mesh.verts[s] - zv) / h;
                    let (x, y) = (d.re, d.im);
                    for t in [1.0, x, y, x * x, x * y, y * y] {
                        a.push(cplx(t, 0.0));
                    }
                }
                match (
                    householder_lsq_functional(&a, m, 6, 1),
                    householder_lsq_functional(&a, m, 6, 2),
                ) {
                    (Ok(fx), Ok(fy)) => break (fx, fy, samples, h),
                    _ if rings < 4 => {}
                    (Err(e), _) | (_, Err(e)) => return Err(e),
                }
            }
            rings += 1;
        };
        // d/dz = (dx - i dy) / 2, d/dzbar = (dx + i dy) / 2, with the fit
        // coefficients carrying a 1/h normalization.
        for r in 0..3 {
            for c in 0..3 {
                for (field, out_z, out_zb) in [
                    (&conn.a_z, &mut jet.a_z_dz, &mut jet.a_z_dzb),
                    (&conn.a_zb, &mut jet.a_zb_dz, &mut jet.a_zb_dzb),
                ] {
                    let mut gx = Cplx::zero();
                    let mut gy = Cplx::zero();
                    for (k, &s) in samples.iter().enumerate() {
                        gx += fx[k] * field[s][r][c];
                        gy += fy[k] * field[s][r][c];
                    }
                    gx /= h;
                    gy /= h;
                    let im = cplx(0.0, 1.0);
                    out_z[v][r][c] = 0.5 * (gx - im * gy);
                    out_zb[v][r][c] = 0.5 * (gx + im * gy);
                }
            }
        }
    }
    Ok(jet)
}

/// Sub-steps per edge for the composite midpoint transport. The connection
/// matrices are interpolated along the edge by cubic Hermite polynomials
/// built from the endpoint values and the jet gradients, so the per-edge
/// line integral is fourth-order accurate and the remaining splitting error
/// O((h/m)^3) per step is pushed below it.
const TRANSPORT_STEPS: usize = 8;

pub(crate) fn edge_transport(
    conn: &DiscreteConnection,
    jet: &ConnectionJet,
    mesh: &Mesh,
    i: usize,
    j: usize,
) -> Mat3 {
    let dz = mesh.verts[j] - mesh.verts[i];
    let dzb = dz.conj();
    // Derivatives with respect to the edge parameter w in [0, 1].
    let deriv = |gz: &Mat3, gzb: &Mat3| mat_add(&mat_scale(gz, dz), &mat_scale(gzb, dzb));
    let dz_i = deriv(&jet.a_z_dz[i], &jet.a_z_dzb[i]);
    let dz_j = deriv(&jet.a_z_dz[j], &jet.a_z_dzb[j]);
    let dzb_i = deriv(&jet.a_zb_dz[i], &jet.a_zb_dzb[i]);
    let dzb_j = deriv(&jet.a_zb_dz[j], &jet.a_zb_dzb[j]);
    let hermite = |p0: &Mat3, p1: &Mat3, m0: &Mat3, m1: &Mat3, w: f64| {
        let w2 = w * w;
        let w3 = w2 * w;
        let h00 = 2.0 * w3 - 3.0 * w2 + 1.0;
        let h10 = w3 - 2.0 * w2 + w;
        let h01 = -2.0 * w3 + 3.0 * w2;
        let h11 = w3 - w2;
        mat_add(
            &mat_add(
                &mat_scale(p0, cplx(h00, 0.0)),
                &mat_scale(m0, cplx(h10, 0.0)),
            ),
            &mat_add(
                &mat_scale(p1, cplx(h01, 0.0)),
                &mat_scale(m1, cplx(h11, 0.0)),
            ),
        )
    };
    let step = dz / TRANSPORT_STEPS as f64;
    let mut t = mat_id();
    for s in 0..TRANSPORT_STEPS {
        let w = (s as f64 + 0.5) / TRANSPORT_STEPS as f64;
        let az = hermite(&conn.a_z[i], &conn.a_z[j], &dz_i, &dz_j, w);
        let azb = hermite(&conn.a_zb[i], &conn.a_zb[j], &dzb_i, &dzb_j, w);
        let gen = mat_add(&mat_scale(&az, step), &mat_scale(&azb, step.conj()));
        t = mat_mul(&expm3(&mat_scale(&gen, cplx(-1.0, 0.0))), &t);
    }
    t
}
