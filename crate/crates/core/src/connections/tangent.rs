use num_traits::Zero;

use super::frame::{
    mat_add, mat_mul, mat_norm, mat_scale, mat_sub, mat_zero, DiscreteConnection, Mat3,
};
use crate::differentials::{Chirality, DifferentialField};
use crate::error::Result;
use crate::numerics::{cg_hermitian, SparseOperator};
use crate::surface::Mesh;
use crate::wang::WangOps;
use crate::{cplx, Cplx, Error, SparseCplx, SparseReal};

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// End(E)-valued 1-form P dz + R dzbar stored per chart vertex, a tangent
/// vector to the space of flat connections.
#[derive(Debug, Clone)]
pub struct TangentRep {
    pub mesh_checksum: u64,
    pub p: Vec<Mat3>,
    pub r: Vec<Mat3>,
}

impl TangentRep {
    pub fn zero(mesh: &Mesh) -> Self {
        TangentRep {
            mesh_checksum: mesh.checksum(),
            p: vec![mat_zero(); mesh.n_verts()],
            r: vec![mat_zero(); mesh.n_verts()],
        }
    }
}

/// Tangent directions at the hyperbolic base point. The coefficient fields
/// are weight-2 or weight-3 holomorphic-type dz data; the directions tagged
/// `Bar` enter through the conjugated coefficient.
pub enum FuchsianDirection<'a> {
    /// Variation of the first conformal-structure factor, identified with
    /// the conjugate of a quadratic coefficient psi.
    QuadBar(&'a DifferentialField),
    /// Variation of the second conformal-structure factor, identified with
    /// a quadratic coefficient phi.
    Quad(&'a DifferentialField),
    /// Variation of the first cubic differential, coefficient alpha.
    CubicOne(&'a DifferentialField),
    /// Variation of the second cubic differential, entering through the
    /// conjugate of the coefficient beta.
    CubicTwo(&'a DifferentialField),
}

/// Solves the linearized structure equation (Laplacian - 2) udot = rhs at
/// the hyperbolic point through the equivalent positive system
/// (K + 2M) udot = -M rhs.
fn solve_linearized(mesh: &Mesh, ops: &WangOps, rhs: &[Cplx]) -> Result<Vec<Cplx>> {
    let nd = mesh.n_dofs();
    let mut trip = ops.stiffness.to_triplets();
    for (d, &m) in ops.mass.iter().enumerate() {
        trip.push((d, d, 2.0 * m));
    }
    let a: SparseReal = SparseOperator::from_triplets(nd, nd, &trip);
    let bre: Vec<f64> = (0..nd).map(|d| -ops.mass[d] * rhs[d].re).collect();
    let bim: Vec<f64> = (0..nd).map(|d| -ops.mass[d] * rhs[d].im).collect();
    let xre = cg_hermitian(&a, &bre, 1e-13, 20 * nd).map_err(|e| {
        Error::SingularLinearization(format!("linearized tangent solve failed: {e}"))
    })?;
    let xim = cg_hermitian(&a, &bim, 1e-13, 20 * nd).map_err(|e| {
        Error::SingularLinearization(format!("linearized tangent solve failed: {e}"))
    })?;
    Ok(xre.into_iter().zip(xim).map(|(r, i)| cplx(r, i)).collect())
}

/// Closed-form tangent representative at the hyperbolic base point. For the
/// cubic directions the auxiliary scalar variation solves the linearized
/// structure equation; its right side vanishes identically here because the
/// metric pairing is bilinear and the opposite cubic field is zero, and the
/// solved variation is asserted to vanish rather than assumed.
pub fn fuchsian_tangent(
    direction: &FuchsianDirection,
    mesh: &Mesh,
    ops: &WangOps,
    derivs: &(SparseCplx, SparseCplx),
) -> Result<TangentRep> {
    let (field, want_weight) = match direction {
        FuchsianDirection::QuadBar(f) | FuchsianDirection::Quad(f) => (*f, 2),
        FuchsianDirection::CubicOne(f) | FuchsianDirection::CubicTwo(f) => (*f, 3),
    };
    if field.mesh_checksum != mesh.checksum() {
        return Err(Error::MeshMismatch);
    }
    if field.weight != want_weight || field.chirality != Chirality::Dz {
        return Err(Error::InvalidInput(format!(
            "direction field must be a weight-{want_weight} dz coefficient"
        )));
    }
    let nd = mesh.n_dofs();
    let cubic = want_weight == 3;
    let (udot, dudot) = if cubic {
        // d/dt of the structure-equation residual along (t Q, 0) or (0, t Q)
        // at the hyperbolic point: (1/4) d/dt h = 0 by bilinearity, since h
        // pairs the varying field against the vanishing opposite one.
        let rhs = vec![Cplx::zero(); nd];
        let udot = solve_linearized(mesh, ops, &rhs)?;
        let sup = udot.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
        assert!(
            sup <= 1e-12,
            "scalar variation should vanish at the hyperbolic point: {sup:e}"
        );
        let dudot = derivs.0.apply(&udot);
        (udot, dudot)
    } else {
        (Vec::new(), Vec::new())
    };

    let mut rep = TangentRep::zero(mesh);
    for i in 0..mesh.n_verts() {
        let z = mesh.verts[i];
        let d = mesh.dof[i] as usize;
        let lam0 = Mesh::lambda0(z);
        let chart = field.values[d] * field.cocycle(mesh, i);
        let p = &mut rep.p[i];
        let r = &mut rep.r[i];
        match direction {
            FuchsianDirection::QuadBar(_) => {
                let v = chart.conj() / lam0;
                r[1][0] = v;
                r[2][1] = v;
            }
            FuchsianDirection::Quad(_) => {
                let v = chart / 2.0;
                p[0][1] = v;
                p[1][2] = v;
            }
            FuchsianDirection::CubicOne(_) => {
                let du = dudot[d] * mesh.transport[i].deriv(z);
                p[0][0] = -2.0 * du;
                p[2][2] = 2.0 * du;
                p[0][2] = chart / SQRT2;
                let v = udot[d] * lam0;
                r[0][1] = v;
                r[1][2] = v;
            }
            FuchsianDirection::CubicTwo(_) => {
                let du = dudot[d] * mesh.transport[i].deriv(z);
                p[0][0] = -2.0 * du;
                p[2][2] = 2.0 * du;
                let v = udot[d] * lam0;
                r[0][1] = v;
                r[1][2] = v;
                r[2][0] = (4.0 / SQRT2) * chart.conj() / (lam0 * lam0);
            }
        }
    }
    Ok(rep)
}

/// Central-difference tangent (A_plus - A_minus) / (2 dt) of two assembled
/// connections along a solver path.
pub fn path_tangent(
    plus: &DiscreteConnection,
    minus: &DiscreteConnection,
    dt: f64,
) -> Result<TangentRep> {
    if plus.mesh_checksum != minus.mesh_checksum || plus.a_z.len() != minus.a_z.len() {
        return Err(Error::MeshMismatch);
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!("path tangent needs dt > 0, got {dt}")));
    }
    let s = cplx(0.5 / dt, 0.0);
    Ok(TangentRep {
        mesh_checksum: plus.mesh_checksum,
        p: plus
            .a_z
            .iter()
            .zip(&minus.a_z)
            .map(|(a, b)| mat_scale(&mat_sub(a, b), s))
            .collect(),
        r: plus
            .a_zb
            .iter()
            .zip(&minus.a_zb)
            .map(|(a, b)| mat_scale(&mat_sub(a, b), s))
            .collect(),
    })
}

/// Max over triangles of the covariant-exterior-derivative defect
/// dR/dz - dP/dzbar + [A_z, R] + [P, A_zbar], with the entrywise derivatives
/// of the linear interpolant and the commutators at corner means.
pub fn closedness_residual(
    rep: &TangentRep,
    conn: &DiscreteConnection,
    mesh: &Mesh,
) -> Result<f64> {
    if rep.mesh_checksum != mesh.checksum() || conn.mesh_checksum != mesh.checksum() {
        return Err(Error::MeshMismatch);
    }
    let third = cplx(1.0 / 3.0, 0.0);
    let mut worst = 0.0f64;
    for tri in &mesh.tris {
        let [a, b, c] = [tri[0] as usize, tri[1] as usize, tri[2] as usize];
        let (za, zb, zc) = (mesh.verts[a], mesh.verts[b], mesh.verts[c]);
        // Gradient weights of the linear interpolant: f = sum f_i w_i with
        // dz w_i obtained from the inverted corner-difference system.
        let (e1, e2) = (zb - za, zc - za);
        let det = e1 * e2.conj() - e2 * e1.conj();
        // dz f = (f_b - f_a) dz w_b + (f_c - f_a) dz w_c, and similarly for
        // dzbar; weights from inverting [e1 e1bar; e2 e2bar].
        let wz = |f_a: &Mat3, f_b: &Mat3, f_c: &Mat3| -> Mat3 {
            let db = mat_sub(f_b, f_a);
            let dc = mat_sub(f_c, f_a);
            mat_scale(
                &mat_sub(&mat_scale(&db, e2.conj()), &mat_scale(&dc, e1.conj())),
                1.0 / det,
            )
        };
        let wzb = |f_a: &Mat3, f_b: &Mat3, f_c: &Mat3| -> Mat3 {
            let db = mat_sub(f_b, f_a);
            let dc = mat_sub(f_c, f_a);
            mat_scale(&mat_sub(&mat_scale(&dc, e1), &mat_scale(&db, e2)), 1.0 / det)
        };
        let dr_z = wz(&rep.r[a], &rep.r[b], &rep.r[c]);
        let dp_zb = wzb(&rep.p[a], &rep.p[b], &rep.p[c]);
        let mean = |x: &Mat3, y: &Mat3, w: &Mat3| mat_scale(&mat_add(&mat_add(x, y), w), third);
        let az = mean(&conn.a_z[a], &conn.a_z[b], &conn.a_z[c]);
        let azb = mean(&conn.a_zb[a], &conn.a_zb[b], &conn.a_zb[c]);
        let pm = mean(&rep.p[a], &rep.p[b], &rep.p[c]);
        let rm = mean(&rep.r[a], &rep.r[b], &rep.r[c]);
        let comm1 = mat_sub(&mat_mul(&az, &rm), &mat_mul(&rm, &az));
        let comm2 = mat_sub(&mat_mul(&pm, &azb), &mat_mul(&azb, &pm));
        let defect = mat_add(&mat_add(&mat_sub(&dr_z, &dp_zb), &comm1), &comm2);
        worst = worst.max(mat_norm(&defect));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connections::frame::mat_trace;
    use crate::surface::{build_bolza_domain, build_mesh, derivative_operators};

    #[test]
    fn zero_direction_gives_the_zero_representative() {
        let dom = build_bolza_domain().unwrap();
        let mesh = build_mesh(&dom, 1).unwrap();
        let ops = WangOps::new(&mesh);
        let derivs = derivative_operators(&mesh).unwrap();
        let zero = DifferentialField::zero(3, Chirality::Dz, &mesh);
        let rep =
            fuchsian_tangent(&FuchsianDirection::CubicOne(&zero), &mesh, &ops, &derivs).unwrap();
        for i in 0..mesh.n_verts() {
            assert_eq!(mat_norm(&rep.p[i]), 0.0);
            assert_eq!(mat_norm(&rep.r[i]), 0.0);
        }
    }

    /// Pointwise wedge-trace identities that feed the symplectic pairing:
    /// tr(D1 ^ D2) has dz^dzbar coefficient tr(P1 R2 - P2 R1), which must
    /// collapse to the advertised scalar expressions. Cocycle compatibility
    /// of the coefficients is irrelevant for a per-vertex identity, so
    /// arbitrary values are used.
    #[test]
    fn wedge_traces_reduce_to_the_scalar_integrands() {
        let dom = build_bolza_domain().unwrap();
        let mesh = build_mesh(&dom, 1).unwrap();
        let ops = WangOps::new(&mesh);
        let derivs = derivative_operators(&mesh).unwrap();
        let mut psi = DifferentialField::zero(2, Chirality::Dz, &mesh);
        let mut phi = DifferentialField::zero(2, Chirality::Dz, &mesh);
        let mut alpha = DifferentialField::zero(3, Chirality::Dz, &mesh);
        let mut beta = DifferentialField::zero(3, Chirality::Dz, &mesh);
        for d in 0..mesh.n_dofs() {
            let x = d as f64;
            psi.values[d] = cplx((0.3 * x).sin(), (0.7 * x).cos());
            phi.values[d] = cplx(0.4 - (0.2 * x).cos(), (0.5 * x).sin());
            alpha.values[d] = cplx((0.11 * x).cos(), 0.3 * (0.13 * x).sin());
            beta.values[d] = cplx(0.2 * (0.17 * x).sin(), -(0.19 * x).cos());
        }
        let r7 = fuchsian_tangent(&FuchsianDirection::QuadBar(&psi), &mesh, &ops, &derivs).unwrap();
        let r8 = fuchsian_tangent(&FuchsianDirection::Quad(&phi), &mesh, &ops, &derivs).unwrap();
        let r9 =
            fuchsian_tangent(&FuchsianDirection::CubicOne(&alpha), &mesh, &ops, &derivs).unwrap();
        let r10 =
            fuchsian_tangent(&FuchsianDirection::CubicTwo(&beta), &mesh, &ops, &derivs).unwrap();
        let wedge = |a: &TangentRep, b: &TangentRep, i: usize| {
            mat_trace(&mat_sub(
                &mat_mul(&a.p[i], &b.r[i]),
                &mat_mul(&b.p[i], &a.r[i]),
            ))
        };
        for i in 0..mesh.n_verts() {
            let lam0 = Mesh::lambda0(mesh.verts[i]);
            let d = mesh.dof[i] as usize;
            let co2 = mesh.transport[i].deriv(mesh.verts[i]).powu(2);
            let co3 = co2 * mesh.transport[i].deriv(mesh.verts[i]);
            let psic = psi.values[d] * co2;
            let phic = phi.values[d] * co2;
            let alc = alpha.values[d] * co3;
            let bec = beta.values[d] * co3;
            // Quadratic pair: -(psibar phi / lam0) after the wedge sign.
            let got = wedge(&r7, &r8, i);
            let want = -psic.conj() * phic / lam0;
            assert!((got - want).norm() < 1e-12 * (1.0 + want.norm()), "at {i}");
            // Cubic pair: 2 alpha betabar / lam0^2.
            let got = wedge(&r9, &r10, i);
            let want = 2.0 * alc * bec.conj() / (lam0 * lam0);
            assert!((got - want).norm() < 1e-12 * (1.0 + want.norm()), "at {i}");
            // Mixed pairs vanish pointwise.
            assert!(wedge(&r7, &r9, i).norm() < 1e-14);
            assert!(wedge(&r7, &r10, i).norm() < 1e-14);
            assert!(wedge(&r8, &r9, i).norm() < 1e-14);
            assert!(wedge(&r8, &r10, i).norm() < 1e-14);
            // Traceless representatives.
            assert!(mat_trace(&r9.p[i]).norm() < 1e-12);
            assert!(mat_trace(&r10.r[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn constant_path_has_zero_tangent() {
        let dom = build_bolza_domain().unwrap();
        let mesh = build_mesh(&dom, 0).unwrap();
        let conn = DiscreteConnection {
            mesh_checksum: mesh.checksum(),
            a_z: vec![mat_zero(); mesh.n_verts()],
            a_zb: vec![mat_zero(); mesh.n_verts()],
            frame_cocycle: vec![cplx(1.0, 0.0); mesh.n_verts()],
        };
        let rep = path_tangent(&conn, &conn, 1e-2).unwrap();
        assert!(rep.p.iter().chain(&rep.r).all(|m| mat_norm(m) == 0.0));
        assert!(path_tangent(&conn, &conn, 0.0).is_err());
    }
}
