//! Symplectic pairing of connection tangents, the complex-structure action
//! on left/right tangent pairs, the 16x16 Gram matrix of omega(., J.) at the
//! hyperbolic base point with its signature, and the Lagrangian,
//! compatibility, and involution checks away from it.

use crate::connections::{
    assemble_d, fuchsian_tangent, mat_mul, mat_norm, mat_scale, mat_sub, mat_trace, path_tangent,
    DiscreteConnection, FuchsianDirection, TangentRep,
};
use crate::differentials::{conjugate, DifferentialField};
use crate::error::Result;
use crate::numerics::eig_hermitian;
use crate::surface::{derivative_operators, integrate, Measure, Mesh};
use crate::wang::{solve_wang, Mode, WangOps};
use crate::{cplx, Cplx, Error, SparseCplx};

/// Real tangent vector at the hyperbolic point in left/right form: the left
/// representative carries the dz-side variation data, the right one the
/// conjugate side. The actual tangent is the entrywise sum.
#[derive(Debug, Clone)]
pub struct TangentPair {
    pub left: TangentRep,
    pub right: TangentRep,
}

impl TangentPair {
    pub fn combined(&self) -> TangentRep {
        let add = |a: &[crate::connections::Mat3], b: &[crate::connections::Mat3]| {
            a.iter()
                .zip(b)
                .map(|(x, y)| crate::connections::mat_add(x, y))
                .collect()
        };
        TangentRep {
            mesh_checksum: self.left.mesh_checksum,
            p: add(&self.left.p, &self.right.p),
            r: add(&self.left.r, &self.right.r),
        }
    }
}

/// Integral of tr(D1dot wedge D2dot) over the surface: the dz^dzbar
/// coefficient tr(P1 R2 - P2 R1) integrated against dz^dzbar = -2i dx dy
/// in the chart quadrature. Antisymmetry is an algebraic identity of the
/// integrand, so it holds to the last bit.
pub fn pair_omega(d1: &TangentRep, d2: &TangentRep, mesh: &Mesh) -> Result<Cplx> {
    if d1.mesh_checksum != mesh.checksum() || d2.mesh_checksum != mesh.checksum() {
        return Err(Error::MeshMismatch);
    }
    let vals: Vec<Cplx> = (0..mesh.n_verts())
        .map(|i| {
            mat_trace(&mat_sub(
                &mat_mul(&d1.p[i], &d2.r[i]),
                &mat_mul(&d2.p[i], &d1.r[i]),
            ))
        })
        .collect();
    Ok(cplx(0.0, -2.0) * integrate(mesh, &vals, Measure::ChartArea))
}

/// The complex structure on left/right pairs: (L, R) -> (iL, -iR).
pub fn apply_j(t: &TangentPair) -> TangentPair {
    let i = cplx(0.0, 1.0);
    let scale_all = |reps: &TangentRep, s: Cplx| TangentRep {
        mesh_checksum: reps.mesh_checksum,
        p: reps.p.iter().map(|m| mat_scale(m, s)).collect(),
        r: reps.r.iter().map(|m| mat_scale(m, s)).collect(),
    };
    TangentPair {
        left: scale_all(&t.left, i),
        right: scale_all(&t.right, -i),
    }
}

fn scaled_field(f: &DifferentialField, s: Cplx, mesh: &Mesh) -> DifferentialField {
    let mut g = f.clone();
    for v in &mut g.values {
        *v *= s;
    }
    debug_assert_eq!(g.mesh_checksum, mesh.checksum());
    g
}

/// The 16 real tangent directions at the hyperbolic point spanned by the
/// holomorphic bases: for each complex field, the direction with that
/// coefficient and the one with the coefficient rotated by i. Quadratic
/// coefficient psi gives left data from the conjugate-psi slot and right
/// data from the psi slot; cubic coefficient alpha gives left data from the
/// alpha slot and right data from the conjugate-alpha slot.
pub fn fuchsian_directions(
    mesh: &Mesh,
    ops: &WangOps,
    derivs: &(SparseCplx, SparseCplx),
    basis2: &[DifferentialField],
    basis3: &[DifferentialField],
) -> Result<(Vec<String>, Vec<TangentPair>)> {
    let mut labels = Vec::new();
    let mut pairs = Vec::new();
    let rotations = [(cplx(1.0, 0.0), "re"), (cplx(0.0, 1.0), "im")];
    for (k, b) in basis2.iter().enumerate() {
        for (s, tag) in rotations {
            let f = scaled_field(b, s, mesh);
            let left = fuchsian_tangent(&FuchsianDirection::QuadBar(&f), mesh, ops, derivs)?;
            let right = fuchsian_tangent(&FuchsianDirection::Quad(&f), mesh, ops, derivs)?;
            labels.push(format!("quad{k}-{tag}"));
            pairs.push(TangentPair { left, right });
        }
    }
    for (k, b) in basis3.iter().enumerate() {
        for (s, tag) in rotations {
            let f = scaled_field(b, s, mesh);
            let left = fuchsian_tangent(&FuchsianDirection::CubicOne(&f), mesh, ops, derivs)?;
            let right = fuchsian_tangent(&FuchsianDirection::CubicTwo(&f), mesh, ops, derivs)?;
            labels.push(format!("cubic{k}-{tag}"));
            pairs.push(TangentPair { left, right });
        }
    }
    Ok((labels, pairs))
}

/// Signature computation output: the real Gram matrix of omega(., J.) on
/// the 16 labeled directions, its eigenvalues, the inertia counts, and the
/// residuals backing them.
#[derive(Debug, Clone)]
pub struct GramReport {
    pub mesh_checksum: u64,
    pub labels: Vec<String>,
    /// Row-major 16x16, symmetrized before the eigenvalue solve.
    pub gram: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    pub n_plus: usize,
    pub n_minus: usize,
    pub n_zero: usize,
    /// Max |G - G^T| entry plus the largest imaginary part, absolute.
    pub symmetry_residual: f64,
    /// Max |omega(Ju, Jv) - omega(u, v)| over all direction pairs, relative
    /// to the largest Gram entry.
    pub compatibility_residual: f64,
    /// Max |omega| over pairs drawn from the same factor of the product
    /// structure (all-left or all-right), relative to the largest Gram
    /// entry; both families are isotropic in the continuum.
    pub lagrangian_residual: f64,
}

impl GramReport {
    /// Structured-text form: key-value lines, the full matrix, and one
    /// verdict line per certified claim.
    pub fn to_text(&self) -> String {
        let n = self.labels.len();
        let mut s = String::from("gram report\n");
        s.push_str(&format!("mesh_checksum {:016x}\n", self.mesh_checksum));
        s.push_str(&format!("labels {}\n", self.labels.join(" ")));
        for i in 0..n {
            s.push_str(&format!("row {i}"));
            for j in 0..n {
                s.push_str(&format!(" {:.12e}", self.gram[i * n + j]));
            }
            s.push('\n');
        }
        s.push_str("eigenvalues");
        for e in &self.eigenvalues {
            s.push_str(&format!(" {e:.12e}"));
        }
        s.push('\n');
        s.push_str(&format!("symmetry_residual {:.6e}\n", self.symmetry_residual));
        s.push_str(&format!(
            "compatibility_residual {:.6e}\n",
            self.compatibility_residual
        ));
        s.push_str(&format!(
            "lagrangian_residual {:.6e}\n",
            self.lagrangian_residual
        ));
        let sig_ok = (self.n_plus, self.n_minus, self.n_zero) == (6, 10, 0);
        s.push_str(&format!(
            "verdict signature ({}, {}, {}) expected (6, 10, 0) {}\n",
            self.n_plus,
            self.n_minus,
            self.n_zero,
            if sig_ok { "pass" } else { "fail" }
        ));
        s.push_str(&format!(
            "verdict compatibility {:.6e} limit 1e-9 {}\n",
            self.compatibility_residual,
            if self.compatibility_residual <= 1e-9 { "pass" } else { "fail" }
        ));
        s.push_str(&format!(
            "verdict lagrangian {:.6e} limit 1e-9 {}\n",
            self.lagrangian_residual,
            if self.lagrangian_residual <= 1e-9 { "pass" } else { "fail" }
        ));
        s
    }
}

/// Gram matrix, eigenvalues, and inertia of omega(., J.) on the span of the
/// given holomorphic bases at the hyperbolic point. Eigenvalues within
/// 1e3 times the symmetry residual of zero are counted degenerate and fail
/// the computation.
pub fn gram_signature(
    mesh: &Mesh,
    basis2: &[DifferentialField],
    basis3: &[DifferentialField],
) -> Result<GramReport> {
    let ops = WangOps::new(mesh);
    let derivs = derivative_operators(mesh)?;
    let (labels, pairs) = fuchsian_directions(mesh, &ops, &derivs, basis2, basis3)?;
    let n = pairs.len();
    let combined: Vec<TangentRep> = pairs.iter().map(|p| p.combined()).collect();
    let jcombined: Vec<TangentRep> = pairs.iter().map(|p| apply_j(p).combined()).collect();

    let mut raw = vec![Cplx::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            raw[i * n + j] = pair_omega(&combined[i], &jcombined[j], mesh)?;
        }
    }
    let scale = raw.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    if !(scale > 0.0) {
        return Err(Error::DegenerateGram("all pairings vanish".into()));
    }
    let mut sym_res = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            sym_res = sym_res.max((raw[i * n + j] - raw[j * n + i].conj()).norm());
            sym_res = sym_res.max(raw[i * n + j].im.abs());
        }
    }
    let rel = sym_res / scale;
    if rel > 1e-9 {
        return Err(Error::DegenerateGram(format!(
            "Gram symmetry residual {rel:e} exceeds 1e-9 relative"
        )));
    }
    let mut gram = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            gram[i * n + j] = 0.5 * (raw[i * n + j].re + raw[j * n + i].re);
        }
    }
    let (eigenvalues, _) = eig_hermitian(n, &gram);

    let threshold = 1e3 * sym_res;
    let mut n_plus = 0;
    let mut n_minus = 0;
    let mut n_zero = 0;
    for &e in &eigenvalues {
        if e.abs() < threshold {
            n_zero += 1;
        } else if e > 0.0 {
            n_plus += 1;
        } else {
            n_minus += 1;
        }
    }
    if n_zero > 0 {
        return Err(Error::DegenerateGram(format!(
            "{n_zero} eigenvalues below {threshold:e}"
        )));
    }

    let mut comp_res = 0.0f64;
    let jpairs: Vec<TangentPair> = pairs.iter().map(apply_j).collect();
    let jjcombined: Vec<TangentRep> = jpairs.iter().map(|p| apply_j(p).combined()).collect();
    for i in 0..n {
        for j in i..n {
            // omega(Ju, Jv) via the J of the already rotated pair.
            let a = pair_omega(&jcombined[i], &jjcombined[j], mesh)?;
            let b = pair_omega(&combined[i], &jcombined[j], mesh)?;
            comp_res = comp_res.max((a - b).norm());
        }
    }

    let mut lag_res = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let l = pair_omega(&pairs[i].left, &pairs[j].left, mesh)?;
            let r = pair_omega(&pairs[i].right, &pairs[j].right, mesh)?;
            lag_res = lag_res.max(l.norm()).max(r.norm());
        }
    }

    Ok(GramReport {
        mesh_checksum: mesh.checksum(),
        labels,
        gram,
        eigenvalues,
        n_plus,
        n_minus,
        n_zero,
        symmetry_residual: sym_res,
        compatibility_residual: comp_res / scale,
        lagrangian_residual: lag_res / scale,
    })
}

/// Quadrature norm of a representative, used to make pairing residuals
/// scale-free.
pub fn rep_norm(rep: &TangentRep, mesh: &Mesh) -> f64 {
    let vals: Vec<f64> = (0..mesh.n_verts())
        .map(|i| {
            let p = mat_norm(&rep.p[i]);
            let r = mat_norm(&rep.r[i]);
            p * p + r * r
        })
        .collect();
    integrate(mesh, &vals, Measure::ChartArea).sqrt()
}

/// Finite-difference tangent at the real base point (t Q0, conj(t Q0)) for
/// the conjugate-symmetric direction that adds `d` to the cubic field: the
/// path varies Q1 by dt d and the conjugate field accordingly, staying in
/// real mode.
pub fn cubic_direction_tangent(
    mesh: &Mesh,
    ops: &WangOps,
    derivs: &(SparseCplx, SparseCplx),
    q0: &DifferentialField,
    d: &DifferentialField,
    dt: f64,
) -> Result<TangentRep> {
    let at = |s: f64| -> Result<DiscreteConnection> {
        let mut q1 = q0.clone();
        for (v, w) in q1.values.iter_mut().zip(&d.values) {
            *v += s * w;
        }
        let qbar2 = conjugate(&q1);
        let (sigma, _) = solve_wang(mesh, ops, None, &q1, &qbar2, Mode::Real, 2)?;
        assemble_d(&sigma, mesh, ops, derivs)
    };
    path_tangent(&at(dt)?, &at(-dt)?, dt)
}

/// One-sided finite-difference tangents that vary only one factor of the
/// product structure: `FrozenFactor::SecondBar` freezes (cbar2, Qbar2) and
/// varies Q1; `FrozenFactor::First` freezes (c1, Q1) and varies Qbar2. The
/// stencil solves run in complex mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrozenFactor {
    SecondBar,
    First,
}

pub fn one_factor_tangent(
    mesh: &Mesh,
    ops: &WangOps,
    derivs: &(SparseCplx, SparseCplx),
    q0: &DifferentialField,
    d: &DifferentialField,
    dt: f64,
    freeze: FrozenFactor,
) -> Result<TangentRep> {
    let qbar0 = conjugate(q0);
    let at = |s: f64| -> Result<DiscreteConnection> {
        let (q1, qbar2) = match freeze {
            FrozenFactor::SecondBar => {
                let mut q1 = q0.clone();
                for (v, w) in q1.values.iter_mut().zip(&d.values) {
                    *v += s * w;
                }
                (q1, qbar0.clone())
            }
            FrozenFactor::First => {
                let mut qbar2 = qbar0.clone();
                for (v, w) in qbar2.values.iter_mut().zip(&d.values) {
                    *v += s * w.conj();
                }
                (q0.clone(), qbar2)
            }
        };
        let (sigma, _) = solve_wang(mesh, ops, None, &q1, &qbar2, Mode::Complex, 2)?;
        assemble_d(&sigma, mesh, ops, derivs)
    };
    path_tangent(&at(dt)?, &at(-dt)?, dt)
}

/// Max scale-free |pairing| over all pairs of tangents that vary only the
/// first factor, and over all pairs varying only the second, at the base
/// point (q0, conj q0). Both families span isotropic subspaces in the
/// continuum; the return value is the discretization residual.
pub fn check_lagrangian(
    mesh: &Mesh,
    q0: &DifferentialField,
    directions: &[DifferentialField],
    dt: f64,
) -> Result<f64> {
    let ops = WangOps::new(mesh);
    let derivs = derivative_operators(mesh)?;
    let mut worst = 0.0f64;
    for freeze in [FrozenFactor::SecondBar, FrozenFactor::First] {
        let reps: Vec<TangentRep> = directions
            .iter()
            .map(|d| one_factor_tangent(mesh, &ops, &derivs, q0, d, dt, freeze))
            .collect::<Result<_>>()?;
        let norms: Vec<f64> = reps.iter().map(|r| rep_norm(r, mesh)).collect();
        for i in 0..reps.len() {
            for j in i..reps.len() {
                let w = pair_omega(&reps[i], &reps[j], mesh)?;
                let s = (norms[i] * norms[j]).max(f64::MIN_POSITIVE);
                worst = worst.max(w.norm() / s);
            }
        }
    }
    Ok(worst)
}

/// Max scale-free |omega(Ju, Jv) - omega(u, v)| over the cubic-direction
/// subblock at the real base point (q0, conj q0), with J acting on the
/// direction coefficients by i and tangents taken by central differences.
pub fn check_compatibility(
    mesh: &Mesh,
    q0: &DifferentialField,
    directions: &[DifferentialField],
    dt: f64,
) -> Result<f64> {
    let ops = WangOps::new(mesh);
    let derivs = derivative_operators(mesh)?;
    let mut reps = Vec::new();
    let mut jreps = Vec::new();
    for d in directions {
        reps.push(cubic_direction_tangent(mesh, &ops, &derivs, q0, d, dt)?);
        let jd = scaled_field(d, cplx(0.0, 1.0), mesh);
        jreps.push(cubic_direction_tangent(mesh, &ops, &derivs, q0, &jd, dt)?);
    }
    let norms: Vec<f64> = reps.iter().map(|r| rep_norm(r, mesh)).collect();
    let mut worst = 0.0f64;
    for i in 0..reps.len() {
        for j in 0..reps.len() {
            let a = pair_omega(&jreps[i], &jreps[j], mesh)?;
            let b = pair_omega(&reps[i], &reps[j], mesh)?;
            let s = (norms[i] * norms[j]).max(f64::MIN_POSITIVE);
            worst = worst.max((a - b).norm() / s);
        }
    }
    Ok(worst)
}

/// Pairing discrepancy under the sign flip of the cubic data: tangents of
/// directions d at (q0, conj q0) against tangents of -d at (-q0, -conj q0)
/// must pair identically. Returns the max scale-free difference.
pub fn check_involution(
    mesh: &Mesh,
    q0: &DifferentialField,
    directions: &[DifferentialField],
    dt: f64,
) -> Result<f64> {
    let ops = WangOps::new(mesh);
    let derivs = derivative_operators(mesh)?;
    let qm = scaled_field(q0, cplx(-1.0, 0.0), mesh);
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for d in directions {
        plus.push(cubic_direction_tangent(mesh, &ops, &derivs, q0, d, dt)?);
        let dm = scaled_field(d, cplx(-1.0, 0.0), mesh);
        minus.push(cubic_direction_tangent(mesh, &ops, &derivs, &qm, &dm, dt)?);
    }
    let norms: Vec<f64> = plus.iter().map(|r| rep_norm(r, mesh)).collect();
    let mut worst = 0.0f64;
    for i in 0..plus.len() {
        for j in 0..plus.len() {
            let a = pair_omega(&plus[i], &plus[j], mesh)?;
            let b = pair_omega(&minus[i], &minus[j], mesh)?;
            let s = (norms[i] * norms[j]).max(f64::MIN_POSITIVE);
            worst = worst.max((a - b).norm() / s);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::differentials::Chirality;
    use crate::surface::{build_bolza_domain, build_mesh};

    fn synthetic_fields(mesh: &Mesh) -> (DifferentialField, DifferentialField) {
        let mut psi = DifferentialField::zero(2, Chirality::Dz, mesh);
        let mut alpha = DifferentialField::zero(3, Chirality::Dz, mesh);
        for d in 0..mesh.n_dofs() {
            let x = d as f64;
            psi.values[d] = cplx((0.3 * x).sin(), 0.4 * (0.7 * x).cos());
            alpha.values[d] = cplx((0.11 * x).cos(), 0.2 * (0.13 * x).sin());
        }
        (psi, alpha)
    }

    #[test]
    fn pairing_is_antisymmetric_and_bilinear() {
        let dom = build_bolza_domain().unwrap();
        let mesh = build_mesh(&dom, 1).unwrap();
        let ops = WangOps::new(&mesh);
        let derivs = derivative_operators(&mesh).unwrap();
        let (psi, alpha) = synthetic_fields(&mesh);
        let a = fuchsian_tangent(&FuchsianDirection::Quad(&psi), &mesh, &ops, &derivs).unwrap();
        let b =
            fuchsian_tangent(&FuchsianDirection::QuadBar(&alpha_to_psi(&alpha, &mesh)), &mesh, &ops, &derivs)
                .unwrap();
        let ab = pair_omega(&a, &b, &mesh).unwrap();
        let ba = pair_omega(&b, &a, &mesh).unwrap();
        assert_eq!(ab, -ba);
        assert_eq!(pair_omega(&a, &a, &mesh).unwrap(), cplx(0.0, 0.0));
        // Scaling one argument scales the pairing.
        let a2 = TangentRep {
            mesh_checksum: a.mesh_checksum,
            p: a.p.iter().map(|m| mat_scale(m, cplx(2.0, 0.0))).collect(),
            r: a.r.iter().map(|m| mat_scale(m, cplx(2.0, 0.0))).collect(),
        };
        let ab2 = pair_omega(&a2, &b, &mesh).unwrap();
        assert!((ab2 - 2.0 * ab).norm() < 1e-12 * ab.norm());
    }

    fn alpha_to_psi(alpha: &DifferentialField, mesh: &Mesh) -> DifferentialField {
        DifferentialField::new(2, Chirality::Dz, alpha.values.clone(), mesh)
    }

    #[test]
    fn j_squares_to_minus_one_and_fixes_zero() {
        let dom = build_bolza_domain().unwrap();
        let mesh = build_mesh(&dom, 0).unwrap();
        let ops = WangOps::new(&mesh);
        let derivs = derivative_operators(&mesh).unwrap();
        let (psi, _) = synthetic_fields(&mesh);
        let pair = TangentPair {
            left: fuchsian_tangent(&FuchsianDirection::QuadBar(&psi), &mesh, &ops, &derivs)
                .unwrap(),
            right: fuchsian_tangent(&FuchsianDirection::Quad(&psi), &mesh, &ops, &derivs).unwrap(),
        };
        let jj = apply_j(&apply_j(&pair));
        for i in 0..mesh.n_verts() {
            for (m, n) in [(&jj.left, &pair.left), (&jj.right, &pair.right)] {
                let d = mat_sub(&m.p[i], &mat_scale(&n.p[i], cplx(-1.0, 0.0)));
                assert!(mat_norm(&d) == 0.0);
                let d = mat_sub(&m.r[i], &mat_scale(&n.r[i], cplx(-1.0, 0.0)));
                assert!(mat_norm(&d) == 0.0);
            }
        }
        let zero = TangentPair {
            left: TangentRep::zero(&mesh),
            right: TangentRep::zero(&mesh),
        };
        let jz = apply_j(&zero);
        assert!(jz.left.p.iter().all(|m| mat_norm(m) == 0.0));
    }

    #[test]
    fn pure_directions_have_the_advertised_definite_signs() {
        let dom = build_bolza_domain().unwrap();
        let mesh = build_mesh(&dom, 1).unwrap();
        let ops = WangOps::new(&mesh);
        let derivs = derivative_operators(&mesh).unwrap();
        let (psi, alpha) = synthetic_fields(&mesh);

        let quad = TangentPair {
            left: fuchsian_tangent(&FuchsianDirection::QuadBar(&psi), &mesh, &ops, &derivs)
                .unwrap(),
            right: fuchsian_tangent(&FuchsianDirection::Quad(&psi), &mesh, &ops, &derivs).unwrap(),
        };
        let v = quad.combined();
        let jv = apply_j(&quad).combined();
        let got = pair_omega(&v, &jv, &mesh).unwrap();
        // 4 integral |psi|^2 / lam0 dx dy in chart terms.
        let vals: Vec<Cplx> = (0..mesh.n_verts())
            .map(|i| {
                let d = mesh.dof[i] as usize;
                let c = psi.values[d] * psi.cocycle(&mesh, i);
                cplx(4.0 * c.norm_sqr() / Mesh::lambda0(mesh.verts[i]), 0.0)
            })
            .collect();
        let want = integrate(&mesh, &vals, Measure::ChartArea);
        assert!(got.re > 0.0);
        assert!((got - want).norm() < 1e-10 * want.norm(), "{got} vs {want}");

        let cubic = TangentPair {
            left: fuchsian_tangent(&FuchsianDirection::CubicOne(&alpha), &mesh, &ops, &derivs)
                .unwrap(),
            right: fuchsian_tangent(&FuchsianDirection::CubicTwo(&alpha), &mesh, &ops, &derivs)
                .unwrap(),
        };
        let v = cubic.combined();
        let jv = apply_j(&cubic).combined();
        let got = pair_omega(&v, &jv, &mesh).unwrap();
        let vals: Vec<Cplx> = (0..mesh.n_verts())
            .map(|i| {
                let d = mesh.dof[i] as usize;
                let c = alpha.values[d] * alpha.cocycle(&mesh, i);
                let l0 = Mesh::lambda0(mesh.verts[i]);
                cplx(-8.0 * c.norm_sqr() / (l0 * l0), 0.0)
            })
            .collect();
        let want = integrate(&mesh, &vals, Measure::ChartArea);
        assert!(got.re < 0.0);
        assert!((got - want).norm() < 1e-10 * want.norm(), "{got} vs {want}");
    }

    #[test]
    fn involution_is_exact_on_closed_forms() {
        // Flipping the sign of both cubic coefficients flips both closed-form
        // representatives, so every pairing is unchanged.
        let dom = build_bolza_domain().unwrap();
        let mesh = build_mesh(&dom, 1).unwrap();
        let ops = WangOps::new(&mesh);
        let derivs = derivative_operators(&mesh).unwrap();
        let (_, alpha) = synthetic_fields(&mesh);
        let neg = scaled_field(&alpha, cplx(-1.0, 0.0), &mesh);
        let a1 = fuchsian_tangent(&FuchsianDirection::CubicOne(&alpha), &mesh, &ops, &derivs)
            .unwrap();
        let a2 = fuchsian_tangent(&FuchsianDirection::CubicTwo(&alpha), &mesh, &ops, &derivs)
            .unwrap();
        let b1 = fuchsian_tangent(&FuchsianDirection::CubicOne(&neg), &mesh, &ops, &derivs)
            .unwrap();
        let b2 = fuchsian_tangent(&FuchsianDirection::CubicTwo(&neg), &mesh, &ops, &derivs)
            .unwrap();
        let pa = pair_omega(&a1, &a2, &mesh).unwrap();
        let pb = pair_omega(&b1, &b2, &mesh).unwrap();
        assert_eq!(pa, pb);
    }
}
