//! End-to-end acceptance run. Each numbered criterion prints exactly one
//! pass/fail line; the test fails if any criterion fails. Criteria cover the
//! signature computation, compatibility and Lagrangian properties on and off
//! the base locus, pairing values against scalar integrals, sign
//! definiteness, the curvature and holonomy oracles, the scalar solver, the
//! kernel dimension counts, involution invariance, and the total runtime.

use std::time::Instant;

use hit3_core::connections::{
    assemble_d, assemble_d_unchecked, curvature_residual, fuchsian_tangent, holonomy, irr_embed,
    relation_word, sl2_word, FuchsianDirection, TangentRep,
};
use hit3_core::differentials::{
    holomorphic_basis_with_gap, Chirality, DifferentialField,
};
use hit3_core::goldman::{
    check_compatibility, check_involution, check_lagrangian, gram_signature, pair_omega,
};
use hit3_core::surface::{
    build_bolza_domain, build_mesh, derivative_operators, integrate, Measure, Mesh,
};
use hit3_core::wang::{
    linearize_l, residual_g, solve_wang, AffineSphereData, Mode, WangOps,
};
use hit3_core::{cplx, Cplx};
use rand::{Rng, SeedableRng};

fn fuchsian_state(mesh: &Mesh) -> AffineSphereData {
    let nd = mesh.n_dofs();
    AffineSphereData {
        mesh_checksum: mesh.checksum(),
        lambda_base: (0..nd)
            .map(|d| cplx(Mesh::lambda0(mesh.verts[mesh.roots[d] as usize]), 0.0))
            .collect(),
        q1: DifferentialField::zero(3, Chirality::Dz, mesh),
        qbar2: DifferentialField::zero(3, Chirality::Dzbar, mesh),
        u: vec![Cplx::new(0.0, 0.0); nd],
        mode: Mode::Real,
    }
}

fn scaled(f: &DifferentialField, s: Cplx) -> DifferentialField {
    let mut g = f.clone();
    for v in &mut g.values {
        *v *= s;
    }
    g
}

fn wedge_at(a: &TangentRep, b: &TangentRep, i: usize) -> Cplx {
    let mut t = Cplx::new(0.0, 0.0);
    for r in 0..3 {
        for c in 0..3 {
            t += a.p[i][r][c] * b.r[i][c][r] - b.p[i][r][c] * a.r[i][c][r];
        }
    }
    t
}

/// A refinement sequence "decreases by the given factor", with a round-off
/// escape: once both values sit at the numerical floor no rate is
/// measurable, and the property holds vacuously.
fn decreases(coarse: f64, fine: f64, factor: f64) -> bool {
    (fine * factor <= coarse) || (coarse <= 1e-12 && fine <= 1e-12)
}

struct Verdicts {
    lines: Vec<(usize, bool, String)>,
}

impl Verdicts {
    fn record(&mut self, n: usize, pass: bool, detail: String) {
        self.lines.push((n, pass, detail));
    }
}

#[test]
fn acceptance() {
    let t_total = Instant::now();
    let mut v = Verdicts { lines: Vec::new() };
    let dom = build_bolza_domain().unwrap();
    let mesh2 = build_mesh(&dom, 2).unwrap();
    let mesh3 = build_mesh(&dom, 3).unwrap();

    // 10: kernel dimensions of the d-bar systems with the singular-value
    // gap separating them from the rest of the spectrum.
    let (b2_l3, gap2) = holomorphic_basis_with_gap(&mesh3, 2).unwrap();
    let (b3_l3, gap3) = holomorphic_basis_with_gap(&mesh3, 3).unwrap();
    v.record(
        10,
        b2_l3.len() == 3 && b3_l3.len() == 5 && gap2 >= 1e3 && gap3 >= 1e3,
        format!(
            "kernel dims ({}, {}) with gap ratios ({:.1e}, {:.1e})",
            b2_l3.len(),
            b3_l3.len(),
            gap2,
            gap3
        ),
    );

    // 1: signature of the level-3 Gram matrix, timed on its own.
    let t1 = Instant::now();
    let report = gram_signature(&mesh3, &b2_l3, &b3_l3).unwrap();
    let secs1 = t1.elapsed().as_secs_f64();
    let min_eig = report
        .eigenvalues
        .iter()
        .map(|e| e.abs())
        .fold(f64::INFINITY, f64::min);
    v.record(
        1,
        (report.n_plus, report.n_minus, report.n_zero) == (6, 10, 0)
            && min_eig >= 1e3 * report.symmetry_residual
            && secs1 < 60.0,
        format!(
            "signature ({}, {}, {}) in {:.1} s, min |eig| {:.2e} vs symmetry {:.2e}",
            report.n_plus, report.n_minus, report.n_zero, secs1, min_eig, report.symmetry_residual
        ),
    );

    // 2: compatibility of the closed-form tangents across all basis pairs.
    v.record(
        2,
        report.compatibility_residual <= 1e-9,
        format!(
            "closed-form compatibility residual {:.2e} (limit 1e-9)",
            report.compatibility_residual
        ),
    );

    // 6: the diagonal of the Gram matrix is positive on the six quadratic
    // directions and negative on the ten cubic ones.
    let mut signs_ok = true;
    for i in 0..16 {
        let d = report.gram[i * 16 + i];
        let want_quad = report.labels[i].starts_with("quad");
        signs_ok &= want_quad == (i < 6) && if want_quad { d > 0.0 } else { d < 0.0 };
    }
    v.record(
        6,
        signs_ok,
        format!(
            "diagonal entries quad {:+.2} cubic {:+.2}",
            report.gram[0], report.gram[6 * 16 + 6]
        ),
    );

    let ops3 = WangOps::new(&mesh3);
    let derivs3 = derivative_operators(&mesh3).unwrap();
    let psi = &b2_l3[0];
    let alpha = &b3_l3[0];
    let r_qb = fuchsian_tangent(&FuchsianDirection::QuadBar(psi), &mesh3, &ops3, &derivs3).unwrap();
    let r_q = fuchsian_tangent(&FuchsianDirection::Quad(psi), &mesh3, &ops3, &derivs3).unwrap();
    let r_c1 =
        fuchsian_tangent(&FuchsianDirection::CubicOne(alpha), &mesh3, &ops3, &derivs3).unwrap();
    let r_c2 =
        fuchsian_tangent(&FuchsianDirection::CubicTwo(alpha), &mesh3, &ops3, &derivs3).unwrap();

    // 5: pairings of the closed-form representatives against the scalar
    // integrals computed by the same quadrature, pointwise and integrated.
    let quad_scalar: Vec<Cplx> = (0..mesh3.n_verts())
        .map(|i| {
            let d = mesh3.dof[i] as usize;
            let pc = psi.values[d] * psi.cocycle(&mesh3, i);
            -pc.conj() * pc / Mesh::lambda0(mesh3.verts[i])
        })
        .collect();
    let cubic_scalar: Vec<Cplx> = (0..mesh3.n_verts())
        .map(|i| {
            let d = mesh3.dof[i] as usize;
            let ac = alpha.values[d] * alpha.cocycle(&mesh3, i);
            let l0 = Mesh::lambda0(mesh3.verts[i]);
            2.0 * ac * ac.conj() / (l0 * l0)
        })
        .collect();
    let want_quad = cplx(0.0, -2.0) * integrate(&mesh3, &quad_scalar, Measure::ChartArea);
    let want_cubic = cplx(0.0, -2.0) * integrate(&mesh3, &cubic_scalar, Measure::ChartArea);
    let got_quad = pair_omega(&r_qb, &r_q, &mesh3).unwrap();
    let got_cubic = pair_omega(&r_c1, &r_c2, &mesh3).unwrap();
    let qmax = quad_scalar.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    let cmax = cubic_scalar.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    let mut pointwise = 0.0f64;
    let mut mixed = 0.0f64;
    for i in 0..mesh3.n_verts() {
        pointwise = pointwise.max((wedge_at(&r_qb, &r_q, i) - quad_scalar[i]).norm() / qmax);
        pointwise = pointwise.max((wedge_at(&r_c1, &r_c2, i) - cubic_scalar[i]).norm() / cmax);
        for (a, b) in [(&r_qb, &r_c1), (&r_qb, &r_c2), (&r_q, &r_c1), (&r_q, &r_c2)] {
            mixed = mixed.max(wedge_at(a, b, i).norm() / qmax.max(cmax));
        }
    }
    let rel_q = (got_quad - want_quad).norm() / want_quad.norm();
    let rel_c = (got_cubic - want_cubic).norm() / want_cubic.norm();
    v.record(
        5,
        rel_q <= 1e-10 && rel_c <= 1e-10 && pointwise <= 1e-10 && mixed <= 1e-10,
        format!(
            "pairing vs scalar integrals: quad {rel_q:.1e}, cubic {rel_c:.1e}, pointwise {pointwise:.1e}, mixed {mixed:.1e}"
        ),
    );

    // 4a: the pairing integrand vanishes identically on pairs drawn from the
    // same factor of the product structure.
    let mut iso = 0.0f64;
    for i in 0..mesh3.n_verts() {
        for (a, b) in [(&r_q, &r_c1), (&r_qb, &r_c2)] {
            iso = iso.max(wedge_at(a, a, i).norm());
            iso = iso.max(wedge_at(a, b, i).norm());
            iso = iso.max(wedge_at(b, b, i).norm());
        }
    }
    let lagrangian_closed_ok = iso <= 1e-13 * qmax.max(cmax);

    // 11: involution invariance. Closed forms: flipping both cubic signs
    // leaves the pairing bitwise unchanged. Off the base point: paired
    // solver runs at (0.1 Q, Q) and (-0.1 Q, -Q).
    let flip = |r: &TangentRep| {
        let mut o = r.clone();
        for i in 0..mesh3.n_verts() {
            for a in 0..3 {
                for b in 0..3 {
                    o.p[i][a][b] = -o.p[i][a][b];
                    o.r[i][a][b] = -o.r[i][a][b];
                }
            }
        }
        o
    };
    let inv_closed =
        (pair_omega(&flip(&r_c1), &flip(&r_c2), &mesh3).unwrap() - got_cubic).norm();
    let q0_l3 = scaled(&b3_l3[0], cplx(0.1, 0.0));
    let dirs_l3 = [b3_l3[0].clone(), b3_l3[1].clone()];
    let inv_off = check_involution(&mesh3, &q0_l3, &dirs_l3, 1e-2).unwrap();
    v.record(
        11,
        inv_closed == 0.0 && inv_off <= 1e-6,
        format!("involution discrepancy: closed forms {inv_closed:.1e}, solver runs {inv_off:.2e} (limit 1e-6)"),
    );

    // 3: compatibility off the base locus on the cubic subblock, over the
    // (mesh level, step size) grid.
    let b3_l2 = hit3_core::differentials::holomorphic_basis(&mesh2, 3).unwrap();
    let q0_l2 = scaled(&b3_l2[0], cplx(0.1, 0.0));
    let dirs_l2 = [b3_l2[0].clone(), b3_l2[1].clone()];
    let mut comp = Vec::new();
    let mut lagr = Vec::new();
    for (mesh, q0, dirs) in [
        (&mesh2, &q0_l2, &dirs_l2),
        (&mesh3, &q0_l3, &dirs_l3),
    ] {
        for dt in [1e-2, 5e-3] {
            comp.push(check_compatibility(mesh, q0, dirs, dt).unwrap());
            lagr.push(check_lagrangian(mesh, q0, dirs, dt).unwrap());
        }
    }
    let grid_ok = |r: &[f64]| {
        r[3] <= 1e-4
            && decreases(r[0], r[1], 3.0)
            && decreases(r[2], r[3], 3.0)
            && decreases(r[0], r[2], 2.0)
            && decreases(r[1], r[3], 2.0)
    };
    v.record(
        3,
        grid_ok(&comp),
        format!(
            "off-base compatibility [{:.1e}, {:.1e}, {:.1e}, {:.1e}] over (level, dt) grid",
            comp[0], comp[1], comp[2], comp[3]
        ),
    );

    // 4: Lagrangian property, closed-form integrand plus the
    // finite-difference case on the same grid as criterion 3.
    v.record(
        4,
        lagrangian_closed_ok && grid_ok(&lagr),
        format!(
            "isotropy integrand {:.1e}, finite-difference pairings [{:.1e}, {:.1e}, {:.1e}, {:.1e}]",
            iso, lagr[0], lagr[1], lagr[2], lagr[3]
        ),
    );

    // 7: curvature residual of the solved state halves per level; breaking
    // the solution by a constant shift of u leaves a residual that stalls
    // instead of converging.
    let mut flat = Vec::new();
    let mut broken = Vec::new();
    for level in [2u32, 3, 4] {
        let mesh = build_mesh(&dom, level).unwrap();
        let derivs = derivative_operators(&mesh).unwrap();
        let ops = WangOps::new(&mesh);
        let sigma = fuchsian_state(&mesh);
        let conn = assemble_d(&sigma, &mesh, &ops, &derivs).unwrap();
        let res = curvature_residual(&conn, &mesh).unwrap();
        flat.push(res.iter().cloned().fold(0.0f64, f64::max));
        let mut bad = sigma.clone();
        for u in &mut bad.u {
            *u += 0.01;
        }
        let conn = assemble_d_unchecked(&bad, &mesh, &derivs).unwrap();
        let res = curvature_residual(&conn, &mesh).unwrap();
        broken.push(res.iter().cloned().fold(0.0f64, f64::max));
    }
    let n = flat.len();
    let flat_ok = flat.windows(2).all(|w| w[1] * 2.0 <= w[0]);
    let broken_ok = broken[n - 1] >= 0.8 * broken[n - 2] && broken[n - 1] >= 4.0 * flat[n - 1];
    v.record(
        7,
        flat_ok && broken_ok,
        format!("curvature flat {flat:?} vs broken {broken:?}"),
    );

    // 8: holonomy traces of the four generators against the symmetric
    // square of the hyperbolic generators, and the octagon relation word.
    let want_gen = {
        let l = dom.translation_length();
        l.exp() + 1.0 + (-l).exp()
    };
    let mut trace_rel = Vec::new();
    let mut relation_ok = true;
    for mesh in [&mesh2, &mesh3] {
        let derivs = derivative_operators(mesh).unwrap();
        let ops = WangOps::new(mesh);
        let sigma = fuchsian_state(mesh);
        let conn = assemble_d(&sigma, mesh, &ops, &derivs).unwrap();
        let mut worst = 0.0f64;
        for k in 0..4 {
            let word = vec![(k, 1)];
            let h = holonomy(&conn, mesh, &dom, &word).unwrap();
            let m = irr_embed(sl2_word(&dom, &word));
            let oracle = m[0][0] + m[1][1] + m[2][2];
            assert!((oracle - want_gen).abs() < 1e-9);
            let tr = h.mat[0][0] + h.mat[1][1] + h.mat[2][2];
            worst = worst.max((tr - oracle).norm() / oracle.abs());
        }
        trace_rel.push(worst);
        let h = holonomy(&conn, mesh, &dom, &relation_word()).unwrap();
        let mut defect = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                defect += (h.mat[i][j] - cplx(want, 0.0)).norm_sqr();
            }
        }
        let defect = defect.sqrt();
        let mut scale = 1.0f64;
        for cut in 1..relation_word().len() {
            let hp = holonomy(&conn, mesh, &dom, &relation_word()[..cut]).unwrap();
            let nrm: f64 = hp.mat.iter().flatten().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            scale = scale.max(nrm);
        }
        relation_ok &= defect <= 1e-3 * scale;
    }
    v.record(
        8,
        trace_rel[1] <= 0.02 && trace_rel[1] * 2.0 <= trace_rel[0] && relation_ok,
        format!(
            "generator trace errors {:.2e} -> {:.2e} (limit 2e-2), relation word {}",
            trace_rel[0],
            trace_rel[1],
            if relation_ok { "closes" } else { "OPEN" }
        ),
    );

    // 9: the scalar solver. Zero cubic solves in one Newton step to the
    // hyperbolic metric; a constant-coefficient state sits on the scalar
    // root; real solutions keep u nonnegative; the linearization passes the
    // finite-difference order test.
    let mesh1 = build_mesh(&dom, 1).unwrap();
    let ops1 = WangOps::new(&mesh1);
    let zero3 = DifferentialField::zero(3, Chirality::Dz, &mesh1);
    let zero3b = DifferentialField::zero(3, Chirality::Dzbar, &mesh1);
    let (sig0, rep0) = solve_wang(&mesh1, &ops1, None, &zero3, &zero3b, Mode::Real, 8).unwrap();
    let steps: usize = rep0.continuation.iter().map(|&(_, it)| it).sum();
    let zero_ok = steps <= 1 && sig0.u.iter().all(|u| u.norm() == 0.0);

    let kappa = 3.7;
    let f = |t: f64| -(2.0 * t).exp() + 0.25 * kappa * (-4.0 * t).exp() + 1.0;
    let (mut lo, mut hi) = (0.0f64, 5.0f64);
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut sigma_cc = fuchsian_state(&mesh1);
    sigma_cc.mode = Mode::Complex;
    sigma_cc.q1.values = vec![cplx(1.0, 0.0); mesh1.n_dofs()];
    sigma_cc.qbar2.values = (0..mesh1.n_dofs())
        .map(|d| {
            let l0 = Mesh::lambda0(mesh1.verts[mesh1.roots[d] as usize]);
            cplx(kappa * l0.powi(3) / 16.0, 0.0)
        })
        .collect();
    sigma_cc.u = vec![cplx(0.5 * (lo + hi), 0.0); mesh1.n_dofs()];
    let g_cc = residual_g(&sigma_cc, &mesh1, &ops1).unwrap();
    let cc_res = g_cc.iter().map(|v| v.norm()).fold(0.0f64, f64::max);

    let qbar_l3 = hit3_core::differentials::conjugate(&q0_l3);
    let (_, rep_pos) =
        solve_wang(&mesh3, &ops3, None, &q0_l3, &qbar_l3, Mode::Real, 8).unwrap();
    let positivity_ok = rep_pos.min_re_u >= -1e-8;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let nd1 = mesh1.n_dofs();
    let mut rnd = |amp: f64| -> Vec<Cplx> {
        (0..nd1)
            .map(|_| cplx(rng.gen_range(-amp..amp), rng.gen_range(-amp..amp)))
            .collect()
    };
    let mut sigma_fd = fuchsian_state(&mesh1);
    sigma_fd.mode = Mode::Complex;
    sigma_fd.u = rnd(0.2);
    sigma_fd.q1.values = rnd(0.5);
    sigma_fd.qbar2.values = rnd(0.5);
    let dir = rnd(1.0);
    let l = linearize_l(&sigma_fd, &mesh1, &ops1).unwrap();
    let g0 = residual_g(&sigma_fd, &mesh1, &ops1).unwrap();
    let lv = l.apply(&dir);
    let mut errs = Vec::new();
    for eps in [1e-3, 1e-4] {
        let mut pert = sigma_fd.clone();
        for d in 0..nd1 {
            pert.u[d] += eps * dir[d];
        }
        let g1 = residual_g(&pert, &mesh1, &ops1).unwrap();
        let err = (0..nd1)
            .map(|d| (g1[d] - g0[d] - eps * lv[d]).norm())
            .fold(0.0f64, f64::max);
        errs.push(err);
    }
    let order = (errs[0] / errs[1]).log10();
    v.record(
        9,
        zero_ok && cc_res <= 1e-10 && positivity_ok && order >= 1.9,
        format!(
            "zero cubic in {steps} step(s), constant-coefficient residual {cc_res:.1e}, min u {:.1e}, linearization order {order:.2}",
            rep_pos.min_re_u
        ),
    );

    // 12: the whole suite fits the runtime budget.
    let secs = t_total.elapsed().as_secs_f64();
    v.record(12, secs < 600.0, format!("total runtime {secs:.1} s (limit 600 s)"));

    v.lines.sort_by_key(|&(n, _, _)| n);
    let mut failures = 0usize;
    for (n, pass, detail) in &v.lines {
        println!(
            "criterion {n:2}: {} - {detail}",
            if *pass { "pass" } else { "FAIL" }
        );
        if !pass {
            failures += 1;
        }
    }
    assert!(failures == 0, "{failures} acceptance criteria failed");
}
