//! The scalar affine-sphere equation G(u) = Delta u - e^{2u}
//! + (1/4) h(Q1, Qbar2) e^{-4u} + 1 = 0: residual evaluation, linearization,
//! and a Newton continuation solver in real mode (conjugate-symmetric cubic
//! data, real u) and complex mode (independent Q1, Qbar2 near the real
//! locus, complex u).

use crate::differentials::{pairing_h, vertex_stencils, Chirality, DifferentialField};
use crate::error::Result;
use crate::numerics::{cg_hermitian, lu_solve_dense};
use crate::surface::{stiffness_mass, Mesh};
use crate::{Cplx, Error, SparseCplx, SparseReal};

/// Residual tolerance in the sup norm for a solved state.
pub const SOLVE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Real,
    Complex,
}

/// A point of the affine-sphere equation's state space on a fixed mesh:
/// metric density, cubic data, and the scalar field u, all per dof class.
/// In real mode Qbar2 is the conjugate of Q1 and u stays real; a solved
/// state satisfies |G|_inf <= SOLVE_TOL.
#[derive(Debug, Clone)]
pub struct AffineSphereData {
    pub mesh_checksum: u64,
    /// Conformal metric density per dof: lambda0 on the hyperbolic locus,
    /// or a complex perturbation of it. The metric Laplacian scales as
    /// (lambda0 / lambda_base) times the hyperbolic one.
    pub lambda_base: Vec<Cplx>,
    pub q1: DifferentialField,
    pub qbar2: DifferentialField,
    pub u: Vec<Cplx>,
    pub mode: Mode,
}

/// Discrete operators shared by every evaluation on one mesh: cotangent
/// stiffness K and the lumped hyperbolic mass, so that the hyperbolic
/// Laplacian is -diag(1/mass) K.
pub struct WangOps {
    pub stiffness: SparseReal,
    pub mass: Vec<f64>,
    /// lambda0 at the dof class representatives.
    pub lambda0: Vec<f64>,
}

impl WangOps {
    pub fn new(mesh: &Mesh) -> Self {
        let (stiffness, mass) = stiffness_mass(mesh);
        let lambda0 = (0..mesh.n_dofs())
            .map(|d| Mesh::lambda0(mesh.verts[mesh.roots[d] as usize]))
            .collect();
        WangOps {
            stiffness,
            mass,
            lambda0,
        }
    }
}

fn apply_real(a: &SparseReal, x: &[Cplx]) -> Vec<Cplx> {
    let re: Vec<f64> = x.iter().map(|v| v.re).collect();
    let im: Vec<f64> = x.iter().map(|v| v.im).collect();
    let are = a.apply(&re);
    let aim = a.apply(&im);
    are.into_iter()
        .zip(aim)
        .map(|(r, i)| Cplx::new(r, i))
        .collect()
}

fn check_state(sigma: &AffineSphereData, mesh: &Mesh, ops: &WangOps) -> Result<()> {
    let nd = mesh.n_dofs();
    if sigma.mesh_checksum != mesh.checksum()
        || sigma.lambda_base.len() != nd
        || sigma.u.len() != nd
        || ops.mass.len() != nd
    {
        return Err(Error::MeshMismatch);
    }
    Ok(())
}

/// Residual G(sigma) per dof: Delta u - e^{2u}
/// + (1/4) h(Q1, Qbar2; lambda_base) e^{-4u} + 1, with the Laplacian of the
/// lambda_base density. Exactly zero at u = 0, Q = 0, lambda_base = lambda0.
pub fn residual_g(sigma: &AffineSphereData, mesh: &Mesh, ops: &WangOps) -> Result<Vec<Cplx>> {
    check_state(sigma, mesh, ops)?;
    let h = pairing_h(&sigma.q1, &sigma.qbar2, mesh, Some(&sigma.lambda_base))?;
    let ku = apply_real(&ops.stiffness, &sigma.u);
    let nd = mesh.n_dofs();
    let mut g = Vec::with_capacity(nd);
    for d in 0..nd {
        let scale = ops.lambda0[d] / sigma.lambda_base[d];
        let lap_u = -ku[d] / ops.mass[d] * scale;
        let e2 = (2.0 * sigma.u[d]).exp();
        let em4 = (-4.0 * sigma.u[d]).exp();
        g.push(lap_u - e2 + 0.25 * h[d] * em4 + 1.0);
    }
    Ok(g)
}

/// Linearization L = Delta - diag(2 e^{2u} + e^{-4u} h(Q1, Qbar2)); at the
/// hyperbolic solution this is Delta - 2.
pub fn linearize_l(sigma: &AffineSphereData, mesh: &Mesh, ops: &WangOps) -> Result<SparseCplx> {
    check_state(sigma, mesh, ops)?;
    let h = pairing_h(&sigma.q1, &sigma.qbar2, mesh, Some(&sigma.lambda_base))?;
    let nd = mesh.n_dofs();
    let mut trip: Vec<(usize, usize, Cplx)> = Vec::with_capacity(ops.stiffness.nnz() + nd);
    for (r, c, v) in ops.stiffness.to_triplets() {
        let scale = ops.lambda0[r] / sigma.lambda_base[r];
        trip.push((r, c, -v / ops.mass[r] * scale));
    }
    for d in 0..nd {
        let e2 = (2.0 * sigma.u[d]).exp();
        let em4 = (-4.0 * sigma.u[d]).exp();
        trip.push((d, d, -(2.0 * e2 + em4 * h[d])));
    }
    Ok(SparseCplx::from_triplets(nd, nd, &trip))
}

/// Worst relative misfit of the field's transported one-ring samples against
/// a local quadratic, over the identified (multi-copy) dof classes. A field
/// whose stored values ignore the edge-identification cocycle shows an O(1)
/// jump here; any smooth section scores O(h^3).
fn cocycle_defect(field: &DifferentialField, mesh: &Mesh) -> Result<f64> {
    if field.mesh_checksum != mesh.checksum() {
        return Err(Error::MeshMismatch);
    }
    let global = field
        .values
        .iter()
        .map(|v| v.norm())
        .fold(0.0f64, f64::max);
    if global == 0.0 {
        return Ok(0.0);
    }
    let k = field.weight as i32;
    let stencils = vertex_stencils(mesh);
    let mut worst = 0.0f64;
    for d in 0..mesh.n_dofs() {
        if mesh.copies[d].len() < 2 {
            continue;
        }
        let root = mesh.roots[d] as usize;
        let z0 = mesh.verts[root];
        // Samples of the coefficient in the representative's chart.
        let mut pts: Vec<(Cplx, Cplx)> = vec![(z0, field.values[d] * field.cocycle(mesh, root))];
        for &(dof, zeta, dt, ds) in &stencils[root] {
            let mut factor = dt.powi(k) * ds.powi(-k);
            if field.chirality == Chirality::Dzbar {
                factor = factor.conj();
            }
            pts.push((zeta, field.values[dof as usize] * factor));
        }
        let m = pts.len();
        let h = pts
            .iter()
            .map(|&(z, _)| (z - z0).norm())
            .fold(0.0f64, f64::max)
            .max(f64::MIN_POSITIVE);
        // Weighted quadratic fit by normal equations; 6 monomials in
        // s = (zeta - z0)/h.
        let mut rows: Vec<[Cplx; 6]> = Vec::with_capacity(m);
        let mut ws: Vec<f64> = Vec::with_capacity(m);
        for &(z, _) in &pts {
            let s = (z - z0) / h;
            let sb = s.conj();
            ws.push(1.0 / (1.0 + s.norm().powi(3)));
            rows.push([Cplx::new(1.0, 0.0), s, sb, s * s, s * sb, sb * sb]);
        }
        let mut ata = vec![Cplx::new(0.0, 0.0); 36];
        let mut atb = vec![Cplx::new(0.0, 0.0); 6];
        for j in 0..m {
            let w2 = ws[j] * ws[j];
            for a in 0..6 {
                for b in 0..6 {
                    ata[a * 6 + b] += rows[j][a].conj() * rows[j][b] * w2;
                }
                atb[a] += rows[j][a].conj() * pts[j].1 * w2;
            }
        }
        let coef = lu_solve_dense(ata, 6, &atb)?;
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 0..m {
            let fit: Cplx = (0..6).map(|a| rows[j][a] * coef[a]).sum();
            num += ws[j] * ws[j] * (pts[j].1 - fit).norm_sqr();
            den += ws[j] * ws[j];
        }
        worst = worst.max((num / den).sqrt() / global);
    }
    Ok(worst)
}

/// One solve's trace, appended to run reports.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub mode: Mode,
    /// Sup-norm residuals at every Newton iterate, across all continuation
    /// segments.
    pub residual_history: Vec<f64>,
    /// (fraction of the target cubic reached, Newton iterations used).
    pub continuation: Vec<(f64, usize)>,
    pub final_residual: f64,
    pub min_re_u: f64,
    pub max_re_u: f64,
}

impl SolveReport {
    pub fn to_text(&self) -> String {
        let mut s = String::from("wang solve\n");
        s.push_str(&format!(
            "mode {}\n",
            match self.mode {
                Mode::Real => "real",
                Mode::Complex => "complex",
            }
        ));
        for (f, it) in &self.continuation {
            s.push_str(&format!("segment {f:.6} newton_iters {it}\n"));
        }
        s.push_str("residuals");
        for r in &self.residual_history {
            s.push_str(&format!(" {r:.6e}"));
        }
        s.push('\n');
        s.push_str(&format!("final_residual {:.6e}\n", self.final_residual));
        s.push_str(&format!(
            "re_u_range {:.6e} {:.6e}\n",
            self.min_re_u, self.max_re_u
        ));
        s
    }
}

/// Solve A x = b with A = A_r + i diag(w_im), A_r real SPD, by alternating
/// real CG sweeps on the real and imaginary parts. Valid while the imaginary
/// diagonal is dominated by A_r, which holds near the real locus.
fn solve_split(
    ar: &SparseReal,
    w_im: &[f64],
    b: &[Cplx],
    max_outer: usize,
) -> Result<Vec<Cplx>> {
    let n = b.len();
    let bnorm = b.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if bnorm == 0.0 {
        return Ok(vec![Cplx::new(0.0, 0.0); n]);
    }
    let cap = 20 * n;
    let mut x = vec![0.0f64; n];
    let mut y = vec![0.0f64; n];
    for _ in 0..max_outer {
        let rhs_re: Vec<f64> = (0..n).map(|i| b[i].re + w_im[i] * y[i]).collect();
        x = cg_hermitian(ar, &rhs_re, 1e-13, cap).map_err(breakdown)?;
        let rhs_im: Vec<f64> = (0..n).map(|i| b[i].im - w_im[i] * x[i]).collect();
        y = cg_hermitian(ar, &rhs_im, 1e-13, cap).map_err(breakdown)?;
        let ax = ar.apply(&x);
        let ay = ar.apply(&y);
        let mut rn = 0.0;
        for i in 0..n {
            let r = Cplx::new(ax[i] - w_im[i] * y[i] - b[i].re, ay[i] + w_im[i] * x[i] - b[i].im);
            rn += r.norm_sqr();
        }
        // One decade below SOLVE_TOL is all Newton needs; asking for more
        // runs into the true-residual floor of CG on fine meshes.
        if rn.sqrt() <= 1e-10 * bnorm {
            return Ok((0..n).map(|i| Cplx::new(x[i], y[i])).collect());
        }
    }
    Err(Error::SingularLinearization(
        "split complex solve stalled: imaginary part not dominated".into(),
    ))
}

fn breakdown(e: Error) -> Error {
    Error::SingularLinearization(format!("inner linear solve failed: {e}"))
}

struct NewtonOutcome {
    iters: usize,
}

/// Newton iteration at a fixed cubic amplitude. `h` is the pairing of the
/// current (ramped) cubic data; `scale` is lambda0 / lambda_base per dof.
#[allow(clippy::too_many_arguments)]
fn newton_at(
    ops: &WangOps,
    scale: &[Cplx],
    h: &[Cplx],
    u: &mut Vec<Cplx>,
    history: &mut Vec<f64>,
) -> Result<NewtonOutcome> {
    let nd = u.len();
    let mut prev = f64::INFINITY;
    let mut stall = 0usize;
    for iter in 0..60 {
        let ku = apply_real(&ops.stiffness, u);
        let mut g = Vec::with_capacity(nd);
        for d in 0..nd {
            let lap_u = -ku[d] / ops.mass[d] * scale[d];
            let e2 = (2.0 * u[d]).exp();
            let em4 = (-4.0 * u[d]).exp();
            g.push(lap_u - e2 + 0.25 * h[d] * em4 + 1.0);
        }
        let rinf = g.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
        history.push(rinf);
        if rinf <= SOLVE_TOL {
            return Ok(NewtonOutcome { iters: iter });
        }
        if rinf >= prev {
            stall += 1;
            if stall >= 3 {
                return Err(Error::NewtonDivergence(format!(
                    "residual {rinf:.3e} failed to contract over 3 steps"
                )));
            }
        } else {
            stall = 0;
        }
        prev = rinf;
        // Row-rescale L delta = -G by -mass/scale: the system becomes
        // (K + diag(mass * mult / scale)) delta = mass * G / scale with
        // mult = 2 e^{2u} + e^{-4u} h, SPD up to the imaginary diagonal.
        let mut w_re = vec![0.0f64; nd];
        let mut w_im = vec![0.0f64; nd];
        let mut b = Vec::with_capacity(nd);
        for d in 0..nd {
            let e2 = (2.0 * u[d]).exp();
            let em4 = (-4.0 * u[d]).exp();
            let mult = 2.0 * e2 + em4 * h[d];
            let w = ops.mass[d] * mult / scale[d];
            w_re[d] = w.re;
            w_im[d] = w.im;
            b.push(ops.mass[d] * g[d] / scale[d]);
        }
        let ar = ops.stiffness.add_diagonal(&w_re);
        let delta = solve_split(&ar, &w_im, &b, 200)?;
        for d in 0..nd {
            u[d] += delta[d];
        }
    }
    Err(Error::NewtonDivergence(
        "iteration cap reached before the residual met tolerance".into(),
    ))
}

/// Solve G = 0 for u by Newton continuation along the linear ramp
/// Q <- f Q_target, f = k/N, warm-started, halving the continuation step on
/// divergence (at most 4 halvings). Initial guess u = 0, exact at Q = 0.
/// Fields whose values are inconsistent with the edge-identification cocycle
/// are rejected before solving.
pub fn solve_wang(
    mesh: &Mesh,
    ops: &WangOps,
    lambda_base: Option<&[Cplx]>,
    q1: &DifferentialField,
    qbar2: &DifferentialField,
    mode: Mode,
    continuation_steps: usize,
) -> Result<(AffineSphereData, SolveReport)> {
    let nd = mesh.n_dofs();
    let lb: Vec<Cplx> = match lambda_base {
        Some(l) => {
            if l.len() != nd {
                return Err(Error::MeshMismatch);
            }
            l.to_vec()
        }
        None => ops.lambda0.iter().map(|&l| Cplx::new(l, 0.0)).collect(),
    };
    let qscale = q1
        .values
        .iter()
        .chain(&qbar2.values)
        .map(|v| v.norm())
        .fold(0.0f64, f64::max);
    if mode == Mode::Real {
        for d in 0..nd {
            if (qbar2.values[d] - q1.values[d].conj()).norm() > 1e-12 * qscale.max(1e-300) {
                return Err(Error::InvalidInput(
                    "real mode needs Qbar2 = conjugate(Q1)".into(),
                ));
            }
            if lb[d].im.abs() > 1e-12 * lb[d].re.abs() || lb[d].re <= 0.0 {
                return Err(Error::InvalidInput(
                    "real mode needs a positive real metric density".into(),
                ));
            }
        }
    }
    for (name, f) in [("Q1", q1), ("Qbar2", qbar2)] {
        let defect = cocycle_defect(f, mesh)?;
        if defect > 0.05 {
            return Err(Error::InvalidInput(format!(
                "{name} violates the edge-identification cocycle: relative ring defect {defect:.3e}"
            )));
        }
    }
    let h_target = pairing_h(q1, qbar2, mesh, Some(&lb))?;
    let scale: Vec<Cplx> = (0..nd).map(|d| ops.lambda0[d] / lb[d]).collect();

    let n = continuation_steps.max(1);
    let mut u = vec![Cplx::new(0.0, 0.0); nd];
    let mut history = Vec::new();
    let mut trace = Vec::new();
    let mut reached = 0.0f64;
    let mut step = 1.0 / n as f64;
    let mut halvings = 0usize;
    while reached < 1.0 - 1e-12 {
        let f = (reached + step).min(1.0);
        // The pairing is bilinear, so ramping both cubic fields by f ramps
        // h by f^2.
        let h: Vec<Cplx> = h_target.iter().map(|v| v * f * f).collect();
        let mut u_try = u.clone();
        match newton_at(ops, &scale, &h, &mut u_try, &mut history) {
            Ok(out) => {
                u = u_try;
                reached = f;
                trace.push((f, out.iters));
            }
            Err(Error::NewtonDivergence(_)) => {
                halvings += 1;
                if halvings > 4 {
                    return Err(Error::NewtonDivergence(format!(
                        "continuation stalled at fraction {reached:.4} after 4 halvings"
                    )));
                }
                step *= 0.5;
            }
            Err(e) => return Err(e),
        }
    }

    let sigma = AffineSphereData {
        mesh_checksum: mesh.checksum(),
        lambda_base: lb,
        q1: q1.clone(),
        qbar2: qbar2.clone(),
        u,
        mode,
    };
    let g = residual_g(&sigma, mesh, ops)?;
    let final_residual = g.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    let min_re_u = sigma.u.iter().map(|v| v.re).fold(f64::INFINITY, f64::min);
    let max_re_u = sigma
        .u
        .iter()
        .map(|v| v.re)
        .fold(f64::NEG_INFINITY, f64::max);
    if mode == Mode::Real {
        let max_im = sigma.u.iter().map(|v| v.im.abs()).fold(0.0f64, f64::max);
        if max_im > 1e-10 {
            return Err(Error::NewtonDivergence(format!(
                "real-mode solution has imaginary part {max_im:.3e}"
            )));
        }
        if min_re_u < -1e-8 {
            return Err(Error::NewtonDivergence(format!(
                "real-mode solution has min u = {min_re_u:.3e} < -1e-8"
            )));
        }
    }
    let report = SolveReport {
        mode,
        residual_history: history,
        continuation: trace,
        final_residual,
        min_re_u,
        max_re_u,
    };
    Ok((sigma, report))
}
