use num_traits::{Float, One, Zero};
use super::scalar::{rc, axpy, dot, norm2, Scalar};
use super::sparse::SparseOperator;
use crate::error::Result;

/// Jacobi-preconditioned conjugate gradients for hermitian positive-definite
/// systems. `diag` supplies the preconditioner (entries clamped away from 0).
pub fn cg_hermitian<T: Scalar>(
    a: &SparseOperator<T>,
    b: &[T],
    rel_tol: T::R,
    max_iter: usize,
) -> Result<Vec<T>> {
    let n = b.len();
    let diag = a.diagonal();
    let dmax = diag
        .iter()
        .map(|d| d.abs())
        .fold(T::R::zero(), |m, x| if x > m { x } else { m });
    let floor = rc::<T::R>(1e-14) * dmax.max(T::R::min_positive_value());
    let prec = |r: &[T]| -> Vec<T> {
        r.iter()
            .zip(&diag)
            .map(|(ri, di)| {
                let d = di.re();
                let d = if d.abs() < floor { T::R::one() } else { d };
                ri.scale(T::R::one() / d)
            })
            .collect()
    };
    let bnorm = norm2(b);
    if bnorm == T::R::zero() {
        return Ok(vec![T::zero(); n]);
    }
    let mut x = vec![T::zero(); n];
    let mut r = b.to_vec();
    let mut z = prec(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![T::zero(); n];
    for _ in 0..max_iter {
        a.matvec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap.re() <= T::R::zero() || pap.abs() == T::R::zero() {
            return Err(crate::Error::SingularOperator(
                "CG breakdown: operator not positive definite".into(),
            ));
        }
        let alpha = rz * (T::one() / pap);
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        if norm2(&r) <= rel_tol * bnorm {
            return Ok(x);
        }
        z = prec(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new * (T::one() / rz);
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(crate::Error::NonConvergence(format!(
        "CG: residual {:e} after {max_iter} iterations",
        norm2(&r) / bnorm
    )))
}

/// Restarted GMRES with Jacobi preconditioning (right-preconditioned).
pub fn gmres<T: Scalar>(
    a: &SparseOperator<T>,
    b: &[T],
    rel_tol: T::R,
    restart: usize,
    max_iter: usize,
) -> Result<Vec<T>> {
    let n = b.len();
    let diag = a.diagonal();
    let dmax = diag
        .iter()
        .map(|d| d.abs())
        .fold(T::R::zero(), |m, x| if x > m { x } else { m });
    let floor = rc::<T::R>(1e-14) * dmax.max(T::R::min_positive_value());
    let minv: Vec<T> = diag
        .iter()
        .map(|d| {
            if d.abs() < floor {
                T::one()
            } else {
                T::one() / *d
            }
        })
        .collect();
    let bnorm = norm2(b);
    if bnorm == T::R::zero() {
        return Ok(vec![T::zero(); n]);
    }
    let mut x = vec![T::zero(); n];
    let mut total = 0usize;
    let m = restart.max(2);
    let mut ax = vec![T::zero(); n];
    while total < max_iter {
        a.matvec(&x, &mut ax);
        let mut r: Vec<T> = b.iter().zip(&ax).map(|(bi, ai)| *bi - *ai).collect();
        let beta = norm2(&r);
        if beta <= rel_tol * bnorm {
            return Ok(x);
        }
        for ri in &mut r {
            *ri = ri.scale(T::R::one() / beta);
        }
        let mut v: Vec<Vec<T>> = vec![r];
        let mut h = vec![vec![T::zero(); 0]; 0]; // h[j] has j+2 entries
        let mut g = vec![T::zero(); m + 1];
        g[0] = T::from_re(beta);
        let mut cs: Vec<T> = Vec::new();
        let mut sn: Vec<T> = Vec::new();
        let mut k_used = 0;
        for j in 0..m {
            if total >= max_iter {
                break;
            }
            total += 1;
            // w = A M^-1 v_j
            let zj: Vec<T> = v[j].iter().zip(&minv).map(|(vi, mi)| *vi * *mi).collect();
            let mut w = vec![T::zero(); n];
            a.matvec(&zj, &mut w);
            let mut hj = vec![T::zero(); j + 2];
            for (i, vi) in v.iter().enumerate() {
                let hij = dot(vi, &w);
                hj[i] = hij;
                axpy(-hij, vi, &mut w);
            }
            // Re-orthogonalize once for stability.
            for (i, vi) in v.iter().enumerate() {
                let corr = dot(vi, &w);
                hj[i] += corr;
                axpy(-corr, vi, &mut w);
            }
            let wn = norm2(&w);
            hj[j + 1] = T::from_re(wn);
            // Apply accumulated Givens rotations.
            for i in 0..j {
                let c = cs[i];
                let s = sn[i];
                let t1 = c.conj() * hj[i] + s.conj() * hj[i + 1];
                let t2 = -s * hj[i] + c * hj[i + 1];
                hj[i] = t1;
                hj[i + 1] = t2;
            }
            // New rotation zeroing hj[j+1].
            let denom = (hj[j].abs() * hj[j].abs() + hj[j + 1].abs() * hj[j + 1].abs()).sqrt();
            if denom == T::R::zero() {
                k_used = j + 1;
                h.push(hj);
                break;
            }
            let c = hj[j].scale(T::R::one() / denom);
            let s = hj[j + 1].scale(T::R::one() / denom);
            cs.push(c);
            sn.push(s);
            hj[j] = T::from_re(denom);
            hj[j + 1] = T::zero();
            let gj = g[j];
            g[j] = c.conj() * gj;
            g[j + 1] = -s * gj;
            h.push(hj);
            k_used = j + 1;
            if g[j + 1].abs() <= rel_tol * bnorm {
                break;
            }
            if wn == T::R::zero() {
                break;
            }
            let w: Vec<T> = w.iter().map(|wi| wi.scale(T::R::one() / wn)).collect();
            v.push(w);
        }
        // Solve the triangular system for the inner coefficients.
        let k = k_used;
        if k == 0 {
            break;
        }
        let mut y = vec![T::zero(); k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for j2 in i + 1..k {
                s -= h[j2][i] * y[j2];
            }
            y[i] = s * (T::one() / h[i][i]);
        }
        for (j, yj) in y.iter().enumerate() {
            for i in 0..n {
                x[i] += *yj * v[j][i] * minv[i];
            }
        }
    }
    a.matvec(&x, &mut ax);
    let res: Vec<T> = b.iter().zip(&ax).map(|(bi, ai)| *bi - *ai).collect();
    let rn = norm2(&res) / bnorm;
    if rn <= rel_tol {
        Ok(x)
    } else {
        Err(crate::Error::NonConvergence(format!(
            "GMRES: residual {rn:e} after {total} iterations"
        )))
    }
}

/// Solve A x = b for square nonsingular A: dense elimination for small
/// systems, CG when the matrix is hermitian with positive diagonal, restarted
/// GMRES otherwise. Relative residual 1e-10, iteration cap 10 n.
pub fn solve_sparse<T: Scalar>(a: &SparseOperator<T>, b: &[T]) -> Result<Vec<T>> {
    assert_eq!(a.nrows(), a.ncols(), "solve_sparse needs a square operator");
    assert_eq!(b.len(), a.ncols());
    let n = a.ncols();
    let tol = rc::<T::R>(1e-10);
    if n <= 128 {
        return lu_with_residual_check(a, b, tol);
    }
    let cap = 10 * n;
    let herm = a.hermitian_defect() <= rc::<T::R>(1e-12) * a.max_abs();
    if herm {
        let diag_pos = a.diagonal().iter().all(|d| d.re() > T::R::zero());
        if diag_pos {
            match cg_hermitian(a, b, tol, cap) {
                Ok(x) => return Ok(x),
                Err(crate::Error::SingularOperator(_)) => {} // indefinite: fall through
                Err(e) => return Err(e),
            }
        }
    }
    gmres(a, b, tol, 160, cap)
}

fn lu_with_residual_check<T: Scalar>(
    a: &SparseOperator<T>,
    b: &[T],
    tol: T::R,
) -> Result<Vec<T>> {
    let n = a.ncols();
    let x = super::dense::lu_solve_dense(a.to_dense(), n, b)?;
    let bnorm = norm2(b);
    if bnorm == T::R::zero() {
        return Ok(x);
    }
    let ax = a.apply(&x);
    let rn: T::R = norm2(
        &b.iter()
            .zip(&ax)
            .map(|(bi, ai)| *bi - *ai)
            .collect::<Vec<T>>(),
    ) / bnorm;
    // One step of iterative refinement if round-off left us above tolerance.
    if rn <= tol {
        return Ok(x);
    }
    let r: Vec<T> = b.iter().zip(&ax).map(|(bi, ai)| *bi - *ai).collect();
    let dx = super::dense::lu_solve_dense(a.to_dense(), n, &r)?;
    let x2: Vec<T> = x.iter().zip(&dx).map(|(xi, di)| *xi + *di).collect();
    let ax2 = a.apply(&x2);
    let rn2 = norm2(
        &b.iter()
            .zip(&ax2)
            .map(|(bi, ai)| *bi - *ai)
            .collect::<Vec<T>>(),
    ) / bnorm;
    if rn2 <= tol {
        Ok(x2)
    } else {
        Err(crate::Error::SingularOperator(format!(
            "dense solve residual {rn2:e} above tolerance"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex;

    #[test]
    fn identity_returns_rhs() {
        let a = SparseOperator::<f64>::identity(4);
        let b = vec![1.0, -2.0, 3.5, 0.0];
        let x = solve_sparse(&a, &b).unwrap();
        for (xi, bi) in x.iter().zip(&b) {
            assert!((xi - bi).abs() < 1e-12);
        }
    }

    #[test]
    fn scaled_identity() {
        let t: Vec<(usize, usize, f64)> = (0..5).map(|i| (i, i, 2.0)).collect();
        let a = SparseOperator::from_triplets(5, 5, &t);
        let x = solve_sparse(&a, &vec![1.0; 5]).unwrap();
        for xi in x {
            assert!((xi - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn periodic_laplacian_plus_identity_matches_dense() {
        let n = 8;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 3.0));
            t.push((i, (i + 1) % n, -1.0));
            t.push((i, (i + n - 1) % n, -1.0));
        }
        let a = SparseOperator::from_triplets(n, n, &t);
        let mut b = vec![0.0; n];
        b[0] = 1.0;
        let x = solve_sparse(&a, &b).unwrap();
        let xd = super::super::dense::lu_solve_dense(a.to_dense(), n, &b).unwrap();
        for (u, v) in x.iter().zip(&xd) {
            assert!(f64::abs(u - v) < 1e-9);
        }
    }

    #[test]
    fn large_spd_cg_path() {
        // 1-D Dirichlet Laplacian, n = 400, forces the iterative branch.
        let n = 400;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let a = SparseOperator::from_triplets(n, n, &t);
        let b = vec![1.0; n];
        let x = solve_sparse(&a, &b).unwrap();
        let ax = a.apply(&x);
        let rn = super::super::scalar::norm2(
            &b.iter().zip(&ax).map(|(u, v)| u - v).collect::<Vec<f64>>(),
        ) / (n as f64).sqrt();
        assert!(rn < 1e-9);
    }

    #[test]
    fn complex_symmetric_gmres_path() {
        // SPD + small imaginary symmetric perturbation, not hermitian.
        let n = 300;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, Complex::new(2.0, 0.3)));
            if i + 1 < n {
                t.push((i, i + 1, Complex::new(-1.0, 0.05)));
                t.push((i + 1, i, Complex::new(-1.0, 0.05)));
            }
        }
        let a = SparseOperator::from_triplets(n, n, &t);
        let b: Vec<Complex<f64>> = (0..n).map(|i| Complex::new(1.0 + i as f64, -0.5)).collect();
        let x = solve_sparse(&a, &b).unwrap();
        let ax = a.apply(&x);
        let mut num = 0.0;
        let mut den = 0.0;
        for (bi, ai) in b.iter().zip(&ax) {
            num += (bi - ai).norm_sqr();
            den += bi.norm_sqr();
        }
        assert!((num / den).sqrt() < 1e-10);
    }

    #[test]
    fn singular_detected() {
        let a = SparseOperator::from_triplets(3, 3, &[(0, 0, 1.0), (1, 1, 1.0)]);
        assert!(solve_sparse(&a, &[1.0, 1.0, 1.0]).is_err());
    }
}
