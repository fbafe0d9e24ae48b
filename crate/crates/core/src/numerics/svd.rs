use num_traits::{Float, One, Zero};
use super::jacobi::eig_hermitian;
use super::scalar::{rc, dot, norm2, Scalar};
use super::sparse::SparseOperator;
use crate::error::Result;

/// Orthonormal basis of the k-dimensional subspace of smallest singular
/// values of A (rows >= columns), plus the singular values, nondecreasing.
pub fn smallest_singular_subspace<T: Scalar>(
    a: &SparseOperator<T>,
    k: usize,
) -> Result<(Vec<Vec<T>>, Vec<T::R>)> {
    smallest_singular_subspace_with_prec(a, k, None::<&fn(&[T]) -> Vec<T>>, 500)
}

/// Same, with an optional preconditioner approximating (A^H A)^-1 applied to
/// block residuals, and an iteration cap for the blocked eigensolver.
pub fn smallest_singular_subspace_with_prec<T: Scalar, P>(
    a: &SparseOperator<T>,
    k: usize,
    prec: Option<&P>,
    max_iter: usize,
) -> Result<(Vec<Vec<T>>, Vec<T::R>)>
where
    P: Fn(&[T]) -> Vec<T> + ?Sized,
{
    assert!(a.nrows() >= a.ncols(), "need rows >= columns");
    assert!(k < a.ncols(), "k must be below the column count");
    let n = a.ncols();
    if n <= 96 {
        return dense_path(a, k);
    }
    lobpcg_path(a, k, prec, max_iter)
}

fn apply_normal<T: Scalar>(a: &SparseOperator<T>, x: &[T]) -> Vec<T> {
    a.apply_adjoint(&a.apply(x))
}

fn dense_path<T: Scalar>(a: &SparseOperator<T>, k: usize) -> Result<(Vec<Vec<T>>, Vec<T::R>)> {
    let n = a.ncols();
    // B = A^H A accumulated row by row of A.
    let mut b = vec![T::zero(); n * n];
    for r in 0..a.nrows() {
        let (cols, vals) = a.row(r);
        for (i, &ci) in cols.iter().enumerate() {
            for (j, &cj) in cols.iter().enumerate() {
                b[ci * n + cj] += vals[i].conj() * vals[j];
            }
        }
    }
    let (evals, evecs) = eig_hermitian(n, &b);
    let mut vecs = Vec::with_capacity(k);
    let mut sigmas = Vec::with_capacity(k);
    for col in 0..k {
        let v: Vec<T> = (0..n).map(|r| evecs[r * n + col]).collect();
        sigmas.push(evals[col].max(T::R::zero()).sqrt());
        vecs.push(v);
    }
    Ok((vecs, sigmas))
}

/// Deterministic pseudo-random stream for reproducible starting blocks.
fn splitmix(state: &mut u64) -> f64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z = z ^ (z >> 31);
    (z >> 11) as f64 / (1u64 << 53) as f64 - 0.5
}

/// Modified Gram-Schmidt (two passes) dropping near-dependent columns.
fn orthonormalize<T: Scalar>(cols: &mut Vec<Vec<T>>) {
    let drop_tol = rc::<T::R>(1e-8);
    let mut kept: Vec<Vec<T>> = Vec::with_capacity(cols.len());
    for mut c in cols.drain(..) {
        let orig = norm2(&c).max(T::R::min_positive_value());
        for _pass in 0..2 {
            for u in &kept {
                let ip = dot(u, &c);
                for (ci, ui) in c.iter_mut().zip(u) {
                    *ci -= ip * *ui;
                }
            }
        }
        let nn = norm2(&c);
        if nn > drop_tol * orig {
            let inv = T::R::one() / nn;
            for ci in &mut c {
                *ci = ci.scale(inv);
            }
            kept.push(c);
        }
    }
    *cols = kept;
}

fn lobpcg_path<T: Scalar, P>(
    a: &SparseOperator<T>,
    k: usize,
    prec: Option<&P>,
    max_iter: usize,
) -> Result<(Vec<Vec<T>>, Vec<T::R>)>
where
    P: Fn(&[T]) -> Vec<T> + ?Sized,
{
    let n = a.ncols();
    let m = (k + 4).min(n - 1).max(k);
    // Norm estimate of A^H A by power iteration, for the stopping rule.
    let mut state = 0x5eed5eed5eedu64;
    let mut pw: Vec<T> = (0..n).map(|_| T::from_re(rc::<T::R>(splitmix(&mut state)))).collect();
    let mut lam_max = T::R::one();
    for _ in 0..25 {
        let nn = norm2(&pw).max(T::R::min_positive_value());
        for v in &mut pw {
            *v = v.scale(T::R::one() / nn);
        }
        pw = apply_normal(a, &pw);
        lam_max = norm2(&pw);
    }
    let lam_max = lam_max.max(T::R::min_positive_value());
    let tol_res = rc::<T::R>(3e-9) * lam_max;

    let mut x: Vec<Vec<T>> = (0..m)
        .map(|_| {
            (0..n)
                .map(|_| T::from_re(rc::<T::R>(splitmix(&mut state))))
                .collect()
        })
        .collect();
    orthonormalize(&mut x);
    let verbose = std::env::var_os("SSS_VERBOSE").is_some();
    let mut p_block: Vec<Vec<T>> = Vec::new();
    let mut theta = vec![T::R::zero(); m];
    for _it in 0..max_iter {
        if verbose && _it % 25 == 0 {
            eprintln!("lobpcg it {_it}: theta {:?}", &theta[..k.min(theta.len())]);
        }
        // Residuals of the current Ritz block.
        let bx: Vec<Vec<T>> = x.iter().map(|c| apply_normal(a, c)).collect();
        for (i, (xc, bc)) in x.iter().zip(&bx).enumerate() {
            theta[i] = dot(xc, bc).re();
        }
        let mut resn = vec![T::R::zero(); x.len()];
        let mut w_block: Vec<Vec<T>> = Vec::with_capacity(x.len());
        for i in 0..x.len() {
            let r: Vec<T> = bx[i]
                .iter()
                .zip(&x[i])
                .map(|(b, xi)| *b - xi.scale(theta[i]))
                .collect();
            resn[i] = norm2(&r);
            let w = match prec {
                Some(f) => f(&r),
                None => r,
            };
            w_block.push(w);
        }
        if resn.iter().take(k).all(|&r| r <= tol_res) {
            break;
        }
        // Rayleigh-Ritz over [X, W, P].
        let mut s: Vec<Vec<T>> = Vec::with_capacity(3 * m);
        s.extend(x.iter().cloned());
        let x_len = x.len();
        s.extend(w_block);
        s.extend(p_block.iter().cloned());
        orthonormalize(&mut s);
        let h = s.len();
        let bs: Vec<Vec<T>> = s.iter().map(|c| apply_normal(a, c)).collect();
        let mut gram = vec![T::zero(); h * h];
        for i in 0..h {
            for j in 0..h {
                gram[i * h + j] = dot(&s[i], &bs[j]);
            }
        }
        // Symmetrize round-off.
        for i in 0..h {
            for j in 0..i {
                let v = (gram[i * h + j] + gram[j * h + i].conj()).scale(rc::<T::R>(0.5));
                gram[i * h + j] = v;
                gram[j * h + i] = v.conj();
            }
        }
        let (evals, evecs) = eig_hermitian(h, &gram);
        let take = m.min(h);
        let mut x_new: Vec<Vec<T>> = Vec::with_capacity(take);
        let mut p_new: Vec<Vec<T>> = Vec::with_capacity(take);
        for col in 0..take {
            let mut xc = vec![T::zero(); n];
            let mut pc = vec![T::zero(); n];
            for (row, sc) in s.iter().enumerate() {
                let y = evecs[row * h + col];
                if y.abs() == T::R::zero() {
                    continue;
                }
                for (xi, si) in xc.iter_mut().zip(sc) {
                    *xi += y * *si;
                }
                if row >= x_len.min(s.len()) {
                    for (pi, si) in pc.iter_mut().zip(sc) {
                        *pi += y * *si;
                    }
                }
            }
            x_new.push(xc);
            p_new.push(pc);
        }
        let _ = evals;
        x = x_new;
        orthonormalize(&mut x);
        p_block = p_new;
        orthonormalize(&mut p_block);
        if p_block.len() > m {
            p_block.truncate(m);
        }
    }
    // Final Ritz restriction to get clean pairs on the converged block.
    orthonormalize(&mut x);
    let h = x.len();
    let bx: Vec<Vec<T>> = x.iter().map(|c| apply_normal(a, c)).collect();
    let mut gram = vec![T::zero(); h * h];
    for i in 0..h {
        for j in 0..h {
            gram[i * h + j] = dot(&x[i], &bx[j]);
        }
    }
    for i in 0..h {
        for j in 0..i {
            let v = (gram[i * h + j] + gram[j * h + i].conj()).scale(rc::<T::R>(0.5));
            gram[i * h + j] = v;
            gram[j * h + i] = v.conj();
        }
    }
    let (evals, evecs) = eig_hermitian(h, &gram);
    if h < k {
        return Err(crate::Error::NonConvergence(
            "singular subspace block collapsed".into(),
        ));
    }
    let mut vecs = Vec::with_capacity(k);
    let mut sigmas = Vec::with_capacity(k);
    for col in 0..k {
        let mut v = vec![T::zero(); n];
        for (row, xc) in x.iter().enumerate() {
            let y = evecs[row * h + col];
            for (vi, xi) in v.iter_mut().zip(xc) {
                *vi += y * *xi;
            }
        }
        sigmas.push(evals[col].max(T::R::zero()).sqrt());
        vecs.push(v);
    }
    Ok((vecs, sigmas))
}
