use num_traits::{One, Zero};
use super::scalar::{rc, Scalar};

/// Dense LU solve with partial pivoting; `a` is row-major n x n and is
/// consumed. Returns SingularOperator on pivot breakdown.
pub fn lu_solve_dense<T: Scalar>(
    mut a: Vec<T>,
    n: usize,
    b: &[T],
) -> crate::error::Result<Vec<T>> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n);
    let mut x = b.to_vec();
    let mut scale = T::R::zero();
    for v in &a {
        if v.abs() > scale {
            scale = v.abs();
        }
    }
    if n > 0 && scale == T::R::zero() {
        return Err(crate::Error::SingularOperator("zero matrix".into()));
    }
    let eps = rc::<T::R>(1e-14) * scale;
    for k in 0..n {
        let mut piv = k;
        let mut best = a[k * n + k].abs();
        for r in k + 1..n {
            if a[r * n + k].abs() > best {
                best = a[r * n + k].abs();
                piv = r;
            }
        }
        if best <= eps {
            return Err(crate::Error::SingularOperator(format!(
                "pivot {best:?} at column {k}"
            )));
        }
        if piv != k {
            for c in 0..n {
                a.swap(k * n + c, piv * n + c);
            }
            x.swap(k, piv);
        }
        let inv_kk = T::one() / a[k * n + k];
        for r in k + 1..n {
            let f = a[r * n + k] * inv_kk;
            a[r * n + k] = f;
            for c in k + 1..n {
                let t = a[k * n + c];
                a[r * n + c] -= f * t;
            }
            let t = x[k];
            x[r] -= f * t;
        }
    }
    for k in (0..n).rev() {
        for c in k + 1..n {
            let t = x[c];
            x[k] -= a[k * n + c] * t;
        }
        x[k] /= a[k * n + k];
    }
    Ok(x)
}

/// Row `coeff` of the pseudoinverse of a dense m x n (m >= n) matrix, via
/// Householder QR: the returned length-m functional f satisfies
/// f·data = (least-squares solution)[coeff].
pub fn householder_lsq_functional<T: Scalar>(
    a: &[T],
    m: usize,
    n: usize,
    coeff: usize,
) -> crate::error::Result<Vec<T>> {
    assert_eq!(a.len(), m * n);
    assert!(m >= n && coeff < n);
    let mut q: Vec<T> = a.to_vec(); // becomes R in the upper triangle
    let mut reflectors: Vec<(usize, Vec<T>)> = Vec::with_capacity(n);
    for k in 0..n {
        // Householder vector for column k below the diagonal.
        let mut v: Vec<T> = (k..m).map(|r| q[r * n + k]).collect();
        let alpha = super::scalar::norm2(&v);
        if alpha == T::R::zero() {
            return Err(crate::Error::SingularOperator(
                "rank-deficient least-squares fit".into(),
            ));
        }
        // phase(v0)*alpha so that the update cancels the subdiagonal.
        let v0 = v[0];
        let phase = if v0.abs() == T::R::zero() {
            T::one()
        } else {
            v0.scale(T::R::one() / v0.abs())
        };
        v[0] += phase.scale(alpha);
        let vn = super::scalar::norm2(&v);
        if vn == T::R::zero() {
            return Err(crate::Error::SingularOperator("qr breakdown".into()));
        }
        for vi in &mut v {
            *vi = vi.scale(T::R::one() / vn);
        }
        // Apply I - 2 v v^H to the trailing block.
        for c in k..n {
            let mut s = T::zero();
            for (i, vi) in v.iter().enumerate() {
                s += vi.conj() * q[(k + i) * n + c];
            }
            let s2 = s + s;
            for (i, vi) in v.iter().enumerate() {
                q[(k + i) * n + c] -= *vi * s2;
            }
        }
        reflectors.push((k, v));
    }
    // Solve R^t y = e_coeff (forward substitution on the transpose).
    let mut y = vec![T::zero(); n];
    for i in 0..n {
        let mut s = if i == coeff { T::one() } else { T::zero() };
        for j in 0..i {
            s -= q[j * n + i] * y[j];
        }
        let d = q[i * n + i];
        if d.abs() <= rc::<T::R>(1e-300) {
            return Err(crate::Error::SingularOperator("singular R".into()));
        }
        y[i] = s / d;
    }
    // f_j = sum_i y_i conj(Q_ji) = conj((Q conj(y))_j), with Q applied as
    // H_1 ... H_n acting on the zero-padded vector.
    let mut w = vec![T::zero(); m];
    for (wi, yi) in w.iter_mut().zip(&y) {
        *wi = yi.conj();
    }
    for (k, v) in reflectors.iter().rev() {
        let mut s = T::zero();
        for (i, vi) in v.iter().enumerate() {
            s += vi.conj() * w[k + i];
        }
        let s2 = s + s;
        for (i, vi) in v.iter().enumerate() {
            w[k + i] -= *vi * s2;
        }
    }
    Ok(w.iter().map(|wi| wi.conj()).collect())
}
