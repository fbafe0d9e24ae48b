use super::scalar::rc;
use num_traits::{Float, NumAssign, One, Zero};

/// Dense real symmetric matrix (row-major), validated on construction.
#[derive(Debug, Clone)]
pub struct DenseSymmetric<R> {
    n: usize,
    a: Vec<R>,
}

impl<R: Float + NumAssign + std::fmt::Debug> DenseSymmetric<R> {
    pub fn new(n: usize, a: Vec<R>) -> crate::error::Result<Self> {
        assert_eq!(a.len(), n * n);
        let scale = a.iter().fold(R::zero(), |m, &x| m.max(x.abs()));
        let tol = rc::<R>(1e-12) * scale.max(R::min_positive_value());
        for i in 0..n {
            for j in 0..i {
                if (a[i * n + j] - a[j * n + i]).abs() > tol {
                    return Err(crate::Error::InvalidInput(format!(
                        "matrix not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(DenseSymmetric { n, a })
    }

    pub fn dim(&self) -> usize {
        self.n
    }
    pub fn entries(&self) -> &[R] {
        &self.a
    }
}

/// Cyclic Jacobi eigendecomposition of a dense symmetric matrix.
/// Returns eigenvalues ascending and the matching eigenvectors as columns of
/// the returned row-major n x n matrix.
pub fn eig_symmetric<R: Float + NumAssign + std::fmt::Debug>(
    m: &DenseSymmetric<R>,
) -> (Vec<R>, Vec<R>) {
    let n = m.n;
    let mut a = m.a.clone();
    let mut v = vec![R::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = R::one();
    }
    if n > 1 {
        let eps = rc::<R>(1e-30);
        let frob = a.iter().fold(R::zero(), |s, &x| s + x * x).sqrt();
        let stop = eps.max(R::epsilon() * R::epsilon()) * frob.max(R::min_positive_value());
        for _sweep in 0..100 {
            let mut off = R::zero();
            for p in 0..n {
                for q in p + 1..n {
                    off += a[p * n + q] * a[p * n + q];
                }
            }
            if off.sqrt() <= stop {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[p * n + q];
                    if apq.abs() <= R::epsilon() * frob {
                        continue;
                    }
                    let app = a[p * n + p];
                    let aqq = a[q * n + q];
                    let theta = (aqq - app) / (rc::<R>(2.0) * apq);
                    let t = {
                        let s = if theta >= R::zero() {
                            R::one()
                        } else {
                            -R::one()
                        };
                        s / (theta.abs() + (theta * theta + R::one()).sqrt())
                    };
                    let c = R::one() / (t * t + R::one()).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = c * akp - s * akq;
                        a[k * n + q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = c * apk - s * aqk;
                        a[q * n + k] = s * apk + c * aqk;
                    }
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = c * vkp - s * vkq;
                        v[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[i * n + i]
            .partial_cmp(&a[j * n + j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let evals: Vec<R> = order.iter().map(|&i| a[i * n + i]).collect();
    let mut evecs = vec![R::zero(); n * n];
    for (newc, &oldc) in order.iter().enumerate() {
        for r in 0..n {
            evecs[r * n + newc] = v[r * n + oldc];
        }
    }
    (evals, evecs)
}

/// Hermitian Jacobi eigendecomposition, generic over real or complex
/// scalars: each pivot is phase-rotated to a real entry, then eliminated with
/// a real rotation. Returns eigenvalues ascending with orthonormal
/// eigenvectors as columns of a row-major n x n matrix.
pub fn eig_hermitian<T: crate::numerics::Scalar>(n: usize, h: &[T]) -> (Vec<T::R>, Vec<T>) {
    assert_eq!(h.len(), n * n);
    let mut a = h.to_vec();
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }
    let frob = a
        .iter()
        .fold(T::R::zero(), |s, x| s + x.abs() * x.abs())
        .sqrt()
        .max(T::R::min_positive_value());
    let stop = rc::<T::R>(1e-28) * frob;
    let half = rc::<T::R>(0.5);
    for _sweep in 0..100 {
        let mut off = T::R::zero();
        for p in 0..n {
            for q in p + 1..n {
                let x = a[p * n + q].abs();
                off += x * x;
            }
        }
        if off.sqrt() <= stop {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let beta = a[p * n + q];
                let ab = beta.abs();
                if ab <= T::R::epsilon() * frob {
                    continue;
                }
                // Phase-rotate column q so the pivot becomes real positive.
                let d = beta.conj().scale(T::R::one() / ab);
                for k in 0..n {
                    a[k * n + q] = a[k * n + q] * d;
                }
                let dc = d.conj();
                for k in 0..n {
                    a[q * n + k] = a[q * n + k] * dc;
                }
                for k in 0..n {
                    v[k * n + q] = v[k * n + q] * d;
                }
                let app = a[p * n + p].re();
                let aqq = a[q * n + q].re();
                let theta = (aqq - app) / (ab / half);
                let sgn = if theta >= T::R::zero() {
                    T::R::one()
                } else {
                    -T::R::one()
                };
                let t = sgn / (theta.abs() + (theta * theta + T::R::one()).sqrt());
                let c = T::R::one() / (t * t + T::R::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp.scale(c) - akq.scale(s);
                    a[k * n + q] = akp.scale(s) + akq.scale(c);
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = apk.scale(c) - aqk.scale(s);
                    a[q * n + k] = apk.scale(s) + aqk.scale(c);
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = vkp.scale(c) - vkq.scale(s);
                    v[k * n + q] = vkp.scale(s) + vkq.scale(c);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[i * n + i]
            .re()
            .partial_cmp(&a[j * n + j].re())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let evals: Vec<T::R> = order.iter().map(|&i| a[i * n + i].re()).collect();
    let mut evecs = vec![T::zero(); n * n];
    for (newc, &oldc) in order.iter().enumerate() {
        for r in 0..n {
            evecs[r * n + newc] = v[r * n + oldc];
        }
    }
    (evals, evecs)
}
