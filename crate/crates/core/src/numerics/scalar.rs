use num_complex::Complex;
use num_traits::{Float, NumAssign};

/// Real or complex field element usable by the generic kernels.
pub trait Scalar:
    Copy
    + std::fmt::Debug
    + PartialEq
    + NumAssign
    + num_traits::Zero
    + num_traits::One
    + std::ops::Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    type R: Float
        + NumAssign
        + std::fmt::Debug
        + std::fmt::Display
        + std::fmt::LowerExp
        + Send
        + Sync
        + 'static;

    fn conj(self) -> Self;
    fn abs(self) -> Self::R;
    fn re(self) -> Self::R;
    fn from_re(r: Self::R) -> Self;
    /// Multiply by a real scalar.
    fn scale(self, r: Self::R) -> Self;
}

macro_rules! impl_scalar_real {
    ($t:ty) => {
        impl Scalar for $t {
            type R = $t;
            fn conj(self) -> Self {
                self
            }
            fn abs(self) -> Self::R {
                Float::abs(self)
            }
            fn re(self) -> Self::R {
                self
            }
            fn from_re(r: Self::R) -> Self {
                r
            }
            fn scale(self, r: Self::R) -> Self {
                self * r
            }
        }
    };
}

impl_scalar_real!(f32);
impl_scalar_real!(f64);

macro_rules! impl_scalar_complex {
    ($t:ty) => {
        impl Scalar for Complex<$t> {
            type R = $t;
            fn conj(self) -> Self {
                Complex::conj(&self)
            }
            fn abs(self) -> Self::R {
                self.norm()
            }
            fn re(self) -> Self::R {
                self.re
            }
            fn from_re(r: Self::R) -> Self {
                Complex::new(r, 0.0)
            }
            fn scale(self, r: Self::R) -> Self {
                Complex::new(self.re * r, self.im * r)
            }
        }
    };
}

impl_scalar_complex!(f32);
impl_scalar_complex!(f64);

/// Inner product conj(x)·y.
pub fn dot<T: Scalar>(x: &[T], y: &[T]) -> T {
    debug_assert_eq!(x.len(), y.len());
    let mut s = T::zero();
    for (a, b) in x.iter().zip(y) {
        s += a.conj() * *b;
    }
    s
}

pub fn norm2<T: Scalar>(x: &[T]) -> T::R {
    dot(x, x).re().sqrt()
}

pub fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * *xi;
    }
}

/// Cast an f64 constant into a generic real scalar.
pub fn rc<R: Float>(x: f64) -> R {
    R::from(x).unwrap()
}
