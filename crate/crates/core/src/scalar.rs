//! Scalar abstraction: real floating types that carry a dense complex LAPACK backend.

use std::fmt::{Debug, Display, LowerExp};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

use crate::backend::Backend;

/// Real floating-point scalar the whole crate is generic over.
pub trait Real:
    Float
    + NumAssign
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
    + Backend
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Euler–Mascheroni constant.
    fn euler_gamma() -> Self {
        Self::lit(0.577_215_664_901_532_9)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type C<T> = Complex<T>;

#[inline]
pub fn c<T: Real>(re: f64, im: f64) -> C<T> {
    Complex::new(T::lit(re), T::lit(im))
}

#[inline]
pub fn cr<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}

/// Principal-branch logarithm with the cut along the negative real axis.
#[inline]
pub fn log_principal<T: Real>(z: C<T>) -> C<T> {
    Complex::new(z.norm().ln(), z.im.atan2(z.re))
}

/// Logarithm with the branch cut along the ray of angle `theta`.
///
/// The imaginary part lies in `(theta - 2π, theta)`.
pub fn log_with_cut<T: Real>(z: C<T>, theta: T) -> C<T> {
    let two_pi = T::PI() + T::PI();
    let mut arg = z.im.atan2(z.re);
    while arg >= theta {
        arg = arg - two_pi;
    }
    while arg < theta - two_pi {
        arg = arg + two_pi;
    }
    Complex::new(z.norm().ln(), arg)
}
