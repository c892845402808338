//! Hurwitz zeta `ζ(s, α) = Σ_{k≥0} (k + α)^{−s}` and its `s`-derivative by Euler–Maclaurin.

use num_traits::{One, Zero};

use crate::scalar::{log_principal, Real, C};

/// `B_{2j} / (2j)!` for `j = 1..=14`.
const BERNOULLI_OVER_FACTORIAL: [f64; 14] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -6.937_808_265_724_383e-12,
    1.574_920_032_214_788e-13,
    -3.586_688_739_721_961e-15,
    8.168_412_579_328_68e-17,
    -1.860_379_938_183_094_4e-18,
    4.237_034_208_857_498e-20,
    -9.649_909_057_561_664e-22,
    2.197_798_004_049_542_7e-23,
    -5.005_533_089_554_749e-25,
];

/// Value and `s`-derivative carried together.
#[derive(Debug, Clone, Copy)]
struct Dual<T: Real> {
    v: C<T>,
    d: C<T>,
}

impl<T: Real> Dual<T> {
    fn constant(v: C<T>) -> Self {
        Self { v, d: C::zero() }
    }
    fn variable(v: C<T>) -> Self {
        Self { v, d: C::one() }
    }
    fn add(self, o: Self) -> Self {
        Self { v: self.v + o.v, d: self.d + o.d }
    }
    fn mul(self, o: Self) -> Self {
        Self { v: self.v * o.v, d: self.d * o.v + self.v * o.d }
    }
    fn div(self, o: Self) -> Self {
        Self { v: self.v / o.v, d: (self.d * o.v - self.v * o.d) / (o.v * o.v) }
    }
    /// `x^{−self}` for a fixed base with logarithm `log_x`.
    fn neg_power_of(self, log_x: C<T>) -> Self {
        let v = (-self.v * log_x).exp();
        Self { v, d: -self.d * log_x * v }
    }
}

/// `(ζ(s, α), ∂_s ζ(s, α))`, principal branch powers; needs `Re α > 0` and `s ≠ 1`.
pub fn hurwitz_zeta_with_derivative<T: Real>(s: C<T>, alpha: C<T>) -> (C<T>, C<T>) {
    assert!(alpha.re > T::zero(), "Hurwitz parameter needs positive real part");
    let s_dual = Dual::variable(s);
    let shift = T::lit(20.0) + s.norm() + alpha.im.abs();
    let m = if alpha.re >= shift { 0 } else { (shift - alpha.re).ceil().to_usize().unwrap_or(0) };

    let mut acc = Dual::constant(C::zero());
    for k in 0..m {
        let base = alpha + T::from_usize(k).unwrap();
        acc = acc.add(s_dual.neg_power_of(log_principal(base)));
    }
    let tail = alpha + T::from_usize(m).unwrap();
    let log_tail = log_principal(tail);
    let s_minus_one = s_dual.add(Dual::constant(-C::one()));
    // (M+α)^{1−s}/(s−1)
    let pow = s_minus_one.neg_power_of(log_tail);
    acc = acc.add(pow.div(s_minus_one));
    // ½ (M+α)^{−s}
    let half = Dual::constant(C::new(T::lit(0.5), T::zero()));
    acc = acc.add(half.mul(s_dual.neg_power_of(log_tail)));
    // Σ B_{2j}/(2j)! · s(s+1)…(s+2j−2) · (M+α)^{−s−2j+1}
    let mut rising = s_dual;
    for (j, &coef) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        let j = j + 1;
        if j > 1 {
            let a = Dual::constant(C::new(T::from_usize(2 * j - 3).unwrap(), T::zero()));
            let b = Dual::constant(C::new(T::from_usize(2 * j - 2).unwrap(), T::zero()));
            rising = rising.mul(s_dual.add(a)).mul(s_dual.add(b));
        }
        let exponent = s_dual.add(Dual::constant(C::new(T::from_usize(2 * j - 1).unwrap(), T::zero())));
        let term = Dual::constant(C::new(T::lit(coef), T::zero())).mul(rising).mul(exponent.neg_power_of(log_tail));
        acc = acc.add(term);
    }
    (acc.v, acc.d)
}

pub fn hurwitz_zeta<T: Real>(s: C<T>, alpha: C<T>) -> C<T> {
    hurwitz_zeta_with_derivative(s, alpha).0
}
