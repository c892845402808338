//! Gauss–Legendre rules and adaptive Gauss–Kronrod integration of complex integrands.

use num_complex::Complex;
use num_traits::Zero;

use crate::scalar::{Real, C};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    let mut x = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0f64, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = T::lit(-z);
        x[n - 1 - i] = T::lit(z);
        w[i] = T::lit(wi);
        w[n - 1 - i] = T::lit(wi);
    }
    if n % 2 == 1 {
        x[n / 2] = T::zero();
    }
    (x, w)
}

/// Composite Gauss–Legendre rule on `[a, b]` with `panels` equal panels of `order` points.
pub fn composite_rule<T: Real>(a: T, b: T, panels: usize, order: usize) -> (Vec<T>, Vec<T>) {
    let (gx, gw) = gauss_legendre::<T>(order);
    let h = (b - a) / T::from_usize(panels).unwrap();
    let half = h / T::lit(2.0);
    let mut xs = Vec::with_capacity(panels * order);
    let mut ws = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let mid = a + h * T::from_usize(p).unwrap() + half;
        for (x, w) in gx.iter().zip(&gw) {
            xs.push(mid + half * *x);
            ws.push(half * *w);
        }
    }
    (xs, ws)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod15<T: Real, F: Fn(T) -> C<T>>(f: &F, a: T, b: T) -> (C<T>, T) {
    let two = T::lit(2.0);
    let c = (a + b) / two;
    let h = (b - a) / two;
    let fc = f(c);
    let mut k = fc * T::lit(WGK[7]);
    let mut g = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = h * T::lit(XGK[j]);
        let s = f(c - dx) + f(c + dx);
        k = k + s * T::lit(WGK[j]);
        if j % 2 == 1 {
            g = g + s * T::lit(WG[j / 2]);
        }
    }
    ((k * h), ((k - g) * h).norm())
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral<T> {
    pub value: C<T>,
    pub error: T,
}

/// Adaptive G7–K15 quadrature on a finite interval.
pub fn integrate<T: Real, F: Fn(T) -> C<T>>(f: F, a: T, b: T, abs_tol: T, rel_tol: T) -> Integral<T> {
    let mut stack = vec![(a, b, 0usize)];
    let mut value = C::<T>::zero();
    let mut error = T::zero();
    let (whole, _) = kronrod15(&f, a, b);
    let target = abs_tol.max(rel_tol * whole.norm());
    let width = (b - a).abs();
    while let Some((lo, hi, depth)) = stack.pop() {
        let (v, e) = kronrod15(&f, lo, hi);
        let share = target * ((hi - lo).abs() / width);
        if e <= share || depth >= 48 {
            value = value + v;
            error = error + e;
        } else {
            let mid = (lo + hi) / T::lit(2.0);
            stack.push((lo, mid, depth + 1));
            stack.push((mid, hi, depth + 1));
        }
    }
    Integral { value, error }
}

/// Adaptive quadrature on `[a, ∞)` through `x = a + s·t/(1−t)`.
pub fn integrate_to_infinity<T: Real, F: Fn(T) -> C<T>>(f: F, a: T, scale: T, abs_tol: T, rel_tol: T) -> Integral<T> {
    let g = |t: T| {
        let one = T::one();
        if t >= one {
            return C::zero();
        }
        let d = one - t;
        let x = a + scale * t / d;
        f(x) * (scale / (d * d))
    };
    integrate(g, T::zero(), T::one(), abs_tol, rel_tol)
}

/// Adaptive quadrature over the whole real line through `x = s·t/(1−t²)`.
pub fn integrate_real_line<T: Real, F: Fn(T) -> C<T>>(f: F, scale: T, abs_tol: T, rel_tol: T) -> Integral<T> {
    let g = |t: T| {
        let one = T::one();
        let d = one - t * t;
        if d <= T::zero() {
            return C::zero();
        }
        let x = scale * t / d;
        f(x) * (scale * (one + t * t) / (d * d))
    };
    integrate(g, -T::one(), T::one(), abs_tol, rel_tol)
}

pub fn real_fn<T: Real, F: Fn(T) -> T>(f: F) -> impl Fn(T) -> C<T> {
    move |x| Complex::new(f(x), T::zero())
}
