//! Trigonometric polynomials on a circle of circumference `ℓ`.

use num_traits::Zero;

use crate::scalar::{cr, Real, C};

/// `c₀ + Σ_{k≥1} (a_k cos kωx + b_k sin kωx)` with `ω = 2π/ℓ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigSeries<T: Real> {
    pub constant: C<T>,
    pub cos: Vec<C<T>>,
    pub sin: Vec<C<T>>,
    omega: T,
}

impl<T: Real> TrigSeries<T> {
    pub fn new(circumference: T, constant: C<T>, cos: Vec<C<T>>, sin: Vec<C<T>>) -> Self {
        Self { constant, cos, sin, omega: T::TAU() / circumference }
    }

    pub fn real(circumference: T, constant: T, cos: &[T], sin: &[T]) -> Self {
        Self::new(circumference, cr(constant), cos.iter().map(|&v| cr(v)).collect(), sin.iter().map(|&v| cr(v)).collect())
    }

    pub fn zero(circumference: T) -> Self {
        Self::new(circumference, C::zero(), vec![], vec![])
    }

    pub fn max_frequency(&self) -> usize {
        self.cos.len().max(self.sin.len())
    }

    pub fn scaled(mut self, s: T) -> Self {
        self.constant = self.constant * s;
        self.cos.iter_mut().chain(self.sin.iter_mut()).for_each(|c| *c = *c * s);
        self
    }

    /// `order`-th derivative at `x`.
    pub fn derivative(&self, x: T, order: u32) -> C<T> {
        let mut acc = if order == 0 { self.constant } else { C::zero() };
        for k in 1..=self.max_frequency() {
            let w = self.omega * T::from_usize(k).unwrap();
            let (s, c) = (w * x).sin_cos();
            // d^m/dx^m of (cos, sin) cycles through (cos, −sin, −cos, sin)
            let (dc, ds) = match order % 4 {
                0 => (c, s),
                1 => (-s, c),
                2 => (-c, -s),
                _ => (s, -c),
            };
            let wm = w.powi(order as i32);
            if let Some(&a) = self.cos.get(k - 1) {
                acc += a * (dc * wm);
            }
            if let Some(&b) = self.sin.get(k - 1) {
                acc += b * (ds * wm);
            }
        }
        acc
    }

    pub fn value(&self, x: T) -> C<T> {
        self.derivative(x, 0)
    }

    pub fn real_derivative(&self, x: T, order: u32) -> T {
        self.derivative(x, order).re
    }
}
