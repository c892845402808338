//! Pointwise geometric data: the Kamber–Tondeur term, local symbols and Liouville potentials.

use num_traits::Zero;

use super::circle::CircleModel;
use super::discrete::{fourier_derivative, DiscreteDeRham};
use crate::linalg::{self, matmul, matmul_tn, CMat};
use crate::quadrature::composite_rule;
use crate::scalar::{cr, Real, C};
use crate::zeta::ContinuumReference;

/// Normalization of the one-dimensional pulled-back Mathai–Quillen form `c · sign(f′)`.
pub const KT_NORMALIZATION: f64 = -0.5;

/// `KT(u) = base + u · slope` with `KT(u) = c ∫ sign(f′) ω_u` and `ω_u = ω + u r df`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KamberTondeur<T: Real> {
    pub base: C<T>,
    pub slope: C<T>,
}

impl<T: Real> KamberTondeur<T> {
    pub fn value(&self, u: T) -> C<T> {
        self.base + self.slope * u
    }
}

/// Integrates `c·sign(f′)·ω` arc by arc between consecutive critical points.
pub fn kamber_tondeur<T: Real>(model: &CircleModel<T>) -> KamberTondeur<T> {
    let crit = model.critical_points();
    let ell = model.circumference();
    let c = T::lit(KT_NORMALIZATION);
    let mut base = C::zero();
    let mut variation = T::zero();
    for (i, p) in crit.iter().enumerate() {
        let next = &crit[(i + 1) % crit.len()];
        let len = super::morse::forward_distance(p.position, next.position, ell);
        // f increases from a minimum to the following maximum
        let sign = if p.index == 0 { T::one() } else { -T::one() };
        let (xs, ws) = composite_rule(p.position, p.position + len, 64, 16);
        for (&x, &w) in xs.iter().zip(&ws) {
            base += model.kamber_tondeur_density(x) * (w * sign);
        }
        variation += (next.value - p.value).abs();
    }
    KamberTondeur { base: base * c, slope: cr(c * T::from_usize(model.rank()).unwrap() * variation) }
}

/// Data of `Δ_q(u)` at a point in the coordinate `x`: the principal part `ξ²/g`, the
/// first-order coefficient `B` (symbol `iξB`), the coupling `L` and the potential `F = f′²/g`.
#[derive(Debug, Clone)]
pub struct LocalSymbol<T: Real> {
    pub inv_metric: T,
    pub inv_metric_dx: T,
    pub potential: T,
    pub potential_dx: T,
    pub drift: CMat<T>,
    pub coupling: CMat<T>,
}

impl<T: Real> CircleModel<T> {
    /// Continuum local data of the degree-`q` Witten Laplacian at `x`.
    pub fn local_symbol(&self, q: usize, x: T) -> LocalSymbol<T> {
        let r = self.rank();
        let (g, g1) = self.metric(x);
        let f1 = self.morse().d1(x);
        let f2 = self.morse().d2(x);
        let b = self.bilinear(x);
        let binv = linalg::inverse(&b).expect("b is non-degenerate");
        let blog = matmul(&binv, &self.bilinear_derivative(x));
        let a = self.connection();
        let conj_a = matmul(&binv, &matmul_tn(a, &b));
        let id = CMat::<T>::identity(r, r);
        let two = T::lit(2.0);
        let (drift, coupling) = if q == 0 {
            let drift = (&conj_a - &blog - a + id.map(|z| z * (g1 / (two * g)))).map(|z| z / g);
            // −(1/√g)(f′/√g)′ + (f′/g)(b⁻¹aᵀb + a − b⁻¹b′)
            let scalar = -(f2 / g - f1 * g1 / (two * g * g));
            let coupling = id.map(|z| z * scalar) + (&conj_a + a - &blog).map(|z| z * (f1 / g));
            (drift, coupling)
        } else {
            let drift = (&conj_a - &blog - a + id.map(|z| z * (T::lit(1.5) * g1 / g))).map(|z| z / g);
            // (f′/g)′ + (f′/g)(b⁻¹aᵀb + a − b⁻¹b′ + g′/2g)
            let scalar = f2 / g - f1 * g1 / (g * g);
            let coupling = id.map(|z| z * scalar) + (&conj_a + a - &blog + id.map(|z| z * (g1 / (two * g)))).map(|z| z * (f1 / g));
            (drift, coupling)
        };
        LocalSymbol {
            inv_metric: T::one() / g,
            inv_metric_dx: -g1 / (g * g),
            potential: f1 * f1 / g,
            potential_dx: (two * f1 * f2 * g - f1 * f1 * g1) / (g * g),
            drift,
            coupling,
        }
    }

    /// Closed form of the degree-`q` density `tr L · √g / (2√F)`.
    pub fn density(&self, q: usize, x: T) -> C<T> {
        let s = self.local_symbol(q, x);
        s.coupling.trace() * (T::one() / s.inv_metric).sqrt() / (T::lit(2.0) * s.potential.sqrt())
    }
}

impl<T: Real> CircleModel<T> {
    /// Constant-coefficient reference for `Δ₁(u)`, rank one only.
    ///
    /// In arc length `s`, `Δ₁(u)` is conjugate to `−∂_s² + V` with `V = W² + W_s` and
    /// `W = (aκ + uf′ − ψ′/2)/√g`; the reference keeps `⟨V⟩` and the variance of `V`.
    /// The bilinear field carries no winding, so the twist is zero.
    pub fn liouville_reference(&self, discrete: &DiscreteDeRham<T>, u: T) -> Option<ContinuumReference<T>> {
        if self.rank() != 1 {
            return None;
        }
        let a = self.connection()[(0, 0)];
        let n = discrete.n;
        let h = discrete.spacing();
        let pts: Vec<T> = (0..n).map(|j| h * T::from_usize(j).unwrap()).collect();
        let sq: Vec<T> = pts.iter().map(|&x| self.metric(x).0.sqrt()).collect();
        let w: Vec<C<T>> = pts
            .iter()
            .zip(&sq)
            .map(|(&x, &s)| (a * self.clock_density(x) + cr(u * self.morse().d1(x)) - self.psi_effective(x).1 / T::lit(2.0)) / s)
            .collect();
        let dm = fourier_derivative(n, self.circumference());
        let wx = matmul(&dm, &CMat::from_vec(n, 1, w.clone()));
        let length: T = sq.iter().fold(T::zero(), |acc, &s| acc + s * h);
        let mut mean = C::<T>::zero();
        let mut mean_sq = C::<T>::zero();
        for j in 0..n {
            let v = w[j] * w[j] + wx[(j, 0)] / sq[j];
            let weight = sq[j] * h / length;
            mean += v * weight;
            mean_sq += v * v * weight;
        }
        Some(ContinuumReference { length, twist: T::zero(), shift: mean, fluctuation: mean_sq - mean * mean })
    }
}
