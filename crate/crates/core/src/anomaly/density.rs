use super::AnomalyError;
use crate::linalg::CMat;
use crate::model::LocalSymbol;
use crate::quadrature::{integrate_to_infinity, Integral};
use crate::scalar::{Real, C};

const INNER_TOL: f64 = 1e-11;
const OUTER_TOL: f64 = 1e-10;

/// The order `−1` density of `log det Δ_q(u)` at one point, from the resolvent parametrix of
/// `Δ_q(u)` with symbol `a₂ + a₁ + a₀`, `a₂ = ξ²/g + u²F`, `a₁ = iξB + uL`.
#[derive(Debug, Clone)]
pub struct SymbolDensity1D<T: Real> {
    pub symbol: LocalSymbol<T>,
    pub value: C<T>,
    pub error: T,
}

impl<T: Real> SymbolDensity1D<T> {
    /// `a₂(ξ, u)`, a scalar multiple of the identity.
    pub fn principal(&self, xi: T, u: T) -> T {
        principal(&self.symbol, xi, u)
    }

    pub fn first_order(&self, xi: T, u: T) -> CMat<T> {
        first_order(&self.symbol, xi, u)
    }

    /// `r₋₂ = (a₂ − λ)⁻¹`
    pub fn r2(&self, xi: T, u: T, lambda: C<T>) -> CMat<T> {
        let r = self.symbol.coupling.nrows();
        CMat::identity(r, r).map(|z: C<T>| z / (C::new(self.principal(xi, u), T::zero()) - lambda))
    }

    /// `r₋₃ = −r₋₂(a₁r₋₂ + ∂_ξa₂ · D_x r₋₂)`, `D_x = −i∂_x`.
    pub fn r3(&self, xi: T, u: T, lambda: C<T>) -> CMat<T> {
        r3(&self.symbol, xi, u, lambda)
    }

    /// `tr L · √g / (2√F)`, the inner integrals done by hand.
    pub fn closed_form(&self) -> C<T> {
        let s = &self.symbol;
        s.coupling.trace() * (T::one() / s.inv_metric).sqrt() / (T::lit(2.0) * s.potential.sqrt())
    }
}

fn principal<T: Real>(s: &LocalSymbol<T>, xi: T, u: T) -> T {
    s.inv_metric * xi * xi + u * u * s.potential
}

fn first_order<T: Real>(s: &LocalSymbol<T>, xi: T, u: T) -> CMat<T> {
    let i_xi = C::new(T::zero(), xi);
    s.drift.map(|z| z * i_xi) + s.coupling.map(|z| z * u)
}

fn r3<T: Real>(s: &LocalSymbol<T>, xi: T, u: T, lambda: C<T>) -> CMat<T> {
    let rho = C::<T>::new(T::one(), T::zero()) / (C::new(principal(s, xi, u), T::zero()) - lambda);
    let dxi_a2 = T::lit(2.0) * s.inv_metric * xi;
    let dx_a2 = s.inv_metric_dx * xi * xi + u * u * s.potential_dx;
    // ∂_x r₋₂ = r₋₂² ∂_x a₂ for a scalar principal part
    let dx_r2 = rho * rho * dx_a2;
    let d_r2 = C::new(T::zero(), -T::one()) * dx_r2;
    let r = s.coupling.nrows();
    let inner = first_order(s, xi, u).map(|z| z * rho) + CMat::identity(r, r).map(|z: C<T>| z * d_r2 * dxi_a2);
    inner.map(|z| -(z * rho))
}

/// `−(2π)⁻¹ ∫dξ ∫₀^∞dμ tr r₋₃(ξ, u, −μ)`; by homogeneity the value does not depend on `u > 0`.
pub fn density_integral<T: Real>(symbol: &LocalSymbol<T>, u: T) -> Result<Integral<T>, AnomalyError> {
    if !(symbol.potential > T::zero()) {
        return Err(AnomalyError::NotParameterElliptic { potential: symbol.potential.to_f64_lossy() });
    }
    // ξ²/g = u²F sets the ξ scale and a₂ the μ scale. The drift term is odd in ξ and decays
    // only like 1/ξ, so the ξ-integral is the symmetric principal value over ξ ≥ 0; what
    // remains decays like ξ⁻² and μ⁻².
    let xi_scale = u * (symbol.potential / symbol.inv_metric).sqrt();
    let inner = |xi: T| {
        let a2 = principal(symbol, xi, u);
        integrate_to_infinity(|mu| r3(symbol, xi, u, C::new(-mu, T::zero())).trace(), T::zero(), a2, T::zero(), T::lit(INNER_TOL)).value
    };
    let outer = integrate_to_infinity(|xi| inner(xi) + inner(-xi), T::zero(), xi_scale, T::zero(), T::lit(OUTER_TOL));
    let scale = -T::one() / (T::PI() + T::PI());
    Ok(Integral { value: outer.value * scale, error: outer.error * scale.abs() })
}

pub fn bfk_density_1d<T: Real>(symbol: &LocalSymbol<T>) -> Result<SymbolDensity1D<T>, AnomalyError> {
    let integral = density_integral(symbol, T::one())?;
    Ok(SymbolDensity1D { symbol: symbol.clone(), value: integral.value, error: integral.error })
}
