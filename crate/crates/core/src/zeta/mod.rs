//! Zeta-regularized determinants: the exact Hurwitz tier for twisted circles, principal-branch
//! sums over discrete spectra, heat traces, the split of the zeta function at a cut point, and
//! a continuum reference operator for tail-corrected determinants.

mod hurwitz;

use num_traits::{One, Zero};
use statrs::function::gamma::gamma;
use thiserror::Error;

pub use hurwitz::{hurwitz_zeta, hurwitz_zeta_with_derivative};

use crate::linalg::spectral_order;
use crate::quadrature::integrate;
use crate::scalar::{log_principal, log_with_cut, Real, C};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ZetaError {
    #[error("integer twist {alpha}: the Laplacian has a kernel (use det′ mode)")]
    IntegerTwist { alpha: String },
    #[error("eigenvalue {value} lies on the branch ray")]
    BranchViolation { value: String },
    #[error("quadrature did not reach tolerance (estimated error {error:e})")]
    QuadratureFailure { error: f64 },
    #[error("spectrum must have positive real part for the heat-trace split")]
    NotSectorial,
    #[error("{0}")]
    Invalid(String),
}

/// How a twist in `ℤ` is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DetMode {
    /// Reject integer twists.
    #[default]
    Strict,
    /// Drop the zero modes and return `det′`.
    Prime,
}

/// Twisted Laplacian on a circle of length `ℓ` with eigenvalues `(2π(k+α)/ℓ)²`, `k ∈ ℤ`.
#[derive(Debug, Clone, Copy)]
pub struct CircleTwist<T: Real> {
    pub alpha: C<T>,
    pub circumference: T,
}

impl<T: Real> CircleTwist<T> {
    pub fn new(alpha: C<T>, circumference: T) -> Self {
        Self { alpha, circumference }
    }

    /// `(ζ(0), ζ′(0))` of the mode family.
    pub fn zeta_at_zero(&self, mode: DetMode) -> Result<(C<T>, C<T>), ZetaError> {
        let a = C::new(self.alpha.re - self.alpha.re.floor(), self.alpha.im);
        let two = T::lit(2.0);
        let log_scale = (T::PI() * two / self.circumference).ln();
        let zero = C::zero();
        if a.re == T::zero() {
            if a.im != T::zero() {
                return Err(ZetaError::BranchViolation { value: format!("{}", (a * a) * (T::PI() * two / self.circumference).powi(2)) });
            }
            if mode == DetMode::Strict {
                return Err(ZetaError::IntegerTwist { alpha: format!("{}", self.alpha) });
            }
            // 2 (2π/ℓ)^{−2s} ζ_R(2s)
            let (z, dz) = hurwitz_zeta_with_derivative(zero, C::one());
            let value = z * two;
            let deriv = dz * two * two - z * two * two * log_scale;
            return Ok((value, deriv));
        }
        let (z1, d1) = hurwitz_zeta_with_derivative(zero, a);
        let (z2, d2) = hurwitz_zeta_with_derivative(zero, C::<T>::one() - a);
        let value = z1 + z2;
        // d/ds [(2π/ℓ)^{−2s} Z(2s)] at 0
        let deriv = (d1 + d2) * two - value * two * log_scale;
        Ok((value, deriv))
    }

    /// `log det = −ζ′(0)`.
    pub fn log_det(&self, mode: DetMode) -> Result<C<T>, ZetaError> {
        Ok(-self.zeta_at_zero(mode)?.1)
    }

    pub fn det(&self, mode: DetMode) -> Result<C<T>, ZetaError> {
        Ok(self.log_det(mode)?.exp())
    }
}

/// Zeta-regularized determinant of the twisted circle Laplacian.
pub fn exact_circle_zeta_det<T: Real>(alpha: C<T>, circumference: T, mode: DetMode) -> Result<C<T>, ZetaError> {
    CircleTwist::new(alpha, circumference).det(mode)
}

/// `Σ log λ` with the cut along the ray of angle `agmon`, summed in spectral order.
pub fn log_det_with_angle<T: Real>(eigenvalues: &[C<T>], agmon: T) -> Result<C<T>, ZetaError> {
    let mut sorted = eigenvalues.to_vec();
    sorted.sort_by(spectral_order);
    let tol = T::lit(64.0) * T::epsilon();
    let mut acc = C::zero();
    for z in sorted {
        let arg = z.im.atan2(z.re);
        let two_pi = T::PI() + T::PI();
        let mut gap = (arg - agmon) % two_pi;
        if gap < T::zero() {
            gap += two_pi;
        }
        if z.norm() == T::zero() || gap.min(two_pi - gap) < tol {
            return Err(ZetaError::BranchViolation { value: format!("{z}") });
        }
        acc += log_with_cut(z, agmon);
    }
    Ok(acc)
}

/// `Σ log λ` over the large spectrum with the Agmon angle `π`.
pub fn log_det_large<T: Real>(eigenvalues: &[C<T>]) -> Result<C<T>, ZetaError> {
    log_det_with_angle(eigenvalues, T::PI())
}

/// `log τ_la = Σ_q (−1)^q q · log det_la(Δ_q)` from per-degree large log-determinants.
pub fn large_torsion_log<T: Real>(log_dets: &[C<T>]) -> C<T> {
    log_dets.iter().enumerate().fold(C::zero(), |acc, (q, &l)| {
        let w = if q % 2 == 0 { q as f64 } else { -(q as f64) };
        acc + l * T::lit(w)
    })
}

/// `θ(μ) = Σ e^{−μλ}`.
pub fn heat_trace<T: Real>(eigenvalues: &[C<T>], mu: T) -> C<T> {
    eigenvalues.iter().fold(C::zero(), |acc, &l| acc + (-l * mu).exp())
}

/// Heat-trace samples over a `μ` grid.
#[derive(Debug, Clone)]
pub struct HeatTrace<T: Real> {
    pub mu: Vec<T>,
    pub theta: Vec<C<T>>,
}

impl<T: Real> HeatTrace<T> {
    pub fn sample(eigenvalues: &[C<T>], mu_grid: &[T]) -> Self {
        Self { mu: mu_grid.to_vec(), theta: mu_grid.iter().map(|&m| heat_trace(eigenvalues, m)).collect() }
    }

    /// `max_μ (log|θ(μ)| + rate·μ)`, the envelope constant for `|θ| ≤ C e^{−rate·μ}`.
    pub fn envelope(&self, rate: T) -> T {
        self.mu.iter().zip(&self.theta).fold(T::neg_infinity(), |m, (&mu, th)| m.max(th.norm().ln() + rate * mu))
    }
}

fn expm1<T: Real>(z: C<T>) -> C<T> {
    if z.norm() < T::lit(1e-4) {
        z + z * z * T::lit(0.5) + z * z * z / T::lit(6.0) + z * z * z * z / T::lit(24.0)
    } else {
        z.exp() - C::one()
    }
}

/// Pieces of the zeta function split at `T = u^{−1+δ}`: `ζ^I` integrates the heat trace over
/// `[T, ∞)` and `ζ^II` over `(0, T]` (continued to `s = 0` by subtracting `θ(0)`).
#[derive(Debug, Clone, Copy)]
pub struct ZetaSplit<T: Real> {
    pub s: T,
    pub cut: T,
    pub zeta_one: C<T>,
    pub zeta_two: C<T>,
    /// `Σ (λ + ε)^{−s}`
    pub total: C<T>,
}

/// `s`-derivatives at zero of the split pieces.
#[derive(Debug, Clone, Copy)]
pub struct ZetaSplitDerivative<T: Real> {
    pub cut: T,
    pub d_one: C<T>,
    pub d_two: C<T>,
    /// `−Σ log(λ + ε)`
    pub total: C<T>,
}

/// Heat-trace split of the zeta function of a finite spectrum.
#[derive(Debug, Clone)]
pub struct SplitZeta<T: Real> {
    shifted: Vec<C<T>>,
    cut: T,
    tol: T,
}

impl<T: Real> SplitZeta<T> {
    /// `eigenvalues` must have positive real part; `ε ≥ 0`; `δ ∈ (0, 1)`.
    pub fn new(eigenvalues: &[C<T>], u: T, eps: T, delta: T) -> Result<Self, ZetaError> {
        if eps < T::zero() || delta <= T::zero() || delta >= T::one() || u <= T::zero() {
            return Err(ZetaError::Invalid("need ε ≥ 0, δ ∈ (0,1), u > 0".into()));
        }
        let shifted: Vec<C<T>> = eigenvalues.iter().map(|&l| l + eps).collect();
        if shifted.iter().any(|l| l.re <= T::zero()) {
            return Err(ZetaError::NotSectorial);
        }
        Ok(Self { shifted, cut: u.powf(delta - T::one()), tol: T::lit(1e-13) })
    }

    pub fn cut(&self) -> T {
        self.cut
    }

    fn theta(&self, mu: T) -> C<T> {
        heat_trace(&self.shifted, mu)
    }

    fn theta_minus_count(&self, mu: T) -> C<T> {
        self.shifted.iter().fold(C::zero(), |acc, &l| acc + expm1(-l * mu))
    }

    fn upper_log(&self) -> T {
        let min_re = self.shifted.iter().fold(T::infinity(), |m, l| m.min(l.re));
        (T::lit(80.0) / min_re).ln().max(self.cut.ln() + T::one())
    }

    fn lower_log(&self) -> T {
        let max_abs = self.shifted.iter().fold(T::zero(), |m, l| m.max(l.norm()));
        (T::lit(1e-18) / max_abs).ln().min(self.cut.ln() - T::one())
    }

    fn sum_shifted(&self) -> C<T> {
        self.shifted.iter().fold(C::zero(), |a, &l| a + l)
    }

    fn quad<F: Fn(T) -> C<T>>(&self, f: F, a: T, b: T) -> Result<C<T>, ZetaError> {
        let r = integrate(f, a, b, self.tol, self.tol);
        if r.error > T::lit(1e-9) * r.value.norm().max(T::one()) {
            return Err(ZetaError::QuadratureFailure { error: r.error.to_f64_lossy() });
        }
        Ok(r.value)
    }

    /// Evaluates both pieces at real `s > 0`.
    pub fn at(&self, s: T) -> Result<ZetaSplit<T>, ZetaError> {
        if s <= T::zero() {
            return Err(ZetaError::Invalid("use `derivative_at_zero` for s = 0".into()));
        }
        let inv_gamma = T::lit(1.0 / gamma(s.to_f64_lossy()));
        let lc = self.cut.ln();
        let one = self.quad(|t| self.theta(t.exp()) * (s * t).exp(), lc, self.upper_log())?;
        let lo = self.lower_log();
        let mut inner = self.quad(|t| self.theta_minus_count(t.exp()) * (s * t).exp(), lo, lc)?;
        // ∫_{−∞}^{lo} of the leading −μ Σλ behaviour
        inner -= self.sum_shifted() * ((s + T::one()) * lo).exp() / (s + T::one());
        let count = T::from_usize(self.shifted.len()).unwrap();
        let two = inner + C::new(count * self.cut.powf(s) / s, T::zero());
        let total = self.shifted.iter().fold(C::zero(), |a, &l| a + (-log_principal(l) * s).exp());
        Ok(ZetaSplit { s, cut: self.cut, zeta_one: one * inv_gamma, zeta_two: two * inv_gamma, total })
    }

    /// `∂_s ζ^I(0) = ∫_T^∞ θ/μ`, `∂_s ζ^II(0) = ∫_0^T (θ − θ(0))/μ + θ(0)(log T + γ)`.
    pub fn derivative_at_zero(&self) -> Result<ZetaSplitDerivative<T>, ZetaError> {
        let lc = self.cut.ln();
        let d_one = self.quad(|t| self.theta(t.exp()), lc, self.upper_log())?;
        let lo = self.lower_log();
        let mut inner = self.quad(|t| self.theta_minus_count(t.exp()), lo, lc)?;
        inner -= self.sum_shifted() * lo.exp();
        let count = T::from_usize(self.shifted.len()).unwrap();
        let d_two = inner + C::new(count * (lc + T::euler_gamma()), T::zero());
        let total = -self.shifted.iter().fold(C::zero(), |a, &l| a + log_principal(l));
        Ok(ZetaSplitDerivative { cut: self.cut, d_one, d_two, total })
    }
}

/// Comparison operator `−∂² + c` on a circle of length `ℓ` with twist `α₀ ∈ [0, 1)`:
/// eigenvalues `κ²(k + α₀)² + c`, `κ = 2π/ℓ`. Used to regularize a discrete spectrum whose
/// high modes follow `κ²(k+α₀)² + c + S₂/(4κ²(k+α₀)²) + …`.
#[derive(Debug, Clone, Copy)]
pub struct ContinuumReference<T: Real> {
    pub length: T,
    pub twist: T,
    /// Mean potential `c`.
    pub shift: C<T>,
    /// Potential variance `S₂ = ⟨V²⟩ − ⟨V⟩²`.
    pub fluctuation: C<T>,
}

impl<T: Real> ContinuumReference<T> {
    pub fn kappa(&self) -> T {
        (T::PI() + T::PI()) / self.length
    }

    /// Mode offsets `k + α₀` of the `count` lowest modes, in increasing magnitude.
    fn offsets(&self, count: usize) -> (Vec<T>, usize, usize) {
        let a = self.twist;
        let (mut plus, mut minus) = (0usize, 0usize);
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let p = a + T::from_usize(plus).unwrap();
            let m = T::one() - a + T::from_usize(minus).unwrap();
            if p <= m {
                out.push(p);
                plus += 1;
            } else {
                out.push(-m);
                minus += 1;
            }
        }
        (out, plus, minus)
    }

    pub fn eigenvalues(&self, count: usize) -> Vec<C<T>> {
        let k2 = self.kappa() * self.kappa();
        self.offsets(count).0.into_iter().map(|o| self.shift + k2 * o * o).collect()
    }

    /// `log det_ζ(−∂² + c) = ℓ√c + log(1 − 2cos(2πα₀)e^{−ℓ√c} + e^{−2ℓ√c})`.
    pub fn log_det(&self) -> C<T> {
        let x = self.shift.sqrt() * self.length;
        let e = (-x).exp();
        let cosine = (T::lit(2.0) * T::PI() * self.twist).cos();
        x + log_principal(C::<T>::one() - e * (cosine + cosine) + e * e)
    }

    /// `Σ log(λ/μ)` over the modes beyond the first `count`, at leading order.
    pub fn tail(&self, count: usize) -> C<T> {
        let (_, plus, minus) = self.offsets(count);
        let k4 = self.kappa().powi(4);
        let four = C::new(T::lit(4.0), T::zero());
        let sum = hurwitz_zeta(four, C::new(self.twist + T::from_usize(plus).unwrap(), T::zero()))
            + hurwitz_zeta(four, C::new(T::one() - self.twist + T::from_usize(minus).unwrap(), T::zero()));
        self.fluctuation * sum / (k4 * T::lit(4.0))
    }

    /// Continuum log-determinant of the large part: `lowest` holds the discrete eigenvalues in
    /// spectral order with the `small` ones removed; `modes` discrete modes are trusted.
    pub fn corrected_log_det(&self, lowest_large: &[C<T>], small: usize, modes: usize) -> Result<C<T>, ZetaError> {
        if modes <= small || lowest_large.len() < modes - small {
            return Err(ZetaError::Invalid(format!("need {} large eigenvalues, have {}", modes.saturating_sub(small), lowest_large.len())));
        }
        let discrete = log_det_large(&lowest_large[..modes - small])?;
        let reference: C<T> = self.eigenvalues(modes).into_iter().fold(C::zero(), |a, l| a + log_principal(l));
        Ok(discrete - reference + self.log_det() + self.tail(modes))
    }

    /// `corrected_log_det` on `2K + 1` and `2⌊K/2⌋ + 1` modes combined to cancel the `K^{−5}`
    /// remainder left by the leading-order tail. Returns the value and the size of the
    /// extrapolation step, which bounds the remaining error of the finer sum.
    pub fn extrapolated_log_det(&self, lowest_large: &[C<T>], small: usize, half_modes: usize) -> Result<(C<T>, T), ZetaError> {
        let fine = self.corrected_log_det(lowest_large, small, 2 * half_modes + 1)?;
        let coarse = self.corrected_log_det(lowest_large, small, 2 * (half_modes / 2) + 1)?;
        let r = T::lit(32.0);
        let value = (fine * r - coarse) / (r - T::one());
        Ok((value, (value - fine).norm()))
    }
}

#[cfg(test)]
mod tests;
