//! `Δ_u = Δ + uL + u²F` for the discrete complex, with local checks on the Morse balls.

use super::circle::CircleModel;
use super::discrete::DiscreteDeRham;
use super::morse::wrap_offset;
use super::ModelError;
use crate::linalg::{self, matmul, CMat};
use crate::scalar::{Real, C};

/// Coefficients of the Witten Laplacians in each degree.
#[derive(Debug, Clone)]
pub struct WittenOperator<T: Real> {
    pub laplacian: [CMat<T>; 2],
    pub coupling: [CMat<T>; 2],
    pub potential: [CMat<T>; 2],
    /// Relative residual of the decomposition against the two-sided assembly at the complex's `u`.
    pub residual: T,
}

impl<T: Real> WittenOperator<T> {
    pub fn assemble(&self, q: usize, u: T) -> CMat<T> {
        &self.laplacian[q] + self.coupling[q].map(|z| z * u) + self.potential[q].map(|z| z * (u * u))
    }
}

/// Extracts `Δ`, `L`, `F` and checks them against `d_u♯ d_u`, `d_u d_u♯`.
pub fn witten_decomposition<T: Real>(discrete: &DiscreteDeRham<T>) -> Result<WittenOperator<T>, ModelError> {
    let d = &discrete.d;
    let e = &discrete.wedge;
    let sd = discrete.sharp_of(d);
    let se = discrete.sharp_of(e);
    let op = WittenOperator {
        laplacian: [matmul(&sd, d), matmul(d, &sd)],
        coupling: [matmul(&sd, e) + matmul(&se, d), matmul(e, &sd) + matmul(d, &se)],
        potential: [matmul(&se, e), matmul(e, &se)],
        residual: T::zero(),
    };
    let direct = discrete.laplacians();
    let u = discrete.u;
    let residual = (0..2)
        .map(|q| linalg::frobenius(&(op.assemble(q, u) - &direct[q])) / linalg::frobenius(&direct[q]))
        .fold(T::zero(), T::max);
    if residual > T::lit(1e-10) {
        return Err(ModelError::DecompositionMismatch { residual: residual.to_f64_lossy() });
    }
    Ok(WittenOperator { residual, ..op })
}

/// Comparison of the discrete operators with their flat local models near one critical point.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalCheck {
    pub position: f64,
    pub index: usize,
    pub degree: usize,
    /// `2(N⁺ + ind − N⁻) − n` for this degree and index.
    pub expected_coupling: f64,
    /// `max |L v − expected·v| / max |v|` over grid points within half the Morse radius.
    pub coupling_deviation: f64,
    /// Same for `Δ v + ∇²v` on 0-forms, `0` for 1-forms.
    pub flat_deviation: f64,
}

impl<T: Real> WittenOperator<T> {
    /// Applies `L` (and `Δ` on functions) to smooth test sections and compares them with the local models.
    pub fn local_checks(&self, model: &CircleModel<T>, discrete: &DiscreteDeRham<T>) -> Vec<LocalCheck> {
        let ell = model.circumference();
        let r = model.rank();
        let omega = T::TAU() / ell;
        let a = model.connection();
        // v = exp(i sin ωx) (e_0 + … + e_{r−1}), with analytic derivatives
        let phase = |x: T| C::new(T::zero(), (omega * x).sin()).exp();
        let dphase = |x: T| phase(x) * C::new(T::zero(), omega * (omega * x).cos());
        let ddphase = |x: T| {
            let (s, c) = (omega * x).sin_cos();
            phase(x) * C::new(-omega * omega * c * c, -omega * omega * s)
        };
        let frame = CMat::from_element(r, 1, C::new(T::one(), T::zero()));
        let mut out = Vec::new();
        for crit in model.critical_points() {
            for q in 0..2 {
                let v = discrete.sample(q, |x| vec![phase(x); r]);
                let lv = matmul(&self.coupling[q], &v);
                let dv = matmul(&self.laplacian[q], &v);
                // (N⁺, N⁻) count the positive/negative chart directions carried by the form
                let (np, nm) = match (q, crit.index) {
                    (1, 0) => (1, 0),
                    (1, _) => (0, 1),
                    _ => (0, 0),
                };
                let expected = 2.0 * (np as f64 + crit.index as f64 - nm as f64) - 1.0;
                let mut dev = T::zero();
                let mut flat = T::zero();
                for (j, &x) in discrete.fields[q].points.iter().enumerate() {
                    let t = wrap_offset(x, crit.position, ell);
                    if model.morse().chart(crit, t).abs() > model.rho() / T::lit(2.0) {
                        continue;
                    }
                    for c in 0..r {
                        let k = j * r + c;
                        dev = dev.max((lv[(k, 0)] - v[(k, 0)] * T::lit(expected)).norm());
                    }
                    if q == 0 {
                        // b is parallel on the ball: Δ₀v = −g^{−1/2}(∂ + a)(g^{−1/2}(∂ + a)v)
                        let (g, g1) = model.metric(x);
                        let root = g.sqrt();
                        let a_e = matmul(a, &frame);
                        let w: Vec<C<T>> = (0..r).map(|c| (dphase(x) + a_e[(c, 0)] * phase(x)) / root).collect();
                        let w1: Vec<C<T>> = (0..r)
                            .map(|c| (ddphase(x) + a_e[(c, 0)] * dphase(x)) / root - w[c] * (g1 / (T::lit(2.0) * g)))
                            .collect();
                        let a_w = matmul(a, &CMat::from_column_slice(r, 1, &w));
                        for c in 0..r {
                            let lap = -(w1[c] + a_w[(c, 0)]) / root;
                            flat = flat.max((dv[(j * r + c, 0)] - lap).norm());
                        }
                    }
                }
                out.push(LocalCheck {
                    position: crit.position.to_f64_lossy(),
                    index: crit.index,
                    degree: q,
                    expected_coupling: expected,
                    coupling_deviation: dev.to_f64_lossy(),
                    flat_deviation: flat.to_f64_lossy(),
                });
            }
        }
        out
    }
}
