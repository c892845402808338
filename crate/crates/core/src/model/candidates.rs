//! Gaussian candidate eigenforms concentrated at the critical points.

use super::circle::CircleModel;
use super::discrete::DiscreteDeRham;
use super::morse::{quintic_cutoff, wrap_offset};
use crate::linalg::CMat;
use crate::scalar::Real;

/// Basis of the span of candidate forms, one block of `r` columns per critical point.
#[derive(Debug, Clone)]
pub struct CandidateSubspace<T: Real> {
    /// Columns of degree-`q` candidates, ordered like the Morse complex basis.
    pub basis: [CMat<T>; 2],
    pub u: T,
}

impl<T: Real> CandidateSubspace<T> {
    pub fn dim(&self) -> usize {
        self.basis[0].ncols() + self.basis[1].ncols()
    }
}

/// `σ(|φ|) e^{−uφ²/2} (dφ if index 1) ⊗ ẽ` with `φ` the Morse coordinate and `ẽ` parallel.
pub fn candidate_subspace<T: Real>(model: &CircleModel<T>, discrete: &DiscreteDeRham<T>, u: T) -> CandidateSubspace<T> {
    let ell = model.circumference();
    let r = model.rank();
    let rho = model.rho();
    let (inner, outer) = (rho / T::lit(3.0), T::lit(2.0) * rho / T::lit(3.0));
    let data = model.morse_data();
    let mut basis = [CMat::zeros(discrete.dim(), data.minima.len() * r), CMat::zeros(discrete.dim(), data.maxima.len() * r)];
    for q in 0..2 {
        let owners = if q == 0 { &data.minima } else { &data.maxima };
        for (slot, &ci) in owners.iter().enumerate() {
            let crit = &data.critical[ci];
            for (j, &x) in discrete.fields[q].points.iter().enumerate() {
                let t = wrap_offset(x, crit.position, ell);
                let phi = model.morse().chart(crit, t);
                let cut = quintic_cutoff(phi, inner, outer);
                if cut == T::zero() {
                    continue;
                }
                let mut amp = cut * (-u * phi * phi / T::lit(2.0)).exp();
                if q == 1 {
                    amp = amp * model.morse().chart_derivative(crit, t);
                }
                // ẽ(x) = e^{−a t} e solves ẽ′ + aẽ = 0
                let frame = model.transport(-t);
                for c in 0..r {
                    for k in 0..r {
                        basis[q][(j * r + k, slot * r + c)] = frame[(k, c)] * amp;
                    }
                }
            }
        }
    }
    CandidateSubspace { basis, u }
}
