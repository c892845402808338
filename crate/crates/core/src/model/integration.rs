//! Morse complex of the deformed bundle and the integration map from discrete forms.

use super::circle::{CircleModel, MorseData};
use super::discrete::DiscreteDeRham;
use super::ModelError;
use crate::algebra::{BilinearStructure, ComplexMorphism, GradedComplex};
use crate::linalg::{self, matmul, CMat};
use crate::quadrature::composite_rule;
use crate::scalar::{cr, Real};

/// `C(X; E_u)` with its form `b_X`.
#[derive(Debug, Clone)]
pub struct MorseComplex<T: Real> {
    pub complex: GradedComplex<T>,
    pub forms: BilinearStructure<T>,
    pub data: MorseData<T>,
    pub u: T,
}

/// Differential `δ: C⁰ → C¹`: each arc from a maximum `x` to a minimum `y` contributes
/// `sign · e^{a(y−x)} · e^{u(f(y)−f(x))}` to the block `(x, y)`.
pub fn morse_complex<T: Real>(model: &CircleModel<T>, u: T) -> Result<MorseComplex<T>, ModelError> {
    let data = model.morse_data();
    let r = model.rank();
    let (m0, m1) = (data.minima.len(), data.maxima.len());
    let mut delta = CMat::zeros(m1 * r, m0 * r);
    for (arc, transport) in data.arcs.iter().zip(&data.transports) {
        let x = &data.critical[data.maxima[arc.source]];
        let y = &data.critical[data.minima[arc.target]];
        let weight = (u * (y.value - x.value)).exp() * T::from_i8(arc.sign).unwrap();
        linalg::add_block(&mut delta, (arc.source * r, arc.target * r), &transport.map(|z| z * weight));
    }
    let complex = GradedComplex::new(vec![m0 * r, m1 * r], vec![delta])?;
    let form = |idx: &[usize]| linalg::block_diag(&idx.iter().map(|&i| model.bilinear(data.critical[i].position)).collect::<Vec<_>>());
    let forms = BilinearStructure::new(vec![form(&data.minima), form(&data.maxima)])?;
    Ok(MorseComplex { complex, forms, data, u })
}

/// `Int_u`: evaluation at the minima, and for each maximum the integral over its two
/// unstable arcs of the `E_u`-parallel transport of the 1-form back to the maximum.
pub fn integration_map<T: Real>(model: &CircleModel<T>, discrete: &DiscreteDeRham<T>) -> Result<ComplexMorphism<T>, ModelError> {
    let u = discrete.u;
    let r = model.rank();
    let dim = discrete.dim();
    let data = model.morse_data();
    let ell = model.circumference();
    let mut int0 = CMat::zeros(data.minima.len() * r, dim);
    for (slot, &ci) in data.minima.iter().enumerate() {
        let w = discrete.interpolation_weights(0, data.critical[ci].position);
        for (j, &wj) in w.iter().enumerate() {
            if wj != T::zero() {
                for c in 0..r {
                    int0[(slot * r + c, j * r + c)] = cr(wj);
                }
            }
        }
    }
    let mut int1 = CMat::zeros(data.maxima.len() * r, dim);
    for arc in &data.arcs {
        let x = &data.critical[data.maxima[arc.source]];
        let len = arc.displacement.abs();
        let panels = [
            (T::lit(8.0) * u.max(T::one()).sqrt() * len).ceil().to_usize().unwrap_or(1),
            (T::from_usize(discrete.n).unwrap() * len / ell / T::lit(2.0)).ceil().to_usize().unwrap_or(1),
            32,
        ]
        .into_iter()
        .max()
        .unwrap();
        let (taus, weights) = composite_rule(T::zero(), arc.displacement, panels, 16);
        let orient = arc.displacement.signum();
        let mut acc = CMat::<T>::zeros(r, dim);
        for (&tau, &w) in taus.iter().zip(&weights) {
            let decay = (u * (model.morse().value(x.position + tau) - x.value)).exp();
            if !decay.is_finite() {
                return Err(ModelError::QuadratureOverflow);
            }
            let scale = w * orient * decay;
            if scale.abs() < T::lit(1e-300) {
                continue;
            }
            let transport = model.transport(tau);
            let lw = discrete.interpolation_weights(1, x.position + tau);
            for (j, &l) in lw.iter().enumerate() {
                let s = scale * l;
                if s == T::zero() {
                    continue;
                }
                for c in 0..r {
                    for k in 0..r {
                        acc[(c, j * r + k)] += transport[(c, k)] * s;
                    }
                }
            }
        }
        linalg::add_block(&mut int1, (arc.source * r, 0), &acc);
    }
    Ok(ComplexMorphism::unchecked(vec![int0, int1]))
}

impl<T: Real> MorseComplex<T> {
    /// Relative chain-map defect `‖Int₁ d_u − δ Int₀‖ / (‖Int₁‖‖d_u‖ + ‖δ‖‖Int₀‖)`.
    pub fn chain_residual(&self, int: &ComplexMorphism<T>, discrete: &DiscreteDeRham<T>) -> T {
        let du = discrete.differential();
        let delta = self.complex.differential(0);
        let lhs = matmul(int.map(1), &du);
        let rhs = matmul(&delta, int.map(0));
        let scale = linalg::frobenius(int.map(1)) * linalg::frobenius(&du) + linalg::frobenius(&delta) * linalg::frobenius(int.map(0));
        linalg::frobenius(&(lhs - rhs)) / scale
    }
}

/// `η_u`: multiplication by `(π/u)^{n/4 − q/2}` in degree `q`.
pub fn scaling_map<T: Real>(u: T, n: usize, dims: &[usize]) -> ComplexMorphism<T> {
    let base = T::PI() / u;
    let nf = T::from_usize(n).unwrap();
    ComplexMorphism::unchecked(
        dims.iter()
            .enumerate()
            .map(|(q, &k)| {
                let e = nf / T::lit(4.0) - T::from_usize(q).unwrap() / T::lit(2.0);
                CMat::identity(k, k).map(|z| z * base.powf(e))
            })
            .collect(),
    )
}
