//! The small complex: range of the spectral projectors with the restricted structure.

use super::partition::SpectrumPartition;
use super::SpectralError;
use crate::algebra::{relative_torsion_log, BilinearStructure, ComplexMorphism, Tolerances};
use crate::linalg::{self, frobenius, matmul, matmul_hn, matmul_tn, CMat, LogDet};
use crate::model::{DiscreteDeRham, MorseComplex};
use crate::scalar::{Real, C};

#[derive(Debug, Clone)]
pub struct SmallComplex<T: Real> {
    /// Orthonormal columns spanning the range of `Q` in each degree.
    pub basis: [CMat<T>; 2],
    /// `d` restricted to the small complex, read off directly.
    pub differential: CMat<T>,
    /// `Int₁⁻¹ δ Int₀` on the small complex, when the restricted integration map is invertible.
    ///
    /// The direct restriction loses all relative accuracy once the small eigenvalues drop under
    /// `ε‖Δ‖`; this one inherits the exact `e^{−u(f(x)−f(y))}` weights of the Morse differential.
    pub transferred: Option<CMat<T>>,
    pub forms: BilinearStructure<T>,
    pub integration: ComplexMorphism<T>,
    /// `‖d Z₀ − Z₁ d_sm‖ / ‖d‖`
    pub invariance_residual: T,
    /// `σ_max/σ_min` of `β_sm` per degree.
    pub form_condition: [T; 2],
}

pub fn extract_small_complex<T: Real>(
    partition: &SpectrumPartition<T>,
    discrete: &DiscreteDeRham<T>,
    int: &ComplexMorphism<T>,
    morse: &MorseComplex<T>,
) -> Result<SmallComplex<T>, SpectralError> {
    let basis = [partition.degrees[0].small_basis(), partition.degrees[1].small_basis()];
    let d = discrete.differential();
    let dz = matmul(&d, &basis[0]);
    let differential = matmul_hn(&basis[1], &dz);
    let invariance_residual = if basis[0].ncols() == 0 {
        T::zero()
    } else {
        frobenius(&(dz - matmul(&basis[1], &differential))) / frobenius(&d)
    };
    let mut form_condition = [T::one(); 2];
    let mut forms = Vec::with_capacity(2);
    for q in 0..2 {
        let z = &basis[q];
        let beta = matmul_tn(z, &discrete.mass[q].left_mul(z));
        if beta.nrows() > 0 {
            let sv = linalg::singular_values(&beta)?;
            let (hi, lo) = (sv[0], sv[sv.len() - 1]);
            form_condition[q] = if lo > T::zero() { hi / lo } else { T::infinity() };
            if !(lo > T::lit(1e-13) * hi) {
                return Err(SpectralError::SingularRestriction { degree: q, condition: form_condition[q].to_f64_lossy() });
            }
        }
        // symmetrize the rounding of Zᵀ M Z
        forms.push((&beta + beta.transpose()).map(|v| v * T::lit(0.5)));
    }
    let forms = BilinearStructure::with_tolerances(forms, Tolerances::default())?;
    let integration = ComplexMorphism::unchecked(vec![matmul(int.map(0), &basis[0]), matmul(int.map(1), &basis[1])]);
    let transferred = transfer_differential(&integration, morse)?;
    Ok(SmallComplex { basis, differential, transferred, forms, integration, invariance_residual, form_condition })
}

fn transfer_differential<T: Real>(int: &ComplexMorphism<T>, morse: &MorseComplex<T>) -> Result<Option<CMat<T>>, SpectralError> {
    let (i0, i1) = (int.map(0), int.map(1));
    if !i0.is_square() || !i1.is_square() || i0.nrows() == 0 || i1.nrows() == 0 {
        return Ok(None);
    }
    let lu = linalg::Lu::new(i1)?;
    if lu.is_singular() || lu.pivot_ratio() < T::lit(1e-12) {
        return Ok(None);
    }
    Ok(Some(lu.solve(&matmul(&morse.complex.differential(0), i0))?))
}

impl<T: Real> SmallComplex<T> {
    pub fn dims(&self) -> [usize; 2] {
        [self.basis[0].ncols(), self.basis[1].ncols()]
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.dims()[0] as i64 - self.dims()[1] as i64
    }

    /// `Σ (−1)^q q dim`
    pub fn derived_euler_characteristic(&self) -> i64 {
        -(self.dims()[1] as i64)
    }

    /// The transferred differential if present, otherwise the direct one.
    pub fn best_differential(&self) -> &CMat<T> {
        self.transferred.as_ref().unwrap_or(&self.differential)
    }

    /// `(Δ_sm,0, Δ_sm,1)` built from `d` and `β_sm`.
    pub fn laplacians_with(&self, d: &CMat<T>) -> Result<[CMat<T>; 2], SpectralError> {
        let [b0, b1] = [self.forms.form(0), self.forms.form(1)];
        if b0.nrows() == 0 || b1.nrows() == 0 {
            return Ok([CMat::zeros(b0.nrows(), b0.nrows()), CMat::zeros(b1.nrows(), b1.nrows())]);
        }
        let sharp = linalg::solve(b0, &matmul_tn(d, b1))?;
        Ok([matmul(&sharp, d), matmul(d, &sharp)])
    }

    /// Small eigenvalues per degree from the best available differential.
    pub fn spectrum(&self) -> Result<[Vec<C<T>>; 2], SpectralError> {
        let [l0, l1] = self.laplacians_with(self.best_differential())?;
        let eig = |m: &CMat<T>| -> Result<Vec<C<T>>, SpectralError> {
            if m.nrows() == 0 {
                return Ok(Vec::new());
            }
            Ok(linalg::Schur::new(m)?.eigenvalues_sorted())
        };
        Ok([eig(&l0)?, eig(&l1)?])
    }

    /// `φ_*β_sm = φ⁻ᵀ β_sm φ⁻¹` for `φ = scale ∘ Int_sm`.
    pub fn pushed_forms(&self, scale: &ComplexMorphism<T>) -> Result<Vec<CMat<T>>, SpectralError> {
        (0..2)
            .map(|q| {
                let phi = matmul(scale.map(q), self.integration.map(q));
                if phi.nrows() == 0 {
                    return Ok(phi);
                }
                let inv = linalg::inverse(&phi)?;
                Ok(matmul_tn(&inv, &matmul(self.forms.form(q), &inv)))
            })
            .collect()
    }

    /// `max_q ‖φ_*β_sm − b_X‖ / ‖b_X‖`
    pub fn form_deviation(&self, scale: &ComplexMorphism<T>, target: &BilinearStructure<T>) -> Result<T, SpectralError> {
        let pushed = self.pushed_forms(scale)?;
        Ok(pushed
            .iter()
            .enumerate()
            .filter(|(_, p)| p.nrows() > 0)
            .map(|(q, p)| frobenius(&(p - target.form(q))) / frobenius(target.form(q)))
            .fold(T::zero(), T::max))
    }

    /// `log τ(Int_sm)` relative to `b_X`.
    pub fn integration_torsion_log(&self, target: &BilinearStructure<T>) -> Result<LogDet<T>, SpectralError> {
        Ok(relative_torsion_log(&self.integration, &self.forms, target)?)
    }
}
