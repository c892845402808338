use num_complex::Complex64;
use serde::Serialize;

use super::report::c64;
use super::AnomalyError;
use crate::algebra::{mapping_cone, relative_torsion_log, torsion_square_acyclic_log, BilinearStructure, ComplexMorphism, GradedComplex, Tolerances};
use crate::linalg::{self, matmul, matmul_hn, matmul_tn, CMat};
use crate::scalar::{log_principal, Real, C};
use crate::spectral::SpectrumPartition;

/// Two evaluations of `log τ(φ)²` for `φ = ψ ∘ π_sm`, where `π_sm` projects onto the small
/// part of a spectral splitting and `ψ` is an isomorphism out of the small complex.
#[derive(Debug, Clone, Serialize)]
pub struct Multiplicativity {
    /// Laplacian torsion of the mapping cone of `φ`.
    pub cone: Complex64,
    /// `log sdet(b⁻¹ψ_*β_sm) + Σ_q (−1)^q q log det Δ_la,q`.
    pub split: Complex64,
    /// `|e^{cone − split} − 1|`, insensitive to the branch of either logarithm.
    pub relative_difference: f64,
}

/// `ψ_q` maps small coordinates (the Schur basis of `partition`) in degree `q` onto the target.
/// The target differential is `ψ d_sm ψ⁻¹`, which makes `φ` an exact chain map.
pub fn multiplicativity<T: Real>(
    complex: &GradedComplex<T>,
    forms: &BilinearStructure<T>,
    partition: &SpectrumPartition<T>,
    psi: &[CMat<T>],
    target_forms: &BilinearStructure<T>,
) -> Result<Multiplicativity, AnomalyError> {
    let degrees = complex.degrees();
    if partition.degrees.len() != degrees || psi.len() != degrees {
        return Err(AnomalyError::Invalid("partition and maps must cover every degree".into()));
    }
    let basis: Vec<CMat<T>> = partition.degrees.iter().map(|d| d.small_basis()).collect();
    let dims: Vec<usize> = basis.iter().map(|z| z.ncols()).collect();
    // coordinates of Qv in the orthonormal basis Z
    let proj: Vec<CMat<T>> = partition.degrees.iter().zip(&basis).map(|(d, z)| matmul_hn(z, &d.projector)).collect();
    let mut target_d = Vec::with_capacity(degrees.saturating_sub(1));
    for q in 0..complex.top_degree() {
        let d_sm = matmul_hn(&basis[q + 1], &matmul(&complex.differential(q), &basis[q]));
        let inv = linalg::inverse(&psi[q])?;
        target_d.push(matmul(&psi[q + 1], &matmul(&d_sm, &inv)));
    }
    let target = GradedComplex::with_tolerance(dims.clone(), target_d, T::lit(1e-8))?;
    let phi = ComplexMorphism::unchecked(psi.iter().zip(&proj).map(|(p, pi)| matmul(p, pi)).collect());
    let cone = mapping_cone(&phi, complex, &target, forms, target_forms)?;
    let cone_log = torsion_square_acyclic_log(&cone.complex, &cone.forms)?;

    let small_forms: Vec<CMat<T>> = basis
        .iter()
        .enumerate()
        .map(|(q, z)| {
            let b = matmul_tn(z, &matmul(forms.form(q), z));
            (&b + b.transpose()).map(|v| v * T::lit(0.5))
        })
        .collect();
    let small_forms = BilinearStructure::with_tolerances(small_forms, Tolerances::default())?;
    let psi_morphism = ComplexMorphism::unchecked(psi.to_vec());
    let mut split = relative_torsion_log(&psi_morphism, &small_forms, target_forms)?.as_complex();
    for (q, d) in partition.degrees.iter().enumerate() {
        let weight = if q % 2 == 0 { q as i64 } else { -(q as i64) };
        if weight == 0 {
            continue;
        }
        let s = d.large_eigenvalues().iter().fold(C::new(T::zero(), T::zero()), |a, &z| a + log_principal(z));
        split += s * T::from_i64(weight).unwrap();
    }
    let (cone, split) = (c64(cone_log), c64(split));
    Ok(Multiplicativity { cone, split, relative_difference: ((cone - split).exp() - 1.0).norm() })
}

/// The identity on a circle snapshot with `ψ = Int_sm` and the Morse forms on the target.
pub fn circle_multiplicativity<T: Real>(snap: &crate::spectral::Snapshot<T>) -> Result<Multiplicativity, AnomalyError> {
    let dim = snap.discrete.dim();
    let complex = GradedComplex::with_tolerance(vec![dim, dim], vec![snap.discrete.differential()], T::lit(1e-8))?;
    let forms = BilinearStructure::with_tolerances(snap.discrete.mass.iter().map(|m| m.dense()).collect(), Tolerances::default())?;
    multiplicativity(&complex, &forms, &snap.partition, snap.small.integration.maps(), &snap.morse.forms)
}
