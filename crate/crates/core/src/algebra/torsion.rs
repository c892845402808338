use num_complex::Complex;
use super::{cone::mapping_cone, sign, AlgebraError, BilinearStructure, ComplexMorphism, GradedComplex, Orientation, Tolerances};
use crate::linalg::{self, matmul, CMat, LogDet, Lu, Schur};
use crate::scalar::{log_principal, Real, C};

/// `d♯_q = B_q⁻¹ d_qᵀ B_{q+1}`, the transpose of `d_q` with respect to the forms.
pub fn transpose_sharp<T: Real>(c: &GradedComplex<T>, b: &BilinearStructure<T>) -> Result<Vec<CMat<T>>, AlgebraError> {
    b.check_against(c)?;
    let mut out = Vec::with_capacity(c.top_degree());
    for q in 0..c.top_degree() {
        let lu = Lu::new(b.form(q))?;
        if lu.is_singular() {
            return Err(AlgebraError::DegenerateForm { degree: q, ratio: 0.0 });
        }
        let rhs = linalg::matmul_tn(&c.differential(q), b.form(q + 1));
        out.push(lu.solve(&rhs)?);
    }
    Ok(out)
}

/// `Δ_q = d_{q−1} d♯_{q−1} + d♯_q d_q`
pub fn bilinear_laplacian<T: Real>(c: &GradedComplex<T>, b: &BilinearStructure<T>) -> Result<Vec<CMat<T>>, AlgebraError> {
    let sharp = transpose_sharp(c, b)?;
    let mut out = Vec::with_capacity(c.degrees());
    for q in 0..c.degrees() {
        let mut delta = CMat::zeros(c.dim(q), c.dim(q));
        if q > 0 {
            delta += matmul(&c.differential(q - 1), &sharp[q - 1]);
        }
        if q < c.top_degree() {
            delta += matmul(&sharp[q], &c.differential(q));
        }
        out.push(delta);
    }
    Ok(out)
}

/// Log of `sdet(b_dst⁻¹ ∘ φ_*β_src)` with `(φ_*β)(a, a′) = β(φ⁻¹a, φ⁻¹a′)`.
pub fn relative_torsion_log<T: Real>(
    phi: &ComplexMorphism<T>,
    beta_src: &BilinearStructure<T>,
    b_dst: &BilinearStructure<T>,
) -> Result<LogDet<T>, AlgebraError> {
    let mut acc = LogDet::zero();
    for (q, m) in phi.maps().iter().enumerate() {
        if !m.is_square() {
            return Err(AlgebraError::NotIsomorphism { degree: q });
        }
        if m.nrows() == 0 {
            continue;
        }
        let lu = Lu::new(m)?;
        if lu.is_singular() || lu.pivot_ratio() < T::epsilon() {
            return Err(AlgebraError::NotIsomorphism { degree: q });
        }
        // det(b⁻¹ φ⁻ᵀ β φ⁻¹) = det β / (det b · det φ²)
        let term = linalg::log_det(beta_src.form(q))?.add(linalg::log_det(b_dst.form(q))?.times(-1)).add(lu.log_det().times(-2));
        acc = acc.add(term.times(sign(q)));
    }
    Ok(acc)
}

/// `sdet(b_dst⁻¹ ∘ φ_*β_src)`
pub fn torsion_of_isomorphism<T: Real>(
    phi: &ComplexMorphism<T>,
    beta_src: &BilinearStructure<T>,
    b_dst: &BilinearStructure<T>,
) -> Result<C<T>, AlgebraError> {
    Ok(relative_torsion_log(phi, beta_src, b_dst)?.value())
}

fn check_acyclic<T: Real>(c: &GradedComplex<T>, tol: T) -> Result<(), AlgebraError> {
    let ranks = c.ranks(tol)?;
    for q in 0..c.degrees() {
        let r = ranks.get(q).copied().unwrap_or(0) + if q == 0 { 0 } else { ranks[q - 1] };
        if r != c.dim(q) {
            return Err(AlgebraError::NotAcyclic { degree: q, ranks: r, dim: c.dim(q) });
        }
    }
    Ok(())
}

/// `Σ_q (−1)^q q · log det Δ_q`, each log det taken as a sum of principal eigenvalue logs.
pub fn torsion_square_acyclic_log<T: Real>(c: &GradedComplex<T>, b: &BilinearStructure<T>) -> Result<C<T>, AlgebraError> {
    check_acyclic(c, Tolerances::<T>::default().rank)?;
    let laplacians = bilinear_laplacian(c, b)?;
    let mut acc = C::new(T::zero(), T::zero());
    for (q, delta) in laplacians.iter().enumerate() {
        if q == 0 || delta.nrows() == 0 {
            continue;
        }
        let ev = Schur::new(delta)?.eigenvalues_sorted();
        let s: C<T> = ev.iter().fold(C::new(T::zero(), T::zero()), |a, &z| a + log_principal(z));
        acc += s * T::from_i64(sign(q) * q as i64).unwrap();
    }
    Ok(acc)
}

/// `∏_q det(Δ_q)^{(−1)^q q}` on an acyclic complex.
pub fn torsion_square_acyclic<T: Real>(c: &GradedComplex<T>, b: &BilinearStructure<T>) -> Result<C<T>, AlgebraError> {
    check_acyclic(c, Tolerances::<T>::default().rank)?;
    let laplacians = bilinear_laplacian(c, b)?;
    let mut acc = LogDet::zero();
    for (q, delta) in laplacians.iter().enumerate() {
        if q == 0 || delta.nrows() == 0 {
            continue;
        }
        acc = acc.add(linalg::log_det(delta)?.times(sign(q) * q as i64));
    }
    Ok(acc.value())
}

/// Square root of the relative torsion fixed by an orientation.
///
/// For an isomorphism the root is `exp(½ Σ_q (−1)^q Σ log λ)` over the eigenvalues of
/// `b_dst⁻¹ φ_*β_src` in each degree; otherwise the same construction runs on the
/// Laplacians of the mapping cone. The orientation sign multiplies the result.
pub fn sign_resolved_torsion<T: Real>(
    phi: &ComplexMorphism<T>,
    src: &GradedComplex<T>,
    dst: &GradedComplex<T>,
    beta_src: &BilinearStructure<T>,
    b_dst: &BilinearStructure<T>,
    orientation: &Orientation,
) -> Result<C<T>, AlgebraError> {
    let half = T::lit(0.5);
    let log = match isomorphism_root_log(phi, beta_src, b_dst)? {
        Some(l) => l,
        None => {
            let cone = mapping_cone(phi, src, dst, beta_src, b_dst)?;
            if !cone.complex.is_acyclic(Tolerances::<T>::default().rank)? {
                return Err(AlgebraError::NotQuasiIso);
            }
            torsion_square_acyclic_log(&cone.complex, &cone.forms)?
        }
    };
    let root = (log * half).exp();
    Ok(root * T::from_i8(orientation.sign()).unwrap())
}

fn isomorphism_root_log<T: Real>(
    phi: &ComplexMorphism<T>,
    beta_src: &BilinearStructure<T>,
    b_dst: &BilinearStructure<T>,
) -> Result<Option<C<T>>, AlgebraError> {
    let mut acc = Complex::new(T::zero(), T::zero());
    for (q, m) in phi.maps().iter().enumerate() {
        if !m.is_square() {
            return Ok(None);
        }
        if m.nrows() == 0 {
            continue;
        }
        let lu = Lu::new(m)?;
        if lu.is_singular() || lu.pivot_ratio() < T::epsilon() {
            return Ok(None);
        }
        let inv = lu.inverse()?;
        let pushed = linalg::matmul_tn(&inv, &matmul(beta_src.form(q), &inv));
        let ratio = linalg::solve(b_dst.form(q), &pushed)?;
        let ev = Schur::new(&ratio)?.eigenvalues_sorted();
        let s = ev.iter().fold(Complex::new(T::zero(), T::zero()), |a, &z| a + log_principal(z));
        acc += s * T::from_i64(sign(q)).unwrap();
    }
    Ok(Some(acc))
}

