use num_traits::One;

use super::{AlgebraError, BilinearStructure, ComplexMorphism, GradedComplex};
use crate::linalg::{block_diag, CMat};
use crate::scalar::{Real, C};

/// Basis-order data for a mapping cone: one sign per degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orientation {
    signs: Vec<i8>,
}

impl Orientation {
    /// Destination basis, then source basis, in every degree; all signs +1.
    pub fn canonical(degrees: usize) -> Self {
        Self { signs: vec![1; degrees] }
    }

    pub fn flipped(mut self, degree: usize) -> Self {
        if let Some(s) = self.signs.get_mut(degree) {
            *s = -*s;
        }
        self
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn sign(&self) -> i8 {
        self.signs.iter().product()
    }
}

/// Mapping cone of `φ: src → dst` together with its direct-sum forms.
#[derive(Debug, Clone)]
pub struct MappingCone<T: Real> {
    pub complex: GradedComplex<T>,
    pub forms: BilinearStructure<T>,
    pub orientation: Orientation,
}

/// Cone in degree `q` is `dst_{q−1} ⊕ src_q` with differential `[[d_dst, φ], [0, −d_src]]`.
///
/// Degrees run from 0 to `n + 1`; with this grading the Laplacian torsion of the cone
/// equals the super-determinant relative torsion of `φ` when `φ` is invertible.
pub fn mapping_cone<T: Real>(
    phi: &ComplexMorphism<T>,
    src: &GradedComplex<T>,
    dst: &GradedComplex<T>,
    beta_src: &BilinearStructure<T>,
    b_dst: &BilinearStructure<T>,
) -> Result<MappingCone<T>, AlgebraError> {
    let n = src.top_degree();
    if dst.top_degree() != n || phi.maps().len() != n + 1 {
        return Err(AlgebraError::Shape("cone inputs have different degree ranges".into()));
    }
    let tol = super::Tolerances::<T>::default().structural;
    ComplexMorphism::new(src, dst, phi.maps().to_vec(), tol.max(T::lit(1e-8)))?;
    let dst_dim = |q: isize| if q < 0 { 0 } else { dst.dim(q as usize) };
    let src_dim = |q: usize| src.dim(q);
    let dims: Vec<usize> = (0..=n + 1).map(|q| dst_dim(q as isize - 1) + src_dim(q)).collect();
    let mut d = Vec::with_capacity(n + 1);
    let minus = -C::<T>::one();
    for q in 0..=n {
        let (rows, cols) = (dims[q + 1], dims[q]);
        let mut m = CMat::zeros(rows, cols);
        let dq_prev = dst_dim(q as isize - 1);
        let dq = dst_dim(q as isize);
        // dst_{q−1} → dst_q
        if q >= 1 && dq_prev > 0 && dq > 0 {
            m.view_mut((0, 0), (dq, dq_prev)).copy_from(&dst.differential(q - 1));
        }
        // src_q → dst_q
        if dq > 0 && src_dim(q) > 0 {
            m.view_mut((0, dq_prev), (dq, src_dim(q))).copy_from(phi.map(q));
        }
        // src_q → src_{q+1}
        if q < n && src_dim(q) > 0 && src_dim(q + 1) > 0 {
            m.view_mut((dq, dq_prev), (src_dim(q + 1), src_dim(q))).copy_from(&(src.differential(q) * minus));
        }
        d.push(m);
    }
    let complex = GradedComplex::with_tolerance(dims, d, T::lit(1e-8))?;
    let forms = (0..=n + 1)
        .map(|q| {
            let mut blocks = Vec::new();
            if q >= 1 {
                blocks.push(b_dst.form(q - 1).clone());
            }
            if q <= n {
                blocks.push(beta_src.form(q).clone());
            }
            block_diag(&blocks)
        })
        .collect();
    Ok(MappingCone {
        complex,
        forms: BilinearStructure::new(forms)?,
        orientation: Orientation::canonical(n + 2),
    })
}
