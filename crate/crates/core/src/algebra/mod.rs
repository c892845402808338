//! Finite cochain complexes over ℂ with non-degenerate symmetric bilinear forms.
//!
//! Conventions: `d[q]` maps degree `q` to `q + 1`; `sharp[q]` maps `q + 1` back to `q`.
//! Torsions are returned as "squares": the Laplacian product `∏ det(Δ_q)^{(−1)^q q}` and
//! the super determinant of forms, which agree on acyclic complexes.

mod cone;
mod torsion;

pub use cone::{mapping_cone, MappingCone, Orientation};
pub use torsion::{
    bilinear_laplacian, relative_torsion_log, sign_resolved_torsion, torsion_of_isomorphism, torsion_square_acyclic,
    torsion_square_acyclic_log, transpose_sharp,
};

use num_traits::Zero;
use thiserror::Error;

use crate::linalg::{self, frobenius, matmul, CMat, LinalgError};
use crate::scalar::Real;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum AlgebraError {
    #[error("bilinear form in degree {degree} is degenerate (σ_min/σ_max = {ratio:e})")]
    DegenerateForm { degree: usize, ratio: f64 },
    #[error("bilinear form in degree {degree} is not symmetric (relative asymmetry {asymmetry:e})")]
    AsymmetricForm { degree: usize, asymmetry: f64 },
    #[error("morphism is not invertible in degree {degree}")]
    NotIsomorphism { degree: usize },
    #[error("complex is not acyclic in degree {degree}: rank d_q + rank d_(q-1) = {ranks} < {dim}")]
    NotAcyclic { degree: usize, ranks: usize, dim: usize },
    #[error("chain property fails in degree {degree} (relative residual {residual:e})")]
    NotChainMap { degree: usize, residual: f64 },
    #[error("morphism is not a quasi-isomorphism (mapping cone not acyclic)")]
    NotQuasiIso,
    #[error("d∘d ≠ 0 in degree {degree} (relative residual {residual:e})")]
    NotAComplex { degree: usize, residual: f64 },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Numerical thresholds shared by the algebra routines.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances<T> {
    /// Relative Frobenius threshold for structural identities.
    pub structural: T,
    /// σ_min/σ_max below which a form counts as degenerate.
    pub degenerate: T,
    /// Rank threshold relative to σ_max.
    pub rank: T,
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        Self { structural: T::lit(1e-10), degenerate: T::lit(1e-12), rank: T::lit(1e-9) }
    }
}

fn rel<T: Real>(num: T, den: T) -> T {
    if den == T::zero() {
        num
    } else {
        num / den
    }
}

/// Cochain complex `C⁰ → C¹ → … → Cⁿ`.
#[derive(Debug, Clone)]
pub struct GradedComplex<T: Real> {
    dims: Vec<usize>,
    d: Vec<CMat<T>>,
}

impl<T: Real> GradedComplex<T> {
    /// Validates shapes and `d ∘ d = 0` with the default structural tolerance.
    pub fn new(dims: Vec<usize>, d: Vec<CMat<T>>) -> Result<Self, AlgebraError> {
        Self::with_tolerance(dims, d, Tolerances::default().structural)
    }

    pub fn with_tolerance(dims: Vec<usize>, d: Vec<CMat<T>>, tol: T) -> Result<Self, AlgebraError> {
        if dims.is_empty() || d.len() + 1 != dims.len() {
            return Err(AlgebraError::Shape(format!("{} degrees but {} differentials", dims.len(), d.len())));
        }
        for (q, dq) in d.iter().enumerate() {
            if dq.shape() != (dims[q + 1], dims[q]) {
                return Err(AlgebraError::Shape(format!(
                    "d_{q} is {}x{}, expected {}x{}",
                    dq.nrows(),
                    dq.ncols(),
                    dims[q + 1],
                    dims[q]
                )));
            }
        }
        for q in 0..d.len().saturating_sub(1) {
            let dd = matmul(&d[q + 1], &d[q]);
            // roundoff-sized differentials (a small complex made of cohomology) are judged absolutely
            let scale = (frobenius(&d[q + 1]) * frobenius(&d[q])).max(T::one());
            let residual = frobenius(&dd) / scale;
            if residual > tol {
                return Err(AlgebraError::NotAComplex { degree: q, residual: residual.to_f64_lossy() });
            }
        }
        Ok(Self { dims, d })
    }

    pub fn top_degree(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn degrees(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, q: usize) -> usize {
        self.dims.get(q).copied().unwrap_or(0)
    }

    /// `d_q`; a zero map outside the stored range.
    pub fn differential(&self, q: usize) -> CMat<T> {
        self.d.get(q).cloned().unwrap_or_else(|| CMat::zeros(self.dim(q + 1), self.dim(q)))
    }

    pub fn differentials(&self) -> &[CMat<T>] {
        &self.d
    }

    /// χ = Σ (−1)^q dim C^q
    pub fn euler_characteristic(&self) -> i64 {
        self.dims.iter().enumerate().map(|(q, &n)| sign(q) * n as i64).sum()
    }

    /// χ′ = Σ (−1)^q q dim C^q
    pub fn derived_euler_characteristic(&self) -> i64 {
        self.dims.iter().enumerate().map(|(q, &n)| sign(q) * (q * n) as i64).sum()
    }

    /// Betti numbers from numerical ranks.
    pub fn betti_numbers(&self, rank_tol: T) -> Result<Vec<usize>, AlgebraError> {
        let ranks = self.ranks(rank_tol)?;
        Ok((0..self.degrees())
            .map(|q| {
                let out = ranks.get(q).copied().unwrap_or(0);
                let inc = if q == 0 { 0 } else { ranks[q - 1] };
                self.dims[q] - out - inc
            })
            .collect())
    }

    pub fn ranks(&self, rank_tol: T) -> Result<Vec<usize>, AlgebraError> {
        self.d.iter().map(|m| linalg::numerical_rank(m, rank_tol).map_err(Into::into)).collect()
    }

    pub fn is_acyclic(&self, rank_tol: T) -> Result<bool, AlgebraError> {
        Ok(self.betti_numbers(rank_tol)?.iter().all(|&b| b == 0))
    }
}

pub(crate) fn sign(q: usize) -> i64 {
    if q % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Per-degree complex symmetric non-degenerate forms.
#[derive(Debug, Clone)]
pub struct BilinearStructure<T: Real> {
    forms: Vec<CMat<T>>,
}

impl<T: Real> BilinearStructure<T> {
    pub fn new(forms: Vec<CMat<T>>) -> Result<Self, AlgebraError> {
        Self::with_tolerances(forms, Tolerances::default())
    }

    pub fn with_tolerances(forms: Vec<CMat<T>>, tol: Tolerances<T>) -> Result<Self, AlgebraError> {
        for (q, b) in forms.iter().enumerate() {
            if !b.is_square() {
                return Err(AlgebraError::Shape(format!("form in degree {q} is not square")));
            }
            if b.nrows() == 0 {
                continue;
            }
            let asym = linalg::asymmetry(b);
            if asym > tol.structural {
                return Err(AlgebraError::AsymmetricForm { degree: q, asymmetry: asym.to_f64_lossy() });
            }
            let s = linalg::singular_values(b)?;
            let ratio = rel(*s.last().unwrap(), s[0]);
            if ratio <= tol.degenerate {
                return Err(AlgebraError::DegenerateForm { degree: q, ratio: ratio.to_f64_lossy() });
            }
        }
        Ok(Self { forms })
    }

    /// Identity forms matching the dimensions of `c`.
    pub fn identity(dims: &[usize]) -> Self {
        Self { forms: dims.iter().map(|&n| CMat::identity(n, n)).collect() }
    }

    pub fn form(&self, q: usize) -> &CMat<T> {
        &self.forms[q]
    }

    pub fn forms(&self) -> &[CMat<T>] {
        &self.forms
    }

    pub fn degrees(&self) -> usize {
        self.forms.len()
    }

    /// β(v, w) = vᵀ B_q w
    pub fn pair(&self, q: usize, v: &CMat<T>, w: &CMat<T>) -> CMat<T> {
        linalg::matmul_tn(v, &matmul(&self.forms[q], w))
    }

    pub(crate) fn check_against(&self, c: &GradedComplex<T>) -> Result<(), AlgebraError> {
        if self.forms.len() != c.degrees() {
            return Err(AlgebraError::Shape("forms and complex have different degree ranges".into()));
        }
        for q in 0..c.degrees() {
            if self.forms[q].nrows() != c.dim(q) {
                return Err(AlgebraError::Shape(format!("form in degree {q} has wrong size")));
            }
        }
        Ok(())
    }
}

/// Per-degree maps between two complexes.
#[derive(Debug, Clone)]
pub struct ComplexMorphism<T: Real> {
    maps: Vec<CMat<T>>,
}

impl<T: Real> ComplexMorphism<T> {
    /// Checks shapes and the chain property `φ_{q+1} d_q = d′_q φ_q`.
    pub fn new(src: &GradedComplex<T>, dst: &GradedComplex<T>, maps: Vec<CMat<T>>, tol: T) -> Result<Self, AlgebraError> {
        if maps.len() != src.degrees() || src.degrees() != dst.degrees() {
            return Err(AlgebraError::Shape("morphism degree ranges differ".into()));
        }
        for (q, m) in maps.iter().enumerate() {
            if m.shape() != (dst.dim(q), src.dim(q)) {
                return Err(AlgebraError::Shape(format!("φ_{q} has wrong shape")));
            }
        }
        for q in 0..src.top_degree() {
            let lhs = matmul(&maps[q + 1], &src.differential(q));
            let rhs = matmul(&dst.differential(q), &maps[q]);
            let scale = frobenius(&maps[q + 1]) * frobenius(&src.differential(q))
                + frobenius(&dst.differential(q)) * frobenius(&maps[q]);
            let residual = rel(frobenius(&(lhs - rhs)), scale);
            if residual > tol {
                return Err(AlgebraError::NotChainMap { degree: q, residual: residual.to_f64_lossy() });
            }
        }
        Ok(Self { maps })
    }

    /// Wraps maps without checking the chain property.
    pub fn unchecked(maps: Vec<CMat<T>>) -> Self {
        Self { maps }
    }

    pub fn identity(c: &GradedComplex<T>) -> Self {
        Self { maps: c.dims().iter().map(|&n| CMat::identity(n, n)).collect() }
    }

    pub fn map(&self, q: usize) -> &CMat<T> {
        &self.maps[q]
    }

    pub fn maps(&self) -> &[CMat<T>] {
        &self.maps
    }

    pub fn is_zero(&self) -> bool {
        self.maps.iter().all(|m| m.iter().all(|z| z.is_zero()))
    }
}
