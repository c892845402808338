//! Non-normal eigenanalysis of the deformed Laplacians: spectral splitting, Riesz projectors,
//! the small complex and the gap, coercivity and resolvent diagnostics.

mod diagnostics;
mod partition;
mod small;
#[cfg(test)]
mod tests;

pub use diagnostics::{
    coercivity, gap_diagnostics, large_heat_traces, projector_proximity, resolvent_lower_bound, resolvent_profile, GapReport, GapRow,
    ResolventSample,
};
pub use partition::{contour_projector, eig_schur, partition_and_project, DegreePartition, SpectrumPartition, SplitRule};
pub use small::{extract_small_complex, SmallComplex};

use thiserror::Error;

use crate::algebra::{AlgebraError, ComplexMorphism};
use crate::linalg::{CMat, LinalgError};
use crate::model::{integration_map, morse_complex, CircleModel, DiscreteDeRham, ModelError, MorseComplex};
use crate::scalar::Real;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SpectralError {
    #[error("non-finite matrix entries")]
    NonFinite,
    #[error("eigenvalues crowd the threshold {threshold} and no gap separates them")]
    AmbiguousSplit { threshold: f64 },
    #[error("restricted form in degree {degree} is singular (condition number {condition:e})")]
    SingularRestriction { degree: usize, condition: f64 },
    #[error("contour point {point:?} lies on the spectrum")]
    ContourHitsSpectrum { point: (f64, f64) },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Default small/large threshold on `Re λ`.
pub const SPLIT_THRESHOLD: f64 = 1.0;
/// Relative distance to the threshold that triggers the gap fallback.
pub const SPLIT_TOLERANCE: f64 = 1e-6;

/// Everything computed from one `(model, u)` eigenproblem.
#[derive(Debug, Clone)]
pub struct Snapshot<T: Real> {
    pub u: T,
    pub discrete: DiscreteDeRham<T>,
    pub laplacians: [CMat<T>; 2],
    pub partition: SpectrumPartition<T>,
    pub morse: MorseComplex<T>,
    pub integration: ComplexMorphism<T>,
    pub small: SmallComplex<T>,
}

impl<T: Real> Snapshot<T> {
    pub fn new(model: &CircleModel<T>, u: T) -> Result<Self, SpectralError> {
        let discrete = DiscreteDeRham::new(model, u)?;
        Self::from_discrete(model, discrete)
    }

    pub fn from_discrete(model: &CircleModel<T>, discrete: DiscreteDeRham<T>) -> Result<Self, SpectralError> {
        let u = discrete.u;
        let laplacians = discrete.laplacians();
        let partition = partition_and_project(&laplacians, T::lit(SPLIT_THRESHOLD), T::lit(SPLIT_TOLERANCE))?;
        let morse = morse_complex(model, u)?;
        let integration = integration_map(model, &discrete)?;
        let small = extract_small_complex(&partition, &discrete, &integration, &morse)?;
        Ok(Self { u, discrete, laplacians, partition, morse, integration, small })
    }

    /// Small dimensions equal `r · m_q` in every degree.
    pub fn counts_match(&self) -> bool {
        self.partition.small_dims() == vec![self.morse.complex.dim(0), self.morse.complex.dim(1)]
    }
}
