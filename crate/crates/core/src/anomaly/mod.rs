//! The ratio `S` of analytic to combinatorial torsion data and the experiments built on it:
//! invariance sweeps, small-complex convergence, large-torsion asymptotics, free terms and the
//! one-dimensional symbol density.

mod asymptotics;
mod density;
mod identities;
mod relative;
mod report;
mod sweep;
mod whs;

pub use asymptotics::{fit_large_asymptotics, free_term, AsymptoticFit, FreeTermFit};
pub use density::{bfk_density_1d, density_integral, SymbolDensity1D};
pub use identities::{circle_multiplicativity, multiplicativity, Multiplicativity};
pub use relative::{odd_antisymmetry, ratio_test, reflection_study, relative_free_term, OddAntisymmetry, RatioTest, ReflectionStudy, RelativeFreeTerm};
pub use report::{assemble_s, LargeNormalization, TorsionDiagnostics, TorsionReport, RESOLUTION_TOL};
pub use sweep::{anomaly_sweep, b_homotopy_family, metric_family, u_stability, SweepMember, SweepReport, SweepRow};
pub use whs::{whs_diagnostics, WhsMode, WhsReport, WhsRow};

use thiserror::Error;

use crate::algebra::AlgebraError;
use crate::fit::FitError;
use crate::linalg::LinalgError;
use crate::model::ModelError;
use crate::spectral::SpectralError;
use crate::zeta::ZetaError;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum AnomalyError {
    #[error("no spectral gap at u = {u}: small dimensions {found:?}, Morse counts {expected:?}")]
    GapNotEstablished { u: f64, found: Vec<usize>, expected: Vec<usize> },
    #[error("restricted integration map is singular in degree {degree}")]
    SingularIntegrationMap { degree: usize },
    #[error("samples do not follow the template: relative residual {residual:e}")]
    TemplateMismatch { residual: f64 },
    #[error("symbol is not elliptic with parameter: F = {potential:e}")]
    NotParameterElliptic { potential: f64 },
    #[error("systems cannot be compared: {0}")]
    MismatchedSystems(String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    IllConditionedFit(#[from] FitError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Zeta(#[from] ZetaError),
}
