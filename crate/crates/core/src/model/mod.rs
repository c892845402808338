//! Circle models `(M, E, g, b, f)`, their discretization and the Witten deformation.

mod candidates;
mod circle;
mod config;
mod discrete;
mod hermitian;
mod integration;
mod local;
mod morse;
mod trig;
mod witten;

#[cfg(test)]
mod tests;

pub use candidates::{candidate_subspace, CandidateSubspace};
pub use circle::{build_and_validate, CircleModel, MorseData, ValidationReport};
pub use config::{
    format_complex, parse_complex, BilinearConfig, BundleConfig, ComplexEntry, DiscretizationConfig, GeometryConfig,
    MetricKind, ModelConfig, MorseConfig, MorsePreset, Scheme, ValidationConfig,
};
pub use discrete::{fourier_derivative, BlockDiagonal, DiscreteDeRham, FieldSamples};
pub use hermitian::{compatible_hermitian, takagi_at, HermitianStructure, TakagiFactor};
pub use integration::{integration_map, morse_complex, scaling_map, MorseComplex};
pub use local::{kamber_tondeur, KamberTondeur, LocalSymbol, KT_NORMALIZATION};
pub use morse::{forward_distance, modulo, quintic_cutoff, smooth_step, wrap_offset, Ball, CriticalPoint, MorseFunction, UnstableArc};
pub use trig::TrigSeries;
pub use witten::{witten_decomposition, LocalCheck, WittenOperator};

use thiserror::Error;

use crate::algebra::AlgebraError;
use crate::linalg::LinalgError;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ModelError {
    #[error("invalid configuration field `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("Morse normal form fails near x = {point:.6}: residual {residual:.3e} exceeds {tol:.3e}")]
    ChartViolation { point: f64, residual: f64, tol: f64 },
    #[error("Morse balls around x = {first:.6} and x = {second:.6} overlap")]
    OverlapViolation { first: f64, second: f64 },
    #[error("degenerate critical point near x = {position:.6}")]
    DegenerateCritical { position: f64 },
    #[error("the Morse function has no critical points")]
    NoCriticalPoints,
    #[error("{quantity} is not flat on the Morse balls: residual {residual:.3e}")]
    NotFlat { quantity: String, residual: f64 },
    #[error("resolution N = {n} does not resolve the deformation at u = {u}: {detail}")]
    ResolutionTooCoarse { u: f64, n: usize, detail: String },
    #[error("Witten decomposition residual {residual:.3e} exceeds tolerance")]
    DecompositionMismatch { residual: f64 },
    #[error("symmetric factorization of b fails at x = {position:.6}")]
    FactorizationFailure { position: f64 },
    #[error("integration weights overflow")]
    QuadratureOverflow,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}
