//! Complex-valued analytic torsion, Witten deformation and the anomaly of the torsion ratio on
//! circle models, generic over `f32`/`f64` through [`scalar::Real`].

pub mod backend;
pub mod scalar;
pub mod linalg;
pub mod quadrature;
pub mod algebra;
pub mod zeta;
pub mod model;
pub mod fit;
pub mod spectral;
pub mod anomaly;

pub use anomaly::AnomalyError;
pub use model::{ModelConfig, ModelError};

// Double-precision instances of the generic types.
pub type Complex64Matrix = linalg::CMat<f64>;
pub type Circle = model::CircleModel<f64>;
pub type Snapshot = spectral::Snapshot<f64>;
pub type Complex = algebra::GradedComplex<f64>;
pub type Forms = algebra::BilinearStructure<f64>;
pub type ChainMap = algebra::ComplexMorphism<f64>;
pub type Cone = algebra::MappingCone<f64>;
pub type Symbol = model::LocalSymbol<f64>;
pub type Density = anomaly::SymbolDensity1D<f64>;
pub type Reference = zeta::ContinuumReference<f64>;
