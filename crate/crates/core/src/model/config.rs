//! Serializable description of a circle model.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ModelError;

/// A complex number written as `"re+imi"`, e.g. `"0.5+0.866i"`, `"-2i"`, `"1.5"`.
pub fn parse_complex(field: &str, text: &str) -> Result<Complex64, ModelError> {
    let err = || ModelError::Config { field: field.to_string(), message: format!("cannot parse complex number {text:?}") };
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(err());
    }
    let Some(body) = s.strip_suffix('i') else {
        return s.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| err());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len()).rev().find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re_txt, im_txt) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("", body),
    };
    let im = match im_txt {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => t.parse::<f64>().map_err(|_| err())?,
    };
    let re = if re_txt.is_empty() { 0.0 } else { re_txt.parse::<f64>().map_err(|_| err())? };
    if !re.is_finite() || !im.is_finite() {
        return Err(err());
    }
    Ok(Complex64::new(re, im))
}

pub fn format_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{:e}", z.re)
    } else {
        format!("{:e}{}{:e}i", z.re, if z.im < 0.0 { "-" } else { "+" }, z.im.abs())
    }
}

/// Scalar or row-major square matrix of complex strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexEntry {
    Scalar(String),
    Matrix(Vec<Vec<String>>),
}

impl ComplexEntry {
    pub fn parse(&self, field: &str, rank: usize) -> Result<Vec<Vec<Complex64>>, ModelError> {
        let shape_err = |m: String| ModelError::Config { field: field.to_string(), message: m };
        match self {
            Self::Scalar(s) => {
                let z = parse_complex(field, s)?;
                Ok((0..rank).map(|i| (0..rank).map(|j| if i == j { z } else { Complex64::new(0.0, 0.0) }).collect()).collect())
            }
            Self::Matrix(rows) => {
                if rows.len() != rank || rows.iter().any(|r| r.len() != rank) {
                    return Err(shape_err(format!("expected a {rank}×{rank} matrix")));
                }
                rows.iter().map(|r| r.iter().map(|s| parse_complex(field, s)).collect()).collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    /// `g = g_base` everywhere.
    Base,
    /// `g` is replaced near each critical point so that the Morse chart is an isometry.
    #[default]
    MorseAdapted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    pub circumference: f64,
    pub metric: MetricKind,
    /// `g_base = 1 + Σ_k (c_k cos kθ + s_k sin kθ)`, `θ = 2πx/ℓ`, `k = 1, 2, …`
    pub metric_cos: Vec<f64>,
    pub metric_sin: Vec<f64>,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self { circumference: 2.0 * PI, metric: MetricKind::MorseAdapted, metric_cos: vec![], metric_sin: vec![] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BundleConfig {
    pub rank: usize,
    pub holonomy: ComplexEntry,
}

impl Default for BundleConfig {
    fn default() -> Self {
        Self { rank: 1, holonomy: ComplexEntry::Scalar("0.5+0.8660254037844386i".into()) }
    }
}

/// `b = exp(ψ) · B₀` before it is made parallel near the critical points;
/// `ψ = Σ_k (p_k cos kθ + q_k sin kθ)` with complex coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BilinearConfig {
    pub base: ComplexEntry,
    pub psi_cos: Vec<String>,
    pub psi_sin: Vec<String>,
}

impl Default for BilinearConfig {
    fn default() -> Self {
        Self { base: ComplexEntry::Scalar("1".into()), psi_cos: vec![], psi_sin: vec![] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MorsePreset {
    /// `(ℓ/2π)² cos θ`: one minimum, one maximum, unit curvature.
    #[default]
    Cos,
    /// `(ℓ/2π)² cos(2kθ)/(4k²)`: `4k` critical points, unit curvature.
    Cos2k,
    /// Raw coefficients `Σ (a_k cos kθ + b_k sin kθ)`.
    Fourier,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MorseConfig {
    pub preset: MorsePreset,
    pub k: usize,
    pub rho: f64,
    /// `+1` or `−1`; the latter replaces `f` by `−f`.
    pub sign: i32,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl Default for MorseConfig {
    fn default() -> Self {
        Self { preset: MorsePreset::Cos, k: 1, rho: 0.4, sign: 1, cos: vec![], sin: vec![] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    #[default]
    Fourier,
    FiniteDifference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiscretizationConfig {
    pub scheme: Scheme,
    pub n: usize,
}

impl Default for DiscretizationConfig {
    fn default() -> Self {
        Self { scheme: Scheme::Fourier, n: 257 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidationConfig {
    pub tol_chart: f64,
    /// Turn metric-flatness and parallelism residuals into errors.
    pub strict: bool,
    pub tol_flat: f64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self { tol_chart: 2e-3, strict: false, tol_flat: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub geometry: GeometryConfig,
    pub bundle: BundleConfig,
    pub bilinear: BilinearConfig,
    pub morse: MorseConfig,
    pub discretization: DiscretizationConfig,
    pub validation: ValidationConfig,
}

impl ModelConfig {
    pub fn from_toml(text: &str) -> Result<Self, ModelError> {
        toml::from_str(text).map_err(|e| ModelError::Config { field: "model".into(), message: e.to_string() })
    }

    /// Rank-one model with the given holonomy and otherwise default data.
    pub fn with_holonomy(holonomy: Complex64) -> Self {
        let mut c = Self::default();
        c.bundle.holonomy = ComplexEntry::Scalar(format_complex(holonomy));
        c
    }

    pub fn with_resolution(mut self, n: usize) -> Self {
        self.discretization.n = n;
        self
    }

    pub fn reversed(mut self) -> Self {
        self.morse.sign = -self.morse.sign;
        self
    }
}
