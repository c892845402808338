//! Least-squares fits used by the diagnostics. Reports are kept in `f64`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum FitError {
    #[error("need more samples ({samples}) than parameters ({params})")]
    TooFewSamples { samples: usize, params: usize },
    #[error("design matrix is ill-conditioned (condition number {condition:e})")]
    IllConditioned { condition: f64 },
    #[error("non-finite sample")]
    NonFinite,
}

#[derive(Debug, Clone, Serialize)]
pub struct LinearFit {
    pub coefficients: Vec<f64>,
    /// One standard error per coefficient.
    pub std_errors: Vec<f64>,
    pub residual_norm: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y ≈ Σ_k c_k columns[k]`.
pub fn least_squares(columns: &[Vec<f64>], y: &[f64]) -> Result<LinearFit, FitError> {
    let m = y.len();
    let p = columns.len();
    if m < p || p == 0 {
        return Err(FitError::TooFewSamples { samples: m, params: p });
    }
    if y.iter().chain(columns.iter().flatten()).any(|v| !v.is_finite()) {
        return Err(FitError::NonFinite);
    }
    let a = DMatrix::from_fn(m, p, |i, k| columns[k][i]);
    // column equilibration keeps u, log u and 1 comparable
    let scales: Vec<f64> = (0..p).map(|k| a.column(k).norm().max(f64::MIN_POSITIVE)).collect();
    let scaled = DMatrix::from_fn(m, p, |i, k| a[(i, k)] / scales[k]);
    let svd = scaled.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 1e-13 * smax {
        return Err(FitError::IllConditioned { condition: smax / smin });
    }
    let b = DVector::from_column_slice(y);
    let x = svd.solve(&b, 0.0).map_err(|_| FitError::IllConditioned { condition: smax / smin })?;
    let resid = &b - &scaled * &x;
    let rss = resid.norm_squared();
    let mean = y.iter().sum::<f64>() / m as f64;
    let tss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let r_squared = if tss > 0.0 { 1.0 - rss / tss } else { 1.0 };
    let dof = (m - p).max(1) as f64;
    let sigma2 = rss / dof;
    let gram_inv = (scaled.transpose() * &scaled).try_inverse().ok_or(FitError::IllConditioned { condition: smax / smin })?;
    let coefficients = (0..p).map(|k| x[k] / scales[k]).collect();
    let std_errors = (0..p).map(|k| (sigma2 * gram_inv[(k, k)]).max(0.0).sqrt() / scales[k]).collect();
    Ok(LinearFit { coefficients, std_errors, residual_norm: rss.sqrt(), r_squared })
}

/// Complex samples fitted with a real design: real and imaginary parts separately.
#[derive(Debug, Clone, Serialize)]
pub struct ComplexFit {
    pub re: LinearFit,
    pub im: LinearFit,
}

impl ComplexFit {
    pub fn coefficient(&self, k: usize) -> Complex64 {
        Complex64::new(self.re.coefficients[k], self.im.coefficients[k])
    }

    pub fn std_error(&self, k: usize) -> f64 {
        self.re.std_errors[k].hypot(self.im.std_errors[k])
    }

    pub fn residual_norm(&self) -> f64 {
        self.re.residual_norm.hypot(self.im.residual_norm)
    }
}

pub fn least_squares_complex(columns: &[Vec<f64>], y: &[Complex64]) -> Result<ComplexFit, FitError> {
    let re: Vec<f64> = y.iter().map(|z| z.re).collect();
    let im: Vec<f64> = y.iter().map(|z| z.im).collect();
    Ok(ComplexFit { re: least_squares(columns, &re)?, im: least_squares(columns, &im)? })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_is_recovered() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 2.0 * v).collect();
        let fit = least_squares(&[vec![1.0; 10], x], &y).unwrap();
        assert!((fit.coefficients[0] - 3.0).abs() < 1e-12);
        assert!((fit.coefficients[1] + 2.0).abs() < 1e-12);
        assert!(fit.r_squared > 1.0 - 1e-12);
    }

    #[test]
    fn collinear_design_is_rejected() {
        let x: Vec<f64> = (0..6).map(f64::from).collect();
        let twice: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        assert!(matches!(least_squares(&[x, twice], &[1.0; 6]), Err(FitError::IllConditioned { .. })));
    }
}
