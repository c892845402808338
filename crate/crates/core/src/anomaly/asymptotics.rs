use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::report::{c64, TorsionReport};
use super::AnomalyError;
use crate::fit::{least_squares_complex, ComplexFit};
use crate::model::{kamber_tondeur, CircleModel};
use crate::scalar::Real;
use crate::spectral::Snapshot;

/// Relative RMS residual above which samples are declared not to follow the template.
const TEMPLATE_TOLERANCE: f64 = 1e-3;

/// Coefficients of `Σ_{j≤n} A_j u^j + Σ_{j≤n} B_j u^j log u`.
#[derive(Debug, Clone, Serialize)]
pub struct FreeTermFit {
    pub degree: usize,
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
    pub a_err: Vec<f64>,
    pub b_err: Vec<f64>,
    /// `A₀`
    pub free_term: Complex64,
    pub free_term_err: f64,
    pub residual_norm: f64,
}

/// Least-squares fit of `(u, t(u))` samples to the degree-`n` template.
pub fn free_term(samples: &[(f64, Complex64)], degree: usize) -> Result<FreeTermFit, AnomalyError> {
    if samples.iter().any(|s| !(s.0 > 0.0)) {
        return Err(AnomalyError::Invalid("template samples need u > 0".into()));
    }
    let mut columns = Vec::with_capacity(2 * degree + 2);
    for j in 0..=degree {
        columns.push(samples.iter().map(|s| s.0.powi(j as i32)).collect::<Vec<_>>());
    }
    for j in 0..=degree {
        columns.push(samples.iter().map(|s| s.0.powi(j as i32) * s.0.ln()).collect::<Vec<_>>());
    }
    let y: Vec<Complex64> = samples.iter().map(|s| s.1).collect();
    let fit = least_squares_complex(&columns, &y)?;
    let scale = (y.iter().map(|z| z.norm_sqr()).sum::<f64>() / y.len() as f64).sqrt().max(1.0);
    let rms = fit.residual_norm() / (y.len() as f64).sqrt();
    if rms > TEMPLATE_TOLERANCE * scale {
        return Err(AnomalyError::TemplateMismatch { residual: rms / scale });
    }
    let k = degree + 1;
    Ok(FreeTermFit {
        degree,
        a: (0..k).map(|j| fit.coefficient(j)).collect(),
        b: (k..2 * k).map(|j| fit.coefficient(j)).collect(),
        a_err: (0..k).map(|j| fit.std_error(j)).collect(),
        b_err: (k..2 * k).map(|j| fit.std_error(j)).collect(),
        free_term: fit.coefficient(0),
        free_term_err: fit.std_error(0),
        residual_norm: fit.residual_norm(),
    })
}

/// `log τ_la(u) ≈ a₀ + a₁u + a₂ log u` over the gap regime.
#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticFit {
    pub resolution: usize,
    /// Grid values actually used.
    pub u_window: Vec<f64>,
    /// First grid value from which the small counts match the Morse counts.
    pub onset: Option<f64>,
    /// Smallest grid value dropped because the resolution no longer supports it.
    pub resolution_limit: Option<f64>,
    pub samples: Vec<Complex64>,
    pub a0: Complex64,
    pub a1: Complex64,
    pub a2: Complex64,
    pub std_errors: [f64; 3],
    /// Half-width of the 95% Student-t interval on `a₀`.
    pub a0_confidence: f64,
    pub residual_norm: f64,
    /// `(n/2)χ − χ′`
    pub expected_a2: f64,
    /// Twice the `u`-slope of the Kamber–Tondeur term, by quadrature.
    pub expected_a1: Complex64,
    /// `S` from `a₀ = log S − a₂ log π + 2KT(0)`, with `a₂` set to its expected value.
    pub s_from_a0: Complex64,
    /// `a₀` refitted on the upper half of the window.
    pub a0_upper: Complex64,
    pub free_term: Complex64,
}

impl AsymptoticFit {
    pub fn a2_relative_error(&self) -> f64 {
        (self.a2 - self.expected_a2).norm() / self.expected_a2.abs().max(1.0)
    }

    pub fn a1_relative_error(&self) -> f64 {
        (self.a1 - self.expected_a1).norm() / self.expected_a1.norm().max(1e-300)
    }

    /// The upper-half refit moves `a₀` by less than its confidence half-width.
    pub fn upper_half_stable(&self) -> bool {
        (self.a0_upper - self.a0).norm() <= self.a0_confidence.max(f64::EPSILON * self.a0.norm())
    }
}

fn confidence_half_width(std_error: f64, samples: usize, params: usize) -> f64 {
    let dof = samples.saturating_sub(params).max(1) as f64;
    let t = StudentsT::new(0.0, 1.0, dof).map_or(1.96, |d| d.inverse_cdf(0.975));
    t * std_error
}

fn fit_three(u: &[f64], y: &[Complex64]) -> Result<ComplexFit, AnomalyError> {
    let cols = vec![vec![1.0; u.len()], u.to_vec(), u.iter().map(|v| v.ln()).collect()];
    Ok(least_squares_complex(&cols, y)?)
}

/// Fits `log τ_la` against `{1, u, log u}`; needs at least 8 grid points in the window.
///
/// The window starts at 1.5 times the gap onset when the gap opens inside the grid and ends
/// where the tail extrapolation exceeds [`RESOLUTION_TOL`](super::report::RESOLUTION_TOL).
pub fn fit_large_asymptotics<T: Real>(model: &CircleModel<T>, u_grid: &[T]) -> Result<AsymptoticFit, AnomalyError> {
    let snaps = u_grid.par_iter().map(|&u| Snapshot::new(model, u)).collect::<Result<Vec<_>, _>>()?;
    let matches: Vec<bool> = snaps.iter().map(Snapshot::counts_match).collect();
    let onset_idx = matches.iter().rposition(|m| !m).map_or(Some(0), |k| if k + 1 < matches.len() { Some(k + 1) } else { None });
    let onset = onset_idx.map(|k| snaps[k].u.to_f64_lossy());
    let start = match onset_idx {
        Some(0) => snaps.first().map_or(0.0, |s| s.u.to_f64_lossy()),
        Some(k) => 1.5 * snaps[k].u.to_f64_lossy(),
        None => return Err(AnomalyError::Invalid("the spectral gap never opens on the grid".into())),
    };
    let candidates = snaps
        .par_iter()
        .filter(|s| s.u.to_f64_lossy() >= start && s.counts_match())
        .map(|s| TorsionReport::from_snapshot(model, s))
        .collect::<Result<Vec<_>, _>>()?;
    let resolution_limit = candidates.iter().find(|r| !r.resolved()).map(|r| r.u);
    let reports: Vec<TorsionReport> = candidates.into_iter().filter(TorsionReport::resolved).collect();
    if reports.len() < 8 {
        return Err(AnomalyError::Invalid(format!(
            "{} grid points in the fit window pass the resolution check, need 8",
            reports.len()
        )));
    }
    let u: Vec<f64> = reports.iter().map(|r| r.u).collect();
    let y: Vec<Complex64> = reports.iter().map(|r| r.log_tau_la).collect();
    let fit = fit_three(&u, &y)?;
    let half = u.len() / 2;
    let upper = fit_three(&u[half..], &y[half..])?;
    let kt = kamber_tondeur(model);
    let expected_a2 = reports[0].small_torsion_exponent();
    let a0 = fit.coefficient(0);
    let a0_confidence = confidence_half_width(fit.std_error(0), u.len(), 3);
    let log_s = a0 + expected_a2 * PI.ln() - c64(kt.base) * 2.0;
    Ok(AsymptoticFit {
        resolution: model.resolution(),
        u_window: u,
        onset,
        resolution_limit,
        samples: y,
        a0,
        a1: fit.coefficient(1),
        a2: fit.coefficient(2),
        std_errors: [fit.std_error(0), fit.std_error(1), fit.std_error(2)],
        a0_confidence,
        residual_norm: fit.residual_norm(),
        expected_a2,
        expected_a1: c64(kt.slope) * 2.0,
        s_from_a0: log_s.exp(),
        a0_upper: upper.coefficient(0),
        free_term: a0,
    })
}
