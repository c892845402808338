use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::report::{assemble_s, TorsionReport};
use super::AnomalyError;
use crate::model::{format_complex, CircleModel, ModelConfig};
use crate::scalar::Real;

#[derive(Debug, Clone, Serialize)]
pub struct SweepMember {
    pub label: String,
    pub config: ModelConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub label: String,
    pub report: Option<TorsionReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub u: f64,
    pub rows: Vec<SweepRow>,
    /// Label of the first member that produced a value.
    pub reference: Option<String>,
    /// `max |S/S_ref − 1|`
    pub max_deviation: f64,
    /// `max |S_i/S_j − 1|` over all pairs.
    pub max_pairwise: f64,
}

impl SweepReport {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.report.is_none()).count()
    }
}

/// `S` for every member at a common `u`; a failing member is recorded and the rest continue.
pub fn anomaly_sweep<T: Real>(members: &[SweepMember], u: T) -> SweepReport {
    let rows: Vec<SweepRow> = members
        .par_iter()
        .map(|m| {
            let result = CircleModel::<T>::new(&m.config).map_err(AnomalyError::from).and_then(|model| assemble_s(&model, u));
            match result {
                Ok(r) => SweepRow { label: m.label.clone(), report: Some(r), error: None },
                Err(e) => SweepRow { label: m.label.clone(), report: None, error: Some(e.to_string()) },
            }
        })
        .collect();
    let values: Vec<(&str, Complex64)> = rows.iter().filter_map(|r| r.report.as_ref().map(|t| (r.label.as_str(), t.s))).collect();
    let reference = values.first().map(|v| v.0.to_string());
    let max_deviation = values.first().map_or(0.0, |&(_, s0)| values.iter().map(|(_, s)| (s / s0 - 1.0).norm()).fold(0.0, f64::max));
    let max_pairwise = values
        .iter()
        .flat_map(|(_, a)| values.iter().map(move |(_, b)| (a / b - 1.0).norm()))
        .fold(0.0, f64::max);
    SweepReport { u: u.to_f64_lossy(), rows, reference, max_deviation, max_pairwise }
}

/// `b_t = e^{tψ} b` for `t` evenly spaced in `[0, 1]`, `ψ = 0.3 cos x + 0.2i sin x`.
pub fn b_homotopy_family(base: &ModelConfig, count: usize) -> Vec<SweepMember> {
    (0..count)
        .map(|k| {
            let t = if count > 1 { k as f64 / (count - 1) as f64 } else { 0.0 };
            let mut config = base.clone();
            config.bilinear.psi_cos = vec![format_complex(Complex64::new(0.3 * t, 0.0))];
            config.bilinear.psi_sin = vec![format_complex(Complex64::new(0.0, 0.2 * t))];
            SweepMember { label: format!("b:t={t}"), config }
        })
        .collect()
}

/// Base metric `1 + ε cos 2x` for each `ε`; the Morse balls keep their adapted metric.
pub fn metric_family(base: &ModelConfig, amplitudes: &[f64]) -> Vec<SweepMember> {
    amplitudes
        .iter()
        .map(|&eps| {
            let mut config = base.clone();
            config.geometry.metric_cos = vec![0.0, eps];
            SweepMember { label: format!("g:eps={eps}"), config }
        })
        .collect()
}

/// `max_u |S(u)/S(u₀) − 1|` over a grid, `u₀` the first grid value.
pub fn u_stability<T: Real>(model: &CircleModel<T>, u_grid: &[T]) -> Result<(f64, Vec<TorsionReport>), AnomalyError> {
    let reports = u_grid.par_iter().map(|&u| assemble_s(model, u)).collect::<Result<Vec<_>, _>>()?;
    let s0 = reports.first().map(|r| r.s).ok_or_else(|| AnomalyError::Invalid("empty u grid".into()))?;
    let dev = reports.iter().map(|r| (r.s / s0 - 1.0).norm()).fold(0.0, f64::max);
    Ok((dev, reports))
}
