use rayon::prelude::*;
use serde::Serialize;

use super::AnomalyError;
use crate::algebra::{mapping_cone, torsion_square_acyclic_log, GradedComplex, Tolerances};
use crate::fit::{least_squares, LinearFit};
use crate::linalg::matmul;
use crate::model::{candidate_subspace, compatible_hermitian, scaling_map, CircleModel};
use crate::scalar::Real;
use crate::spectral::{coercivity, projector_proximity, Snapshot};

/// Deviations below this are treated as rounding and left out of the rate fits.
const FIT_FLOOR: f64 = 1e-12;

/// How the small torsion was evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WhsMode {
    /// Morse complex acyclic: super determinant of the pushed forms.
    Isomorphism,
    /// Morse complex with cohomology: Laplacian torsion of the mapping cone of `Int_sm`.
    Cone,
}

#[derive(Debug, Clone, Serialize)]
pub struct WhsRow {
    pub u: f64,
    /// `‖(η_u Int_sm)_*β_sm − b_X‖ / ‖b_X‖`
    pub form_deviation: f64,
    /// `|τ(Int_sm)·(u/π)^{(n/2)χ−χ′} − 1|`
    pub torsion_deviation: f64,
    /// `max_q ‖Δ_q v‖/‖v‖` over the candidate vectors.
    pub candidate_residual: f64,
    /// Smallest `Re⟪Δv, v⟫/(u‖v‖²)` on the complement of the candidates.
    pub coercivity: f64,
    /// `max ‖Qv − v‖/‖v‖` over the candidates.
    pub proximity: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct WhsReport {
    pub mode: WhsMode,
    /// `(n/2)χ − χ′`
    pub exponent: f64,
    pub rows: Vec<WhsRow>,
    pub form_fit: Option<LinearFit>,
    /// Minus the slope of `log form_deviation` in `u`.
    pub form_rate: Option<f64>,
    pub torsion_fit: Option<LinearFit>,
    pub torsion_rate: Option<f64>,
    /// Human-readable notes on fits that could not be trusted.
    pub degraded: Vec<String>,
}

fn rate_fit(points: &[(f64, f64)], name: &str, degraded: &mut Vec<String>) -> (Option<LinearFit>, Option<f64>) {
    let pts: Vec<(f64, f64)> = points.iter().filter(|p| p.1 > FIT_FLOOR).map(|&(u, v)| (u, v.ln())).collect();
    if pts.len() < 3 {
        degraded.push(format!("{name}: {} points above the rounding floor", pts.len()));
        return (None, None);
    }
    let x = pts.iter().map(|p| p.0).collect();
    let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
    match least_squares(&[vec![1.0; pts.len()], x], &y) {
        Ok(fit) => {
            if fit.r_squared < 0.9 {
                degraded.push(format!("{name}: R² = {:.3}", fit.r_squared));
            }
            let rate = -fit.coefficients[1];
            (Some(fit), Some(rate))
        }
        Err(e) => {
            degraded.push(format!("{name}: {e}"));
            (None, None)
        }
    }
}

fn row<T: Real>(model: &CircleModel<T>, u: T, mode: WhsMode, exponent: f64) -> Result<WhsRow, AnomalyError> {
    let snap = Snapshot::new(model, u)?;
    let small = &snap.small;
    let morse = &snap.morse;
    let dims = small.dims();
    let eta = scaling_map(u, 1, &dims);
    let form_deviation = small.form_deviation(&eta, &morse.forms)?.to_f64_lossy();

    let log_tau = match mode {
        WhsMode::Isomorphism => small.integration_torsion_log(&morse.forms)?.as_complex(),
        WhsMode::Cone => {
            // the transferred differential makes Int_sm an exact chain map
            let src = GradedComplex::with_tolerance(dims.to_vec(), vec![small.best_differential().clone()], T::lit(1e-8))?;
            let cone = mapping_cone(&small.integration, &src, &morse.complex, &small.forms, &morse.forms)?;
            torsion_square_acyclic_log(&cone.complex, &cone.forms)?
        }
    };
    let uf = u.to_f64_lossy();
    let scaled = super::report::c64(log_tau) + exponent * (uf / std::f64::consts::PI).ln();
    let torsion_deviation = (scaled.exp() - 1.0).norm();

    let herm = compatible_hermitian(&snap.discrete)?;
    let cand = candidate_subspace(model, &snap.discrete, u);
    let mut candidate_residual = 0.0f64;
    let mut coercive = f64::INFINITY;
    let mut proximity = 0.0f64;
    for q in 0..2 {
        let basis = &cand.basis[q];
        let lap = &snap.laplacians[q];
        let r = herm.norm(q, &matmul(lap, basis)) / herm.norm(q, basis);
        candidate_residual = candidate_residual.max(r.to_f64_lossy());
        coercive = coercive.min((coercivity(lap, basis, &herm.root[q])? / u).to_f64_lossy());
        proximity = proximity.max(projector_proximity(&snap.partition.degrees[q].projector, basis, &herm.root[q]).to_f64_lossy());
    }
    Ok(WhsRow { u: uf, form_deviation, torsion_deviation, candidate_residual, coercivity: coercive, proximity })
}

/// Convergence of the small complex to the Morse complex along `u_grid`.
pub fn whs_diagnostics<T: Real>(model: &CircleModel<T>, u_grid: &[T]) -> Result<WhsReport, AnomalyError> {
    let first = u_grid.first().copied().ok_or_else(|| AnomalyError::Invalid("empty u grid".into()))?;
    let morse = crate::model::morse_complex(model, first)?;
    let acyclic = morse.complex.is_acyclic(Tolerances::<T>::default().rank)?;
    let mode = if acyclic { WhsMode::Isomorphism } else { WhsMode::Cone };
    let exponent = 0.5 * morse.complex.euler_characteristic() as f64 - morse.complex.derived_euler_characteristic() as f64;
    let rows = u_grid.par_iter().map(|&u| row(model, u, mode, exponent)).collect::<Result<Vec<_>, _>>()?;
    let mut degraded = Vec::new();
    let form: Vec<(f64, f64)> = rows.iter().map(|r| (r.u, r.form_deviation)).collect();
    let (form_fit, form_rate) = rate_fit(&form, "form deviation", &mut degraded);
    let torsion: Vec<(f64, f64)> = rows.iter().map(|r| (r.u, r.torsion_deviation)).collect();
    let (torsion_fit, torsion_rate) = rate_fit(&torsion, "torsion deviation", &mut degraded);
    Ok(WhsReport { mode, exponent, rows, form_fit, form_rate, torsion_fit, torsion_rate, degraded })
}
