//! Gap, coercivity, projector and resolvent diagnostics.

use rayon::prelude::*;
use serde::Serialize;

use super::partition::{SpectrumPartition, SplitRule};
use super::{Snapshot, SpectralError};
use crate::fit::{least_squares, LinearFit};
use crate::linalg::{self, frobenius, matmul, matmul_hn, CMat, Schur};
use crate::model::{BlockDiagonal, CircleModel};
use crate::scalar::{Real, C};
use crate::zeta::HeatTrace;

#[derive(Debug, Clone, Serialize)]
pub struct GapRow {
    pub u: f64,
    pub small_dims: Vec<usize>,
    pub expected_dims: Vec<usize>,
    /// From the transferred small differential when available.
    pub max_abs_small: Option<f64>,
    /// Straight from the Schur form; saturates at the rounding floor of `Δ_u`.
    pub max_abs_small_direct: Option<f64>,
    pub min_re_large: Option<f64>,
    pub rule: SplitRule,
}

impl GapRow {
    pub fn from_snapshot<T: Real>(s: &Snapshot<T>) -> Result<Self, SpectralError> {
        let small = s.small.spectrum()?;
        let max_abs_small = small.iter().flatten().map(|z| z.norm().to_f64_lossy()).reduce(f64::max);
        Ok(Self {
            u: s.u.to_f64_lossy(),
            small_dims: s.partition.small_dims(),
            expected_dims: vec![s.morse.complex.dim(0), s.morse.complex.dim(1)],
            max_abs_small,
            max_abs_small_direct: s.partition.max_small_abs().map(|v| v.to_f64_lossy()),
            min_re_large: s.partition.min_large_re().map(|v| v.to_f64_lossy()),
            rule: s.partition.rule,
        })
    }

    pub fn counts_match(&self) -> bool {
        self.small_dims == self.expected_dims
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub rows: Vec<GapRow>,
    /// Fit of `log max|λ_small|` against `{1, u}`; `eps_hat` is minus the slope.
    pub decay: Option<LinearFit>,
    pub eps_hat: Option<f64>,
    /// Fit of `min Re λ_large` against `{1, u}`.
    pub growth: Option<LinearFit>,
    /// `min_u min Re λ_large / u`.
    pub c_hat: Option<f64>,
    /// Smallest grid value from which the small counts equal `r·m_q` for good.
    pub onset: Option<f64>,
}

impl GapReport {
    pub fn from_rows(rows: Vec<GapRow>) -> Self {
        let decay_pts: Vec<(f64, f64)> =
            rows.iter().filter_map(|r| r.max_abs_small.filter(|&v| v > 0.0).map(|v| (r.u, v.ln()))).collect();
        let decay = fit_line(&decay_pts);
        let growth_pts: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.min_re_large.map(|v| (r.u, v))).collect();
        let growth = fit_line(&growth_pts);
        let c_hat = growth_pts.iter().filter(|(u, _)| *u > 0.0).map(|(u, v)| v / u).reduce(f64::min);
        let onset = rows.iter().rposition(|r| !r.counts_match()).map_or(rows.first().map(|r| r.u), |k| rows.get(k + 1).map(|r| r.u));
        Self { eps_hat: decay.as_ref().map(|f| -f.coefficients[1]), decay, growth, c_hat, onset, rows }
    }
}

fn fit_line(points: &[(f64, f64)]) -> Option<LinearFit> {
    if points.len() < 3 {
        return None;
    }
    let ones = vec![1.0; points.len()];
    let x = points.iter().map(|p| p.0).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1).collect();
    least_squares(&[ones, x], &y).ok()
}

/// Runs the eigenproblem at every grid value in parallel and fits the gap exponents.
pub fn gap_diagnostics<T: Real>(model: &CircleModel<T>, u_grid: &[T]) -> Result<(GapReport, Vec<Snapshot<T>>), SpectralError> {
    let snaps = u_grid.par_iter().map(|&u| Snapshot::new(model, u)).collect::<Result<Vec<_>, _>>()?;
    let rows = snaps.iter().map(GapRow::from_snapshot).collect::<Result<Vec<_>, _>>()?;
    Ok((GapReport::from_rows(rows), snaps))
}

fn conjugated<T: Real>(a: &CMat<T>, root: &BlockDiagonal<T>) -> Result<CMat<T>, SpectralError> {
    let inv = root.inverse()?;
    Ok(root.left_mul(&inv.right_mul(a)))
}

/// `min Re⟪Δv, v⟫/‖v‖²` over the Hermitian-orthogonal complement of the columns of `span`.
///
/// `root` is `W` with `WᴴW` the Gram matrix of the Hermitian product.
pub fn coercivity<T: Real>(laplacian: &CMat<T>, span: &CMat<T>, root: &BlockDiagonal<T>) -> Result<T, SpectralError> {
    let n = laplacian.nrows();
    let a = conjugated(laplacian, root)?;
    let v = root.left_mul(span);
    let mut proj = CMat::<T>::identity(n, n);
    if v.ncols() > 0 {
        let gram = matmul_hn(&v, &v);
        let coef = linalg::solve(&gram, &linalg::adjoint(&v))?;
        proj -= matmul(&v, &coef);
    }
    let hermitian = (&proj + linalg::adjoint(&proj)).map(|z| z * T::lit(0.5));
    let (w, vecs) = linalg::hermitian_eigen(&hermitian)?;
    let keep: Vec<usize> = w.iter().enumerate().filter(|(_, &x)| x > T::lit(0.5)).map(|(i, _)| i).collect();
    let u = CMat::from_fn(n, keep.len(), |i, k| vecs[(i, keep[k])]);
    let b = matmul_hn(&u, &matmul(&a, &u));
    let h = (&b + linalg::adjoint(&b)).map(|z| z * T::lit(0.5));
    Ok(linalg::hermitian_eigenvalues(&h)?.first().copied().unwrap_or(T::infinity()))
}

/// `max ‖Qv − v‖ / ‖v‖` over the columns of `span`, in the Hermitian norm.
pub fn projector_proximity<T: Real>(projector: &CMat<T>, span: &CMat<T>, root: &BlockDiagonal<T>) -> T {
    let moved = matmul(projector, span) - span;
    (0..span.ncols())
        .map(|k| {
            let num = frobenius(&root.left_mul(&moved.columns(k, 1).into_owned()));
            let den = frobenius(&root.left_mul(&span.columns(k, 1).into_owned()));
            num / den
        })
        .fold(T::zero(), T::max)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ResolventSample {
    pub point: (f64, f64),
    /// `‖(Δ − λ)⁻¹‖₂` in the Hermitian norm.
    pub norm: f64,
    /// Distance from `λ` to the spectrum.
    pub distance: f64,
}

/// Resolvent norms along `points`; `root` selects the Hermitian norm (identity if absent).
pub fn resolvent_profile<T: Real>(laplacian: &CMat<T>, root: Option<&BlockDiagonal<T>>, points: &[C<T>]) -> Result<Vec<ResolventSample>, SpectralError> {
    let spectrum = Schur::new(laplacian)?.diagonal();
    let a = match root {
        Some(w) => conjugated(laplacian, w)?,
        None => laplacian.clone(),
    };
    let scale = frobenius(laplacian);
    let n = a.nrows();
    points
        .iter()
        .map(|&z| {
            let distance = spectrum.iter().map(|l| (l - z).norm()).fold(T::infinity(), T::min);
            if distance <= T::lit(1e3) * T::epsilon() * scale {
                return Err(SpectralError::ContourHitsSpectrum { point: (z.re.to_f64_lossy(), z.im.to_f64_lossy()) });
            }
            let shifted = &a - CMat::<T>::identity(n, n).map(|v| v * z);
            let sv = linalg::singular_values(&shifted)?;
            let smin = sv.last().copied().unwrap_or(T::zero());
            Ok(ResolventSample { point: (z.re.to_f64_lossy(), z.im.to_f64_lossy()), norm: (T::one() / smin).to_f64_lossy(), distance: distance.to_f64_lossy() })
        })
        .collect()
}

/// `min_k ‖(Δ − λ)w_k‖ / ‖w_k‖` over the columns of `samples`, all in the Hermitian frame.
pub fn resolvent_lower_bound<T: Real>(laplacian: &CMat<T>, root: &BlockDiagonal<T>, lambda: C<T>, samples: &CMat<T>) -> Result<T, SpectralError> {
    let n = laplacian.nrows();
    let a = conjugated(laplacian, root)? - CMat::<T>::identity(n, n).map(|v| v * lambda);
    let image = matmul(&a, samples);
    Ok((0..samples.ncols())
        .map(|k| frobenius(&image.columns(k, 1).into_owned()) / frobenius(&samples.columns(k, 1).into_owned()))
        .fold(T::infinity(), T::min))
}

/// `θ_q(μ) = tr(e^{−μΔ_q}P)` from the large eigenvalues of each degree.
pub fn large_heat_traces<T: Real>(partition: &SpectrumPartition<T>, mu_grid: &[T]) -> Vec<HeatTrace<T>> {
    partition.degrees.iter().map(|d| HeatTrace::sample(&d.large_eigenvalues(), mu_grid)).collect()
}
