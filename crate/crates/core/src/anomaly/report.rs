use num_complex::Complex64;
use serde::Serialize;

use super::AnomalyError;
use crate::algebra::{sign_resolved_torsion, GradedComplex, Orientation};
use crate::linalg::Lu;
use crate::model::{kamber_tondeur, CircleModel};
use crate::scalar::{Real, C};
use crate::spectral::{Snapshot, SplitRule};
use crate::zeta::{large_torsion_log, log_det_large};

pub(crate) fn c64<T: Real>(z: C<T>) -> Complex64 {
    Complex64::new(z.re.to_f64_lossy(), z.im.to_f64_lossy())
}

/// How the large torsion is normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LargeNormalization {
    /// Discrete modes up to `2K + 1`, the continuum reference beyond, extrapolated in `K`.
    Continuum,
    /// Discrete spectrum only; off by a `u`-independent factor that cancels in ratios.
    RelativeOnly,
}

#[derive(Debug, Clone, Serialize)]
pub struct TorsionDiagnostics {
    pub max_abs_small: Option<f64>,
    pub min_re_large: Option<f64>,
    pub split_rule: SplitRule,
    /// `σ_max/σ_min` of the restricted forms.
    pub form_condition: [f64; 2],
    /// Smallest LU pivot of `Int_sm` relative to the largest, per degree.
    pub integration_pivot_ratio: [f64; 2],
    pub invariance_residual: f64,
}

/// Largest tail extrapolation step accepted in fit windows; the error left in `log τ_la` is
/// about a twentieth of the step.
pub const RESOLUTION_TOL: f64 = 1e-4;

/// `S = τ(Int_sm) · τ_la · e^{−2KT}` with every factor kept separately.
#[derive(Debug, Clone, Serialize)]
pub struct TorsionReport {
    pub u: f64,
    pub resolution: usize,
    pub small_dims: Vec<usize>,
    /// `Σ (−1)^q dim C^q` of the Morse complex.
    pub chi: i64,
    /// `Σ (−1)^q q dim C^q` of the Morse complex.
    pub chi_prime: i64,
    pub log_tau_sm: Complex64,
    pub log_tau_la: Complex64,
    /// Plain sum over the discrete large spectrum.
    pub log_tau_la_discrete: Complex64,
    /// Size of the tail extrapolation step; grows with `u` at fixed resolution.
    pub tail_correction: Option<f64>,
    pub normalization: LargeNormalization,
    pub kt: Complex64,
    pub log_s: Complex64,
    pub s: Complex64,
    pub s_minus_one: f64,
    pub s_plus_one: f64,
    /// `+1` or `−1`, whichever `S` is closer to.
    pub sign: i8,
    /// Square root of `S` with the branch fixed eigenvalue by eigenvalue.
    pub s_root: Complex64,
    pub diagnostics: TorsionDiagnostics,
}

pub fn assemble_s<T: Real>(model: &CircleModel<T>, u: T) -> Result<TorsionReport, AnomalyError> {
    let snap = Snapshot::new(model, u)?;
    TorsionReport::from_snapshot(model, &snap)
}

impl TorsionReport {
    pub fn from_snapshot<T: Real>(model: &CircleModel<T>, snap: &Snapshot<T>) -> Result<Self, AnomalyError> {
        let u = snap.u.to_f64_lossy();
        let morse = &snap.morse;
        let expected = vec![morse.complex.dim(0), morse.complex.dim(1)];
        let found = snap.partition.small_dims();
        if found != expected {
            return Err(AnomalyError::GapNotEstablished { u, found, expected });
        }
        let small = &snap.small;
        debug_assert_eq!(small.euler_characteristic(), morse.complex.euler_characteristic());
        debug_assert_eq!(small.derived_euler_characteristic(), morse.complex.derived_euler_characteristic());

        let mut pivots = [1.0; 2];
        for (q, p) in pivots.iter_mut().enumerate() {
            let lu = Lu::new(small.integration.map(q))?;
            *p = lu.pivot_ratio().to_f64_lossy();
            if lu.is_singular() || *p < 1e-14 {
                return Err(AnomalyError::SingularIntegrationMap { degree: q });
            }
        }

        let log_tau_sm = small.integration_torsion_log(&morse.forms)?.as_complex();
        let large: Vec<Vec<C<T>>> = snap.partition.degrees.iter().map(|d| d.large_eigenvalues()).collect();
        let log_dets = large.iter().map(|ev| log_det_large(ev)).collect::<Result<Vec<_>, _>>()?;
        let discrete = large_torsion_log(&log_dets);
        let (log_tau_la, tail_correction, normalization) = match model.liouville_reference(&snap.discrete, snap.u) {
            Some(reference) => {
                let half_modes = (snap.discrete.n - 1) / 4;
                let (ld, step) = reference.extrapolated_log_det(&large[1], snap.partition.degrees[1].small, half_modes)?;
                (-ld, Some(step.to_f64_lossy()), LargeNormalization::Continuum)
            }
            None => (discrete, None, LargeNormalization::RelativeOnly),
        };
        let kt = kamber_tondeur(model).value(snap.u);
        let two = T::lit(2.0);
        let log_s = log_tau_sm + log_tau_la - kt * two;
        let s = log_s.exp();

        let src = GradedComplex::with_tolerance(
            small.dims().to_vec(),
            vec![small.best_differential().clone()],
            T::lit(1e-8),
        )?;
        let root = sign_resolved_torsion(&small.integration, &src, &morse.complex, &small.forms, &morse.forms, &Orientation::canonical(2))?;
        let s_root = root * (log_tau_la / two - kt).exp();

        let s = c64(s);
        let one = Complex64::new(1.0, 0.0);
        let (minus, plus) = ((s - one).norm(), (s + one).norm());
        Ok(Self {
            u,
            resolution: snap.discrete.n,
            small_dims: snap.partition.small_dims(),
            chi: morse.complex.euler_characteristic(),
            chi_prime: morse.complex.derived_euler_characteristic(),
            log_tau_sm: c64(log_tau_sm),
            log_tau_la: c64(log_tau_la),
            log_tau_la_discrete: c64(discrete),
            tail_correction,
            normalization,
            kt: c64(kt),
            log_s: c64(log_s),
            s,
            s_minus_one: minus,
            s_plus_one: plus,
            sign: if minus <= plus { 1 } else { -1 },
            s_root: c64(s_root),
            diagnostics: TorsionDiagnostics {
                max_abs_small: small.spectrum()?.iter().flatten().map(|z| z.norm().to_f64_lossy()).reduce(f64::max),
                min_re_large: snap.partition.min_large_re().map(|v| v.to_f64_lossy()),
                split_rule: snap.partition.rule,
                form_condition: small.form_condition.map(|v| v.to_f64_lossy()),
                integration_pivot_ratio: pivots,
                invariance_residual: small.invariance_residual.to_f64_lossy(),
            },
        })
    }

    /// `(n/2)χ − χ′`, the power of `u/π` in the small torsion.
    /// Whether the tail extrapolation at this `u` is small enough for fitting.
    pub fn resolved(&self) -> bool {
        self.tail_correction.is_none_or(|t| t <= RESOLUTION_TOL)
    }

    pub fn small_torsion_exponent(&self) -> f64 {
        0.5 * self.chi as f64 - self.chi_prime as f64
    }
}
