use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::asymptotics::{free_term, FreeTermFit};
use super::report::{assemble_s, c64, TorsionReport};
use super::AnomalyError;
use crate::fit::least_squares_complex;
use crate::model::{forward_distance, CircleModel, ModelConfig};
use crate::quadrature::composite_rule;
use crate::scalar::{Real, C};

/// Free term of `log τ_la,A(u) − log τ_la,B(u)` by regression and by integrating local densities.
#[derive(Debug, Clone, Serialize)]
pub struct RelativeFreeTerm {
    pub u_grid: Vec<f64>,
    /// `log τ_la,A(u) − log τ_la,B(u)`
    pub samples: Vec<Complex64>,
    pub fit: FreeTermFit,
    /// `A₀` of the regression.
    pub fit_route: Complex64,
    pub fit_error: f64,
    /// `Σ_q (−1)^q q (∫_{M_A} a^q_A − ∫_{M_B} a^q_B)` over the complements of the Morse balls.
    pub density_route: Complex64,
    pub density_error: f64,
    pub difference: f64,
}

impl RelativeFreeTerm {
    /// The two routes agree within the larger of their error bars.
    pub fn routes_agree(&self) -> bool {
        self.difference <= self.fit_error.max(self.density_error)
    }
}

fn check_matched<T: Real>(a: &CircleModel<T>, b: &CircleModel<T>) -> Result<(), AnomalyError> {
    let mismatch = |m: String| Err(AnomalyError::MismatchedSystems(m));
    if a.rank() != b.rank() {
        return mismatch(format!("ranks {} and {}", a.rank(), b.rank()));
    }
    let (ma, mb) = (a.morse_data(), b.morse_data());
    for q in 0..2 {
        if ma.count(q) != mb.count(q) {
            return mismatch(format!("{} and {} critical points of index {q}", ma.count(q), mb.count(q)));
        }
    }
    if a.rho() != b.rho() {
        return mismatch(format!("Morse radii {} and {}", a.rho().to_f64_lossy(), b.rho().to_f64_lossy()));
    }
    if a.circumference() != b.circumference() {
        return mismatch("different circumferences".into());
    }
    Ok(())
}

/// `∫` of the degree-one density over the arcs between consecutive Morse balls.
fn outside_integral<T: Real>(model: &CircleModel<T>, panels: usize) -> C<T> {
    let ell = model.circumference();
    let balls = model.balls();
    let m = balls.len();
    let mut acc = C::new(T::zero(), T::zero());
    for i in 0..m {
        let next = &balls[(i + 1) % m];
        let start = balls[i].center + balls[i].right;
        let len = forward_distance(balls[i].center, next.center, ell) - balls[i].right - next.left;
        let (xs, ws) = composite_rule(start, start + len, panels, 16);
        for (&x, &w) in xs.iter().zip(&ws) {
            acc += model.density(1, x) * w;
        }
    }
    acc
}

/// `Σ_q (−1)^q q ∫ a^q` on the circle, where only `q = 1` contributes; returns the value and
/// the change under halving the panel count.
pub(super) fn density_free_term<T: Real>(model: &CircleModel<T>) -> (Complex64, f64) {
    let fine = -c64(outside_integral(model, 64));
    let coarse = -c64(outside_integral(model, 32));
    (fine, (fine - coarse).norm())
}

fn large_logs<T: Real>(model: &CircleModel<T>, u_grid: &[T]) -> Result<Vec<TorsionReport>, AnomalyError> {
    u_grid.par_iter().map(|&u| assemble_s(model, u)).collect()
}

/// Keeps the grid values at which every system passes the resolution check.
fn resolved_rows(mut systems: Vec<Vec<TorsionReport>>) -> Result<Vec<Vec<TorsionReport>>, AnomalyError> {
    let len = systems.first().map_or(0, Vec::len);
    let keep: Vec<bool> = (0..len).map(|k| systems.iter().all(|s| s[k].resolved())).collect();
    for s in &mut systems {
        let mut k = 0;
        s.retain(|_| {
            k += 1;
            keep[k - 1]
        });
    }
    if systems.first().map_or(0, Vec::len) < 5 {
        return Err(AnomalyError::Invalid(format!("{} grid points pass the resolution check, need 5", systems[0].len())));
    }
    Ok(systems)
}

fn from_reports<T: Real>(a: &CircleModel<T>, b: &CircleModel<T>, ra: &[TorsionReport], rb: &[TorsionReport]) -> Result<RelativeFreeTerm, AnomalyError> {
    let samples: Vec<(f64, Complex64)> = ra.iter().zip(rb).map(|(x, y)| (x.u, x.log_tau_la - y.log_tau_la)).collect();
    let fit = free_term(&samples, 1)?;
    let (da, ea) = density_free_term(a);
    let (db, eb) = density_free_term(b);
    let density_route = da - db;
    Ok(RelativeFreeTerm {
        u_grid: samples.iter().map(|s| s.0).collect(),
        samples: samples.iter().map(|s| s.1).collect(),
        fit_route: fit.free_term,
        fit_error: fit.free_term_err,
        density_route,
        density_error: ea + eb,
        difference: (fit.free_term - density_route).norm(),
        fit,
    })
}

pub fn relative_free_term<T: Real>(a: &CircleModel<T>, b: &CircleModel<T>, u_grid: &[T]) -> Result<RelativeFreeTerm, AnomalyError> {
    check_matched(a, b)?;
    let logs = resolved_rows(vec![large_logs(a, u_grid)?, large_logs(b, u_grid)?])?;
    from_reports(a, b, &logs[0], &logs[1])
}

/// `FT(f, f̃) + FT(−f, −f̃)`, which vanishes in odd dimension.
#[derive(Debug, Clone, Serialize)]
pub struct OddAntisymmetry {
    pub forward: RelativeFreeTerm,
    pub reflected: RelativeFreeTerm,
    pub sum: Complex64,
    /// Combined regression error bars of the two fits.
    pub error: f64,
}

impl OddAntisymmetry {
    pub fn holds(&self) -> bool {
        self.sum.norm() <= self.error
    }
}

/// `log(τ⁺_A τ⁻_A / τ⁺_B τ⁻_B) ≈ log(S²_A/S²_B) − β u`, with `±` the systems for `±f`.
#[derive(Debug, Clone, Serialize)]
pub struct RatioTest {
    pub u_grid: Vec<f64>,
    pub samples: Vec<Complex64>,
    pub beta_hat: Complex64,
    pub constant: Complex64,
    pub constant_err: f64,
    /// `exp(constant)`, the estimate of `S²_A/S²_B`.
    pub ratio: Complex64,
}

/// Both reflection experiments on one set of large torsions for `A`, `B`, `−A`, `−B`.
#[derive(Debug, Clone, Serialize)]
pub struct ReflectionStudy {
    pub antisymmetry: OddAntisymmetry,
    pub ratio: RatioTest,
    /// `FT(A, A)` through the same pipeline.
    pub identical: RelativeFreeTerm,
}

pub fn reflection_study<T: Real>(a: &ModelConfig, b: &ModelConfig, u_grid: &[T]) -> Result<ReflectionStudy, AnomalyError> {
    let build = |c: &ModelConfig| CircleModel::<T>::new(c);
    let (ap, am) = (build(a)?, build(&a.clone().reversed())?);
    let (bp, bm) = (build(b)?, build(&b.clone().reversed())?);
    check_matched(&ap, &bp)?;
    check_matched(&am, &bm)?;
    let logs = resolved_rows(vec![large_logs(&ap, u_grid)?, large_logs(&am, u_grid)?, large_logs(&bp, u_grid)?, large_logs(&bm, u_grid)?])?;

    let forward = from_reports(&ap, &bp, &logs[0], &logs[2])?;
    let reflected = from_reports(&am, &bm, &logs[1], &logs[3])?;
    let antisymmetry = OddAntisymmetry {
        sum: forward.fit_route + reflected.fit_route,
        error: forward.fit_error + reflected.fit_error,
        forward,
        reflected,
    };

    let u: Vec<f64> = logs[0].iter().map(|r| r.u).collect();
    let samples: Vec<Complex64> = (0..u.len())
        .map(|k| logs[0][k].log_tau_la + logs[1][k].log_tau_la - logs[2][k].log_tau_la - logs[3][k].log_tau_la)
        .collect();
    let fit = least_squares_complex(&[vec![1.0; u.len()], u.clone()], &samples)?;
    let constant = fit.coefficient(0);
    let ratio = RatioTest { beta_hat: -fit.coefficient(1), constant, constant_err: fit.std_error(0), ratio: constant.exp(), u_grid: u, samples };

    let identical = from_reports(&ap, &ap, &logs[0], &logs[0])?;
    Ok(ReflectionStudy { antisymmetry, ratio, identical })
}

pub fn odd_antisymmetry<T: Real>(a: &ModelConfig, b: &ModelConfig, u_grid: &[T]) -> Result<OddAntisymmetry, AnomalyError> {
    Ok(reflection_study(a, b, u_grid)?.antisymmetry)
}

pub fn ratio_test<T: Real>(a: &ModelConfig, b: &ModelConfig, u_grid: &[T]) -> Result<RatioTest, AnomalyError> {
    Ok(reflection_study(a, b, u_grid)?.ratio)
}
