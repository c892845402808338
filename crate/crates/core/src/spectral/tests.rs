use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::linalg::{self, frobenius, matmul};
use crate::model::{candidate_subspace, compatible_hermitian, ModelConfig};
use crate::scalar::C;

fn cos_model(n: usize) -> CircleModel<f64> {
    CircleModel::new(&ModelConfig::with_holonomy(Complex64::from_polar(1.0, PI / 3.0)).with_resolution(n)).unwrap()
}

fn twisted_model(n: usize) -> CircleModel<f64> {
    let mut c = ModelConfig::with_holonomy(Complex64::from_polar(1.5, PI / 3.0)).with_resolution(n);
    c.bilinear.psi_cos = vec!["0.3".into()];
    c.bilinear.psi_sin = vec!["0.2i".into()];
    CircleModel::new(&c).unwrap()
}

#[test]
fn projector_invariants_at_large_u() {
    let model = cos_model(513);
    let snap = Snapshot::new(&model, 25.0).unwrap();
    assert_eq!(snap.partition.small_dims(), vec![1, 1]);
    assert_eq!(snap.partition.rule, SplitRule::Threshold);
    for (q, d) in snap.partition.degrees.iter().enumerate() {
        assert!(d.idempotency_residual() < 1e-9, "q = {q}: {}", d.idempotency_residual());
        assert!(d.commutator_residual(&snap.laplacians[q]) < 1e-9);
        // β(Qv, w) = β(v, Qw) ⇔ MQ = QᵀM
        let m = &snap.discrete.mass[q];
        let lhs = m.left_mul(&d.projector);
        let rhs = m.right_mul(&linalg::transpose(&d.projector));
        assert!(frobenius(&(&lhs - &rhs)) < 1e-8 * frobenius(&lhs));
    }
}

#[test]
fn schur_and_contour_projectors_agree() {
    let model = twisted_model(129);
    let snap = Snapshot::new(&model, 6.0).unwrap();
    for (q, d) in snap.partition.degrees.iter().enumerate() {
        let contour = contour_projector(&snap.laplacians[q], C::new(0.0, 0.0), 1.0, 48).unwrap();
        let err = frobenius(&(contour - &d.projector)) / frobenius(&d.projector);
        assert!(err < 1e-6, "q = {q}: {err}");
    }
}

#[test]
fn large_spectra_pair_across_degrees() {
    let model = twisted_model(129);
    let snap = Snapshot::new(&model, 4.0).unwrap();
    let a = snap.partition.degrees[0].large_eigenvalues();
    let b = snap.partition.degrees[1].large_eigenvalues();
    assert_eq!(a.len(), b.len());
    for z in a.iter().take(40) {
        let gap = b.iter().map(|w| (z - w).norm()).fold(f64::INFINITY, f64::min);
        assert!(gap < 1e-8 * (1.0 + z.norm()), "{z}");
    }
}

#[test]
fn transferred_small_spectrum_matches_the_direct_one() {
    // at u = 2 the small eigenvalues sit far above the rounding floor
    let model = twisted_model(257);
    let snap = Snapshot::new(&model, 2.0).unwrap();
    let direct = snap.partition.degrees[0].small_eigenvalues();
    let transferred = snap.small.spectrum().unwrap();
    assert!(direct[0].norm() > 1e-6);
    assert!((direct[0] - transferred[0][0]).norm() < 1e-6 * direct[0].norm(), "{} vs {}", direct[0], transferred[0][0]);
    assert!((transferred[0][0] - transferred[1][0]).norm() < 1e-12 * direct[0].norm());
    assert!(snap.small.invariance_residual < 1e-10);
}

#[test]
fn gap_widens_with_u() {
    let model = cos_model(257);
    let grid: Vec<f64> = (0..7).map(|k| 10.0 + 5.0 * k as f64).collect();
    let (report, _) = gap_diagnostics(&model, &grid).unwrap();
    assert!(report.rows.iter().all(GapRow::counts_match));
    assert_eq!(report.onset, Some(10.0));
    let eps = report.eps_hat.unwrap();
    assert!(eps > 0.0 && report.decay.as_ref().unwrap().r_squared > 0.99, "{report:?}");
    assert!(report.c_hat.unwrap() > 0.0);
    assert!(report.growth.as_ref().unwrap().coefficients[1] > 0.0);
}

#[test]
fn coercivity_and_projector_proximity() {
    // the candidate cut-off starts at ρ/3, so the proximity decays like e^{−uρ²/18}
    let mut config = ModelConfig::with_holonomy(Complex64::from_polar(1.0, PI / 3.0)).with_resolution(257);
    config.morse.rho = 1.2;
    let model = CircleModel::<f64>::new(&config).unwrap();
    let mut coercive = Vec::new();
    let mut proximity = Vec::new();
    let grid = [10.0, 25.0, 40.0];
    for u in grid {
        let snap = Snapshot::new(&model, u).unwrap();
        let herm = compatible_hermitian(&snap.discrete).unwrap();
        let cand = candidate_subspace(&model, &snap.discrete, u);
        let c = (0..2).map(|q| coercivity(&snap.laplacians[q], &cand.basis[q], &herm.root[q]).unwrap()).fold(f64::INFINITY, f64::min);
        let p = (0..2)
            .map(|q| projector_proximity(&snap.partition.degrees[q].projector, &cand.basis[q], &herm.root[q]))
            .fold(0.0, f64::max);
        coercive.push(c / u);
        proximity.push(p);
    }
    assert!(coercive.iter().all(|&c| c > 0.2), "{coercive:?}");
    assert!(proximity.windows(2).all(|w| w[1] < w[0]), "{proximity:?}");
    assert!(proximity[2] < 0.2 * proximity[0], "{proximity:?}");
}

#[test]
fn resolvent_profile_and_gap_bound() {
    let model = cos_model(129);
    let u = 20.0;
    let snap = Snapshot::new(&model, u).unwrap();
    let herm = compatible_hermitian(&snap.discrete).unwrap();
    let lap = &snap.laplacians[0];
    let circle: Vec<C<f64>> = (0..16).map(|k| C::from_polar(1.0, 2.0 * PI * (k as f64 + 0.5) / 16.0)).collect();
    for s in resolvent_profile(lap, Some(&herm.root[0]), &circle).unwrap() {
        let ratio = s.norm * s.distance;
        assert!(ratio > 0.1 && ratio < 10.0, "{s:?}");
    }
    let rate = snap.partition.min_large_re().unwrap() / u;
    let lambda = C::new(rate * u / 2.0, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let samples = CMat::<f64>::from_fn(lap.nrows(), 100, |_, _| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let bound = (lambda.norm() - (-rate * u).exp()).min(rate * u - lambda.re);
    assert!(resolvent_lower_bound(lap, &herm.root[0], lambda, &samples).unwrap() >= bound);
    assert!(matches!(
        resolvent_profile(lap, None, &[snap.partition.degrees[0].large_eigenvalues()[0]]),
        Err(SpectralError::ContourHitsSpectrum { .. })
    ));
}

#[test]
fn large_heat_trace_decays_at_the_gap_rate() {
    let model = cos_model(129);
    let mu: Vec<f64> = (1..=20).map(|k| 0.1 * k as f64).collect();
    for u in [10.0, 20.0] {
        let snap = Snapshot::new(&model, u).unwrap();
        let floor = snap.partition.min_large_re().unwrap();
        for (q, tr) in large_heat_traces(&snap.partition, &mu).iter().enumerate() {
            let count = snap.partition.degrees[q].large_eigenvalues().len() as f64;
            for (m, t) in tr.mu.iter().zip(&tr.theta) {
                assert!(t.norm() <= count * (-m * floor).exp() * (1.0 + 1e-12));
            }
        }
    }
}

#[test]
fn small_forms_and_integration_torsion() {
    let model = cos_model(257);
    let snap = Snapshot::new(&model, 20.0).unwrap();
    let eta = crate::model::scaling_map(20.0, 1, &[1, 1]);
    let dev = snap.small.form_deviation(&eta, &snap.morse.forms).unwrap();
    assert!(dev < 1e-2, "{dev}");
    let int = &snap.small.integration;
    assert!(linalg::det(int.map(0)).unwrap().norm() > 1e-3);
    assert!(linalg::det(int.map(1)).unwrap().norm() > 1e-3);
    let chain = matmul(int.map(1), &snap.small.differential) - matmul(&snap.morse.complex.differential(0), int.map(0));
    assert!(frobenius(&chain) < 1e-9);
}
