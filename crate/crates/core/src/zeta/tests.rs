use num_complex::Complex64;

use super::*;

const PI: f64 = std::f64::consts::PI;

fn four_sin_sq(a: Complex64) -> Complex64 {
    let s = (a * PI).sin();
    s * s * 4.0
}

#[test]
fn circle_det_matches_closed_form() {
    for a in [Complex64::new(0.3, 0.0), Complex64::new(0.5, 0.0), Complex64::new(0.25, 0.1), Complex64::new(-1.7, 0.4)] {
        let d = exact_circle_zeta_det(a, 2.0 * PI, DetMode::Strict).unwrap();
        let oracle = four_sin_sq(a);
        assert!((d - oracle).norm() < 1e-12 * oracle.norm(), "{a}: {d} vs {oracle}");
    }
    let half = exact_circle_zeta_det(Complex64::new(0.5, 0.0), 2.0 * PI, DetMode::Strict).unwrap();
    assert!((half.re - 4.0).abs() < 1e-13);
}

#[test]
fn circle_det_is_length_independent_for_acyclic_twist() {
    let a = Complex64::new(0.21, -0.05);
    let d1 = exact_circle_zeta_det(a, 1.3, DetMode::Strict).unwrap();
    let d2 = exact_circle_zeta_det(a, 17.0, DetMode::Strict).unwrap();
    assert!((d1 - d2).norm() < 1e-12 * d1.norm());
}

#[test]
fn det_prime_at_zero_twist() {
    let d = exact_circle_zeta_det(Complex64::new(0.0, 0.0), 2.0 * PI, DetMode::Prime).unwrap();
    assert!((d.re - 4.0 * PI * PI).abs() < 1e-11 && d.im.abs() < 1e-14);
    let d = exact_circle_zeta_det(Complex64::new(3.0, 0.0), 5.0, DetMode::Prime).unwrap();
    assert!((d.re - 25.0).abs() < 1e-11);
    assert!(matches!(
        exact_circle_zeta_det(Complex64::new(1.0, 0.0), 2.0 * PI, DetMode::Strict),
        Err(ZetaError::IntegerTwist { .. })
    ));
    assert!(matches!(
        exact_circle_zeta_det(Complex64::new(0.0, 0.3), 2.0 * PI, DetMode::Strict),
        Err(ZetaError::BranchViolation { .. })
    ));
}

#[test]
fn det_is_holomorphic_in_twist() {
    let h = 1e-5;
    for a in [Complex64::new(0.3, 0.05), Complex64::new(0.6, -0.2)] {
        let f = |z: Complex64| exact_circle_zeta_det(z, 2.0 * PI, DetMode::Strict).unwrap();
        let dx = (f(a + h) - f(a - h)) / (2.0 * h);
        let dy = (f(a + Complex64::new(0.0, h)) - f(a - Complex64::new(0.0, h))) / (2.0 * h);
        // ∂/∂z̄ = ½(∂_x + i∂_y)
        let dbar = (dx + Complex64::i() * dy) * 0.5;
        assert!(dbar.norm() < 1e-6 * dx.norm().max(1.0), "{dbar}");
    }
}

#[test]
fn truncated_products_converge_to_hurwitz_value() {
    // Σ_{|k|≤K} log (k+α)² − (4K+2) log K + 4K → log 4 sin²πα; the remainder is a series in
    // 1/K, so Richardson on K, 2K, 4K removes the first two orders.
    for a in [Complex64::new(0.3, 0.0), Complex64::new(0.25, 0.1)] {
        let partial = |k: i64| -> Complex64 {
            let s: Complex64 = (-k..=k).map(|j| log_principal((Complex64::new(j as f64, 0.0) + a).powi(2))).sum();
            let kf = k as f64;
            s - (4.0 * kf + 2.0) * kf.ln() + 4.0 * kf
        };
        let (p1, p2, p4) = (partial(64), partial(128), partial(256));
        let r1 = p2 * 2.0 - p1;
        let r2 = p4 * 2.0 - p2;
        let extrapolated = (r2 * 4.0 - r1) / 3.0;
        let oracle = log_principal(four_sin_sq(a));
        assert!((extrapolated - oracle).norm() < 1e-6, "{a}: {extrapolated} vs {oracle}");
    }
}

#[test]
fn log_det_large_examples() {
    let l = log_det_large(&[Complex64::new(4.0, 0.0)]).unwrap();
    assert!((l.re - 4f64.ln()).abs() < 1e-15);
    let z = Complex64::new(2.0, 3.0);
    assert!((log_det_large(&[z]).unwrap() - z.ln()).norm() < 1e-15);
    let ev = [Complex64::new(2.0, 0.0), z, Complex64::new(5.0, 0.0)];
    let naive = 2f64.ln() + z.ln() + 5f64.ln();
    assert!((log_det_large(&ev).unwrap() - naive).norm() < 1e-14);
    let permuted = [ev[2], ev[0], ev[1]];
    assert_eq!(log_det_large(&ev).unwrap(), log_det_large(&permuted).unwrap());
    assert!(matches!(log_det_large(&[Complex64::new(-1.0, 0.0)]), Err(ZetaError::BranchViolation { .. })));
}

#[test]
fn agmon_angle_independence() {
    let ev: Vec<Complex64> = (1..40).map(|k| Complex64::new(k as f64 * 1.5, (k as f64).sin() * 3.0)).collect();
    let a = log_det_with_angle(&ev, PI).unwrap();
    let b = log_det_with_angle(&ev, 0.75 * PI).unwrap();
    assert!((a - b).norm() < 1e-10);
}

#[test]
fn large_torsion_weights() {
    let l = large_torsion_log(&[Complex64::new(3.0, 0.0), Complex64::new(2.0, 1.0), Complex64::new(1.0, 0.0)]);
    assert_eq!(l, Complex64::new(-2.0 + 2.0, -1.0));
}

#[test]
fn heat_trace_examples() {
    let l0 = Complex64::new(2.5, 0.4);
    let th = heat_trace(&[l0], 0.7);
    assert!((th - (-l0 * 0.7).exp()).norm() < 1e-15);
    let ev: Vec<Complex64> = (1..30).map(|k| Complex64::new(k as f64, 0.3 * k as f64)).collect();
    for mu in [0.01, 0.3, 2.0] {
        let bound = ev.len() as f64 * (-mu * 1.0f64).exp();
        assert!(heat_trace(&ev, mu).norm() <= bound);
    }
}

#[test]
fn zeta_split_additivity_and_derivative() {
    let ev: Vec<Complex64> = (1..60).map(|k| Complex64::new(3.0 + (k * k) as f64, 2.0 * (k as f64).cos())).collect();
    for eps in [0.0, 0.5] {
        let split = SplitZeta::new(&ev, 10.0, eps, 0.5).unwrap();
        for s in [0.3, 1.0, 2.5] {
            let z = split.at(s).unwrap();
            let err = (z.zeta_one + z.zeta_two - z.total).norm();
            assert!(err < 1e-10 * z.total.norm().max(1.0), "s={s}: {err}");
        }
        let d = split.derivative_at_zero().unwrap();
        assert!((d.d_one + d.d_two - d.total).norm() < 1e-8, "{:?}", d);
    }
}

#[test]
fn reference_determinant_against_hurwitz_tier() {
    // With c → 0 the periodic reference tends to det′ (k ≠ 0) times c, and the antiperiodic
    // one to the Hurwitz value at α = ½ (both on ℓ = 2π).
    let c = 1e-10;
    let periodic = ContinuumReference { length: 2.0 * PI, twist: 0.0, shift: Complex64::new(c, 0.0), fluctuation: Complex64::new(0.0, 0.0) };
    let expected = (4.0 * PI * PI * c).ln();
    assert!((periodic.log_det().re - expected).abs() < 1e-6);
    let anti = ContinuumReference { twist: 0.5, ..periodic };
    let h = CircleTwist::new(Complex64::new(0.5, 0.0), 2.0 * PI).log_det(DetMode::Strict).unwrap();
    assert!((anti.log_det() - h).norm() < 1e-8);
}

#[test]
fn reference_corrects_a_perturbed_spectrum() {
    // Exact spectrum k² + c + s₂/(4k²) for |k| ≥ 1: the corrected sum must reproduce the
    // regularized determinant of that spectrum, which is the reference plus Σ log(1 + …).
    let c = Complex64::new(2.0, 0.7);
    let s2 = Complex64::new(30.0, -4.0);
    let r = ContinuumReference { length: 2.0 * PI, twist: 0.0, shift: c, fluctuation: s2 };
    let spectrum = |k: i64| -> Complex64 {
        let k2 = (k * k) as f64;
        if k == 0 { c } else { c + k2 + s2 / (4.0 * k2) }
    };
    let exact_shift: Complex64 = (1..200000i64).map(|k| 2.0 * log_principal(spectrum(k) / (c + (k * k) as f64))).sum();
    let exact = r.log_det() + exact_shift;
    let mut ev: Vec<Complex64> = (-100..=100).map(spectrum).collect();
    ev.sort_by(spectral_order);
    let corrected = r.corrected_log_det(&ev[1..], 1, 201).unwrap() + log_principal(c);
    assert!((corrected - exact).norm() < 1e-7, "{corrected} vs {exact}");
}

#[test]
fn extrapolation_removes_the_next_tail_order() {
    // spectrum with a k⁻⁴ term the leading-order tail ignores
    let c = Complex64::new(1.5, 0.3);
    let s2 = Complex64::new(20.0, 2.0);
    let s4 = Complex64::new(300.0, -50.0);
    let r = ContinuumReference { length: 2.0 * PI, twist: 0.0, shift: c, fluctuation: s2 };
    let spectrum = |k: i64| -> Complex64 {
        let k2 = (k * k) as f64;
        if k == 0 { c } else { c + k2 + s2 / (4.0 * k2) + s4 / (k2 * k2) }
    };
    let exact_shift: Complex64 = (1..400000i64).map(|k| 2.0 * log_principal(spectrum(k) / (c + (k * k) as f64))).sum();
    let exact = r.log_det() + exact_shift;
    let mut ev: Vec<Complex64> = (-64..=64).map(spectrum).collect();
    ev.sort_by(spectral_order);
    let plain = (r.corrected_log_det(&ev[1..], 1, 129).unwrap() + log_principal(c) - exact).norm();
    let extrapolated = (r.extrapolated_log_det(&ev[1..], 1, 64).unwrap().0 + log_principal(c) - exact).norm();
    assert!(extrapolated < 0.1 * plain, "{plain} {extrapolated}");
}
