use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use torsionlab::anomaly::{
    anomaly_sweep, assemble_s, b_homotopy_family, bfk_density_1d, density_integral, fit_large_asymptotics, metric_family,
    reflection_study, whs_diagnostics, SweepMember,
};
use torsionlab::linalg::CMat;
use torsionlab::model::{LocalSymbol, MorsePreset};
use torsionlab::spectral::gap_diagnostics;
use torsionlab::{Circle, ModelConfig};

use crate::catalog::Experiment;
use crate::config::ExperimentConfig;
use crate::error::ExperimentError;
use crate::output::{tagged, tagged_error, tagged_real, Assertion, Table};

/// Everything an experiment produces apart from the config echo and timings.
#[derive(Debug, Default)]
pub struct Outcome {
    pub results: Value,
    pub tables: Vec<Table>,
    pub assertions: Vec<Assertion>,
    /// Wall-clock seconds per stage; kept out of the deterministic report.
    pub stages: Vec<(String, f64)>,
}

struct Stopwatch {
    start: Instant,
    stages: Vec<(String, f64)>,
}

impl Stopwatch {
    fn new() -> Self {
        Self { start: Instant::now(), stages: vec![] }
    }

    fn lap(&mut self, name: &str) {
        let now = Instant::now();
        self.stages.push((name.into(), (now - self.start).as_secs_f64()));
        self.start = now;
    }
}

pub fn run(config: &ExperimentConfig) -> Result<Outcome, ExperimentError> {
    match config.experiment {
        Experiment::Spectrum => spectrum(config),
        Experiment::Gap => gap(config),
        Experiment::Whs => whs(config),
        Experiment::Torsion => torsion(config),
        Experiment::AnomalySweep => sweep(config),
        Experiment::Asymptotics => asymptotics(config),
        Experiment::Density => density(config),
        Experiment::RelativeFt => relative(config),
        Experiment::SignRoot => sign_root(config),
    }
}

fn model(config: &ModelConfig) -> Result<Circle, ExperimentError> {
    Ok(Circle::new(config)?)
}

fn spectrum(config: &ExperimentConfig) -> Result<Outcome, ExperimentError> {
    let mut clock = Stopwatch::new();
    let m = model(&config.model)?;
    let (report, snaps) = gap_diagnostics(&m, &config.grid.u)?;
    clock.lap("eigenproblems");
    let mut table = Table::new("spectrum", &["u", "degree", "index", "part", "re", "im"]);
    let mut per_u = Vec::new();
    for snap in &snaps {
        for (q, d) in snap.partition.degrees.iter().enumerate() {
            let small = d.small_eigenvalues();
            let large = d.large_eigenvalues();
            let parts = small.iter().map(|z| ("small", z)).chain(large.iter().map(|z| ("large", z)));
            for (k, (part, z)) in parts.enumerate() {
                table.push(vec![snap.u.into(), q.into(), k.into(), part.into(), z.re.into(), z.im.into()]);
            }
        }
        per_u.push(json!({ "u": snap.u, "small_dims": snap.partition.small_dims(), "rule": snap.partition.rule }));
    }
    let onset = report.onset;
    let assertions = vec![Assertion::holds("small dimensions equal the Morse counts from the onset on", onset.is_some(), format!("onset {onset:?}"))];
    Ok(Outcome { results: json!({ "snapshots": per_u, "onset": onset }), tables: vec![table], assertions, stages: clock.stages })
}

fn gap(config: &ExperimentConfig) -> Result<Outcome, ExperimentError> {
    let mut clock = Stopwatch::new();
    let m = model(&config.model)?;
    let (report, _) = gap_diagnostics(&m, &config.grid.u)?;
    clock.lap("eigenproblems");
    // per-row exponents; the fitted ones are in the JSON report
    let mut table = Table::new("gap", &["u", "max_abs_small", "min_re_large", "eps_hat", "c_hat"]);
    for r in &report.rows {
        let eps = r.max_abs_small.filter(|v| *v > 0.0).map(|v| -v.ln() / r.u);
        table.push(vec![r.u.into(), r.max_abs_small.into(), r.min_re_large.into(), eps.into(), r.min_re_large.map(|v| v / r.u).into()]);
    }
    let eps_hat = report.eps_hat.unwrap_or(f64::NAN);
    let r2 = report.decay.as_ref().map_or(f64::NAN, |f| f.r_squared);
    let c_hat = report.c_hat.unwrap_or(f64::NAN);
    let dims_ok = report.onset.is_some_and(|o| report.rows.iter().filter(|r| r.u >= o).all(|r| r.counts_match()));
    let assertions = vec![
        Assertion::above("fitted decay rate of the small eigenvalues", eps_hat, 0.0),
        Assertion::above("R² of the decay fit", r2, config.tolerances.gap_r2),
        Assertion::above("min Re λ_large / u", c_hat, 0.0),
        Assertion::holds("small dimensions equal r·m_q from the onset on", dims_ok, format!("onset {:?}", report.onset)),
    ];
    let results = json!({
        "eps_hat": tagged_real("eps_hat", eps_hat),
        "decay_r_squared": r2,
        "c_hat": tagged_real("c_hat", c_hat),
        "growth": report.growth,
        "onset": report.onset,
        "rows": report.rows,
    });
    Ok(Outcome { results, tables: vec![table], assertions, stages: clock.stages })
}

fn whs(config: &ExperimentConfig) -> Result<Outcome, ExperimentError> {
    let mut clock = Stopwatch::new();
    let m = model(&config.model)?;
    let report = whs_diagnostics(&m, &config.grid.u)?;
    clock.lap("snapshots");
    let mut table = Table::new("whs", &["u", "form_deviation", "torsion_deviation", "candidate_residual", "coercivity", "proximity"]);
    for r in &report.rows {
        table.push(vec![
            r.u.into(),
            r.form_deviation.into(),
            r.torsion_deviation.into(),
            r.candidate_residual.into(),
            r.coercivity.into(),
            r.proximity.into(),
        ]);
    }
    let last = report.rows.iter().max_by(|a, b| a.u.total_cmp(&b.u)).map_or(f64::NAN, |r| r.torsion_deviation);
    let assertions = vec![
        Assertion::above("fitted rate of the form deviation", report.form_rate.unwrap_or(f64::NAN), 0.0),
        Assertion::below("torsion deviation at the largest u", last, config.tolerances.whs_final),
    ];
    let results = json!({
        "mode": report.mode,
        "exponent": tagged_real("small_torsion_exponent", report.exponent),
        "form_rate": report.form_rate.map(|v| tagged_real("form_rate", v)),
        "torsion_rate": report.torsion_rate.map(|v| tagged_real("torsion_rate", v)),
        "degraded": report.degraded,
        "rows": report.rows,
    });
    Ok(Outcome { results, tables: vec![table], assertions, stages: clock.stages })
}

fn torsion(config: &ExperimentConfig) -> Result<Outcome, ExperimentError> {
    let mut clock = Stopwatch::new();
    let m = model(&config.model)?;
    let mut table = Table::new(
        "torsion",
        &["u", "log_tau_sm_re", "log_tau_sm_im", "log_tau_la_re", "log_tau_la_im", "kt_re", "kt_im", "s_re", "s_im", "s_minus_one", "s_plus_one"],
    );
    let mut reports = Vec::new();
    let mut assertions = Vec::new();
    for &u in &config.grid.u {
        let r = assemble_s(&m, u)?;
        clock.lap(&format!("u={u}"));
        table.push(vec![
            u.into(),
            r.log_tau_sm.re.into(),
            r.log_tau_sm.im.into(),
            r.log_tau_la.re.into(),
            r.log_tau_la.im.into(),
            r.kt.re.into(),
            r.kt.im.into(),
            r.s.re.into(),
            r.s.im.into(),
            r.s_minus_one.into(),
            r.s_plus_one.into(),
        ]);
        assertions.push(Assertion::below(&format!("|S - 1| at u = {u}"), r.s_minus_one, config.tolerances.s));
        reports.push(json!({
            "u": u,
            "S": tagged("S", r.s),
            "abs_S_minus_one": tagged_real("abs_S_minus_one", r.s_minus_one),
            "abs_S_plus_one": tagged_real("abs_S_plus_one", r.s_plus_one),
            "log_tau_sm": tagged("log_tau_sm", r.log_tau_sm),
            "log_tau_la": tagged("log_tau_la", r.log_tau_la),
            "kamber_tondeur": tagged("KT", r.kt),
            "chi": tagged_real("chi", r.chi as f64),
            "chi_prime": tagged_real("chi_prime", r.chi_prime as f64),
            "report": r,
        }));
    }
    Ok(Outcome { results: json!({ "reports": reports }), tables: vec![table], assertions, stages: clock.stages })
}

fn sweep_members(config: &ExperimentConfig) -> Vec<SweepMember> {
    let mut members = b_homotopy_family(&config.model, config.sweep.b_members);
    members.extend(metric_family(&config.model, &config.sweep.metric_amplitudes));
    if config.sweep.f_variant {
        let mut c = config.model.clone();
        c.morse.preset = MorsePreset::Cos2k;
        c.morse.k = 1;
        members.push(SweepMember { label: "f:cos2k".into(), config: c });
    }
    members
}

fn sweep(config: &ExperimentConfig) -> Result<Outcome, ExperimentError> {
    let mut clock = Stopwatch::new();
    let members = sweep_members(config);
    let mut table = Table::new("sweep", &["u", "label", "s_re", "s_im", "deviation", "error"]);
    let mut reports = Vec::new();
    let mut assertions = Vec::new();
    for &u in &config.grid.u {
        let report = anomaly_sweep::<f64>(&members, u);
        clock.lap(&format!("u={u}"));
        let s0 = report.rows.iter().find_map(|r| r.report.as_ref().map(|t| t.s));
        for row in &report.rows {
            let (re, im, dev) = match (&row.report, s0) {
                (Some(t), Some(s0)) => (Some(t.s.re), Some(t.s.im), Some((t.s / s0 - 1.0).norm())),
                _ => (None, None, None),
            };
            table.push(vec![u.into(), row.label.clone().into(), re.into(), im.into(), dev.into(), row.error.clone().unwrap_or_default().into()]);
        }
        assertions.push(Assertion::below(&format!("max |S/S_ref - 1| at u = {u}"), report.max_deviation, config.tolerances.sweep));
        assertions.push(Assertion::holds(&format!("every member evaluates at u = {u}"), report.failures() == 0, format!("{} failures", report.failures())));
        reports.push(json!({
            "u": u,
            "max_deviation": tagged_real("max_S_deviation", report.max_deviation),
            "max_pairwise": tagged_real("max_S_pairwise", report.max_pairwise),
            "sweep": report,
        }));
    }
    Ok(Outcome { results: json!({ "sweeps": reports }), tables: vec![table], assertions, stages: clock.stages })
}

fn asymptotics(config: &ExperimentConfig) -> Result<Outcome, ExperimentError> {
    let mut clock = Stopwatch::new();
    let m = model(&config.model)?;
    let fit = fit_large_asymptotics(&m, &config.grid.u)?;
    clock.lap("fit");
    let direct = assemble_s(&m, config.grid.reference)?;
    clock.lap("reference");
    let mut table = Table::new("asymptotics", &["u", "log_tau_la_re", "log_tau_la_im"]);
    for (u, y) in fit.u_window.iter().zip(&fit.samples) {
        table.push(vec![(*u).into(), y.re.into(), y.im.into()]);
    }
    let tol = &config.tolerances;
    let s_gap = (fit.s_from_a0 - direct.s).norm();
    let assertions = vec![
        Assertion::below("relative error of a2", fit.a2_relative_error(), tol.a2_relative),
        Assertion::below("relative error of a1", fit.a1_relative_error(), tol.a1_relative),
        Assertion::below("|S from a0 - S direct|", s_gap, tol.s_from_a0),
    ];
    let results = json!({
        "a0": tagged_error("a0", fit.a0, fit.std_errors[0]),
        "a1": tagged_error("a1", fit.a1, fit.std_errors[1]),
        "a2": tagged_error("a2", fit.a2, fit.std_errors[2]),
        "expected_a1": tagged("a1_quadrature", fit.expected_a1),
        "expected_a2": tagged_real("a2_expected", fit.expected_a2),
        "S_from_a0": tagged("S", fit.s_from_a0),
        "S_direct": tagged("S", direct.s),
        "upper_half_stable": fit.upper_half_stable(),
        "fit": fit,
    });
    Ok(Outcome { results, tables: vec![table], assertions, stages: clock.stages })
}

/// A random one-dimensional symbol with `F > 0`.
fn random_symbol(rng: &mut ChaCha8Rng) -> LocalSymbol<f64> {
    let mut c = || Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    let drift = CMat::from_element(1, 1, c());
    let coupling = CMat::from_element(1, 1, c());
    LocalSymbol {
        inv_metric: rng.gen_range(0.25..4.0),
        inv_metric_dx: rng.gen_range(-1.0..1.0),
        potential: rng.gen_range(0.05..4.0),
        potential_dx: rng.gen_range(-1.0..1.0),
        drift,
        coupling,
    }
}

fn density(config: &ExperimentConfig) -> Result<Outcome, ExperimentError> {
    let mut clock = Stopwatch::new();
    let mut rng = ChaCha8Rng::seed_from_u64(config.density.seed);
    let mut table = Table::new(
        "density",
        &["symbol", "u", "inv_metric", "potential", "coupling_re", "coupling_im", "value_re", "value_im", "reflected_re", "reflected_im", "closed_form_re", "closed_form_im"],
    );
    let mut worst_antisymmetry = 0.0f64;
    let mut worst_homogeneity = 0.0f64;
    let mut worst_closed = 0.0f64;
    let mut entries = Vec::new();
    for k in 0..config.density.symbols {
        let s = random_symbol(&mut rng);
        let mut reflected = s.clone();
        reflected.coupling = reflected.coupling.map(|z| -z);
        let base = bfk_density_1d(&s)?;
        let closed = base.closed_form();
        worst_closed = worst_closed.max((base.value - closed).norm() / closed.norm().max(1e-300));
        for &u in &config.grid.u {
            let v = density_integral(&s, u)?.value;
            let w = density_integral(&reflected, u)?.value;
            worst_antisymmetry = worst_antisymmetry.max((v + w).norm());
            worst_homogeneity = worst_homogeneity.max((v - base.value).norm());
            table.push(vec![
                k.into(),
                u.into(),
                s.inv_metric.into(),
                s.potential.into(),
                s.coupling[(0, 0)].re.into(),
                s.coupling[(0, 0)].im.into(),
                v.re.into(),
                v.im.into(),
                w.re.into(),
                w.im.into(),
                closed.re.into(),
                closed.im.into(),
            ]);
        }
        entries.push(json!({ "symbol": k, "density": tagged_error("a_LF", base.value, base.error), "closed_form": tagged("a_LF_closed_form", closed) }));
    }
    clock.lap("quadrature");
    let tol = config.tolerances.density;
    let assertions = vec![
        Assertion::below("max |a_L + a_-L|", worst_antisymmetry, tol),
        Assertion::below("max change of the density with u", worst_homogeneity, tol),
    ];
    let results = json!({
        "symbols": entries,
        "max_antisymmetry": tagged_real("a_L_plus_a_minus_L", worst_antisymmetry),
        "max_homogeneity": worst_homogeneity,
        "max_closed_form_relative": worst_closed,
    });
    Ok(Outcome { results, tables: vec![table], assertions, stages: clock.stages })
}

fn relative(config: &ExperimentConfig) -> Result<Outcome, ExperimentError> {
    let mut clock = Stopwatch::new();
    let b = config.model_b.as_ref().expect("model_b is filled in when the config loads");
    let study = reflection_study::<f64>(&config.model, b, &config.grid.u)?;
    clock.lap("large torsions");
    let odd = &study.antisymmetry;
    let ratio = &study.ratio;
    let mut table = Table::new("relative", &["u", "difference_re", "difference_im", "reflected_re", "reflected_im", "product_re", "product_im"]);
    for (k, &u) in ratio.u_grid.iter().enumerate() {
        let (f, r, p) = (odd.forward.samples[k], odd.reflected.samples[k], ratio.samples[k]);
        table.push(vec![u.into(), f.re.into(), f.im.into(), r.re.into(), r.im.into(), p.re.into(), p.im.into()]);
    }
    let tol = &config.tolerances;
    let assertions = vec![
        Assertion::below("|FT| of a system against itself", study.identical.fit_route.norm(), tol.identical_ft),
        Assertion::holds(
            "FT(f) + FT(-f) within the fit error bars",
            odd.holds(),
            format!("|sum| = {:.3e} vs {:.3e}", odd.sum.norm(), odd.error),
        ),
        Assertion::below("|S²_A/S²_B - 1| from the ratio test", (ratio.ratio - 1.0).norm(), tol.ratio),
        Assertion::holds(
            "fit and density routes agree within their error bars",
            odd.forward.routes_agree(),
            format!("difference {:.3e}", odd.forward.difference),
        ),
    ];
    let results = json!({
        "free_term_fit": tagged_error("FT", odd.forward.fit_route, odd.forward.fit_error),
        "free_term_density": tagged_error("FT_density", odd.forward.density_route, odd.forward.density_error),
        "free_term_reflected": tagged_error("FT", odd.reflected.fit_route, odd.reflected.fit_error),
        "reflection_sum": tagged_error("FT_sum", odd.sum, odd.error),
        "identical": tagged_error("FT", study.identical.fit_route, study.identical.fit_error),
        "ratio": tagged_error("S2_ratio", ratio.ratio, ratio.constant_err),
        "beta_hat": tagged("beta", ratio.beta_hat),
        "study": study,
    });
    Ok(Outcome { results, tables: vec![table], assertions, stages: clock.stages })
}

fn sign_root(config: &ExperimentConfig) -> Result<Outcome, ExperimentError> {
    let mut clock = Stopwatch::new();
    let plus = model(&config.model)?;
    let minus = model(&config.model.clone().reversed())?;
    let mut table = Table::new("sign_root", &["u", "root_re", "root_im", "reflected_re", "reflected_im", "product_re", "product_im"]);
    let mut rows = Vec::new();
    let mut assertions = Vec::new();
    for &u in &config.grid.u {
        let a = assemble_s(&plus, u)?;
        let b = assemble_s(&minus, u)?;
        clock.lap(&format!("u={u}"));
        let product = a.s_root * b.s_root;
        table.push(vec![u.into(), a.s_root.re.into(), a.s_root.im.into(), b.s_root.re.into(), b.s_root.im.into(), product.re.into(), product.im.into()]);
        assertions.push(Assertion::below(&format!("|S'(f)S'(-f) - 1| at u = {u}"), (product - 1.0).norm(), config.tolerances.sign_root));
        rows.push(json!({
            "u": u,
            "root": tagged("S_root", a.s_root),
            "root_reflected": tagged("S_root", b.s_root),
            "product": tagged("S_root_product", product),
        }));
    }
    Ok(Outcome { results: json!({ "rows": rows }), tables: vec![table], assertions, stages: clock.stages })
}
