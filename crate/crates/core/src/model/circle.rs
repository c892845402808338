//! The circle model: geometry, flat bundle, bilinear field, metric and Morse data.

use num_traits::Zero;

use super::config::{MetricKind, ModelConfig, MorsePreset, Scheme};
use super::morse::{morse_balls, unstable_arcs, wrap_offset, Ball, CriticalPoint, MorseFunction, UnstableArc};
use super::trig::TrigSeries;
use super::ModelError;
use crate::linalg::{self, matmul, matmul_tn, CMat};
use crate::quadrature::gauss_legendre;
use crate::scalar::{log_principal, Real, C};

const CLOCK_PANELS: usize = 2048;

/// Residuals of the local normal-form hypotheses on the Morse balls.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    /// `max |f − (f(x) ± s²/2)|` with `s` the metric arc length from the critical point.
    pub chart_residual: f64,
    /// `max |dφ/ds − 1|` for the Morse coordinate `φ`.
    pub metric_residual: f64,
    /// `max ‖∇b‖/‖b‖`.
    pub parallel_residual: f64,
    pub warnings: Vec<String>,
}

/// Critical points, gradient arcs and the flat transports along them.
#[derive(Debug, Clone)]
pub struct MorseData<T: Real> {
    pub critical: Vec<CriticalPoint<T>>,
    /// Indices into `critical` of the minima, in position order.
    pub minima: Vec<usize>,
    /// Indices into `critical` of the maxima, in position order.
    pub maxima: Vec<usize>,
    pub arcs: Vec<UnstableArc<T>>,
    /// Parallel transport from the minimum back to the maximum along each arc.
    pub transports: Vec<CMat<T>>,
}

impl<T: Real> MorseData<T> {
    /// Number of critical points of index `q`.
    pub fn count(&self, q: usize) -> usize {
        if q == 0 {
            self.minima.len()
        } else {
            self.maxima.len()
        }
    }
}

#[derive(Debug, Clone)]
pub struct CircleModel<T: Real> {
    config: ModelConfig,
    circumference: T,
    rank: usize,
    rho: T,
    holonomy: CMat<T>,
    connection: CMat<T>,
    connection_eigen: (Vec<C<T>>, CMat<T>, CMat<T>),
    morse: MorseFunction<T>,
    metric_kind: MetricKind,
    base_metric: TrigSeries<T>,
    base_form: CMat<T>,
    psi: TrigSeries<T>,
    psi_at_center: Vec<C<T>>,
    critical: Vec<CriticalPoint<T>>,
    balls: Vec<Ball<T>>,
    arcs: Vec<UnstableArc<T>>,
    clock_table: Vec<T>,
    gl: (Vec<T>, Vec<T>),
    report: ValidationReport,
}

fn config_error(field: &str, message: impl Into<String>) -> ModelError {
    ModelError::Config { field: field.into(), message: message.into() }
}

fn to_cmat<T: Real>(rows: &[Vec<num_complex::Complex64>]) -> CMat<T> {
    let r = rows.len();
    CMat::from_fn(r, r, |i, j| C::new(T::lit(rows[i][j].re), T::lit(rows[i][j].im)))
}

/// Builds the model and checks the normal-form hypotheses.
pub fn build_and_validate<T: Real>(config: &ModelConfig) -> Result<(CircleModel<T>, MorseData<T>), ModelError> {
    let model = CircleModel::new(config)?;
    let data = model.morse_data();
    Ok((model, data))
}

impl<T: Real> CircleModel<T> {
    pub fn new(config: &ModelConfig) -> Result<Self, ModelError> {
        let geo = &config.geometry;
        if !(geo.circumference > 0.0 && geo.circumference.is_finite()) {
            return Err(config_error("geometry.circumference", "must be positive"));
        }
        let ell = T::lit(geo.circumference);
        let rank = config.bundle.rank;
        if rank == 0 {
            return Err(config_error("bundle.rank", "must be at least 1"));
        }
        if !(config.morse.rho > 0.0) {
            return Err(config_error("morse.rho", "must be positive"));
        }
        if config.morse.sign != 1 && config.morse.sign != -1 {
            return Err(config_error("morse.sign", "must be +1 or -1"));
        }
        if config.discretization.n < 64 {
            return Err(config_error("discretization.n", "resolution must be at least 64"));
        }
        let holonomy: CMat<T> = to_cmat(&config.bundle.holonomy.parse("bundle.holonomy", rank)?);
        let det = linalg::det(&holonomy)?;
        if !(det.norm() > T::lit(1e-12) * linalg::max_abs(&holonomy).powi(rank as i32)) {
            return Err(config_error("bundle.holonomy", "holonomy must be invertible"));
        }
        let connection_eigen = connection_from_holonomy(&holonomy, ell)?;
        let connection = {
            let (nu, v, vinv) = &connection_eigen;
            matmul(&matmul(v, &CMat::from_diagonal(&nalgebra::DVector::from_vec(nu.clone()))), vinv)
        };

        let base_form: CMat<T> = to_cmat(&config.bilinear.base.parse("bilinear.base", rank)?);
        if linalg::asymmetry(&base_form) > T::lit(1e-12) {
            return Err(config_error("bilinear.base", "must be symmetric"));
        }
        let sv = linalg::singular_values(&base_form)?;
        if sv.last().copied().unwrap_or(T::zero()) <= T::lit(1e-12) * sv[0] {
            return Err(config_error("bilinear.base", "must be non-degenerate"));
        }
        let parse_list = |field: &str, list: &[String]| -> Result<Vec<C<T>>, ModelError> {
            list.iter()
                .map(|s| super::config::parse_complex(field, s).map(|z| C::new(T::lit(z.re), T::lit(z.im))))
                .collect()
        };
        let psi = TrigSeries::new(
            ell,
            C::zero(),
            parse_list("bilinear.psi_cos", &config.bilinear.psi_cos)?,
            parse_list("bilinear.psi_sin", &config.bilinear.psi_sin)?,
        );

        let lit = |v: &[f64]| v.iter().map(|&x| T::lit(x)).collect::<Vec<_>>();
        let base_metric = TrigSeries::real(ell, T::one(), &lit(&geo.metric_cos), &lit(&geo.metric_sin));
        for j in 0..4096 {
            let x = ell * T::from_usize(j).unwrap() / T::lit(4096.0);
            if base_metric.real_derivative(x, 0) <= T::zero() {
                return Err(config_error("geometry.metric_cos", "base metric must be positive"));
            }
        }

        let m = &config.morse;
        let sign = T::from_i32(m.sign).unwrap();
        let unit = (ell / T::TAU()).powi(2);
        let series = match m.preset {
            MorsePreset::Cos => TrigSeries::real(ell, T::zero(), &[unit], &[]),
            MorsePreset::Cos2k => {
                if m.k == 0 {
                    return Err(config_error("morse.k", "must be at least 1"));
                }
                let mut c = vec![T::zero(); 2 * m.k];
                c[2 * m.k - 1] = unit / T::from_usize(4 * m.k * m.k).unwrap();
                TrigSeries::real(ell, T::zero(), &c, &[])
            }
            MorsePreset::Fourier => TrigSeries::real(ell, T::zero(), &lit(&m.cos), &lit(&m.sin)),
        }
        .scaled(sign);
        let morse = MorseFunction::new(series, ell);
        let critical = morse.critical_points()?;
        if critical.len() < 2 {
            return Err(ModelError::NoCriticalPoints);
        }
        let rho = T::lit(m.rho);
        let balls = morse_balls(&morse, &critical, rho, ell)?;
        let arcs = unstable_arcs(&critical, ell);
        let psi_at_center = critical.iter().map(|c| psi.value(c.position)).collect();

        let mut model = Self {
            config: config.clone(),
            circumference: ell,
            rank,
            rho,
            holonomy,
            connection,
            connection_eigen,
            morse,
            metric_kind: geo.metric,
            base_metric,
            base_form,
            psi,
            psi_at_center,
            critical,
            balls,
            arcs,
            clock_table: Vec::new(),
            gl: gauss_legendre(20),
            report: ValidationReport::default(),
        };
        model.clock_table = model.build_clock_table();
        model.report = model.validate()?;
        Ok(model)
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn circumference(&self) -> T {
        self.circumference
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn rho(&self) -> T {
        self.rho
    }

    pub fn holonomy(&self) -> &CMat<T> {
        &self.holonomy
    }

    /// Constant connection form `a` with `∇ = d + a dx` and holonomy `e^{−aℓ}`.
    pub fn connection(&self) -> &CMat<T> {
        &self.connection
    }

    pub fn scheme(&self) -> Scheme {
        self.config.discretization.scheme
    }

    /// Configured resolution, bumped to the next odd number.
    pub fn resolution(&self) -> usize {
        self.config.discretization.n | 1
    }

    pub fn morse(&self) -> &MorseFunction<T> {
        &self.morse
    }

    pub fn critical_points(&self) -> &[CriticalPoint<T>] {
        &self.critical
    }

    pub fn balls(&self) -> &[Ball<T>] {
        &self.balls
    }

    pub fn report(&self) -> &ValidationReport {
        &self.report
    }

    pub fn morse_data(&self) -> MorseData<T> {
        let minima = (0..self.critical.len()).filter(|&i| self.critical[i].index == 0).collect();
        let maxima = (0..self.critical.len()).filter(|&i| self.critical[i].index == 1).collect();
        let transports = self.arcs.iter().map(|a| self.transport(a.displacement)).collect();
        MorseData { critical: self.critical.clone(), minima, maxima, arcs: self.arcs.clone(), transports }
    }

    /// `χ = Σ_c χ_c` and its derivative.
    pub fn cutoff_total(&self, x: T) -> (T, T) {
        self.balls.iter().fold((T::zero(), T::zero()), |(a, b), ball| {
            let (v, d) = ball.cutoff(x, self.circumference);
            (a + v, b + d)
        })
    }

    /// Metric `g` (squared length of `∂_x`) and its derivative.
    pub fn metric(&self, x: T) -> (T, T) {
        let gb = self.base_metric.real_derivative(x, 0);
        let gb1 = self.base_metric.real_derivative(x, 1);
        if self.metric_kind == MetricKind::Base {
            return (gb, gb1);
        }
        let (mut g, mut g1) = (gb, gb1);
        for (ball, crit) in self.balls.iter().zip(&self.critical) {
            let (chi, dchi) = ball.cutoff(x, self.circumference);
            if chi == T::zero() && dchi == T::zero() {
                continue;
            }
            let (r, r1) = self.adapted_metric(crit, wrap_offset(x, crit.position, self.circumference));
            g += chi * (r - gb);
            g1 += dchi * (r - gb) + chi * (r1 - gb1);
        }
        (g, g1)
    }

    /// `f′²/(2|f − f(c)|)` at offset `h` from `c`, in divided-difference form, with its derivative.
    fn adapted_metric(&self, c: &CriticalPoint<T>, h: T) -> (T, T) {
        let (nodes, weights) = &self.gl;
        let half = T::lit(0.5);
        let (mut p, mut q, mut p1, mut q1) = (T::zero(), T::zero(), T::zero(), T::zero());
        for (&s, &w) in nodes.iter().zip(weights) {
            let tau = half * (s + T::one());
            let w = w * half;
            let x = c.position + tau * h;
            let f2 = self.morse.d2(x);
            let f3 = self.morse.d3(x);
            p += w * f2;
            q += w * (T::one() - tau) * f2;
            p1 += w * tau * f3;
            q1 += w * tau * (T::one() - tau) * f3;
        }
        let aq = q.abs();
        let sq = q.signum();
        let r = p * p / (T::lit(2.0) * aq);
        let r1 = (T::lit(2.0) * p * p1 * aq - p * p * sq * q1) / (T::lit(2.0) * q * q);
        (r, r1)
    }

    fn build_clock_table(&self) -> Vec<T> {
        let step = self.circumference / T::from_usize(CLOCK_PANELS).unwrap();
        let mut table = Vec::with_capacity(CLOCK_PANELS + 1);
        let mut acc = T::zero();
        table.push(acc);
        for j in 0..CLOCK_PANELS {
            let a = step * T::from_usize(j).unwrap();
            acc += self.free_measure(a, a + step);
            table.push(acc);
        }
        table
    }

    /// `∫_a^b (1 − χ)`
    fn free_measure(&self, a: T, b: T) -> T {
        let (nodes, weights) = &self.gl;
        let half = (b - a) / T::lit(2.0);
        let mid = (a + b) / T::lit(2.0);
        nodes.iter().zip(weights).fold(T::zero(), |acc, (&s, &w)| acc + w * half * (T::one() - self.cutoff_total(mid + half * s).0))
    }

    /// Density `κ ≥ 0` of the holonomy-carrying part of the clock; vanishes on the balls, `∫κ = ℓ`.
    pub fn clock_density(&self, x: T) -> T {
        let total = self.clock_table[CLOCK_PANELS];
        self.circumference * (T::one() - self.cutoff_total(x).0) / total
    }

    /// `θ(x) = x − ∫₀ˣ κ`, periodic with `θ′ = 1 − κ`.
    pub fn clock(&self, x: T) -> T {
        let ell = self.circumference;
        let x = super::morse::modulo(x, ell);
        let step = ell / T::from_usize(CLOCK_PANELS).unwrap();
        let j = (x / step).floor().to_usize().unwrap_or(0).min(CLOCK_PANELS - 1);
        let a = step * T::from_usize(j).unwrap();
        let partial = self.clock_table[j] + self.free_measure(a, x);
        x - ell * partial / self.clock_table[CLOCK_PANELS]
    }

    /// `e^{t a}` through the eigendecomposition of `a`.
    pub fn transport(&self, t: T) -> CMat<T> {
        let (nu, v, vinv) = &self.connection_eigen;
        let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(nu.len(), nu.iter().map(|&z| (z * t).exp())));
        matmul(&matmul(v, &d), vinv)
    }

    /// `ψ` with its value frozen on each ball, and its derivative.
    pub fn psi_effective(&self, x: T) -> (C<T>, C<T>) {
        let psi = self.psi.value(x);
        let dpsi = self.psi.derivative(x, 1);
        let (mut v, mut d) = (psi, dpsi);
        for (ball, &pc) in self.balls.iter().zip(&self.psi_at_center) {
            let (chi, dchi) = ball.cutoff(x, self.circumference);
            v -= (psi - pc) * chi;
            d -= (psi - pc) * dchi + dpsi * chi;
        }
        (v, d)
    }

    /// The bilinear form `b(x) = e^{θaᵀ} e^{ψ} B₀ e^{θa}`.
    pub fn bilinear(&self, x: T) -> CMat<T> {
        let e = self.transport(self.clock(x));
        let (psi, _) = self.psi_effective(x);
        matmul_tn(&e, &matmul(&self.base_form, &e)).map(|z| z * psi.exp())
    }

    /// `b′ = θ′(aᵀb + ba) + ψ′ b`
    pub fn bilinear_derivative(&self, x: T) -> CMat<T> {
        let b = self.bilinear(x);
        let theta1 = T::one() - self.clock_density(x);
        let (_, dpsi) = self.psi_effective(x);
        let a = &self.connection;
        let sym = matmul_tn(a, &b) + matmul(&b, a);
        sym.map(|z| z * theta1) + b.map(|z| z * dpsi)
    }

    /// Kamber–Tondeur density `ω = tr a − ½ tr(b⁻¹b′) = κ tr a − (r/2) ψ′`.
    pub fn kamber_tondeur_density(&self, x: T) -> C<T> {
        let tr = self.connection.trace();
        let (_, dpsi) = self.psi_effective(x);
        tr * self.clock_density(x) - dpsi * (T::from_usize(self.rank).unwrap() / T::lit(2.0))
    }

    fn validate(&self) -> Result<ValidationReport, ModelError> {
        let (nodes, weights) = &self.gl;
        let mut report = ValidationReport::default();
        let mut worst_chart = (T::zero(), T::zero());
        let mut metric_res = T::zero();
        let mut parallel_res = T::zero();
        for (ball, crit) in self.balls.iter().zip(&self.critical) {
            let dir = if crit.index == 0 { T::one() } else { -T::one() };
            for (side, reach) in [(T::one(), ball.right), (-T::one(), ball.left)] {
                for k in 1..=24 {
                    let t = side * reach * T::from_usize(k).unwrap() / T::lit(24.0);
                    // arc length from the critical point
                    let half = t / T::lit(2.0);
                    let s = nodes.iter().zip(weights).fold(T::zero(), |acc, (&z, &w)| {
                        acc + w * half * self.metric(crit.position + half + half * z).0.sqrt()
                    });
                    let model_value = crit.value + dir * s * s / T::lit(2.0);
                    let res = (self.morse.value(crit.position + t) - model_value).abs();
                    if res > worst_chart.0 {
                        worst_chart = (res, crit.position);
                    }
                    let dphi = self.morse.chart_derivative(crit, t);
                    metric_res = metric_res.max((dphi / self.metric(crit.position + t).0.sqrt() - T::one()).abs());
                    let x = crit.position + t;
                    let b = self.bilinear(x);
                    let h = T::lit(1e-5);
                    let fd = (self.bilinear(x + h) - self.bilinear(x - h)).map(|z| z / (h + h));
                    let a = &self.connection;
                    let nabla = fd - matmul_tn(a, &b) - matmul(&b, a);
                    parallel_res = parallel_res.max(linalg::frobenius(&nabla) / linalg::frobenius(&b));
                }
            }
        }
        report.chart_residual = worst_chart.0.to_f64_lossy();
        report.metric_residual = metric_res.to_f64_lossy();
        report.parallel_residual = parallel_res.to_f64_lossy();
        let v = &self.config.validation;
        if report.chart_residual > v.tol_chart {
            return Err(ModelError::ChartViolation { point: worst_chart.1.to_f64_lossy(), residual: report.chart_residual, tol: v.tol_chart });
        }
        for (name, res) in [("metric", report.metric_residual), ("bilinear form", report.parallel_residual)] {
            if res > v.tol_flat {
                if v.strict {
                    return Err(ModelError::NotFlat { quantity: name.into(), residual: res });
                }
                report.warnings.push(format!("{name} is not flat on the Morse balls (residual {res:.3e})"));
            }
        }
        Ok(report)
    }
}

/// `a = −log(Λ)/ℓ` as `(eigenvalues, V, V⁻¹)`.
fn connection_from_holonomy<T: Real>(holonomy: &CMat<T>, ell: T) -> Result<(Vec<C<T>>, CMat<T>, CMat<T>), ModelError> {
    let r = holonomy.nrows();
    let scalar = holonomy[(0, 0)];
    let is_scalar = (0..r).all(|i| (0..r).all(|j| (holonomy[(i, j)] - if i == j { scalar } else { C::zero() }).norm() == T::zero()));
    let (mu, v) = if is_scalar {
        (vec![scalar; r], CMat::identity(r, r))
    } else {
        linalg::eigen_decompose(holonomy)
            .map_err(|_| config_error("bundle.holonomy", "holonomy must be diagonalizable with simple spectrum"))?
    };
    let vinv = linalg::inverse(&v)?;
    let nu = mu.iter().map(|&m| -log_principal(m) / ell).collect();
    Ok((nu, v, vinv))
}
