//! Discrete twisted de Rham complexes on the circle.
//!
//! Sections are stored as `N·r` vectors with index `j·r + c` (grid point `j`, frame
//! component `c`). The connection is the constant form `a`, so grid functions are periodic.

use num_traits::Zero;

use super::circle::CircleModel;
use super::config::Scheme;
use super::ModelError;
use crate::linalg::{self, matmul, CMat};
use crate::scalar::{cr, Real, C};

/// Samples of the geometric fields at a set of grid points.
#[derive(Debug, Clone)]
pub struct FieldSamples<T: Real> {
    pub points: Vec<T>,
    pub metric: Vec<T>,
    pub bilinear: Vec<CMat<T>>,
    /// `f′`
    pub slope: Vec<T>,
    /// `f`
    pub height: Vec<T>,
}

impl<T: Real> FieldSamples<T> {
    pub fn from_model(model: &CircleModel<T>, points: Vec<T>) -> Self {
        let metric = points.iter().map(|&x| model.metric(x).0).collect();
        let bilinear = points.iter().map(|&x| model.bilinear(x)).collect();
        let slope = points.iter().map(|&x| model.morse().d1(x)).collect();
        let height = points.iter().map(|&x| model.morse().value(x)).collect();
        Self { points, metric, bilinear, slope, height }
    }
}

/// Block-diagonal matrix with `r×r` blocks.
#[derive(Debug, Clone)]
pub struct BlockDiagonal<T: Real> {
    pub blocks: Vec<CMat<T>>,
}

impl<T: Real> BlockDiagonal<T> {
    pub fn rank(&self) -> usize {
        self.blocks.first().map_or(0, |b| b.nrows())
    }

    pub fn dim(&self) -> usize {
        self.blocks.len() * self.rank()
    }

    pub fn dense(&self) -> CMat<T> {
        linalg::block_diag(&self.blocks)
    }

    pub fn inverse(&self) -> Result<Self, ModelError> {
        Ok(Self { blocks: self.blocks.iter().map(linalg::inverse).collect::<Result<_, _>>()? })
    }

    pub fn map_blocks(&self, f: impl Fn(&CMat<T>) -> CMat<T>) -> Self {
        Self { blocks: self.blocks.iter().map(f).collect() }
    }

    /// `B · X`
    pub fn left_mul(&self, x: &CMat<T>) -> CMat<T> {
        let r = self.rank();
        if r == 1 {
            let mut out = x.clone();
            for (j, b) in self.blocks.iter().enumerate() {
                linalg::scale_rows(&mut out, j, 1, b[(0, 0)]);
            }
            return out;
        }
        let mut out = CMat::zeros(x.nrows(), x.ncols());
        for (j, b) in self.blocks.iter().enumerate() {
            let rows = x.rows(j * r, r).into_owned();
            out.rows_mut(j * r, r).copy_from(&(b * rows));
        }
        out
    }

    /// `X · B`
    pub fn right_mul(&self, x: &CMat<T>) -> CMat<T> {
        let r = self.rank();
        if r == 1 {
            let mut out = x.clone();
            for (j, b) in self.blocks.iter().enumerate() {
                linalg::scale_columns(&mut out, j, 1, b[(0, 0)]);
            }
            return out;
        }
        let mut out = CMat::zeros(x.nrows(), x.ncols());
        for (j, b) in self.blocks.iter().enumerate() {
            let cols = x.columns(j * r, r).into_owned();
            out.columns_mut(j * r, r).copy_from(&(cols * b));
        }
        out
    }

    /// `vᵀ B w` for column vectors.
    pub fn pair(&self, v: &CMat<T>, w: &CMat<T>) -> CMat<T> {
        v.transpose() * self.left_mul(w)
    }
}

/// Fourier differentiation matrix on `n` (odd) equispaced points of a circle of length `ell`.
pub fn fourier_derivative<T: Real>(n: usize, ell: T) -> CMat<T> {
    let scale = T::TAU() / ell;
    let nf = T::from_usize(n).unwrap();
    CMat::from_fn(n, n, |i, j| {
        if i == j {
            return C::zero();
        }
        let k = i as i64 - j as i64;
        let sign = if k.rem_euclid(2) == 0 { T::one() } else { -T::one() };
        let arg = T::from_i64(k).unwrap() * T::PI() / nf;
        cr(scale * sign / (T::lit(2.0) * arg.sin()))
    })
}

/// Discretized `(Ω⁰ → Ω¹, β)` with the Witten deformation parameter `u`.
#[derive(Debug, Clone)]
pub struct DiscreteDeRham<T: Real> {
    pub scheme: Scheme,
    pub n: usize,
    pub rank: usize,
    pub circumference: T,
    pub u: T,
    /// Sample data at the points carrying 0-forms and 1-forms.
    pub fields: [FieldSamples<T>; 2],
    /// Undeformed `d`.
    pub d: CMat<T>,
    /// `df ∧ ·`
    pub wedge: CMat<T>,
    pub mass: [BlockDiagonal<T>; 2],
    mass_inv: [BlockDiagonal<T>; 2],
}

impl<T: Real> DiscreteDeRham<T> {
    /// Discretizes the model at its configured scheme and resolution and checks `u` is resolved.
    pub fn new(model: &CircleModel<T>, u: T) -> Result<Self, ModelError> {
        let n = model.resolution();
        let ell = model.circumference();
        let h = ell / T::from_usize(n).unwrap();
        let nodes: Vec<T> = (0..n).map(|j| h * T::from_usize(j).unwrap()).collect();
        let zero = FieldSamples::from_model(model, nodes.clone());
        let one = match model.scheme() {
            Scheme::Fourier => zero.clone(),
            Scheme::FiniteDifference => FieldSamples::from_model(model, nodes.iter().map(|&x| x + h / T::lit(2.0)).collect()),
        };
        let out = Self::from_samples(model.scheme(), ell, model.connection(), zero, one)?.deformed(u);
        out.check_resolution(model)?;
        Ok(out)
    }

    /// Builds the complex from raw samples; `a` is the constant connection form.
    pub fn from_samples(scheme: Scheme, ell: T, a: &CMat<T>, zero: FieldSamples<T>, one: FieldSamples<T>) -> Result<Self, ModelError> {
        let n = zero.points.len();
        let r = a.nrows();
        let h = ell / T::from_usize(n).unwrap();
        let nr = n * r;
        let (d, wedge) = match scheme {
            Scheme::Fourier => {
                if n % 2 == 0 {
                    return Err(ModelError::Config { field: "discretization.n".into(), message: "Fourier scheme needs odd N".into() });
                }
                let dm = fourier_derivative(n, ell);
                let mut d = CMat::zeros(nr, nr);
                let mut wedge = CMat::zeros(nr, nr);
                for i in 0..n {
                    for j in 0..n {
                        if dm[(i, j)] != C::zero() {
                            for c in 0..r {
                                d[(i * r + c, j * r + c)] = dm[(i, j)];
                            }
                        }
                    }
                    linalg::add_block(&mut d, (i * r, i * r), a);
                    for c in 0..r {
                        wedge[(i * r + c, i * r + c)] = cr(zero.slope[i]);
                    }
                }
                (d, wedge)
            }
            Scheme::FiniteDifference => {
                let mut d = CMat::zeros(nr, nr);
                let mut wedge = CMat::zeros(nr, nr);
                let inv_h = cr(T::one() / h);
                let half = T::lit(0.5);
                for j in 0..n {
                    let k = (j + 1) % n;
                    for c in 0..r {
                        d[(j * r + c, k * r + c)] += inv_h;
                        d[(j * r + c, j * r + c)] -= inv_h;
                        wedge[(j * r + c, j * r + c)] += cr(half * one.slope[j]);
                        wedge[(j * r + c, k * r + c)] += cr(half * one.slope[j]);
                    }
                    let ah = a.map(|z| z * half);
                    linalg::add_block(&mut d, (j * r, j * r), &ah);
                    linalg::add_block(&mut d, (j * r, k * r), &ah);
                }
                (d, wedge)
            }
        };
        let m0 = BlockDiagonal { blocks: zero.bilinear.iter().zip(&zero.metric).map(|(b, &g)| b.map(|z| z * (h * g.sqrt()))).collect() };
        let m1 = BlockDiagonal { blocks: one.bilinear.iter().zip(&one.metric).map(|(b, &g)| b.map(|z| z * (h / g.sqrt()))).collect() };
        let mass_inv = [m0.inverse()?, m1.inverse()?];
        Ok(Self { scheme, n, rank: r, circumference: ell, u: T::zero(), fields: [zero, one], d, wedge, mass: [m0, m1], mass_inv })
    }

    /// Same complex at deformation parameter `u`.
    pub fn deformed(mut self, u: T) -> Self {
        self.u = u;
        self
    }

    pub fn dim(&self) -> usize {
        self.n * self.rank
    }

    pub fn spacing(&self) -> T {
        self.circumference / T::from_usize(self.n).unwrap()
    }

    /// `d_u = d + u df∧`
    pub fn differential(&self) -> CMat<T> {
        self.differential_at(self.u)
    }

    pub fn differential_at(&self, u: T) -> CMat<T> {
        &self.d + self.wedge.map(|z| z * u)
    }

    /// `M₀⁻¹ Xᵀ M₁` for an operator `X: Ω⁰ → Ω¹`.
    pub fn sharp_of(&self, x: &CMat<T>) -> CMat<T> {
        self.mass_inv[0].left_mul(&self.mass[1].right_mul(&x.transpose()))
    }

    /// `(Δ₀, Δ₁) = (d♯d, dd♯)` at the stored `u`.
    pub fn laplacians(&self) -> [CMat<T>; 2] {
        let d = self.differential();
        let s = self.sharp_of(&d);
        [matmul(&s, &d), matmul(&d, &s)]
    }

    pub fn mass_inverse(&self, q: usize) -> &BlockDiagonal<T> {
        &self.mass_inv[q]
    }

    /// Samples a section of degree `q` given by `v(x) ∈ ℂ^r`.
    pub fn sample(&self, q: usize, v: impl Fn(T) -> Vec<C<T>>) -> CMat<T> {
        let r = self.rank;
        let mut out = CMat::zeros(self.dim(), 1);
        for (j, &x) in self.fields[q].points.iter().enumerate() {
            for (c, z) in v(x).into_iter().enumerate().take(r) {
                out[(j * r + c, 0)] = z;
            }
        }
        out
    }

    /// Multiplication by `e^{s·f}` on degree `q`, shifted by `e^{−s·shift}`.
    pub fn exp_height(&self, q: usize, s: T, shift: T) -> Vec<T> {
        self.fields[q].height.iter().map(|&f| (s * (f - shift)).exp()).collect()
    }

    /// Relative residual of `d_u = e^{−uf} d e^{uf}` on the given test sections.
    pub fn gauge_residual(&self, tests: &[CMat<T>]) -> T {
        let du = self.differential();
        let fmax = self.fields[0].height.iter().fold(T::neg_infinity(), |m, &v| m.max(v));
        let up = self.exp_height(0, self.u, fmax);
        let down = self.exp_height(1, -self.u, fmax);
        let r = self.rank;
        let mut worst = T::zero();
        for v in tests {
            let mut w = v.clone();
            for (j, &e) in up.iter().enumerate() {
                linalg::scale_rows(&mut w, j * r, r, cr(e));
            }
            let mut lhs = matmul(&self.d, &w);
            for (j, &e) in down.iter().enumerate() {
                linalg::scale_rows(&mut lhs, j * r, r, cr(e));
            }
            let rhs = matmul(&du, v);
            worst = worst.max(linalg::frobenius(&(lhs - &rhs)) / linalg::frobenius(&rhs));
        }
        worst
    }

    fn check_resolution(&self, model: &CircleModel<T>) -> Result<(), ModelError> {
        let u = self.u;
        let fail = |detail: String| ModelError::ResolutionTooCoarse { u: u.to_f64_lossy(), n: self.n, detail };
        match self.scheme {
            Scheme::Fourier => {
                let f = &self.fields[0].height;
                let fmax = f.iter().fold(T::neg_infinity(), |m, &v| m.max(v));
                let fmin = f.iter().fold(T::infinity(), |m, &v| m.min(v));
                for (s, shift) in [(u, fmax), (-u, fmin)] {
                    let w: Vec<T> = f.iter().map(|&v| (s * (v - shift)).exp()).collect();
                    let tail = spectral_tail(&w);
                    if tail > T::lit(1e-10) {
                        return Err(fail(format!("Fourier tail of e^(±uf) is {:.3e}", tail.to_f64_lossy())));
                    }
                }
            }
            Scheme::FiniteDifference => {
                let curv = self.fields[0].points.iter().fold(T::zero(), |m, &x| m.max(model.morse().d2(x).abs() / model.metric(x).0));
                let ratio = self.spacing() * (u * curv).sqrt();
                if ratio > T::lit(0.5) {
                    return Err(fail(format!("h·√(u·|f″|) = {:.3} exceeds 0.5", ratio.to_f64_lossy())));
                }
            }
        }
        Ok(())
    }

    /// Real interpolation weights reconstructing a degree-`q` section at `x` from its samples.
    pub fn interpolation_weights(&self, q: usize, x: T) -> Vec<T> {
        let pts = &self.fields[q].points;
        let n = self.n;
        match self.scheme {
            Scheme::Fourier => {
                let nf = T::from_usize(n).unwrap();
                let scale = T::TAU() / self.circumference;
                pts.iter()
                    .map(|&p| {
                        let t = scale * (x - p) / T::lit(2.0);
                        let den = nf * t.sin();
                        if den.abs() < T::lit(1e-14) {
                            // limit of the Dirichlet kernel at a node: ±1 depending on the lap
                            (nf * t).cos() / t.cos()
                        } else {
                            (nf * t).sin() / den
                        }
                    })
                    .collect()
            }
            Scheme::FiniteDifference => {
                let h = self.spacing();
                let t = super::morse::modulo(x - pts[0], self.circumference) / h;
                let j = t.floor().to_usize().unwrap_or(0).min(n - 1);
                let frac = t - T::from_usize(j).unwrap();
                let mut w = vec![T::zero(); n];
                w[j] = T::one() - frac;
                w[(j + 1) % n] += frac;
                w
            }
        }
    }
}

/// `max_{|k| > 3N/8} |ĉ_k| / max_k |ĉ_k|` for real samples on an odd grid.
fn spectral_tail<T: Real>(w: &[T]) -> T {
    let n = w.len();
    let nf = T::from_usize(n).unwrap();
    let half = (n - 1) / 2;
    let cutoff = 3 * n / 8;
    let mut head = T::zero();
    let mut tail = T::zero();
    for k in 0..=half {
        let (mut re, mut im) = (T::zero(), T::zero());
        let step = T::TAU() * T::from_usize(k).unwrap() / nf;
        for (j, &v) in w.iter().enumerate() {
            let (s, c) = (step * T::from_usize(j).unwrap()).sin_cos();
            re += v * c;
            im -= v * s;
        }
        let mag = (re * re + im * im).sqrt();
        if k > cutoff {
            tail = tail.max(mag);
        } else {
            head = head.max(mag);
        }
    }
    if head == T::zero() {
        T::zero()
    } else {
        tail / head
    }
}
