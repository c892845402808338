//! Hermitian structures compatible with the bilinear form via Takagi factorization.

use super::circle::CircleModel;
use super::discrete::{BlockDiagonal, DiscreteDeRham};
use super::ModelError;
use crate::linalg::{self, matmul, CMat};
use crate::scalar::{Real, C};

/// `b = AᵀA` with `A = Σ^{1/2} Uᵀ`, `U` unitary and `Σ` the Takagi values.
#[derive(Debug, Clone)]
pub struct TakagiFactor<T: Real> {
    pub factor: CMat<T>,
    pub values: Vec<T>,
}

impl<T: Real> TakagiFactor<T> {
    pub fn new(b: &CMat<T>) -> Result<Self, ModelError> {
        let r = b.nrows();
        let fail = || ModelError::FactorizationFailure { position: f64::NAN };
        // [[Re b, Im b], [Im b, −Re b]] has eigenvalues ±σ_i; the positive eigenvectors (x; y)
        // give Takagi vectors u = x + iy with b·ū = σu.
        let h = nalgebra::DMatrix::<f64>::from_fn(2 * r, 2 * r, |i, j| {
            let z = b[(i % r, j % r)];
            match (i < r, j < r) {
                (true, true) => z.re.to_f64_lossy(),
                (false, false) => -z.re.to_f64_lossy(),
                _ => z.im.to_f64_lossy(),
            }
        });
        if !h.iter().all(|v| v.is_finite()) {
            return Err(fail());
        }
        let eig = nalgebra::SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..2 * r).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
        let top = eig.eigenvalues[order[0]];
        let mut u = CMat::zeros(r, r);
        let mut values = Vec::with_capacity(r);
        for (k, &col) in order.iter().take(r).enumerate() {
            let sigma = eig.eigenvalues[col];
            if !(sigma > 1e-13 * top) {
                return Err(fail());
            }
            values.push(T::lit(sigma));
            for i in 0..r {
                u[(i, k)] = C::new(T::lit(eig.eigenvectors[(i, col)]), T::lit(eig.eigenvectors[(i + r, col)]));
            }
        }
        let factor = CMat::from_fn(r, r, |i, j| u[(j, i)] * values[i].sqrt());
        Ok(Self { factor, values })
    }

    /// Anti-linear involution `v̄ = A⁻¹ conj(A v)`.
    pub fn conjugate(&self, v: &CMat<T>) -> Result<CMat<T>, ModelError> {
        let av = matmul(&self.factor, v).map(|z| z.conj());
        Ok(linalg::solve(&self.factor, &av)?)
    }

    /// Gram matrix `AᴴA` of `⟨e₁, e₂⟩ = b(e₁, ē₂)`.
    pub fn gram(&self) -> CMat<T> {
        linalg::matmul_hn(&self.factor, &self.factor)
    }
}

/// Pointwise Takagi factors and the assembled `L²` Hermitian product on the discrete forms.
#[derive(Debug, Clone)]
pub struct HermitianStructure<T: Real> {
    pub factors: [Vec<TakagiFactor<T>>; 2],
    /// Gram blocks of `⟪·,·⟫` per degree.
    pub gram: [BlockDiagonal<T>; 2],
    /// `W` with `WᴴW` equal to the Gram matrix.
    pub root: [BlockDiagonal<T>; 2],
}

pub fn compatible_hermitian<T: Real>(discrete: &DiscreteDeRham<T>) -> Result<HermitianStructure<T>, ModelError> {
    let h = discrete.spacing();
    let mut factors: [Vec<TakagiFactor<T>>; 2] = [Vec::new(), Vec::new()];
    let mut gram: [Vec<CMat<T>>; 2] = [Vec::new(), Vec::new()];
    let mut root: [Vec<CMat<T>>; 2] = [Vec::new(), Vec::new()];
    for q in 0..2 {
        let f = &discrete.fields[q];
        for ((b, &g), &x) in f.bilinear.iter().zip(&f.metric).zip(&f.points) {
            let t = TakagiFactor::new(b).map_err(|_| ModelError::FactorizationFailure { position: x.to_f64_lossy() })?;
            let w = if q == 0 { h * g.sqrt() } else { h / g.sqrt() };
            gram[q].push(t.gram().map(|z| z * w));
            root[q].push(t.factor.map(|z| z * w.sqrt()));
            factors[q].push(t);
        }
    }
    let [g0, g1] = gram;
    let [r0, r1] = root;
    Ok(HermitianStructure {
        factors,
        gram: [BlockDiagonal { blocks: g0 }, BlockDiagonal { blocks: g1 }],
        root: [BlockDiagonal { blocks: r0 }, BlockDiagonal { blocks: r1 }],
    })
}

impl<T: Real> HermitianStructure<T> {
    /// `⟪v, w⟫ = wᴴ G v` for column blocks.
    pub fn inner(&self, q: usize, v: &CMat<T>, w: &CMat<T>) -> CMat<T> {
        linalg::matmul_hn(w, &self.gram[q].left_mul(v))
    }

    pub fn norm(&self, q: usize, v: &CMat<T>) -> T {
        linalg::frobenius(&self.root[q].left_mul(v))
    }
}

/// Hermitian structure at an arbitrary point of the model.
pub fn takagi_at<T: Real>(model: &CircleModel<T>, x: T) -> Result<TakagiFactor<T>, ModelError> {
    TakagiFactor::new(&model.bilinear(x)).map_err(|_| ModelError::FactorizationFailure { position: x.to_f64_lossy() })
}
