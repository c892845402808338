//! Dense complex linear algebra: products, LU, log-determinants, SVD, Schur forms.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::scalar::{Real, C};

pub type CMat<T> = DMatrix<C<T>>;
pub type CVec<T> = DVector<C<T>>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LinalgError {
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("eigenvalue iteration did not converge (info {0})")]
    NoConvergence(i32),
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("LAPACK reported info {0}")]
    Backend(i32),
}

pub fn is_finite<T: Real>(a: &CMat<T>) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn frobenius<T: Real>(a: &CMat<T>) -> T {
    a.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
}

pub fn max_abs<T: Real>(a: &CMat<T>) -> T {
    a.iter().fold(T::zero(), |acc, z| acc.max(z.norm()))
}

fn product<T: Real>(ta: u8, tb: u8, a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    let (m, k) = if ta == b'N' { a.shape() } else { (a.ncols(), a.nrows()) };
    let (kb, n) = if tb == b'N' { b.shape() } else { (b.ncols(), b.nrows()) };
    assert_eq!(k, kb, "inner dimensions differ");
    let mut c = CMat::<T>::zeros(m, n);
    if k == 0 {
        return c;
    }
    T::gemm(ta, tb, m, n, k, a.as_slice(), a.nrows(), b.as_slice(), b.nrows(), c.as_mut_slice());
    c
}

/// `a · b`
pub fn matmul<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    product(b'N', b'N', a, b)
}

/// `aᵀ · b` (plain transpose, no conjugation)
pub fn matmul_tn<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    product(b'T', b'N', a, b)
}

/// `aᴴ · b`
pub fn matmul_hn<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    product(b'C', b'N', a, b)
}

/// `a · bᴴ`
pub fn matmul_nh<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    product(b'N', b'C', a, b)
}

/// Log of a determinant, kept as magnitude and an unreduced phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet<T> {
    pub log_abs: T,
    pub phase: T,
}

impl<T: Real> LogDet<T> {
    pub fn zero() -> Self {
        Self { log_abs: T::zero(), phase: T::zero() }
    }

    pub fn from_value(z: C<T>) -> Self {
        Self { log_abs: z.norm().ln(), phase: z.im.atan2(z.re) }
    }

    pub fn as_complex(&self) -> C<T> {
        Complex::new(self.log_abs, self.phase)
    }

    pub fn value(&self) -> C<T> {
        Complex::from_polar(self.log_abs.exp(), self.phase)
    }

    pub fn add(self, o: Self) -> Self {
        Self { log_abs: self.log_abs + o.log_abs, phase: self.phase + o.phase }
    }

    /// `self · k` for an integer exponent.
    pub fn times(self, k: i64) -> Self {
        let kt = T::from_i64(k).expect("small exponent");
        Self { log_abs: self.log_abs * kt, phase: self.phase * kt }
    }
}

/// Pivoted LU factorization.
#[derive(Debug, Clone)]
pub struct Lu<T: Real> {
    n: usize,
    lu: Vec<C<T>>,
    ipiv: Vec<i32>,
}

impl<T: Real> Lu<T> {
    pub fn new(a: &CMat<T>) -> Result<Self, LinalgError> {
        if !a.is_square() {
            return Err(LinalgError::Shape(format!("LU of {}x{}", a.nrows(), a.ncols())));
        }
        if !is_finite(a) {
            return Err(LinalgError::NonFinite);
        }
        let n = a.nrows();
        let mut lu = a.as_slice().to_vec();
        let ipiv = T::getrf(n, &mut lu).map_err(|e| LinalgError::Backend(e.0))?;
        Ok(Self { n, lu, ipiv })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn diag(&self, i: usize) -> C<T> {
        self.lu[i + i * self.n]
    }

    /// Smallest pivot magnitude relative to the largest.
    pub fn pivot_ratio(&self) -> T {
        if self.n == 0 {
            return T::one();
        }
        let (lo, hi) = (0..self.n).map(|i| self.diag(i).norm()).fold((T::infinity(), T::zero()), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
        if hi == T::zero() {
            T::zero()
        } else {
            lo / hi
        }
    }

    pub fn is_singular(&self) -> bool {
        (0..self.n).any(|i| self.diag(i) == C::zero())
    }

    pub fn log_det(&self) -> LogDet<T> {
        let mut acc = LogDet::zero();
        let mut swaps = 0usize;
        for i in 0..self.n {
            acc = acc.add(LogDet::from_value(self.diag(i)));
            if self.ipiv[i] as usize != i + 1 {
                swaps += 1;
            }
        }
        if swaps % 2 == 1 {
            acc.phase = acc.phase + T::PI();
        }
        acc
    }

    pub fn det(&self) -> C<T> {
        if self.is_singular() {
            return C::zero();
        }
        self.log_det().value()
    }

    fn solve_inner(&self, b: &CMat<T>, transpose: bool) -> Result<CMat<T>, LinalgError> {
        if b.nrows() != self.n {
            return Err(LinalgError::Shape("rhs rows".into()));
        }
        if self.is_singular() {
            return Err(LinalgError::Singular);
        }
        let mut x = b.clone();
        T::getrs(self.n, b.ncols(), transpose, &self.lu, &self.ipiv, x.as_mut_slice())
            .map_err(|e| LinalgError::Backend(e.0))?;
        Ok(x)
    }

    /// `A⁻¹ b`
    pub fn solve(&self, b: &CMat<T>) -> Result<CMat<T>, LinalgError> {
        self.solve_inner(b, false)
    }

    /// `A⁻ᵀ b`
    pub fn solve_transpose(&self, b: &CMat<T>) -> Result<CMat<T>, LinalgError> {
        self.solve_inner(b, true)
    }

    pub fn inverse(&self) -> Result<CMat<T>, LinalgError> {
        self.solve(&CMat::identity(self.n, self.n))
    }
}

pub fn inverse<T: Real>(a: &CMat<T>) -> Result<CMat<T>, LinalgError> {
    Lu::new(a)?.inverse()
}

pub fn solve<T: Real>(a: &CMat<T>, b: &CMat<T>) -> Result<CMat<T>, LinalgError> {
    Lu::new(a)?.solve(b)
}

pub fn det<T: Real>(a: &CMat<T>) -> Result<C<T>, LinalgError> {
    if a.nrows() == 0 {
        return Ok(C::one());
    }
    Ok(Lu::new(a)?.det())
}

pub fn log_det<T: Real>(a: &CMat<T>) -> Result<LogDet<T>, LinalgError> {
    let lu = Lu::new(a)?;
    if lu.is_singular() {
        return Err(LinalgError::Singular);
    }
    Ok(lu.log_det())
}

/// Singular values in descending order.
pub fn singular_values<T: Real>(a: &CMat<T>) -> Result<Vec<T>, LinalgError> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(Vec::new());
    }
    if !is_finite(a) {
        return Err(LinalgError::NonFinite);
    }
    T::singular_values(a.nrows(), a.ncols(), a.as_slice().to_vec()).map_err(|e| LinalgError::NoConvergence(e.0))
}

/// Rank with the threshold `rel_tol · σ_max`.
pub fn numerical_rank<T: Real>(a: &CMat<T>, rel_tol: T) -> Result<usize, LinalgError> {
    let s = singular_values(a)?;
    let Some(&top) = s.first() else { return Ok(0) };
    if top == T::zero() {
        return Ok(0);
    }
    Ok(s.iter().filter(|&&v| v > rel_tol * top).count())
}

/// Ascending eigenvalues and orthonormal eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen<T: Real>(a: &CMat<T>) -> Result<(Vec<T>, CMat<T>), LinalgError> {
    let n = a.nrows();
    let mut h = a.clone();
    let w = T::heevd(n, h.as_mut_slice(), true).map_err(|e| LinalgError::NoConvergence(e.0))?;
    Ok((w, h))
}

pub fn hermitian_eigenvalues<T: Real>(a: &CMat<T>) -> Result<Vec<T>, LinalgError> {
    let n = a.nrows();
    let mut h = a.clone();
    T::heevd(n, h.as_mut_slice(), false).map_err(|e| LinalgError::NoConvergence(e.0))
}

/// Total order used for spectra: real part, then imaginary part.
pub fn spectral_order<T: Real>(a: &C<T>, b: &C<T>) -> std::cmp::Ordering {
    a.re.partial_cmp(&b.re).unwrap_or(std::cmp::Ordering::Equal).then(
        a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal),
    )
}

/// Unitary Schur factorization `A = Z T Zᴴ`, `T` upper triangular.
#[derive(Debug, Clone)]
pub struct Schur<T: Real> {
    pub t: CMat<T>,
    pub z: CMat<T>,
}

impl<T: Real> Schur<T> {
    pub fn new(a: &CMat<T>) -> Result<Self, LinalgError> {
        if !a.is_square() {
            return Err(LinalgError::Shape("Schur of non-square matrix".into()));
        }
        if !is_finite(a) {
            return Err(LinalgError::NonFinite);
        }
        let n = a.nrows();
        if n == 0 {
            return Ok(Self { t: a.clone(), z: a.clone() });
        }
        let raw = T::gees(n, a.as_slice().to_vec()).map_err(|e| LinalgError::NoConvergence(e.0))?;
        let mut t = CMat::from_vec(n, n, raw.t);
        // gees leaves garbage-free zeros below the diagonal; enforce exact triangularity.
        for j in 0..n {
            for i in (j + 1)..n {
                t[(i, j)] = C::zero();
            }
        }
        Ok(Self { t, z: CMat::from_vec(n, n, raw.z) })
    }

    pub fn dim(&self) -> usize {
        self.t.nrows()
    }

    /// Diagonal of `T` in its current (factorization) order.
    pub fn diagonal(&self) -> Vec<C<T>> {
        (0..self.dim()).map(|i| self.t[(i, i)]).collect()
    }

    /// Eigenvalues sorted by real part, then imaginary part.
    pub fn eigenvalues_sorted(&self) -> Vec<C<T>> {
        let mut w = self.diagonal();
        w.sort_by(spectral_order);
        w
    }

    /// Moves the selected diagonal entries to the leading block; returns its size.
    pub fn reorder(&mut self, select: &[bool]) -> Result<usize, LinalgError> {
        let n = self.dim();
        if select.len() != n {
            return Err(LinalgError::Shape("selection length".into()));
        }
        T::trsen(n, select, self.t.as_mut_slice(), self.z.as_mut_slice()).map_err(|e| LinalgError::Backend(e.0))?;
        Ok(select.iter().filter(|&&s| s).count())
    }

    /// `‖A − Z T Zᴴ‖_F / ‖A‖_F`
    pub fn residual(&self, a: &CMat<T>) -> T {
        let rec = matmul_nh(&matmul(&self.z, &self.t), &self.z);
        let nrm = frobenius(a);
        let diff = frobenius(&(a - rec));
        if nrm == T::zero() {
            diff
        } else {
            diff / nrm
        }
    }
}

/// Eigendecomposition `A = V diag(w) V⁻¹` for matrices with simple spectrum.
///
/// Eigenvectors of the Schur factor come from triangular back-substitution.
pub fn eigen_decompose<T: Real>(a: &CMat<T>) -> Result<(Vec<C<T>>, CMat<T>), LinalgError> {
    let schur = Schur::new(a)?;
    let n = schur.dim();
    let t = &schur.t;
    let w = schur.diagonal();
    let scale = max_abs(t).max(T::min_positive_value());
    let mut y = CMat::<T>::zeros(n, n);
    for k in 0..n {
        y[(k, k)] = C::one();
        for i in (0..k).rev() {
            let gap = w[k] - w[i];
            if gap.norm() <= T::epsilon().sqrt() * scale {
                return Err(LinalgError::Singular);
            }
            let mut s = C::<T>::zero();
            for j in (i + 1)..=k {
                s += t[(i, j)] * y[(j, k)];
            }
            y[(i, k)] = s / gap;
        }
    }
    Ok((w, matmul(&schur.z, &y)))
}

/// `A[r0.., c0..] += B`
pub fn add_block<T: Real>(a: &mut CMat<T>, (r0, c0): (usize, usize), b: &CMat<T>) {
    for j in 0..b.ncols() {
        for i in 0..b.nrows() {
            a[(r0 + i, c0 + j)] += b[(i, j)];
        }
    }
}

/// Multiplies rows `start..start+len` by `s`.
pub fn scale_rows<T: Real>(a: &mut CMat<T>, start: usize, len: usize, s: C<T>) {
    for j in 0..a.ncols() {
        for i in start..start + len {
            a[(i, j)] *= s;
        }
    }
}

/// Multiplies columns `start..start+len` by `s`.
pub fn scale_columns<T: Real>(a: &mut CMat<T>, start: usize, len: usize, s: C<T>) {
    for j in start..start + len {
        for i in 0..a.nrows() {
            a[(i, j)] *= s;
        }
    }
}

/// Solves `A X − X B = rhs` for upper-triangular `A`, `B` with disjoint spectra.
pub fn sylvester_triangular<T: Real>(a: &CMat<T>, b: &CMat<T>, rhs: &CMat<T>) -> Result<CMat<T>, LinalgError> {
    let (m, n) = rhs.shape();
    if a.shape() != (m, m) || b.shape() != (n, n) {
        return Err(LinalgError::Shape("Sylvester blocks".into()));
    }
    if m == 0 || n == 0 {
        return Ok(rhs.clone());
    }
    let mut x = rhs.clone();
    let scale = T::trsyl(m, n, -1, a.as_slice(), b.as_slice(), x.as_mut_slice()).map_err(|e| LinalgError::Backend(e.0))?;
    if scale == T::zero() {
        return Err(LinalgError::Singular);
    }
    Ok(x.map(|z| z / scale))
}

/// Conjugate transpose.
pub fn adjoint<T: Real>(a: &CMat<T>) -> CMat<T> {
    a.transpose().map(|z| z.conj())
}

/// Plain transpose without conjugation.
pub fn transpose<T: Real>(a: &CMat<T>) -> CMat<T> {
    a.transpose()
}

pub fn block_diag<T: Real>(blocks: &[CMat<T>]) -> CMat<T> {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMat::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), b.shape()).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

pub fn scale_real<T: Real>(a: &CMat<T>, s: T) -> CMat<T> {
    a.map(|z| z * s)
}

/// Relative asymmetry `‖A − Aᵀ‖_F / ‖A‖_F`.
pub fn asymmetry<T: Real>(a: &CMat<T>) -> T {
    let nrm = frobenius(a);
    let d = frobenius(&(a - a.transpose()));
    if nrm == T::zero() {
        d
    } else {
        d / nrm
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, m: usize, seed: u64) -> CMat<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CMat::from_fn(n, m, |_, _| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn eigen_decomposition_reconstructs() {
        let a = random(6, 6, 41);
        let (w, v) = eigen_decompose(&a).unwrap();
        let d = CMat::from_diagonal(&CVec::from_vec(w));
        let rec = matmul(&matmul(&v, &d), &inverse(&v).unwrap());
        assert!(frobenius(&(rec - &a)) < 1e-11 * frobenius(&a));
        let jordan = CMat::from_row_slice(2, 2, &[C::one(), C::one(), C::zero(), C::one()]);
        assert!(eigen_decompose::<f64>(&jordan).is_err());
    }

    #[test]
    fn products_match_nalgebra() {
        let a = random(7, 5, 1);
        let b = random(5, 4, 2);
        assert!(frobenius(&(matmul(&a, &b) - &a * &b)) < 1e-13);
        let c = random(7, 4, 3);
        assert!(frobenius(&(matmul_tn(&a, &c) - a.transpose() * &c)) < 1e-13);
        assert!(frobenius(&(matmul_hn(&a, &c) - a.adjoint() * &c)) < 1e-13);
    }

    #[test]
    fn lu_solves_and_determinants() {
        let a = random(6, 6, 4);
        let b = random(6, 2, 5);
        let lu = Lu::new(&a).unwrap();
        let x = lu.solve(&b).unwrap();
        assert!(frobenius(&(&a * &x - &b)) < 1e-12);
        let xt = lu.solve_transpose(&b).unwrap();
        assert!(frobenius(&(a.transpose() * &xt - &b)) < 1e-12);
        let d = lu.det();
        let reference = a.clone().determinant();
        assert!((d - reference).norm() < 1e-12 * reference.norm());
    }

    #[test]
    fn log_det_tracks_phase_of_permuted_diagonal() {
        let mut a = CMat::<f64>::zeros(2, 2);
        a[(0, 1)] = Complex::new(2.0, 0.0);
        a[(1, 0)] = Complex::new(3.0, 0.0);
        let d = det(&a).unwrap();
        assert!((d - Complex::new(-6.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn schur_of_diagonal_and_jordan() {
        let d = CMat::<f64>::from_diagonal(&CVec::from_vec(vec![
            Complex::new(3.0, 0.0),
            Complex::new(-1.0, 2.0),
            Complex::new(0.5, 0.0),
        ]));
        let s = Schur::new(&d).unwrap();
        let ev = s.eigenvalues_sorted();
        assert_eq!(ev[0], Complex::new(-1.0, 2.0));
        assert!((ev[2] - Complex::new(3.0, 0.0)).norm() < 1e-15);

        let j = CMat::<f64>::from_row_slice(2, 2, &[
            Complex::new(1.0, 0.0), Complex::new(1.0, 0.0),
            Complex::new(0.0, 0.0), Complex::new(1.0, 0.0),
        ]);
        let s = Schur::new(&j).unwrap();
        assert!(s.diagonal().iter().all(|z| (z - Complex::new(1.0, 0.0)).norm() < 1e-12));
        let shifted = &j - CMat::identity(2, 2);
        assert_eq!(numerical_rank(&shifted, 1e-9).unwrap(), 1);
    }

    #[test]
    fn schur_residual_random_200() {
        let a = random(200, 200, 6);
        let s = Schur::new(&a).unwrap();
        assert!(s.residual(&a) < 1e-12);
    }

    #[test]
    fn reorder_brings_selection_forward() {
        let a = random(30, 30, 7);
        let mut s = Schur::new(&a).unwrap();
        let sel: Vec<bool> = s.diagonal().iter().map(|z| z.re < 0.0).collect();
        let k = s.reorder(&sel).unwrap();
        for i in 0..30 {
            assert_eq!(s.t[(i, i)].re < 0.0, i < k);
        }
        assert!(s.residual(&a) < 1e-12);
    }

    #[test]
    fn sylvester_solution() {
        let mut a = random(4, 4, 8);
        let mut b = random(3, 3, 9);
        for j in 0..4 {
            for i in (j + 1)..4 {
                a[(i, j)] = Complex::new(0.0, 0.0);
            }
            a[(j, j)] += Complex::new(5.0, 0.0);
        }
        for j in 0..3 {
            for i in (j + 1)..3 {
                b[(i, j)] = Complex::new(0.0, 0.0);
            }
        }
        let c = random(4, 3, 10);
        let x = sylvester_triangular(&a, &b, &c).unwrap();
        assert!(frobenius(&(&a * &x - &x * &b - &c)) < 1e-12);
    }

    #[test]
    fn single_precision_backend() {
        let a = CMat::<f32>::from_fn(5, 5, |i, j| Complex::new((i * 5 + j) as f32 / 7.0, ((i + 2 * j) % 3) as f32));
        let s = Schur::new(&a).unwrap();
        assert!(s.residual(&a) < 1e-5);
        let sv = singular_values(&a).unwrap();
        assert!(sv[0] >= sv[4]);
    }

    #[test]
    fn hermitian_spectrum() {
        let a = random(5, 5, 11);
        let h = &a + a.adjoint();
        let (w, v) = hermitian_eigen(&h).unwrap();
        let rec = &v * CMat::from_diagonal(&CVec::from_iterator(5, w.iter().map(|&x| Complex::new(x, 0.0)))) * v.adjoint();
        assert!(frobenius(&(rec - h)) < 1e-12);
    }
}
