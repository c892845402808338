//! Splitting a spectrum at a real-part threshold and the associated Riesz projectors.

use serde::Serialize;

use super::SpectralError;
use crate::linalg::{self, frobenius, matmul, matmul_nh, spectral_order, CMat, Schur};
use crate::scalar::{Real, C};

/// Which rule placed the split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitRule {
    Threshold,
    /// Eigenvalues crowded the threshold; the split went to the widest relative gap.
    LargestGap,
}

/// Unitary Schur form with eigenvalues listed by real part, then imaginary part.
pub fn eig_schur<T: Real>(a: &CMat<T>) -> Result<(Vec<C<T>>, Schur<T>), SpectralError> {
    let schur = Schur::new(a)?;
    Ok((schur.eigenvalues_sorted(), schur))
}

/// One degree of a partitioned spectrum.
#[derive(Debug, Clone)]
pub struct DegreePartition<T: Real> {
    pub eigenvalues: Vec<C<T>>,
    /// Schur form reordered so that the small eigenvalues lead.
    pub schur: Schur<T>,
    pub small: usize,
    /// Riesz projector onto the small generalized eigenspace.
    pub projector: CMat<T>,
}

impl<T: Real> DegreePartition<T> {
    fn split(mut schur: Schur<T>, cut: T) -> Result<Self, SpectralError> {
        let eigenvalues = schur.eigenvalues_sorted();
        let n = schur.dim();
        let select: Vec<bool> = schur.diagonal().iter().map(|z| z.re <= cut).collect();
        let small = schur.reorder(&select)?;
        let projector = if small == 0 {
            CMat::zeros(n, n)
        } else if small == n {
            CMat::identity(n, n)
        } else {
            // complement of the leading block is spanned by [Y; I] with T₁₁Y − YT₂₂ = −T₁₂
            let t11 = schur.t.view((0, 0), (small, small)).into_owned();
            let t12 = schur.t.view((0, small), (small, n - small)).into_owned();
            let t22 = schur.t.view((small, small), (n - small, n - small)).into_owned();
            let y = linalg::sylvester_triangular(&t11, &t22, &(-t12))?;
            let z1 = schur.z.columns(0, small).into_owned();
            let z2 = schur.z.columns(small, n - small).into_owned();
            matmul_nh(&z1, &z1) - matmul_nh(&matmul(&z1, &y), &z2)
        };
        Ok(Self { eigenvalues, schur, small, projector })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Orthonormal basis of the range of the projector.
    pub fn small_basis(&self) -> CMat<T> {
        self.schur.z.columns(0, self.small).into_owned()
    }

    pub fn small_eigenvalues(&self) -> Vec<C<T>> {
        let mut w: Vec<C<T>> = (0..self.small).map(|i| self.schur.t[(i, i)]).collect();
        w.sort_by(spectral_order);
        w
    }

    pub fn large_eigenvalues(&self) -> Vec<C<T>> {
        let mut w: Vec<C<T>> = (self.small..self.dim()).map(|i| self.schur.t[(i, i)]).collect();
        w.sort_by(spectral_order);
        w
    }

    pub fn max_small_abs(&self) -> Option<T> {
        self.small_eigenvalues().iter().map(|z| z.norm()).reduce(T::max)
    }

    pub fn min_large_re(&self) -> Option<T> {
        self.large_eigenvalues().first().map(|z| z.re)
    }

    /// `‖Q² − Q‖ / ‖Q‖`
    pub fn idempotency_residual(&self) -> T {
        let q = &self.projector;
        relative(&(matmul(q, q) - q), q)
    }

    /// `‖QA − AQ‖ / (‖Q‖‖A‖)`
    pub fn commutator_residual(&self, a: &CMat<T>) -> T {
        let q = &self.projector;
        let c = matmul(q, a) - matmul(a, q);
        frobenius(&c) / (frobenius(q) * frobenius(a)).max(T::min_positive_value())
    }
}

fn relative<T: Real>(x: &CMat<T>, scale: &CMat<T>) -> T {
    let s = frobenius(scale);
    if s == T::zero() {
        frobenius(x)
    } else {
        frobenius(x) / s
    }
}

/// Spectra of a family of operators split at a common real-part cut.
#[derive(Debug, Clone)]
pub struct SpectrumPartition<T: Real> {
    pub degrees: Vec<DegreePartition<T>>,
    pub threshold: T,
    /// Real-part value actually used to split.
    pub cut: T,
    pub rule: SplitRule,
}

impl<T: Real> SpectrumPartition<T> {
    pub fn small_dims(&self) -> Vec<usize> {
        self.degrees.iter().map(|d| d.small).collect()
    }

    pub fn max_small_abs(&self) -> Option<T> {
        self.degrees.iter().filter_map(|d| d.max_small_abs()).reduce(T::max)
    }

    pub fn min_large_re(&self) -> Option<T> {
        self.degrees.iter().filter_map(|d| d.min_large_re()).reduce(T::min)
    }
}

/// Splits every operator at `Re λ ≤ threshold`.
///
/// If some eigenvalue lies within `tol_split · max(1, threshold)` of the threshold, the cut moves
/// to the widest relative gap `(x_{k+1} − x_k) / (1 + |x_k|)` of the pooled sorted real parts.
pub fn partition_and_project<T: Real>(ops: &[CMat<T>], threshold: T, tol_split: T) -> Result<SpectrumPartition<T>, SpectralError> {
    let mut pooled = Vec::new();
    let mut forms = Vec::with_capacity(ops.len());
    for a in ops {
        if !linalg::is_finite(a) {
            return Err(SpectralError::NonFinite);
        }
        let schur = Schur::new(a)?;
        pooled.extend(schur.diagonal().into_iter().map(|z| z.re));
        forms.push(schur);
    }
    pooled.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let band = tol_split * threshold.abs().max(T::one());
    let crowded = pooled.iter().any(|&x| (x - threshold).abs() < band);
    let (cut, rule) = if crowded {
        let best = pooled
            .windows(2)
            .map(|w| (w[1] - w[0]) / (T::one() + w[0].abs()))
            .enumerate()
            .fold(None, |acc: Option<(usize, T)>, (i, g)| match acc {
                Some((_, bg)) if bg >= g => acc,
                _ => Some((i, g)),
            })
            .ok_or(SpectralError::AmbiguousSplit { threshold: threshold.to_f64_lossy() })?;
        let (i, _) = best;
        ((pooled[i] + pooled[i + 1]) / T::lit(2.0), SplitRule::LargestGap)
    } else {
        (threshold, SplitRule::Threshold)
    };
    let degrees = forms.into_iter().map(|s| DegreePartition::split(s, cut)).collect::<Result<Vec<_>, _>>()?;
    Ok(SpectrumPartition { degrees, threshold, cut, rule })
}

/// `Q = (1/2πi)∮(z − A)⁻¹dz` over the circle `|z − center| = radius` by the trapezoidal rule.
pub fn contour_projector<T: Real>(a: &CMat<T>, center: C<T>, radius: T, nodes: usize) -> Result<CMat<T>, SpectralError> {
    let n = a.nrows();
    let mut q = CMat::zeros(n, n);
    let id = CMat::<T>::identity(n, n);
    for k in 0..nodes {
        let theta = T::TAU() * T::from_usize(k).unwrap() / T::from_usize(nodes).unwrap();
        let e = C::new(theta.cos(), theta.sin());
        let z = center + e * radius;
        let shifted = id.map(|v| v * z) - a;
        let lu = linalg::Lu::new(&shifted)?;
        if lu.is_singular() {
            return Err(SpectralError::ContourHitsSpectrum { point: (z.re.to_f64_lossy(), z.im.to_f64_lossy()) });
        }
        let weight = e * radius / T::from_usize(nodes).unwrap();
        q += lu.inverse()?.map(|v| v * weight);
    }
    Ok(q)
}
