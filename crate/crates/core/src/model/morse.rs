//! Morse functions on the circle: critical points, Morse charts and the gradient arcs.

use super::trig::TrigSeries;
use super::ModelError;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint<T> {
    pub position: T,
    /// Morse index: 0 for a minimum, 1 for a maximum.
    pub index: usize,
    pub value: T,
    pub curvature: T,
}

/// A downward gradient arc from a maximum to an adjacent minimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnstableArc<T> {
    /// Position of the maximum in the list of index-1 points.
    pub source: usize,
    /// Position of the minimum in the list of index-0 points.
    pub target: usize,
    /// `+1` if the arc leaves the maximum in the positive direction.
    pub sign: i8,
    /// Signed displacement from the maximum to the minimum along the arc.
    pub displacement: T,
}

/// Extent of a Morse ball and of the collar where cut-offs switch off, in physical length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball<T> {
    pub center: T,
    pub left: T,
    pub right: T,
    pub left_collar: T,
    pub right_collar: T,
}

#[derive(Debug, Clone)]
pub struct MorseFunction<T: Real> {
    series: TrigSeries<T>,
    circumference: T,
}

impl<T: Real> MorseFunction<T> {
    pub fn new(series: TrigSeries<T>, circumference: T) -> Self {
        Self { series, circumference }
    }

    pub fn series(&self) -> &TrigSeries<T> {
        &self.series
    }

    pub fn value(&self, x: T) -> T {
        self.series.real_derivative(x, 0)
    }

    pub fn d1(&self, x: T) -> T {
        self.series.real_derivative(x, 1)
    }

    pub fn d2(&self, x: T) -> T {
        self.series.real_derivative(x, 2)
    }

    pub fn d3(&self, x: T) -> T {
        self.series.real_derivative(x, 3)
    }

    /// Critical points sorted by position in `[0, ℓ)`.
    pub fn critical_points(&self) -> Result<Vec<CriticalPoint<T>>, ModelError> {
        let ell = self.circumference;
        let samples = 4096.max(64 * self.series.max_frequency());
        let step = ell / T::from_usize(samples).unwrap();
        let xs: Vec<T> = (0..samples).map(|j| step * T::from_usize(j).unwrap()).collect();
        let d1: Vec<T> = xs.iter().map(|&x| self.d1(x)).collect();
        let scale = d1.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        if scale == T::zero() {
            return Err(ModelError::NoCriticalPoints);
        }
        let curvature_scale = xs.iter().fold(T::zero(), |m, &x| m.max(self.d2(x).abs()));
        let mut out = Vec::new();
        for j in 0..samples {
            let k = (j + 1) % samples;
            let (a, b) = (d1[j], d1[k]);
            let hi = if k == 0 { ell } else { xs[k] };
            if a == T::zero() || (a < T::zero()) != (b < T::zero()) && b != T::zero() {
                let x = if a == T::zero() { xs[j] } else { self.bisect(xs[j], hi, a) };
                out.push(self.classify(x, curvature_scale)?);
                continue;
            }
            // A touching zero of f′ without sign change is a degenerate critical point.
            let prev = d1[(j + samples - 1) % samples];
            let same_side = (prev < T::zero()) == (a < T::zero()) && prev != T::zero();
            if same_side && a.abs() <= prev.abs() && a.abs() <= b.abs() && a.abs() < T::lit(1e-3) * scale {
                let x = self.golden_min(xs[j] - step, xs[j] + step);
                if self.d1(x).abs() < T::lit(1e-9) * scale {
                    return Err(ModelError::DegenerateCritical { position: x.to_f64_lossy() });
                }
            }
        }
        if out.is_empty() {
            return Err(ModelError::NoCriticalPoints);
        }
        for (p, q) in out.iter().zip(out.iter().cycle().skip(1)) {
            if p.index == q.index && out.len() > 1 {
                return Err(ModelError::DegenerateCritical { position: q.position.to_f64_lossy() });
            }
        }
        Ok(out)
    }

    fn classify(&self, x: T, curvature_scale: T) -> Result<CriticalPoint<T>, ModelError> {
        let x = modulo(x, self.circumference);
        let curvature = self.d2(x);
        if curvature.abs() < T::lit(1e-6) * curvature_scale {
            return Err(ModelError::DegenerateCritical { position: x.to_f64_lossy() });
        }
        Ok(CriticalPoint { position: x, index: usize::from(curvature < T::zero()), value: self.value(x), curvature })
    }

    fn bisect(&self, mut lo: T, mut hi: T, flo: T) -> T {
        let neg = flo < T::zero();
        for _ in 0..200 {
            let mid = (lo + hi) / T::lit(2.0);
            if mid <= lo || mid >= hi {
                break;
            }
            if (self.d1(mid) < T::zero()) == neg {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo + hi) / T::lit(2.0)
    }

    fn golden_min(&self, mut a: T, mut b: T) -> T {
        let r = T::lit(0.618_033_988_749_894_8);
        for _ in 0..120 {
            let c = b - r * (b - a);
            let d = a + r * (b - a);
            if self.d1(c).abs() < self.d1(d).abs() {
                b = d;
            } else {
                a = c;
            }
        }
        (a + b) / T::lit(2.0)
    }

    /// Distance `t ∈ (0, limit)` from `p` in direction `dir` where `|f − f(p)| = level`.
    pub fn level_distance(&self, p: &CriticalPoint<T>, dir: T, limit: T, level: T) -> Option<T> {
        let excess = |t: T| (self.value(p.position + dir * t) - p.value).abs() - level;
        if excess(limit) <= T::zero() {
            return None;
        }
        let (mut lo, mut hi) = (T::zero(), limit);
        for _ in 0..200 {
            let mid = (lo + hi) / T::lit(2.0);
            if mid <= lo || mid >= hi {
                break;
            }
            if excess(mid) < T::zero() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some((lo + hi) / T::lit(2.0))
    }

    /// Signed Morse coordinate `±√(2|f − f(p)|)` at displacement `t` from `p`.
    pub fn chart(&self, p: &CriticalPoint<T>, t: T) -> T {
        let v = (T::lit(2.0) * (self.value(p.position + t) - p.value).abs()).sqrt();
        if t < T::zero() {
            -v
        } else {
            v
        }
    }

    /// Derivative of the Morse coordinate in `x`; tends to `√|f″(p)|` at the centre.
    pub fn chart_derivative(&self, p: &CriticalPoint<T>, t: T) -> T {
        let phi = self.chart(p, t);
        if phi.abs() < T::lit(1e-6) {
            return p.curvature.abs().sqrt();
        }
        self.d1(p.position + t).abs() / phi.abs()
    }
}

/// `x mod m` in `[0, m)`.
pub fn modulo<T: Real>(x: T, m: T) -> T {
    let r = x - m * (x / m).floor();
    if r >= m {
        r - m
    } else {
        r
    }
}

/// Forward distance from `a` to `b` on a circle of circumference `ell`, in `(0, ℓ]`.
pub fn forward_distance<T: Real>(a: T, b: T, ell: T) -> T {
    let d = modulo(b - a, ell);
    if d == T::zero() {
        ell
    } else {
        d
    }
}

/// Lift of `x − center` to `[−ℓ/2, ℓ/2)`.
pub fn wrap_offset<T: Real>(x: T, center: T, ell: T) -> T {
    let half = ell / T::lit(2.0);
    modulo(x - center + half, ell) - half
}

/// `C^∞` step from 0 (at `t ≤ 0`) to 1 (at `t ≥ 1`) and its derivative.
pub fn smooth_step<T: Real>(t: T) -> (T, T) {
    let one = T::one();
    if t <= T::zero() {
        return (T::zero(), T::zero());
    }
    if t >= one {
        return (one, T::zero());
    }
    let bump = |s: T| (-one / s).exp();
    let dbump = |s: T| bump(s) / (s * s);
    let (p, q) = (bump(t), bump(one - t));
    let den = p + q;
    (p / den, (dbump(t) * q + p * dbump(one - t)) / (den * den))
}

/// Quintic smoothstep: 1 on `[0, a]`, 0 on `[b, ∞)`, `C²` in between.
pub fn quintic_cutoff<T: Real>(r: T, a: T, b: T) -> T {
    let t = ((r.abs() - a) / (b - a)).max(T::zero()).min(T::one());
    let s = t * t * t * (T::lit(10.0) - T::lit(15.0) * t + T::lit(6.0) * t * t);
    T::one() - s
}

/// Balls of Morse radius `rho` around consecutive critical points and the collars between them.
pub fn morse_balls<T: Real>(f: &MorseFunction<T>, crit: &[CriticalPoint<T>], rho: T, ell: T) -> Result<Vec<Ball<T>>, ModelError> {
    let m = crit.len();
    let level = rho * rho / T::lit(2.0);
    let mut left = vec![T::zero(); m];
    let mut right = vec![T::zero(); m];
    let overlap = |i: usize, j: usize| ModelError::OverlapViolation {
        first: crit[i].position.to_f64_lossy(),
        second: crit[j].position.to_f64_lossy(),
    };
    for i in 0..m {
        let next = (i + 1) % m;
        let prev = (i + m - 1) % m;
        let dn = forward_distance(crit[i].position, crit[next].position, ell);
        let dp = forward_distance(crit[prev].position, crit[i].position, ell);
        right[i] = f.level_distance(&crit[i], T::one(), dn, level).ok_or_else(|| overlap(i, next))?;
        left[i] = f.level_distance(&crit[i], -T::one(), dp, level).ok_or_else(|| overlap(prev, i))?;
    }
    let mut gaps = vec![T::zero(); m];
    for i in 0..m {
        let next = (i + 1) % m;
        let gap = forward_distance(crit[i].position, crit[next].position, ell) - right[i] - left[next];
        if gap <= T::zero() {
            return Err(overlap(i, next));
        }
        gaps[i] = gap;
    }
    Ok((0..m)
        .map(|i| Ball {
            center: crit[i].position,
            left: left[i],
            right: right[i],
            left_collar: T::lit(0.45) * gaps[(i + m - 1) % m],
            right_collar: T::lit(0.45) * gaps[i],
        })
        .collect())
}

impl<T: Real> Ball<T> {
    /// Cut-off equal to 1 on the ball, 0 beyond the collar, and its derivative.
    pub fn cutoff(&self, x: T, ell: T) -> (T, T) {
        let t = wrap_offset(x, self.center, ell);
        if t >= T::zero() {
            let (s, ds) = smooth_step((t - self.right) / self.right_collar);
            (T::one() - s, -ds / self.right_collar)
        } else {
            let (s, ds) = smooth_step((-t - self.left) / self.left_collar);
            (T::one() - s, ds / self.left_collar)
        }
    }

    pub fn contains(&self, x: T, ell: T) -> bool {
        let t = wrap_offset(x, self.center, ell);
        -self.left <= t && t <= self.right
    }
}

/// The two downward arcs of every maximum, with minima and maxima indexed by position order.
pub fn unstable_arcs<T: Real>(crit: &[CriticalPoint<T>], ell: T) -> Vec<UnstableArc<T>> {
    let m = crit.len();
    let slot = |i: usize| crit[..i].iter().filter(|c| c.index == crit[i].index).count();
    let mut arcs = Vec::new();
    for i in (0..m).filter(|&i| crit[i].index == 1) {
        let next = (i + 1) % m;
        let prev = (i + m - 1) % m;
        arcs.push(UnstableArc {
            source: slot(i),
            target: slot(next),
            sign: 1,
            displacement: forward_distance(crit[i].position, crit[next].position, ell),
        });
        arcs.push(UnstableArc {
            source: slot(i),
            target: slot(prev),
            sign: -1,
            displacement: -forward_distance(crit[prev].position, crit[i].position, ell),
        });
    }
    arcs
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cos_function(k: usize) -> MorseFunction<f64> {
        let mut c = vec![0.0; 2 * k];
        c[2 * k - 1] = 1.0 / (4.0 * (k * k) as f64);
        MorseFunction::new(TrigSeries::real(2.0 * PI, 0.0, &c, &[]), 2.0 * PI)
    }

    #[test]
    fn cos_has_one_minimum_and_one_maximum() {
        let f = MorseFunction::new(TrigSeries::real(2.0 * PI, 0.0, &[1.0], &[]), 2.0 * PI);
        let crit = f.critical_points().unwrap();
        assert_eq!(crit.len(), 2);
        assert_eq!(crit[0].index, 1);
        assert!(crit[0].position.abs() < 1e-12);
        assert_eq!(crit[1].index, 0);
        assert!((crit[1].position - PI).abs() < 1e-12);
        let arcs = unstable_arcs(&crit, 2.0 * PI);
        assert_eq!(arcs.len(), 2);
        assert!((arcs[0].displacement - PI).abs() < 1e-12 && (arcs[1].displacement + PI).abs() < 1e-12);
    }

    #[test]
    fn multiple_wells_alternate() {
        let crit = cos_function(2).critical_points().unwrap();
        assert_eq!(crit.len(), 8);
        for w in crit.windows(2) {
            assert_ne!(w[0].index, w[1].index);
            assert!((w[0].curvature.abs() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cubic_touching_zero_is_degenerate() {
        // sin³ = (3 sin − sin 3θ)/4
        let f = MorseFunction::new(TrigSeries::real(2.0 * PI, 0.0, &[], &[0.75, 0.0, -0.25]), 2.0 * PI);
        assert!(matches!(f.critical_points(), Err(ModelError::DegenerateCritical { .. })));
    }

    #[test]
    fn ball_radii_and_overlap() {
        let f = MorseFunction::new(TrigSeries::real(2.0 * PI, 0.0, &[1.0], &[]), 2.0 * PI);
        let crit = f.critical_points().unwrap();
        let balls = morse_balls(&f, &crit, 0.4, 2.0 * PI).unwrap();
        // 1 − cos t = 0.08
        let expect = (1.0f64 - 0.08).acos();
        assert!((balls[0].right - expect).abs() < 1e-12);
        assert!((balls[1].left - expect).abs() < 1e-12);
        let narrow = cos_function(1);
        let c2 = narrow.critical_points().unwrap();
        assert!(matches!(morse_balls(&narrow, &c2, 0.9, 2.0 * PI), Err(ModelError::OverlapViolation { .. })));
    }

    #[test]
    fn cutoffs_are_one_on_balls_and_sum_below_one() {
        let f = cos_function(1);
        let crit = f.critical_points().unwrap();
        let balls = morse_balls(&f, &crit, 0.4, 2.0 * PI).unwrap();
        for j in 0..2000 {
            let x = 2.0 * PI * j as f64 / 2000.0;
            let total: f64 = balls.iter().map(|b| b.cutoff(x, 2.0 * PI).0).sum();
            assert!(total <= 1.0 + 1e-15);
            for b in &balls {
                if b.contains(x, 2.0 * PI) {
                    assert_eq!(b.cutoff(x, 2.0 * PI).0, 1.0);
                }
            }
        }
        let b = balls[0];
        let x = b.center + b.right + 0.3 * b.right_collar;
        let h = 1e-6;
        let fd = (b.cutoff(x + h, 2.0 * PI).0 - b.cutoff(x - h, 2.0 * PI).0) / (2.0 * h);
        assert!((fd - b.cutoff(x, 2.0 * PI).1).abs() < 1e-6);
    }

    #[test]
    fn quintic_cutoff_profile() {
        assert_eq!(quintic_cutoff(0.1, 0.2, 0.4), 1.0);
        assert_eq!(quintic_cutoff(-0.5, 0.2, 0.4), 0.0);
        assert!((quintic_cutoff(0.3f64, 0.2, 0.4) - 0.5).abs() < 1e-15);
    }
}
