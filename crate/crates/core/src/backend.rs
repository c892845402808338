//! Thin safe layer over LAPACK/BLAS for complex single and double precision.
//!
//! Matrices are column-major slices with leading dimension equal to the row count.

use std::os::raw::c_char;

use num_complex::Complex;

extern crate openblas_src;

/// Failure reported by a LAPACK driver through its `info` argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LapackInfo(pub i32);

type Res<T> = Result<T, LapackInfo>;

pub struct SchurRaw<T> {
    pub t: Vec<Complex<T>>,
    pub z: Vec<Complex<T>>,
    pub w: Vec<Complex<T>>,
}

/// Dense complex kernels used by the linear-algebra layer.
pub trait Backend: Sized + Copy {
    fn gees(n: usize, a: Vec<Complex<Self>>) -> Res<SchurRaw<Self>>;
    /// Reorders `t`/`z` so the selected eigenvalues lead. Returns the new diagonal.
    fn trsen(n: usize, select: &[bool], t: &mut [Complex<Self>], z: &mut [Complex<Self>]) -> Res<Vec<Complex<Self>>>;
    /// Solves `A X + isgn X B = scale C`, overwriting `c` with `X`. Returns `scale`.
    fn trsyl(m: usize, n: usize, isgn: i32, a: &[Complex<Self>], b: &[Complex<Self>], c: &mut [Complex<Self>]) -> Res<Self>;
    fn getrf(n: usize, a: &mut [Complex<Self>]) -> Res<Vec<i32>>;
    fn getrs(n: usize, nrhs: usize, transpose: bool, lu: &[Complex<Self>], ipiv: &[i32], b: &mut [Complex<Self>]) -> Res<()>;
    fn singular_values(m: usize, n: usize, a: Vec<Complex<Self>>) -> Res<Vec<Self>>;
    /// Eigenvalues (ascending) and optionally eigenvectors of a Hermitian matrix.
    fn heevd(n: usize, a: &mut [Complex<Self>], vectors: bool) -> Res<Vec<Self>>;
    #[allow(clippy::too_many_arguments)]
    fn gemm(
        ta: u8,
        tb: u8,
        m: usize,
        n: usize,
        k: usize,
        a: &[Complex<Self>],
        lda: usize,
        b: &[Complex<Self>],
        ldb: usize,
        c: &mut [Complex<Self>],
    );
}

fn ch(b: u8) -> c_char {
    b as c_char
}

macro_rules! impl_backend {
    ($t:ty, $gees:ident, $trsen:ident, $trsyl:ident, $getrf:ident, $getrs:ident, $gesvd:ident, $heevd:ident, $gemm:ident) => {
        impl Backend for $t {
            fn gees(n: usize, mut a: Vec<Complex<$t>>) -> Res<SchurRaw<$t>> {
                let ni = n as i32;
                let mut sdim = 0;
                let mut w = vec![Complex::new(0.0, 0.0); n];
                let mut z = vec![Complex::new(0.0, 0.0); n * n];
                let mut rwork = vec![0.0 as $t; n.max(1)];
                let mut bwork = vec![0i32; n.max(1)];
                let mut info = 0;
                let mut query = [Complex::new(0.0 as $t, 0.0)];
                unsafe {
                    lapack_sys::$gees(
                        &ch(b'V'), &ch(b'N'), None, &ni, a.as_mut_ptr().cast(), &ni.max(1), &mut sdim,
                        w.as_mut_ptr().cast(), z.as_mut_ptr().cast(), &ni.max(1), query.as_mut_ptr().cast(),
                        &-1, rwork.as_mut_ptr(), bwork.as_mut_ptr(), &mut info,
                    );
                }
                let lwork = (query[0].re as i32).max(1);
                let mut work = vec![Complex::new(0.0 as $t, 0.0); lwork as usize];
                unsafe {
                    lapack_sys::$gees(
                        &ch(b'V'), &ch(b'N'), None, &ni, a.as_mut_ptr().cast(), &ni.max(1), &mut sdim,
                        w.as_mut_ptr().cast(), z.as_mut_ptr().cast(), &ni.max(1), work.as_mut_ptr().cast(),
                        &lwork, rwork.as_mut_ptr(), bwork.as_mut_ptr(), &mut info,
                    );
                }
                if info != 0 {
                    return Err(LapackInfo(info));
                }
                Ok(SchurRaw { t: a, z, w })
            }

            fn trsen(n: usize, select: &[bool], t: &mut [Complex<$t>], z: &mut [Complex<$t>]) -> Res<Vec<Complex<$t>>> {
                let ni = n as i32;
                let sel: Vec<i32> = select.iter().map(|&s| s as i32).collect();
                let mut w = vec![Complex::new(0.0, 0.0); n];
                let mut m = 0;
                let mut s = 0.0;
                let mut sep = 0.0;
                let lwork = 1i32;
                let mut work = vec![Complex::new(0.0 as $t, 0.0); 1];
                let mut info = 0;
                unsafe {
                    lapack_sys::$trsen(
                        &ch(b'N'), &ch(b'V'), sel.as_ptr(), &ni, t.as_mut_ptr().cast(), &ni.max(1),
                        z.as_mut_ptr().cast(), &ni.max(1), w.as_mut_ptr().cast(), &mut m, &mut s, &mut sep,
                        work.as_mut_ptr().cast(), &lwork, &mut info,
                    );
                }
                if info != 0 {
                    return Err(LapackInfo(info));
                }
                Ok(w)
            }

            fn trsyl(m: usize, n: usize, isgn: i32, a: &[Complex<$t>], b: &[Complex<$t>], c: &mut [Complex<$t>]) -> Res<$t> {
                let (mi, ni) = (m as i32, n as i32);
                let mut scale = 1.0;
                let mut info = 0;
                unsafe {
                    lapack_sys::$trsyl(
                        &ch(b'N'), &ch(b'N'), &isgn, &mi, &ni, a.as_ptr().cast(), &mi.max(1), b.as_ptr().cast(),
                        &ni.max(1), c.as_mut_ptr().cast(), &mi.max(1), &mut scale, &mut info,
                    );
                }
                // info = 1 flags a perturbed (near-common) spectrum; the solution is still returned.
                if info < 0 {
                    return Err(LapackInfo(info));
                }
                Ok(scale)
            }

            fn getrf(n: usize, a: &mut [Complex<$t>]) -> Res<Vec<i32>> {
                let ni = n as i32;
                let mut ipiv = vec![0i32; n];
                let mut info = 0;
                unsafe {
                    lapack_sys::$getrf(&ni, &ni, a.as_mut_ptr().cast(), &ni.max(1), ipiv.as_mut_ptr(), &mut info);
                }
                if info < 0 {
                    return Err(LapackInfo(info));
                }
                // info > 0 means an exact zero pivot; callers inspect the diagonal.
                Ok(ipiv)
            }

            fn getrs(n: usize, nrhs: usize, transpose: bool, lu: &[Complex<$t>], ipiv: &[i32], b: &mut [Complex<$t>]) -> Res<()> {
                let (ni, nr) = (n as i32, nrhs as i32);
                let trans = if transpose { b'T' } else { b'N' };
                let mut info = 0;
                unsafe {
                    lapack_sys::$getrs(
                        &ch(trans), &ni, &nr, lu.as_ptr().cast(), &ni.max(1), ipiv.as_ptr(), b.as_mut_ptr().cast(),
                        &ni.max(1), &mut info,
                    );
                }
                if info != 0 {
                    return Err(LapackInfo(info));
                }
                Ok(())
            }

            fn singular_values(m: usize, n: usize, mut a: Vec<Complex<$t>>) -> Res<Vec<$t>> {
                let (mi, ni) = (m as i32, n as i32);
                let k = m.min(n);
                let mut s = vec![0.0 as $t; k];
                let mut rwork = vec![0.0 as $t; (5 * k).max(1)];
                let mut dummy = [Complex::new(0.0 as $t, 0.0)];
                let mut dummy2 = [Complex::new(0.0 as $t, 0.0)];
                let mut query = [Complex::new(0.0 as $t, 0.0)];
                let mut info = 0;
                unsafe {
                    lapack_sys::$gesvd(
                        &ch(b'N'), &ch(b'N'), &mi, &ni, a.as_mut_ptr().cast(), &mi.max(1), s.as_mut_ptr(),
                        dummy.as_mut_ptr().cast(), &1, dummy2.as_mut_ptr().cast(), &1, query.as_mut_ptr().cast(),
                        &-1, rwork.as_mut_ptr(), &mut info,
                    );
                }
                let lwork = (query[0].re as i32).max(1);
                let mut work = vec![Complex::new(0.0 as $t, 0.0); lwork as usize];
                unsafe {
                    lapack_sys::$gesvd(
                        &ch(b'N'), &ch(b'N'), &mi, &ni, a.as_mut_ptr().cast(), &mi.max(1), s.as_mut_ptr(),
                        dummy.as_mut_ptr().cast(), &1, dummy2.as_mut_ptr().cast(), &1, work.as_mut_ptr().cast(),
                        &lwork, rwork.as_mut_ptr(), &mut info,
                    );
                }
                if info != 0 {
                    return Err(LapackInfo(info));
                }
                Ok(s)
            }

            fn heevd(n: usize, a: &mut [Complex<$t>], vectors: bool) -> Res<Vec<$t>> {
                let ni = n as i32;
                let jobz = if vectors { b'V' } else { b'N' };
                let mut w = vec![0.0 as $t; n];
                let mut query = [Complex::new(0.0 as $t, 0.0)];
                let mut rquery = [0.0 as $t];
                let mut iquery = [0i32];
                let mut info = 0;
                unsafe {
                    lapack_sys::$heevd(
                        &ch(jobz), &ch(b'U'), &ni, a.as_mut_ptr().cast(), &ni.max(1), w.as_mut_ptr(),
                        query.as_mut_ptr().cast(), &-1, rquery.as_mut_ptr(), &-1, iquery.as_mut_ptr(), &-1, &mut info,
                    );
                }
                let lwork = (query[0].re as i32).max(1);
                let lrwork = (rquery[0] as i32).max(1);
                let liwork = iquery[0].max(1);
                let mut work = vec![Complex::new(0.0 as $t, 0.0); lwork as usize];
                let mut rwork = vec![0.0 as $t; lrwork as usize];
                let mut iwork = vec![0i32; liwork as usize];
                unsafe {
                    lapack_sys::$heevd(
                        &ch(jobz), &ch(b'U'), &ni, a.as_mut_ptr().cast(), &ni.max(1), w.as_mut_ptr(),
                        work.as_mut_ptr().cast(), &lwork, rwork.as_mut_ptr(), &lrwork, iwork.as_mut_ptr(), &liwork,
                        &mut info,
                    );
                }
                if info != 0 {
                    return Err(LapackInfo(info));
                }
                Ok(w)
            }

            fn gemm(
                ta: u8,
                tb: u8,
                m: usize,
                n: usize,
                k: usize,
                a: &[Complex<$t>],
                lda: usize,
                b: &[Complex<$t>],
                ldb: usize,
                c: &mut [Complex<$t>],
            ) {
                if m == 0 || n == 0 {
                    return;
                }
                let one = Complex::new(1.0 as $t, 0.0);
                let zero = Complex::new(0.0 as $t, 0.0);
                let (mi, ni, ki) = (m as i32, n as i32, k as i32);
                unsafe {
                    blas_sys::$gemm(
                        &ch(ta), &ch(tb), &mi, &ni, &ki, (&one as *const Complex<$t>).cast(), a.as_ptr().cast(),
                        &(lda.max(1) as i32), b.as_ptr().cast(), &(ldb.max(1) as i32), (&zero as *const Complex<$t>).cast(),
                        c.as_mut_ptr().cast(), &mi.max(1),
                    );
                }
            }
        }
    };
}

impl_backend!(f64, zgees_, ztrsen_, ztrsyl_, zgetrf_, zgetrs_, zgesvd_, zheevd_, zgemm_);
impl_backend!(f32, cgees_, ctrsen_, ctrsyl_, cgetrf_, cgetrs_, cgesvd_, cheevd_, cgemm_);
