//! Thin dense linear-algebra helpers on top of LAPACK.
//!
//! Everything here is deterministic for fixed inputs; the BLAS thread pool is
//! pinned to one thread so parallel sweeps at the rayon level stay
//! reproducible regardless of machine load.

use ndarray::prelude::*;
use ndarray_linalg::{Factorize, FactorizeInto, Inverse, Solve, SVD};
use num_complex::Complex64;
use std::sync::Once;

use crate::{Error, Result};

pub type C64 = Complex64;

static BLAS_INIT: Once = Once::new();

/// Pin the BLAS pool to a single thread (called before any LAPACK entry).
pub fn init_blas_single_thread() {
    BLAS_INIT.call_once(|| {
        std::env::set_var("OPENBLAS_NUM_THREADS", "1");
        std::env::set_var("OMP_NUM_THREADS", "1");
    });
}

/// LU-factorized complex matrix with owned storage.
pub struct LuFactor {
    inner: ndarray_linalg::LUFactorized<ndarray::OwnedRepr<C64>>,
}

impl LuFactor {
    pub fn new(a: Array2<C64>) -> Result<Self> {
        init_blas_single_thread();
        let inner = a
            .factorize_into()
            .map_err(|e| Error::Linalg(format!("complex LU: {e}")))?;
        Ok(Self { inner })
    }

    pub fn solve(&self, b: &Array1<C64>) -> Result<Array1<C64>> {
        Ok(self.inner.solve(b)?)
    }

    pub fn solve_inplace(&self, b: &mut Array1<C64>) -> Result<()> {
        self.inner.solve_inplace(b)?;
        Ok(())
    }

    /// Dense inverse (zgetri on the stored factors).
    pub fn inverse(&self) -> Result<Array2<C64>> {
        Ok(self.inner.inv()?)
    }
}

/// LU-factorized real matrix.
pub struct LuFactorReal {
    inner: ndarray_linalg::LUFactorized<ndarray::OwnedRepr<f64>>,
}

impl LuFactorReal {
    pub fn new(a: Array2<f64>) -> Result<Self> {
        init_blas_single_thread();
        let inner = a
            .factorize_into()
            .map_err(|e| Error::Linalg(format!("real LU: {e}")))?;
        Ok(Self { inner })
    }

    pub fn solve(&self, b: &Array1<f64>) -> Result<Array1<f64>> {
        Ok(self.inner.solve(b)?)
    }

    pub fn inverse(&self) -> Result<Array2<f64>> {
        Ok(self.inner.inv()?)
    }
}

/// Largest singular value of a dense complex matrix.
pub fn sigma_max(a: &Array2<C64>) -> Result<f64> {
    init_blas_single_thread();
    let (_, s, _) = a.svd(false, false)?;
    s.iter()
        .cloned()
        .fold(None::<f64>, |m, v| Some(m.map_or(v, |m| m.max(v))))
        .ok_or_else(|| Error::Linalg("empty SVD spectrum".into()))
}

/// Dense inverse of a real matrix.
pub fn inv_real(a: &Array2<f64>) -> Result<Array2<f64>> {
    init_blas_single_thread();
    Ok(a.factorize()?.inv()?)
}

/// Cholesky factor `L` (lower) of a symmetric positive definite matrix.
pub fn cholesky_lower(a: &Array2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    let mut l = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(Error::Linalg(format!(
                        "Cholesky pivot {s:.3e} at row {i}; matrix not SPD"
                    )));
                }
                l[[i, j]] = s.sqrt();
            } else {
                l[[i, j]] = s / l[[j, j]];
            }
        }
    }
    Ok(l)
}

/// Solve `L z = b` for lower-triangular real `L` and complex `b`.
pub fn forward_subst(l: &Array2<f64>, b: &Array1<C64>) -> Array1<C64> {
    let n = l.nrows();
    let mut z = Array1::<C64>::zeros(n);
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[[i, k]] * z[k];
        }
        z[i] = s / l[[i, i]];
    }
    z
}

/// Inverse of a lower-triangular real matrix by forward substitution.
pub fn inv_lower_triangular(l: &Array2<f64>) -> Array2<f64> {
    let n = l.nrows();
    let mut inv = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        inv[[j, j]] = 1.0 / l[[j, j]];
        for i in j + 1..n {
            let mut s = 0.0;
            for k in j..i {
                s += l[[i, k]] * inv[[k, j]];
            }
            inv[[i, j]] = -s / l[[i, i]];
        }
    }
    inv
}

/// Promote a real matrix to complex.
pub fn to_complex(a: &Array2<f64>) -> Array2<C64> {
    a.mapv(|v| C64::new(v, 0.0))
}

/// `out = a * diag(d)` (scale columns).
pub fn scale_columns(a: &Array2<C64>, d: &Array1<f64>) -> Array2<C64> {
    let mut out = a.clone();
    for (j, mut col) in out.columns_mut().into_iter().enumerate() {
        let s = d[j];
        col.mapv_inplace(|v| v * s);
    }
    out
}

/// `out = diag(d) * a` (scale rows).
pub fn scale_rows(a: &Array2<C64>, d: &Array1<f64>) -> Array2<C64> {
    let mut out = a.clone();
    for (i, mut row) in out.rows_mut().into_iter().enumerate() {
        let s = d[i];
        row.mapv_inplace(|v| v * s);
    }
    out
}
