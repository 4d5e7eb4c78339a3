//! Dense SVD helpers on `nalgebra` matrices, computed with `faer`.

use nalgebra::DMatrix;

use crate::error::{EfkError, Result};

pub(crate) struct Svd {
    pub u: DMatrix<f64>,
    /// Descending.
    pub sigma: Vec<f64>,
    pub v: DMatrix<f64>,
}

fn to_faer(m: &DMatrix<f64>) -> faer::Mat<f64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn check_finite(m: &DMatrix<f64>) -> Result<()> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(EfkError::NonFinite);
    }
    Ok(())
}

/// Thin SVD `m = U diag(σ) Vᵀ` with singular values sorted descending.
pub(crate) fn svd_sorted(m: &DMatrix<f64>) -> Result<Svd> {
    check_finite(m)?;
    let svd = to_faer(m).thin_svd().map_err(|_| EfkError::SvdFailure)?;
    let (u, s, v) = (svd.U(), svd.S(), svd.V());
    let k = m.nrows().min(m.ncols());
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    Ok(Svd {
        u: DMatrix::from_fn(m.nrows(), k, |i, c| u[(i, order[c])]),
        sigma: order.iter().map(|&c| s[c]).collect(),
        v: DMatrix::from_fn(m.ncols(), k, |j, c| v[(j, order[c])]),
    })
}

/// Singular values, descending.
pub(crate) fn singular_values(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_finite(m)?;
    let mut s = to_faer(m).singular_values().map_err(|_| EfkError::SvdFailure)?;
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}
