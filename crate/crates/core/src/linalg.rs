//! Small dense complex linear-algebra helpers. Matrices are nalgebra types;
//! the SVD and eigenvalue kernels are delegated to faer.

use faer::Mat;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Relative singular-value cutoff for rank decisions.
pub const RANK_TOL: f64 = 1e-12;

fn to_faer(a: &CMatrix) -> Mat<Complex64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

/// Thin SVD `a = U diag(sigma) V^*`, singular values in descending order.
struct Svd {
    sigma: Vec<f64>,
    u: CMatrix,
    v: CMatrix,
}

fn thin_svd(a: &CMatrix) -> Result<Svd> {
    let (r, c) = a.shape();
    let k = r.min(c);
    if k == 0 {
        return Ok(Svd {
            sigma: Vec::new(),
            u: CMatrix::zeros(r, 0),
            v: CMatrix::zeros(c, 0),
        });
    }
    let svd = to_faer(a)
        .thin_svd()
        .map_err(|e| Error::Numerical(format!("SVD failed: {e:?}")))?;
    let (s, u, v) = (svd.S(), svd.U(), svd.V());
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| s[j].re.total_cmp(&s[i].re));
    Ok(Svd {
        sigma: order.iter().map(|&i| s[i].re).collect(),
        u: CMatrix::from_fn(r, k, |i, j| u[(i, order[j])]),
        v: CMatrix::from_fn(c, k, |i, j| v[(i, order[j])]),
    })
}

/// Singular values of `a` in descending order.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    thin_svd(a).map(|s| s.sigma).unwrap_or_default()
}

/// Thin SVD keeping only the left factor. Returns `(sigma, U)` with columns
/// ordered by descending singular value.
pub fn left_singular(a: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let svd = thin_svd(a)?;
    Ok((svd.sigma, svd.u))
}

/// Minimum-norm least-squares solution of `a x = b` via the pseudo-inverse,
/// discarding singular values below `RANK_TOL * sigma_max`.
pub fn lstsq(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if a.nrows() != b.nrows() {
        return Err(Error::LengthMismatch {
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    let svd = thin_svd(a)?;
    let smax = svd.sigma.first().copied().unwrap_or(0.0);
    if !(smax > 0.0) {
        return Ok(CMatrix::zeros(a.ncols(), b.ncols()));
    }
    let mut coeff = svd.u.adjoint() * b;
    for (i, &s) in svd.sigma.iter().enumerate() {
        let scale = if s > RANK_TOL * smax { 1.0 / s } else { 0.0 };
        coeff.row_mut(i).scale_mut(scale);
    }
    Ok(svd.v * coeff)
}

pub fn lstsq_vec(a: &CMatrix, b: &[Complex64]) -> Result<Vec<Complex64>> {
    let rhs = CMatrix::from_column_slice(b.len(), 1, b);
    Ok(lstsq(a, &rhs)?.column(0).iter().copied().collect())
}

/// Eigenvalues of a square complex matrix.
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<Complex64>> {
    if a.nrows() != a.ncols() {
        return Err(Error::LengthMismatch {
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    to_faer(a)
        .eigenvalues()
        .map_err(|e| Error::Numerical(format!("eigenvalue iteration failed: {e:?}")))
}
