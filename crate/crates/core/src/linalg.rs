//! Singular value decompositions backed by `faer`, returned as nalgebra types.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Thin SVD `A = U diag(s) Vᵀ` with `s` in non-increasing order.
#[derive(Debug, Clone)]
pub(crate) struct Svd {
    pub u: DMatrix<f64>,
    pub singular_values: DVector<f64>,
    pub v_t: DMatrix<f64>,
}

impl Svd {
    /// Default rank cutoff `max(r, c) · eps · σ_max`.
    pub fn cutoff(&self) -> f64 {
        let dim = self.u.nrows().max(self.v_t.ncols()) as f64;
        dim * f64::EPSILON * self.singular_values.get(0).copied().unwrap_or(0.0)
    }

    /// Pseudo-inverse discarding singular values at or below `tol`.
    pub fn pseudo_inverse(&self, tol: f64) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.v_t.ncols(), self.u.nrows());
        for (k, &s) in self.singular_values.iter().enumerate() {
            if s > tol {
                out += self.v_t.row(k).transpose() * (self.u.column(k).transpose() / s);
            }
        }
        out
    }
}

fn to_faer(a: &DMatrix<f64>) -> faer::Mat<f64> {
    faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn decompose(a: &DMatrix<f64>, thin: bool) -> Result<Svd> {
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::SvdFailure);
    }
    let m = to_faer(a);
    let svd = if thin { m.thin_svd() } else { m.svd() }.map_err(|_| Error::SvdFailure)?;
    let s = svd.S().column_vector();
    Ok(Svd {
        u: from_faer(svd.U()),
        singular_values: DVector::from_fn(s.nrows(), |i, _| s[i]),
        v_t: from_faer(svd.V()).transpose(),
    })
}

pub(crate) fn svd(a: &DMatrix<f64>) -> Result<Svd> {
    decompose(a, true)
}

/// SVD with a square `V` (all right singular vectors), `k = min(r, c)` values.
pub(crate) fn full_svd(a: &DMatrix<f64>) -> Result<Svd> {
    decompose(a, false)
}

pub(crate) fn singular_values(a: &DMatrix<f64>) -> Result<DVector<f64>> {
    Ok(svd(a)?.singular_values)
}

pub(crate) fn spectral_norm(a: &DMatrix<f64>) -> Result<f64> {
    Ok(singular_values(a)?.get(0).copied().unwrap_or(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recomposes() {
        let a = DMatrix::from_fn(7, 4, |i, j| ((i * 3 + j * 5) % 7) as f64 - 2.5 + (i == j) as u8 as f64);
        let s = svd(&a).unwrap();
        let rec = &s.u * DMatrix::from_diagonal(&s.singular_values) * &s.v_t;
        assert!((rec - &a).norm() < 1e-12);
        assert!(s.singular_values.as_slice().windows(2).all(|w| w[0] >= w[1]));
        let pinv = s.pseudo_inverse(s.cutoff());
        assert!((&a * &pinv * &a - &a).norm() < 1e-12);
        let f = full_svd(&a.transpose()).unwrap();
        assert_eq!(f.v_t.shape(), (7, 7));
    }
}
