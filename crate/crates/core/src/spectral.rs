//! Graph Fourier machinery: eigendecomposition of a symmetric shift operator,
//! spectral support of an input, and Vandermonde matrices in the eigenvalues.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graph::{max_asymmetry, Gso};

/// Eigendecomposition `S = V diag(λ) U` with `U = V⁻¹` (here `Vᵀ`).
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    eigenvalues: DVector<f64>,
    v: DMatrix<f64>,
    u: DMatrix<f64>,
    tol_lambda: f64,
    /// Cluster id of every eigenvalue; ids are assigned in ascending order.
    cluster: Vec<usize>,
}

impl SpectralBasis {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn u(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn tol_lambda(&self) -> f64 {
        self.tol_lambda
    }

    /// Number of distinct eigenvalues `N_S` (degree of the minimal polynomial).
    pub fn n_distinct(&self) -> usize {
        self.cluster.last().map_or(0, |c| c + 1)
    }

    pub fn cluster_ids(&self) -> &[usize] {
        &self.cluster
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0_f64, |a, l| a.max(l.abs()))
    }

    /// Graph Fourier transform `x̃ = U x`.
    pub fn forward(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.u * x
    }

    /// Inverse transform `x = V x̃`.
    pub fn inverse(&self, x_hat: &DVector<f64>) -> DVector<f64> {
        &self.v * x_hat
    }

    /// Eigenvalues at the given indices.
    pub fn eigenvalues_at(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().map(|&i| self.eigenvalues[i]).collect()
    }
}

/// Default eigenvalue-coincidence tolerance: `1e-9 * max(1, ρ(S))`.
pub fn default_tol_lambda(spectral_radius: f64) -> f64 {
    1e-9 * spectral_radius.max(1.0)
}

/// Eigendecomposition of a symmetric shift operator with eigenvalues sorted
/// ascending and each eigenvector's largest-magnitude entry made positive.
pub fn eigendecompose(gso: &Gso) -> Result<SpectralBasis> {
    if !gso.is_symmetric() {
        return Err(Error::NonSymmetric(max_asymmetry(gso.matrix())));
    }
    let s = gso.matrix();
    let n = gso.n();
    let eig = SymmetricEigen::try_new(s.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::EigFailure("symmetric QR iteration did not converge".into()))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut v = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).into_owned();
        let pivot = col.iter().copied().fold(0.0_f64, |best, x| if x.abs() > best.abs() { x } else { best });
        if pivot < 0.0 {
            col.neg_mut();
        }
        v.set_column(dst, &col);
    }
    let u = v.transpose();

    let s_norm = s.norm();
    let residual = (s * &v - &v * DMatrix::from_diagonal(&eigenvalues)).norm();
    if residual > 1e-8 * s_norm.max(f64::MIN_POSITIVE) {
        return Err(Error::EigFailure(format!("eigen-residual {residual:.3e} too large")));
    }
    let orth = (&u * &v - DMatrix::identity(n, n)).norm();
    if orth > 1e-8 * (n as f64).sqrt() {
        return Err(Error::EigFailure(format!("eigenvectors not orthonormal ({orth:.3e})")));
    }

    let radius = eigenvalues.iter().fold(0.0_f64, |a, l| a.max(l.abs()));
    let tol_lambda = default_tol_lambda(radius);
    let cluster = cluster_sorted(eigenvalues.as_slice(), tol_lambda);
    Ok(SpectralBasis { eigenvalues, v, u, tol_lambda, cluster })
}

/// Chains ascending values into clusters whose consecutive gaps are within `tol`.
fn cluster_sorted(values: &[f64], tol: f64) -> Vec<usize> {
    let mut out = Vec::with_capacity(values.len());
    let mut id = 0;
    for (i, &val) in values.iter().enumerate() {
        if i > 0 && val - values[i - 1] > tol {
            id += 1;
        }
        out.push(id);
    }
    out
}

/// Index sets `Ω₁ ⊇ Ω₂` describing which graph frequencies an input excites.
/// Indices are 0-based positions in the ascending spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSupport {
    pub omega1: Vec<usize>,
    pub omega2: Vec<usize>,
    pub tol_x: f64,
    pub tol_lambda: f64,
}

impl SpectralSupport {
    /// Builds a support directly from `Ω₁`, deriving `Ω₂` by dropping
    /// (near-)zero eigenvalues.
    pub fn from_omega1(omega1: Vec<usize>, basis: &SpectralBasis) -> Self {
        let tol_lambda = basis.tol_lambda();
        let omega2 = omega1.iter().copied().filter(|&i| basis.eigenvalues()[i].abs() > tol_lambda).collect();
        Self { omega1, omega2, tol_x: 0.0, tol_lambda }
    }
}

/// Computes `Ω₁` (excited, one representative per distinct eigenvalue, the
/// smallest index wins) and `Ω₂` (`Ω₁` without zero eigenvalues).
///
/// `tol_x` defaults to `1e-9·‖x̃‖∞`, `tol_lambda` to the basis tolerance.
pub fn spectral_support(
    x_hat: &DVector<f64>,
    basis: &SpectralBasis,
    tol_x: Option<f64>,
    tol_lambda: Option<f64>,
) -> Result<SpectralSupport> {
    let n = basis.n();
    if x_hat.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: x_hat.len() });
    }
    let tol_x = tol_x.unwrap_or_else(|| 1e-9 * x_hat.amax());
    let tol_lambda = tol_lambda.unwrap_or(basis.tol_lambda());
    let clusters = if tol_lambda == basis.tol_lambda() {
        basis.cluster_ids().to_vec()
    } else {
        cluster_sorted(basis.eigenvalues().as_slice(), tol_lambda)
    };

    let mut taken = vec![false; clusters.last().map_or(0, |c| c + 1)];
    let mut omega1 = Vec::new();
    for i in 0..n {
        if x_hat[i].abs() > tol_x && !taken[clusters[i]] {
            taken[clusters[i]] = true;
            omega1.push(i);
        }
    }
    let omega2 = omega1.iter().copied().filter(|&i| basis.eigenvalues()[i].abs() > tol_lambda).collect();
    Ok(SpectralSupport { omega1, omega2, tol_x, tol_lambda })
}

/// `len(λ) × order` Vandermonde matrix with entry `(i, j) = λ_i^j`.
pub fn vandermonde(lambda: &[f64], order: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(lambda.len(), order);
    for (i, &l) in lambda.iter().enumerate() {
        let mut p = 1.0;
        for j in 0..order {
            m[(i, j)] = p;
            p *= l;
        }
    }
    m
}

/// Block-diagonal stack of `vandermonde(λ, L_m)` blocks: `M·n × ΣL_m`.
pub fn block_diag_vandermonde(lambda: &[f64], orders: &[usize]) -> DMatrix<f64> {
    let n = lambda.len();
    let total: usize = orders.iter().sum();
    let mut out = DMatrix::zeros(n * orders.len(), total);
    let mut col = 0;
    for (m, &order) in orders.iter().enumerate() {
        out.view_mut((m * n, col), (n, order)).copy_from(&vandermonde(lambda, order));
        col += order;
    }
    out
}
