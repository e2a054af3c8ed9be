//! Identifiability predicates for synthetic instances.
//!
//! Every check here needs the true filter coefficients, so these are
//! diagnostics for simulated data and play no part in blind recovery.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::filters::{check_increasing, poly_eval, FilterBank, IncrementBank, SharedRoot};
use crate::linalg::singular_values;
use crate::spectral::{SpectralBasis, SpectralSupport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated,
    /// The condition is not defined for this instance (fewer than two filters).
    Inapplicable,
}

impl Verdict {
    fn from_bool(b: bool) -> Self {
        if b {
            Verdict::Holds
        } else {
            Verdict::Violated
        }
    }

    pub fn holds(self) -> bool {
        self == Verdict::Holds
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentifiabilityReport {
    /// Sufficient condition on spectral richness and shared roots.
    pub sufficient: Verdict,
    /// `Holds` when some necessary condition fails, i.e. the instance is
    /// provably unidentifiable.
    pub necessary_violated: Verdict,
    /// The structured matrix has a one-dimensional null space.
    pub exact: bool,
    pub null_dim: usize,
    pub shared_roots: Vec<SharedRoot>,
    pub omega1: usize,
    pub omega2: usize,
}

/// Numerical null-space dimension after scaling every nonzero column to unit
/// norm. Singular values at or below `rel_tol·σ_max` count as zero;
/// `rel_tol` defaults to `max(rows, cols)·ε`.
pub fn numerical_null_dim(a: &DMatrix<f64>, rel_tol: Option<f64>) -> Result<usize> {
    let (rows, cols) = a.shape();
    if cols == 0 {
        return Ok(0);
    }
    if rows == 0 {
        return Ok(cols);
    }
    let mut scaled = a.clone();
    for mut col in scaled.column_iter_mut() {
        let n = col.norm();
        if n > 0.0 {
            col /= n;
        }
    }
    let sv = singular_values(&scaled)?;
    let sigma_max = sv.max();
    let tol = rel_tol.unwrap_or(rows.max(cols) as f64 * f64::EPSILON) * sigma_max;
    let rank = sv.iter().filter(|&&s| s > tol).count();
    Ok(cols - rank)
}

fn bank_size_ok(bank: &FilterBank) -> bool {
    bank.len() >= 2
}

/// Holds iff `|Ω₁| ≥ L_max + L_min − 1` and no root is shared by every filter.
pub fn check_sufficient_multi(bank: &FilterBank, support: &SpectralSupport) -> Result<Verdict> {
    if !bank_size_ok(bank) {
        return Ok(Verdict::Inapplicable);
    }
    let orders = bank.orders();
    let l_max = *orders.iter().max().expect("non-empty");
    let l_min = *orders.iter().min().expect("non-empty");
    let rich = support.omega1.len() + 1 >= l_max + l_min;
    Ok(Verdict::from_bool(rich && bank.common_roots(None)?.is_empty()))
}

/// Holds (unidentifiable) iff `|Ω₁| < L_max`, a root is shared by every
/// filter, or `(M − 1)|Ω₁| < ΣL_m − 1`.
pub fn check_necessary_multi(bank: &FilterBank, support: &SpectralSupport) -> Result<Verdict> {
    if !bank_size_ok(bank) {
        return Ok(Verdict::Inapplicable);
    }
    let orders = bank.orders();
    let k = support.omega1.len();
    let l_max = *orders.iter().max().expect("non-empty");
    let total: usize = orders.iter().sum();
    let poor = k < l_max || (bank.len() - 1) * k + 1 < total;
    Ok(Verdict::from_bool(poor || !bank.common_roots(None)?.is_empty()))
}

/// Stacks, for every point `z_i`, the `M` rows `[0 … p(z_i) … 0 | Z(z_i)]`
/// where `p(z_i)` holds each polynomial at `z_i` and `Z(z_i)` is block
/// diagonal with rows `[1, z_i, …, z_i^{len−1}]`.
fn structured_matrix(polys: &[&[f64]], block_lens: &[usize], points: &[f64]) -> DMatrix<f64> {
    let m = polys.len();
    let k = points.len();
    let total: usize = block_lens.iter().sum();
    let mut out = DMatrix::zeros(m * k, k + total);
    for (i, &z) in points.iter().enumerate() {
        let mut col = k;
        for (b, (p, &len)) in polys.iter().zip(block_lens).enumerate() {
            let row = i * m + b;
            out[(row, i)] = poly_eval(p, z);
            let mut pow = 1.0;
            for j in 0..len {
                out[(row, col + j)] = pow;
                pow *= z;
            }
            col += len;
        }
    }
    out
}

/// The `M|Ω₁| × (|Ω₁| + ΣL_m)` matrix whose null space contains
/// `[1, …, 1, −hᵀ]ᵀ`.
pub fn exact_matrix_multi(bank: &FilterBank, points: &[f64]) -> DMatrix<f64> {
    let polys: Vec<&[f64]> = bank.filters().iter().map(|f| f.coeffs()).collect();
    structured_matrix(&polys, &bank.orders(), points)
}

/// The `M|Ω₂| × (|Ω₂| + L_M)` matrix built from the increments, whose null
/// space contains `[1, …, 1, −dᵀ]ᵀ`.
pub fn exact_matrix_single(bank: &IncrementBank, points: &[f64]) -> DMatrix<f64> {
    structured_matrix(&bank.increments(), &bank.increment_lengths(), points)
}

/// `(null_dim == 1, null_dim)` of the multi-filter structured matrix over `Ω₁`.
pub fn exact_test_multi(
    bank: &FilterBank,
    support: &SpectralSupport,
    basis: &SpectralBasis,
    rel_tol: Option<f64>,
) -> Result<(bool, usize)> {
    if support.omega1.is_empty() {
        return Err(Error::EmptySupport);
    }
    let a = exact_matrix_multi(bank, &basis.eigenvalues_at(&support.omega1));
    let null_dim = numerical_null_dim(&a, rel_tol)?;
    Ok((null_dim == 1, null_dim))
}

/// All multi-filter checks in one report.
pub fn check_multi(
    bank: &FilterBank,
    support: &SpectralSupport,
    basis: &SpectralBasis,
) -> Result<IdentifiabilityReport> {
    let (exact, null_dim) = exact_test_multi(bank, support, basis, None)?;
    Ok(IdentifiabilityReport {
        sufficient: check_sufficient_multi(bank, support)?,
        necessary_violated: check_necessary_multi(bank, support)?,
        exact,
        null_dim,
        shared_roots: bank.common_roots(None)?,
        omega1: support.omega1.len(),
        omega2: support.omega2.len(),
    })
}

/// Checks for nested filters observed from one process.
///
/// Sufficient: `|Ω₂| ≥ L̄_max + L̄_min − 1` over the increment lengths and no
/// root shared by every increment polynomial. Unidentifiable when
/// `min{L₁, |Ω₁|} + Σ min{L_m − L_{m−1}, |Ω₂|} < L_M`, when the increments
/// share a root, or when `(M − 1)|Ω₂| < L_M − 1`. The exact test uses the
/// increment structured matrix over `Ω₂`.
pub fn check_single(
    bank: &IncrementBank,
    support: &SpectralSupport,
    basis: &SpectralBasis,
) -> Result<IdentifiabilityReport> {
    check_increasing(bank.orders())?;
    let m = bank.len();
    let k1 = support.omega1.len();
    let k2 = support.omega2.len();
    let lens = bank.increment_lengths();
    let l_last = *bank.orders().last().expect("checked");
    let shared_roots = bank.common_increment_roots(None)?;

    let (sufficient, necessary_violated) = if m < 2 {
        (Verdict::Inapplicable, Verdict::Inapplicable)
    } else {
        let bar_max = *lens.iter().max().expect("non-empty");
        let bar_min = *lens.iter().min().expect("non-empty");
        let sufficient = Verdict::from_bool(k2 + 1 >= bar_max + bar_min && shared_roots.is_empty());
        let reachable = lens[0].min(k1) + lens[1..].iter().map(|&l| l.min(k2)).sum::<usize>();
        let poor = reachable < l_last || (m - 1) * k2 + 1 < l_last;
        (sufficient, Verdict::from_bool(poor || !shared_roots.is_empty()))
    };

    let a = exact_matrix_single(bank, &basis.eigenvalues_at(&support.omega2));
    let null_dim = numerical_null_dim(&a, None)?;
    Ok(IdentifiabilityReport {
        sufficient,
        necessary_violated,
        exact: null_dim == 1,
        null_dim,
        shared_roots,
        omega1: k1,
        omega2: k2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Gso;
    use crate::spectral::eigendecompose;
    use nalgebra::DVector;

    fn path_basis(n: usize) -> SpectralBasis {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
        eigendecompose(&Gso::from_edges(n, &edges).unwrap()).unwrap()
    }

    fn full(basis: &SpectralBasis) -> SpectralSupport {
        SpectralSupport::from_omega1((0..basis.n()).collect(), basis)
    }

    #[test]
    fn truth_is_in_null_space() {
        let basis = path_basis(7);
        let bank = FilterBank::from_coeffs(vec![vec![1.0, 0.3, -0.2], vec![0.5, -1.0, 0.7]]).unwrap();
        let pts = basis.eigenvalues_at(&(0..7).collect::<Vec<_>>());
        let a = exact_matrix_multi(&bank, &pts);
        assert_eq!(a.shape(), (14, 13));
        let mut v = vec![1.0; 7];
        v.extend(bank.stacked().iter().map(|c| -c));
        assert!((a * DVector::from_vec(v)).norm() < 1e-12);
    }

    #[test]
    fn boundaries() {
        let basis = path_basis(8);
        let bank = FilterBank::from_coeffs(vec![vec![1.0, 0.3, -0.2], vec![0.5, -1.0, 0.7]]).unwrap();
        // L_max + L_min - 1 = 5
        let s5 = SpectralSupport::from_omega1((0..5).collect(), &basis);
        let s4 = SpectralSupport::from_omega1((0..4).collect(), &basis);
        let s3 = SpectralSupport::from_omega1((0..3).collect(), &basis);
        let s2 = SpectralSupport::from_omega1((0..2).collect(), &basis);
        assert_eq!(check_sufficient_multi(&bank, &s5).unwrap(), Verdict::Holds);
        assert_eq!(check_sufficient_multi(&bank, &s4).unwrap(), Verdict::Violated);
        // (M-1)|Ω₁| < ΣL - 1 = 5 still flags at |Ω₁| = 4
        assert_eq!(check_necessary_multi(&bank, &s4).unwrap(), Verdict::Holds);
        assert_eq!(check_necessary_multi(&bank, &s5).unwrap(), Verdict::Violated);
        assert_eq!(check_necessary_multi(&bank, &s2).unwrap(), Verdict::Holds);
        assert!(exact_test_multi(&bank, &s5, &basis, None).unwrap().0);
        assert!(!exact_test_multi(&bank, &s3, &basis, None).unwrap().0);
    }

    #[test]
    fn shared_root_gives_second_null_vector() {
        let basis = path_basis(9);
        let z0 = 0.37;
        let q = [vec![1.0, 0.4], vec![-0.3, 1.2], vec![0.8, 0.1]];
        // multiply each q by (z - z0)
        let coeffs: Vec<Vec<f64>> = q.iter().map(|c| vec![-z0 * c[0], c[0] - z0 * c[1], c[1]]).collect();
        let bank = FilterBank::from_coeffs(coeffs).unwrap();
        let support = full(&basis);
        assert_eq!(check_sufficient_multi(&bank, &support).unwrap(), Verdict::Violated);
        assert_eq!(check_necessary_multi(&bank, &support).unwrap(), Verdict::Holds);
        let (exact, dim) = exact_test_multi(&bank, &support, &basis, None).unwrap();
        assert!(!exact && dim >= 2);

        // explicit second null vector: g_i = (z_i - z0') / (z_i - z0)
        let z1 = -1.1;
        let pts = basis.eigenvalues_at(&support.omega1);
        let mut v: Vec<f64> = pts.iter().map(|z| (z - z1) / (z - z0)).collect();
        for c in &q {
            v.extend([z1 * c[0], -(c[0] - z1 * c[1]), -c[1]]);
        }
        let a = exact_matrix_multi(&bank, &pts);
        assert!((a * DVector::from_vec(v)).norm() < 1e-10);
    }

    #[test]
    fn single_checks() {
        let basis = path_basis(9);
        let inc = IncrementBank::new(vec![1.0, -0.4, 0.3, 0.9, -0.2, 0.6, 0.1, -0.8], vec![4, 8]).unwrap();
        let report = check_single(&inc, &full(&basis), &basis).unwrap();
        assert!(report.exact);
        assert_eq!(report.null_dim, 1);
        assert_eq!(report.sufficient, Verdict::Holds);
        assert_eq!(report.necessary_violated, Verdict::Violated);

        let small = SpectralSupport::from_omega1((0..3).collect(), &basis);
        let report = check_single(&inc, &small, &basis).unwrap();
        assert_eq!(report.necessary_violated, Verdict::Holds);
        assert!(!report.exact);
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("\"necessary_violated\":\"holds\""));
    }

    #[test]
    fn rescaling_one_filter_keeps_null_dim() {
        let basis = path_basis(8);
        let c1 = vec![1.0, 0.3, -0.2, 0.5];
        let c2 = vec![0.5, -1.0, 0.7, 0.2];
        let support = SpectralSupport::from_omega1((0..5).collect(), &basis);
        let a = FilterBank::from_coeffs(vec![c1.clone(), c2.clone()]).unwrap();
        let b = FilterBank::from_coeffs(vec![c1, c2.iter().map(|c| c * -7.5).collect()]).unwrap();
        assert_eq!(
            exact_test_multi(&a, &support, &basis, None).unwrap(),
            exact_test_multi(&b, &support, &basis, None).unwrap()
        );
    }

    #[test]
    fn empty_support_rejected() {
        let basis = path_basis(4);
        let bank = FilterBank::from_coeffs(vec![vec![1.0], vec![2.0]]).unwrap();
        let support = SpectralSupport::from_omega1(vec![], &basis);
        assert_eq!(exact_test_multi(&bank, &support, &basis, None), Err(Error::EmptySupport));
    }
}
