//! Known-order recovery: the unit-norm minimizer of `‖A h‖₂` is the right
//! singular vector of the smallest singular value. In the noiseless case it
//! spans the null space whenever that null space is one-dimensional.

use nalgebra::{DMatrix, DVector};

use crate::dst::CrossRelationSystem;
use crate::error::{Error, Result};
use crate::filters::check_increasing;
use crate::linalg::full_svd;

/// Recovery is declared successful below this alignment error.
pub const DEFAULT_SUCCESS_THRESHOLD: f64 = 0.01;

/// `σ_second / σ_max` below this means the null space is numerically at
/// least two-dimensional.
pub const AMBIGUOUS_NULL_SPACE: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct RecoveryResult {
    /// Unit-norm estimate, sign fixed so its largest-magnitude entry is positive.
    pub estimate: DVector<f64>,
    pub sigma_min: f64,
    pub sigma_second: f64,
    pub sigma_max: f64,
    /// False when the two smallest singular values are both negligible.
    pub identifiable: bool,
    pub error: Option<f64>,
    pub success: Option<bool>,
}

impl RecoveryResult {
    /// Scores the estimate against ground truth with [`alignment_error`].
    pub fn evaluate(&mut self, truth: &DVector<f64>, threshold: f64) -> Result<f64> {
        let err = alignment_error(&self.estimate, truth)?;
        self.error = Some(err);
        self.success = Some(err < threshold);
        Ok(err)
    }

    /// `σ_min / σ_second`; small values indicate a well-separated null vector.
    pub fn gap_ratio(&self) -> f64 {
        if self.sigma_second > 0.0 {
            self.sigma_min / self.sigma_second
        } else {
            1.0
        }
    }
}

/// Singular values (ascending) and matching right singular vectors of `a`.
/// Short matrices get zero singular values for the trailing right vectors.
pub(crate) fn right_singular_pairs(a: &DMatrix<f64>) -> Result<Vec<(f64, DVector<f64>)>> {
    if a.ncols() == 0 {
        return Err(Error::DimensionMismatch("matrix has no columns".into()));
    }
    let svd = full_svd(a)?;
    let mut pairs: Vec<(f64, DVector<f64>)> = (0..a.ncols())
        .map(|i| (svd.singular_values.get(i).copied().unwrap_or(0.0), svd.v_t.row(i).transpose()))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs)
}

fn fix_sign(mut v: DVector<f64>) -> DVector<f64> {
    let pivot = v.iter().copied().fold(0.0_f64, |best, x| if x.abs() > best.abs() { x } else { best });
    if pivot < 0.0 {
        v.neg_mut();
    }
    v
}

/// Minimizes `‖A h‖₂` subject to `‖h‖₂ = 1`.
pub fn solve_nullspace_matrix(a: &DMatrix<f64>) -> Result<RecoveryResult> {
    let pairs = right_singular_pairs(a)?;
    let sigma_min = pairs[0].0;
    let sigma_second = pairs.get(1).map_or(f64::INFINITY, |p| p.0);
    let sigma_max = pairs.last().expect("non-empty").0;
    let identifiable = pairs.len() == 1 || sigma_second > AMBIGUOUS_NULL_SPACE * sigma_max;
    let estimate = fix_sign(pairs[0].1.normalize());
    Ok(RecoveryResult { estimate, sigma_min, sigma_second, sigma_max, identifiable, error: None, success: None })
}

pub fn solve_nullspace(system: &CrossRelationSystem) -> Result<RecoveryResult> {
    solve_nullspace_matrix(&system.matrix)
}

/// `‖ĥ − h‖₂ / ‖h‖₂` after rescaling `ĥ` to `‖h‖₂` and flipping its sign so
/// that `ĥᵀh ≥ 0`. A zero estimate scores 1.
pub fn alignment_error(estimate: &DVector<f64>, truth: &DVector<f64>) -> Result<f64> {
    if estimate.len() != truth.len() {
        return Err(Error::LengthMismatch { expected: truth.len(), got: estimate.len() });
    }
    let t_norm = truth.norm();
    if t_norm == 0.0 {
        return Err(Error::ZeroTruth);
    }
    let e_norm = estimate.norm();
    if e_norm == 0.0 {
        return Ok(1.0);
    }
    let sign = if estimate.dot(truth) < 0.0 { -1.0 } else { 1.0 };
    let aligned = estimate * (sign * t_norm / e_norm);
    Ok((aligned - truth).norm() / t_norm)
}

/// Splits `d = h⁽ᴹ⁾` into the nested filters `h⁽ᵐ⁾ = d[..L_m]`.
pub fn reconstruct_single(d: &DVector<f64>, orders: &[usize]) -> Result<Vec<DVector<f64>>> {
    check_increasing(orders)?;
    let last = *orders.last().expect("checked non-empty");
    if d.len() != last {
        return Err(Error::LengthMismatch { expected: last, got: d.len() });
    }
    Ok(orders.iter().map(|&l| d.rows(0, l).into_owned()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn explicit_null_space() {
        let r = solve_nullspace_matrix(&DMatrix::from_row_slice(1, 2, &[1.0, -1.0])).unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert_abs_diff_eq!(r.estimate[0], s, epsilon = 1e-14);
        assert_abs_diff_eq!(r.estimate[1], s, epsilon = 1e-14);
        assert!(r.sigma_min < 1e-14);
        assert!(r.sigma_min <= r.sigma_second);
    }

    #[test]
    fn two_dimensional_null_space_flagged() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 2.0, 0.0, 0.0]);
        let r = solve_nullspace_matrix(&a).unwrap();
        assert!(!r.identifiable);
    }

    #[test]
    fn alignment_examples() {
        let h = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        assert_abs_diff_eq!(alignment_error(&(&h * 2.0), &h).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(alignment_error(&(-&h), &h).unwrap(), 0.0, epsilon = 1e-15);
        let a = DVector::from_vec(vec![1.0, 0.0]);
        let b = DVector::from_vec(vec![0.0, 1.0]);
        assert_abs_diff_eq!(alignment_error(&a, &b).unwrap(), 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(alignment_error(&a, &DVector::zeros(2)), Err(Error::ZeroTruth));
        assert!(matches!(alignment_error(&a, &h), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn reconstruct_prefixes() {
        let d = DVector::from_vec((1..=8).map(f64::from).collect());
        let hs = reconstruct_single(&d, &[2, 4, 6, 8]).unwrap();
        assert_eq!(hs.iter().map(|h| h.len()).collect::<Vec<_>>(), vec![2, 4, 6, 8]);
        for w in hs.windows(2) {
            assert_eq!(w[0].as_slice(), &w[1].as_slice()[..w[0].len()]);
        }
        assert_eq!(reconstruct_single(&d, &[8]).unwrap()[0], d);
        assert!(matches!(reconstruct_single(&d, &[2, 4]), Err(Error::LengthMismatch { .. })));
    }
}
