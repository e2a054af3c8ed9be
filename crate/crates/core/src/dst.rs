//! Cross-relation systems. Filter outputs driven by one input satisfy
//! `h̃⁽ⁿ⁾ ∘ ỹ⁽ᵐ⁾ = h̃⁽ᵐ⁾ ∘ ỹ⁽ⁿ⁾` for every pair; stacking every pair with the
//! data selection transform gives a matrix whose null space holds the
//! coefficients.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::check_increasing;
use crate::spectral::{vandermonde, SpectralBasis};

/// Observed outputs and their graph Fourier transforms.
#[derive(Debug, Clone)]
pub struct ObservationSet {
    outputs: Vec<DVector<f64>>,
    spectral: Vec<DVector<f64>>,
}

impl ObservationSet {
    pub fn new(outputs: Vec<DVector<f64>>, basis: &SpectralBasis) -> Result<Self> {
        if outputs.len() < 2 {
            return Err(Error::FewerThanTwoBlocks(outputs.len()));
        }
        if let Some(bad) = outputs.iter().find(|y| y.len() != basis.n()) {
            return Err(Error::LengthMismatch { expected: basis.n(), got: bad.len() });
        }
        let spectral = outputs.iter().map(|y| basis.forward(y)).collect();
        Ok(Self { outputs, spectral })
    }

    pub fn outputs(&self) -> &[DVector<f64>] {
        &self.outputs
    }

    /// `ỹ⁽ᵐ⁾ = U y⁽ᵐ⁾`.
    pub fn spectral(&self) -> &[DVector<f64>] {
        &self.spectral
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    /// `Ỹ⁽ᵐ⁾ = diag(ỹ⁽ᵐ⁾)`.
    pub fn diag_blocks(&self) -> Vec<DMatrix<f64>> {
        self.spectral.iter().map(DMatrix::from_diagonal).collect()
    }
}

/// Filter pairs in data-selection order: (0,1), (0,2), (1,2), (0,3), …
pub fn pair_order(m: usize) -> Vec<(usize, usize)> {
    (1..m).flat_map(|hi| (0..hi).map(move |lo| (lo, hi))).collect()
}

/// Data selection transform of `M ≥ 2` equally tall blocks.
///
/// The block row of pair `(j, m)` holds `A_m` in column block `j` and `−A_j`
/// in column block `m`, so `dst·[h⁽¹⁾; …; h⁽ᴹ⁾] = 0` encodes every cross
/// relation.
pub fn dst(blocks: &[DMatrix<f64>]) -> Result<DMatrix<f64>> {
    if blocks.len() < 2 {
        return Err(Error::FewerThanTwoBlocks(blocks.len()));
    }
    let rows = blocks[0].nrows();
    if let Some(b) = blocks.iter().find(|b| b.nrows() != rows) {
        return Err(Error::DimensionMismatch(format!("block with {} rows, expected {rows}", b.nrows())));
    }
    let col_off: Vec<usize> = blocks
        .iter()
        .scan(0, |acc, b| {
            let off = *acc;
            *acc += b.ncols();
            Some(off)
        })
        .collect();
    let total_cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let pairs = pair_order(blocks.len());
    let mut out = DMatrix::zeros(pairs.len() * rows, total_cols);
    for (r, &(j, m)) in pairs.iter().enumerate() {
        out.view_mut((r * rows, col_off[j]), (rows, blocks[j].ncols())).copy_from(&blocks[m]);
        out.view_mut((r * rows, col_off[m]), (rows, blocks[m].ncols())).copy_from(&(-&blocks[j]));
    }
    Ok(out)
}

/// Which coefficient model the system is built for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum SystemVariant {
    /// Independent filters of known orders `L_m` (block-diagonal `Ψ`).
    MultiKnown { orders: Vec<usize> },
    /// Independent filters with overshoot orders `Q_m` (block-diagonal `Θ`).
    MultiOvershoot { orders: Vec<usize> },
    /// Nested filters of known, strictly increasing orders (`Ψ̄`).
    SingleKnown { orders: Vec<usize> },
    /// Nested filters with overshoot orders (lower block-triangular `Θ̄`).
    SingleOvershoot { orders: Vec<usize> },
}

impl SystemVariant {
    pub fn orders(&self) -> &[usize] {
        match self {
            SystemVariant::MultiKnown { orders }
            | SystemVariant::MultiOvershoot { orders }
            | SystemVariant::SingleKnown { orders }
            | SystemVariant::SingleOvershoot { orders } => orders,
        }
    }

    pub fn is_single(&self) -> bool {
        matches!(self, SystemVariant::SingleKnown { .. } | SystemVariant::SingleOvershoot { .. })
    }

    pub fn n_columns(&self) -> usize {
        match self {
            SystemVariant::SingleKnown { orders } => orders.last().copied().unwrap_or(0),
            other => other.orders().iter().sum(),
        }
    }

    /// The coefficient map stacking `M` blocks of `n` rows: `Ψ`, `Θ`, `Ψ̄` or `Θ̄`.
    pub fn coefficient_map(&self, lambda: &[f64]) -> Result<DMatrix<f64>> {
        let orders = self.orders();
        if orders.is_empty() || orders.contains(&0) {
            return Err(Error::InvalidParams(format!("orders {orders:?} must be non-empty and positive")));
        }
        let n = lambda.len();
        let m = orders.len();
        let mut out = DMatrix::zeros(n * m, self.n_columns());
        match self {
            SystemVariant::MultiKnown { .. } | SystemVariant::MultiOvershoot { .. } => {
                let mut col = 0;
                for (b, &q) in orders.iter().enumerate() {
                    out.view_mut((b * n, col), (n, q)).copy_from(&vandermonde(lambda, q));
                    col += q;
                }
            }
            SystemVariant::SingleKnown { .. } => {
                check_increasing(orders)?;
                for (b, &l) in orders.iter().enumerate() {
                    out.view_mut((b * n, 0), (n, l)).copy_from(&vandermonde(lambda, l));
                }
            }
            SystemVariant::SingleOvershoot { .. } => {
                let blocks: Vec<DMatrix<f64>> = orders.iter().map(|&q| vandermonde(lambda, q)).collect();
                for row in 0..m {
                    let mut col = 0;
                    for (k, block) in blocks.iter().enumerate() {
                        if k <= row {
                            out.view_mut((row * n, col), (n, block.ncols())).copy_from(block);
                        }
                        col += block.ncols();
                    }
                }
            }
        }
        Ok(out)
    }

    /// `(block, power)` of every column. For `SingleKnown` the block is the
    /// increment the coefficient belongs to.
    pub fn column_map(&self) -> Vec<(usize, usize)> {
        match self {
            SystemVariant::SingleKnown { orders } => {
                let mut out = Vec::new();
                let mut prev = 0;
                for (b, &l) in orders.iter().enumerate() {
                    out.extend((prev..l).map(|p| (b, p)));
                    prev = l;
                }
                out
            }
            other => other.orders().iter().enumerate().flat_map(|(b, &q)| (0..q).map(move |p| (b, p))).collect(),
        }
    }
}

/// An assembled cross-relation matrix with the maps back to filter pairs
/// (block rows) and coefficients (columns).
#[derive(Debug, Clone)]
pub struct CrossRelationSystem {
    pub matrix: DMatrix<f64>,
    /// Filter pair of every block row of `n` rows.
    pub row_map: Vec<(usize, usize)>,
    pub col_map: Vec<(usize, usize)>,
    pub variant: SystemVariant,
    pub block_rows: usize,
}

impl CrossRelationSystem {
    /// `‖A v‖₂`.
    pub fn residual(&self, coeffs: &DVector<f64>) -> f64 {
        (&self.matrix * coeffs).norm()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.matrix.row_iter() {
            let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }
}

/// `dst({Ỹ⁽ᵐ⁾}) · (Ψ | Θ | Ψ̄ | Θ̄)`.
pub fn build_system(
    obs: &ObservationSet,
    basis: &SpectralBasis,
    variant: &SystemVariant,
) -> Result<CrossRelationSystem> {
    let orders = variant.orders();
    if orders.len() != obs.len() {
        return Err(Error::LengthMismatch { expected: obs.len(), got: orders.len() });
    }
    if let SystemVariant::SingleKnown { orders } = variant {
        check_increasing(orders)?;
    }
    let coeff_map = variant.coefficient_map(basis.eigenvalues().as_slice())?;
    let selection = dst(&obs.diag_blocks())?;
    Ok(CrossRelationSystem {
        matrix: selection * coeff_map,
        row_map: pair_order(obs.len()),
        col_map: variant.column_map(),
        variant: variant.clone(),
        block_rows: basis.n(),
    })
}
