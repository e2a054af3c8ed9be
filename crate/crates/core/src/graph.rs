//! Graph shift operators and the random graph models used by the experiments.
//!
//! Every generator returns the (symmetric) adjacency matrix of an undirected,
//! connected graph. Disconnected samples are discarded and redrawn.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Resampling budget for connected graphs.
pub const MAX_CONNECTIVITY_ATTEMPTS: usize = 1000;

const KARATE_EDGES: &str = include_str!("../data/karate.edges");

/// A dense real graph shift operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Gso {
    n: usize,
    matrix: DMatrix<f64>,
    symmetric: bool,
}

impl Gso {
    /// Wraps a square matrix; the symmetric flag is set when every pair
    /// satisfies `|S_ij - S_ji| <= 1e-12 * max(1, |S_ij|)`.
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        let (r, c) = matrix.shape();
        if r != c {
            return Err(Error::DimensionMismatch(format!("shift operator is {r}x{c}")));
        }
        if r < 2 {
            return Err(Error::InvalidParams(format!("need at least 2 nodes, got {r}")));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("shift operator has non-finite entries".into()));
        }
        let symmetric = max_asymmetry(&matrix) == 0.0;
        Ok(Self { n: r, matrix, symmetric })
    }

    /// Builds a symmetric adjacency matrix from undirected weighted edges.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut m = DMatrix::zeros(n, n);
        for &(i, j, w) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidParams(format!("edge ({i},{j}) out of range for n={n}")));
            }
            m[(i, j)] = w;
            m[(j, i)] = w;
        }
        Self::from_matrix(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Undirected edges `(i, j, weight)` with `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let w = self.matrix[(i, j)];
                if w != 0.0 {
                    out.push((i, j, w));
                }
            }
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for (v, s) in seen.iter_mut().enumerate() {
                if !*s && (self.matrix[(u, v)] != 0.0 || self.matrix[(v, u)] != 0.0) {
                    *s = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.n
    }

    /// Parses the edge-list format: a header line `n <count>` followed by
    /// `i j [weight]` lines with 0-based ids. Blank lines and `#` comments
    /// are ignored; a missing weight means 1.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut n = None;
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let parse_err = |msg: String| Error::Parse { line: line_no, msg };
            if n.is_none() {
                if fields.len() != 2 || fields[0] != "n" {
                    return Err(parse_err(format!("expected header `n <count>`, got `{line}`")));
                }
                n = Some(fields[1].parse::<usize>().map_err(|e| parse_err(e.to_string()))?);
                continue;
            }
            if !(2..=3).contains(&fields.len()) {
                return Err(parse_err(format!("expected `i j [w]`, got `{line}`")));
            }
            let i = fields[0].parse::<usize>().map_err(|e| parse_err(e.to_string()))?;
            let j = fields[1].parse::<usize>().map_err(|e| parse_err(e.to_string()))?;
            let w = match fields.get(2) {
                Some(s) => s.parse::<f64>().map_err(|e| parse_err(e.to_string()))?,
                None => 1.0,
            };
            edges.push((i, j, w));
        }
        let n = n.ok_or(Error::Parse { line: 0, msg: "missing `n <count>` header".into() })?;
        Self::from_edges(n, &edges)
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = format!("n {}\n", self.n);
        for (i, j, w) in self.edges() {
            if w == 1.0 {
                let _ = writeln!(out, "{i} {j}");
            } else {
                let _ = writeln!(out, "{i} {j} {w}");
            }
        }
        out
    }

    pub fn read_edge_list(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse_edge_list(&std::fs::read_to_string(path)?)
    }

    pub fn write_edge_list(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_edge_list())?;
        Ok(())
    }

    /// Zachary's karate club (34 nodes, 78 edges).
    pub fn karate_club() -> Self {
        Self::parse_edge_list(KARATE_EDGES).expect("bundled karate club edge list is valid")
    }
}

/// Largest `|S_ij - S_ji|` exceeding the relative symmetry tolerance, or 0.
pub(crate) fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (m[(i, j)], m[(j, i)]);
            let diff = (a - b).abs();
            if diff > 1e-12 * a.abs().max(1.0) {
                worst = worst.max(diff);
            }
        }
    }
    worst
}

/// Random graph families. Serialized with a `model` tag so scenario files can
/// embed them directly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum GraphModel {
    ErdosRenyi {
        n: usize,
        p: f64,
    },
    /// Ring lattice of even `mean_degree` with per-edge rewiring.
    WattsStrogatz {
        n: usize,
        mean_degree: usize,
        rewire_p: f64,
    },
    /// `blocks` lists the block sizes; they must sum to `n`.
    StochasticBlock {
        n: usize,
        blocks: Vec<usize>,
        p_within: f64,
        p_across: f64,
    },
    WeightedErdosRenyi {
        n: usize,
        p: f64,
        w_lo: f64,
        w_hi: f64,
    },
    KarateClub,
}

impl GraphModel {
    pub fn n(&self) -> usize {
        match self {
            GraphModel::ErdosRenyi { n, .. }
            | GraphModel::WattsStrogatz { n, .. }
            | GraphModel::StochasticBlock { n, .. }
            | GraphModel::WeightedErdosRenyi { n, .. } => *n,
            GraphModel::KarateClub => 34,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!("{name} = {p} is not a probability")))
            }
        };
        let nodes = |n: usize| {
            if n >= 2 {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!("n = {n} must be at least 2")))
            }
        };
        match self {
            GraphModel::ErdosRenyi { n, p } => {
                nodes(*n)?;
                prob("p", *p)
            }
            GraphModel::WattsStrogatz { n, mean_degree, rewire_p } => {
                nodes(*n)?;
                prob("rewire_p", *rewire_p)?;
                if *mean_degree == 0 || mean_degree % 2 != 0 || *mean_degree >= *n {
                    return Err(Error::InvalidParams(format!(
                        "mean_degree = {mean_degree} must be even, positive and below n = {n}"
                    )));
                }
                Ok(())
            }
            GraphModel::StochasticBlock { n, blocks, p_within, p_across } => {
                nodes(*n)?;
                prob("p_within", *p_within)?;
                prob("p_across", *p_across)?;
                if blocks.is_empty() || blocks.contains(&0) || blocks.iter().sum::<usize>() != *n {
                    return Err(Error::InvalidParams(format!(
                        "block sizes {blocks:?} must be positive and sum to n = {n}"
                    )));
                }
                Ok(())
            }
            GraphModel::WeightedErdosRenyi { n, p, w_lo, w_hi } => {
                nodes(*n)?;
                prob("p", *p)?;
                if !(w_lo.is_finite() && w_hi.is_finite()) || w_lo > w_hi || *w_lo <= 0.0 {
                    return Err(Error::InvalidParams(format!(
                        "weight range [{w_lo}, {w_hi}] must be positive and ordered"
                    )));
                }
                Ok(())
            }
            GraphModel::KarateClub => Ok(()),
        }
    }

    fn sample_once<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Gso> {
        let m = match self {
            GraphModel::ErdosRenyi { n, p } => erdos_renyi(*n, *p, None, rng),
            GraphModel::WeightedErdosRenyi { n, p, w_lo, w_hi } => erdos_renyi(*n, *p, Some((*w_lo, *w_hi)), rng),
            GraphModel::WattsStrogatz { n, mean_degree, rewire_p } => watts_strogatz(*n, *mean_degree, *rewire_p, rng),
            GraphModel::StochasticBlock { n, blocks, p_within, p_across } => {
                stochastic_block(*n, blocks, *p_within, *p_across, rng)
            }
            GraphModel::KarateClub => return Ok(Gso::karate_club()),
        };
        Gso::from_matrix(m)
    }
}

/// Samples a connected graph from `model`, redrawing disconnected samples.
pub fn generate_graph<R: Rng + ?Sized>(model: &GraphModel, rng: &mut R) -> Result<Gso> {
    model.validate()?;
    for _ in 0..MAX_CONNECTIVITY_ATTEMPTS {
        let g = model.sample_once(rng)?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::ConnectivityTimeout(MAX_CONNECTIVITY_ATTEMPTS))
}

/// [`generate_graph`] driven by a ChaCha8 stream seeded with `seed`.
pub fn generate_graph_seeded(model: &GraphModel, seed: u64) -> Result<Gso> {
    generate_graph(model, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn erdos_renyi<R: Rng + ?Sized>(n: usize, p: f64, weights: Option<(f64, f64)>, rng: &mut R) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < p {
                let w = match weights {
                    Some((lo, hi)) => lo + (hi - lo) * rng.random::<f64>(),
                    None => 1.0,
                };
                m[(i, j)] = w;
                m[(j, i)] = w;
            }
        }
    }
    m
}

fn watts_strogatz<R: Rng + ?Sized>(n: usize, k: usize, beta: f64, rng: &mut R) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for u in 0..n {
        for j in 1..=k / 2 {
            let v = (u + j) % n;
            m[(u, v)] = 1.0;
            m[(v, u)] = 1.0;
        }
    }
    for j in 1..=k / 2 {
        for u in 0..n {
            let v = (u + j) % n;
            if m[(u, v)] == 0.0 || rng.random::<f64>() >= beta {
                continue;
            }
            let degree = (0..n).filter(|&t| m[(u, t)] != 0.0).count();
            if degree >= n - 1 {
                continue;
            }
            let w = loop {
                let w = rng.random_range(0..n);
                if w != u && m[(u, w)] == 0.0 {
                    break w;
                }
            };
            m[(u, v)] = 0.0;
            m[(v, u)] = 0.0;
            m[(u, w)] = 1.0;
            m[(w, u)] = 1.0;
        }
    }
    m
}

fn stochastic_block<R: Rng + ?Sized>(
    n: usize,
    blocks: &[usize],
    p_within: f64,
    p_across: f64,
    rng: &mut R,
) -> DMatrix<f64> {
    let membership: Vec<usize> =
        blocks.iter().enumerate().flat_map(|(b, &size)| std::iter::repeat_n(b, size)).collect();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let p = if membership[i] == membership[j] { p_within } else { p_across };
            if rng.random::<f64>() < p {
                m[(i, j)] = 1.0;
                m[(j, i)] = 1.0;
            }
        }
    }
    m
}
