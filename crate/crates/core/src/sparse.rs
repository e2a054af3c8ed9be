//! Unknown-order recovery by weighted ℓ1 minimization.
//!
//! With the first (pinned) coefficient set to one, `ỸΘ h̄ = 0` becomes
//! `Φ w = −b` and the sparsest weighted solution is sought:
//!
//! ```text
//! min ‖Δ w‖₁  s.t.  Φ w = −b            (equality form)
//! min ‖Δ w‖₁  s.t.  ‖Φ w + b‖₂ ≤ ε       (ball form)
//! ```
//!
//! Both are solved with ADMM, optionally with extra linear inequalities.
//! [`certificate`] evaluates the closed-form quantity `ξ` whose value below
//! one (together with a rank condition on the true support) guarantees exact
//! recovery, and [`robustness_constants`] the constants of the matching
//! noisy error bound.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dst::CrossRelationSystem;
use crate::error::{Error, Result};
use crate::linalg::{singular_values, spectral_norm, svd};
use crate::recover_ls::right_singular_pairs;

pub const DEFAULT_DELTA: f64 = 0.02;
pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 200_000;
/// Condition-number guard on the inner matrix of `ξ`.
pub const INNER_COND_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum WeightScheme {
    Identity,
    /// `Δ_ii = exp(i mod Q)` with `i` the 1-based global index.
    Exponential,
    Custom {
        diag: Vec<f64>,
    },
}

/// Diagonal of `Δ` over the stacked coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    diag: Vec<f64>,
    scheme: WeightScheme,
    block_sizes: Vec<usize>,
}

impl WeightMatrix {
    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn scheme(&self) -> &WeightScheme {
        &self.scheme
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    /// Scaled so the largest entry is one.
    pub fn normalized(&self) -> WeightMatrix {
        let max = self.diag.iter().copied().fold(0.0, f64::max);
        WeightMatrix { diag: self.diag.iter().map(|d| d / max).collect(), ..self.clone() }
    }
}

pub fn build_weights(scheme: &WeightScheme, block_sizes: &[usize]) -> Result<WeightMatrix> {
    if block_sizes.is_empty() || block_sizes.contains(&0) {
        return Err(Error::InvalidScheme(format!("block sizes {block_sizes:?} must be positive")));
    }
    let total: usize = block_sizes.iter().sum();
    let diag = match scheme {
        WeightScheme::Identity => vec![1.0; total],
        WeightScheme::Exponential => {
            let q = block_sizes[0];
            if block_sizes.iter().any(|&s| s != q) {
                return Err(Error::InvalidScheme(format!(
                    "exponential weights need a common overshoot order, got {block_sizes:?}"
                )));
            }
            (1..=total).map(|i| ((i % q) as f64).exp()).collect()
        }
        WeightScheme::Custom { diag } => {
            if diag.len() != total {
                return Err(Error::InvalidScheme(format!("{} custom weights for {total} coefficients", diag.len())));
            }
            if diag.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
                return Err(Error::InvalidScheme("custom weights must be finite and positive".into()));
            }
            diag.clone()
        }
    };
    Ok(WeightMatrix { diag, scheme: scheme.clone(), block_sizes: block_sizes.to_vec() })
}

/// The reduced problem after pinning one coefficient to one.
#[derive(Debug, Clone)]
pub struct SparseProblem {
    pub phi: DMatrix<f64>,
    pub b: DVector<f64>,
    /// Weights of the free coefficients.
    pub weights: Vec<f64>,
    pub epsilon: f64,
    /// Position of the pinned coefficient in the full vector.
    pub pin: usize,
    /// True free coefficients (pinned entry scaled to one), when known.
    pub truth: Option<DVector<f64>>,
}

impl SparseProblem {
    /// Splits `[b, Φ]` off the system matrix at column `pin`.
    pub fn from_system(system: &CrossRelationSystem, weights: &WeightMatrix, pin: usize) -> Result<Self> {
        Self::from_matrix(&system.matrix, weights, pin)
    }

    pub fn from_matrix(matrix: &DMatrix<f64>, weights: &WeightMatrix, pin: usize) -> Result<Self> {
        let cols = matrix.ncols();
        if weights.diag.len() != cols {
            return Err(Error::LengthMismatch { expected: cols, got: weights.diag.len() });
        }
        if pin >= cols || cols < 2 {
            return Err(Error::InvalidParams(format!("pin index {pin} outside {cols} columns")));
        }
        let b = matrix.column(pin).into_owned();
        let phi = matrix.clone().remove_column(pin);
        let weights = remove_entry(&weights.diag, pin);
        Ok(Self { phi, b, weights, epsilon: 0.0, pin, truth: None })
    }

    pub fn n_free(&self) -> usize {
        self.phi.ncols()
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(Error::InvalidParams(format!("epsilon {epsilon} must be finite and non-negative")));
        }
        self.epsilon = epsilon;
        Ok(self)
    }

    /// Attaches the full true coefficient vector, rescaled so the pinned entry is one.
    pub fn with_truth(mut self, full: &DVector<f64>) -> Result<Self> {
        if full.len() != self.n_free() + 1 {
            return Err(Error::LengthMismatch { expected: self.n_free() + 1, got: full.len() });
        }
        let p = full[self.pin];
        if p == 0.0 {
            return Err(Error::ZeroTruth);
        }
        self.truth = Some(DVector::from_vec(remove_entry((full / p).as_slice(), self.pin)));
        Ok(self)
    }

    /// `‖Φ w + b‖₂` at the attached truth: the smallest radius keeping it feasible.
    pub fn oracle_epsilon(&self) -> Result<f64> {
        let w = self.truth.as_ref().ok_or_else(|| Error::InvalidParams("no ground truth attached".into()))?;
        Ok((&self.phi * w + &self.b).norm())
    }

    /// Indices of the nonzero true free coefficients.
    pub fn support(&self) -> Option<Vec<usize>> {
        self.truth.as_ref().map(|w| (0..w.len()).filter(|&i| w[i] != 0.0).collect())
    }

    /// Reinserts the pinned one into a free-coefficient vector.
    pub fn full_vector(&self, w: &DVector<f64>) -> DVector<f64> {
        let mut v = w.as_slice().to_vec();
        v.insert(self.pin, 1.0);
        DVector::from_vec(v)
    }

    pub fn objective(&self, w: &DVector<f64>) -> f64 {
        w.iter().zip(&self.weights).map(|(x, d)| d * x.abs()).sum()
    }
}

fn remove_entry(v: &[f64], idx: usize) -> Vec<f64> {
    v.iter().enumerate().filter(|&(i, _)| i != idx).map(|(_, &x)| x).collect()
}

/// `g(w) ≥ 0` for `g(w) = Σ coeffs_k w_k + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearInequality {
    pub coeffs: Vec<(usize, f64)>,
    pub offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmmSettings {
    pub tol: f64,
    pub max_iter: usize,
    pub relaxation: f64,
}

impl Default for AdmmSettings {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, max_iter: DEFAULT_MAX_ITER, relaxation: 1.0 }
    }
}

#[derive(Debug, Clone)]
pub struct L1Solution {
    /// Free coefficients.
    pub w: DVector<f64>,
    /// Full coefficient vector with the pinned one reinserted.
    pub full: DVector<f64>,
    pub objective: f64,
    pub dual_objective: f64,
    pub iterations: usize,
    /// `max(‖Φ w + b‖₂ − ε, 0)`.
    pub infeasibility: f64,
    pub duality_gap: f64,
}

impl L1Solution {
    /// Gap small relative to the objective.
    pub fn certified(&self, rel: f64) -> bool {
        self.duality_gap.abs() <= rel * (1.0 + self.objective.abs())
    }
}

pub fn solve_l1_equality(problem: &SparseProblem) -> Result<L1Solution> {
    solve_l1(problem, 0.0, &[], &AdmmSettings::default())
}

pub fn solve_l1_ball(problem: &SparseProblem) -> Result<L1Solution> {
    if problem.epsilon <= 0.0 {
        return Err(Error::InvalidParams("ball form needs epsilon > 0".into()));
    }
    solve_l1(problem, problem.epsilon, &[], &AdmmSettings::default())
}

/// Ball form (equality form when `problem.epsilon == 0`) with extra
/// inequalities on the free coefficients.
pub fn solve_l1_constrained(
    problem: &SparseProblem,
    constraints: &[LinearInequality],
    settings: &AdmmSettings,
) -> Result<L1Solution> {
    solve_l1(problem, problem.epsilon, constraints, settings)
}

/// Feasibility slack on the component of `b` outside the range of `Φ`.
const RANGE_TOL: f64 = 1e-7;
const POLISH_EVERY: usize = 500;
const RHO_ADAPT_UNTIL: usize = 10_000;
const POLISH_CERTIFY: f64 = 1e-10;

/// The data constraint `‖Φ w + b‖₂ ≤ ε` in coordinates `y = Lᵀw`, where
/// `L Lᵀ = I + GᵀG` is the ADMM metric, stored through the SVD of `Φ L⁻ᵀ`.
struct DataSet {
    /// Right singular vectors (columns) of the kept singular values.
    v: DMatrix<f64>,
    sigma: DVector<f64>,
    /// `U_rᵀ b`.
    beta: DVector<f64>,
    /// Radius left for the in-range component.
    radius: f64,
    /// `U_r Σ_r⁻¹`, for recovering the data multiplier.
    u_over_sigma: DMatrix<f64>,
}

impl DataSet {
    fn new(b_mat: &DMatrix<f64>, b: &DVector<f64>, epsilon: f64) -> Result<Self> {
        let svd = svd(b_mat)?;
        let (u, v_t) = (&svd.u, &svd.v_t);
        let s = &svd.singular_values;
        let s_max = s.max();
        let cut = b_mat.nrows().max(b_mat.ncols()) as f64 * f64::EPSILON * s_max;
        let keep: Vec<usize> = (0..s.len()).filter(|&i| s[i] > cut).collect();
        let r = keep.len();
        let n = b_mat.ncols();
        let mut v = DMatrix::zeros(n, r);
        let mut u_over_sigma = DMatrix::zeros(b_mat.nrows(), r);
        let mut sigma = DVector::zeros(r);
        let mut beta = DVector::zeros(r);
        for (j, &k) in keep.iter().enumerate() {
            v.set_column(j, &v_t.row(k).transpose());
            u_over_sigma.set_column(j, &(u.column(k) / s[k]));
            sigma[j] = s[k];
            beta[j] = u.column(k).dot(b);
        }
        let b_perp_sq = (b.norm_squared() - beta.norm_squared()).max(0.0);
        let b_perp = b_perp_sq.sqrt();
        let radius = if epsilon > 0.0 {
            if epsilon < b_perp {
                return Err(Error::Infeasible(b_perp - epsilon));
            }
            (epsilon * epsilon - b_perp_sq).sqrt()
        } else {
            if b_perp > RANGE_TOL * (b.norm() + s_max) {
                return Err(Error::Infeasible(b_perp));
            }
            0.0
        };
        Ok(Self { v, sigma, beta, radius, u_over_sigma })
    }

    /// Euclidean projection of `y` onto `{y : ‖Σ Vᵀy + β‖₂ ≤ radius}`.
    fn project(&self, y: &DVector<f64>) -> DVector<f64> {
        let a = self.v.transpose() * y;
        let c = a.component_mul(&self.sigma) + &self.beta;
        if c.norm() <= self.radius {
            return y.clone();
        }
        let target = if self.radius == 0.0 {
            -self.beta.component_div(&self.sigma)
        } else {
            let mu = self.secular_root(&c);
            DVector::from_fn(a.len(), |i, _| {
                let s = self.sigma[i];
                (a[i] - mu * s * self.beta[i]) / (1.0 + mu * s * s)
            })
        };
        y + &self.v * (target - a)
    }

    /// `μ ≥ 0` with `Σ c_i² / (1 + μσ_i²)² = radius²`.
    fn secular_root(&self, c: &DVector<f64>) -> f64 {
        let f = |mu: f64| -> f64 {
            c.iter().zip(self.sigma.iter()).map(|(ci, s)| (ci / (1.0 + mu * s * s)).powi(2)).sum::<f64>().sqrt()
        };
        let mut lo = 0.0;
        let mut hi = 1.0 / self.sigma.max().powi(2);
        while f(hi) > self.radius {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if f(mid) > self.radius {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

fn solve_l1(
    problem: &SparseProblem,
    epsilon: f64,
    constraints: &[LinearInequality],
    settings: &AdmmSettings,
) -> Result<L1Solution> {
    let p = problem.n_free();
    let phi = &problem.phi;
    let b = &problem.b;
    if b.len() != phi.nrows() {
        return Err(Error::LengthMismatch { expected: phi.nrows(), got: b.len() });
    }
    let m = constraints.len();
    let mut g = DMatrix::zeros(m, p);
    let mut g_lo = DVector::zeros(m);
    for (row, c) in constraints.iter().enumerate() {
        for &(k, a) in &c.coeffs {
            if k >= p {
                return Err(Error::InvalidParams(format!("constraint index {k} outside {p} coefficients")));
            }
            g[(row, k)] += a;
        }
        let n = g.row(row).norm();
        if n == 0.0 {
            if c.offset < 0.0 {
                return Err(Error::Infeasible(-c.offset));
            }
            continue;
        }
        g.row_mut(row).scale_mut(1.0 / n);
        g_lo[row] = -c.offset / n;
    }

    let metric = DMatrix::identity(p, p) + g.transpose() * &g;
    let chol = Cholesky::new(metric).ok_or(Error::SvdFailure)?;
    let l = chol.l();
    let l_t = l.transpose();
    // Φ L⁻ᵀ
    let l_inv_t = l_t.clone().try_inverse().ok_or(Error::SvdFailure)?;
    let data = DataSet::new(&(phi * &l_inv_t), b, epsilon)?;

    let cost = &problem.weights;
    let finish = |w: DVector<f64>, iterations: usize, dual: Option<(DVector<f64>, DVector<f64>)>| -> L1Solution {
        let objective = problem.objective(&w);
        let infeasibility = ((phi * &w + b).norm() - epsilon).max(0.0);
        let dual_objective = match dual {
            Some((y1, y3)) => dual_value(problem, &data, &l, &g, &g_lo, epsilon, &y1, &y3),
            None => 0.0,
        };
        L1Solution {
            full: problem.full_vector(&w),
            w,
            objective,
            dual_objective,
            iterations,
            infeasibility,
            duality_gap: objective - dual_objective,
        }
    };

    // zero is optimal whenever it is feasible
    let zero_feasible = data.beta.norm() <= data.radius && g_lo.iter().all(|&x| x <= 0.0);
    if zero_feasible {
        return Ok(finish(DVector::zeros(p), 0, None));
    }

    let project = |q: &DVector<f64>| -> DVector<f64> {
        // minimizer over the data set of ½ xᵀMx − qᵀx
        let y = l.transpose() * chol.solve(q);
        let y = data.project(&y);
        l_inv_t.clone() * y
    };

    let mut rho = 1.0;
    let mut x = project(&DVector::zeros(p));
    let mut z1 = x.clone();
    let mut z3 = (&g * &x).zip_map(&g_lo, f64::max);
    let mut u1 = DVector::zeros(p);
    let mut u3 = DVector::zeros(m);
    let alpha = settings.relaxation;
    let dims = ((p + m) as f64).sqrt();

    for it in 1..=settings.max_iter {
        let q = (&z1 - &u1) + g.transpose() * (&z3 - &u3);
        x = project(&q);
        let gx = &g * &x;
        let a1 = &x * alpha + &z1 * (1.0 - alpha);
        let a3 = &gx * alpha + &z3 * (1.0 - alpha);
        let z1_old = std::mem::replace(&mut z1, DVector::zeros(p));
        let z3_old = z3.clone();
        z1 = DVector::from_fn(p, |i, _| soft(a1[i] + u1[i], cost[i] / rho));
        z3 = DVector::from_fn(m, |i, _| (a3[i] + u3[i]).max(g_lo[i]));
        u1 += &a1 - &z1;
        u3 += &a3 - &z3;

        let primal = ((&x - &z1).norm_squared() + (&gx - &z3).norm_squared()).sqrt();
        let dual = rho * ((&z1 - &z1_old) + g.transpose() * (&z3 - &z3_old)).norm();
        let ax = (x.norm_squared() + gx.norm_squared()).sqrt();
        let zn = (z1.norm_squared() + z3.norm_squared()).sqrt();
        let aty = rho * (&u1 + g.transpose() * &u3).norm();
        let eps_pri = settings.tol * (dims + ax.max(zn));
        let eps_dual = settings.tol * (dims + aty);
        if primal <= eps_pri && dual <= eps_dual {
            let admm = finish(x, it, Some((&u1 * rho, &u3 * rho)));
            let polished = if m == 0 { best_polish(problem, epsilon, &z1, &(&u1 * rho), it) } else { None };
            return Ok(match polished {
                Some(sol) if sol.duality_gap.abs() < admm.duality_gap.abs() => sol,
                _ => admm,
            });
        }
        // slow tails: stop early once the current support polishes to a certified point
        if m == 0 && it % POLISH_EVERY == 0 {
            if let Some(sol) = best_polish(problem, epsilon, &z1, &(&u1 * rho), it) {
                if sol.certified(POLISH_CERTIFY) {
                    return Ok(sol);
                }
            }
        }
        if it % 20 == 0 && it <= RHO_ADAPT_UNTIL {
            if primal > 10.0 * dual * eps_pri / eps_dual {
                rho *= 2.0;
                u1 /= 2.0;
                u3 /= 2.0;
            } else if dual > 10.0 * primal * eps_dual / eps_pri {
                rho /= 2.0;
                u1 *= 2.0;
                u3 *= 2.0;
            }
        }
    }
    Err(Error::MaxIterations(settings.max_iter))
}

/// Tries [`polish`] on `z` with its smallest entries cut at a few relative
/// levels and keeps the candidate with the smallest gap.
fn best_polish(
    problem: &SparseProblem,
    epsilon: f64,
    z: &DVector<f64>,
    y1: &DVector<f64>,
    it: usize,
) -> Option<L1Solution> {
    let zmax = z.amax();
    [0.0, 1e-10, 1e-8, 1e-6, 1e-4, 1e-3, 1e-2]
        .iter()
        .filter_map(|tau| {
            let trimmed = z.map(|v| if v.abs() > tau * zmax { v } else { 0.0 });
            polish(problem, epsilon, &trimmed, y1, it)
        })
        .min_by(|a, b| a.duality_gap.abs().total_cmp(&b.duality_gap.abs()))
}

/// Re-solves on the support and signs found by ADMM: a least-squares solve
/// for the equality form, a single-multiplier KKT solve for the ball form.
/// The dual point is built to be exactly complementary on the support.
fn polish(
    problem: &SparseProblem,
    epsilon: f64,
    z: &DVector<f64>,
    y1: &DVector<f64>,
    iterations: usize,
) -> Option<L1Solution> {
    let support: Vec<usize> = (0..z.len()).filter(|&i| z[i] != 0.0).collect();
    if support.is_empty() {
        return None;
    }
    let phi = &problem.phi;
    let b = &problem.b;
    let c = &problem.weights;
    let phi_s = columns(phi, &support);
    let signs = DVector::from_iterator(support.len(), support.iter().map(|&i| z[i].signum()));
    let cs = DVector::from_iterator(support.len(), support.iter().map(|&i| c[i] * z[i].signum()));
    let s_svd = svd(&phi_s).ok()?;
    let s_max = s_svd.singular_values.max();
    if phi_s.nrows() < phi_s.ncols() || s_svd.singular_values.min() <= s_svd.cutoff() {
        return None;
    }
    let pinv = s_svd.pseudo_inverse(0.0);
    let gram_inv_cs = {
        // (Φ_SᵀΦ_S)⁻¹ c_s = Φ_S† (Φ_S†)ᵀ c_s
        &pinv * (pinv.transpose() * &cs)
    };
    let (w_s, t) = if epsilon == 0.0 {
        let w_s = -(&pinv * b);
        let phi_svd = svd(phi).ok()?;
        let t0 = phi_svd.pseudo_inverse(phi_svd.cutoff()).transpose() * y1;
        let t = &t0 - pinv.transpose() * (phi_s.transpose() * &t0 - &cs);
        (w_s, t)
    } else {
        let resid_perp = b - &phi_s * (&pinv * b);
        let dir = &phi_s * &gram_inv_cs;
        let slack = epsilon * epsilon - resid_perp.norm_squared();
        if slack <= 0.0 || dir.norm() == 0.0 {
            return None;
        }
        let lambda = dir.norm() / slack.sqrt();
        let w_s = -(&pinv * b) - &gram_inv_cs / lambda;
        let r = &phi_s * &w_s + b;
        (w_s, -(r * lambda))
    };
    if w_s.iter().zip(signs.iter()).any(|(w, s)| w * s <= 0.0) {
        return None;
    }
    let mut w = DVector::zeros(z.len());
    for (k, &i) in support.iter().enumerate() {
        w[i] = w_s[k];
    }
    let infeasibility = ((phi * &w + b).norm() - epsilon).max(0.0);
    if infeasibility > RANGE_TOL * (b.norm() + s_max) {
        return None;
    }
    let mut t = t;
    let mut excess = (phi.transpose() * &t).iter().zip(c).map(|(g, ci)| g.abs() / ci).fold(0.0, f64::max);
    if epsilon == 0.0 && excess > 1.0 {
        // Degenerate vertex: complementarity leaves part of t free.
        if let Some(repaired) = repair_dual(phi, c, &support, &t) {
            let g2 = phi.transpose() * &repaired;
            let e2 = g2.iter().zip(c).map(|(g, ci)| g.abs() / ci).fold(0.0, f64::max);
            if e2 < excess {
                t = repaired;
                excess = e2;
            }
        }
    }
    let shrink = if excess > 1.0 { 1.0 / excess } else { 1.0 };
    let dual_objective = shrink * (-t.dot(b) - epsilon * t.norm());
    let objective = problem.objective(&w);
    Some(L1Solution {
        full: problem.full_vector(&w),
        w,
        objective,
        dual_objective,
        iterations,
        infeasibility,
        duality_gap: objective - dual_objective,
    })
}

/// Moves `t` inside `range(Φ) ∩ null(Φ_Sᵀ)` to minimize the worst violation
/// of `|Φ_iᵀ t| ≤ Δ_i` off the support.
fn repair_dual(phi: &DMatrix<f64>, c: &[f64], support: &[usize], t: &DVector<f64>) -> Option<DVector<f64>> {
    let svd = svd(phi).ok()?;
    let u = &svd.u;
    let tol = svd.cutoff();
    let keep: Vec<usize> = (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > tol).collect();
    let u_r = columns(u, &keep);
    let phi_s = columns(phi, support);
    let reduced = phi_s.transpose() * &u_r;
    let pairs = right_singular_pairs(&reduced).ok()?;
    let r_max = pairs.last()?.0.max(f64::MIN_POSITIVE);
    let null: Vec<DVector<f64>> = pairs.iter().filter(|(sv, _)| *sv <= 1e-10 * r_max).map(|(_, v)| &u_r * v).collect();
    if null.is_empty() {
        return None;
    }
    let off: Vec<usize> = (0..phi.ncols()).filter(|i| !support.contains(i)).collect();
    let base = phi.transpose() * t;
    let mut lp = microlp::Problem::new(microlp::OptimizationDirection::Minimize);
    let alpha: Vec<_> = null.iter().map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY))).collect();
    let slack = lp.add_var(1.0, (0.0, f64::INFINITY));
    for &i in &off {
        let col = phi.column(i);
        let mut terms: Vec<(microlp::Variable, f64)> =
            alpha.iter().zip(&null).map(|(&a, n)| (a, col.dot(n) / c[i])).collect();
        let g = base[i] / c[i];
        terms.push((slack, -1.0));
        lp.add_constraint(terms.as_slice(), microlp::ComparisonOp::Le, 1.0 - g);
        terms.pop();
        terms.push((slack, 1.0));
        lp.add_constraint(terms.as_slice(), microlp::ComparisonOp::Ge, -1.0 - g);
    }
    let sol = lp.solve().ok()?;
    let mut out = t.clone();
    for (a, n) in alpha.iter().zip(&null) {
        out += n * *sol.var_value(*a);
    }
    Some(out)
}

fn soft(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

/// Dual value built from the ADMM multipliers: `y1` on the ℓ1 split
/// (`|y1| ≤ Δ`) and `y3 ≤ 0` on the inequality split. The data multiplier
/// `t` solves `Φᵀt = y1 + Gᵀy3` in least squares; the pair `(t, −y3)` is then
/// scaled into the dual feasible set `|Φᵀt + Gᵀμ| ≤ Δ`, `μ ≥ 0`, and
/// `−tᵀb − ε‖t‖ + μᵀg_lo` is returned.
#[allow(clippy::too_many_arguments)]
fn dual_value(
    problem: &SparseProblem,
    data: &DataSet,
    l: &DMatrix<f64>,
    g: &DMatrix<f64>,
    g_lo: &DVector<f64>,
    epsilon: f64,
    y1: &DVector<f64>,
    y3: &DVector<f64>,
) -> f64 {
    let target = y1 + g.transpose() * y3;
    // Φᵀ = L Bᵀ with B = Φ L⁻ᵀ, so Bᵀ t = L⁻¹ target
    let rhs = l.clone().solve_lower_triangular(&target).unwrap_or(target);
    let t = &data.u_over_sigma * (data.v.transpose() * rhs);
    let mu = y3.map(|x| (-x).max(0.0));
    let grad = problem.phi.transpose() * &t + g.transpose() * &mu;
    let excess = grad.iter().zip(&problem.weights).map(|(gr, c)| gr.abs() / c).fold(0.0, f64::max);
    let shrink = if excess > 1.0 { 1.0 / excess } else { 1.0 };
    shrink * (-t.dot(&problem.b) - epsilon * t.norm() + mu.dot(g_lo))
}

/// `‖ŵ − w‖₂ / ‖w‖₂` over the free coefficients, after rescaling both full
/// vectors so the pinned entry is one.
pub fn pinned_error(estimate: &DVector<f64>, truth: &DVector<f64>, pin: usize) -> Result<f64> {
    if estimate.len() != truth.len() {
        return Err(Error::LengthMismatch { expected: truth.len(), got: estimate.len() });
    }
    if pin >= truth.len() || truth[pin] == 0.0 {
        return Err(Error::ZeroTruth);
    }
    let t = DVector::from_vec(remove_entry((truth / truth[pin]).as_slice(), pin));
    if t.norm() == 0.0 {
        return Err(Error::ZeroTruth);
    }
    if estimate[pin] == 0.0 {
        return Ok(f64::INFINITY);
    }
    let e = DVector::from_vec(remove_entry((estimate / estimate[pin]).as_slice(), pin));
    Ok((e - &t).norm() / t.norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RobustnessConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c: f64,
    /// The certificate value used in place of the bound's `ψ`.
    pub xi: f64,
}

impl RobustnessConstants {
    /// `C ε`.
    pub fn bound(&self, epsilon: f64) -> f64 {
        self.c * epsilon
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    pub xi: f64,
    pub delta: f64,
    pub rank_ok: bool,
    pub guaranteed: bool,
    pub constants: Option<RobustnessConstants>,
}

fn support_or_err(problem: &SparseProblem) -> Result<Vec<usize>> {
    let support = problem.support().ok_or_else(|| Error::InvalidParams("no ground truth attached".into()))?;
    if support.is_empty() {
        return Err(Error::EmptySupport);
    }
    Ok(support)
}

fn columns(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), idx.len(), |i, j| m[(i, idx[j])])
}

fn full_column_rank(m: &DMatrix<f64>) -> Result<(bool, f64)> {
    if m.ncols() == 0 {
        return Ok((true, f64::INFINITY));
    }
    let sv = singular_values(m)?;
    let smax = sv.max();
    let smin = if m.nrows() < m.ncols() { 0.0 } else { sv.min() };
    let tol = m.nrows().max(m.ncols()) as f64 * f64::EPSILON * smax;
    Ok((smin > tol, smin))
}

/// `ξ = ‖I_{Iᶜ}ᵀ (δ⁻² Δ⁻¹ΦᵀΦΔ⁻¹ + I_{Iᶜ}I_{Iᶜ}ᵀ)⁻¹ I_I‖_∞` for the given weights.
///
/// With `A = δ⁻¹ΦΔ⁻¹` the requested block of the inverse equals
/// `−(I + BᵀB)⁻¹ A_{Iᶜ}ᵀ (A_I†)ᵀ` where `B = (I − P_{A_I}) A_{Iᶜ}`, so only
/// `A_I` has to be inverted. The guard applies to its column-equilibrated
/// condition number.
fn xi_value(phi: &DMatrix<f64>, weights: &[f64], support: &[usize], delta: f64) -> Result<f64> {
    let p = phi.ncols();
    let off: Vec<usize> = (0..p).filter(|i| !support.contains(i)).collect();
    if off.is_empty() {
        return Ok(0.0);
    }
    let a = DMatrix::from_fn(phi.nrows(), p, |i, j| phi[(i, j)] / (delta * weights[j]));
    let a_i = columns(&a, support);
    let a_ic = columns(&a, &off);

    let norms: Vec<f64> = a_i.column_iter().map(|c| c.norm()).collect();
    if norms.contains(&0.0) || a_i.nrows() < a_i.ncols() {
        return Err(Error::SingularInner(f64::INFINITY));
    }
    let a_eq = DMatrix::from_fn(a_i.nrows(), a_i.ncols(), |i, j| a_i[(i, j)] / norms[j]);
    let svd = svd(&a_eq)?;
    let s = &svd.singular_values;
    let cond = if s.min() > 0.0 { s.max() / s.min() } else { f64::INFINITY };
    if cond > INNER_COND_LIMIT {
        return Err(Error::SingularInner(cond));
    }
    let (u, v_t) = (&svd.u, &svd.v_t);
    // (A_I†)ᵀ = U Σ⁻¹ Vᵀ D⁻¹ for A_I = U Σ Vᵀ D⁻¹ … with D the equilibration
    let mut pinv_t = u * DMatrix::from_diagonal(&s.map(|x| 1.0 / x)) * v_t;
    for (j, n) in norms.iter().enumerate() {
        pinv_t.column_mut(j).scale_mut(1.0 / n);
    }
    let proj_out = &a_ic - u * (u.transpose() * &a_ic);
    let schur = DMatrix::identity(off.len(), off.len()) + proj_out.transpose() * &proj_out;
    let rhs = a_ic.transpose() * pinv_t;
    let y = Cholesky::new(schur).ok_or(Error::SingularInner(f64::INFINITY))?.solve(&rhs);
    Ok(y.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max))
}

/// Evaluates the exact-recovery certificate on the attached ground truth.
pub fn certificate(problem: &SparseProblem, delta: f64) -> Result<CertificateReport> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParams(format!("delta {delta} must be positive")));
    }
    let support = support_or_err(problem)?;
    let (rank_ok, _) = full_column_rank(&columns(&problem.phi, &support))?;
    let xi = xi_value(&problem.phi, &problem.weights, &support, delta)?;
    let constants = if rank_ok { Some(robustness_constants(problem, delta)?) } else { None };
    Ok(CertificateReport { xi, delta, rank_ok, guaranteed: rank_ok && xi < 1.0, constants })
}

/// Constants of the bound `‖Δ(ŵ − w)‖₁ ≤ C ε`, with weights normalized to
/// `Δ_max = 1`. `C₂` uses `ξ` as the certificate bound and is infinite when
/// `ξ ≥ 1`; `C₃ = ‖(Φ†)ᵀΔ‖₂² · (n_free + 1)`.
pub fn robustness_constants(problem: &SparseProblem, delta: f64) -> Result<RobustnessConstants> {
    let support = support_or_err(problem)?;
    let (rank_ok, smin) = full_column_rank(&columns(&problem.phi, &support))?;
    if !rank_ok || smin == 0.0 {
        return Err(Error::RankDeficientSupport);
    }
    let wmax = problem.weights.iter().copied().fold(0.0, f64::max);
    let w: Vec<f64> = problem.weights.iter().map(|x| x / wmax).collect();
    let wmin = w.iter().copied().fold(f64::INFINITY, f64::min);
    let xi = xi_value(&problem.phi, &w, &support, delta)?;

    let c1 = (support.len() as f64).sqrt() / smin;
    let phi_svd = svd(&problem.phi)?;
    let phi_norm = phi_svd.singular_values.max();
    let c2 = if xi < 1.0 { (1.0 + c1 * phi_norm / wmin) / (1.0 - xi) } else { f64::INFINITY };
    let pinv = phi_svd.pseudo_inverse(phi_svd.cutoff());
    let weighted = DMatrix::from_fn(pinv.ncols(), pinv.nrows(), |i, j| pinv[(j, i)] * w[j]);
    let wn = spectral_norm(&weighted)?;
    let c3 = wn * wn * (problem.n_free() + 1) as f64;
    let c = 2.0 * c1 + 2.0 * c2 * c3.sqrt();
    Ok(RobustnessConstants { c1, c2, c3, c, xi })
}

/// Left side of the error bound, using weights normalized to `Δ_max = 1`.
pub fn weighted_l1_distance(problem: &SparseProblem, estimate: &DVector<f64>) -> Result<f64> {
    let truth = problem.truth.as_ref().ok_or_else(|| Error::InvalidParams("no ground truth attached".into()))?;
    let wmax = problem.weights.iter().copied().fold(0.0, f64::max);
    Ok(estimate.iter().zip(truth.iter()).zip(&problem.weights).map(|((e, t), d)| d / wmax * (e - t).abs()).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn weight_patterns() {
        let id = build_weights(&WeightScheme::Identity, &[3, 3]).unwrap();
        assert!(id.diag().iter().all(|&d| d == 1.0));
        let ex = build_weights(&WeightScheme::Exponential, &[4, 4]).unwrap();
        let expect: Vec<f64> = [1, 2, 3, 0, 1, 2, 3, 0].iter().map(|&k| f64::from(k).exp()).collect();
        assert_eq!(ex.diag(), expect.as_slice());
        assert_abs_diff_eq!(ex.normalized().diag().iter().copied().fold(0.0, f64::max), 1.0);
        assert!(matches!(build_weights(&WeightScheme::Exponential, &[3, 4]), Err(Error::InvalidScheme(_))));
        assert!(matches!(build_weights(&WeightScheme::Identity, &[0]), Err(Error::InvalidScheme(_))));
        let bad = WeightScheme::Custom { diag: vec![1.0, -1.0] };
        assert!(matches!(build_weights(&bad, &[2]), Err(Error::InvalidScheme(_))));
    }

    fn problem(matrix: DMatrix<f64>) -> SparseProblem {
        let w = build_weights(&WeightScheme::Identity, &[matrix.ncols()]).unwrap();
        SparseProblem::from_matrix(&matrix, &w, 0).unwrap()
    }

    #[test]
    fn zero_b_gives_zero() {
        let mut m = DMatrix::from_row_slice(2, 3, &[0.0, 1.0, 2.0, 0.0, -1.0, 0.5]);
        m[(0, 0)] = 0.0;
        let sol = solve_l1_equality(&problem(m)).unwrap();
        assert!(sol.w.iter().all(|&x| x == 0.0));
        assert_eq!(sol.full[0], 1.0);
    }

    #[test]
    fn sparse_solution_found() {
        // Φ w = -b with the sparsest solution w = (0, 2, 0)
        let phi = DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 0.0, 0.0, 1.0, 1.0]);
        let b = -DVector::from_vec(vec![2.0, 2.0]);
        let mut m = DMatrix::zeros(2, 4);
        m.set_column(0, &b);
        m.view_mut((0, 1), (2, 3)).copy_from(&phi);
        let sol = solve_l1_equality(&problem(m)).unwrap();
        assert_abs_diff_eq!(sol.w[1], 2.0, epsilon = 1e-7);
        assert_abs_diff_eq!(sol.w[0], 0.0, epsilon = 1e-7);
        assert_abs_diff_eq!(sol.objective, 2.0, epsilon = 1e-7);
        assert!(sol.certified(1e-7), "gap {}", sol.duality_gap);
    }

    #[test]
    fn ball_large_radius_is_zero() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
        let p = problem(m).with_epsilon(2.0).unwrap();
        let sol = solve_l1_ball(&p).unwrap();
        assert_eq!(sol.objective, 0.0);
    }

    #[test]
    fn ball_constraint_active() {
        let phi = DMatrix::from_row_slice(3, 3, &[1.0, 0.2, 0.0, 0.0, 1.0, 0.3, 0.1, 0.0, 1.0]);
        let b = DVector::from_vec(vec![-1.0, 0.5, -2.0]);
        let mut m = DMatrix::zeros(3, 4);
        m.set_column(0, &b);
        m.view_mut((0, 1), (3, 3)).copy_from(&phi);
        let p = problem(m).with_epsilon(0.3).unwrap();
        let sol = solve_l1_ball(&p).unwrap();
        let res = (&p.phi * &sol.w + &p.b).norm();
        assert_abs_diff_eq!(res, 0.3, epsilon = 1e-7);
        assert!(sol.certified(1e-7), "gap {}", sol.duality_gap);
    }

    #[test]
    fn infeasible_equality() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0 + 1e-16]);
        let mut bad = m.clone();
        bad[(1, 0)] = 5.0;
        assert!(matches!(solve_l1_equality(&problem(bad)), Err(Error::Infeasible(_))));
    }

    #[test]
    fn diagonal_certificate() {
        // Φ = I, Δ = I, support {0}, δ = 1: the inner matrix is diagonal
        let mut m = DMatrix::zeros(3, 4);
        m.view_mut((0, 1), (3, 3)).copy_from(&DMatrix::identity(3, 3));
        m[(0, 0)] = -1.0;
        let truth = DVector::from_vec(vec![1.0, 1.0, 0.0, 0.0]);
        let p = problem(m).with_truth(&truth).unwrap();
        assert_eq!(p.support().unwrap(), vec![0]);
        let c = certificate(&p, 1.0).unwrap();
        assert_eq!(c.xi, 0.0);
        assert!(c.rank_ok && c.guaranteed);
        let k = c.constants.unwrap();
        assert_abs_diff_eq!(k.c1, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn pinned_error_examples() {
        let t = DVector::from_vec(vec![2.0, 4.0, 0.0]);
        let e = DVector::from_vec(vec![1.0, 2.0, 0.0]);
        assert_abs_diff_eq!(pinned_error(&e, &t, 0).unwrap(), 0.0);
        assert_eq!(pinned_error(&e, &DVector::from_vec(vec![1.0, 0.0, 0.0]), 0), Err(Error::ZeroTruth));
    }
}
