//! Polynomial graph filters: application, frequency response, root analysis
//! and the random filter/input recipes used by the experiments.

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{vandermonde, SpectralBasis};

/// Coefficients below this fraction of the largest one are trimmed from the
/// top degree before root finding.
pub const TRIM_TOL: f64 = 1e-12;

/// `H = Σ_l h_l S^l`, coefficient of `S⁰` first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFilter {
    coeffs: Vec<f64>,
}

impl GraphFilter {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParams("filter needs at least one coefficient".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|v| v * c).collect() }
    }

    /// Polynomial value `p(z)`.
    pub fn eval(&self, z: f64) -> f64 {
        poly_eval(&self.coeffs, z)
    }
}

pub fn poly_eval(coeffs: &[f64], z: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * z + c)
}

/// M filters sharing one shift operator.
/// JSON form: `{"orders": [...], "coeffs": [[...], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "FilterBankJson", try_from = "FilterBankJson")]
pub struct FilterBank {
    filters: Vec<GraphFilter>,
}

#[derive(Serialize, Deserialize)]
struct FilterBankJson {
    orders: Vec<usize>,
    coeffs: Vec<Vec<f64>>,
}

impl From<FilterBank> for FilterBankJson {
    fn from(bank: FilterBank) -> Self {
        Self { orders: bank.orders(), coeffs: bank.filters.into_iter().map(|f| f.coeffs).collect() }
    }
}

impl TryFrom<FilterBankJson> for FilterBank {
    type Error = Error;

    fn try_from(json: FilterBankJson) -> Result<Self> {
        let lens: Vec<usize> = json.coeffs.iter().map(Vec::len).collect();
        if lens != json.orders {
            return Err(Error::DimensionMismatch(format!("orders {:?} but coefficient lengths {lens:?}", json.orders)));
        }
        Self::from_coeffs(json.coeffs)
    }
}

impl FilterBank {
    pub fn new(filters: Vec<GraphFilter>) -> Result<Self> {
        if filters.is_empty() {
            return Err(Error::InvalidParams("filter bank is empty".into()));
        }
        Ok(Self { filters })
    }

    pub fn from_coeffs(coeffs: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(coeffs.into_iter().map(GraphFilter::new).collect::<Result<_>>()?)
    }

    pub fn filters(&self) -> &[GraphFilter] {
        &self.filters
    }

    pub fn len(&self) -> usize {
        self.filters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.filters.is_empty()
    }

    pub fn orders(&self) -> Vec<usize> {
        self.filters.iter().map(GraphFilter::order).collect()
    }

    /// `h = [h⁽¹⁾; …; h⁽ᴹ⁾]`.
    pub fn stacked(&self) -> DVector<f64> {
        DVector::from_iterator(self.orders().iter().sum(), self.filters.iter().flat_map(|f| f.coeffs.iter().copied()))
    }

    /// Each filter zero-padded to the matching overshoot order.
    pub fn padded(&self, overshoot: &[usize]) -> Result<DVector<f64>> {
        if overshoot.len() != self.len() {
            return Err(Error::LengthMismatch { expected: self.len(), got: overshoot.len() });
        }
        let mut out = Vec::with_capacity(overshoot.iter().sum());
        for (f, &q) in self.filters.iter().zip(overshoot) {
            if q < f.order() {
                return Err(Error::InvalidParams(format!("overshoot order {q} below true order {}", f.order())));
            }
            out.extend_from_slice(&f.coeffs);
            out.extend(std::iter::repeat_n(0.0, q - f.order()));
        }
        Ok(DVector::from_vec(out))
    }

    pub fn common_roots(&self, tol: Option<f64>) -> Result<Vec<SharedRoot>> {
        let polys: Vec<&[f64]> = self.filters.iter().map(GraphFilter::coeffs).collect();
        common_roots(&polys, tol)
    }
}

/// Filters observed from one process at increasing times: `h⁽ᵐ⁾` is the
/// concatenation of the increments `d⁽¹⁾ … d⁽ᵐ⁾`.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementBank {
    d: Vec<f64>,
    orders: Vec<usize>,
}

impl IncrementBank {
    /// `d` is the full coefficient vector `h⁽ᴹ⁾`, `orders` the strictly
    /// increasing filter orders `L₁ < … < L_M = len(d)`.
    pub fn new(d: Vec<f64>, orders: Vec<usize>) -> Result<Self> {
        check_increasing(&orders)?;
        let last = *orders.last().expect("non-empty after check");
        if d.len() != last {
            return Err(Error::LengthMismatch { expected: last, got: d.len() });
        }
        Ok(Self { d, orders })
    }

    pub fn orders(&self) -> &[usize] {
        &self.orders
    }

    pub fn len(&self) -> usize {
        self.orders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orders.is_empty()
    }

    /// Concatenated increments `d` (equal to `h⁽ᴹ⁾`).
    pub fn d(&self) -> &[f64] {
        &self.d
    }

    /// Increment lengths `L₁, L₂−L₁, …`.
    pub fn increment_lengths(&self) -> Vec<usize> {
        let mut prev = 0;
        self.orders
            .iter()
            .map(|&l| {
                let len = l - prev;
                prev = l;
                len
            })
            .collect()
    }

    /// `d⁽ᵐ⁾` for every m.
    pub fn increments(&self) -> Vec<&[f64]> {
        let mut prev = 0;
        self.orders
            .iter()
            .map(|&l| {
                let s = &self.d[prev..l];
                prev = l;
                s
            })
            .collect()
    }

    /// `h⁽ᵐ⁾ = d[..L_m]`.
    pub fn filter(&self, m: usize) -> GraphFilter {
        GraphFilter { coeffs: self.d[..self.orders[m]].to_vec() }
    }

    pub fn to_filter_bank(&self) -> FilterBank {
        FilterBank { filters: (0..self.len()).map(|m| self.filter(m)).collect() }
    }

    /// Zero-padded increments `d̄⁽ᵐ⁾ = [0_{L_{m−1}}; d⁽ᵐ⁾; 0]` of lengths `Q_m`.
    pub fn padded(&self, overshoot: &[usize]) -> Result<DVector<f64>> {
        if overshoot.len() != self.len() {
            return Err(Error::LengthMismatch { expected: self.len(), got: overshoot.len() });
        }
        let mut out = Vec::with_capacity(overshoot.iter().sum());
        let mut prev = 0;
        for (m, &q) in overshoot.iter().enumerate() {
            let l = self.orders[m];
            if q < l {
                return Err(Error::InvalidParams(format!("overshoot order {q} below true order {l}")));
            }
            out.extend(std::iter::repeat_n(0.0, prev));
            out.extend_from_slice(&self.d[prev..l]);
            out.extend(std::iter::repeat_n(0.0, q - l));
            prev = l;
        }
        Ok(DVector::from_vec(out))
    }

    pub fn common_increment_roots(&self, tol: Option<f64>) -> Result<Vec<SharedRoot>> {
        common_roots(&self.increments(), tol)
    }
}

pub(crate) fn check_increasing(orders: &[usize]) -> Result<()> {
    if orders.is_empty() || orders[0] == 0 || orders.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::NonIncreasingOrders(orders.to_vec()));
    }
    Ok(())
}

fn check_order(filter: &GraphFilter, basis: &SpectralBasis) -> Result<()> {
    if filter.order() > basis.n_distinct() {
        return Err(Error::OrderExceedsMinimalPolynomial { order: filter.order(), n_distinct: basis.n_distinct() });
    }
    Ok(())
}

/// Frequency response `h̃ = Ψh`, i.e. `p(λ_i)` for every eigenvalue.
pub fn frequency_response(filter: &GraphFilter, basis: &SpectralBasis) -> DVector<f64> {
    basis.eigenvalues().map(|l| filter.eval(l))
}

/// `y = V diag(Ψh) U x`.
pub fn apply_filter(filter: &GraphFilter, basis: &SpectralBasis, x: &DVector<f64>) -> Result<DVector<f64>> {
    if x.len() != basis.n() {
        return Err(Error::LengthMismatch { expected: basis.n(), got: x.len() });
    }
    check_order(filter, basis)?;
    let mut spectrum = basis.forward(x);
    spectrum.component_mul_assign(&frequency_response(filter, basis));
    Ok(basis.inverse(&spectrum))
}

/// Vandermonde evaluation of a filter at arbitrary points.
pub fn response_at(filter: &GraphFilter, points: &[f64]) -> DVector<f64> {
    vandermonde(points, filter.order()) * DVector::from_column_slice(filter.coeffs())
}

/// A root shared by every polynomial, with the smallest multiplicity observed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharedRoot {
    #[serde(serialize_with = "complex_pair")]
    pub value: Complex<f64>,
    pub multiplicity: usize,
}

fn complex_pair<S: serde::Serializer>(z: &Complex<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

/// Roots of `Σ c_l z^l` from the companion matrix after trimming negligible
/// top-degree coefficients. A nonzero constant has no roots.
pub fn poly_roots(coeffs: &[f64]) -> Result<Vec<Complex<f64>>> {
    let scale = coeffs.iter().fold(0.0_f64, |a, c| a.max(c.abs()));
    if scale <= TRIM_TOL {
        return Err(Error::DegenerateFilter);
    }
    let degree = coeffs.iter().rposition(|c| c.abs() > TRIM_TOL * scale).expect("scale > 0");
    if degree == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[degree];
    let mut companion = DMatrix::zeros(degree, degree);
    for i in 1..degree {
        companion[(i, i - 1)] = 1.0;
    }
    for i in 0..degree {
        companion[(i, degree - 1)] = -coeffs[i] / lead;
    }
    Ok(companion.complex_eigenvalues().iter().copied().collect())
}

/// Roots shared by all polynomials. Two roots match when they lie within
/// `tol` (default `1e-7·(1 + max|root|)`); roots repeated within one
/// polynomial are merged and counted as multiplicity.
pub fn common_roots(polys: &[&[f64]], tol: Option<f64>) -> Result<Vec<SharedRoot>> {
    let roots: Vec<Vec<Complex<f64>>> = polys.iter().map(|p| poly_roots(p)).collect::<Result<_>>()?;
    let Some(first) = roots.first() else {
        return Ok(Vec::new());
    };
    let max_abs = roots.iter().flatten().fold(0.0_f64, |a, r| a.max(r.norm()));
    let tol = tol.unwrap_or(1e-7 * (1.0 + max_abs));

    let mut clusters: Vec<(Complex<f64>, usize)> = Vec::new();
    for &r in first {
        match clusters.iter_mut().find(|(c, _)| (c - r).norm() <= tol) {
            Some((c, k)) => {
                *c = (*c * *k as f64 + r) / (*k as f64 + 1.0);
                *k += 1;
            }
            None => clusters.push((r, 1)),
        }
    }

    let mut shared = Vec::new();
    for (center, mult) in clusters {
        let mut multiplicity = mult;
        for other in &roots[1..] {
            let hits = other.iter().filter(|r| (*r - center).norm() <= tol).count();
            multiplicity = multiplicity.min(hits);
        }
        if multiplicity > 0 {
            shared.push(SharedRoot { value: center, multiplicity });
        }
    }
    Ok(shared)
}

/// Random filter recipes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum FilterRule {
    /// `h⁽ᵐ⁾ = a h⁽¹⁾ + (1 − a) n⁽ᵐ⁾` for m > 1, all draws standard normal.
    CorrelatedNormal {
        m: usize,
        l: usize,
        a: f64,
    },
    IidNormal {
        orders: Vec<usize>,
    },
    /// Standard normal with the first coefficient of the first filter set to 1.
    FirstEntryOne {
        orders: Vec<usize>,
    },
    /// First coefficient 1, the rest uniform on `[lo, hi]` sorted descending.
    DecreasingPositive {
        orders: Vec<usize>,
        lo: f64,
        hi: f64,
    },
}

impl FilterRule {
    pub fn orders(&self) -> Vec<usize> {
        match self {
            FilterRule::CorrelatedNormal { m, l, .. } => vec![*l; *m],
            FilterRule::IidNormal { orders }
            | FilterRule::FirstEntryOne { orders }
            | FilterRule::DecreasingPositive { orders, .. } => orders.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let orders = self.orders();
        if orders.is_empty() || orders.contains(&0) {
            return Err(Error::InvalidRule(format!("orders {orders:?} must be non-empty and positive")));
        }
        match self {
            FilterRule::CorrelatedNormal { a, .. } if !(0.0..=1.0).contains(a) => {
                Err(Error::InvalidRule(format!("correlation weight a = {a} outside [0, 1]")))
            }
            FilterRule::DecreasingPositive { lo, hi, .. } if !(*lo > 0.0 && lo <= hi && hi.is_finite()) => {
                Err(Error::InvalidRule(format!("range [{lo}, {hi}] must be positive and ordered")))
            }
            _ => Ok(()),
        }
    }

    /// Independent multi-process filters.
    pub fn generate_bank<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<FilterBank> {
        self.validate()?;
        let coeffs = match self {
            FilterRule::CorrelatedNormal { m, l, a } => {
                let base = normals(rng, *l);
                let mut out = vec![base.clone()];
                for _ in 1..*m {
                    let noise = normals(rng, *l);
                    out.push(base.iter().zip(&noise).map(|(h, n)| a * h + (1.0 - a) * n).collect());
                }
                out
            }
            FilterRule::IidNormal { orders } => orders.iter().map(|&l| normals(rng, l)).collect(),
            FilterRule::FirstEntryOne { orders } => {
                let mut out: Vec<Vec<f64>> = orders.iter().map(|&l| normals(rng, l)).collect();
                out[0][0] = 1.0;
                out
            }
            FilterRule::DecreasingPositive { orders, lo, hi } => {
                orders.iter().map(|&l| decreasing_positive(rng, l, *lo, *hi)).collect()
            }
        };
        FilterBank::from_coeffs(coeffs)
    }

    /// Nested single-process filters; the rule describes `h⁽ᴹ⁾`.
    pub fn generate_increments<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<IncrementBank> {
        self.validate()?;
        if matches!(self, FilterRule::CorrelatedNormal { .. }) {
            return Err(Error::InvalidRule("correlated_normal has no single-process form".into()));
        }
        let orders = self.orders();
        check_increasing(&orders)?;
        let total = *orders.last().expect("validated");
        let d = match self {
            FilterRule::CorrelatedNormal { .. } => unreachable!(),
            FilterRule::IidNormal { .. } => normals(rng, total),
            FilterRule::FirstEntryOne { .. } => {
                let mut d = normals(rng, total);
                d[0] = 1.0;
                d
            }
            FilterRule::DecreasingPositive { lo, hi, .. } => decreasing_positive(rng, total, *lo, *hi),
        };
        IncrementBank::new(d, orders)
    }
}

fn normals<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

fn decreasing_positive<R: Rng + ?Sized>(rng: &mut R, len: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut tail: Vec<f64> = (1..len).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect();
    tail.sort_by(|a, b| b.total_cmp(a));
    let mut out = Vec::with_capacity(len);
    out.push(1.0);
    out.extend(tail);
    out
}

/// Input signal recipes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InputKind {
    /// First `k` graph-frequency coefficients standard normal, the rest zero.
    Bandlimited { k: usize },
    /// Node-domain entries standard normal.
    FullNormal,
}

/// Returns the input `x` and its spectrum `x̃ = U x`.
pub fn generate_input<R: Rng + ?Sized>(
    kind: InputKind,
    basis: &SpectralBasis,
    rng: &mut R,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let n = basis.n();
    match kind {
        InputKind::Bandlimited { k } => {
            if k > n {
                return Err(Error::InvalidParams(format!("bandwidth k = {k} exceeds n = {n}")));
            }
            let mut x_hat = DVector::zeros(n);
            for i in 0..k {
                x_hat[i] = rng.sample(StandardNormal);
            }
            Ok((basis.inverse(&x_hat), x_hat))
        }
        InputKind::FullNormal => {
            let x = DVector::from_vec(normals(rng, n));
            let x_hat = basis.forward(&x);
            Ok((x, x_hat))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Gso;
    use crate::spectral::eigendecompose;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn path_basis(n: usize) -> (Gso, SpectralBasis) {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
        let g = Gso::from_edges(n, &edges).unwrap();
        let b = eigendecompose(&g).unwrap();
        (g, b)
    }

    #[test]
    fn identity_and_shift_filters() {
        let (g, b) = path_basis(5);
        let x = DVector::from_vec(vec![1.0, -2.0, 0.5, 3.0, 0.0]);
        let y = apply_filter(&GraphFilter::new(vec![1.0]).unwrap(), &b, &x).unwrap();
        assert!((y - &x).norm() < 1e-12);
        let y = apply_filter(&GraphFilter::new(vec![0.0, 1.0]).unwrap(), &b, &x).unwrap();
        assert!((y - g.matrix() * &x).norm() < 1e-12);
    }

    #[test]
    fn order_above_distinct_count_rejected() {
        let (_, b) = path_basis(3);
        let f = GraphFilter::new(vec![1.0; 4]).unwrap();
        assert!(matches!(
            apply_filter(&f, &b, &DVector::zeros(3)),
            Err(Error::OrderExceedsMinimalPolynomial { order: 4, n_distinct: 3 })
        ));
    }

    #[test]
    fn constant_filter_response() {
        let (_, b) = path_basis(4);
        let r = frequency_response(&GraphFilter::new(vec![2.5]).unwrap(), &b);
        assert!(r.iter().all(|v| *v == 2.5));
    }

    #[test]
    fn response_vanishes_at_root() {
        // P2 has eigenvalues ±1; p(z) = z - 1 vanishes at λ = 1
        let (_, b) = path_basis(2);
        let r = frequency_response(&GraphFilter::new(vec![-1.0, 1.0]).unwrap(), &b);
        assert!(r[1].abs() < 1e-14);
        assert!((r[0] + 2.0).abs() < 1e-14);
    }

    #[test]
    fn shared_root_found() {
        // (z-1)(z-2) = z² - 3z + 2, (z-1)(z-3) = z² - 4z + 3
        let shared = common_roots(&[&[2.0, -3.0, 1.0], &[3.0, -4.0, 1.0]], None).unwrap();
        assert_eq!(shared.len(), 1);
        assert!((shared[0].value - Complex::new(1.0, 0.0)).norm() < 1e-9);
        assert_eq!(shared[0].multiplicity, 1);
    }

    #[test]
    fn no_shared_root() {
        assert!(common_roots(&[&[-1.0, 1.0], &[-2.0, 1.0]], None).unwrap().is_empty());
    }

    #[test]
    fn repeated_shared_root_reports_multiplicity() {
        // (z-1)²(z+2) and (z-1)²(z-4)
        let p1 = [2.0, -3.0, 0.0, 1.0];
        let p2 = [-4.0, 9.0, -6.0, 1.0];
        let shared = common_roots(&[&p1, &p2], None).unwrap();
        assert_eq!(shared.len(), 1);
        assert_eq!(shared[0].multiplicity, 2);
    }

    #[test]
    fn zero_filter_is_degenerate() {
        assert_eq!(common_roots(&[&[0.0, 0.0], &[1.0, 1.0]], None), Err(Error::DegenerateFilter));
    }

    #[test]
    fn trailing_zeros_trimmed() {
        let roots = poly_roots(&[-2.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0].re - 2.0).abs() < 1e-12);
        assert!(poly_roots(&[3.0]).unwrap().is_empty());
    }

    #[test]
    fn full_correlation_gives_identical_filters() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let bank = FilterRule::CorrelatedNormal { m: 4, l: 5, a: 1.0 }.generate_bank(&mut rng).unwrap();
        for f in bank.filters() {
            assert_eq!(f, &bank.filters()[0]);
        }
    }

    #[test]
    fn decreasing_positive_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let rule = FilterRule::DecreasingPositive { orders: vec![3, 5, 7], lo: 0.2, hi: 1.0 };
        let inc = rule.generate_increments(&mut rng).unwrap();
        let d = inc.d();
        assert_eq!(d.len(), 7);
        assert_eq!(d[0], 1.0);
        assert!(d.iter().all(|v| *v > 0.0));
        assert!(d.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn invalid_rules() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            FilterRule::CorrelatedNormal { m: 2, l: 2, a: 1.5 }.generate_bank(&mut rng),
            Err(Error::InvalidRule(_))
        ));
        assert!(matches!(
            FilterRule::IidNormal { orders: vec![4, 2] }.generate_increments(&mut rng),
            Err(Error::NonIncreasingOrders(_))
        ));
        assert!(matches!(
            FilterRule::CorrelatedNormal { m: 2, l: 2, a: 0.5 }.generate_increments(&mut rng),
            Err(Error::InvalidRule(_))
        ));
    }

    #[test]
    fn increment_bank_prefixes() {
        let inc = IncrementBank::new((1..=8).map(f64::from).collect(), vec![2, 4, 6, 8]).unwrap();
        assert_eq!(inc.increment_lengths(), vec![2, 2, 2, 2]);
        for m in 0..4 {
            assert_eq!(inc.filter(m).coeffs(), &inc.d()[..2 * (m + 1)]);
        }
        let concat: Vec<f64> = inc.increments().concat();
        assert_eq!(concat, inc.d());
        let padded = inc.padded(&[3, 5, 7, 9]).unwrap();
        assert_eq!(padded.len(), 24);
        assert_eq!(&padded.as_slice()[3..8], &[0.0, 0.0, 3.0, 4.0, 0.0]);
    }

    #[test]
    fn bandlimited_input() {
        let (_, b) = path_basis(6);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (x, x_hat) = generate_input(InputKind::Bandlimited { k: 3 }, &b, &mut rng).unwrap();
        assert!(x_hat.rows(3, 3).iter().all(|v| *v == 0.0));
        assert!((b.forward(&x) - &x_hat).norm() < 1e-9 * x_hat.norm());
        assert!(generate_input(InputKind::Bandlimited { k: 7 }, &b, &mut rng).is_err());
    }

    #[test]
    fn bank_json_round_trip() {
        let bank = FilterBank::from_coeffs(vec![vec![1.0, -0.5], vec![2.0, 0.0, 0.25]]).unwrap();
        let text = serde_json::to_string(&bank).unwrap();
        assert_eq!(text, r#"{"orders":[2,3],"coeffs":[[1.0,-0.5],[2.0,0.0,0.25]]}"#);
        let back: FilterBank = serde_json::from_str(&text).unwrap();
        assert_eq!(back, bank);
        assert!(serde_json::from_str::<FilterBank>(r#"{"orders":[3],"coeffs":[[1.0]]}"#).is_err());
    }
}
