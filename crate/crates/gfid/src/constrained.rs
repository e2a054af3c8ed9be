//! Shape priors on the longest nested filter.
//!
//! With overshoot blocks `d̄⁽¹⁾, …, d̄⁽ᴹ⁾` the longest filter is
//! `h⁽ᴹ⁾_l = Σ_m d̄⁽ᵐ⁾_l`, and every shorter filter is a prefix of it, so the
//! priors are stated on `h⁽ᴹ⁾` alone.

use gfid_core::sparse::{solve_l1_constrained, AdmmSettings, L1Solution, LinearInequality, SparseProblem};
use gfid_core::Result;

use crate::config::Constraint;

/// `h⁽ᴹ⁾_l` as a linear form in the free coefficients; the pinned entry
/// contributes its value one to the offset.
fn collapsed_entry(overshoot: &[usize], pin: usize, l: usize) -> LinearInequality {
    let mut coeffs = Vec::new();
    let mut offset = 0.0;
    let mut start = 0;
    for &q in overshoot {
        if l < q {
            let j = start + l;
            match j.cmp(&pin) {
                std::cmp::Ordering::Equal => offset += 1.0,
                std::cmp::Ordering::Less => coeffs.push((j, 1.0)),
                std::cmp::Ordering::Greater => coeffs.push((j - 1, 1.0)),
            }
        }
        start += q;
    }
    LinearInequality { coeffs, offset }
}

/// Inequalities `g(w) ≥ 0` encoding the prior.
pub fn collapsed_constraints(overshoot: &[usize], pin: usize, constraint: Constraint) -> Vec<LinearInequality> {
    let len = overshoot.iter().copied().max().unwrap_or(0);
    let entries: Vec<LinearInequality> = (0..len).map(|l| collapsed_entry(overshoot, pin, l)).collect();
    let mut out = Vec::new();
    if constraint == Constraint::None {
        return out;
    }
    out.extend(entries.iter().cloned());
    if constraint == Constraint::NonnegDecreasing {
        for w in entries.windows(2) {
            let mut coeffs = w[0].coeffs.clone();
            coeffs.extend(w[1].coeffs.iter().map(|&(j, c)| (j, -c)));
            out.push(LinearInequality { coeffs, offset: w[0].offset - w[1].offset });
        }
    }
    out
}

/// Ball-form weighted ℓ1 recovery with an optional shape prior on the
/// collapsed filter. `Constraint::None` is the plain solver.
pub fn constrained_variants(
    problem: &SparseProblem,
    overshoot: &[usize],
    constraint: Constraint,
) -> Result<L1Solution> {
    let cons = collapsed_constraints(overshoot, problem.pin, constraint);
    solve_l1_constrained(problem, &cons, &AdmmSettings::default())
}
