mod common;

use common::{multi, single};
use gfid_core::dst::{build_system, SystemVariant};
use gfid_core::filters::{FilterBank, FilterRule, InputKind};
use gfid_core::graph::{GraphModel, Gso};
use gfid_core::identifiability::{check_multi, Verdict};
use gfid_core::recover_ls::alignment_error;
use gfid_core::sparse::{
    build_weights, solve_l1_ball, solve_l1_constrained, solve_l1_equality, AdmmSettings, LinearInequality,
    SparseProblem, WeightScheme,
};
use gfid_core::spectral::{eigendecompose, SpectralSupport};
use nalgebra::DVector;
use proptest::prelude::*;

fn models() -> impl Strategy<Value = GraphModel> {
    prop_oneof![
        Just(GraphModel::ErdosRenyi { n: 20, p: 0.2 }),
        Just(GraphModel::WattsStrogatz { n: 20, mean_degree: 4, rewire_p: 0.2 }),
        Just(GraphModel::StochasticBlock { n: 20, blocks: vec![10, 10], p_within: 0.3, p_across: 0.1 }),
        Just(GraphModel::WeightedErdosRenyi { n: 20, p: 0.2, w_lo: 0.1, w_hi: 0.7 }),
    ]
}

fn nested_orders() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::btree_set(1usize..7, 2..4).prop_map(|s| s.into_iter().collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn multi_systems_annihilate_truth(model in models(), orders in prop::collection::vec(1usize..5, 2..5), extra in 0usize..3, seed in any::<u64>()) {
        let rule = FilterRule::IidNormal { orders: orders.clone() };
        let inst = multi(&model, &rule, InputKind::FullNormal, 0.0, seed);
        let known = build_system(&inst.obs, &inst.basis, &SystemVariant::MultiKnown { orders: orders.clone() }).unwrap();
        let fro = known.matrix.norm();
        prop_assert!(known.residual(&inst.bank.stacked()) <= 1e-9 * fro);

        let q: Vec<usize> = orders.iter().map(|l| l + extra).collect();
        let over = build_system(&inst.obs, &inst.basis, &SystemVariant::MultiOvershoot { orders: q.clone() }).unwrap();
        prop_assert!(over.residual(&inst.bank.padded(&q).unwrap()) <= 1e-9 * over.matrix.norm());
    }

    #[test]
    fn single_systems_annihilate_truth(model in models(), orders in nested_orders(), extra in 0usize..3, seed in any::<u64>()) {
        let rule = FilterRule::IidNormal { orders: orders.clone() };
        let inst = single(&model, &rule, InputKind::FullNormal, 0.0, seed);
        let known = build_system(&inst.obs, &inst.basis, &SystemVariant::SingleKnown { orders: orders.clone() }).unwrap();
        let d = DVector::from_column_slice(inst.inc.d());
        prop_assert!(known.residual(&d) <= 1e-9 * known.matrix.norm());

        let q: Vec<usize> = orders.iter().map(|l| l + extra).collect();
        let over = build_system(&inst.obs, &inst.basis, &SystemVariant::SingleOvershoot { orders: q.clone() }).unwrap();
        prop_assert!(over.residual(&inst.inc.padded(&q).unwrap()) <= 1e-9 * over.matrix.norm());
    }

    #[test]
    fn overshoot_at_true_order_is_known_system(orders in prop::collection::vec(1usize..5, 2..4), seed in any::<u64>()) {
        let inst = multi(&GraphModel::ErdosRenyi { n: 15, p: 0.3 }, &FilterRule::IidNormal { orders: orders.clone() }, InputKind::FullNormal, 0.0, seed);
        let a = build_system(&inst.obs, &inst.basis, &SystemVariant::MultiKnown { orders: orders.clone() }).unwrap();
        let b = build_system(&inst.obs, &inst.basis, &SystemVariant::MultiOvershoot { orders }).unwrap();
        prop_assert_eq!(a.matrix, b.matrix);
    }

    #[test]
    fn alignment_ignores_scale_and_sign(v in prop::collection::vec(-5.0f64..5.0, 1..12), alpha in prop_oneof![-1e3f64..-1e-3, 1e-3f64..1e3]) {
        let h = DVector::from_vec(v);
        prop_assume!(h.norm() > 1e-6);
        prop_assert!(alignment_error(&(&h * alpha), &h).unwrap() < 1e-12);
        let other = h.map(|x| x + 0.1);
        let e1 = alignment_error(&other, &h).unwrap();
        let e2 = alignment_error(&(&other * alpha), &h).unwrap();
        prop_assert!((e1 - e2).abs() < 1e-12);
    }

    #[test]
    fn ball_solution_is_feasible_and_no_worse_than_truth(seed in any::<u64>(), sigma in prop_oneof![Just(1e-3), Just(1e-2)], exp in any::<bool>()) {
        let inst = multi(&GraphModel::ErdosRenyi { n: 30, p: 0.1 }, &FilterRule::FirstEntryOne { orders: vec![3; 3] }, InputKind::FullNormal, sigma, seed);
        let q = [4, 4, 4];
        let sys = build_system(&inst.obs, &inst.basis, &SystemVariant::MultiOvershoot { orders: q.to_vec() }).unwrap();
        let scheme = if exp { WeightScheme::Exponential } else { WeightScheme::Identity };
        let problem = SparseProblem::from_system(&sys, &build_weights(&scheme, &q).unwrap(), 0).unwrap()
            .with_truth(&inst.bank.padded(&q).unwrap()).unwrap();
        let eps = problem.oracle_epsilon().unwrap();
        let problem = problem.with_epsilon(eps).unwrap();
        let sol = solve_l1_ball(&problem).unwrap();
        let residual = (&problem.phi * &sol.w + &problem.b).norm();
        prop_assert!(residual <= eps * (1.0 + 1e-6) + 1e-9);
        let truth_obj = problem.objective(problem.truth.as_ref().unwrap());
        prop_assert!(sol.objective <= truth_obj * (1.0 + 1e-6) + 1e-9);
    }

    #[test]
    fn weight_scale_does_not_move_the_minimizer(seed in any::<u64>(), c in 0.1f64..10.0) {
        let inst = multi(&GraphModel::ErdosRenyi { n: 30, p: 0.1 }, &FilterRule::FirstEntryOne { orders: vec![3; 3] }, InputKind::FullNormal, 0.0, seed);
        let q = [4, 4, 4];
        let sys = build_system(&inst.obs, &inst.basis, &SystemVariant::MultiOvershoot { orders: q.to_vec() }).unwrap();
        let base = build_weights(&WeightScheme::Exponential, &q).unwrap();
        let scaled = build_weights(&WeightScheme::Custom { diag: base.diag().iter().map(|d| d * c).collect() }, &q).unwrap();
        let a = solve_l1_equality(&SparseProblem::from_system(&sys, &base, 0).unwrap()).unwrap();
        let b = solve_l1_equality(&SparseProblem::from_system(&sys, &scaled, 0).unwrap()).unwrap();
        prop_assert!((a.objective * c - b.objective).abs() <= 1e-6 * b.objective.max(1.0));
    }
}

#[test]
fn nonnegativity_constraint_is_respected() {
    for seed in 0..20 {
        let rule = FilterRule::DecreasingPositive { orders: vec![3; 3], lo: 0.2, hi: 1.0 };
        let inst = multi(&GraphModel::ErdosRenyi { n: 30, p: 0.1 }, &rule, InputKind::FullNormal, 1e-2, seed);
        let q = [4, 4, 4];
        let sys = build_system(&inst.obs, &inst.basis, &SystemVariant::MultiOvershoot { orders: q.to_vec() }).unwrap();
        let problem = SparseProblem::from_system(&sys, &build_weights(&WeightScheme::Identity, &q).unwrap(), 0)
            .unwrap()
            .with_truth(&inst.bank.padded(&q).unwrap())
            .unwrap();
        let eps = problem.oracle_epsilon().unwrap();
        let problem = problem.with_epsilon(eps).unwrap();
        let cons: Vec<LinearInequality> =
            (0..problem.n_free()).map(|k| LinearInequality { coeffs: vec![(k, 1.0)], offset: 0.0 }).collect();
        let sol = solve_l1_constrained(&problem, &cons, &AdmmSettings::default()).unwrap();
        assert!(sol.w.iter().all(|&x| x >= -1e-6), "seed {seed}: {:?}", sol.w);
        assert!((&problem.phi * &sol.w + &problem.b).norm() <= eps * (1.0 + 1e-5) + 1e-8);
    }
}

#[test]
fn no_constraints_matches_plain_solver() {
    let inst = multi(
        &GraphModel::ErdosRenyi { n: 30, p: 0.1 },
        &FilterRule::FirstEntryOne { orders: vec![3; 3] },
        InputKind::FullNormal,
        0.0,
        3,
    );
    let q = [4, 4, 4];
    let sys = build_system(&inst.obs, &inst.basis, &SystemVariant::MultiOvershoot { orders: q.to_vec() }).unwrap();
    let problem = SparseProblem::from_system(&sys, &build_weights(&WeightScheme::Exponential, &q).unwrap(), 0).unwrap();
    let a = solve_l1_equality(&problem).unwrap();
    let b = solve_l1_constrained(&problem, &[], &AdmmSettings::default()).unwrap();
    assert_eq!(a.w, b.w);
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn path_basis(n: usize) -> gfid_core::spectral::SpectralBasis {
    let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
    eigendecompose(&Gso::from_edges(n, &edges).unwrap()).unwrap()
}

#[test]
fn repeated_shared_root_is_unidentifiable() {
    // (z - 0.5)² divides the first filter, (z - 0.5) the second
    let square = poly_mul(&[-0.5, 1.0], &[-0.5, 1.0]);
    let h1 = poly_mul(&square, &[0.3, 1.0]);
    let h2 = poly_mul(&[-0.5, 1.0], &[2.0, -1.0, 0.7]);
    let bank = FilterBank::from_coeffs(vec![h1, h2]).unwrap();
    let roots = bank.common_roots(None).unwrap();
    assert_eq!(roots.len(), 1);
    assert!((roots[0].value.re - 0.5).abs() < 1e-7 && roots[0].value.im.abs() < 1e-7);

    let basis = path_basis(12);
    let support = SpectralSupport::from_omega1((0..12).collect(), &basis);
    let report = check_multi(&bank, &support, &basis).unwrap();
    assert_eq!(report.sufficient, Verdict::Violated);
    assert_eq!(report.necessary_violated, Verdict::Holds);
    assert!(!report.exact);
    assert!(report.null_dim >= 2);
}

#[test]
fn repeated_unshared_root_stays_identifiable() {
    let square = poly_mul(&[-0.5, 1.0], &[-0.5, 1.0]);
    let h1 = poly_mul(&square, &[0.3, 1.0]);
    let h2 = vec![1.0, 0.4, -0.8, 0.2];
    let bank = FilterBank::from_coeffs(vec![h1.clone(), h2.clone()]).unwrap();
    assert!(bank.common_roots(None).unwrap().is_empty());
    let multiplicity = gfid_core::filters::common_roots(&[&h1, &h1], None).unwrap();
    assert_eq!(multiplicity.iter().find(|r| (r.value.re - 0.5).abs() < 1e-6).map(|r| r.multiplicity), Some(2));

    let basis = path_basis(12);
    // L_max + L_min - 1 = 7
    let support = SpectralSupport::from_omega1((0..7).collect(), &basis);
    let report = check_multi(&bank, &support, &basis).unwrap();
    assert_eq!(report.sufficient, Verdict::Holds);
    assert!(report.exact);
}
