use mdrepair::closed_form::{two_node_ec_baseline, two_node_optimal};
use mdrepair::entropy::{theorem3_rates_ordered, theorem4_rates_ordered};
use mdrepair::{
    build_covariance, cond_entropy, mmse_distortion, theorem3_rates, theorem4_rates, ChannelParams, CovarianceModel,
    DistortionSpec, LayerParams, Regime, Var, VariableSet, ABSENT,
};
use proptest::prelude::*;
use proptest::sample::subsequence;

mod common;
use common::{three_node_rates, two_node_distortions, two_node_rates};

fn lg(x: f64) -> f64 {
    x.log2()
}

fn variance() -> impl Strategy<Value = f64> {
    (-4.0f64..4.0).prop_map(f64::exp)
}

fn maybe_absent() -> impl Strategy<Value = f64> {
    prop_oneof![1 => Just(ABSENT), 3 => variance()]
}

fn layer(n: usize) -> impl Strategy<Value = LayerParams> {
    let lo = -1.0 / (n as f64 - 1.0) + 0.02;
    (maybe_absent(), variance(), lo..0.98).prop_map(|(su, sq, rho)| LayerParams::new(su, sq, rho))
}

/// Valid parameters for `n` nodes with `layers` layers below the top.
fn params(n: usize, layers: usize) -> impl Strategy<Value = ChannelParams> {
    (prop::collection::vec(layer(n), layers), maybe_absent())
        .prop_map(move |(layers, top)| ChannelParams::new(n, layers, top))
}

fn any_model() -> impl Strategy<Value = CovarianceModel> {
    (2usize..=4)
        .prop_flat_map(|n| (1..n).prop_flat_map(move |l| params(n, l)))
        .prop_map(|p| build_covariance(&p).unwrap())
}

/// A model and a random split of its variables into three disjoint sets.
fn model_and_sets() -> impl Strategy<Value = (CovarianceModel, [VariableSet; 3])> {
    (any_model(), prop::collection::vec(0u8..4, 32)).prop_map(|(model, tags)| {
        let mut sets: [Vec<Var>; 3] = Default::default();
        for (v, t) in model.vars().iter().zip(&tags) {
            if *t < 3 {
                sets[*t as usize].push(*v);
            }
        }
        let [a, b, c] = sets.map(|s| VariableSet::new(s).unwrap());
        (model, [a, b, c])
    })
}

fn union(a: &VariableSet, b: &VariableSet) -> VariableSet {
    VariableSet::new(a.vars().iter().chain(b.vars()).copied()).unwrap()
}

fn spec() -> impl Strategy<Value = DistortionSpec> {
    (0.01f64..0.99, 0.0f64..1.0).prop_map(|(d1, t)| DistortionSpec::new(d1, d1 * (0.01 + 0.99 * t)).unwrap())
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((1..=n).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn chain_rule((model, [a, b, _]) in model_and_sets()) {
        prop_assume!(!a.is_empty() && !b.is_empty());
        let none = VariableSet::empty();
        let joint = cond_entropy(&model, &union(&a, &b), &none).unwrap();
        let split = cond_entropy(&model, &a, &none).unwrap() + cond_entropy(&model, &b, &a).unwrap();
        prop_assert!((joint - split).abs() < 1e-9, "{joint} vs {split}");
    }

    #[test]
    fn conditioning_reduces_entropy((model, [a, b, c]) in model_and_sets()) {
        prop_assume!(!a.is_empty());
        let coarse = cond_entropy(&model, &a, &b).unwrap();
        let fine = cond_entropy(&model, &a, &union(&b, &c)).unwrap();
        prop_assert!(fine <= coarse + 1e-9, "{fine} > {coarse}");
    }

    #[test]
    fn distributed_rates_ignore_node_labels(
        (p, order) in (3usize..=5).prop_flat_map(|n| (params(n, n - 2), permutation(n)))
    ) {
        let base = theorem3_rates(&p).unwrap();
        let moved = theorem3_rates_ordered(&p, Some(&order)).unwrap();
        prop_assert!((base.r - moved.r).abs() < 1e-9);
        prop_assert!((base.r_repair - moved.r_repair).abs() < 1e-9);
    }

    #[test]
    fn repair_node_rates_ignore_node_labels(
        (p, order) in (2usize..=4).prop_flat_map(|n| (params(n, n - 1), permutation(n)))
    ) {
        let base = theorem4_rates(&p).unwrap();
        let moved = theorem4_rates_ordered(&p, Some(&order)).unwrap();
        prop_assert!((base.r - moved.r).abs() < 1e-9);
        prop_assert!((base.r_repair - moved.r_repair).abs() < 1e-9);
    }

    #[test]
    fn subset_is_a_permutation_invariant(
        (p, picks) in (2usize..=4).prop_flat_map(|n| (params(n, n - 1), subsequence((1..=4).collect::<Vec<_>>(), 2)))
    ) {
        // Any two nodes see the same distortion as nodes 1 and 2.
        let model = build_covariance(&p).unwrap();
        let (i, j) = (picks[0].min(p.n), picks[1].min(p.n));
        prop_assume!(i != j);
        let obs = |a: usize, b: usize| {
            let vars = model.vars().iter().copied().filter(|v| match v {
                Var::Y(_, k) => *k == a || *k == b,
                Var::X | Var::Top => false,
                Var::U(_) => true,
            });
            mmse_distortion(&model, &VariableSet::new(vars).unwrap()).unwrap()
        };
        prop_assert!((obs(i, j) - obs(1, 2)).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn two_node_mmse_closed_forms(su in variance(), sq in variance(), rho in -0.98f64..0.98, s2 in variance()) {
        let model = build_covariance(&ChannelParams::new(2, vec![LayerParams::new(su, sq, rho)], s2)).unwrap();
        let (d1, d2) = two_node_distortions(su, sq, rho, s2);
        let one = VariableSet::new([Var::U(1), Var::Y(1, 1)]).unwrap();
        let all = VariableSet::new([Var::U(1), Var::Y(1, 1), Var::Y(1, 2), Var::Top]).unwrap();
        prop_assert!((mmse_distortion(&model, &one).unwrap() - d1).abs() < 1e-10);
        prop_assert!((mmse_distortion(&model, &all).unwrap() - d2).abs() < 1e-10);
    }

    #[test]
    fn two_node_repair_node_rates_closed_form(
        su in variance(), sq in variance(), rho in -0.95f64..0.95, s2 in variance()
    ) {
        let e = theorem4_rates(&ChannelParams::new(2, vec![LayerParams::new(su, sq, rho)], s2)).unwrap();
        let (d1, _) = two_node_distortions(su, sq, rho, s2);
        let (r, rr) = two_node_rates(su, rho, s2, d1);
        prop_assert!((e.r - r).abs() < 1e-9, "{} vs {r}", e.r);
        prop_assert!((e.r_repair - rr).abs() < 1e-9, "{} vs {rr}", e.r_repair);
    }

    #[test]
    fn three_node_distributed_rates_closed_form(
        su in variance(), sq in variance(), rho in -0.45f64..0.95, s2 in variance()
    ) {
        let e = theorem3_rates(&ChannelParams::new(3, vec![LayerParams::new(su, sq, rho)], s2)).unwrap();
        let (r, rr) = three_node_rates(su, sq, rho, s2);
        prop_assert!((e.r - r).abs() < 1e-9, "{} vs {r}", e.r);
        prop_assert!((e.r_repair - rr.max(0.0)).abs() < 1e-9, "{} vs {rr}", e.r_repair);
    }

    #[test]
    fn optimal_two_node_parameters_are_tight(s in spec()) {
        let point = two_node_optimal(&s).unwrap();
        let e = theorem4_rates(point.params.as_ref().unwrap()).unwrap();
        prop_assert!((e.r_total - 0.5 * lg(1.0 / s.d2)).abs() < 1e-8, "{} at {s:?}", e.r_total);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn two_node_total_meets_the_bound(s in spec()) {
        let point = two_node_optimal(&s).unwrap();
        prop_assert!((point.r_total - 0.5 * lg(1.0 / s.d2)).abs() < 1e-9);
        prop_assert_eq!(point.r_total, point.r + point.r_repair);
        prop_assert!(point.r >= 0.0 && point.r_repair >= 0.0);
    }

    #[test]
    fn ec_baseline_lower_bounds_the_repairable_rate(s in spec()) {
        let ec = two_node_ec_baseline(&s).unwrap();
        prop_assert!(ec <= two_node_optimal(&s).unwrap().r + 1e-9);
    }

    #[test]
    fn repair_rate_falls_as_d2_grows(d1 in 0.02f64..0.98) {
        let mut last = f64::INFINITY;
        for i in 1..=100 {
            let d2 = if i == 100 { d1 } else { d1 * i as f64 / 100.0 };
            let rr = two_node_optimal(&DistortionSpec::new(d1, d2).unwrap()).unwrap().r_repair;
            prop_assert!(rr <= last + 1e-12, "d2 = {d2}: {rr} > {last}");
            last = rr;
        }
    }

    #[test]
    fn equal_distortions_need_no_repair(d1 in 0.01f64..0.99) {
        let point = two_node_optimal(&DistortionSpec::new(d1, d1).unwrap()).unwrap();
        prop_assert!(point.r_repair.abs() < 1e-12);
        prop_assert_eq!(point.regime, Some(Regime::CommonMessage));
    }

    #[test]
    fn repair_rate_continuous_across_boundaries(d1 in 0.51f64..0.99, lower in any::<bool>()) {
        let d2: f64 = if lower { 2.0 * d1 - 1.0 } else { d1 / (2.0 - d1) };
        let eps = 1e-9;
        let at = |d2: f64| two_node_optimal(&DistortionSpec::new(d1, d2).unwrap()).unwrap().r_repair;
        let (left, right) = (at(d2 - eps), at(d2 + eps));
        prop_assert!((left - right).abs() < 1e-6, "{left} vs {right}");
    }
}
