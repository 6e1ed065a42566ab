mod common;

use chainscope::discretization::{discretize, estimate_df, SystemSpec};
use chainscope::*;
use common::*;
use proptest::prelude::*;

fn arb_relation(max_n: usize) -> impl Strategy<Value = FiniteRelation> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n), 1..=2 * n).prop_map(move |e| FiniteRelation::new(n, e).unwrap())
    })
}

fn arb_instance(max_n: usize) -> impl Strategy<Value = (FiniteRelation, FiniteMetricSpace<f64>)> {
    (1..=max_n).prop_flat_map(|n| {
        (
            prop::collection::vec((0..n, 0..n), 1..=2 * n),
            prop::collection::vec(0.0f64..1.0, n),
        )
            .prop_map(move |(e, pts)| {
                let f = FiniteRelation::new(n, e).unwrap();
                let d = FiniteMetricSpace::from_fn_unchecked(n, |i, j| (pts[i] - pts[j]).abs());
                (f, d)
            })
    })
}

fn same_n(n: usize) -> impl Strategy<Value = (FiniteRelation, FiniteRelation, FiniteRelation)> {
    let one = move || prop::collection::vec((0..n, 0..n), 1..=2 * n).prop_map(move |e| FiniteRelation::new(n, e).unwrap());
    (one(), one(), one())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn compose_is_associative((f, g, h) in (1usize..=5).prop_flat_map(same_n)) {
        let left = compose(&h, &g).ok().and_then(|hg| compose(&hg, &f).ok());
        let right = compose(&g, &f).ok().and_then(|gf| compose(&h, &gf).ok());
        prop_assert_eq!(left, right);
    }

    #[test]
    fn inverse_reverses_composition((f, g, _) in (1usize..=5).prop_flat_map(same_n)) {
        if let Ok(gf) = compose(&g, &f) {
            prop_assert_eq!(invert(&gf), compose(&invert(&f), &invert(&g)).unwrap());
        }
        prop_assert_eq!(invert(&invert(&f)), f);
    }

    #[test]
    fn barrier_is_below_the_metric_after_an_edge((f, d) in arb_instance(6)) {
        // ℓ(x, y) ≤ d(x, a) + d(b, y) for every edge (a, b), and m ≤ ℓ
        let l = barrier(&f, &d, Mode::Length, JumpPolicy::FreeInitial, &Sources::All).unwrap();
        let m = barrier(&f, &d, Mode::Bound, JumpPolicy::FreeInitial, &Sources::All).unwrap();
        let n = d.len();
        for x in 0..n {
            for y in 0..n {
                let lv = l.get(x, y).unwrap();
                prop_assert!(m.get(x, y).unwrap() <= lv + 1e-12);
                for &(a, b) in f.edges() {
                    prop_assert!(lv <= d.dist(x, a) + d.dist(b, y) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn barrier_is_lipschitz_in_both_arguments((f, d) in arb_instance(6)) {
        // |ℓ(x, y) − ℓ(x', y')| ≤ d(x, x') + d(y, y'); same for m
        let n = d.len();
        for mode in [Mode::Length, Mode::Bound] {
            let b = barrier(&f, &d, mode, JumpPolicy::FreeInitial, &Sources::All).unwrap();
            for x in 0..n { for x2 in 0..n { for y in 0..n { for y2 in 0..n {
                let (v, w) = (b.get(x, y).unwrap(), b.get(x2, y2).unwrap());
                prop_assert!((v - w).abs() <= d.dist(x, x2) + d.dist(y, y2) + 1e-12);
            }}}}
        }
    }

    #[test]
    fn inverse_relation_swaps_arguments((f, d) in arb_instance(6)) {
        let inv = invert(&f);
        let n = d.len();
        for mode in [Mode::Length, Mode::Bound] {
            let b = barrier(&f, &d, mode, JumpPolicy::FreeInitial, &Sources::All).unwrap();
            let c = barrier(&inv, &d, mode, JumpPolicy::FreeInitial, &Sources::All).unwrap();
            for x in 0..n { for y in 0..n {
                prop_assert!(same(b.get(x, y).unwrap(), c.get(y, x).unwrap(), 1e-12));
            }}
        }
    }

    #[test]
    fn barrier_is_monotone_in_the_relation((f, d) in arb_instance(5), extra in prop::collection::vec((0usize..5, 0usize..5), 1..4)) {
        let n = d.len();
        let g = f.union(&FiniteRelation::new(n, extra.into_iter().map(|(a, b)| (a % n, b % n))).unwrap()).unwrap();
        for mode in [Mode::Length, Mode::Bound] {
            let bf = barrier(&f, &d, mode, JumpPolicy::FreeInitial, &Sources::All).unwrap();
            let bg = barrier(&g, &d, mode, JumpPolicy::FreeInitial, &Sources::All).unwrap();
            for x in 0..n { for y in 0..n {
                prop_assert!(bg.get(x, y).unwrap() <= bf.get(x, y).unwrap() + 1e-12);
            }}
        }
    }

    #[test]
    fn anchored_dominates_free((f, d) in arb_instance(6)) {
        let n = d.len();
        for mode in [Mode::Length, Mode::Bound] {
            let free = barrier(&f, &d, mode, JumpPolicy::FreeInitial, &Sources::All).unwrap();
            let anch = barrier(&f, &d, mode, JumpPolicy::Anchored, &Sources::All).unwrap();
            for x in 0..n { for y in 0..n {
                prop_assert!(free.get(x, y).unwrap() <= anch.get(x, y).unwrap());
            }}
        }
    }

    #[test]
    fn quotient_projection_is_one_lipschitz((f, d) in arb_instance(5), zero in 0.0f64..0.3) {
        let rho = mixing::rho_pseudometric(&f, &d, JumpGraph::Complete).unwrap();
        let q = quotient_by_zero_set(&rho, zero);
        let n = d.len();
        for x in 0..n { for y in 0..n {
            prop_assert!(q.quotient.get(q.class_of[x], q.class_of[y]) <= rho.get(x, y));
        }}
    }

    #[test]
    fn relation_json_round_trips(f in arb_relation(6)) {
        prop_assert_eq!(FiniteRelation::from_json(&f.to_json().unwrap()).unwrap(), f.clone());
        let mut buf = Vec::new();
        f.to_csv(&mut buf).unwrap();
        prop_assert_eq!(FiniteRelation::from_csv(&buf[..], Some(f.n_points())).unwrap(), f);
    }

    #[test]
    fn outer_scheme_contains_nearest(n in 3usize..40, lip in 0.0f64..4.0, doubling in any::<bool>()) {
        let base = if doubling { SystemSpec::doubling(n) } else { SystemSpec::golden_rotation(n) };
        let near = discretize::<f64>(&base).unwrap();
        let outer = discretize::<f64>(&base.with_scheme(discretization::Scheme::Outer { lipschitz: lip })).unwrap();
        prop_assert!(near.relation.is_subset_of(&outer.relation));
    }

    #[test]
    fn df_is_monotone_and_dominates(n in 3usize..30, k in 0usize..40) {
        let spec = SystemSpec::golden_rotation(n).with_metric(discretization::MetricKind::SqrtDistorted);
        let sys = discretize::<f64>(&spec).unwrap();
        let a = estimate_df(&sys.space, &sys.relation, k).unwrap();
        let b = estimate_df(&sys.space, &sys.relation, k + 1).unwrap();
        prop_assert!(a.validate(1e-12).is_pseudo_metric);
        for x in 0..n { for y in 0..n {
            prop_assert!(a.get(x, y) <= b.get(x, y));
            prop_assert!(sys.space.dist(x, y) <= a.get(x, y));
        }}
    }
}

#[test]
fn df_at_zero_iterations_is_d() {
    let sys = discretize::<f64>(&SystemSpec::doubling(16)).unwrap();
    let df = estimate_df(&sys.space, &sys.relation, 0).unwrap();
    assert_eq!(&df.table, sys.space.table());
}

#[test]
fn isometric_rotation_keeps_d() {
    let sys = discretize::<f64>(&SystemSpec::rotation(discretization::Alpha::Value(0.25), 16)).unwrap();
    for k in [1, 5, 64] {
        let df = estimate_df(&sys.space, &sys.relation, k).unwrap();
        assert_eq!(&df.table, sys.space.table());
    }
    let rho = mixing::rho_pseudometric(&sys.relation, &sys.space, JumpGraph::Complete).unwrap();
    assert_eq!(mixing::isometry_defect(&sys.relation, &PseudoMetricTable::new(sys.space.table().clone(), false)), 0.0);
    assert!(mixing::isometry_defect(&sys.relation, &rho) <= 1e-12);
}

#[test]
fn metric_family_keeps_rotation_minimal() {
    use discretization::{circle_metrics, CircleMetric};
    let n = 64;
    let sys = discretize::<f64>(&SystemSpec::golden_rotation(n)).unwrap();
    let family = [
        circle_metrics::<f64>(CircleMetric::Arc, n).unwrap(),
        circle_metrics::<f64>(CircleMetric::SqrtDistorted, n).unwrap(),
    ];
    let r = mixing::strong_chain_over_metrics(&sys.relation, &family, 4.0 / n as f64).unwrap();
    assert!(r.is_total());
}

#[test]
fn nonwandering_of_cycles() {
    for n in 1..=5 {
        let map: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
        let f = FiniteRelation::from_map(&map).unwrap();
        assert!(reach(&f).nonwandering.is_total());
        let c = closure(n, f.edges());
        assert!(c.iter().all(|r| r.iter().all(|&b| b)));
    }
}
