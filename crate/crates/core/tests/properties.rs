mod common;

use bnprune::diagnostics::{default_delta_grid, fit_roc, hellinger, sigma_series, EstimateSeries};
use bnprune::exact::{
    brute_force_marginals, enumerate_feasible, exact_marginals, prune_transition_matrix, DEFAULT_STATE_CAP,
};
use bnprune::io::generate::{block_chain, bloodpressure, grid, two_node_deterministic};
use bnprune::io::{parse_native, serialize_native};
use bnprune::prune::{enumerate_pruned, prune_around, DEFAULT_PRUNED_CAP};
use bnprune::{Assignment, LabelSet, Network};
use common::{all_states, brute_marginals, direct_joint, random_network, RandomNet};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_binary() -> impl Strategy<Value = Network> {
    (1usize..=8, any::<u64>()).prop_map(|(n, seed)| random_network(RandomNet::binary(n), seed))
}

fn small_mixed() -> impl Strategy<Value = Network> {
    (1usize..=5, any::<u64>()).prop_map(|(n, seed)| {
        random_network(
            RandomNet {
                vars: n,
                max_card: 4,
                max_parents: 2,
                zero_chance: 0.3,
            },
            seed,
        )
    })
}

/// A uniformly chosen feasible state, found by brute force.
fn feasible_states(net: &Network) -> Vec<Vec<usize>> {
    all_states(net).into_iter().filter(|x| direct_joint(net, x) > 0.0).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn joint_is_product_of_selected_labels(net in small_mixed(), pick in any::<prop::sample::Index>()) {
        let states = all_states(&net);
        let x = &states[pick.index(states.len())];
        let labels = net.labels_of(x).unwrap();
        prop_assert_eq!(labels.len(), net.num_vars());
        let product: f64 = labels.iter().map(|i| net.label_value_at(i)).product();
        prop_assert_eq!(net.joint_probability(x).unwrap(), product);
        prop_assert_eq!(product, direct_joint(&net, x));
        prop_assert_eq!(net.is_feasible(x).unwrap(), product > 0.0);
    }

    #[test]
    fn joint_sums_to_one(net in small_binary()) {
        let total: f64 = all_states(&net).iter().map(|x| net.joint_probability(x).unwrap()).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn local_conditional_matches_brute_force(net in small_mixed(), pick in any::<prop::sample::Index>(), var in any::<prop::sample::Index>()) {
        let feasible = feasible_states(&net);
        let x = feasible[pick.index(feasible.len())].clone();
        let v = var.index(net.num_vars());
        let mut weights: Vec<f64> = (0..net.cardinality(v))
            .map(|s| {
                let mut y = x.clone();
                y[v] = s;
                direct_joint(&net, &y)
            })
            .collect();
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        let local = net.local_conditional(&x, v).unwrap();
        for (a, b) in local.iter().zip(&weights) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn reduced_network_conditions_on_evidence(net in small_mixed(), pick in any::<prop::sample::Index>(), mask in any::<u8>()) {
        let feasible = feasible_states(&net);
        let x = &feasible[pick.index(feasible.len())];
        let observed: Vec<(usize, usize)> = (0..net.num_vars())
            .filter(|v| mask >> v & 1 == 1)
            .map(|v| (v, x[v]))
            .collect();
        let reduced = net
            .reduce_evidence(&Assignment::from_pairs(net.num_vars(), observed.iter().copied()))
            .unwrap();
        let expected = brute_marginals(&net, &observed);
        let got = brute_marginals(&reduced, &[]);
        prop_assert!(common::max_abs_diff(&expected, &got) < 1e-12);
        // evidence labels are either never pruned or always pruned
        for &(v, s) in &observed {
            for config in 0..reduced.cpt(v).num_columns() {
                for (k, &c) in reduced.cpt(v).column(config).iter().enumerate() {
                    if k != s {
                        prop_assert_eq!(c, 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn native_round_trip(net in small_mixed()) {
        let text = serialize_native(&net);
        prop_assert_eq!(parse_native(&text).unwrap(), net);
    }

    #[test]
    fn grid_round_trip_and_determinism(rows in 2usize..5, cols in 2usize..5, f in 0.0f64..=1.0, seed in any::<u64>()) {
        let a = grid(rows, cols, f, seed).unwrap();
        prop_assert_eq!(&a, &grid(rows, cols, f, seed).unwrap());
        prop_assert_eq!(parse_native(&serialize_native(&a)).unwrap(), a);
    }

    #[test]
    fn variable_elimination_matches_brute_force(net in small_mixed(), pick in any::<prop::sample::Index>(), mask in any::<u8>()) {
        let feasible = feasible_states(&net);
        let x = &feasible[pick.index(feasible.len())];
        let observed: Vec<(usize, usize)> =
            (0..net.num_vars()).filter(|v| mask >> v & 1 == 1).map(|v| (v, x[v])).collect();
        let e = Assignment::from_pairs(net.num_vars(), observed.iter().copied());
        let ve = exact_marginals(&net, &e).unwrap();
        let bf = brute_force_marginals(&net, &e, DEFAULT_STATE_CAP).unwrap();
        prop_assert!(ve.max_abs_diff(&bf) < 1e-12);
        prop_assert!(common::max_abs_diff(&brute_marginals(&net, &observed), ve.iter()) < 1e-12);
        for row in ve.iter() {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn enumerate_feasible_lists_exactly_the_feasible_states(net in small_mixed()) {
        let mut listed: Vec<Vec<usize>> = enumerate_feasible(&net, DEFAULT_STATE_CAP)
            .unwrap()
            .into_iter()
            .map(|(x, p)| {
                assert_eq!(p, direct_joint(&net, &x));
                x
            })
            .collect();
        listed.sort();
        let mut expected = feasible_states(&net);
        expected.sort();
        prop_assert_eq!(listed, expected);
    }

    #[test]
    fn pruned_space_is_closed_and_complete(net in small_mixed(), pick in any::<prop::sample::Index>(), seed in any::<u64>()) {
        let feasible = feasible_states(&net);
        let x = &feasible[pick.index(feasible.len())];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let retained = prune_around(&net, x, &mut rng).unwrap();
        prop_assert!(net.labels_of(x).unwrap().is_subset(&retained));
        let space = enumerate_pruned(&net, &retained, DEFAULT_PRUNED_CAP).unwrap();
        prop_assert!(space.contains(x));
        let mut listed: Vec<Vec<usize>> = space.states().map(<[usize]>::to_vec).collect();
        listed.sort();
        let before = listed.len();
        listed.dedup();
        prop_assert_eq!(before, listed.len());
        let mut expected: Vec<Vec<usize>> = feasible
            .iter()
            .filter(|y| net.labels_of(y).unwrap().is_subset(&retained))
            .cloned()
            .collect();
        expected.sort();
        prop_assert_eq!(listed, expected);
    }

    #[test]
    fn prune_kernel_is_reversible_and_regular(seed in any::<u64>(), n in 1usize..=3) {
        let net = random_network(RandomNet { vars: n, max_card: 2, max_parents: 2, zero_chance: 0.3 }, seed);
        let m = prune_transition_matrix(&net).unwrap();
        let pi = m.target();
        for i in 0..m.len() {
            prop_assert!((m.row(i).iter().sum::<f64>() - 1.0).abs() < 1e-9);
            for j in 0..m.len() {
                prop_assert!(m.prob(i, j) > 0.0);
                prop_assert!((pi[i] * m.prob(i, j) - pi[j] * m.prob(j, i)).abs() <= 1e-12);
            }
        }
        for (a, b) in m.apply_left(&pi).iter().zip(&pi) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn hellinger_is_a_bounded_symmetric_distance(a in prop::collection::vec(0.0f64..1.0, 1..6), b in prop::collection::vec(0.0f64..1.0, 1..6)) {
        let len = a.len().min(b.len());
        let norm = |v: &[f64]| {
            let mut v = v[..len].to_vec();
            let total: f64 = v.iter().sum();
            if total == 0.0 {
                v[0] = 1.0;
            } else {
                v.iter_mut().for_each(|x| *x /= total);
            }
            v
        };
        let (p, q) = (norm(&a), norm(&b));
        let h = hellinger(&p, &q).unwrap();
        prop_assert_eq!(h, hellinger(&q, &p).unwrap());
        prop_assert!((0.0..=1.0).contains(&h));
        prop_assert_eq!(hellinger(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn sigma_ignores_run_order(rows in prop::collection::vec(prop::collection::vec(0.0f64..=1.0, 20), 2..8), shift in 1usize..7) {
        let mut rotated = rows.clone();
        let k = shift % rotated.len();
        rotated.rotate_left(k);
        let a = sigma_series(&EstimateSeries::new(rows).unwrap()).unwrap();
        let b = sigma_series(&EstimateSeries::new(rotated).unwrap()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn roc_fit_recovers_the_model(alpha in 0.1f64..1.0, beta in -0.5f64..3.0, k in 1u32..=30, steps in 10_000usize..15_000) {
        let delta = f64::from(k) / 20.0;
        let sigma: Vec<f64> = (1..=steps)
            .map(|t| {
                let t = t as f64;
                alpha * (1.0 + beta * t.powf(-delta)) / t.sqrt()
            })
            .collect();
        let fit = fit_roc(&sigma, &default_delta_grid(), 10).unwrap();
        prop_assert!((fit.alpha - alpha).abs() / alpha <= 0.01, "alpha {} fitted {}", alpha, fit.alpha);
    }
}

#[test]
fn random_networks_have_zero_entries() {
    let zeros = (0..20)
        .map(|seed| random_network(RandomNet::binary(8), seed))
        .filter(|net| net.cpts().iter().any(|c| c.values().contains(&0.0)))
        .count();
    assert!(zeros >= 10);
}

#[test]
fn grid_deterministic_fraction_is_realized() {
    for (f, seed) in [(0.0, 1), (0.25, 2), (0.5, 3), (0.75, 4), (1.0, 5)] {
        let net = grid(8, 8, f, seed).unwrap();
        let columns: Vec<&[f64]> = net.cpts().iter().flat_map(|c| c.columns()).collect();
        assert!(columns.len() >= 50);
        let zero = columns.iter().filter(|c| c.contains(&0.0)).count();
        let realized = zero as f64 / columns.len() as f64;
        assert!((realized - f).abs() <= 0.1, "f = {f}: realized {realized}");
    }
}

#[test]
fn generated_benchmarks_round_trip() {
    for net in [
        two_node_deterministic(),
        bloodpressure(),
        block_chain(2).unwrap(),
        block_chain(7).unwrap(),
        grid(3, 4, 0.5, 11).unwrap(),
    ] {
        assert_eq!(parse_native(&serialize_native(&net)).unwrap(), net);
    }
}

#[test]
fn full_retention_occurs_and_spans_every_feasible_state() {
    let net = two_node_deterministic();
    let positive: LabelSet = {
        let mut s = LabelSet::empty(net.num_labels());
        for i in 0..net.num_labels() {
            if net.label_value_at(i) > 0.0 {
                s.insert(i);
            }
        }
        s
    };
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut hits = 0;
    for _ in 0..1000 {
        let retained = prune_around(&net, &[0, 0], &mut rng).unwrap();
        if retained == positive {
            hits += 1;
            let space = enumerate_pruned(&net, &retained, 10).unwrap();
            assert_eq!(space.len(), 2);
        }
    }
    // A(2) is the only random label and survives with probability 0.5
    assert!((400..=600).contains(&hits), "{hits}");
}

#[test]
fn closure_over_many_prune_draws() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for net in [bloodpressure(), block_chain(4).unwrap(), grid(3, 3, 0.5, 2).unwrap()] {
        let start = enumerate_feasible(&net, 1).unwrap_or_else(|_| {
            let x = bnprune::samplers::forward_sample(&net, &mut rng, 100).unwrap();
            vec![(x, 0.0)]
        });
        let mut x = start[0].0.clone();
        for _ in 0..10_000 {
            let retained = prune_around(&net, &x, &mut rng).unwrap();
            let space = enumerate_pruned(&net, &retained, DEFAULT_PRUNED_CAP).unwrap();
            assert!(space.contains(&x));
            assert!(space.states().all(|y| net.is_feasible(y).unwrap()));
            x = bnprune::prune::uniform_draw(&space, &mut rng).unwrap();
        }
    }
}

fn power_law(alpha: f64, beta: f64, delta: f64, steps: usize) -> Vec<f64> {
    (1..=steps)
        .map(|t| {
            let t = t as f64;
            alpha * (1.0 + beta * t.powf(-delta)) / t.sqrt()
        })
        .collect()
}

#[test]
fn roc_fit_without_transient_is_exact() {
    for alpha in [0.05, 0.4, 2.5] {
        let fit = fit_roc(&power_law(alpha, 0.0, 1.0, 5000), &default_delta_grid(), 10).unwrap();
        assert!((fit.alpha - alpha).abs() <= 1e-6);
    }
}

#[test]
fn roc_fit_preserves_alpha_ordering() {
    let low = fit_roc(&power_law(0.40, 1.5, 0.7, 25_000), &default_delta_grid(), 10).unwrap();
    let high = fit_roc(&power_law(0.80, 0.5, 1.3, 25_000), &default_delta_grid(), 10).unwrap();
    assert!(low.alpha < high.alpha);
}
