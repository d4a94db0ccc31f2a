use combsage::aggregators::{aggregate, Aggregator, AggregatorKind};
use combsage::eval::{roc_auc, split_edges};
use combsage::graph::Graph;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn graph_strategy(max_nodes: usize) -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (1..=max_nodes).prop_flat_map(|n| (Just(n), prop::collection::vec((0..n, 0..n), 0..3 * n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn components_partition_the_subset((n, edges) in graph_strategy(25), picks in prop::collection::vec(any::<bool>(), 25)) {
        let g = Graph::from_edges(n, &edges).unwrap();
        for v in 0..n {
            let subset: Vec<usize> = g.neighbors(v).iter().copied().zip(&picks).filter(|(_, &p)| p).map(|(u, _)| u).collect();
            let comps = g.neighborhood_components(v, &subset).unwrap();
            let mut covered: Vec<usize> = comps.components().concat();
            covered.sort_unstable();
            let mut expected = subset.clone();
            expected.sort_unstable();
            prop_assert_eq!(covered, expected);
            for (i, a) in comps.components().iter().enumerate() {
                prop_assert!(!a.is_empty());
                for b in &comps.components()[i + 1..] {
                    prop_assert!(a.iter().all(|&x| b.iter().all(|&y| !g.has_edge(x, y))));
                }
                // Each component is connected: a flood from its first member reaches all of it.
                let mut reached = vec![a[0]];
                let mut k = 0;
                while k < reached.len() {
                    let x = reached[k];
                    for &y in a {
                        if !reached.contains(&y) && g.has_edge(x, y) {
                            reached.push(y);
                        }
                    }
                    k += 1;
                }
                prop_assert_eq!(reached.len(), a.len());
            }
        }
    }

    #[test]
    fn graph_ignores_edge_order_and_orientation((n, edges) in graph_strategy(30), seed in any::<u64>()) {
        let mut shuffled: Vec<(usize, usize)> = edges.iter().map(|&(u, v)| if seed % 2 == 0 { (v, u) } else { (u, v) }).collect();
        rand::seq::SliceRandom::shuffle(shuffled.as_mut_slice(), &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(Graph::from_edges(n, &edges).unwrap(), Graph::from_edges(n, &shuffled).unwrap());
    }

    #[test]
    fn mean_and_maxpool_are_bitwise_order_invariant(
        msgs in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 4), 1..12),
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut order: Vec<usize> = (0..msgs.len()).collect();
        rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
        let a: Vec<&[f64]> = msgs.iter().map(Vec::as_slice).collect();
        let b: Vec<&[f64]> = order.iter().map(|&i| msgs[i].as_slice()).collect();
        for kind in [AggregatorKind::Mean, AggregatorKind::MaxPool] {
            let agg = Aggregator::new(kind, 4, 3, &mut rng);
            prop_assert_eq!(
                aggregate(&agg, &a, None::<&mut ChaCha8Rng>).unwrap(),
                aggregate(&agg, &b, None::<&mut ChaCha8Rng>).unwrap()
            );
        }
    }

    #[test]
    fn auc_flips_with_score_negation(scores in prop::collection::vec(0u8..6, 2..60), labels in prop::collection::vec(any::<bool>(), 60)) {
        let labels = &labels[..scores.len()];
        prop_assume!(labels.iter().any(|&l| l) && labels.iter().any(|&l| !l));
        let s: Vec<f64> = scores.iter().map(|&x| x as f64).collect();
        let neg: Vec<f64> = s.iter().map(|x| -x).collect();
        let a = roc_auc(&s, labels).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!((a + roc_auc(&neg, labels).unwrap() - 1.0).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn split_is_disjoint_and_train_graph_has_no_held_out_edges((n, edges) in graph_strategy(40), seed in any::<u64>()) {
        let g = Graph::from_edges(n, &edges).unwrap();
        prop_assume!(g.num_edges() >= 20);
        let Ok((s, train)) = split_edges(&g, 0.2, 0.05, seed) else {
            // Too few non-edges for 1:1 negatives on a dense graph.
            return Ok(());
        };
        let mut pos: Vec<_> = s.train_pos.iter().chain(&s.val_pos).chain(&s.test_pos).copied().collect();
        pos.sort_unstable();
        prop_assert_eq!(pos, g.edges());
        prop_assert!(s.test_pos.iter().chain(&s.val_pos).all(|&(u, v)| !train.has_edge(u, v)));
        prop_assert_eq!(train.num_edges(), s.train_pos.len());
        let mut neg: Vec<_> = s.train_neg.iter().chain(&s.val_neg).chain(&s.test_neg).copied().collect();
        let total = neg.len();
        prop_assert!(neg.iter().all(|&(u, v)| u != v && !g.has_edge(u, v)));
        neg.sort_unstable();
        neg.dedup();
        prop_assert_eq!(neg.len(), total);
        prop_assert_eq!(s.test_neg.len(), s.test_pos.len());
        prop_assert_eq!(s.val_neg.len(), s.val_pos.len());
    }
}
