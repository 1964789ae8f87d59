use commhide::baselines::{self, BaselineKind};
use commhide::detect::louvain;
use commhide::metrics::{comm_splits, comm_uniformity, mnmi, nmi};
use commhide::neural::{deceive, deceive_with, hide_node};
use commhide::par::Exec;
use commhide::permanence::{exact_loss, network_permanence};
use commhide::{Budget, Graph, Partition};
use proptest::prelude::*;

/// Graph on `n` nodes from a pair mask, partitioned by Louvain.
fn instance() -> impl Strategy<Value = (Graph, Partition)> {
    (6usize..24, any::<u64>(), 0.1f64..0.5).prop_map(|(n, seed, density)| {
        let mut rng = commhide::rng::seeded(seed);
        let mut g = Graph::new(n);
        for u in 0..n {
            for v in u + 1..n {
                if rand::Rng::random_bool(&mut rng, density) {
                    g.add_edge(u, v).unwrap();
                }
            }
        }
        let p = louvain(&g, 1.0, 100, seed);
        (g, p)
    })
}

fn labels(n: usize) -> impl Strategy<Value = Vec<usize>> {
    proptest::collection::vec(0usize..5, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn split_budget_is_respected((g, p) in instance(), pick in any::<usize>(), add in 0usize..5, del in 0usize..5) {
        let target = pick % p.community_count();
        let (_, plan) = deceive(&g, &p, target, Budget::split(add, del)).unwrap();
        prop_assert!(plan.additions() <= add);
        prop_assert!(plan.deletions() <= del);
    }

    #[test]
    fn greedy_is_deterministic_across_executors((g, p) in instance(), pick in any::<usize>(), beta in 0usize..8) {
        let target = pick % p.community_count();
        let budget = Budget::uniform(beta);
        let a = deceive_with(&g, &p, target, budget, Exec::Sequential).unwrap();
        let b = deceive_with(&g, &p, target, budget, Exec::Sequential).unwrap();
        let c = deceive_with(&g, &p, target, budget, Exec::default()).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(&a, &c);
    }

    #[test]
    fn step_losses_are_positive_and_sum_to_total((g, p) in instance(), pick in any::<usize>(), beta in 1usize..8) {
        let target = pick % p.community_count();
        let (rewired, plan) = deceive(&g, &p, target, Budget::uniform(beta)).unwrap();
        prop_assert!(plan.per_step_loss.iter().all(|&l| l > 0.0));
        let drop = network_permanence(&g, &p).unwrap() - network_permanence(&rewired, &p).unwrap();
        prop_assert!((drop - plan.total_loss()).abs() <= 1e-10);
    }

    #[test]
    fn hiding_a_node_only_adds((g, p) in instance(), pick in any::<usize>(), beta in 0usize..6) {
        let t = pick % g.node_count();
        let (_, plan) = hide_node(&g, &p, t, Budget::uniform(beta)).unwrap();
        prop_assert_eq!(plan.deletions(), 0);
    }

    #[test]
    fn baselines_stay_within_budget((g, p) in instance(), pick in any::<usize>(), beta in 0usize..6, seed in any::<u64>()) {
        let target = pick % p.community_count();
        for kind in BaselineKind::ALL {
            let (rewired, plan) = baselines::deceive(kind, &g, &p, target, Budget::uniform(beta), seed).unwrap();
            prop_assert!(plan.len() <= beta);
            prop_assert_eq!(plan.apply_to(&g).unwrap(), rewired);
        }
    }

    #[test]
    fn loss_report_matches_update((g, p) in instance(), pick in any::<usize>()) {
        let target = pick % p.community_count();
        if let Some(up) = commhide::neural::best_addition(&g, &p, target).unwrap() {
            let report = exact_loss(&g, &p, &up).unwrap();
            prop_assert!((report.total_loss - up.loss).abs() <= 1e-12);
            prop_assert!(report.affected_nodes.contains(&up.u) && report.affected_nodes.contains(&up.v));
        }
    }

    #[test]
    fn nmi_is_symmetric_and_label_blind(a in labels(12), b in labels(12), shift in 1usize..7) {
        let (pa, pb) = (Partition::from_labels(&a), Partition::from_labels(&b));
        let renamed = Partition::from_labels(b.iter().map(|&x| (x + shift) * 3).collect::<Vec<_>>());
        let ab = nmi(&pa, &pb).unwrap();
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert!((ab - nmi(&pb, &pa).unwrap()).abs() <= 1e-12);
        prop_assert_eq!(ab, nmi(&pa, &renamed).unwrap());
    }

    #[test]
    fn uniformity_is_bounded_by_split_count(after in labels(15), size in 1usize..15) {
        let p = Partition::from_labels(&after);
        let nodes: Vec<usize> = (0..size).collect();
        let k = comm_splits(&p, &nodes);
        prop_assert!(k >= 1);
        prop_assert!(comm_uniformity(&p, &nodes) <= (k as f64).ln() + 1e-12);
    }

    #[test]
    fn mnmi_over_a_covering_neighborhood_is_nmi(before in labels(10), after in labels(10)) {
        let (pb, pa) = (Partition::from_labels(&before), Partition::from_labels(&after));
        // Target member 0 adjacent to everyone: its neighborhood is the whole graph.
        let hub = pb.members(0)[0];
        let star = Graph::from_edges(10, (0..10).filter(|&v| v != hub).map(|v| (hub, v))).unwrap();
        prop_assert_eq!(mnmi(&pb, &pa, &star, 0).unwrap(), nmi(&pb, &pa).unwrap());
    }
}
