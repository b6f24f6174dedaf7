mod common;

use common::{brute_force_min_cut, random_lp, random_network, vertex_enumeration, Enumerated};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vpmn::flow::{max_flow, FlowEdge, FlowNetwork};
use vpmn::routing::{self, max_flow_lp, multi_source_flow_lp, HopMode, RateMatrix};
use vpmn::simplex::{solve, LpProblem, LpStatus, Relation};

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn max_flow_equals_brute_force_cut(seed in any::<u64>(), density in 0.1f64..0.9) {
        let net = random_network(&mut ChaCha8Rng::seed_from_u64(seed), 9, density);
        let flow = max_flow(&net);
        prop_assert!(rel_close(flow.total, brute_force_min_cut(&net), 1e-9));
        // conservation and capacity on the reported edge flows
        for (e, f) in net.edges().iter().zip(&flow.flows) {
            prop_assert!(*f >= 0.0 && *f <= e.capacity + 1e-12);
        }
        for v in 0..net.num_nodes() {
            if v != net.source() && v != net.sink() {
                prop_assert!(flow.net_inflow(&net, v).abs() < 1e-7);
            }
        }
        prop_assert!((flow.net_inflow(&net, net.sink()) - flow.total).abs() < 1e-7);
    }

    #[test]
    fn simplex_matches_vertex_enumeration(seed in any::<u64>()) {
        let p = random_lp(&mut ChaCha8Rng::seed_from_u64(seed));
        let sol = solve(&p).unwrap();
        match vertex_enumeration(&p) {
            Enumerated::Infeasible => prop_assert_eq!(sol.status, LpStatus::Infeasible),
            Enumerated::Optimal(v) => {
                prop_assert_eq!(sol.status, LpStatus::Optimal);
                prop_assert!((sol.objective - v).abs() <= 1e-7, "{} vs {}", sol.objective, v);
                prop_assert!(p.max_violation(&sol.x) <= 1e-7);
            }
        }
    }

    #[test]
    fn flow_lp_matches_augmenting_paths(seed in any::<u64>()) {
        let net = random_network(&mut ChaCha8Rng::seed_from_u64(seed), 8, 0.4);
        let lp = max_flow_lp(&net).unwrap();
        prop_assert_eq!(lp.status, LpStatus::Optimal);
        prop_assert!(rel_close(lp.objective, max_flow(&net).total, 1e-6));
    }

    #[test]
    fn multi_source_lp_matches_super_source_reduction(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = random_network(&mut rng, 8, 0.4);
        let n = net.num_nodes();
        let sources: Vec<(usize, f64)> = (0..n.min(3)).map(|v| (v, rand::Rng::gen_range(&mut rng, 0.0..10.0))).collect();
        let sinks: Vec<usize> = (0..n).filter(|v| !sources.iter().any(|s| s.0 == *v)).take(2).collect();
        prop_assume!(!sinks.is_empty());
        let lp = multi_source_flow_lp(n, net.edges(), &sources, &sinks).unwrap();

        // super source n feeding each source, super sink n + 1
        let mut edges = net.edges().to_vec();
        let big: f64 = edges.iter().map(|e| e.capacity).sum::<f64>() + 1.0;
        edges.extend(sources.iter().map(|&(v, c)| FlowEdge { from: n, to: v, capacity: c }));
        edges.extend(sinks.iter().map(|&t| FlowEdge { from: t, to: n + 1, capacity: big }));
        let reduced = FlowNetwork::new(n + 2, edges, n, n + 1).unwrap();
        prop_assert!(rel_close(lp.objective, max_flow(&reduced).total, 1e-6));
    }
}

#[test]
fn umf_agrees_with_its_lp_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..200 {
        let n = rand::Rng::gen_range(&mut rng, 3..8);
        let s = rand::Rng::gen_range(&mut rng, 1..=2.min(n - 1));
        let mut rho = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                if rand::Rng::gen_bool(&mut rng, 0.6) {
                    let r = rand::Rng::gen_range(&mut rng, 0.0..5.0);
                    rho[i * n + j] = r;
                    rho[j * n + i] = r;
                }
            }
        }
        let rates = RateMatrix::from_rates(n, s, HopMode::MultiHop, rho).unwrap();
        for v in s..n {
            let a = routing::umf(&rates, v).unwrap();
            let b = routing::umf_via_lp(&rates, v).unwrap();
            assert!((a.rate - b.rate).abs() <= 1e-6 * a.rate.max(1.0), "{} vs {}", a.rate, b.rate);
        }
    }
}

#[test]
fn oracle_sanity() {
    // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18, box [0, 10]²: optimum 36
    let mut p = LpProblem::maximize(vec![3.0, 5.0]);
    p.add_constraint(vec![1.0, 0.0], Relation::Le, 4.0)
        .add_constraint(vec![0.0, 2.0], Relation::Le, 12.0)
        .add_constraint(vec![3.0, 2.0], Relation::Le, 18.0)
        .set_upper_bound(0, 10.0)
        .set_upper_bound(1, 10.0);
    assert_eq!(vertex_enumeration(&p), Enumerated::Optimal(36.0));
    p.add_constraint(vec![1.0, 1.0], Relation::Ge, 30.0);
    assert_eq!(vertex_enumeration(&p), Enumerated::Infeasible);

    let diamond = FlowNetwork::new(
        4,
        vec![
            FlowEdge { from: 0, to: 1, capacity: 3.0 },
            FlowEdge { from: 0, to: 2, capacity: 2.0 },
            FlowEdge { from: 1, to: 3, capacity: 2.0 },
            FlowEdge { from: 2, to: 3, capacity: 3.0 },
            FlowEdge { from: 1, to: 2, capacity: 1.0 },
        ],
        0,
        3,
    )
    .unwrap();
    assert_eq!(brute_force_min_cut(&diamond), 5.0);
}
