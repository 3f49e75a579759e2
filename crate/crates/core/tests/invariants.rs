use std::collections::BTreeMap;

use proptest::prelude::*;
use qabench_core::embedding::{
    chain_lower_bound, clique_embed_chimera, induced_source_graph, validate, GenerationState,
};
use qabench_core::graph::{Graph, NodeId};
use qabench_core::harness::{shots_for_budget, TimeBudgetModel};
use qabench_core::physmap::{embed_assignment, embed_problem};
use qabench_core::problems::{gen_maxcut, ising_to_qubo, mis_check, qubo_to_ising, Assignment, QuboModel};
use qabench_core::rng::rng_from;
use qabench_core::solvers::{mis_repair, random_mis};
use qabench_core::topology::{build_chimera, parse_edge_list};

fn arb_graph(max_n: u32) -> impl Strategy<Value = Graph> {
    (2..=max_n).prop_flat_map(|n| {
        let pairs: Vec<(u32, u32)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        let len = pairs.len();
        prop::collection::vec(any::<bool>(), len).prop_map(move |keep| {
            let mut g = Graph::with_nodes(0..n);
            for (&(u, v), k) in pairs.iter().zip(keep) {
                if k {
                    g.add_edge(u, v);
                }
            }
            g
        })
    })
}

fn grid_value() -> impl Strategy<Value = f64> {
    (-128i32..=128).prop_map(|k| k as f64 / 128.0)
}

fn bits(n: u32, mask: u32) -> Assignment {
    Assignment::bits((0..n).map(|v| (v, ((mask >> v) & 1) as i8)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn chimera_edge_list_round_trip(m in 1usize..4, n in 1usize..4, t in 1usize..5) {
        let gt = build_chimera(m, n, t).unwrap();
        let back = parse_edge_list(std::path::Path::new("x"), &gt.to_edge_list()).unwrap();
        prop_assert_eq!(back.graph(), gt.graph());
        prop_assert_eq!(back.c_phys(), gt.c_phys());
        prop_assert_eq!(back.content_hash(), gt.content_hash());
    }

    #[test]
    fn splits_keep_embedding_valid(m in 1usize..4, splits in 1usize..30, seed: u64) {
        let (gs, emb, gt) = clique_embed_chimera(m, 4).unwrap();
        let qubits = emb.physical_nodes();
        let mut st = GenerationState::new(gs, emb, rng_from(seed));
        for _ in 0..splits {
            if st.splittable().is_empty() {
                break;
            }
            st.split_random(&gt).unwrap();
        }
        let report = validate(st.embedding(), st.source(), &gt).unwrap();
        prop_assert!(report.valid);
        prop_assert_eq!(st.embedding().physical_nodes(), qubits);
        prop_assert_eq!(&induced_source_graph(st.embedding(), &gt), st.source());
        prop_assert!(st.embedding().is_path_form(&gt));
    }

    #[test]
    fn chain_bound_monotone(d in 0u64..400, c in 3u64..20) {
        prop_assert!(chain_lower_bound(d, c) <= chain_lower_bound(d + 1, c));
        prop_assert!(chain_lower_bound(d, c + 1) <= chain_lower_bound(d, c));
        prop_assert!(chain_lower_bound(d, c) >= 1);
    }

    #[test]
    fn qubo_ising_energies_agree(
        n in 1u32..7,
        lin in prop::collection::vec(grid_value(), 7),
        quad in prop::collection::vec(grid_value(), 21),
        offset in grid_value(),
    ) {
        let mut q = QuboModel::<f64>::with_variables(0..n);
        q.add_offset(offset);
        for v in 0..n {
            q.add_linear(v, lin[v as usize]);
        }
        let mut k = 0;
        for u in 0..n {
            for v in u + 1..n {
                q.add_quadratic(u, v, quad[k]);
                k += 1;
            }
        }
        let ising = qubo_to_ising(&q);
        let again = ising_to_qubo(&ising);
        for mask in 0..(1u32 << n) {
            let x = bits(n, mask);
            let eq = q.energy(&x).unwrap();
            prop_assert!((eq - ising.energy(&x.to_spin()).unwrap()).abs() < 1e-12);
            prop_assert!((eq - again.energy(&x).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn embedded_energy_identity(seed: u64, mask: u32, strength in 0.1f64..4.0) {
        let (_, emb, gt) = clique_embed_chimera(2, 4).unwrap();
        let gs = induced_source_graph(&emb, &gt);
        let mut m = gen_maxcut::<f64>(&gs, true, seed);
        for v in 0..8 {
            m.add_linear(v, ((mask >> v) & 1) as f64 * 0.25 - 0.125);
        }
        let phys = embed_problem(&m, &emb, &gt, strength).unwrap();
        // Conservation: fields and problem couplings keep their totals.
        let h_log: f64 = m.h().values().sum();
        let h_phys: f64 = phys.ising.h().values().sum();
        prop_assert!((h_log - h_phys).abs() < 1e-9);
        let j_log: f64 = m.j().values().sum();
        let j_phys: f64 = phys.ising.j().iter().filter(|(k, _)| !phys.chain_edges.contains(k)).map(|(_, v)| v).sum();
        prop_assert!((j_log - j_phys).abs() < 1e-9);
        // An intact chain configuration costs exactly -strength per chain edge.
        let s = Assignment::spins((0..8).map(|v| (v, if (mask >> (v + 8)) & 1 == 1 { 1 } else { -1 })));
        let e_phys = phys.ising.energy(&embed_assignment(&s, &emb).unwrap()).unwrap();
        let e_log = m.energy(&s).unwrap();
        let chain_edges = phys.chain_edges.len() as f64;
        prop_assert!((e_phys - (e_log - strength * chain_edges)).abs() < 1e-9);
    }

    #[test]
    fn repair_output_feasible_and_fixed(g in arb_graph(9), mask: u32, seed: u64, ws in prop::collection::vec(1u32..=128, 9)) {
        let n = g.node_count() as u32;
        let w: BTreeMap<NodeId, f64> = (0..n).map(|v| (v, ws[v as usize] as f64 / 128.0)).collect();
        let x = bits(n, mask);
        let r = mis_repair(&g, &w, &x, &mut rng_from(seed));
        prop_assert!(mis_check(&g, &w, &r.assignment).feasible);
        let again = mis_repair(&g, &w, &r.assignment, &mut rng_from(seed ^ 1));
        prop_assert_eq!(again.removals, 0);
        prop_assert_eq!(again.assignment, r.assignment);
    }

    #[test]
    fn random_mis_is_maximal(g in arb_graph(10), seed: u64, shots in 1usize..6) {
        let w: BTreeMap<NodeId, f64> = g.nodes().map(|v| (v, 1.0)).collect();
        let r = random_mis(&g, &w, shots, seed).unwrap();
        let chosen: Vec<NodeId> = r.assignment.selected().collect();
        prop_assert!(mis_check(&g, &w, &r.assignment).feasible);
        for v in g.nodes() {
            if !chosen.contains(&v) {
                prop_assert!(g.neighbors(v).any(|u| chosen.contains(&u)), "node {} could be added", v);
            }
        }
    }

    #[test]
    fn shots_fall_with_anneal_time(a in 0.0f64..5000.0, extra in 0.0f64..5000.0, total in 21.0f64..5000.0) {
        let tb = TimeBudgetModel { total_budget_ms: total, ..Default::default() };
        prop_assert!(shots_for_budget(&tb.with_anneal_us(a + extra)) <= shots_for_budget(&tb.with_anneal_us(a)));
    }
}
