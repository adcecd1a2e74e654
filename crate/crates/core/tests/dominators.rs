mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use common::{dominators_by_removal, one_to_one_counts};
use hhamt::dominators::{
    analyze, analyze_all, compute_dominators, compute_preds, generated_cfgs, parse_edge_list,
    random_cfg, random_digraph, reference_dominators, relation_stats, CfgGraph,
};

fn computed(g: &CfgGraph) -> Vec<Option<BTreeSet<u32>>> {
    let d = compute_dominators(g).unwrap();
    (0..g.vertex_count() as u32)
        .map(|v| {
            if d.unreachable.contains(&v) {
                assert!(d.dom.get(&v).is_empty());
                None
            } else {
                Some(d.get(v).iter().copied().collect())
            }
        })
        .collect()
}

proptest! {
    #[test]
    fn matches_removal_oracle(n in 1u32..40, max_out in 0u32..4, seed in any::<u64>()) {
        let g = random_digraph(n, max_out, seed);
        prop_assert_eq!(computed(&g), dominators_by_removal(&g));
    }

    #[test]
    fn matrix_reference_matches_removal_oracle(n in 1u32..40, seed in any::<u64>()) {
        let g = random_digraph(n, 3, seed);
        let matrix: Vec<Option<BTreeSet<u32>>> = reference_dominators(&g)
            .into_iter()
            .map(|row| row.map(|bits| (0..bits.len() as u32).filter(|&d| bits[d as usize]).collect()))
            .collect();
        prop_assert_eq!(matrix, dominators_by_removal(&g));
    }

    #[test]
    fn structured_cfgs_are_reachable_with_out_degree_two(n in 1u32..300, seed in any::<u64>()) {
        let g = random_cfg(n, seed);
        prop_assert_eq!(g.vertex_count(), n as usize);
        prop_assert!(g.successors().iter().all(|s| s.len() <= 2));
        let d = compute_dominators(&g).unwrap();
        prop_assert!(d.unreachable.is_empty());
    }
}

#[test]
fn self_loops_and_back_edges() {
    let g = parse_edge_list("entry a\na a\na b\nb c\nc b\nc a\nb d\n").unwrap();
    assert_eq!(computed(&g), dominators_by_removal(&g));
    let d = compute_dominators(&g).unwrap();
    let dom_d: BTreeSet<&str> = d
        .get(g.vertex("d").unwrap())
        .iter()
        .map(|&v| g.name(v))
        .collect();
    assert_eq!(dom_d, BTreeSet::from(["a", "b", "d"]));
}

#[test]
fn unreachable_vertices_are_excluded() {
    let g = CfgGraph::from_edges(5, 0, [(0, 1), (3, 4), (4, 1)]);
    let d = compute_dominators(&g).unwrap();
    let mut unreachable = d.unreachable.clone();
    unreachable.sort_unstable();
    assert_eq!(unreachable, [2, 3, 4]);
    assert_eq!(d.dom.key_count(), 2);
    assert_eq!(
        d.get(1).iter().copied().collect::<BTreeSet<_>>(),
        BTreeSet::from([0, 1])
    );
}

#[test]
fn preds_relation_shape_matches_edge_count() {
    for (name, g) in generated_cfgs(&[128, 512], 3, 9) {
        let preds = compute_preds(&g);
        let stats = relation_stats(&preds);
        let (single, keys) = one_to_one_counts(&g);
        assert_eq!(stats.key_count, keys, "{name}");
        assert_eq!(stats.tuple_count, g.edge_count(), "{name}");
        assert!((stats.ratio_1to1 - 100.0 * single as f64 / keys as f64).abs() < 1e-9);
        preds.validate().unwrap();
    }
}

#[test]
fn parallel_analysis_keeps_order_and_results() {
    let graphs = generated_cfgs(&[128, 256], 4, 1);
    let seq = analyze_all(&graphs, 1).unwrap();
    let par = analyze_all(&graphs, 4).unwrap();
    assert_eq!(seq.len(), graphs.len());
    for ((a, b), (name, _)) in seq.iter().zip(&par).zip(&graphs) {
        assert_eq!(&a.graph_name, name);
        assert_eq!(a.graph_name, b.graph_name);
        assert_eq!(
            (a.vertices, a.edges, a.dom_iterations),
            (b.vertices, b.edges, b.dom_iterations)
        );
        assert_eq!(
            (a.preds_keys, a.preds_tuples),
            (b.preds_keys, b.preds_tuples)
        );
    }
}

#[test]
fn edge_list_round_trip() {
    let g = random_cfg(200, 4);
    let text = g.to_edge_list();
    let back = parse_edge_list(&text).unwrap();
    assert_eq!(back.vertex_count(), g.vertex_count());
    assert_eq!(back.edge_count(), g.edge_count());
    let a = analyze("orig", &g).unwrap();
    let b = analyze("back", &back).unwrap();
    assert_eq!(
        (a.dom_iterations, a.preds_pct_1to1),
        (b.dom_iterations, b.preds_pct_1to1)
    );
}
