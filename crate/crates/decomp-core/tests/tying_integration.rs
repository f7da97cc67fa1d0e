use decomp_core::gen;
use decomp_core::graph::{EdgeId, MultiGraph, VertexId, Walk};
use decomp_core::rat::rat;
use decomp_core::tying;
use std::collections::BTreeSet;

/// A k=4 blow-up playing Gamma, plus a fresh matching H on the same vertex
/// set, merged into one graph so edge ids are shared.
fn instance(seed: u64) -> (MultiGraph, decomp_core::graph::ClusterPartition, BTreeSet<EdgeId>, Vec<bool>) {
    let (gamma, part) = gen::blowup_cycle(4, 16, &rat(1, 2), seed).unwrap();
    let n = gamma.n();
    // H: a matching of ~0.1 n edges between even/odd vertices in distinct
    // clusters, avoiding duplicate endpoints
    let mut used: BTreeSet<VertexId> = BTreeSet::new();
    let mut h_pairs = Vec::new();
    let mut v = 0;
    while h_pairs.len() < n / 10 && v + 17 < n {
        let (a, b) = (v, v + 17);
        if !used.contains(&a)
            && !used.contains(&b)
            && part.cluster_of(a) != part.cluster_of(b)
            && !gamma
                .incident(a)
                .iter()
                .any(|&e| gamma.other_end(e, a) == b)
        {
            used.insert(a);
            used.insert(b);
            h_pairs.push((a, b));
        }
        v += 3;
    }
    assert!(h_pairs.len() >= 4);
    let mut edges = gamma.edge_list().to_vec();
    let gamma_count = edges.len();
    edges.extend(h_pairs.iter().copied());
    let g = MultiGraph::build(n, &edges).unwrap();
    let mut part2 = decomp_core::graph::ClusterPartition::new(
        n,
        part.v0.clone(),
        part.clusters.clone(),
    )
    .unwrap();
    part2.recompute_support(&g);
    let h_edges: BTreeSet<EdgeId> = (gamma_count..g.m()).collect();
    let mut gamma_alive = vec![false; g.m()];
    for e in 0..gamma_count {
        gamma_alive[e] = true;
    }
    (g, part2, h_edges, gamma_alive)
}

#[test]
fn cover_sparse_leftover_covers_a_matching() {
    let mut ok = 0;
    for seed in 0..5u64 {
        let (g, part, h_edges, mut gamma_alive) = instance(seed);
        match tying::cover_sparse_leftover(
            &g,
            &part,
            &h_edges,
            &mut gamma_alive,
            &rat(1, 2),
            &rat(1, 2),
            &rat(1, 2),
            &rat(1, 4),
            seed,
        ) {
            Ok(out) => {
                // cycles are valid, pairwise edge-disjoint, and cover all of
                // H except the declared leftover
                let mut covered: BTreeSet<EdgeId> = BTreeSet::new();
                for c in &out.cycles {
                    c.trail(&g).unwrap();
                    for &e in &c.edges {
                        assert!(covered.insert(e), "cycles overlap at {e}");
                    }
                }
                for &e in &h_edges {
                    assert!(
                        covered.contains(&e) || out.leftover.contains(&e),
                        "H edge {e} neither covered nor leftover"
                    );
                }
                // cycles use only H edges and declared Gamma edges
                for &e in &covered {
                    assert!(h_edges.contains(&e) || out.used_gamma.contains(&e));
                }
                assert!(out.leftover.len() <= 4, "leftover too large");
                ok += 1;
            }
            Err(e) => eprintln!("seed {seed}: {e}"),
        }
    }
    assert!(ok >= 4, "only {ok}/5 runs succeeded");
}

#[test]
fn tie_counters_never_exceed_caps() {
    let (g, part, h_edges, mut gamma_alive) = instance(11);
    let out = tying::cover_sparse_leftover(
        &g,
        &part,
        &h_edges,
        &mut gamma_alive,
        &rat(1, 2),
        &rat(1, 2),
        &rat(1, 2),
        &rat(1, 4),
        11,
    )
    .unwrap();
    let budget = tying::TieBudget::from_parameters(&rat(1, 4), &rat(1, 2), part.m());
    let recount = out.trace.recount(&g, &part);
    for (_, &c) in recount.endpoint.iter() {
        assert!(c <= budget.link_endpoint_cap);
    }
    for (_, &c) in recount.internal.iter() {
        assert!(c <= budget.internal_cap);
    }
    let _ = Walk::path(vec![]);
}
