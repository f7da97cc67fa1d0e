//! Seeded instance generators: random graphs, regular bipartite pairs, cycle
//! blow-ups, synthetic superregular partitions, and the counterexample
//! families. Deterministic given the seed; degree and divisibility contracts
//! are enforced at generation time, never assumed.

use crate::error::Error;
use crate::graph::{ClusterPartition, EdgeId, MultiGraph, VertexId};
use crate::rat::{self, Rat};
use crate::rng::{self, ChaCha8Rng};
use crate::Result;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use num_traits::ToPrimitive;
use rand::Rng;

/// Binomial random graph G(n, p).
pub fn gnp(n: usize, p: &Rat, seed: u64) -> MultiGraph {
    let mut rng = rng::seeded(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng::bernoulli(&mut rng, p) {
                edges.push((u, v));
            }
        }
    }
    MultiGraph::build(n, &edges).unwrap()
}

/// Random r-regular bipartite graph on m+m vertices as (a-index, b-index)
/// pairs: r random permutations, with conflicts repaired by edge swaps.
pub fn regular_bipartite_edges(m: usize, r: usize, rng: &mut ChaCha8Rng) -> Result<Vec<(usize, usize)>> {
    if r > m {
        return Err(Error::invalid("regular bipartite degree exceeds side size"));
    }
    'attempt: for _ in 0..200 {
        let mut rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); m];
        let mut perms: Vec<Vec<usize>> = Vec::with_capacity(r);
        for _ in 0..r {
            perms.push(rng::shuffled(rng, m));
        }
        // repair duplicate slots by swapping with a not-yet-processed slot
        // of the same permutation (so the row bookkeeping stays exact)
        for j in 0..r {
            for i in 0..m {
                if rows[i].contains(&perms[j][i]) {
                    let mut fixed = false;
                    for _ in 0..8 * m {
                        if i + 1 >= m {
                            break;
                        }
                        let other = rng.gen_range(i + 1..m);
                        let (bi, bo) = (perms[j][i], perms[j][other]);
                        if !rows[i].contains(&bo) && !rows[other].contains(&bi) {
                            perms[j].swap(i, other);
                            fixed = true;
                            break;
                        }
                    }
                    if !fixed {
                        continue 'attempt;
                    }
                }
                rows[i].insert(perms[j][i]);
            }
        }
        let mut edges = Vec::with_capacity(m * r);
        for perm in &perms {
            for (i, &b) in perm.iter().enumerate() {
                edges.push((i, b));
            }
        }
        return Ok(edges);
    }
    Err(Error::RetriesExhausted {
        op: "regular_bipartite_edges",
        detail: format!("no simple {r}-regular bipartite graph on {m}+{m} found"),
    })
}

/// Blow-up of a k-cycle: clusters V_0..V_{k-1} of size m, each consecutive
/// pair an exactly (d*m)-regular random bipartite graph. d*m must be an
/// integer.
pub fn blowup_cycle(k: usize, m: usize, d: &Rat, seed: u64) -> Result<(MultiGraph, ClusterPartition)> {
    if k < 3 {
        return Err(Error::invalid("cycle blow-up needs k >= 3"));
    }
    let dm = d * rat::rat_usize(m);
    if !dm.is_integer() {
        return Err(Error::invalid("d*m must be an integer"));
    }
    let r = dm.to_integer().to_usize().ok_or_else(|| Error::invalid("d*m out of range"))?;
    let mut rng = rng::seeded(seed);
    let n = k * m;
    let clusters: Vec<Vec<VertexId>> = (0..k).map(|i| (i * m..(i + 1) * m).collect()).collect();
    let mut edges = Vec::new();
    for i in 0..k {
        let j = (i + 1) % k;
        for (ai, bi) in regular_bipartite_edges(m, r, &mut rng)? {
            edges.push((clusters[i][ai], clusters[j][bi]));
        }
    }
    let g = MultiGraph::build(n, &edges)?;
    let mut part = ClusterPartition::new(n, vec![], clusters)?;
    part.recompute_support(&g);
    part.m_prime = Some(m);
    Ok((g, part))
}

/// Blow-up of a k-cycle with injected parity defects: one random perfect
/// matching is XOR-toggled in every pair, so every vertex keeps even total
/// degree (the graph stays Eulerian) while every pair becomes non-Eulerian.
pub fn blowup_cycle_with_defects(
    k: usize,
    m: usize,
    d: &Rat,
    seed: u64,
) -> Result<(MultiGraph, ClusterPartition)> {
    if k < 3 {
        return Err(Error::invalid("cycle blow-up needs k >= 3"));
    }
    let dm = d * rat::rat_usize(m);
    if !dm.is_integer() {
        return Err(Error::invalid("d*m must be an integer"));
    }
    let r = dm.to_integer().to_usize().unwrap();
    let mut rng = rng::seeded(seed);
    let n = k * m;
    let clusters: Vec<Vec<VertexId>> = (0..k).map(|i| (i * m..(i + 1) * m).collect()).collect();
    let mut edges = Vec::new();
    for i in 0..k {
        let j = (i + 1) % k;
        let base = regular_bipartite_edges(m, r, &mut rng)?;
        let present: BTreeSet<(usize, usize)> = base.iter().copied().collect();
        let toggle: Vec<usize> = rng::shuffled(&mut rng, m);
        let toggled: BTreeSet<(usize, usize)> =
            (0..m).map(|ai| (ai, toggle[ai])).collect();
        for &(ai, bi) in &base {
            if !toggled.contains(&(ai, bi)) {
                edges.push((clusters[i][ai], clusters[j][bi]));
            }
        }
        for &(ai, bi) in &toggled {
            if !present.contains(&(ai, bi)) {
                edges.push((clusters[i][ai], clusters[j][bi]));
            }
        }
    }
    let g = MultiGraph::build(n, &edges)?;
    let mut part = ClusterPartition::new(n, vec![], clusters)?;
    part.recompute_support(&g);
    part.m_prime = Some(m);
    Ok((g, part))
}

/// Synthetic superregular partition: k clusters of size m, all cluster pairs
/// filled by G(m, m, d) bipartite slices, plus `v0` isolated exceptional
/// vertices at the end of the id range.
pub fn superregular_partition(
    k: usize,
    m: usize,
    d: &Rat,
    v0: usize,
    seed: u64,
) -> Result<(MultiGraph, ClusterPartition)> {
    let n = k * m + v0;
    let clusters: Vec<Vec<VertexId>> = (0..k).map(|i| (i * m..(i + 1) * m).collect()).collect();
    let v0_set: Vec<VertexId> = (k * m..n).collect();
    let mut rng = rng::seeded(seed);
    let mut edges = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            for &u in &clusters[i] {
                for &v in &clusters[j] {
                    if rng::bernoulli(&mut rng, d) {
                        edges.push((u, v));
                    }
                }
            }
        }
    }
    let g = MultiGraph::build(n, &edges)?;
    let mut part = ClusterPartition::new(n, v0_set, clusters)?;
    part.recompute_support(&g);
    Ok((g, part))
}

/// Two disjoint cliques of size s joined by t bridge matchings, each a
/// bijection between the first b vertices of either clique (parallel bridges
/// count as distinct edges).
pub fn two_cliques(s: usize, t: usize, b: usize, seed: u64) -> Result<MultiGraph> {
    if b > s {
        return Err(Error::invalid("bridge set larger than the clique"));
    }
    let mut rng = rng::seeded(seed);
    let n = 2 * s;
    let mut edges = Vec::new();
    for base in [0, s] {
        for u in 0..s {
            for v in u + 1..s {
                edges.push((base + u, base + v));
            }
        }
    }
    for _ in 0..t {
        let perm = rng::shuffled(&mut rng, b);
        for (i, &j) in perm.iter().enumerate() {
            edges.push((i, s + j));
        }
    }
    MultiGraph::build(n, &edges)
}

/// K_m plus a star with l leaves sharing exactly one leaf with the clique.
pub fn clique_star(m: usize, l: usize) -> Result<MultiGraph> {
    if m == 0 || l == 0 {
        return Err(Error::invalid("clique_star needs m, l >= 1"));
    }
    let n = m + l; // clique 0..m, centre m, fresh leaves m+1..m+l-1, shared leaf 0
    let mut edges = Vec::new();
    for u in 0..m {
        for v in u + 1..m {
            edges.push((u, v));
        }
    }
    edges.push((m, 0));
    for leaf in m + 1..n {
        edges.push((m, leaf));
    }
    MultiGraph::build(n, &edges)
}

/// K_m plus t vertex-disjoint triangles, each sharing exactly one vertex
/// with the clique.
pub fn clique_triangles(m: usize, t: usize) -> Result<MultiGraph> {
    if t > m {
        return Err(Error::invalid("more triangles than clique vertices"));
    }
    let n = m + 2 * t;
    let mut edges = Vec::new();
    for u in 0..m {
        for v in u + 1..m {
            edges.push((u, v));
        }
    }
    for i in 0..t {
        let (a, b, c) = (i, m + 2 * i, m + 2 * i + 1);
        edges.push((a, b));
        edges.push((a, c));
        edges.push((b, c));
    }
    MultiGraph::build(n, &edges)
}

pub fn k_complete(n: usize) -> MultiGraph {
    MultiGraph::complete(n)
}

/// Eulerian near-regular bipartite pair: an even-regular random pair with a
/// few short cycles removed, giving maximum-minus-minimum degree at most
/// 2 * defect_cycles while staying Eulerian.
pub fn near_regular_pair(
    m: usize,
    base_degree: usize,
    defect_cycles: usize,
    seed: u64,
) -> Result<crate::regularity::BipartitePair> {
    if base_degree % 2 != 0 {
        return Err(Error::invalid("base degree must be even (Eulerian pair)"));
    }
    if base_degree <= 2 * defect_cycles {
        return Err(Error::invalid("defects would exhaust the degree"));
    }
    if m < 4 * defect_cycles + 1 {
        return Err(Error::invalid("side too small for disjoint defect cycles"));
    }
    'attempt: for attempt in 0..50u64 {
        let mut rng = rng::substream(seed, attempt);
        let edges = regular_bipartite_edges(m, base_degree, &mut rng)?;
        let pair_edges: Vec<(usize, usize, EdgeId)> = edges
            .iter()
            .enumerate()
            .map(|(id, &(ai, bi))| (ai, bi, id))
            .collect();
        let a: Vec<usize> = (0..m).collect();
        let b: Vec<usize> = (m..2 * m).collect();
        let mut pair = crate::regularity::BipartitePair::new(a, b, pair_edges)?;
        // remove vertex-disjoint 4-cycles among untouched vertices, so the
        // minimum drops by exactly 2 per defect while the maximum survives
        let mut touched_a: BTreeSet<usize> = BTreeSet::new();
        let mut touched_b: BTreeSet<usize> = BTreeSet::new();
        for _ in 0..defect_cycles {
            let mut found = None;
            'scan: for a1 in 0..m {
                if touched_a.contains(&a1) {
                    continue;
                }
                for a2 in a1 + 1..m {
                    if touched_a.contains(&a2) {
                        continue;
                    }
                    let common: Vec<usize> = pair
                        .neighbors_of_a(a1)
                        .into_iter()
                        .filter(|bi| {
                            !touched_b.contains(bi) && pair.has_edge(a2, *bi)
                        })
                        .collect();
                    if common.len() >= 2 {
                        found = Some((a1, a2, common[0], common[1]));
                        break 'scan;
                    }
                }
            }
            let Some((a1, a2, b1, b2)) = found else {
                continue 'attempt;
            };
            let drop: BTreeSet<usize> = pair
                .edges
                .iter()
                .enumerate()
                .filter(|(_, &(ai, bi, _))| {
                    (ai == a1 || ai == a2) && (bi == b1 || bi == b2)
                })
                .map(|(i, _)| i)
                .collect();
            debug_assert_eq!(drop.len(), 4);
            let keep: Vec<usize> =
                (0..pair.edge_count()).filter(|i| !drop.contains(i)).collect();
            pair = pair.with_edges(&keep);
            touched_a.extend([a1, a2]);
            touched_b.extend([b1, b2]);
        }
        let theta = pair.max_degree() - pair.min_degree();
        if defect_cycles > 0 && (theta == 0 || theta > 2 * defect_cycles) {
            continue 'attempt;
        }
        debug_assert!((0..m).all(|i| pair.deg_a(i) % 2 == 0 && pair.deg_b(i) % 2 == 0));
        return Ok(pair);
    }
    Err(Error::RetriesExhausted {
        op: "near_regular_pair",
        detail: format!("no instance with m = {m} found"),
    })
}

/// Generator-shaped pipeline instance: edge-disjoint G, Gamma, Gamma' on one
/// vertex set. G fills every cluster pair (complete reduced graph), Gamma a
/// k-cycle, Gamma' the remaining pairs; V0 vertices attach to G only, with
/// even degrees (doubled edges keep the whole graph Eulerian when asked).
#[derive(Debug, Clone)]
pub struct PipelineInstance {
    pub g: MultiGraph,
    pub part: ClusterPartition,
    pub g_edges: BTreeSet<EdgeId>,
    pub gamma_edges: BTreeSet<EdgeId>,
    pub gamma2_edges: BTreeSet<EdgeId>,
}

pub fn pipeline_instance(
    k: usize,
    m: usize,
    v0: usize,
    g_degree: usize,
    gamma_degree: usize,
    gamma2_degree: usize,
    v0_degree: usize,
    eulerian: bool,
    seed: u64,
) -> Result<PipelineInstance> {
    if k < 3 {
        return Err(Error::invalid("pipeline instance needs k >= 3"));
    }
    if v0_degree % 2 != 0 {
        return Err(Error::invalid("V0 degrees must be even"));
    }
    let n = k * m + v0;
    let clusters: Vec<Vec<VertexId>> = (0..k).map(|i| (i * m..(i + 1) * m).collect()).collect();
    let v0_set: Vec<VertexId> = (k * m..n).collect();
    let mut rng = rng::seeded(seed);
    let mut edges: Vec<(VertexId, VertexId)> = Vec::new();
    let mut g_edges = BTreeSet::new();
    let mut gamma_edges = BTreeSet::new();
    let mut gamma2_edges = BTreeSet::new();
    let push = |edges: &mut Vec<(VertexId, VertexId)>,
                    set: &mut BTreeSet<EdgeId>,
                    u: VertexId,
                    v: VertexId| {
        set.insert(edges.len());
        edges.push((u, v));
    };
    // G on every cluster pair
    for i in 0..k {
        for j in i + 1..k {
            for (ai, bi) in regular_bipartite_edges(m, g_degree, &mut rng)? {
                push(&mut edges, &mut g_edges, clusters[i][ai], clusters[j][bi]);
            }
        }
    }
    // Gamma on the k-cycle
    for i in 0..k {
        let j = (i + 1) % k;
        for (ai, bi) in regular_bipartite_edges(m, gamma_degree, &mut rng)? {
            push(&mut edges, &mut gamma_edges, clusters[i][ai], clusters[j][bi]);
        }
    }
    // Gamma' on the remaining pairs
    for i in 0..k {
        for j in i + 1..k {
            if j == (i + 1) % k || i == (j + 1) % k {
                continue;
            }
            for (ai, bi) in regular_bipartite_edges(m, gamma2_degree, &mut rng)? {
                push(&mut edges, &mut gamma2_edges, clusters[i][ai], clusters[j][bi]);
            }
        }
    }
    // exceptional edges: v0_degree per V0 vertex, doubled when Eulerian
    for &x in &v0_set {
        if eulerian {
            let mut chosen = BTreeSet::new();
            while 2 * chosen.len() < v0_degree {
                let v = rng.gen_range(0..k * m);
                chosen.insert(v);
            }
            for v in chosen {
                push(&mut edges, &mut g_edges, x, v);
                push(&mut edges, &mut g_edges, x, v);
            }
        } else {
            let mut chosen = BTreeSet::new();
            while chosen.len() < v0_degree {
                let v = rng.gen_range(0..k * m);
                chosen.insert(v);
            }
            for v in chosen {
                push(&mut edges, &mut g_edges, x, v);
            }
        }
    }
    let g = MultiGraph::build(n, &edges)?;
    let mut part = ClusterPartition::new(n, v0_set, clusters)?;
    part.recompute_support(&g);
    part.m_prime = Some(m);
    Ok(PipelineInstance {
        g,
        part,
        g_edges,
        gamma_edges,
        gamma2_edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    #[test]
    fn gnp_bounds_and_determinism() {
        let g1 = gnp(10, &rat(1, 2), 5);
        let g2 = gnp(10, &rat(1, 2), 5);
        assert_eq!(g1.edge_list(), g2.edge_list());
        assert!(gnp(0, &rat(1, 2), 1).m() == 0);
    }

    #[test]
    fn regular_bipartite_is_regular() {
        let mut r = rng::seeded(3);
        let edges = regular_bipartite_edges(10, 4, &mut r).unwrap();
        assert_eq!(edges.len(), 40);
        let set: BTreeSet<_> = edges.iter().collect();
        assert_eq!(set.len(), 40); // simple
        let mut deg_a = [0usize; 10];
        let mut deg_b = [0usize; 10];
        for &(a, b) in &edges {
            deg_a[a] += 1;
            deg_b[b] += 1;
        }
        assert!(deg_a.iter().chain(deg_b.iter()).all(|&d| d == 4));
    }

    #[test]
    fn blowup_examples() {
        let (g, part) = blowup_cycle(4, 6, &rat(1, 2), 1).unwrap();
        // each pair dm = 3 regular: total degree 6 per vertex
        assert!(g.degrees().iter().all(|&d| d == 6));
        assert_eq!(part.reduced_edges(&g).len(), 4);
        assert!(blowup_cycle(4, 5, &rat(1, 2), 1).is_err()); // dm not integral
    }

    #[test]
    fn defect_blowup_is_eulerian_but_pairs_are_not() {
        let (g, part) = blowup_cycle_with_defects(4, 8, &rat(1, 2), 9).unwrap();
        assert!(g.is_eulerian());
        // some vertex has odd pair-degree
        let x = part.clusters[0][0];
        assert!(crate::regularise::oddity(&g, &part, x) > 0);
    }

    #[test]
    fn two_cliques_audit() {
        let g = two_cliques(5, 2, 1, 4).unwrap();
        assert_eq!(g.n(), 10);
        assert!(g.is_eulerian()); // K5 even + two bridges at one pair
        assert_eq!(g.degree_stats().max, 6);
    }

    #[test]
    fn family_shapes() {
        let s = clique_star(5, 3).unwrap();
        assert_eq!(s.n(), 8);
        assert_eq!(s.degree(5), 3); // centre
        let t = clique_triangles(5, 1).unwrap();
        assert_eq!(t.n(), 7);
        assert!(t.is_eulerian());
    }

    #[test]
    fn near_regular_pairs() {
        let p = near_regular_pair(12, 6, 2, 8).unwrap();
        let theta = p.max_degree() - p.min_degree();
        assert!(theta > 0 && theta <= 4);
        assert!((0..12).all(|i| p.deg_a(i) % 2 == 0 && p.deg_b(i) % 2 == 0));
    }

    #[test]
    fn pipeline_instance_shape() {
        let inst = pipeline_instance(4, 8, 2, 2, 2, 2, 4, true, 3).unwrap();
        assert!(inst.g.is_eulerian());
        assert_eq!(
            inst.g_edges.len() + inst.gamma_edges.len() + inst.gamma2_edges.len(),
            inst.g.m()
        );
        // V0 vertices touch only G edges
        for &x in &inst.part.v0 {
            for &e in inst.g.incident(x) {
                assert!(inst.g_edges.contains(&e));
            }
        }
    }
}
