//! Bipartite Hamilton-cycle and perfect-matching engines, matching-chain
//! closure, Hamilton packing, winding-cycle extraction, and the approximate
//! Hamilton decomposition of cycle blow-ups.

use crate::error::Error;
use crate::graph::{ClusterPartition, EdgeId, MultiGraph, VertexId, Walk};
use crate::rat::{self, Rat};
use crate::regularity::BipartitePair;
use crate::rng;
use crate::Result;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;

/// Restart budget factor for rotation-extension search.
const RESTART_FACTOR: usize = 50;
/// Exhaustive Hamilton search below this many vertices (2m).
const EXHAUSTIVE_VERTICES: usize = 16;

/// Map from pair-local (a-idx, b-idx) to the parent edge id.
fn pair_edge_map(p: &BipartitePair) -> BTreeMap<(usize, usize), EdgeId> {
    p.edges.iter().map(|&(ai, bi, id)| ((ai, bi), id)).collect()
}

/// Local adjacency: vertices 0..m are the A side, m..2m the B side.
fn local_adjacency(p: &BipartitePair) -> Vec<Vec<usize>> {
    let m = p.m_a();
    let mut adj = vec![Vec::new(); 2 * m];
    for &(ai, bi, _) in &p.edges {
        adj[ai].push(m + bi);
        adj[m + bi].push(ai);
    }
    for row in adj.iter_mut() {
        row.sort_unstable();
    }
    adj
}

fn cycle_walk_from_local(p: &BipartitePair, order: &[usize]) -> Walk {
    let m = p.m_a();
    let map = pair_edge_map(p);
    let mut edges = Vec::with_capacity(order.len());
    for i in 0..order.len() {
        let u = order[i];
        let v = order[(i + 1) % order.len()];
        let key = if u < m { (u, v - m) } else { (v, u - m) };
        edges.push(map[&key]);
    }
    Walk::cycle(edges)
}

/// Relabels local vertices side-respectingly so the deterministic DP can be
/// steered by the seed.
fn permuted_adjacency(p: &BipartitePair, seed: u64) -> (Vec<Vec<usize>>, Vec<usize>) {
    let m = p.m_a();
    let mut rng = rng::substream(seed, 0x9e1a);
    let perm_a = rng::shuffled(&mut rng, m);
    let perm_b = rng::shuffled(&mut rng, m);
    // new local id -> old local id
    let mut back = vec![0usize; 2 * m];
    let mut fwd = vec![0usize; 2 * m];
    for (new, &old) in perm_a.iter().enumerate() {
        back[new] = old;
        fwd[old] = new;
    }
    for (new, &old) in perm_b.iter().enumerate() {
        back[m + new] = m + old;
        fwd[m + old] = m + new;
    }
    let base = local_adjacency(p);
    let mut adj = vec![Vec::new(); 2 * m];
    for (old, row) in base.iter().enumerate() {
        adj[fwd[old]] = row.iter().map(|&w| fwd[w]).collect();
    }
    for row in adj.iter_mut() {
        row.sort_unstable();
    }
    (adj, back)
}

fn exhaustive_hamilton(p: &BipartitePair, adj: &[Vec<usize>]) -> Option<Vec<usize>> {
    let n = 2 * p.m_a();
    // DP over subsets from vertex 0
    let mut reach = vec![0u32; 1 << n]; // bit v set: path 0..v covering mask
    reach[1] = 1;
    for mask in 1u32..(1 << n) {
        if mask & 1 == 0 || reach[mask as usize] == 0 {
            continue;
        }
        let ends = reach[mask as usize];
        for v in 0..n {
            if ends & (1 << v) == 0 {
                continue;
            }
            for &w in &adj[v] {
                if mask & (1 << w) == 0 {
                    reach[(mask | (1 << w)) as usize] |= 1 << w;
                }
            }
        }
    }
    let full = (1u32 << n) - 1;
    let closers = reach[full as usize];
    let last = (0..n).find(|&v| closers & (1 << v) != 0 && adj[v].contains(&0))?;
    // reconstruct backwards
    let mut order = vec![last];
    let mut mask = full;
    let mut cur = last;
    while mask != 1 {
        let prev_mask = mask & !(1 << cur);
        let prev = (0..n)
            .find(|&u| {
                prev_mask & (1 << u) != 0
                    && reach[prev_mask as usize] & (1 << u) != 0
                    && adj[u].contains(&cur)
            })
            .expect("dp reconstruction");
        order.push(prev);
        mask = prev_mask;
        cur = prev;
    }
    order.reverse();
    Some(order)
}

fn rotation_extension(
    p: &BipartitePair,
    adj: &[Vec<usize>],
    seed: u64,
) -> Option<Vec<usize>> {
    let n = 2 * p.m_a();
    let restarts = RESTART_FACTOR * p.m_a();
    for restart in 0..restarts {
        let mut rng = rng::substream(seed, 0x9a05 + restart as u64);
        let start = rng.gen_range(0..n);
        let mut path = vec![start];
        let mut pos = vec![usize::MAX; n];
        pos[start] = 0;
        let budget = 40 * n;
        for _ in 0..budget {
            let tail = *path.last().unwrap();
            // extend if possible
            let fresh: Vec<usize> = adj[tail]
                .iter()
                .copied()
                .filter(|&w| pos[w] == usize::MAX)
                .collect();
            if let Some(&w) = pick(&mut rng, &fresh) {
                pos[w] = path.len();
                path.push(w);
                continue;
            }
            if path.len() == n {
                // close or rotate toward closure
                let head = path[0];
                if adj[tail].contains(&head) {
                    return Some(path);
                }
            }
            // rotation at the tail
            let pivots: Vec<usize> = adj[tail]
                .iter()
                .copied()
                .filter(|&w| pos[w] != usize::MAX && pos[w] + 2 <= path.len().saturating_sub(1))
                .collect();
            match pick(&mut rng, &pivots) {
                Some(&w) => {
                    let i = pos[w];
                    path[i + 1..].reverse();
                    for (idx, &v) in path.iter().enumerate().skip(i + 1) {
                        pos[v] = idx;
                    }
                }
                None => {
                    // dead end: flip the whole path to work from the other end
                    path.reverse();
                    for (idx, &v) in path.iter().enumerate() {
                        pos[v] = idx;
                    }
                }
            }
        }
    }
    None
}

fn pick<'a>(rng: &mut rng::ChaCha8Rng, items: &'a [usize]) -> Option<&'a usize> {
    if items.is_empty() {
        None
    } else {
        Some(&items[rng.gen_range(0..items.len())])
    }
}

/// `bipartite_hamilton`: spanning cycle of a balanced pair by
/// rotation-extension with seeded restarts; exhaustive below 16 vertices.
pub fn bipartite_hamilton(p: &BipartitePair, min_degree: &Rat, seed: u64) -> Result<Walk> {
    if !p.is_balanced() {
        return Err(Error::invalid("bipartite_hamilton needs a balanced pair"));
    }
    let m = p.m_a();
    if m < 2 {
        return Err(Error::invalid("no Hamilton cycle below 2+2 vertices"));
    }
    if rat::rat_usize(p.min_degree()) < min_degree * rat::rat_usize(m) {
        return Err(Error::invalid(
            "bipartite_hamilton precondition: min degree below alpha*m",
        ));
    }
    let order = if 2 * m <= EXHAUSTIVE_VERTICES {
        let (adj, back) = permuted_adjacency(p, seed);
        exhaustive_hamilton(p, &adj)
            .map(|order| order.into_iter().map(|v| back[v]).collect::<Vec<_>>())
    } else {
        let adj = local_adjacency(p);
        rotation_extension(p, &adj, seed)
    };
    match order {
        Some(order) => Ok(cycle_walk_from_local(p, &order)),
        None => Err(Error::SearchFailed {
            op: "bipartite_hamilton",
            detail: format!("no spanning cycle found on {m}+{m} pair"),
        }),
    }
}

/// Result of a perfect-matching search: either the matching (parent edge ids,
/// one per A vertex), or a Hall violator (A-side labels whose neighbourhood
/// is smaller than the set).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatchingOutcome {
    Perfect(Vec<EdgeId>),
    HallViolator(Vec<VertexId>),
}

/// `bipartite_perfect_matching`: augmenting-path maximum matching; exact.
pub fn bipartite_perfect_matching(p: &BipartitePair) -> Result<MatchingOutcome> {
    if !p.is_balanced() {
        return Err(Error::invalid("perfect matching needs a balanced pair"));
    }
    let m = p.m_a();
    let mut match_a = vec![usize::MAX; m]; // a-idx -> b-idx
    let mut match_b = vec![usize::MAX; m];
    for start in 0..m {
        // BFS layered augmenting path from `start`
        let mut prev_b: Vec<usize> = vec![usize::MAX; m]; // b-idx -> a-idx it was reached from
        let mut visited_a = vec![false; m];
        visited_a[start] = true;
        let mut queue = alloc::collections::VecDeque::new();
        queue.push_back(start);
        let mut end_b = usize::MAX;
        'bfs: while let Some(ai) = queue.pop_front() {
            for bi in p.neighbors_of_a(ai) {
                if prev_b[bi] != usize::MAX {
                    continue;
                }
                prev_b[bi] = ai;
                if match_b[bi] == usize::MAX {
                    end_b = bi;
                    break 'bfs;
                }
                let next_a = match_b[bi];
                if !visited_a[next_a] {
                    visited_a[next_a] = true;
                    queue.push_back(next_a);
                }
            }
        }
        if end_b == usize::MAX {
            // Hall violator: alternating-reachable A vertices
            let violator: Vec<VertexId> = (0..m)
                .filter(|&ai| visited_a[ai])
                .map(|ai| p.a[ai])
                .collect();
            return Ok(MatchingOutcome::HallViolator(violator));
        }
        // augment
        let mut bi = end_b;
        loop {
            let ai = prev_b[bi];
            let old = match_a[ai];
            match_a[ai] = bi;
            match_b[bi] = ai;
            if old == usize::MAX && ai == start {
                break;
            }
            if old == usize::MAX {
                break;
            }
            bi = old;
        }
    }
    let map = pair_edge_map(p);
    let ids: Vec<EdgeId> = (0..m).map(|ai| map[&(ai, match_a[ai])]).collect();
    Ok(MatchingOutcome::Perfect(ids))
}

/// Matching decomposition of a regular pair with seed-shuffled vertex order,
/// so repeated calls explore different decompositions.
pub fn randomized_matching_decomposition(
    p: &BipartitePair,
    rng: &mut rng::ChaCha8Rng,
) -> Result<Vec<Vec<EdgeId>>> {
    let perm_a = rng::shuffled(rng, p.m_a());
    let perm_b = rng::shuffled(rng, p.m_b());
    let inv = |perm: &[usize]| {
        let mut inv = vec![0usize; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        inv
    };
    let (inv_a, inv_b) = (inv(&perm_a), inv(&perm_b));
    let a: Vec<VertexId> = perm_a.iter().map(|&i| p.a[i]).collect();
    let b: Vec<VertexId> = perm_b.iter().map(|&i| p.b[i]).collect();
    let edges: Vec<(usize, usize, EdgeId)> = p
        .edges
        .iter()
        .map(|&(ai, bi, id)| (inv_a[ai], inv_b[bi], id))
        .collect();
    let shuffled = BipartitePair::new(a, b, edges)?;
    regular_bipartite_matching_decomposition(&shuffled)
}

/// `regular_bipartite_matching_decomposition`: an r-regular pair splits into
/// exactly r edge-disjoint perfect matchings by repeated extraction.
pub fn regular_bipartite_matching_decomposition(p: &BipartitePair) -> Result<Vec<Vec<EdgeId>>> {
    if !p.is_balanced() {
        return Err(Error::invalid("matching decomposition needs a balanced pair"));
    }
    let r = p.min_degree();
    if r != p.max_degree() {
        return Err(Error::invalid("pair is not regular"));
    }
    let mut rest = p.clone();
    let mut out = Vec::with_capacity(r);
    for _ in 0..r {
        match bipartite_perfect_matching(&rest)? {
            MatchingOutcome::Perfect(ids) => {
                let drop: BTreeSet<EdgeId> = ids.iter().copied().collect();
                let keep: Vec<usize> = rest
                    .edges
                    .iter()
                    .enumerate()
                    .filter(|(_, &(_, _, id))| !drop.contains(&id))
                    .map(|(i, _)| i)
                    .collect();
                rest = rest.with_edges(&keep);
                out.push(ids);
            }
            MatchingOutcome::HallViolator(_) => {
                return Err(Error::invalid(
                    "regular bipartite pair lost Hall's condition (internal)",
                ))
            }
        }
    }
    debug_assert_eq!(rest.edge_count(), 0);
    Ok(out)
}

/// Clusters V_1..V_k with M_i a perfect matching between V_i and V_{i+1};
/// composes to a bijection V_1 -> V_k.
#[derive(Debug, Clone)]
pub struct MatchingChain {
    pub clusters: Vec<Vec<VertexId>>,
    pub matchings: Vec<Vec<EdgeId>>,
}

impl MatchingChain {
    pub fn validate(&self, g: &MultiGraph) -> Result<()> {
        let k = self.clusters.len();
        if k < 2 || self.matchings.len() != k - 1 {
            return Err(Error::invalid("chain needs k clusters and k-1 matchings"));
        }
        let m = self.clusters[0].len();
        for (i, matching) in self.matchings.iter().enumerate() {
            if matching.len() != m {
                return Err(Error::invalid(format!("matching {i} is not perfect")));
            }
            let from: BTreeSet<VertexId> = self.clusters[i].iter().copied().collect();
            let to: BTreeSet<VertexId> = self.clusters[i + 1].iter().copied().collect();
            let mut seen_from = BTreeSet::new();
            let mut seen_to = BTreeSet::new();
            for &e in matching {
                let (u, v) = g.endpoints(e);
                let (x, y) = if from.contains(&u) && to.contains(&v) {
                    (u, v)
                } else if from.contains(&v) && to.contains(&u) {
                    (v, u)
                } else {
                    return Err(Error::invalid(format!(
                        "matching {i} edge {e} leaves its clusters"
                    )));
                };
                if !seen_from.insert(x) || !seen_to.insert(y) {
                    return Err(Error::invalid(format!("matching {i} repeats a vertex")));
                }
            }
        }
        Ok(())
    }

    /// Next-vertex maps along the chain: maps[i][v] for v in cluster i.
    fn step_maps(&self, g: &MultiGraph) -> Vec<BTreeMap<VertexId, (VertexId, EdgeId)>> {
        let mut out = Vec::new();
        for (i, matching) in self.matchings.iter().enumerate() {
            let from: BTreeSet<VertexId> = self.clusters[i].iter().copied().collect();
            let mut map = BTreeMap::new();
            for &e in matching {
                let (u, v) = g.endpoints(e);
                let (x, y) = if from.contains(&u) { (u, v) } else { (v, u) };
                map.insert(x, (y, e));
            }
            out.push(map);
        }
        out
    }
}

/// `close_matchings_to_hamilton`: finds a perfect matching M of the closing
/// pair such that the chain plus M is a single Hamilton cycle. Merges
/// permutation cycles by 2-edge swaps (largest two cycles first, edges
/// scanned in id order); exhaustive over all matchings for m <= 8.
pub fn close_matchings_to_hamilton(
    g: &MultiGraph,
    chain: &MatchingChain,
    p: &BipartitePair,
) -> Result<(Vec<EdgeId>, Walk)> {
    chain.validate(g)?;
    let k = chain.clusters.len();
    if k < 3 {
        return Err(Error::invalid("matching chain needs k >= 3"));
    }
    let m = chain.clusters[0].len();
    // orient the closing pair: a-side = V_k, b-side = V_1
    let first: BTreeSet<VertexId> = chain.clusters[0].iter().copied().collect();
    let last: BTreeSet<VertexId> = chain.clusters[k - 1].iter().copied().collect();
    let pa: BTreeSet<VertexId> = p.a.iter().copied().collect();
    let pb: BTreeSet<VertexId> = p.b.iter().copied().collect();
    let pair = if pa == last && pb == first {
        p.clone()
    } else if pa == first && pb == last {
        // flip sides
        let edges: Vec<(usize, usize, EdgeId)> =
            p.edges.iter().map(|&(ai, bi, id)| (bi, ai, id)).collect();
        BipartitePair::new(p.b.clone(), p.a.clone(), edges)?
    } else {
        return Err(Error::invalid(
            "closing pair does not sit on (V_k, V_1) of the chain",
        ));
    };
    // sigma: b-idx (V_1) -> a-idx (V_k) through the chain
    let steps = chain.step_maps(g);
    let a_pos: BTreeMap<VertexId, usize> =
        pair.a.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let b_pos: BTreeMap<VertexId, usize> =
        pair.b.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut sigma = vec![usize::MAX; m]; // b-idx -> a-idx
    for (&v1, &bi) in &b_pos {
        let mut cur = v1;
        for step in &steps {
            cur = step[&cur].0;
        }
        sigma[bi] = a_pos[&cur];
    }

    let single_cycle = |match_a: &[usize]| -> bool {
        // pi on b-indices: bi -> match of sigma... walk bi -> sigma[bi] -> its match
        let mut match_of_a = vec![usize::MAX; m];
        for (ai, &bi) in match_a.iter().enumerate() {
            match_of_a[ai] = bi;
        }
        let mut seen = 1usize;
        let mut cur = 0usize;
        loop {
            let next = match_of_a[sigma[cur]];
            if next == 0 {
                break;
            }
            cur = next;
            seen += 1;
        }
        seen == m
    };

    // match_a: a-idx -> b-idx
    let mut match_a = match bipartite_perfect_matching(&pair)? {
        MatchingOutcome::Perfect(ids) => {
            let map = pair_edge_map(&pair);
            let rev: BTreeMap<EdgeId, (usize, usize)> =
                map.iter().map(|(&(ai, bi), &id)| (id, (ai, bi))).collect();
            let mut arr = vec![usize::MAX; m];
            for id in ids {
                let (ai, bi) = rev[&id];
                arr[ai] = bi;
            }
            arr
        }
        MatchingOutcome::HallViolator(w) => {
            return Err(Error::SearchFailed {
                op: "close_matchings_to_hamilton",
                detail: format!("closing pair has no perfect matching (Hall violator {w:?})"),
            })
        }
    };

    // pi on b-indices: bi -> match partner of sigma(bi)
    let pi = |match_a: &[usize]| -> Vec<usize> {
        let mut out = vec![usize::MAX; m];
        for bi in 0..m {
            out[bi] = match_a[sigma[bi]];
        }
        out
    };

    let mut swaps = 0usize;
    loop {
        let perm = pi(&match_a);
        let mut cyc = vec![usize::MAX; m];
        let mut sizes = Vec::new();
        for start in 0..m {
            if cyc[start] != usize::MAX {
                continue;
            }
            let id = sizes.len();
            let mut cur = start;
            let mut size = 0;
            while cyc[cur] == usize::MAX {
                cyc[cur] = id;
                cur = perm[cur];
                size += 1;
            }
            sizes.push(size);
        }
        if sizes.len() == 1 {
            break;
        }
        // two largest cycles
        let mut order: Vec<usize> = (0..sizes.len()).collect();
        order.sort_by_key(|&i| core::cmp::Reverse(sizes[i]));
        let (big1, big2) = (order[0], order[1]);
        // a-idx ai belongs to the cycle of its matched b
        let cyc_of_a = |ai: usize, match_a: &[usize]| cyc[match_a[ai]];
        let mut match_of_b = vec![usize::MAX; m];
        for (ai, &bi) in match_a.iter().enumerate() {
            match_of_b[bi] = ai;
        }
        let mut best: Option<(usize, usize)> = None; // (ai, bi) new edge
        let mut fallback: Option<(usize, usize)> = None;
        for &(ai, bi, _) in &pair.edges {
            if match_a[ai] == bi {
                continue;
            }
            let a2 = match_of_b[bi];
            let c1 = cyc_of_a(ai, &match_a);
            let c2 = cyc_of_a(a2, &match_a);
            if c1 == c2 {
                continue;
            }
            // displaced partners must also be adjacent
            let b1 = match_a[ai];
            if !pair.has_edge(a2, b1) {
                continue;
            }
            if (c1 == big1 && c2 == big2) || (c1 == big2 && c2 == big1) {
                best = Some((ai, bi));
                break;
            }
            if fallback.is_none() {
                fallback = Some((ai, bi));
            }
        }
        let swap = best.or(fallback);
        match swap {
            Some((ai, bi)) => {
                let a2 = match_of_b[bi];
                let b1 = match_a[ai];
                match_a[ai] = bi;
                match_a[a2] = b1;
                swaps += 1;
                // each accepted swap merges exactly two cycles
                let new_count = {
                    let perm = pi(&match_a);
                    let mut seen = vec![false; m];
                    let mut count = 0;
                    for start in 0..m {
                        if seen[start] {
                            continue;
                        }
                        count += 1;
                        let mut cur = start;
                        while !seen[cur] {
                            seen[cur] = true;
                            cur = perm[cur];
                        }
                    }
                    count
                };
                debug_assert_eq!(new_count, sizes.len() - 1);
            }
            None => {
                // two fallbacks: orientation enumeration on a 2-regular
                // closing pair, and full enumeration for tiny sides
                if pair.min_degree() == 2 && pair.max_degree() == 2 {
                    if let Some(found) = two_regular_closing(&pair, &single_cycle) {
                        match_a = found;
                        break;
                    }
                }
                if m <= 8 {
                    if let Some(found) = exhaustive_closing(&pair, &single_cycle) {
                        match_a = found;
                        break;
                    }
                }
                return Err(Error::SearchFailed {
                    op: "close_matchings_to_hamilton",
                    detail: format!(
                        "no merging swap available; cycle sizes {sizes:?} after {swaps} swaps"
                    ),
                });
            }
        }
    }
    debug_assert!(single_cycle(&match_a));

    // assemble the Hamilton cycle walk
    let map = pair_edge_map(&pair);
    let matching_ids: Vec<EdgeId> = (0..m).map(|ai| map[&(ai, match_a[ai])]).collect();
    let steps = chain.step_maps(g);
    let mut edges = Vec::with_capacity(m * k);
    let mut bi = 0usize;
    loop {
        let mut cur = pair.b[bi];
        for step in &steps {
            let (next, e) = step[&cur];
            edges.push(e);
            cur = next;
        }
        let ai = a_pos[&cur];
        edges.push(map[&(ai, match_a[ai])]);
        bi = match_a[ai];
        if bi == 0 {
            break;
        }
    }
    let walk = Walk::cycle(edges);
    debug_assert!(walk.trail(g).is_ok());
    Ok((matching_ids, walk))
}

/// A 2-regular pair is a disjoint union of even cycles; its perfect matchings
/// are exactly the per-cycle orientation choices. Enumerates them (capped)
/// and returns one giving a single permutation cycle.
fn two_regular_closing(
    pair: &BipartitePair,
    single_cycle: &dyn Fn(&[usize]) -> bool,
) -> Option<Vec<usize>> {
    let m = pair.m_a();
    // decompose the pair into its cycles of a-indices with alternating edges
    let mut seen_a = vec![false; m];
    let mut cycles: Vec<Vec<(usize, usize)>> = Vec::new(); // (a, b) matched pairs, orientation 0
    for start in 0..m {
        if seen_a[start] {
            continue;
        }
        let mut orient0 = Vec::new();
        let mut a = start;
        let mut first_b = None;
        loop {
            seen_a[a] = true;
            let nbrs = pair.neighbors_of_a(a);
            debug_assert_eq!(nbrs.len(), 2);
            let b = match first_b {
                None => nbrs[0],
                Some(_) => {
                    // continue around the cycle: take the neighbour not used
                    // to enter this a
                    if orient0.iter().any(|&(_, ob)| ob == nbrs[0]) {
                        nbrs[1]
                    } else {
                        nbrs[0]
                    }
                }
            };
            if first_b.is_none() {
                first_b = Some(b);
            }
            orient0.push((a, b));
            // step to the other a-neighbour of b
            let next_a = pair
                .neighbors_of_b(b)
                .into_iter()
                .find(|&a2| a2 != a)
                .unwrap_or(a);
            if next_a == start || next_a == a {
                break;
            }
            a = next_a;
        }
        cycles.push(orient0);
    }
    if cycles.len() > 14 {
        return None; // 2^c too large
    }
    // orientation 1 of a cycle matches every a with its other neighbour
    let flip = |orient0: &[(usize, usize)], out: &mut Vec<usize>| {
        for &(a, b) in orient0 {
            let other = pair
                .neighbors_of_a(a)
                .into_iter()
                .find(|&b2| b2 != b)
                .unwrap_or(b);
            out[a] = other;
        }
    };
    for mask in 0u32..(1 << cycles.len()) {
        let mut match_a = vec![usize::MAX; m];
        for (ci, orient0) in cycles.iter().enumerate() {
            if mask & (1 << ci) == 0 {
                for &(a, b) in orient0 {
                    match_a[a] = b;
                }
            } else {
                flip(orient0, &mut match_a);
            }
        }
        if match_a.iter().any(|&b| b == usize::MAX) {
            continue;
        }
        // a valid perfect matching must also be injective on b
        let mut used_b = vec![false; m];
        let mut valid = true;
        for &b in &match_a {
            if used_b[b] {
                valid = false;
                break;
            }
            used_b[b] = true;
        }
        if valid && single_cycle(&match_a) {
            return Some(match_a);
        }
    }
    None
}

fn exhaustive_closing(
    pair: &BipartitePair,
    single_cycle: &dyn Fn(&[usize]) -> bool,
) -> Option<Vec<usize>> {
    let m = pair.m_a();
    let mut match_a = vec![usize::MAX; m];
    let mut used_b = vec![false; m];
    fn rec(
        pair: &BipartitePair,
        ai: usize,
        match_a: &mut Vec<usize>,
        used_b: &mut Vec<bool>,
        single_cycle: &dyn Fn(&[usize]) -> bool,
    ) -> bool {
        let m = pair.m_a();
        if ai == m {
            return single_cycle(match_a);
        }
        for bi in 0..m {
            if used_b[bi] || !pair.has_edge(ai, bi) {
                continue;
            }
            used_b[bi] = true;
            match_a[ai] = bi;
            if rec(pair, ai + 1, match_a, used_b, single_cycle) {
                return true;
            }
            used_b[bi] = false;
            match_a[ai] = usize::MAX;
        }
        false
    }
    if rec(pair, 0, &mut match_a, &mut used_b, single_cycle) {
        Some(match_a)
    } else {
        None
    }
}

#[derive(Debug, Clone)]
pub struct PackingReport {
    pub cycles: Vec<Walk>,
    /// (d - 19 eps) m / 2 rounded down to zero or above; reporting only.
    pub target: usize,
}

/// `hamilton_packing`: repeated spanning-cycle extraction, restarting the
/// whole packing with fresh seeds when an extraction strands edges that a
/// different order could have covered. Shortfall against the target is data,
/// not an error.
pub fn hamilton_packing(p: &BipartitePair, eps: &Rat, d: &Rat, seed: u64) -> PackingReport {
    let m = p.m_a();
    let target_rat = (d - rat::rat_int(19) * eps) * rat::rat_usize(m) / rat::rat_int(2);
    let target = if target_rat.is_negative() || target_rat.is_zero() {
        0
    } else {
        target_rat.floor().numer().to_usize().unwrap_or(0)
    };
    let mut best: Vec<Walk> = Vec::new();
    for attempt in 0..20u64 {
        let cycles = pack_once(p, seed.wrapping_add(attempt << 32));
        let complete = cycles.len() * 2 * m == p.edge_count();
        if cycles.len() > best.len() {
            best = cycles;
        }
        if complete || best.len() * 2 * m == p.edge_count() {
            break;
        }
    }
    PackingReport {
        cycles: best,
        target,
    }
}

fn pack_once(p: &BipartitePair, seed: u64) -> Vec<Walk> {
    let mut cycles = Vec::new();
    let mut rest = p.clone();
    'extract: loop {
        if rest.m_a() < 2 || rest.min_degree() < 2 {
            break;
        }
        for attempt in 0..3u64 {
            match bipartite_hamilton(&rest, &Rat::zero(), seed ^ (attempt + 1)) {
                Ok(cycle) => {
                    let drop: BTreeSet<EdgeId> = cycle.edges.iter().copied().collect();
                    let keep: Vec<usize> = rest
                        .edges
                        .iter()
                        .enumerate()
                        .filter(|(_, &(_, _, id))| !drop.contains(&id))
                        .map(|(i, _)| i)
                        .collect();
                    rest = rest.with_edges(&keep);
                    cycles.push(cycle);
                    continue 'extract;
                }
                Err(_) => continue,
            }
        }
        break;
    }
    cycles
}

/// Outcome of the approximate Hamilton decomposition of a cycle blow-up.
#[derive(Debug, Clone)]
pub struct ApproxDecomposition {
    /// h = dm - 2r spanning cycles of g - V0, pairwise edge-disjoint.
    pub cycles: Vec<Walk>,
    /// Leftover H; exactly 2r-regular inside every cluster pair.
    pub leftover: BTreeSet<EdgeId>,
    /// The parity-surgery edges (a subset of the leftover).
    pub surgery: BTreeSet<EdgeId>,
}

/// `approx_decompose_blowup`: decomposes a cycle blow-up with dm-regular
/// pairs into h = dm - 2r Hamilton cycles of g - V0 plus a per-pair
/// 2r-regular leftover. Per pair: a sparse slice is set aside for the
/// closures, the rest is made Eulerian by Hamilton-cycle segment surgery,
/// regularised, Hall-decomposed into matchings, and the matchings are closed
/// around the cycle through the slice.
pub fn approx_decompose_blowup(
    g: &MultiGraph,
    part: &ClusterPartition,
    r: usize,
    eps: &Rat,
    seed: u64,
) -> Result<ApproxDecomposition> {
    let k = part.k();
    if k < 3 {
        return Err(Error::invalid("cycle blow-up needs k >= 3"));
    }
    if r == 0 {
        return Err(Error::invalid("the slice needs positive density (r >= 1)"));
    }
    let m = part.m();
    for &x in &part.v0 {
        if g.degree(x) != 0 {
            return Err(Error::invalid("V0 must be isolated"));
        }
    }
    // the reduced graph must be exactly the k-cycle, every pair dm-regular
    let reduced = part.reduced_edges(g);
    let mut expected = BTreeSet::new();
    for i in 0..k {
        let j = (i + 1) % k;
        expected.insert((i.min(j), i.max(j)));
    }
    if reduced != expected {
        return Err(Error::invalid("reduced graph is not the k-cycle"));
    }
    let mut pairs = Vec::with_capacity(k);
    let mut dm = None;
    for i in 0..k {
        let j = (i + 1) % k;
        let pair = BipartitePair::from_graph(g, &part.clusters[i], &part.clusters[j])?;
        let degree = pair.min_degree();
        if pair.max_degree() != degree {
            return Err(Error::invalid(format!("pair ({i},{j}) is not regular")));
        }
        match dm {
            None => dm = Some(degree),
            Some(d) if d != degree => {
                return Err(Error::invalid("pairs have differing degrees"))
            }
            _ => {}
        }
        if !crate::regularity::test_regular(&pair, eps, crate::regularity::TestMode::Auto { seed })?.regular
        {
            return Err(Error::invalid(format!("pair ({i},{j}) is not eps-regular")));
        }
        pairs.push(pair);
    }
    let dm = dm.unwrap();
    if dm <= 2 * r {
        return Err(Error::invalid("dm must exceed 2r"));
    }
    let h = dm - 2 * r;
    if h % k != 0 {
        return Err(Error::invalid("h = dm - 2r must be divisible by k"));
    }
    let per_group = h / k;
    let t = (k - 1) * per_group; // schedule matchings per pair
    let gamma_target = per_group + r;

    'attempt: for attempt in 0..crate::regularity::RETRIES as u64 {
        let mut surgery: BTreeSet<EdgeId> = BTreeSet::new();
        let mut leftover: BTreeSet<EdgeId> = BTreeSet::new();
        // per pair: residual slice (for closures) and the matching schedule
        let mut slices: Vec<BTreeSet<EdgeId>> = Vec::with_capacity(k);
        let mut schedule: Vec<Vec<Vec<Vec<EdgeId>>>> = Vec::with_capacity(k); // [i][group][s]
        let mut feasible = true;
        for (i, pair) in pairs.iter().enumerate() {
            let mut rng = rng::substream(seed, 0xa99 + attempt * 64 + i as u64);
            // slice for the closures: a random gamma_target-regular subgraph,
            // extracted as perfect matchings (a Bernoulli slice at this scale
            // almost surely strands a vertex at slice-degree zero)
            let all_matchings = randomized_matching_decomposition(pair, &mut rng)?;
            let chosen = rng::sample_distinct(&mut rng, all_matchings.len(), gamma_target);
            let chosen_set: BTreeSet<usize> = chosen.into_iter().collect();
            let gamma_ids: BTreeSet<EdgeId> = chosen_set
                .iter()
                .flat_map(|&mi| all_matchings[mi].iter().copied())
                .collect();
            let keep: Vec<usize> = pair
                .edges
                .iter()
                .enumerate()
                .filter(|(_, &(_, _, id))| gamma_ids.contains(&id))
                .map(|(idx, _)| idx)
                .collect();
            let gamma = pair.with_edges(&keep);
            debug_assert!(gamma.min_degree() >= per_group);
            let rest_idx: Vec<usize> = pair
                .edges
                .iter()
                .enumerate()
                .filter(|(_, &(_, _, id))| !gamma_ids.contains(&id))
                .map(|(idx, _)| idx)
                .collect();
            let mut work = pair.with_edges(&rest_idx);
            // parity surgery: remove alternate segments between odd-degree
            // vertices along a Hamilton cycle of the working pair
            let odd_exists = (0..m).any(|x| work.deg_a(x) % 2 == 1);
            if odd_exists {
                let mut cycle = None;
                for extra in 0..4u64 {
                    if let Ok(c) =
                        bipartite_hamilton(&work, &Rat::zero(), seed ^ (0x517 + attempt * 8 + extra))
                    {
                        cycle = Some(c);
                        break;
                    }
                }
                let Some(cycle) = cycle else {
                    feasible = false;
                    break;
                };
                let seq = cycle.trail(g)?;
                let degs: BTreeMap<VertexId, usize> = {
                    let mut map = BTreeMap::new();
                    for (idx, &v) in work.a.iter().enumerate() {
                        map.insert(v, work.deg_a(idx));
                    }
                    for (idx, &v) in work.b.iter().enumerate() {
                        map.insert(v, work.deg_b(idx));
                    }
                    map
                };
                let odd_positions: Vec<usize> = (0..seq.len())
                    .filter(|&p| degs[&seq[p]] % 2 == 1)
                    .collect();
                debug_assert!(odd_positions.len() % 2 == 0);
                let mut drop_ids: BTreeSet<EdgeId> = BTreeSet::new();
                for chunk in odd_positions.chunks(2) {
                    let (from, to) = (chunk[0], chunk[1]);
                    for p in from..to {
                        drop_ids.insert(cycle.edges[p]);
                    }
                }
                surgery.extend(drop_ids.iter().copied());
                let keep2: Vec<usize> = work
                    .edges
                    .iter()
                    .enumerate()
                    .filter(|(_, &(_, _, id))| !drop_ids.contains(&id))
                    .map(|(idx, _)| idx)
                    .collect();
                work = work.with_edges(&keep2);
            }
            // regularise, then trim to exactly t-regular via matchings
            let out = match crate::regularise::regularise_pair(&work, &num_traits::One::one(), seed ^ (attempt * 16 + i as u64)) {
                Ok(out) => out,
                Err(_) => {
                    feasible = false;
                    break;
                }
            };
            leftover.extend(
                out.removed
                    .iter()
                    .flat_map(|c| c.edges.iter().copied()),
            );
            if out.r_final < t {
                feasible = false;
                break;
            }
            let matchings = regular_bipartite_matching_decomposition(&out.kept)?;
            // first t matchings form the schedule, the rest join the leftover
            for extra in &matchings[t..] {
                leftover.extend(extra.iter().copied());
            }
            let mut order: Vec<usize> = (0..t).collect();
            rng::shuffle(&mut rng, &mut order);
            let mut groups: Vec<Vec<Vec<EdgeId>>> = vec![Vec::new(); k];
            for (slot, &mi) in order.iter().enumerate() {
                // group `slot / per_group` among the k-1 non-i labels
                let mut label = slot / per_group;
                if label >= i {
                    label += 1; // skip the pair's own index
                }
                groups[label].push(matchings[mi].clone());
            }
            slices.push(gamma.parent_edge_ids().into_iter().collect());
            schedule.push(groups);
        }
        if !feasible {
            continue 'attempt;
        }
        // closures: for each label l, h/k Hamilton cycles through slice l
        let mut cycles: Vec<Walk> = Vec::with_capacity(h);
        let mut slice_alive: Vec<BTreeSet<EdgeId>> = slices.clone();
        for label in 0..k {
            for s in 0..per_group {
                let mut chain_clusters = Vec::with_capacity(k);
                let mut chain_matchings = Vec::with_capacity(k - 1);
                for step in 0..k {
                    let cluster = (label + 1 + step) % k;
                    chain_clusters.push(part.clusters[cluster].clone());
                    if step + 1 < k {
                        chain_matchings.push(schedule[cluster][label][s].clone());
                    }
                }
                let chain = MatchingChain {
                    clusters: chain_clusters,
                    matchings: chain_matchings,
                };
                let closing = {
                    let alive = &slice_alive[label];
                    let keep: Vec<(VertexId, VertexId)> = Vec::new();
                    let _ = keep;
                    let mut pair_edges = Vec::new();
                    // pair on (V_label, V_label+1) restricted to alive slice
                    let a = &part.clusters[label];
                    let b = &part.clusters[(label + 1) % k];
                    let pos_a: BTreeMap<VertexId, usize> =
                        a.iter().enumerate().map(|(i, &v)| (v, i)).collect();
                    let pos_b: BTreeMap<VertexId, usize> =
                        b.iter().enumerate().map(|(i, &v)| (v, i)).collect();
                    for &e in alive {
                        let (u, v) = g.endpoints(e);
                        if let (Some(&ai), Some(&bi)) = (pos_a.get(&u), pos_b.get(&v)) {
                            pair_edges.push((ai, bi, e));
                        } else if let (Some(&ai), Some(&bi)) = (pos_a.get(&v), pos_b.get(&u)) {
                            pair_edges.push((ai, bi, e));
                        }
                    }
                    BipartitePair::new(a.clone(), b.clone(), pair_edges)?
                };
                match close_matchings_to_hamilton(g, &chain, &closing) {
                    Ok((matching, cycle)) => {
                        for e in matching {
                            slice_alive[label].remove(&e);
                        }
                        cycles.push(cycle);
                    }
                    Err(_) => continue 'attempt,
                }
            }
        }
        // everything not in a cycle is leftover
        for alive in slice_alive {
            leftover.extend(alive);
        }
        // verify: conservation, spanning cycles, and 2r-regular leftover
        let mut covered: BTreeSet<EdgeId> = BTreeSet::new();
        for c in &cycles {
            for &e in &c.edges {
                if !covered.insert(e) {
                    continue 'attempt;
                }
            }
        }
        if covered.len() + leftover.len() != g.m() || !covered.is_disjoint(&leftover) {
            continue 'attempt;
        }
        let mut per_vertex_pair: BTreeMap<(VertexId, usize), usize> = BTreeMap::new();
        for &e in &leftover {
            let (u, v) = g.endpoints(e);
            let (cu, cv) = (part.cluster_of(u).unwrap(), part.cluster_of(v).unwrap());
            let pair_id = if (cu + 1) % k == cv { cu } else { cv };
            *per_vertex_pair.entry((u, pair_id)).or_insert(0) += 1;
            *per_vertex_pair.entry((v, pair_id)).or_insert(0) += 1;
        }
        let regular_2r = part.clusters.iter().enumerate().all(|(i, cluster)| {
            cluster.iter().all(|&v| {
                let left = (i + k - 1) % k;
                per_vertex_pair.get(&(v, i)).copied().unwrap_or(0) == 2 * r
                    && per_vertex_pair.get(&(v, left)).copied().unwrap_or(0) == 2 * r
            })
        });
        if !regular_2r {
            continue 'attempt;
        }
        debug_assert_eq!(cycles.len(), h);
        return Ok(ApproxDecomposition {
            cycles,
            leftover,
            surgery,
        });
    }
    Err(Error::RetriesExhausted {
        op: "approx_decompose_blowup",
        detail: format!(
            "no verified decomposition after {} attempts",
            crate::regularity::RETRIES
        ),
    })
}

/// `disjoint_cycles_through_clusters`: t vertex-disjoint k-cycles, each
/// meeting every cluster of a cycle blow-up, grown greedily.
pub fn disjoint_cycles_through_clusters(
    g: &MultiGraph,
    part: &ClusterPartition,
    t: usize,
) -> Result<Vec<Walk>> {
    let k = part.k();
    if k < 3 {
        return Err(Error::invalid("cycle blow-up needs k >= 3"));
    }
    if t > part.m() {
        return Err(Error::invalid("more cycles requested than cluster size"));
    }
    let mut used = vec![false; g.n()];
    let mut out = Vec::new();
    for round in 0..t {
        let mut cycle_vertices: Vec<VertexId> = Vec::with_capacity(k);
        let mut cycle_edges: Vec<EdgeId> = Vec::with_capacity(k);
        // grow x_1 .. x_{k-2} cluster by cluster
        let fail = |achieved: usize| Error::SearchFailed {
            op: "disjoint_cycles_through_clusters",
            detail: format!("stuck after {achieved} cycles"),
        };
        let x1 = *part.clusters[0]
            .iter()
            .find(|&&v| !used[v])
            .ok_or_else(|| fail(round))?;
        cycle_vertices.push(x1);
        for next_cluster in 1..k.saturating_sub(2) {
            let cur = *cycle_vertices.last().unwrap();
            let step = g
                .incident(cur)
                .iter()
                .copied()
                .find(|&e| {
                    let w = g.other_end(e, cur);
                    !used[w]
                        && !cycle_vertices.contains(&w)
                        && part.cluster_of(w) == Some(next_cluster)
                })
                .ok_or_else(|| fail(round))?;
            cycle_edges.push(step);
            cycle_vertices.push(g.other_end(step, cur));
        }
        // close through V_{k-1} and V_k: neighbours of the path tail and of x1
        let tail = *cycle_vertices.last().unwrap();
        let s: Vec<(VertexId, EdgeId)> = g
            .incident(tail)
            .iter()
            .map(|&e| (g.other_end(e, tail), e))
            .filter(|&(w, _)| !used[w] && part.cluster_of(w) == Some(k - 2))
            .collect();
        let t_set: Vec<(VertexId, EdgeId)> = g
            .incident(x1)
            .iter()
            .map(|&e| (g.other_end(e, x1), e))
            .filter(|&(w, _)| !used[w] && part.cluster_of(w) == Some(k - 1))
            .collect();
        let mut closed = false;
        'close: for &(xs, es) in &s {
            for &(xt, et) in &t_set {
                if let Some(&bridge) = g
                    .incident(xs)
                    .iter()
                    .find(|&&e| g.other_end(e, xs) == xt)
                {
                    cycle_edges.push(es);
                    cycle_vertices.push(xs);
                    cycle_edges.push(bridge);
                    cycle_vertices.push(xt);
                    cycle_edges.push(et);
                    closed = true;
                    break 'close;
                }
            }
        }
        if !closed {
            return Err(fail(round));
        }
        for &v in &cycle_vertices {
            used[v] = true;
        }
        let walk = Walk::cycle(cycle_edges);
        debug_assert!(walk.trail(g).is_ok());
        out.push(walk);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::WalkKind;
    use crate::rat::{rat, rat_int};

    #[test]
    fn hamilton_on_complete_pairs() {
        for m in [2, 4, 8, 10, 20] {
            let p = BipartitePair::complete(m, m);
            let c = bipartite_hamilton(&p, &rat(1, 2), 1).unwrap();
            assert_eq!(c.kind, WalkKind::Cycle);
            assert_eq!(c.len(), 2 * m);
        }
    }

    #[test]
    fn hamilton_on_even_cycle_pair() {
        // C_{2m} as a pair: the cycle itself is the unique Hamilton cycle
        let m = 6;
        let a: Vec<usize> = (0..m).collect();
        let b: Vec<usize> = (m..2 * m).collect();
        let mut edges = Vec::new();
        for i in 0..m {
            edges.push((i, i, 2 * i));
            edges.push(((i + 1) % m, i, 2 * i + 1));
        }
        let p = BipartitePair::new(a, b, edges).unwrap();
        let c = bipartite_hamilton(&p, &rat(1, 10), 5).unwrap();
        assert_eq!(c.len(), 2 * m);
    }

    #[test]
    fn perfect_matching_and_hall() {
        let p = BipartitePair::complete(5, 5);
        match bipartite_perfect_matching(&p).unwrap() {
            MatchingOutcome::Perfect(ids) => assert_eq!(ids.len(), 5),
            _ => panic!("complete pair has a perfect matching"),
        }
        // isolated A vertex: Hall violator {that vertex}
        let a = vec![0, 1, 2];
        let b = vec![3, 4, 5];
        let edges = vec![(0, 0, 0), (0, 1, 1), (1, 0, 2), (1, 1, 3)];
        let p = BipartitePair::new(a, b, edges).unwrap();
        match bipartite_perfect_matching(&p).unwrap() {
            MatchingOutcome::HallViolator(w) => assert!(w.contains(&2)),
            _ => panic!("expected a Hall violator"),
        }
    }

    #[test]
    fn regular_decomposition_examples() {
        let p = BipartitePair::complete(5, 5);
        let ms = regular_bipartite_matching_decomposition(&p).unwrap();
        assert_eq!(ms.len(), 5);
        let all: BTreeSet<EdgeId> = ms.iter().flatten().copied().collect();
        assert_eq!(all.len(), 25);

        // C_{2m} is 2-regular: exactly 2 matchings
        let m = 5;
        let a: Vec<usize> = (0..m).collect();
        let b: Vec<usize> = (m..2 * m).collect();
        let mut edges = Vec::new();
        for i in 0..m {
            edges.push((i, i, 2 * i));
            edges.push(((i + 1) % m, i, 2 * i + 1));
        }
        let p = BipartitePair::new(a, b, edges).unwrap();
        let ms = regular_bipartite_matching_decomposition(&p).unwrap();
        assert_eq!(ms.len(), 2);

        let irregular = BipartitePair::new(
            vec![0, 1],
            vec![2, 3],
            vec![(0, 0, 0), (0, 1, 1), (1, 0, 2)],
        )
        .unwrap();
        assert!(regular_bipartite_matching_decomposition(&irregular).is_err());
    }

    fn chain_on_complete_blowup(k: usize, m: usize) -> (MultiGraph, MatchingChain, BipartitePair) {
        // clusters 0..k, complete consecutive pairs plus complete closing pair
        let n = k * m;
        let clusters: Vec<Vec<usize>> = (0..k).map(|i| (i * m..(i + 1) * m).collect()).collect();
        let mut edges = Vec::new();
        for i in 0..k {
            let j = (i + 1) % k;
            for &u in &clusters[i] {
                for &v in &clusters[j] {
                    edges.push((u, v));
                }
            }
        }
        let g = MultiGraph::build(n, &edges).unwrap();
        // identity matchings along the chain
        let mut matchings = Vec::new();
        for i in 0..k - 1 {
            let mut ids = Vec::new();
            for t in 0..m {
                let (u, v) = (clusters[i][t], clusters[i + 1][t]);
                let e = (0..g.m())
                    .find(|&e| {
                        let (a, b) = g.endpoints(e);
                        (a, b) == (u, v) || (a, b) == (v, u)
                    })
                    .unwrap();
                ids.push(e);
            }
            matchings.push(ids);
        }
        let pair = BipartitePair::from_graph(&g, &clusters[k - 1], &clusters[0]).unwrap();
        let chain = MatchingChain {
            clusters,
            matchings,
        };
        (g, chain, pair)
    }

    #[test]
    fn closing_complete_pair() {
        let (g, chain, pair) = chain_on_complete_blowup(3, 3);
        let (matching, cycle) = close_matchings_to_hamilton(&g, &chain, &pair).unwrap();
        assert_eq!(matching.len(), 3);
        assert_eq!(cycle.len(), 9);
        let seq = cycle.trail(&g).unwrap();
        assert_eq!(seq.len(), 9); // spanning on all 3k = 9 vertices
    }

    #[test]
    fn closing_fails_without_alternatives() {
        // chain of identity matchings, closing pair = exactly the identity
        // matching back: k disjoint k-cycles, no swaps available
        let k = 3;
        let m = 3;
        let n = k * m;
        let clusters: Vec<Vec<usize>> =
            (0..k).map(|i| (i * m..(i + 1) * m).collect()).collect();
        let mut edges = Vec::new();
        for i in 0..k - 1 {
            for t in 0..m {
                edges.push((clusters[i][t], clusters[i + 1][t]));
            }
        }
        for t in 0..m {
            edges.push((clusters[k - 1][t], clusters[0][t]));
        }
        let g = MultiGraph::build(n, &edges).unwrap();
        let matchings: Vec<Vec<EdgeId>> = (0..k - 1)
            .map(|i| (i * m..(i + 1) * m).collect())
            .collect();
        let chain = MatchingChain {
            clusters: clusters.clone(),
            matchings,
        };
        let pair = BipartitePair::from_graph(&g, &clusters[k - 1], &clusters[0]).unwrap();
        let out = close_matchings_to_hamilton(&g, &chain, &pair);
        assert!(out.is_err());
    }

    #[test]
    fn packing_on_complete_pair() {
        let p = BipartitePair::complete(8, 8);
        let report = hamilton_packing(&p, &rat(1, 100), &rat_int(1), 11);
        // K_{8,8} is 8-regular with 64 edges: a full packing is exactly
        // m/2 = 4 spanning cycles of 16 edges each
        assert_eq!(report.cycles.len(), 4);
        let mut seen = BTreeSet::new();
        for c in &report.cycles {
            assert_eq!(c.len(), 16);
            for &e in &c.edges {
                assert!(seen.insert(e));
            }
        }
        assert_eq!(seen.len(), 64);
        assert!(report.cycles.len() >= report.target);
    }

    #[test]
    fn empty_pair_packs_nothing() {
        let p = BipartitePair::new(vec![0, 1], vec![2, 3], vec![]).unwrap();
        let report = hamilton_packing(&p, &rat(1, 100), &rat_int(0), 3);
        assert!(report.cycles.is_empty());
        assert_eq!(report.target, 0);
    }

    #[test]
    fn winding_cycles() {
        // complete blow-up of a triangle, m = 5, t = 2
        let (g, _, _) = chain_on_complete_blowup(3, 5);
        let part = ClusterPartition::new(
            15,
            vec![],
            vec![(0..5).collect(), (5..10).collect(), (10..15).collect()],
        )
        .unwrap();
        let cycles = disjoint_cycles_through_clusters(&g, &part, 2).unwrap();
        assert_eq!(cycles.len(), 2);
        let mut used = BTreeSet::new();
        for c in &cycles {
            assert_eq!(c.len(), 3);
            for v in c.trail(&g).unwrap() {
                assert!(used.insert(v));
            }
        }
        assert!(disjoint_cycles_through_clusters(&g, &part, 0).unwrap().is_empty());
        assert!(disjoint_cycles_through_clusters(&g, &part, 6).is_err());
    }
}
