//! Link-path machinery: short connector paths inside regular pairs, and the
//! budgeted tying of linear forests into fewer paths and into cycles.
//!
//! Budgets are explicit rational parameters evaluated at the instance's
//! (eps, zeta, beta, m), floored at small integers; every floor is recorded.
//! Tie failures are surfaced, never silently absorbed.

use crate::basic;
use crate::error::Error;
use crate::graph::{ClusterPartition, EdgeId, MultiGraph, VertexId, Walk, WalkKind};
use crate::rat::{self, Rat};
use crate::regularity::BipartitePair;
use crate::rng::{self, ChaCha8Rng};
use crate::Result;
use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use num_traits::ToPrimitive;

/// `short_path_in_pair`: an (x, y)-path of length at most 3 (opposite sides)
/// or 4 (same side) inside one pair, with internal vertices avoiding
/// `forbidden`.
pub fn short_path_in_pair(
    p: &BipartitePair,
    x: VertexId,
    y: VertexId,
    forbidden: &BTreeSet<VertexId>,
) -> Result<Walk> {
    let side_of = |v: VertexId| -> Option<bool> {
        if p.a.contains(&v) {
            Some(true)
        } else if p.b.contains(&v) {
            Some(false)
        } else {
            None
        }
    };
    let sx = side_of(x).ok_or_else(|| Error::invalid("x is not in the pair"))?;
    let sy = side_of(y).ok_or_else(|| Error::invalid("y is not in the pair"))?;
    if x == y {
        return Err(Error::invalid("endpoints coincide"));
    }
    let cap = if sx != sy { 3 } else { 4 };
    // BFS over pair edges
    let pos_a: BTreeMap<VertexId, usize> = p.a.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let pos_b: BTreeMap<VertexId, usize> = p.b.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut prev: BTreeMap<VertexId, (VertexId, EdgeId)> = BTreeMap::new();
    let mut dist: BTreeMap<VertexId, usize> = BTreeMap::new();
    dist.insert(x, 0);
    let mut queue = VecDeque::new();
    queue.push_back(x);
    while let Some(v) = queue.pop_front() {
        let d = dist[&v];
        if d >= cap {
            continue;
        }
        let nbrs: Vec<(VertexId, EdgeId)> = if let Some(&ai) = pos_a.get(&v) {
            p.edges
                .iter()
                .filter(|&&(a2, _, _)| a2 == ai)
                .map(|&(_, bi, id)| (p.b[bi], id))
                .collect()
        } else {
            let bi = pos_b[&v];
            p.edges
                .iter()
                .filter(|&&(_, b2, _)| b2 == bi)
                .map(|&(ai, _, id)| (p.a[ai], id))
                .collect()
        };
        for (w, id) in nbrs {
            if dist.contains_key(&w) {
                continue;
            }
            if w != y && forbidden.contains(&w) {
                continue;
            }
            dist.insert(w, d + 1);
            prev.insert(w, (v, id));
            if w == y {
                let mut edges = Vec::new();
                let mut cur = y;
                while cur != x {
                    let (back, id) = prev[&cur];
                    edges.push(id);
                    cur = back;
                }
                edges.reverse();
                return Ok(Walk::path(edges));
            }
            queue.push_back(w);
        }
    }
    Err(Error::SearchFailed {
        op: "short_path_in_pair",
        detail: format!("no ({x},{y})-path of length <= {cap}"),
    })
}

/// Explicit caps, floored at 1, with every floor recorded.
#[derive(Debug, Clone)]
pub struct TieBudget {
    /// per (vertex, pair): link paths with this endpoint here (eps^{1/2} m)
    pub link_endpoint_cap: usize,
    /// per vertex: link paths through it (eps^{1/4} m)
    pub internal_cap: usize,
    /// per (helper cluster, forest): link paths hosted (sqrt(zeta) m / 4)
    pub pair_forest_cap: usize,
    /// per (vertex, pair): bridging edges taken from the secondary graph
    pub gamma2_cap: usize,
    pub deviations: Vec<String>,
}

impl TieBudget {
    pub fn from_parameters(eps: &Rat, zeta: &Rat, m: usize) -> Self {
        let mut deviations = Vec::new();
        let mq = rat::rat_usize(m);
        let mut floor_at_one = |name: &str, value: Rat| -> usize {
            let raw = value.floor().numer().to_usize().unwrap_or(0);
            if raw == 0 {
                deviations.push(format!("{name} floored to 1 (formula gave {})", rat::display(&value)));
                1
            } else {
                raw
            }
        };
        let link_endpoint_cap = floor_at_one("link_endpoint_cap", rat::sqrt_upper(eps) * &mq);
        let internal_cap = floor_at_one("internal_cap", rat::nth_root_upper(eps, 4) * &mq);
        let pair_forest_cap =
            floor_at_one("pair_forest_cap", rat::sqrt_upper(zeta) * &mq / rat::rat_int(4));
        let gamma2_cap = floor_at_one("gamma2_cap", eps * &mq);
        TieBudget {
            link_endpoint_cap,
            internal_cap,
            pair_forest_cap,
            gamma2_cap,
            deviations,
        }
    }
}

/// Usage counters, updated per accepted link, rechecked against the trace.
#[derive(Debug, Clone, Default)]
pub struct TieCounters {
    pub endpoint: BTreeMap<(VertexId, (usize, usize)), usize>,
    pub internal: BTreeMap<VertexId, usize>,
    pub pair_forest: BTreeMap<(usize, usize), usize>, // (helper cluster, forest)
    pub gamma2: BTreeMap<(VertexId, (usize, usize)), usize>,
}

#[derive(Debug, Clone)]
pub struct LinkRecord {
    pub forest: usize,
    /// clusters hosting the link (endpoint cluster, helper cluster) when it
    /// lives in a single pair; (usize::MAX, usize::MAX) for multi-pair links
    pub pair: (usize, usize),
    pub edges: Vec<EdgeId>,
    pub endpoints: (VertexId, VertexId),
    pub from_gamma2: bool,
}

#[derive(Debug, Clone, Default)]
pub struct TieTrace {
    pub links: Vec<LinkRecord>,
}

impl TieTrace {
    /// Recomputes endpoint/internal usage from the records; tests assert this
    /// matches the live counters exactly.
    pub fn recount(&self, g: &MultiGraph, part: &ClusterPartition) -> TieCounters {
        let mut counters = TieCounters::default();
        for rec in &self.links {
            if rec.from_gamma2 {
                for &e in &rec.edges {
                    let (u, v) = g.endpoints(e);
                    if let (Some(cu), Some(cv)) = (part.cluster_of(u), part.cluster_of(v)) {
                        let key = (cu.min(cv), cu.max(cv));
                        *counters.gamma2.entry((u, key)).or_insert(0) += 1;
                        *counters.gamma2.entry((v, key)).or_insert(0) += 1;
                    }
                }
                continue;
            }
            if rec.pair.0 != usize::MAX {
                *counters
                    .endpoint
                    .entry((rec.endpoints.0, rec.pair))
                    .or_insert(0) += 1;
                *counters
                    .endpoint
                    .entry((rec.endpoints.1, rec.pair))
                    .or_insert(0) += 1;
                *counters
                    .pair_forest
                    .entry((rec.pair.1, rec.forest))
                    .or_insert(0) += 1;
            }
            // interior vertices
            let walk = Walk::path(rec.edges.clone());
            if let Ok(seq) = walk.trail(g) {
                for &v in &seq[1..seq.len() - 1] {
                    *counters.internal.entry(v).or_insert(0) += 1;
                }
            }
        }
        counters
    }
}

#[derive(Debug, Clone)]
pub struct TiePass {
    pub used: Vec<BTreeSet<EdgeId>>,
    pub trace: TieTrace,
}

fn path_endpoints(g: &MultiGraph, w: &Walk) -> Result<(VertexId, VertexId)> {
    w.path_endpoints(g)
}

fn forest_vertices(g: &MultiGraph, forest: &[Walk]) -> BTreeSet<VertexId> {
    let mut out = BTreeSet::new();
    for w in forest {
        if let Ok(seq) = w.trail(g) {
            out.extend(seq);
        }
    }
    out
}

/// Numeric hypothesis checks shared by the tying lemmas: forests are
/// vertex-disjoint path sets with endpoints outside V0, per-cluster occupancy
/// at most zeta*m, and per-vertex endpoint multiplicity within cap.
pub fn check_tie_hypotheses(
    g: &MultiGraph,
    part: &ClusterPartition,
    forests: &[Vec<Walk>],
    zeta: &Rat,
    endpoint_multiplicity_cap: usize,
) -> Result<()> {
    let m = part.m();
    let occupancy_cap = zeta * rat::rat_usize(m);
    let mut endpoint_count: BTreeMap<VertexId, usize> = BTreeMap::new();
    for (i, forest) in forests.iter().enumerate() {
        let mut seen: BTreeSet<VertexId> = BTreeSet::new();
        let mut cluster_occup: BTreeMap<usize, usize> = BTreeMap::new();
        for w in forest {
            if w.kind != WalkKind::Path {
                return Err(Error::invalid(format!("forest {i} contains a non-path")));
            }
            let seq = w.trail(g)?;
            for &v in &seq {
                if !seen.insert(v) {
                    return Err(Error::invalid(format!(
                        "forest {i} paths share vertex {v}"
                    )));
                }
                if let Some(c) = part.cluster_of(v) {
                    *cluster_occup.entry(c).or_insert(0) += 1;
                }
            }
            let (x, y) = (seq[0], *seq.last().unwrap());
            for v in [x, y] {
                if part.cluster_of(v).is_none() {
                    return Err(Error::invalid(format!(
                        "forest {i} has an endpoint in V0 ({v})"
                    )));
                }
                *endpoint_count.entry(v).or_insert(0) += 1;
            }
        }
        if let Some((&c, &occ)) = cluster_occup
            .iter()
            .find(|(_, &occ)| rat::rat_usize(occ) > occupancy_cap)
        {
            return Err(Error::invalid(format!(
                "forest {i} occupies cluster {c} with {occ} vertices (cap zeta*m)"
            )));
        }
    }
    if let Some((&v, &c)) = endpoint_count
        .iter()
        .find(|(_, &c)| c > endpoint_multiplicity_cap)
    {
        return Err(Error::invalid(format!(
            "vertex {v} is an endpoint of {c} paths (cap {endpoint_multiplicity_cap})"
        )));
    }
    Ok(())
}

struct TieState<'a> {
    g: &'a MultiGraph,
    part: &'a ClusterPartition,
    budget: &'a TieBudget,
    counters: TieCounters,
    trace: TieTrace,
}

impl<'a> TieState<'a> {
    fn endpoint_used(&self, v: VertexId, pair: (usize, usize)) -> usize {
        *self.counters.endpoint.get(&(v, pair)).unwrap_or(&0)
    }

    fn internal_used(&self, v: VertexId) -> usize {
        *self.counters.internal.get(&v).unwrap_or(&0)
    }

    fn pair_forest_used(&self, helper: usize, forest: usize) -> usize {
        *self.counters.pair_forest.get(&(helper, forest)).unwrap_or(&0)
    }

    fn record_link(
        &mut self,
        forest: usize,
        pair: (usize, usize),
        edges: Vec<EdgeId>,
        endpoints: (VertexId, VertexId),
        from_gamma2: bool,
    ) {
        if from_gamma2 {
            for &e in &edges {
                let (u, v) = self.g.endpoints(e);
                if let (Some(cu), Some(cv)) = (self.part.cluster_of(u), self.part.cluster_of(v)) {
                    let key = (cu.min(cv), cu.max(cv));
                    *self.counters.gamma2.entry((u, key)).or_insert(0) += 1;
                    *self.counters.gamma2.entry((v, key)).or_insert(0) += 1;
                }
            }
        } else {
            if pair.0 != usize::MAX {
                *self.counters.endpoint.entry((endpoints.0, pair)).or_insert(0) += 1;
                *self.counters.endpoint.entry((endpoints.1, pair)).or_insert(0) += 1;
                *self.counters.pair_forest.entry((pair.1, forest)).or_insert(0) += 1;
            }
            let walk = Walk::path(edges.clone());
            if let Ok(seq) = walk.trail(self.g) {
                for &v in &seq[1..seq.len() - 1] {
                    *self.counters.internal.entry(v).or_insert(0) += 1;
                }
            }
        }
        self.trace.links.push(LinkRecord {
            forest,
            pair,
            edges,
            endpoints,
            from_gamma2,
        });
    }
}

/// BFS for a link path inside the single pair (cluster `ca`, cluster `cb`),
/// from x to y, over alive edges, with interior vertices free and lightly
/// used.
#[allow(clippy::too_many_arguments)]
fn pair_link_path(
    state: &TieState<'_>,
    alive: &[bool],
    ca: usize,
    cb: usize,
    x: VertexId,
    y: VertexId,
    occupied: &BTreeSet<VertexId>,
    cap: usize,
) -> Option<Vec<EdgeId>> {
    let g = state.g;
    let part = state.part;
    let edge_ok = |e: EdgeId| {
        if !alive[e] {
            return false;
        }
        let (u, v) = g.endpoints(e);
        match (part.cluster_of(u), part.cluster_of(v)) {
            (Some(c1), Some(c2)) => (c1 == ca && c2 == cb) || (c1 == cb && c2 == ca),
            _ => false,
        }
    };
    let interior_ok = |v: VertexId| {
        !occupied.contains(&v)
            && state.internal_used(v) < state.budget.internal_cap
            && matches!(part.cluster_of(v), Some(c) if c == ca || c == cb)
    };
    bfs_link(g, x, y, cap, &edge_ok, &interior_ok)
}

fn bfs_link(
    g: &MultiGraph,
    from: VertexId,
    to: VertexId,
    cap: usize,
    edge_ok: &dyn Fn(EdgeId) -> bool,
    interior_ok: &dyn Fn(VertexId) -> bool,
) -> Option<Vec<EdgeId>> {
    let mut prev: Vec<Option<EdgeId>> = vec![None; g.n()];
    let mut dist = vec![usize::MAX; g.n()];
    dist[from] = 0;
    let mut queue = VecDeque::new();
    queue.push_back(from);
    while let Some(v) = queue.pop_front() {
        if dist[v] >= cap {
            continue;
        }
        for &e in g.incident(v) {
            if !edge_ok(e) {
                continue;
            }
            let w = g.other_end(e, v);
            if dist[w] != usize::MAX {
                continue;
            }
            if w != to && !interior_ok(w) {
                continue;
            }
            dist[w] = dist[v] + 1;
            prev[w] = Some(e);
            if w == to {
                let mut path = Vec::new();
                let mut cur = to;
                while cur != from {
                    let e = prev[cur].unwrap();
                    path.push(e);
                    cur = g.other_end(e, cur);
                }
                path.reverse();
                return Some(path);
            }
            queue.push_back(w);
        }
    }
    None
}

/// Per-forest endpoint census: cluster -> indices of paths with an endpoint
/// there.
fn endpoint_census(
    g: &MultiGraph,
    part: &ClusterPartition,
    forest: &[Walk],
) -> Result<BTreeMap<usize, Vec<usize>>> {
    let mut census: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (idx, w) in forest.iter().enumerate() {
        let (x, y) = path_endpoints(g, w)?;
        for v in [x, y] {
            let c = part
                .cluster_of(v)
                .ok_or_else(|| Error::invalid("endpoint in V0"))?;
            census.entry(c).or_default().push(idx);
        }
    }
    Ok(census)
}

fn merge_paths(forest: &mut Vec<Walk>, i: usize, j: usize, link: &[EdgeId]) {
    debug_assert!(i != j);
    let (first, second) = if i < j { (i, j) } else { (j, i) };
    let other = forest.remove(second);
    let mut edges = forest[first].edges.clone();
    edges.extend_from_slice(link);
    edges.extend(other.edges);
    forest[first] = Walk::path(edges);
}

/// `tie_many`: per forest, repeatedly merges two paths ending in a common
/// cluster via a length-<=4 link path inside one support pair, until every
/// cluster hosts at most `cluster_cap` (2 beta^-2) path endpoints per forest.
pub fn tie_many(
    g: &MultiGraph,
    part: &ClusterPartition,
    gamma_alive: &mut [bool],
    forests: &mut [Vec<Walk>],
    budget: &TieBudget,
    beta: &Rat,
    counters_out: Option<&mut TieCounters>,
) -> Result<TiePass> {
    let cluster_cap = cluster_endpoint_cap(beta);
    let mut state = TieState {
        g,
        part,
        budget,
        counters: TieCounters::default(),
        trace: TieTrace::default(),
    };
    let mut used: Vec<BTreeSet<EdgeId>> = vec![BTreeSet::new(); forests.len()];
    for fi in 0..forests.len() {
        loop {
            let census = endpoint_census(g, part, &forests[fi])?;
            let Some((&cluster, members)) = census
                .iter()
                .find(|(_, members)| members.len() > cluster_cap)
            else {
                break;
            };
            let occupied = forest_vertices(g, &forests[fi]);
            // candidate endpoint pairs in this cluster, helper cluster j'
            // chosen lowest-first per conditions (I)-(IV)
            let mut tied = false;
            'helper: for (&(ci, helper), support) in part.support.iter() {
                if ci != cluster {
                    continue;
                }
                if state.pair_forest_used(helper, fi) >= budget.pair_forest_cap {
                    continue;
                }
                let support: BTreeSet<VertexId> = support.iter().copied().collect();
                // endpoints in this cluster's support with light usage
                let mut eligible: Vec<(usize, VertexId)> = Vec::new();
                for &idx in members {
                    let (x, y) = path_endpoints(g, &forests[fi][idx])?;
                    for v in [x, y] {
                        if part.cluster_of(v) == Some(cluster)
                            && support.contains(&v)
                            && state.endpoint_used(v, (cluster, helper))
                                < budget.link_endpoint_cap
                        {
                            eligible.push((idx, v));
                        }
                    }
                }
                for a in 0..eligible.len() {
                    for b in a + 1..eligible.len() {
                        let (pi, x) = eligible[a];
                        let (pj, x2) = eligible[b];
                        if pi == pj || x == x2 {
                            continue;
                        }
                        let mut blocked = occupied.clone();
                        blocked.remove(&x);
                        blocked.remove(&x2);
                        if let Some(link) =
                            pair_link_path(&state, gamma_alive, cluster, helper, x, x2, &blocked, 4)
                        {
                            for &e in &link {
                                gamma_alive[e] = false;
                                used[fi].insert(e);
                            }
                            state.record_link(fi, (cluster, helper), link.clone(), (x, x2), false);
                            merge_paths(&mut forests[fi], pi, pj, &link);
                            tied = true;
                            break 'helper;
                        }
                    }
                }
            }
            if !tied {
                return Err(Error::SearchFailed {
                    op: "tie_many",
                    detail: format!(
                        "forest {fi}: cluster {cluster} holds {} endpoints but no eligible pair/link",
                        members.len()
                    ),
                });
            }
        }
    }
    if let Some(out) = counters_out {
        *out = state.counters.clone();
    }
    Ok(TiePass {
        used,
        trace: state.trace,
    })
}

/// 2 beta^-2, floored at 1.
pub fn cluster_endpoint_cap(beta: &Rat) -> usize {
    let cap = rat::rat_int(2) / (beta * beta);
    cap.floor().numer().to_usize().unwrap_or(1).max(1)
}

/// Multi-pair link path between x and x' whose clusters lie in the same
/// reduced-graph component: at most 3 vertices per cluster and 4 edges per
/// pair per link (checked post hoc on the BFS result).
#[allow(clippy::too_many_arguments)]
fn component_link_path(
    state: &TieState<'_>,
    alive: &[bool],
    comp: &BTreeSet<usize>,
    x: VertexId,
    y: VertexId,
    occupied: &BTreeSet<VertexId>,
) -> Option<Vec<EdgeId>> {
    let g = state.g;
    let part = state.part;
    let edge_ok = |e: EdgeId| {
        if !alive[e] {
            return false;
        }
        let (u, v) = g.endpoints(e);
        matches!(
            (part.cluster_of(u), part.cluster_of(v)),
            (Some(c1), Some(c2)) if comp.contains(&c1) && comp.contains(&c2) && c1 != c2
        )
    };
    let interior_ok = |v: VertexId| {
        !occupied.contains(&v)
            && state.internal_used(v) < state.budget.internal_cap
            && matches!(part.cluster_of(v), Some(c) if comp.contains(&c))
    };
    let k = part.k();
    let link = bfs_link(g, x, y, 2 * k + 4, &edge_ok, &interior_ok)?;
    // structural caps from the lemma's proof condition (1)
    let walk = Walk::path(link.clone());
    let seq = walk.trail(g).ok()?;
    let mut per_cluster: BTreeMap<usize, usize> = BTreeMap::new();
    for &v in &seq {
        if let Some(c) = part.cluster_of(v) {
            *per_cluster.entry(c).or_insert(0) += 1;
        }
    }
    if per_cluster.values().any(|&c| c > 3) {
        return None;
    }
    let mut per_pair: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for &e in &link {
        let (u, v) = g.endpoints(e);
        let (cu, cv) = (part.cluster_of(u)?, part.cluster_of(v)?);
        *per_pair.entry((cu.min(cv), cu.max(cv))).or_insert(0) += 1;
    }
    if per_pair.values().any(|&c| c > 4) {
        return None;
    }
    Some(link)
}

/// `tie_few`: merges paths across clusters of a common reduced-graph
/// component until each component hosts at most one endpoint-path per forest.
pub fn tie_few(
    g: &MultiGraph,
    part: &ClusterPartition,
    gamma_alive: &mut [bool],
    forests: &mut [Vec<Walk>],
    budget: &TieBudget,
    counters_out: Option<&mut TieCounters>,
) -> Result<TiePass> {
    let components = part.reduced_components_restricted(g, gamma_alive);
    let comp_of: BTreeMap<usize, usize> = components
        .iter()
        .enumerate()
        .flat_map(|(ci, comp)| comp.iter().map(move |&c| (c, ci)))
        .collect();
    let mut state = TieState {
        g,
        part,
        budget,
        counters: TieCounters::default(),
        trace: TieTrace::default(),
    };
    let mut used: Vec<BTreeSet<EdgeId>> = vec![BTreeSet::new(); forests.len()];
    for fi in 0..forests.len() {
        loop {
            // find a component with two endpoint-paths
            let mut per_comp: BTreeMap<usize, Vec<(usize, VertexId)>> = BTreeMap::new();
            for (idx, w) in forests[fi].iter().enumerate() {
                let (x, y) = path_endpoints(g, w)?;
                for v in [x, y] {
                    let c = part.cluster_of(v).ok_or_else(|| Error::invalid("endpoint in V0"))?;
                    if let Some(&ci) = comp_of.get(&c) {
                        per_comp.entry(ci).or_default().push((idx, v));
                    }
                }
            }
            let target = per_comp.iter().find_map(|(&ci, entries)| {
                let distinct: BTreeSet<usize> = entries.iter().map(|&(idx, _)| idx).collect();
                (distinct.len() >= 2).then_some(ci)
            });
            let Some(ci) = target else { break };
            let comp: BTreeSet<usize> = components[ci].iter().copied().collect();
            let entries = &per_comp[&ci];
            let occupied = forest_vertices(g, &forests[fi]);
            let mut tied = false;
            'pairs: for a in 0..entries.len() {
                for b in a + 1..entries.len() {
                    let (pi, x) = entries[a];
                    let (pj, y) = entries[b];
                    if pi == pj {
                        continue;
                    }
                    let cx = part.cluster_of(x).unwrap();
                    let cy = part.cluster_of(y).unwrap();
                    // endpoint-usage caps per incident pair (approximated by
                    // the cluster pair of the link's first/last edges)
                    let _ = (cx, cy);
                    let mut blocked = occupied.clone();
                    blocked.remove(&x);
                    blocked.remove(&y);
                    if let Some(link) =
                        component_link_path(&state, gamma_alive, &comp, x, y, &blocked)
                    {
                        for &e in &link {
                            gamma_alive[e] = false;
                            used[fi].insert(e);
                        }
                        state.record_link(fi, (usize::MAX, usize::MAX), link.clone(), (x, y), false);
                        merge_paths(&mut forests[fi], pi, pj, &link);
                        tied = true;
                        break 'pairs;
                    }
                }
            }
            if !tied {
                return Err(Error::SearchFailed {
                    op: "tie_few",
                    detail: format!("forest {fi}: component {ci} has untieable paths"),
                });
            }
        }
    }
    if let Some(out) = counters_out {
        *out = state.counters.clone();
    }
    Ok(TiePass {
        used,
        trace: state.trace,
    })
}

/// `close_into_cycles`: ties each forest into one cycle. When the forest
/// paths cannot be ordered with consecutive endpoints sharing a reduced'
/// component, vertex-disjoint bridging edges are drawn from the secondary
/// graph (gamma2) whose reduced graph connects the components.
#[allow(clippy::too_many_arguments)]
pub fn close_into_cycles(
    g: &MultiGraph,
    part: &ClusterPartition,
    gamma_alive: &mut [bool],
    gamma2_alive: Option<&mut [bool]>,
    forests: &mut Vec<Vec<Walk>>,
    budget: &TieBudget,
    counters_out: Option<&mut TieCounters>,
) -> Result<(Vec<Walk>, TiePass)> {
    let components = part.reduced_components_restricted(g, gamma_alive);
    let comp_of: BTreeMap<usize, usize> = components
        .iter()
        .enumerate()
        .flat_map(|(ci, comp)| comp.iter().map(move |&c| (c, ci)))
        .collect();
    let mut state = TieState {
        g,
        part,
        budget,
        counters: TieCounters::default(),
        trace: TieTrace::default(),
    };
    let mut used: Vec<BTreeSet<EdgeId>> = vec![BTreeSet::new(); forests.len()];
    let mut cycles = Vec::with_capacity(forests.len());
    let mut gamma2_alive = gamma2_alive;
    for fi in 0..forests.len() {
        if forests[fi].is_empty() {
            continue;
        }
        if forests[fi].iter().any(|w| w.kind != WalkKind::Path) {
            return Err(Error::invalid("close_into_cycles input must be paths"));
        }
        // try to order the paths so consecutive endpoints share components
        let mut ordering = order_for_closing(g, part, &comp_of, &forests[fi])?;
        if ordering.is_none() {
            // bridge with gamma2 edges, each becoming a new 1-edge path
            let Some(gamma2) = gamma2_alive.as_deref_mut() else {
                return Err(Error::invalid(
                    "paths are not orderable and no secondary graph was supplied",
                ));
            };
            bridge_with_gamma2(
                g,
                part,
                &comp_of,
                gamma2,
                &mut forests[fi],
                &mut state,
                fi,
                &mut used[fi],
            )?;
            ordering = order_for_closing(g, part, &comp_of, &forests[fi])?;
            if ordering.is_none() {
                return Err(Error::SearchFailed {
                    op: "close_into_cycles",
                    detail: format!("forest {fi}: no closing order even after bridging"),
                });
            }
        }
        let order = ordering.unwrap();
        // link each path's exit endpoint (wrapping) to the next path's entry
        let mut all_edges: Vec<EdgeId> = forests[fi]
            .iter()
            .flat_map(|w| w.edges.iter().copied())
            .collect();
        let count = order.len();
        for s in 0..count {
            let (_, x, _) = order[s];
            let (y, _, _) = order[(s + 1) % count];
            let cx = part.cluster_of(x).ok_or_else(|| Error::invalid("endpoint in V0"))?;
            let ci = comp_of[&cx];
            let comp: BTreeSet<usize> = components[ci].iter().copied().collect();
            let mut occupied = forest_vertices(g, &forests[fi]);
            for &e in &all_edges {
                let (u, v) = g.endpoints(e);
                occupied.insert(u);
                occupied.insert(v);
            }
            occupied.remove(&x);
            occupied.remove(&y);
            let link = component_link_path(&state, gamma_alive, &comp, x, y, &occupied)
                .ok_or_else(|| Error::SearchFailed {
                    op: "close_into_cycles",
                    detail: format!("forest {fi}: no closing link from {x} to {y}"),
                })?;
            for &e in &link {
                gamma_alive[e] = false;
                used[fi].insert(e);
                all_edges.push(e);
            }
            state.record_link(fi, (usize::MAX, usize::MAX), link, (x, y), false);
        }
        let cycle = Walk::cycle(all_edges);
        cycle.trail(g).map_err(|e| Error::SearchFailed {
            op: "close_into_cycles",
            detail: format!("forest {fi}: assembled cycle invalid: {e}"),
        })?;
        cycles.push(cycle);
    }
    if let Some(out) = counters_out {
        *out = state.counters.clone();
    }
    Ok((
        cycles,
        TiePass {
            used,
            trace: state.trace,
        },
    ))
}

/// Orientation of each path chosen so that consecutive endpoints (wrapping)
/// share a reduced component: an Eulerian-circuit ordering of the multigraph
/// whose vertices are components and whose edges are the paths.
/// Returns, per position, (entry endpoint, exit endpoint, path index).
type ClosingOrder = Vec<(VertexId, VertexId, usize)>;

fn order_for_closing(
    g: &MultiGraph,
    part: &ClusterPartition,
    comp_of: &BTreeMap<usize, usize>,
    forest: &[Walk],
) -> Result<Option<ClosingOrder>> {
    // endpoints and their components
    let mut path_ends: Vec<((VertexId, usize), (VertexId, usize))> = Vec::new();
    for w in forest {
        let (x, y) = path_endpoints(g, w)?;
        let cx = comp_of[&part.cluster_of(x).ok_or_else(|| Error::invalid("endpoint in V0"))?];
        let cy = comp_of[&part.cluster_of(y).ok_or_else(|| Error::invalid("endpoint in V0"))?];
        path_ends.push(((x, cx), (y, cy)));
    }
    // multigraph on components; find an Eulerian circuit using each path once
    let mut comp_ids: BTreeSet<usize> = BTreeSet::new();
    for &((_, cx), (_, cy)) in &path_ends {
        comp_ids.insert(cx);
        comp_ids.insert(cy);
    }
    let mut degree: BTreeMap<usize, usize> = BTreeMap::new();
    for &((_, cx), (_, cy)) in &path_ends {
        *degree.entry(cx).or_insert(0) += 1;
        *degree.entry(cy).or_insert(0) += 1;
    }
    if degree.values().any(|d| d % 2 == 1) {
        return Ok(None);
    }
    // connectivity over the multigraph
    let ids: Vec<usize> = comp_ids.iter().copied().collect();
    let index: BTreeMap<usize, usize> = ids.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); ids.len()]; // (other, path idx)
    for (pi, &((_, cx), (_, cy))) in path_ends.iter().enumerate() {
        adj[index[&cx]].push((index[&cy], pi));
        adj[index[&cy]].push((index[&cx], pi));
    }
    let mut seen = vec![false; ids.len()];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &(w, _) in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    if seen.iter().any(|&s| !s) {
        return Ok(None);
    }
    // Hierholzer over path-edges
    let mut used = vec![false; path_ends.len()];
    let mut ptr = vec![0usize; ids.len()];
    let mut circuit: Vec<(usize, usize)> = Vec::new(); // (path idx, entry comp index)
    let mut stack: Vec<(usize, Option<(usize, usize)>)> = vec![(0, None)];
    while let Some(&(v, via)) = stack.last() {
        let mut next = None;
        while ptr[v] < adj[v].len() {
            let (w, pi) = adj[v][ptr[v]];
            if !used[pi] {
                next = Some((w, pi));
                break;
            }
            ptr[v] += 1;
        }
        match next {
            Some((w, pi)) => {
                used[pi] = true;
                stack.push((w, Some((pi, v))));
            }
            None => {
                stack.pop();
                if let Some((pi, entry)) = via {
                    circuit.push((pi, entry));
                }
            }
        }
    }
    if circuit.len() != path_ends.len() {
        return Ok(None);
    }
    circuit.reverse();
    // entry component tells the orientation: we ENTER the path at the
    // endpoint lying in the entry component and EXIT at the other
    let mut order = Vec::with_capacity(circuit.len());
    for (pi, entry_idx) in circuit {
        let ((x, cx), (y, _cy)) = path_ends[pi];
        let entry_comp = ids[entry_idx];
        let (entry, exit) = if cx == entry_comp { (x, y) } else { (y, x) };
        order.push((entry, exit, pi));
    }
    Ok(Some(order))
}

/// Adds vertex-disjoint gamma2 edges as 1-edge paths until the closing order
/// exists, following shortest routes in the component graph of gamma2.
#[allow(clippy::too_many_arguments)]
fn bridge_with_gamma2(
    g: &MultiGraph,
    part: &ClusterPartition,
    comp_of: &BTreeMap<usize, usize>,
    gamma2_alive: &mut [bool],
    forest: &mut Vec<Walk>,
    state: &mut TieState<'_>,
    fi: usize,
    used: &mut BTreeSet<EdgeId>,
) -> Result<()> {
    // component parity: components with odd endpoint count must be paired up
    let mut degree: BTreeMap<usize, usize> = BTreeMap::new();
    let mut involved: BTreeSet<usize> = BTreeSet::new();
    for w in forest.iter() {
        let (x, y) = path_endpoints(g, w)?;
        for v in [x, y] {
            let c = comp_of[&part.cluster_of(v).unwrap()];
            *degree.entry(c).or_insert(0) += 1;
            involved.insert(c);
        }
    }
    // gamma2 adjacency between components
    let comp_count = comp_of.values().max().map(|&c| c + 1).unwrap_or(0);
    let mut comp_adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); comp_count];
    for e in 0..g.m() {
        if !gamma2_alive[e] {
            continue;
        }
        let (u, v) = g.endpoints(e);
        if let (Some(cu), Some(cv)) = (part.cluster_of(u), part.cluster_of(v)) {
            let (a, b) = (comp_of[&cu], comp_of[&cv]);
            if a != b {
                comp_adj[a].insert(b);
                comp_adj[b].insert(a);
            }
        }
    }
    let occupied = forest_vertices(g, forest);
    let mut blocked = occupied;
    // connect components with odd endpoint degree pairwise through the
    // gamma2 component graph; each hop adds one bridging edge (a new path)
    loop {
        let odd: Vec<usize> = degree
            .iter()
            .filter(|(_, &d)| d % 2 == 1)
            .map(|(&c, _)| c)
            .collect();
        if odd.is_empty() {
            break;
        }
        let (from, to) = (odd[0], odd[1]);
        // BFS in the component graph
        let mut prev = vec![usize::MAX; comp_count];
        let mut seen = vec![false; comp_count];
        seen[from] = true;
        let mut queue = VecDeque::new();
        queue.push_back(from);
        let mut found = false;
        while let Some(c) = queue.pop_front() {
            if c == to {
                found = true;
                break;
            }
            for &d in &comp_adj[c] {
                if !seen[d] {
                    seen[d] = true;
                    prev[d] = c;
                    queue.push_back(d);
                }
            }
        }
        if !found {
            return Err(Error::invalid(
                "secondary reduced graph does not connect the components",
            ));
        }
        let mut route = vec![to];
        let mut cur = to;
        while cur != from {
            cur = prev[cur];
            route.push(cur);
        }
        route.reverse();
        // one gamma2 edge per hop, vertex-disjoint from the forest
        for hop in route.windows(2) {
            let (ca, cb) = (hop[0], hop[1]);
            let mut chosen = None;
            for e in 0..g.m() {
                if !gamma2_alive[e] {
                    continue;
                }
                let (u, v) = g.endpoints(e);
                let (Some(cu), Some(cv)) = (part.cluster_of(u), part.cluster_of(v)) else {
                    continue;
                };
                let (x, y) = (comp_of[&cu], comp_of[&cv]);
                if !((x == ca && y == cb) || (x == cb && y == ca)) {
                    continue;
                }
                if blocked.contains(&u) || blocked.contains(&v) {
                    continue;
                }
                let key = (cu.min(cv), cu.max(cv));
                let used_u = *state.counters.gamma2.get(&(u, key)).unwrap_or(&0);
                let used_v = *state.counters.gamma2.get(&(v, key)).unwrap_or(&0);
                if used_u >= state.budget.gamma2_cap || used_v >= state.budget.gamma2_cap {
                    continue;
                }
                chosen = Some((e, u, v));
                break;
            }
            let Some((e, u, v)) = chosen else {
                return Err(Error::SearchFailed {
                    op: "close_into_cycles",
                    detail: format!("no free bridging edge between components {ca} and {cb}"),
                });
            };
            gamma2_alive[e] = false;
            used.insert(e);
            blocked.insert(u);
            blocked.insert(v);
            state.record_link(fi, (usize::MAX, usize::MAX), vec![e], (u, v), true);
            forest.push(Walk::path(vec![e]));
            let (cu, cv) = (comp_of[&part.cluster_of(u).unwrap()], comp_of[&part.cluster_of(v).unwrap()]);
            *degree.entry(cu).or_insert(0) += 1;
            *degree.entry(cv).or_insert(0) += 1;
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct CoverOutcome {
    pub cycles: Vec<Walk>,
    pub leftover: BTreeSet<EdgeId>,
    pub used_gamma: BTreeSet<EdgeId>,
    pub trace: TieTrace,
}

/// `cover_sparse_leftover`: covers a low-max-degree edge set H with cycles,
/// using edges of the primary graph (gamma) sparingly: Vizing split, random
/// occupancy-bounded sub-splitting, component colouring, even-matching
/// pairing, then tie_many -> tie_few -> ordering closure.
#[allow(clippy::too_many_arguments)]
pub fn cover_sparse_leftover(
    g: &MultiGraph,
    part: &ClusterPartition,
    h_edges: &BTreeSet<EdgeId>,
    gamma_alive: &mut [bool],
    d_cap: &Rat,
    zeta: &Rat,
    beta: &Rat,
    eps: &Rat,
    seed: u64,
) -> Result<CoverOutcome> {
    let n = g.n();
    // Delta(H) <= d * n
    let mut h_deg = vec![0usize; n];
    for &e in h_edges {
        let (u, v) = g.endpoints(e);
        h_deg[u] += 1;
        h_deg[v] += 1;
    }
    let h_max = h_deg.iter().copied().max().unwrap_or(0);
    if rat::rat_usize(h_max) > d_cap * rat::rat_usize(n) {
        return Err(Error::invalid("Delta(H) exceeds the d*n budget"));
    }
    if h_edges.is_empty() {
        return Ok(CoverOutcome {
            cycles: Vec::new(),
            leftover: BTreeSet::new(),
            used_gamma: BTreeSet::new(),
            trace: TieTrace::default(),
        });
    }
    // V0 must be isolated in H
    for &e in h_edges {
        let (u, v) = g.endpoints(e);
        if part.cluster_of(u).is_none() || part.cluster_of(v).is_none() {
            return Err(Error::invalid("H touches V0"));
        }
    }
    let mut rng = rng::substream(seed, 0xc0de);
    // Vizing split of H
    let (h_graph, back) = g.restrict_edges(h_edges);
    let coloring = basic::vizing_color(&h_graph)?;
    let matchings: Vec<Vec<EdgeId>> = coloring
        .classes()
        .into_iter()
        .filter(|c| !c.is_empty())
        .map(|class| class.into_iter().map(|e| back[e]).collect())
        .collect();
    // random sub-splitting to per-cluster occupancy <= zeta m
    let m = part.m();
    let occupancy_cap = zeta * rat::rat_usize(m);
    let mut submatchings: Vec<Vec<EdgeId>> = Vec::new();
    for matching in matchings {
        submatchings.extend(split_matching_bounded(
            g,
            part,
            &matching,
            &occupancy_cap,
            &mut rng,
        )?);
    }
    // forests = submatchings as path sets
    let mut forests: Vec<Vec<Walk>> = submatchings
        .iter()
        .map(|m| m.iter().map(|&e| Walk::path(vec![e])).collect())
        .collect();
    let budget = TieBudget::from_parameters(eps, zeta, m);
    let mut trace = TieTrace::default();
    let mut used_gamma: BTreeSet<EdgeId> = BTreeSet::new();
    let pass1 = tie_many(g, part, gamma_alive, &mut forests, &budget, beta, None)?;
    for set in &pass1.used {
        used_gamma.extend(set.iter().copied());
    }
    trace.links.extend(pass1.trace.links);
    let pass2 = tie_few(g, part, gamma_alive, &mut forests, &budget, None)?;
    for set in &pass2.used {
        used_gamma.extend(set.iter().copied());
    }
    trace.links.extend(pass2.trace.links);
    // component colouring of the tied paths, even pairing per colour pair
    let components = part.reduced_components_restricted(g, gamma_alive);
    let comp_of: BTreeMap<usize, usize> = components
        .iter()
        .enumerate()
        .flat_map(|(ci, comp)| comp.iter().map(move |&c| (c, ci)))
        .collect();
    let mut mono: Vec<Walk> = Vec::new();
    let mut bi: BTreeMap<(usize, usize), Vec<Walk>> = BTreeMap::new();
    for forest in forests {
        for w in forest {
            let (x, y) = w.path_endpoints(g)?;
            let cx = comp_of[&part.cluster_of(x).unwrap()];
            let cy = comp_of[&part.cluster_of(y).unwrap()];
            if cx == cy {
                mono.push(w);
            } else {
                bi.entry((cx.min(cy), cx.max(cy))).or_default().push(w);
            }
        }
    }
    let mut leftover: BTreeSet<EdgeId> = BTreeSet::new();
    let mut closing_sets: Vec<Vec<Walk>> = mono.into_iter().map(|w| vec![w]).collect();
    for (_, mut paths) in bi {
        if paths.len() % 2 == 1 {
            let dropped = paths.pop().unwrap();
            leftover.extend(dropped.edges);
        }
        // alternate the pair's paths into even sets bounded by occupancy
        while !paths.is_empty() {
            let take = paths.len().min(2);
            let set: Vec<Walk> = paths.drain(..take).collect();
            closing_sets.push(set);
        }
    }
    let (cycles, pass3) = close_into_cycles(
        g,
        part,
        gamma_alive,
        None,
        &mut closing_sets,
        &budget,
        None,
    )?;
    for set in &pass3.used {
        used_gamma.extend(set.iter().copied());
    }
    trace.links.extend(pass3.trace.links);
    let cap = (rat::rat_int(1) / (beta * beta))
        .ceil()
        .numer()
        .to_usize()
        .unwrap_or(usize::MAX);
    if leftover.len() > cap {
        return Err(Error::SearchFailed {
            op: "cover_sparse_leftover",
            detail: format!("leftover {} exceeds beta^-2 = {cap}", leftover.len()),
        });
    }
    Ok(CoverOutcome {
        cycles,
        leftover,
        used_gamma,
        trace,
    })
}

/// Splits a matching into parts whose per-cluster vertex occupancy stays
/// within the cap, by seeded halving with verification.
fn split_matching_bounded(
    g: &MultiGraph,
    part: &ClusterPartition,
    matching: &[EdgeId],
    cap: &Rat,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vec<EdgeId>>> {
    let occupancy = |edges: &[EdgeId]| -> bool {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for &e in edges {
            let (u, v) = g.endpoints(e);
            for w in [u, v] {
                if let Some(c) = part.cluster_of(w) {
                    *counts.entry(c).or_insert(0) += 1;
                }
            }
        }
        counts.values().all(|&c| rat::rat_usize(c) <= *cap)
    };
    if occupancy(matching) {
        return Ok(vec![matching.to_vec()]);
    }
    for _ in 0..crate::regularity::RETRIES {
        let perm = rng::shuffled(rng, matching.len());
        let half = matching.len() / 2;
        let first: Vec<EdgeId> = perm[..half].iter().map(|&i| matching[i]).collect();
        let second: Vec<EdgeId> = perm[half..].iter().map(|&i| matching[i]).collect();
        let mut out = Vec::new();
        let mut ok = true;
        for piece in [first, second] {
            match split_matching_bounded(g, part, &piece, cap, rng) {
                Ok(parts) => out.extend(parts),
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Ok(out);
        }
    }
    Err(Error::RetriesExhausted {
        op: "cover_sparse_leftover",
        detail: String::from("matching could not be occupancy-split"),
    })
}

/// `matching_tie_blowup`: closes each path set of a cycle blow-up into one
/// cycle, using at most 3 edges of the first pair after a path and one edge
/// of every later pair; each vertex ends up an endpoint of at most 6 tie
/// edges and interior to at most one link.
pub fn matching_tie_blowup(
    g: &MultiGraph,
    part: &ClusterPartition,
    path_sets: &[Vec<Walk>],
    d: &Rat,
    zeta: &Rat,
) -> Result<Vec<Walk>> {
    let k = part.k();
    if k % 2 != 0 {
        return Err(Error::invalid("matching_tie_blowup needs even k"));
    }
    let m = part.m();
    if rat::rat_usize(path_sets.len()) > zeta * rat::rat_usize(m) {
        return Err(Error::invalid("too many path sets (cap zeta m)"));
    }
    // dm/10, floored at 1 so desk-scale instances are admissible
    let len_cap = rat::max(d * rat::rat_usize(m) / rat::rat_int(10), rat::rat_int(1));
    // endpoint multiplicity <= 4
    let mut endpoint_count: BTreeMap<VertexId, usize> = BTreeMap::new();
    for set in path_sets {
        for w in set {
            let (x, y) = w.path_endpoints(g)?;
            *endpoint_count.entry(x).or_insert(0) += 1;
            *endpoint_count.entry(y).or_insert(0) += 1;
            if rat::rat_usize(w.len()) > len_cap {
                return Err(Error::invalid("path longer than d*m/10"));
            }
        }
    }
    if endpoint_count.values().any(|&c| c > 4) {
        return Err(Error::invalid("a vertex is an endpoint of more than 4 paths"));
    }
    let mut alive = vec![true; g.m()];
    let mut tie_end_count: BTreeMap<VertexId, usize> = BTreeMap::new();
    let mut internal_used: BTreeSet<VertexId> = BTreeSet::new();
    let mut out = Vec::new();
    for (si, set) in path_sets.iter().enumerate() {
        if set.is_empty() {
            continue;
        }
        // the set lives on indices I = { j : P spans (V_j, V_{j+1}) }
        let mut entries: Vec<(usize, VertexId, VertexId)> = Vec::new(); // (j, end in V_j, end in V_{j+1})
        for w in set {
            let (x, y) = w.path_endpoints(g)?;
            let cx = part.cluster_of(x).ok_or_else(|| Error::invalid("endpoint in V0"))?;
            let cy = part.cluster_of(y).ok_or_else(|| Error::invalid("endpoint in V0"))?;
            let (j, lo, hi) = if (cx + 1) % k == cy {
                (cx, x, y)
            } else if (cy + 1) % k == cx {
                (cy, y, x)
            } else {
                return Err(Error::invalid("path does not span a consecutive pair"));
            };
            entries.push((j, lo, hi));
        }
        entries.sort_by_key(|&(j, _, _)| j);
        let s = entries.len();
        let mut cycle_edges: Vec<EdgeId> = set.iter().flat_map(|w| w.edges.iter().copied()).collect();
        let occupied_set: BTreeSet<VertexId> = forest_vertices(g, set);
        for t in 0..s {
            let (j_cur, _, from) = entries[t]; // endpoint in V_{j_cur + 1}
            let (j_next, to, _) = entries[(t + 1) % s]; // endpoint in V_{j_next}
            // clusters travelled: j_cur+1 -> j_cur+2 -> ... -> j_next
            let mut route = Vec::new();
            let mut c = (j_cur + 1) % k;
            route.push(c);
            while c != j_next {
                c = (c + 1) % k;
                route.push(c);
            }
            // link = up to 3 edges in the first pair, then one per pair
            let edge_ok = |e: EdgeId| alive[e];
            let state_internal = internal_used.clone();
            let interior_ok = |v: VertexId| {
                !occupied_set.contains(&v)
                    && !state_internal.contains(&v)
                    && part.cluster_of(v).is_some()
            };
            let link = if route.len() == 1 {
                // both endpoints in the same cluster: hop through the next
                // pair and back (length <= 4) or fail
                let next = (route[0] + 1) % k;
                let comp: BTreeSet<usize> = [route[0], next].into_iter().collect();
                let edge_in_pair = |e: EdgeId| {
                    if !alive[e] {
                        return false;
                    }
                    let (u, v) = g.endpoints(e);
                    matches!((part.cluster_of(u), part.cluster_of(v)),
                        (Some(c1), Some(c2)) if comp.contains(&c1) && comp.contains(&c2) && c1 != c2)
                };
                bfs_link(g, from, to, 4, &edge_in_pair, &interior_ok)
            } else {
                guided_route_link(g, part, &route, from, to, &edge_ok, &interior_ok)
            };
            let link = link.ok_or_else(|| Error::SearchFailed {
                op: "matching_tie_blowup",
                detail: format!("set {si}: no link from {from} to {to}"),
            })?;
            // record usage
            *tie_end_count.entry(from).or_insert(0) += 1;
            *tie_end_count.entry(to).or_insert(0) += 1;
            let walk = Walk::path(link.clone());
            let seq = walk.trail(g)?;
            for &v in &seq[1..seq.len() - 1] {
                internal_used.insert(v);
            }
            for &e in &link {
                alive[e] = false;
                cycle_edges.push(e);
            }
        }
        let cycle = Walk::cycle(cycle_edges);
        cycle.trail(g).map_err(|e| Error::SearchFailed {
            op: "matching_tie_blowup",
            detail: format!("set {si}: assembled cycle invalid: {e}"),
        })?;
        out.push(cycle);
    }
    if tie_end_count.values().any(|&c| c > 6) {
        return Err(Error::SearchFailed {
            op: "matching_tie_blowup",
            detail: String::from("a vertex exceeded 6 tie-edge endpoints"),
        });
    }
    Ok(out)
}

/// Finds a link following a fixed cluster route: at most 3 edges within the
/// first pair, then exactly one vertex per cluster along the route.
fn guided_route_link(
    g: &MultiGraph,
    part: &ClusterPartition,
    route: &[usize],
    from: VertexId,
    to: VertexId,
    edge_ok: &dyn Fn(EdgeId) -> bool,
    interior_ok: &dyn Fn(VertexId) -> bool,
) -> Option<Vec<EdgeId>> {
    // choose v_1 in route[1] adjacent deeper: DFS over layers
    fn dfs(
        g: &MultiGraph,
        part: &ClusterPartition,
        route: &[usize],
        layer: usize,
        cur: VertexId,
        to: VertexId,
        edge_ok: &dyn Fn(EdgeId) -> bool,
        interior_ok: &dyn Fn(VertexId) -> bool,
        acc: &mut Vec<EdgeId>,
    ) -> bool {
        if layer + 1 == route.len() {
            // connect cur (in route[last-1]... cur is in route[layer]) to `to`
            // in the final cluster via one edge
            if let Some(&e) = g
                .incident(cur)
                .iter()
                .find(|&&e| edge_ok(e) && g.other_end(e, cur) == to)
            {
                acc.push(e);
                return true;
            }
            return false;
        }
        let next_cluster = route[layer + 1];
        for &e in g.incident(cur) {
            if !edge_ok(e) {
                continue;
            }
            let w = g.other_end(e, cur);
            if part.cluster_of(w) != Some(next_cluster) {
                continue;
            }
            if w != to && !interior_ok(w) {
                continue;
            }
            if layer + 2 == route.len() && w == to {
                acc.push(e);
                return true;
            }
            if w == to {
                continue;
            }
            acc.push(e);
            if dfs(g, part, route, layer + 1, w, to, edge_ok, interior_ok, acc) {
                return true;
            }
            acc.pop();
        }
        false
    }
    // first hop: from (in route[0]) a path of <= 3 edges within the pair
    // (route[0], route[1]) to some vertex of route[1], then the chain
    let first_pair: BTreeSet<usize> = [route[0], route[1]].into_iter().collect();
    let pair_edge_ok = |e: EdgeId| {
        if !edge_ok(e) {
            return false;
        }
        let (u, v) = g.endpoints(e);
        matches!((part.cluster_of(u), part.cluster_of(v)),
            (Some(c1), Some(c2)) if first_pair.contains(&c1) && first_pair.contains(&c2) && c1 != c2)
    };
    // candidates in route[1] reachable within 3 pair edges
    let mut layer0: Vec<(VertexId, Vec<EdgeId>)> = Vec::new();
    {
        let mut dist: BTreeMap<VertexId, (usize, Vec<EdgeId>)> = BTreeMap::new();
        dist.insert(from, (0, Vec::new()));
        let mut queue = VecDeque::new();
        queue.push_back(from);
        while let Some(v) = queue.pop_front() {
            let (d, path) = dist[&v].clone();
            if d >= 3 {
                continue;
            }
            for &e in g.incident(v) {
                if !pair_edge_ok(e) {
                    continue;
                }
                let w = g.other_end(e, v);
                if dist.contains_key(&w) || (w != to && !interior_ok(w)) {
                    continue;
                }
                let mut np = path.clone();
                np.push(e);
                if part.cluster_of(w) == Some(route[1]) {
                    layer0.push((w, np.clone()));
                }
                dist.insert(w, (d + 1, np));
                queue.push_back(w);
            }
        }
    }
    for (v1, prefix) in layer0 {
        if route.len() == 2 && v1 == to {
            return Some(prefix);
        }
        if v1 == to {
            continue;
        }
        let mut acc = prefix.clone();
        if dfs(g, part, route, 1, v1, to, edge_ok, interior_ok, &mut acc) {
            return Some(acc);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::rat::rat;

    #[test]
    fn short_paths_in_pairs() {
        let p = BipartitePair::complete(6, 6);
        // opposite sides: direct edge
        let w = short_path_in_pair(&p, 0, 6, &BTreeSet::new()).unwrap();
        assert_eq!(w.len(), 1);
        // same side: length 2 via any opposite vertex
        let w = short_path_in_pair(&p, 0, 1, &BTreeSet::new()).unwrap();
        assert_eq!(w.len(), 2);
    }

    #[test]
    fn budget_floors_are_recorded() {
        let b = TieBudget::from_parameters(&rat(1, 1000), &rat(1, 1000), 4);
        assert_eq!(b.link_endpoint_cap, 1);
        assert!(!b.deviations.is_empty());
    }

    fn blowup_with_gamma(seed: u64) -> (MultiGraph, ClusterPartition) {
        gen::blowup_cycle(4, 16, &rat(1, 2), seed).unwrap()
    }

    #[test]
    fn tie_many_merges_to_cluster_cap() {
        let (g, part) = blowup_with_gamma(5);
        // forest: several disjoint single-edge paths ending in cluster 0
        let mut chosen: Vec<Walk> = Vec::new();
        let mut used_vertices: BTreeSet<VertexId> = BTreeSet::new();
        for e in 0..g.m() {
            let (u, v) = g.endpoints(e);
            if part.cluster_of(u) == Some(0)
                && part.cluster_of(v) == Some(1)
                && !used_vertices.contains(&u)
                && !used_vertices.contains(&v)
            {
                chosen.push(Walk::path(vec![e]));
                used_vertices.extend([u, v]);
                if chosen.len() == 6 {
                    break;
                }
            }
        }
        assert_eq!(chosen.len(), 6);
        let original_edges: BTreeSet<EdgeId> =
            chosen.iter().flat_map(|w| w.edges.iter().copied()).collect();
        let mut alive = vec![true; g.m()];
        for &e in &original_edges {
            alive[e] = false; // forest edges are not tying material
        }
        let budget = TieBudget::from_parameters(&rat(1, 4), &rat(1, 2), part.m());
        let mut forests = vec![chosen];
        let beta = rat(9, 10); // cap 2/beta^2 = 2
        let mut counters = TieCounters::default();
        let pass = tie_many(
            &g,
            &part,
            &mut alive,
            &mut forests,
            &budget,
            &beta,
            Some(&mut counters),
        )
        .unwrap();
        let census = endpoint_census(&g, &part, &forests[0]).unwrap();
        for (_, members) in census {
            assert!(members.len() <= cluster_endpoint_cap(&beta));
        }
        // counters match the trace recount exactly
        let recount = pass.trace.recount(&g, &part);
        assert_eq!(recount.endpoint, counters.endpoint);
        assert_eq!(recount.internal, counters.internal);
        // used edges are disjoint from the original forest edges
        for set in &pass.used {
            for e in set {
                assert!(!original_edges.contains(e));
            }
        }
    }

    #[test]
    fn close_single_path_into_cycle() {
        let (g, part) = blowup_with_gamma(7);
        // a single short path with both endpoints in cluster 0's component
        // (the reduced graph is one cycle, so one component)
        let e = (0..g.m())
            .find(|&e| {
                let (u, v) = g.endpoints(e);
                part.cluster_of(u) == Some(0) && part.cluster_of(v) == Some(1)
            })
            .unwrap();
        let mut alive = vec![true; g.m()];
        alive[e] = false;
        let budget = TieBudget::from_parameters(&rat(1, 4), &rat(1, 2), part.m());
        let mut forests = vec![vec![Walk::path(vec![e])]];
        let (cycles, _) =
            close_into_cycles(&g, &part, &mut alive, None, &mut forests, &budget, None).unwrap();
        assert_eq!(cycles.len(), 1);
        assert!(cycles[0].edges.contains(&e));
        cycles[0].trail(&g).unwrap();
    }

    #[test]
    fn cover_empty_leftover() {
        let (g, part) = blowup_with_gamma(9);
        let mut alive = vec![true; g.m()];
        let out = cover_sparse_leftover(
            &g,
            &part,
            &BTreeSet::new(),
            &mut alive,
            &rat(1, 2),
            &rat(1, 2),
            &rat(1, 2),
            &rat(1, 4),
            3,
        )
        .unwrap();
        assert!(out.cycles.is_empty() && out.leftover.is_empty());
    }

    #[test]
    fn matching_tie_closes_one_path() {
        // complete blow-up of a 4-cycle so links always exist
        let k = 4;
        let m = 6;
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
        let mut part = ClusterPartition::new(n, vec![], clusters).unwrap();
        part.recompute_support(&g);
        // one path of length 1 spanning pair (0, 1)
        let e = (0..g.m())
            .find(|&e| {
                let (u, v) = g.endpoints(e);
                part.cluster_of(u) == Some(0) && part.cluster_of(v) == Some(1)
            })
            .unwrap();
        let sets = vec![vec![Walk::path(vec![e])]];
        let cycles = matching_tie_blowup(&g, &part, &sets, &rat(99, 100), &rat(1, 2)).unwrap();
        assert_eq!(cycles.len(), 1);
        let seq = cycles[0].trail(&g).unwrap();
        assert!(seq.len() >= k);
        assert!(matching_tie_blowup(&g, &part, &[], &rat(99, 100), &rat(1, 2))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn odd_k_rejected() {
        let (g, part) = gen::blowup_cycle(3, 6, &rat(1, 2), 3).unwrap();
        assert!(matching_tie_blowup(&g, &part, &[], &rat(1, 2), &rat(1, 2)).is_err());
        let _ = g;
    }
}
