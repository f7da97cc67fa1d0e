//! Multigraph representation, walks, decompositions and cluster partitions.
//!
//! Edge identity, not vertex pairs, is the unit of every decomposition:
//! parallel edges are distinguishable and edge-ids are dense in `[0, m)`.

use crate::error::Error;
use crate::Result;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

pub type VertexId = usize;
pub type EdgeId = usize;

/// Integer-vertex multigraph with stable edge identifiers. Loops are rejected;
/// parallel edges are allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiGraph {
    n: usize,
    edges: Vec<(VertexId, VertexId)>,
    adj: Vec<Vec<EdgeId>>,
}

impl MultiGraph {
    /// `build_graph`: edge-ids are assigned densely in input order.
    pub fn build(n: usize, edge_list: &[(VertexId, VertexId)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for (id, &(u, v)) in edge_list.iter().enumerate() {
            if u >= n || v >= n {
                return Err(Error::invalid(format!(
                    "edge {id} = ({u},{v}) has a vertex out of range (n={n})"
                )));
            }
            if u == v {
                return Err(Error::invalid(format!("edge {id} is a loop at {u}")));
            }
            adj[u].push(id);
            adj[v].push(id);
        }
        Ok(MultiGraph {
            n,
            edges: edge_list.to_vec(),
            adj,
        })
    }

    pub fn complete(n: usize) -> Self {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        Self::build(n, &edges).unwrap()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn endpoints(&self, e: EdgeId) -> (VertexId, VertexId) {
        self.edges[e]
    }

    pub fn edge_list(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn other_end(&self, e: EdgeId, v: VertexId) -> VertexId {
        let (a, b) = self.edges[e];
        debug_assert!(a == v || b == v);
        if a == v {
            b
        } else {
            a
        }
    }

    pub fn incident(&self, v: VertexId) -> &[EdgeId] {
        &self.adj[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|v| self.degree(v)).collect()
    }

    /// Maximum multiplicity over vertex pairs (0 for an empty graph).
    pub fn multiplicity(&self) -> usize {
        let mut counts: BTreeMap<(VertexId, VertexId), usize> = BTreeMap::new();
        for &(u, v) in &self.edges {
            let key = (u.min(v), u.max(v));
            *counts.entry(key).or_insert(0) += 1;
        }
        counts.values().copied().max().unwrap_or(0)
    }

    pub fn degree_stats(&self) -> DegreeStats {
        let degs = self.degrees();
        DegreeStats {
            max: degs.iter().copied().max().unwrap_or(0),
            min: degs.iter().copied().min().unwrap_or(0),
            odd: (0..self.n).filter(|&v| degs[v] % 2 == 1).collect(),
        }
    }

    pub fn is_eulerian(&self) -> bool {
        (0..self.n).all(|v| self.degree(v) % 2 == 0)
    }

    /// Per-vertex degree counting only edges with `alive[e]`.
    pub fn degrees_alive(&self, alive: &[bool]) -> Vec<usize> {
        let mut degs = vec![0; self.n];
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            if alive[e] {
                degs[u] += 1;
                degs[v] += 1;
            }
        }
        degs
    }

    /// Connected components over the alive edge set; isolated vertices form
    /// their own components.
    pub fn components_alive(&self, alive: &[bool]) -> Vec<Vec<VertexId>> {
        let mut comp = vec![usize::MAX; self.n];
        let mut out: Vec<Vec<VertexId>> = Vec::new();
        for start in 0..self.n {
            if comp[start] != usize::MAX {
                continue;
            }
            let c = out.len();
            let mut stack = vec![start];
            comp[start] = c;
            let mut members = vec![start];
            while let Some(v) = stack.pop() {
                for &e in &self.adj[v] {
                    if !alive[e] {
                        continue;
                    }
                    let w = self.other_end(e, v);
                    if comp[w] == usize::MAX {
                        comp[w] = c;
                        members.push(w);
                        stack.push(w);
                    }
                }
            }
            out.push(members);
        }
        out
    }

    pub fn components(&self) -> Vec<Vec<VertexId>> {
        self.components_alive(&vec![true; self.m()])
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// New graph keeping exactly the given edges; vertex set unchanged.
    /// Returns the subgraph and the map from new edge-ids to old ones.
    pub fn restrict_edges(&self, keep: &BTreeSet<EdgeId>) -> (MultiGraph, Vec<EdgeId>) {
        let mut edges = Vec::with_capacity(keep.len());
        let mut back = Vec::with_capacity(keep.len());
        for &e in keep {
            edges.push(self.edges[e]);
            back.push(e);
        }
        (MultiGraph::build(self.n, &edges).unwrap(), back)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeStats {
    pub max: usize,
    pub min: usize,
    pub odd: Vec<VertexId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WalkKind {
    Path,
    Cycle,
}

/// An edge-id walk tagged as a (simple) path or cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Walk {
    pub kind: WalkKind,
    pub edges: Vec<EdgeId>,
}

impl Walk {
    pub fn path(edges: Vec<EdgeId>) -> Self {
        Walk {
            kind: WalkKind::Path,
            edges,
        }
    }

    pub fn cycle(edges: Vec<EdgeId>) -> Self {
        Walk {
            kind: WalkKind::Cycle,
            edges,
        }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Validates the walk against `g` and returns its vertex sequence.
    ///
    /// For a path of length L the sequence has L+1 vertices; for a cycle it
    /// has L vertices (the closing edge returns to the first). Walks must be
    /// vertex-simple; the length-2 cycle on a parallel pair is allowed.
    pub fn trail(&self, g: &MultiGraph) -> Result<Vec<VertexId>> {
        if self.edges.is_empty() {
            return Err(Error::invalid("empty walk"));
        }
        let mut seen = BTreeSet::new();
        for &e in &self.edges {
            if e >= g.m() {
                return Err(Error::invalid(format!("edge id {e} out of range")));
            }
            if !seen.insert(e) {
                return Err(Error::invalid(format!("edge id {e} repeated in walk")));
            }
        }
        // walk-local degrees
        let mut deg: BTreeMap<VertexId, usize> = BTreeMap::new();
        for &e in &self.edges {
            let (u, v) = g.endpoints(e);
            *deg.entry(u).or_insert(0) += 1;
            *deg.entry(v).or_insert(0) += 1;
        }
        let odd: Vec<VertexId> = deg
            .iter()
            .filter(|(_, &d)| d % 2 == 1)
            .map(|(&v, _)| v)
            .collect();
        if deg.values().any(|&d| d > 2) {
            return Err(Error::invalid("walk revisits a vertex"));
        }
        let start = match self.kind {
            WalkKind::Path => {
                if odd.len() != 2 {
                    return Err(Error::invalid("path does not have two endpoints"));
                }
                odd[0]
            }
            WalkKind::Cycle => {
                if !odd.is_empty() {
                    return Err(Error::invalid("cycle does not close"));
                }
                *deg.keys().next().unwrap()
            }
        };
        // follow the trail; simplicity means at most one unused edge onward
        let mut used = vec![false; self.edges.len()];
        let mut local: BTreeMap<VertexId, Vec<usize>> = BTreeMap::new();
        for (i, &e) in self.edges.iter().enumerate() {
            let (u, v) = g.endpoints(e);
            local.entry(u).or_default().push(i);
            local.entry(v).or_default().push(i);
        }
        let mut seq = vec![start];
        let mut cur = start;
        for _ in 0..self.edges.len() {
            let next = local[&cur].iter().copied().find(|&i| !used[i]);
            let Some(i) = next else {
                return Err(Error::invalid("walk is disconnected"));
            };
            used[i] = true;
            cur = g.other_end(self.edges[i], cur);
            seq.push(cur);
        }
        if used.iter().any(|&u| !u) {
            return Err(Error::invalid("walk is disconnected"));
        }
        match self.kind {
            WalkKind::Path => {
                if seq[0] == *seq.last().unwrap() {
                    return Err(Error::invalid("path closes into a cycle"));
                }
            }
            WalkKind::Cycle => {
                if seq[0] != *seq.last().unwrap() {
                    return Err(Error::invalid("cycle does not return to start"));
                }
                seq.pop();
            }
        }
        Ok(seq)
    }

    /// Path endpoints (first, last); errors on cycles or invalid walks.
    pub fn path_endpoints(&self, g: &MultiGraph) -> Result<(VertexId, VertexId)> {
        if self.kind != WalkKind::Path {
            return Err(Error::invalid("not a path"));
        }
        let seq = self.trail(g)?;
        Ok((seq[0], *seq.last().unwrap()))
    }
}

/// Ordered walks plus an explicit leftover edge set; the unit of every output.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Decomposition {
    pub parts: Vec<Walk>,
    pub leftover: BTreeSet<EdgeId>,
}

impl Decomposition {
    pub fn from_parts(parts: Vec<Walk>) -> Self {
        Decomposition {
            parts,
            leftover: BTreeSet::new(),
        }
    }

    pub fn path_count(&self) -> usize {
        self.parts
            .iter()
            .filter(|w| w.kind == WalkKind::Path)
            .count()
    }

    pub fn cycle_count(&self) -> usize {
        self.parts
            .iter()
            .filter(|w| w.kind == WalkKind::Cycle)
            .count()
    }

    pub fn size(&self) -> usize {
        self.parts.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub valid: bool,
    pub paths: usize,
    pub cycles: usize,
    pub leftover: usize,
    pub first_violation: Option<String>,
}

/// `verify_decomposition`: checks each walk and that parts plus leftover
/// partition the edge-id set of `g`. Violations are reported, not thrown.
pub fn verify_decomposition(g: &MultiGraph, d: &Decomposition) -> VerifyReport {
    let mut report = VerifyReport {
        valid: true,
        paths: d.path_count(),
        cycles: d.cycle_count(),
        leftover: d.leftover.len(),
        first_violation: None,
    };
    let fail = |report: &mut VerifyReport, msg: String| {
        if report.valid {
            report.valid = false;
            report.first_violation = Some(msg);
        }
    };
    let mut covered = vec![false; g.m()];
    for (i, walk) in d.parts.iter().enumerate() {
        if let Err(e) = walk.trail(g) {
            fail(&mut report, format!("part {i}: {e}"));
            return report;
        }
        for &e in &walk.edges {
            if covered[e] {
                fail(&mut report, format!("edge {e} used twice"));
                return report;
            }
            covered[e] = true;
        }
    }
    for &e in &d.leftover {
        if e >= g.m() {
            fail(&mut report, format!("leftover edge {e} out of range"));
            return report;
        }
        if covered[e] {
            fail(&mut report, format!("leftover edge {e} also in a part"));
            return report;
        }
        covered[e] = true;
    }
    if let Some(e) = covered.iter().position(|&c| !c) {
        fail(&mut report, format!("edge {e} not covered"));
    }
    report
}

/// Set of vertex-disjoint paths.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinearForest {
    pub paths: Vec<Walk>,
}

impl LinearForest {
    pub fn new(paths: Vec<Walk>) -> Self {
        LinearForest { paths }
    }

    pub fn validate(&self, g: &MultiGraph) -> Result<()> {
        let mut seen: BTreeSet<VertexId> = BTreeSet::new();
        for (i, p) in self.paths.iter().enumerate() {
            if p.kind != WalkKind::Path {
                return Err(Error::invalid(format!("forest part {i} is not a path")));
            }
            for v in p.trail(g)? {
                if !seen.insert(v) {
                    return Err(Error::invalid(format!(
                        "forest paths share vertex {v} (part {i})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn edge_ids(&self) -> BTreeSet<EdgeId> {
        self.paths
            .iter()
            .flat_map(|p| p.edges.iter().copied())
            .collect()
    }
}

/// Exceptional set plus k equal-size clusters, with per-pair support clusters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterPartition {
    pub v0: Vec<VertexId>,
    pub clusters: Vec<Vec<VertexId>>,
    /// `(i, j) -> V_{ij}`, vertices of cluster i with a neighbour in cluster j.
    pub support: BTreeMap<(usize, usize), Vec<VertexId>>,
    /// Common support size when equalised.
    pub m_prime: Option<usize>,
    cluster_of: Vec<Option<usize>>,
}

impl ClusterPartition {
    pub fn new(n: usize, v0: Vec<VertexId>, clusters: Vec<Vec<VertexId>>) -> Result<Self> {
        let mut cluster_of = vec![None; n];
        let mut count = 0usize;
        for &v in &v0 {
            if v >= n {
                return Err(Error::invalid("V0 vertex out of range"));
            }
            count += 1;
        }
        let m = clusters.first().map(|c| c.len()).unwrap_or(0);
        for (i, cluster) in clusters.iter().enumerate() {
            if cluster.len() != m {
                return Err(Error::invalid("clusters are not of equal size"));
            }
            for &v in cluster {
                if v >= n {
                    return Err(Error::invalid("cluster vertex out of range"));
                }
                if cluster_of[v].is_some() {
                    return Err(Error::invalid(format!("vertex {v} in two clusters")));
                }
                cluster_of[v] = Some(i);
                count += 1;
            }
        }
        for &v in &v0 {
            if cluster_of[v].is_some() {
                return Err(Error::invalid(format!("vertex {v} in V0 and a cluster")));
            }
        }
        if count != n {
            return Err(Error::invalid("V0 and clusters do not partition [0, n)"));
        }
        Ok(ClusterPartition {
            v0,
            clusters,
            support: BTreeMap::new(),
            m_prime: None,
            cluster_of,
        })
    }

    pub fn k(&self) -> usize {
        self.clusters.len()
    }

    pub fn m(&self) -> usize {
        self.clusters.first().map(|c| c.len()).unwrap_or(0)
    }

    pub fn cluster_of(&self, v: VertexId) -> Option<usize> {
        self.cluster_of[v]
    }

    /// Support clusters are recomputed from the graph, never trusted from
    /// input; callers that must freeze them simply skip this call.
    pub fn recompute_support(&mut self, g: &MultiGraph) {
        self.support.clear();
        let k = self.k();
        for i in 0..k {
            for j in 0..k {
                if i == j {
                    continue;
                }
                let mut vij: Vec<VertexId> = Vec::new();
                for &x in &self.clusters[i] {
                    let has = g
                        .incident(x)
                        .iter()
                        .any(|&e| self.cluster_of(g.other_end(e, x)) == Some(j));
                    if has {
                        vij.push(x);
                    }
                }
                if !vij.is_empty() {
                    self.support.insert((i, j), vij);
                }
            }
        }
    }

    /// Reduced-graph edges: cluster pairs with at least one edge between them.
    pub fn reduced_edges(&self, g: &MultiGraph) -> BTreeSet<(usize, usize)> {
        let mut out = BTreeSet::new();
        for &(u, v) in g.edge_list() {
            if let (Some(i), Some(j)) = (self.cluster_of(u), self.cluster_of(v)) {
                if i != j {
                    out.insert((i.min(j), i.max(j)));
                }
            }
        }
        out
    }

    /// Components of the reduced graph, as sorted lists of cluster indices.
    pub fn reduced_components(&self, g: &MultiGraph) -> Vec<Vec<usize>> {
        self.components_from_edges(self.reduced_edges(g))
    }

    /// Reduced components counting only alive edges.
    pub fn reduced_components_restricted(&self, g: &MultiGraph, alive: &[bool]) -> Vec<Vec<usize>> {
        let mut edges = BTreeSet::new();
        for (e, &(u, v)) in g.edge_list().iter().enumerate() {
            if !alive[e] {
                continue;
            }
            if let (Some(i), Some(j)) = (self.cluster_of(u), self.cluster_of(v)) {
                if i != j {
                    edges.insert((i.min(j), i.max(j)));
                }
            }
        }
        self.components_from_edges(edges)
    }

    fn components_from_edges(&self, edges: BTreeSet<(usize, usize)>) -> Vec<Vec<usize>> {
        let k = self.k();
        let mut comp = vec![usize::MAX; k];
        let mut adj = vec![Vec::new(); k];
        for &(i, j) in &edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        let mut out = Vec::new();
        for s in 0..k {
            if comp[s] != usize::MAX {
                continue;
            }
            let c = out.len();
            let mut stack = vec![s];
            comp[s] = c;
            let mut members = vec![s];
            while let Some(v) = stack.pop() {
                for &w in &adj[v] {
                    if comp[w] == usize::MAX {
                        comp[w] = c;
                        members.push(w);
                        stack.push(w);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }
}

/// Direction per edge-id: true means u -> v as stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orientation {
    pub forward: Vec<bool>,
}

impl Orientation {
    pub fn head(&self, g: &MultiGraph, e: EdgeId) -> VertexId {
        let (u, v) = g.endpoints(e);
        if self.forward[e] {
            v
        } else {
            u
        }
    }

    pub fn tail(&self, g: &MultiGraph, e: EdgeId) -> VertexId {
        let (u, v) = g.endpoints(e);
        if self.forward[e] {
            u
        } else {
            v
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> MultiGraph {
        MultiGraph::build(3, &[(0, 1), (1, 2), (2, 0)]).unwrap()
    }

    #[test]
    fn build_examples() {
        let t = triangle();
        assert_eq!(t.m(), 3);
        let par = MultiGraph::build(2, &[(0, 1), (0, 1)]).unwrap();
        assert_eq!(par.multiplicity(), 2);
        let k4 = MultiGraph::complete(4);
        assert_eq!(k4.m(), 6);
        assert_eq!(k4.degree_stats().max, 3);
        assert!(MultiGraph::build(3, &[(0, 0)]).is_err());
        assert!(MultiGraph::build(3, &[(0, 3)]).is_err());
    }

    #[test]
    fn degree_stats_examples() {
        let t = triangle().degree_stats();
        assert_eq!((t.max, t.min), (2, 2));
        assert!(t.odd.is_empty());
        let k4 = MultiGraph::complete(4).degree_stats();
        assert_eq!((k4.max, k4.min), (3, 3));
        assert_eq!(k4.odd, vec![0, 1, 2, 3]);
        let k5 = MultiGraph::complete(5);
        let s = k5.degree_stats();
        assert_eq!((s.max, s.min), (4, 4));
        assert!(k5.is_eulerian());
    }

    #[test]
    fn verify_triangle_cycle() {
        let t = triangle();
        let d = Decomposition::from_parts(vec![Walk::cycle(vec![0, 1, 2])]);
        let r = verify_decomposition(&t, &d);
        assert!(r.valid, "{:?}", r.first_violation);
        assert_eq!((r.paths, r.cycles), (0, 1));
    }

    #[test]
    fn verify_k4_two_hamilton_paths() {
        // K4 edge ids: 01=0, 02=1, 03=2, 12=3, 13=4, 23=5
        let k4 = MultiGraph::complete(4);
        let d = Decomposition::from_parts(vec![
            Walk::path(vec![0, 3, 5]), // 0-1-2-3
            Walk::path(vec![4, 2, 1]), // 1-3-0-2
        ]);
        let r = verify_decomposition(&k4, &d);
        assert!(r.valid, "{:?}", r.first_violation);
        assert_eq!(r.paths, 2);
    }

    #[test]
    fn verify_rejects_reuse() {
        let t = triangle();
        let d = Decomposition::from_parts(vec![Walk::path(vec![0]), Walk::path(vec![0])]);
        let r = verify_decomposition(&t, &d);
        assert!(!r.valid);
    }

    #[test]
    fn verify_rejects_uncovered() {
        let t = triangle();
        let d = Decomposition::from_parts(vec![Walk::path(vec![0, 1])]);
        assert!(!verify_decomposition(&t, &d).valid);
        let mut with_leftover = d;
        with_leftover.leftover.insert(2);
        assert!(verify_decomposition(&t, &with_leftover).valid);
    }

    #[test]
    fn parallel_two_cycle_is_a_valid_cycle() {
        let g = MultiGraph::build(2, &[(0, 1), (0, 1)]).unwrap();
        let d = Decomposition::from_parts(vec![Walk::cycle(vec![0, 1])]);
        assert!(verify_decomposition(&g, &d).valid);
    }

    #[test]
    fn walk_trail_shapes() {
        let t = triangle();
        assert!(Walk::path(vec![0, 1, 2]).trail(&t).is_err()); // closes
        assert_eq!(Walk::path(vec![0, 1]).trail(&t).unwrap().len(), 3);
        assert_eq!(Walk::cycle(vec![0, 1, 2]).trail(&t).unwrap().len(), 3);
        // disconnected edge pair is not a walk
        let g = MultiGraph::build(4, &[(0, 1), (2, 3)]).unwrap();
        assert!(Walk::path(vec![0, 1]).trail(&g).is_err());
    }

    #[test]
    fn partition_validation() {
        let part = ClusterPartition::new(6, vec![0], vec![vec![1, 2], vec![3, 4], vec![5]]);
        assert!(part.is_err()); // unequal sizes
        let part = ClusterPartition::new(5, vec![0], vec![vec![1, 2], vec![3, 4]]).unwrap();
        assert_eq!(part.cluster_of(3), Some(1));
        assert_eq!(part.cluster_of(0), None);
    }

    #[test]
    fn support_recompute() {
        // blow-up of one edge by a perfect matching
        let g = MultiGraph::build(5, &[(1, 3), (2, 4)]).unwrap();
        let mut part = ClusterPartition::new(5, vec![0], vec![vec![1, 2], vec![3, 4]]).unwrap();
        part.recompute_support(&g);
        assert_eq!(part.support[&(0, 1)], vec![1, 2]);
        assert_eq!(part.support[&(1, 0)], vec![3, 4]);
        assert_eq!(part.reduced_edges(&g).len(), 1);
    }

    #[test]
    fn edge_multiset_round_trip() {
        let edges = vec![(0, 1), (1, 2), (0, 1), (3, 4), (2, 3)];
        let g = MultiGraph::build(5, &edges).unwrap();
        assert_eq!(g.edge_list(), &edges[..]);
    }
}
