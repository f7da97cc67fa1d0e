//! Exhaustive-search exact minimum decompositions on tiny graphs.
//!
//! Ground truth for every bound claim in the crate. The search is a
//! memoized dynamic program over the bitset of remaining edge-ids: the part
//! containing the lowest remaining edge is enumerated explicitly (every
//! simple path or cycle through that edge), which canonicalizes the branch
//! order. Capped at 16 edges.

use crate::error::Error;
use crate::graph::{
    verify_decomposition, Decomposition, EdgeId, MultiGraph, VertexId, Walk, WalkKind,
};
use crate::Result;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

pub const DEFAULT_EDGE_CAP: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    PathsAndCycles,
    CyclesOnly,
    PathsOnly,
}

const INFEASIBLE: u8 = u8::MAX;
const UNKNOWN: u8 = u8::MAX - 1;

struct Solver<'a> {
    g: &'a MultiGraph,
    mode: Mode,
    memo: Vec<u8>,    // min parts per mask
    choice: Vec<u32>, // winning walk mask per mask
}

impl<'a> Solver<'a> {
    fn new(g: &'a MultiGraph, mode: Mode) -> Self {
        let size = 1usize << g.m();
        Solver {
            g,
            mode,
            memo: vec![UNKNOWN; size],
            choice: vec![0; size],
        }
    }

    fn odd_vertices(&self, mask: u32) -> usize {
        let mut deg = [0u8; 32];
        for e in 0..self.g.m() {
            if mask & (1 << e) != 0 {
                let (u, v) = self.g.endpoints(e);
                deg[u] += 1;
                deg[v] += 1;
            }
        }
        (0..self.g.n()).filter(|&v| deg[v] % 2 == 1).count()
    }

    fn lower_bound(&self, mask: u32) -> u8 {
        if mask == 0 {
            return 0;
        }
        let odd = self.odd_vertices(mask);
        let m = mask.count_ones() as usize;
        let lb = match self.mode {
            Mode::CyclesOnly => {
                if odd > 0 {
                    return INFEASIBLE;
                }
                m.div_ceil(self.g.n().max(3))
            }
            Mode::PathsOnly => (odd / 2).max(m.div_ceil(self.g.n().saturating_sub(1).max(1))),
            Mode::PathsAndCycles => odd / 2,
        };
        (lb.max(1)).min(u8::MAX as usize - 2) as u8
    }

    /// Every simple path/cycle through the lowest set edge of `mask`,
    /// as (walk-edge-mask, is_cycle), deduplicated.
    fn candidate_walks(&self, mask: u32) -> Vec<(u32, bool)> {
        let pivot = mask.trailing_zeros() as usize;
        let (pu, pv) = self.g.endpoints(pivot);
        let mut cands: BTreeSet<(u32, bool)> = BTreeSet::new();
        let mut seen_states: BTreeSet<(u32, u64)> = BTreeSet::new();
        let start_visited = (1u64 << pu) | (1u64 << pv);
        let mut stack: Vec<(u32, VertexId, VertexId, u64)> =
            vec![(1 << pivot, pu, pv, start_visited)];
        while let Some((wmask, a, b, visited)) = stack.pop() {
            if !seen_states.insert((wmask, ((a as u64) << 32) | b as u64)) {
                continue;
            }
            if self.mode != Mode::CyclesOnly {
                cands.insert((wmask, false));
            }
            for e in 0..self.g.m() {
                let bit = 1u32 << e;
                if mask & bit == 0 || wmask & bit != 0 {
                    continue;
                }
                let (x, y) = self.g.endpoints(e);
                if self.mode != Mode::PathsOnly && ((x == a && y == b) || (x == b && y == a)) {
                    cands.insert((wmask | bit, true));
                }
                // extend from either endpoint to an unvisited vertex
                for (from, other) in [(a, b), (b, a)] {
                    let to = if x == from {
                        y
                    } else if y == from {
                        x
                    } else {
                        continue;
                    };
                    if visited & (1 << to) != 0 {
                        continue;
                    }
                    let (na, nb) = if from == a { (to, other) } else { (other, to) };
                    stack.push((wmask | bit, na, nb, visited | (1 << to)));
                }
            }
        }
        let mut out: Vec<(u32, bool)> = cands.into_iter().collect();
        // prefer long walks so the optimum (and the lower bound) is hit early
        out.sort_by_key(|&(w, _)| core::cmp::Reverse(w.count_ones()));
        out
    }

    fn solve(&mut self, mask: u32) -> u8 {
        if mask == 0 {
            return 0;
        }
        let cached = self.memo[mask as usize];
        if cached != UNKNOWN {
            return cached;
        }
        let lb = self.lower_bound(mask);
        if lb == INFEASIBLE {
            self.memo[mask as usize] = INFEASIBLE;
            return INFEASIBLE;
        }
        let mut best = INFEASIBLE;
        let mut best_walk = 0u32;
        for (wmask, _) in self.candidate_walks(mask) {
            let rest = self.solve(mask & !wmask);
            if rest == INFEASIBLE {
                continue;
            }
            let total = rest.saturating_add(1);
            if total < best {
                best = total;
                best_walk = wmask;
                if best == lb {
                    break;
                }
            }
        }
        self.memo[mask as usize] = best;
        self.choice[mask as usize] = best_walk;
        best
    }

    fn reconstruct(&self, full: u32) -> Vec<Walk> {
        let mut parts = Vec::new();
        let mut mask = full;
        while mask != 0 {
            let wmask = self.choice[mask as usize];
            parts.push(order_walk(self.g, wmask));
            mask &= !wmask;
        }
        parts
    }
}

/// Orders a walk's edge set into a traversal and tags it path or cycle.
fn order_walk(g: &MultiGraph, wmask: u32) -> Walk {
    let edges: Vec<EdgeId> = (0..g.m()).filter(|&e| wmask & (1 << e) != 0).collect();
    let mut deg = [0u8; 32];
    for &e in &edges {
        let (u, v) = g.endpoints(e);
        deg[u] += 1;
        deg[v] += 1;
    }
    let odd: Vec<VertexId> = (0..g.n()).filter(|&v| deg[v] % 2 == 1).collect();
    let kind = if odd.is_empty() {
        WalkKind::Cycle
    } else {
        WalkKind::Path
    };
    let start = if let Some(&s) = odd.first() {
        s
    } else {
        let (u, _) = g.endpoints(edges[0]);
        u
    };
    let mut used = vec![false; edges.len()];
    let mut order = Vec::with_capacity(edges.len());
    let mut cur = start;
    for _ in 0..edges.len() {
        let i = (0..edges.len())
            .find(|&i| {
                if used[i] {
                    return false;
                }
                let (u, v) = g.endpoints(edges[i]);
                u == cur || v == cur
            })
            .expect("walk edge set is a trail");
        used[i] = true;
        cur = g.other_end(edges[i], cur);
        order.push(edges[i]);
    }
    Walk { kind, edges: order }
}

fn check_cap(g: &MultiGraph, cap: usize) -> Result<()> {
    if g.m() > cap.min(31) {
        return Err(Error::invalid(format!(
            "oracle cap exceeded: {} edges > {}",
            g.m(),
            cap.min(31)
        )));
    }
    Ok(())
}

fn run(g: &MultiGraph, mode: Mode) -> (usize, Decomposition) {
    let full = if g.m() == 0 { 0 } else { (1u32 << g.m()) - 1 };
    let mut solver = Solver::new(g, mode);
    let count = solver.solve(full);
    assert!(count != INFEASIBLE, "feasible mode produced no decomposition");
    let d = Decomposition::from_parts(solver.reconstruct(full));
    debug_assert!(verify_decomposition(g, &d).valid);
    (count as usize, d)
}

/// Exact minimum number of parts over all path/cycle decompositions.
pub fn min_path_cycle_count(g: &MultiGraph) -> Result<(usize, Decomposition)> {
    check_cap(g, DEFAULT_EDGE_CAP)?;
    Ok(run(g, Mode::PathsAndCycles))
}

/// Exact minimum cycle-decomposition size of an Eulerian graph.
pub fn min_cycle_count(g: &MultiGraph) -> Result<(usize, Decomposition)> {
    check_cap(g, DEFAULT_EDGE_CAP)?;
    if !g.is_eulerian() {
        return Err(Error::invalid("min_cycle_count requires an Eulerian graph"));
    }
    Ok(run(g, Mode::CyclesOnly))
}

/// Exact minimum path-decomposition size of a connected graph.
pub fn min_path_count(g: &MultiGraph) -> Result<(usize, Decomposition)> {
    check_cap(g, DEFAULT_EDGE_CAP)?;
    let nontrivial = g
        .components()
        .into_iter()
        .filter(|c| c.iter().any(|&v| g.degree(v) > 0));
    if nontrivial.count() > 1 {
        return Err(Error::invalid(
            "min_path_count requires a connected graph (run per component)",
        ));
    }
    Ok(run(g, Mode::PathsOnly))
}

/// All simple graphs on `n` vertices up to isomorphism (n <= 7), each as the
/// lexicographically minimal representative of its class.
pub fn enumerate_simple_graphs(n: usize) -> Vec<MultiGraph> {
    assert!(n <= 7, "enumeration is meant for tiny n");
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect();
    let np = pairs.len();
    let mut pair_index = vec![vec![0usize; n.max(1)]; n.max(1)];
    for (i, &(u, v)) in pairs.iter().enumerate() {
        pair_index[u][v] = i;
        pair_index[v][u] = i;
    }
    let perms = permutations(n);
    let remaps: Vec<Vec<usize>> = perms
        .iter()
        .map(|p| pairs.iter().map(|&(u, v)| pair_index[p[u]][p[v]]).collect())
        .collect();
    let mut out = Vec::new();
    'mask: for mask in 0u32..(1u32 << np) {
        for remap in &remaps {
            let mut image = 0u32;
            for (i, &slot) in remap.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    image |= 1 << slot;
                }
            }
            if image < mask {
                continue 'mask; // not the canonical representative
            }
        }
        let edges: Vec<(usize, usize)> = (0..np)
            .filter(|&i| mask & (1 << i) != 0)
            .map(|i| pairs[i])
            .collect();
        out.push(MultiGraph::build(n, &edges).unwrap());
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..n).collect();
    let k = items.len();
    heap_permute(&mut items, k, &mut out);
    out
}

fn heap_permute(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == 1 {
        out.push(items.clone());
        return;
    }
    for i in 0..k {
        heap_permute(items, k - 1, out);
        if k % 2 == 0 {
            items.swap(i, k - 1);
        } else {
            items.swap(0, k - 1);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_minima() {
        let triangle = MultiGraph::build(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        assert_eq!(min_path_cycle_count(&triangle).unwrap().0, 1);
        assert_eq!(min_cycle_count(&triangle).unwrap().0, 1);
        assert_eq!(min_path_count(&triangle).unwrap().0, 2);

        let k4 = MultiGraph::complete(4);
        assert_eq!(min_path_cycle_count(&k4).unwrap().0, 2);
        assert_eq!(min_path_count(&k4).unwrap().0, 2);

        let k5 = MultiGraph::complete(5);
        assert_eq!(min_path_cycle_count(&k5).unwrap().0, 2);
        assert_eq!(min_cycle_count(&k5).unwrap().0, 2);

        let single = MultiGraph::build(2, &[(0, 1)]).unwrap();
        assert_eq!(min_path_count(&single).unwrap().0, 1);
    }

    #[test]
    fn bowtie_and_c6() {
        let bowtie =
            MultiGraph::build(5, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 2)]).unwrap();
        assert_eq!(min_cycle_count(&bowtie).unwrap().0, 2);
        let c6 = MultiGraph::build(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)]).unwrap();
        assert_eq!(min_cycle_count(&c6).unwrap().0, 1);
    }

    #[test]
    fn witnesses_verify() {
        for g in [
            MultiGraph::complete(4),
            MultiGraph::complete(5),
            MultiGraph::build(5, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4)]).unwrap(),
        ] {
            let (count, d) = min_path_cycle_count(&g).unwrap();
            assert!(verify_decomposition(&g, &d).valid);
            assert_eq!(d.size(), count);
        }
    }

    #[test]
    fn preconditions() {
        let k4 = MultiGraph::complete(4);
        assert!(min_cycle_count(&k4).is_err()); // odd degrees
        let two = MultiGraph::build(4, &[(0, 1), (2, 3)]).unwrap();
        assert!(min_path_count(&two).is_err()); // disconnected
        let k7 = MultiGraph::complete(7); // 21 edges
        assert!(min_path_cycle_count(&k7).is_err());
    }

    #[test]
    fn parallel_edges() {
        let g = MultiGraph::build(2, &[(0, 1), (0, 1)]).unwrap();
        assert_eq!(min_path_cycle_count(&g).unwrap().0, 1); // one 2-cycle
        let g3 = MultiGraph::build(2, &[(0, 1), (0, 1), (0, 1)]).unwrap();
        assert_eq!(min_path_cycle_count(&g3).unwrap().0, 2); // 2-cycle + edge
    }

    #[test]
    fn empty_graph() {
        let g = MultiGraph::build(3, &[]).unwrap();
        let (count, d) = min_path_cycle_count(&g).unwrap();
        assert_eq!(count, 0);
        assert!(verify_decomposition(&g, &d).valid);
    }

    #[test]
    fn enumeration_counts_match_known_values() {
        // simple graphs on n nodes up to isomorphism: 1, 2, 4, 11, 34
        assert_eq!(enumerate_simple_graphs(1).len(), 1);
        assert_eq!(enumerate_simple_graphs(2).len(), 2);
        assert_eq!(enumerate_simple_graphs(3).len(), 4);
        assert_eq!(enumerate_simple_graphs(4).len(), 11);
        assert_eq!(enumerate_simple_graphs(5).len(), 34);
    }
}
