//! Eulerian machinery, elementary path/cycle decomposers, Vizing edge
//! coloring and the even-matching split.

use crate::error::Error;
use crate::graph::{Decomposition, EdgeId, MultiGraph, VertexId, Walk};
use crate::Result;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// Hierholzer circuit over the alive edges reachable from `start`, with the
/// lowest-edge-id successor rule. Consumes the edges it uses.
fn euler_circuit(g: &MultiGraph, alive: &mut [bool], start: VertexId) -> Vec<EdgeId> {
    let mut ptr = vec![0usize; g.n()];
    let mut stack: Vec<(VertexId, Option<EdgeId>)> = vec![(start, None)];
    let mut out = Vec::new();
    while let Some(&(v, via)) = stack.last() {
        let mut next = None;
        while ptr[v] < g.incident(v).len() {
            let e = g.incident(v)[ptr[v]];
            if alive[e] {
                next = Some(e);
                break;
            }
            ptr[v] += 1;
        }
        match next {
            Some(e) => {
                alive[e] = false;
                stack.push((g.other_end(e, v), Some(e)));
            }
            None => {
                stack.pop();
                if let Some(e) = via {
                    out.push(e);
                }
            }
        }
    }
    out.reverse();
    out
}

/// Splits a closed trail (edge sequence from `start`) into edge-disjoint
/// simple cycles, cutting at the first repeated vertex.
fn split_closed_trail(g: &MultiGraph, start: VertexId, trail: &[EdgeId]) -> Vec<Walk> {
    let mut cycles = Vec::new();
    let mut stack_vs: Vec<VertexId> = vec![start];
    let mut stack_es: Vec<EdgeId> = Vec::new();
    let mut pos: BTreeMap<VertexId, usize> = BTreeMap::new();
    pos.insert(start, 0);
    let mut cur = start;
    for &e in trail {
        cur = g.other_end(e, cur);
        stack_es.push(e);
        if let Some(&p) = pos.get(&cur) {
            let cycle_edges: Vec<EdgeId> = stack_es.drain(p..).collect();
            for v in stack_vs.drain(p + 1..) {
                pos.remove(&v);
            }
            cycles.push(Walk::cycle(cycle_edges));
        } else {
            pos.insert(cur, stack_vs.len());
            stack_vs.push(cur);
        }
    }
    debug_assert!(stack_es.is_empty());
    cycles
}

/// `euler_split`: partitions the edges of an Eulerian graph into cycles,
/// one Hierholzer circuit per component.
pub fn euler_split(g: &MultiGraph) -> Result<Vec<Walk>> {
    if !g.is_eulerian() {
        return Err(Error::invalid("euler_split requires all degrees even"));
    }
    let mut alive = vec![true; g.m()];
    let mut cycles = Vec::new();
    for v in 0..g.n() {
        if g.incident(v).iter().any(|&e| alive[e]) {
            let trail = euler_circuit(g, &mut alive, v);
            cycles.extend(split_closed_trail(g, v, &trail));
        }
    }
    Ok(cycles)
}

/// `cycle_through_edge`: a cycle containing `e`, in an Eulerian graph.
pub fn cycle_through_edge(g: &MultiGraph, e: EdgeId) -> Result<Walk> {
    cycle_through_edge_alive(g, &vec![true; g.m()], e)
}

/// As [`cycle_through_edge`] but restricted to the alive edge set, which must
/// induce even degree everywhere.
pub fn cycle_through_edge_alive(g: &MultiGraph, alive: &[bool], e: EdgeId) -> Result<Walk> {
    if e >= g.m() || !alive[e] {
        return Err(Error::invalid("edge not present"));
    }
    let degs = g.degrees_alive(alive);
    if degs.iter().any(|&d| d % 2 == 1) {
        return Err(Error::invalid("cycle_through_edge requires even degrees"));
    }
    // force the circuit to start by crossing e; the splitter then puts e in
    // some cycle of the trail
    let (u, v) = g.endpoints(e);
    let mut alive = alive.to_vec();
    alive[e] = false;
    let mut rest = euler_circuit(g, &mut alive, v);
    let mut trail = vec![e];
    trail.append(&mut rest);
    let cycles = split_closed_trail(g, u, &trail);
    cycles
        .into_iter()
        .find(|c| c.edges.contains(&e))
        .ok_or_else(|| Error::invalid("no cycle through edge (graph inconsistent)"))
}

/// BFS over alive edges; returns the edge-id path between `from` and `to`,
/// or None if disconnected.
fn bfs_path(
    g: &MultiGraph,
    alive: &[bool],
    from: VertexId,
    to: VertexId,
) -> Option<Vec<EdgeId>> {
    let mut prev: Vec<Option<EdgeId>> = vec![None; g.n()];
    let mut seen = vec![false; g.n()];
    seen[from] = true;
    let mut queue = alloc::collections::VecDeque::new();
    queue.push_back(from);
    while let Some(v) = queue.pop_front() {
        if v == to {
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
        for &e in g.incident(v) {
            if !alive[e] {
                continue;
            }
            let w = g.other_end(e, v);
            if !seen[w] {
                seen[w] = true;
                prev[w] = Some(e);
                queue.push_back(w);
            }
        }
    }
    None
}

/// Longest simple alive path between `a` and `b` found by bounded DFS
/// (deterministic edge order, `budget` node expansions). Falls back to the
/// first path completed, so a path is returned whenever one exists.
fn long_path_between(
    g: &MultiGraph,
    alive: &[bool],
    a: VertexId,
    b: VertexId,
    budget: usize,
) -> Option<Vec<EdgeId>> {
    let mut best: Option<Vec<EdgeId>> = None;
    let mut visited = vec![false; g.n()];
    visited[a] = true;
    let mut path: Vec<EdgeId> = Vec::new();
    let mut spent = 0usize;
    fn dfs(
        g: &MultiGraph,
        alive: &[bool],
        cur: VertexId,
        target: VertexId,
        visited: &mut [bool],
        path: &mut Vec<EdgeId>,
        best: &mut Option<Vec<EdgeId>>,
        spent: &mut usize,
        budget: usize,
    ) {
        if *spent > budget {
            return;
        }
        *spent += 1;
        if cur == target {
            if best.as_ref().is_none_or(|b| path.len() > b.len()) {
                *best = Some(path.clone());
            }
            return;
        }
        for &e in g.incident(cur) {
            if !alive[e] {
                continue;
            }
            let w = g.other_end(e, cur);
            if visited[w] {
                continue;
            }
            visited[w] = true;
            path.push(e);
            dfs(g, alive, w, target, visited, path, best, spent, budget);
            path.pop();
            visited[w] = false;
        }
    }
    dfs(g, alive, a, b, &mut visited, &mut path, &mut best, &mut spent, budget);
    best
}

/// `greedy_path_cycle_decomposition`: pairs odd vertices greedily by BFS
/// distance (closest pair first) and removes a longest simple path between
/// them, then Euler-splits the even remainder per component. Path count is
/// exactly odd(g)/2.
pub fn greedy_path_cycle_decomposition(g: &MultiGraph) -> Decomposition {
    let mut alive = vec![true; g.m()];
    let mut parts: Vec<Walk> = Vec::new();
    loop {
        let degs = g.degrees_alive(&alive);
        let odd: Vec<VertexId> = (0..g.n()).filter(|&v| degs[v] % 2 == 1).collect();
        if odd.is_empty() {
            break;
        }
        // closest odd pair over the alive graph
        let mut best: Option<(usize, VertexId, VertexId)> = None;
        for (ai, &a) in odd.iter().enumerate() {
            for &b in &odd[ai + 1..] {
                if let Some(path) = bfs_path(g, &alive, a, b) {
                    if best.as_ref().is_none_or(|&(len, ..)| path.len() < len) {
                        best = Some((path.len(), a, b));
                    }
                }
            }
        }
        let (_, a, b) = best.expect("odd vertices pair up within components");
        let path = long_path_between(g, &alive, a, b, 100_000)
            .expect("pair was BFS-connected");
        for &e in &path {
            alive[e] = false;
        }
        parts.push(Walk::path(path));
    }
    // even remainder: cycles per component
    let (rest, back) = g.restrict_edges(&(0..g.m()).filter(|&e| alive[e]).collect());
    let cycles = euler_split(&rest).expect("remainder is Eulerian");
    for mut c in cycles {
        for e in c.edges.iter_mut() {
            *e = back[*e];
        }
        parts.push(c);
    }
    Decomposition::from_parts(parts)
}

/// Proper edge coloring; color classes are matchings.
#[derive(Debug, Clone)]
pub struct EdgeColoring {
    pub color: Vec<usize>,
    pub palette: usize,
}

impl EdgeColoring {
    pub fn classes(&self) -> Vec<Vec<EdgeId>> {
        let mut out = vec![Vec::new(); self.palette];
        for (e, &c) in self.color.iter().enumerate() {
            out[c].push(e);
        }
        out
    }

    pub fn is_proper(&self, g: &MultiGraph) -> bool {
        for v in 0..g.n() {
            let mut seen = BTreeSet::new();
            for &e in g.incident(v) {
                if !seen.insert(self.color[e]) {
                    return false;
                }
            }
        }
        true
    }
}

struct Palette<'a> {
    g: &'a MultiGraph,
    k: usize,
    color: Vec<Option<usize>>,
    used: Vec<BTreeSet<usize>>,
}

impl<'a> Palette<'a> {
    fn new(g: &'a MultiGraph, k: usize) -> Self {
        Palette {
            g,
            k,
            color: vec![None; g.m()],
            used: vec![BTreeSet::new(); g.n()],
        }
    }

    fn is_free(&self, v: VertexId, c: usize) -> bool {
        !self.used[v].contains(&c)
    }

    fn free_color(&self, v: VertexId) -> usize {
        (0..self.k)
            .find(|c| self.is_free(v, *c))
            .expect("palette k > max degree leaves a free color")
    }

    fn free_colors(&self, v: VertexId) -> Vec<usize> {
        (0..self.k).filter(|&c| self.is_free(v, c)).collect()
    }

    fn set(&mut self, e: EdgeId, c: usize) {
        let (u, v) = self.g.endpoints(e);
        if let Some(old) = self.color[e] {
            self.used[u].remove(&old);
            self.used[v].remove(&old);
        }
        self.color[e] = Some(c);
        self.used[u].insert(c);
        self.used[v].insert(c);
    }

    fn unset(&mut self, e: EdgeId) {
        if let Some(old) = self.color[e] {
            let (u, v) = self.g.endpoints(e);
            self.used[u].remove(&old);
            self.used[v].remove(&old);
            self.color[e] = None;
        }
    }

    /// Maximal alternating (c1, c2) path starting at v with a c1-colored edge.
    fn alternating_path(&self, v: VertexId, c1: usize, c2: usize) -> Vec<EdgeId> {
        let mut path = Vec::new();
        let mut cur = v;
        let mut want = c1;
        loop {
            let next = self.g.incident(cur).iter().copied().find(|&e| {
                self.color[e] == Some(want) && path.last() != Some(&e)
            });
            match next {
                Some(e) => {
                    path.push(e);
                    cur = self.g.other_end(e, cur);
                    want = if want == c1 { c2 } else { c1 };
                }
                None => return path,
            }
        }
    }

    fn flip_path(&mut self, path: &[EdgeId], c1: usize, c2: usize) {
        let flips: Vec<(EdgeId, usize)> = path
            .iter()
            .map(|&e| {
                let old = self.color[e].unwrap();
                (e, if old == c1 { c2 } else { c1 })
            })
            .collect();
        // unset first so simultaneous swaps stay consistent
        for &(e, _) in flips.iter() {
            self.unset(e);
        }
        for (e, c) in flips {
            self.set(e, c);
        }
    }
}

/// Multi-fan at `x` rooted at the uncolored edge `e0`: distinct colored
/// x-edges whose color is free at some earlier fan vertex (parent link).
struct Fan {
    edges: Vec<EdgeId>,
    vertices: Vec<VertexId>,
    parent: Vec<usize>,
}

fn build_fan(p: &Palette<'_>, x: VertexId, e0: EdgeId, y0: VertexId) -> Fan {
    let mut fan = Fan {
        edges: vec![e0],
        vertices: vec![y0],
        parent: vec![0],
    };
    let mut in_fan: BTreeSet<EdgeId> = BTreeSet::new();
    in_fan.insert(e0);
    loop {
        let mut added = false;
        for &f in p.g.incident(x) {
            if in_fan.contains(&f) {
                continue;
            }
            let Some(c) = p.color[f] else { continue };
            if let Some(j) = (0..fan.vertices.len()).find(|&j| p.is_free(fan.vertices[j], c)) {
                let y = p.g.other_end(f, x);
                fan.edges.push(f);
                fan.vertices.push(y);
                fan.parent.push(j);
                in_fan.insert(f);
                added = true;
                break;
            }
        }
        if !added {
            return fan;
        }
    }
}

/// Shifts colors down the justification path ending at fan index `i`, leaving
/// `fan.edges[i]` uncolored, then colors it with `c`.
fn shift_and_color(p: &mut Palette<'_>, fan: &Fan, i: usize, c: usize) {
    let mut path = Vec::new();
    let mut cur = i;
    loop {
        path.push(cur);
        if cur == 0 {
            break;
        }
        cur = fan.parent[cur];
    }
    path.reverse(); // root .. i
    for s in 0..path.len() - 1 {
        let donor = fan.edges[path[s + 1]];
        let receiver = fan.edges[path[s]];
        let color = p.color[donor].unwrap();
        p.unset(donor);
        p.set(receiver, color);
    }
    p.set(fan.edges[i], c);
}

/// Checks that the justification path to `i` is still valid in the current
/// coloring and that `c` is free at the fan vertex.
fn path_valid(p: &Palette<'_>, fan: &Fan, i: usize, c: usize) -> bool {
    if !p.is_free(fan.vertices[i], c) {
        return false;
    }
    let mut cur = i;
    while cur != 0 {
        let parent = fan.parent[cur];
        let col = match p.color[fan.edges[cur]] {
            Some(col) => col,
            None => return false,
        };
        if !p.is_free(fan.vertices[parent], col) {
            return false;
        }
        cur = parent;
    }
    true
}

fn extend_coloring(p: &mut Palette<'_>, e0: EdgeId) -> Result<()> {
    let (x, y0) = p.g.endpoints(e0);
    let limit = 16 + 2 * p.k;
    for _ in 0..limit {
        let fan = build_fan(p, x, e0, y0);
        // common free color at x and some fan vertex
        let mut direct = None;
        'outer: for i in 0..fan.vertices.len() {
            for c in p.free_colors(fan.vertices[i]) {
                if p.is_free(x, c) {
                    direct = Some((i, c));
                    break 'outer;
                }
            }
        }
        if let Some((i, c)) = direct {
            shift_and_color(p, &fan, i, c);
            return Ok(());
        }
        // Misra-Gries step: free c at x, free d at the last fan vertex,
        // invert the maximal (d, c)-path from x, then rotate to a fan vertex
        // where d is now free and the justification path survived.
        let c = p.free_color(x);
        let last = *fan.vertices.last().unwrap();
        let d = p.free_color(last);
        let path = p.alternating_path(x, d, c);
        p.flip_path(&path, d, c);
        let target = (0..fan.vertices.len()).find(|&i| path_valid(p, &fan, i, d));
        if let Some(i) = target {
            shift_and_color(p, &fan, i, d);
            return Ok(());
        }
        // fan broke; flip an (alpha, beta)-chain from a fan vertex whose
        // chain avoids x, making alpha common, and retry with a fresh fan
        let alpha = p.free_color(x);
        let mut progressed = false;
        'flips: for i in 0..fan.vertices.len() {
            let y = fan.vertices[i];
            for beta in p.free_colors(y) {
                let chain = p.alternating_path(y, alpha, beta);
                let mut cur = y;
                for &e in &chain {
                    cur = p.g.other_end(e, cur);
                }
                if cur == x {
                    continue;
                }
                p.flip_path(&chain, alpha, beta);
                progressed = true;
                break 'flips;
            }
        }
        if !progressed {
            // theoretically impossible for a maximal fan with this palette;
            // loop once more with the rebuilt fan before giving up
            continue;
        }
    }
    Err(Error::SearchFailed {
        op: "vizing_color",
        detail: format!("could not extend coloring at edge {e0}"),
    })
}

/// Tries to empty the top color class by local recoloring, shrinking the
/// palette when it succeeds.
fn compact_palette(p: &mut Palette<'_>) {
    loop {
        let top = match p.color.iter().filter_map(|c| *c).max() {
            Some(t) if t > 0 => t,
            _ => return,
        };
        let top_edges: Vec<EdgeId> = (0..p.g.m())
            .filter(|&e| p.color[e] == Some(top))
            .collect();
        let saved: Vec<Option<usize>> = p.color.clone();
        let mut ok = true;
        for e in top_edges {
            let (u, v) = p.g.endpoints(e);
            p.unset(e);
            let direct = (0..top).find(|&c| p.is_free(u, c) && p.is_free(v, c));
            if let Some(c) = direct {
                p.set(e, c);
                continue;
            }
            // one Kempe flip attempt per lower color pair
            let mut placed = false;
            'pairs: for a in 0..top {
                for b in 0..top {
                    if a == b || !p.is_free(u, a) || !p.is_free(v, b) {
                        continue;
                    }
                    let chain = p.alternating_path(u, b, a);
                    let mut cur = u;
                    for &ce in &chain {
                        cur = p.g.other_end(ce, cur);
                    }
                    if cur == v {
                        continue; // flip would move the conflict, not fix it
                    }
                    p.flip_path(&chain, b, a);
                    if p.is_free(u, b) && p.is_free(v, b) {
                        p.set(e, b);
                        placed = true;
                        break 'pairs;
                    }
                    p.flip_path(&chain, b, a); // undo
                }
            }
            if !placed {
                ok = false;
                break;
            }
        }
        if !ok {
            // restore and stop compacting
            let snapshot = saved;
            for e in 0..p.g.m() {
                p.unset(e);
            }
            for (e, c) in snapshot.iter().enumerate() {
                if let Some(c) = c {
                    p.set(e, *c);
                }
            }
            return;
        }
    }
}

/// `vizing_color`: proper edge coloring with at most Delta+1 colors on simple
/// graphs and Delta+mu on multigraphs, by fan recoloring with Kempe flips.
/// Deterministic: edges colored in id order, ties broken by lowest color.
pub fn vizing_color(g: &MultiGraph) -> Result<EdgeColoring> {
    if g.m() == 0 {
        return Ok(EdgeColoring {
            color: Vec::new(),
            palette: 0,
        });
    }
    let stats = g.degree_stats();
    let mu = g.multiplicity();
    let cap = stats.max + mu.max(1);
    let mut p = Palette::new(g, cap);
    for e in 0..g.m() {
        extend_coloring(&mut p, e)?;
    }
    compact_palette(&mut p);
    let color: Vec<usize> = p.color.iter().map(|c| c.unwrap()).collect();
    let palette = color.iter().copied().max().unwrap_or(0) + 1;
    let coloring = EdgeColoring { color, palette };
    debug_assert!(coloring.is_proper(g));
    Ok(coloring)
}

/// Even matchings plus length-2 parts, per the even-matching split.
#[derive(Debug, Clone, Default)]
pub struct MatchingBundle {
    pub even_matchings: Vec<Vec<EdgeId>>,
    pub short_parts: Vec<Walk>,
}

impl MatchingBundle {
    pub fn all_edges(&self) -> BTreeSet<EdgeId> {
        let mut out: BTreeSet<EdgeId> = self
            .even_matchings
            .iter()
            .flat_map(|m| m.iter().copied())
            .collect();
        out.extend(self.short_parts.iter().flat_map(|w| w.edges.iter().copied()));
        out
    }
}

/// Picks vertex-disjoint `e_i` in `mi` and `e_j` in `mj`; both matchings have
/// odd size, at most one of them size 1 (then the other has size >= 3).
pub fn vertex_disjoint_pair_from_odd_classes(
    g: &MultiGraph,
    mi: &[EdgeId],
    mj: &[EdgeId],
) -> Result<(EdgeId, EdgeId)> {
    if mi.len() % 2 == 0 || mj.len() % 2 == 0 {
        return Err(Error::invalid("matchings must have odd size"));
    }
    if mi.len() == 1 && mj.len() == 1 {
        return Err(Error::invalid("at most one matching may have size 1"));
    }
    for &a in mi {
        let (u1, v1) = g.endpoints(a);
        for &b in mj {
            let (u2, v2) = g.endpoints(b);
            if u1 != u2 && u1 != v2 && v1 != u2 && v1 != v2 {
                return Ok((a, b));
            }
        }
    }
    // a size >= 3 matching always has an edge avoiding the two vertices of any
    // single edge, so this is unreachable under the preconditions
    Err(Error::invalid("no vertex-disjoint pair found"))
}

/// `even_matching_decomposition`: decomposes a multigraph with an even number
/// of edges into even-size matchings plus at most ceil((Delta+mu)/2) paths and
/// cycles of length 2.
pub fn even_matching_decomposition(g: &MultiGraph) -> Result<MatchingBundle> {
    if g.m() % 2 == 1 {
        return Err(Error::invalid(
            "even_matching_decomposition requires an even number of edges",
        ));
    }
    let mut bundle = MatchingBundle::default();
    if g.m() == 0 {
        return Ok(bundle);
    }
    let coloring = vizing_color(g)?;
    let classes: Vec<Vec<EdgeId>> = coloring
        .classes()
        .into_iter()
        .filter(|c| !c.is_empty())
        .collect();
    let mut singles: Vec<usize> = Vec::new(); // S: indices with |M_i| = 1
    let mut odd_big: Vec<usize> = Vec::new(); // T: odd size >= 3
    for (i, class) in classes.iter().enumerate() {
        if class.len() == 1 {
            singles.push(i);
        } else if class.len() % 2 == 1 {
            odd_big.push(i);
        } else {
            bundle.even_matchings.push(class.clone());
        }
    }
    if singles.len() % 2 == 1 {
        odd_big.push(singles.pop().unwrap());
    }
    // pair the singletons: shared vertex -> length-2 path, parallel -> 2-cycle,
    // disjoint -> even matching of size 2
    for pair in singles.chunks(2) {
        let e = classes[pair[0]][0];
        let f = classes[pair[1]][0];
        let (u1, v1) = g.endpoints(e);
        let (u2, v2) = g.endpoints(f);
        let key1 = (u1.min(v1), u1.max(v1));
        let key2 = (u2.min(v2), u2.max(v2));
        if key1 == key2 {
            bundle.short_parts.push(Walk::cycle(vec![e, f]));
        } else if u1 == u2 || u1 == v2 || v1 == u2 || v1 == v2 {
            bundle.short_parts.push(Walk::path(vec![e, f]));
        } else {
            bundle.even_matchings.push(vec![e, f]);
        }
    }
    // pair the odd classes, keeping any singleton moved from S with a >= 3
    // partner (sort by size descending so the singleton pairs last)
    odd_big.sort_by_key(|&i| core::cmp::Reverse(classes[i].len()));
    debug_assert!(odd_big.len() % 2 == 0, "|E| even forces evenly many odd classes");
    for pair in odd_big.chunks(2) {
        let (i, j) = (pair[0], pair[1]);
        let (ei, ej) = vertex_disjoint_pair_from_odd_classes(g, &classes[i], &classes[j])?;
        let mi: Vec<EdgeId> = classes[i].iter().copied().filter(|&e| e != ei).collect();
        let mj: Vec<EdgeId> = classes[j].iter().copied().filter(|&e| e != ej).collect();
        if !mi.is_empty() {
            bundle.even_matchings.push(mi);
        }
        if !mj.is_empty() {
            bundle.even_matchings.push(mj);
        }
        bundle.even_matchings.push(vec![ei, ej]);
    }
    Ok(bundle)
}

/// Quick check used by callers that hand walks around: all parts of a bundle
/// are edge-disjoint and together cover E(g).
pub fn bundle_partitions_edges(g: &MultiGraph, b: &MatchingBundle) -> bool {
    let mut count = 0usize;
    for m in &b.even_matchings {
        count += m.len();
    }
    for w in &b.short_parts {
        count += w.edges.len();
    }
    count == g.m() && b.all_edges().len() == g.m()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{verify_decomposition, WalkKind};
    use crate::oracle;

    fn bowtie() -> MultiGraph {
        MultiGraph::build(5, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 2)]).unwrap()
    }

    #[test]
    fn euler_split_examples() {
        let t = MultiGraph::build(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let cycles = euler_split(&t).unwrap();
        assert_eq!(cycles.len(), 1);
        assert_eq!(cycles[0].len(), 3);

        let cycles = euler_split(&bowtie()).unwrap();
        assert_eq!(cycles.len(), 2);

        let k5 = MultiGraph::complete(5);
        let cycles = euler_split(&k5).unwrap();
        assert!(cycles.len() <= 3, "got {}", cycles.len());
        let d = Decomposition::from_parts(cycles);
        assert!(verify_decomposition(&k5, &d).valid);

        assert!(euler_split(&MultiGraph::complete(4)).is_err());
    }

    #[test]
    fn cycle_through_edge_examples() {
        let t = MultiGraph::build(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        for e in 0..3 {
            let c = cycle_through_edge(&t, e).unwrap();
            assert_eq!(c.len(), 3);
        }
        let b = bowtie();
        let c = cycle_through_edge(&b, 0).unwrap();
        assert!(c.edges.contains(&0));
        assert_eq!(c.len(), 3);
        let k5 = MultiGraph::complete(5);
        let c = cycle_through_edge(&k5, 0).unwrap();
        assert!(c.edges.contains(&0));
        c.trail(&k5).unwrap();
        assert!(cycle_through_edge(&MultiGraph::complete(4), 0).is_err());
    }

    #[test]
    fn greedy_examples() {
        let k4 = MultiGraph::complete(4);
        let d = greedy_path_cycle_decomposition(&k4);
        assert!(verify_decomposition(&k4, &d).valid);
        assert_eq!(d.path_count(), 2);
        assert_eq!(d.cycle_count(), 0);
        assert_eq!(d.size(), oracle::min_path_cycle_count(&k4).unwrap().0);

        let k5 = MultiGraph::complete(5);
        let d = greedy_path_cycle_decomposition(&k5);
        assert!(verify_decomposition(&k5, &d).valid);
        assert_eq!(d.path_count(), 0);
        assert!(d.cycle_count() <= 3);

        let empty = MultiGraph::build(4, &[]).unwrap();
        assert_eq!(greedy_path_cycle_decomposition(&empty).size(), 0);
    }

    #[test]
    fn vizing_small_cases() {
        // single matching: one color
        let m = MultiGraph::build(4, &[(0, 1), (2, 3)]).unwrap();
        let c = vizing_color(&m).unwrap();
        assert!(c.is_proper(&m));
        assert_eq!(c.palette, 1);

        // C5 is class 2: needs exactly 3
        let c5 =
            MultiGraph::build(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        let c = vizing_color(&c5).unwrap();
        assert!(c.is_proper(&c5));
        assert_eq!(c.palette, 3);

        // K4 is class 1: 3 colors
        let k4 = MultiGraph::complete(4);
        let c = vizing_color(&k4).unwrap();
        assert!(c.is_proper(&k4));
        assert_eq!(c.palette, 3);
    }

    #[test]
    fn vizing_multigraph_bound() {
        // triple edge plus pendants: Delta = 4, mu = 3
        let g = MultiGraph::build(
            4,
            &[(0, 1), (0, 1), (0, 1), (0, 2), (1, 3)],
        )
        .unwrap();
        let c = vizing_color(&g).unwrap();
        assert!(c.is_proper(&g));
        assert!(c.palette <= 4 + 3);
    }

    #[test]
    fn even_matching_examples() {
        // two disjoint edges: one even matching
        let g = MultiGraph::build(4, &[(0, 1), (2, 3)]).unwrap();
        let b = even_matching_decomposition(&g).unwrap();
        assert_eq!(b.even_matchings.len(), 1);
        assert!(b.short_parts.is_empty());
        assert!(bundle_partitions_edges(&g, &b));

        // path of length 2: one short part, no matchings
        let g = MultiGraph::build(3, &[(0, 1), (1, 2)]).unwrap();
        let b = even_matching_decomposition(&g).unwrap();
        assert!(b.even_matchings.is_empty());
        assert_eq!(b.short_parts.len(), 1);
        assert_eq!(b.short_parts[0].kind, WalkKind::Path);

        // parallel pair: one 2-cycle
        let g = MultiGraph::build(2, &[(0, 1), (0, 1)]).unwrap();
        let b = even_matching_decomposition(&g).unwrap();
        assert_eq!(b.short_parts.len(), 1);
        assert_eq!(b.short_parts[0].kind, WalkKind::Cycle);

        // K4: bounds 3(3+1)/2 = 6 and (3+1)/2 = 2
        let k4 = MultiGraph::complete(4);
        let b = even_matching_decomposition(&k4).unwrap();
        assert!(bundle_partitions_edges(&k4, &b));
        assert!(b.even_matchings.iter().all(|m| m.len() % 2 == 0));
        assert!(b.even_matchings.len() <= 6);
        assert!(b.short_parts.len() <= 2);

        let odd = MultiGraph::build(3, &[(0, 1)]).unwrap();
        assert!(even_matching_decomposition(&odd).is_err());
    }

    #[test]
    fn disjoint_pair_examples() {
        // M_i = {ab}, M_j of size 3: an avoiding edge always exists
        let g = MultiGraph::build(
            8,
            &[(0, 1), (2, 3), (4, 5), (6, 7), (0, 2), (3, 4), (5, 6)],
        )
        .unwrap();
        let (a, b) = vertex_disjoint_pair_from_odd_classes(&g, &[0], &[1, 2, 3]).unwrap();
        assert_eq!(a, 0);
        assert!(b >= 1);
        // M_i = {ab}, M_j = {ac, de, fg}: must avoid the shared vertex
        let (a, b) = vertex_disjoint_pair_from_odd_classes(&g, &[0], &[4, 5, 6]).unwrap();
        assert_eq!(a, 0);
        assert!(b == 5 || b == 6);
        assert!(vertex_disjoint_pair_from_odd_classes(&g, &[0], &[4]).is_err());
    }
}
