//! Density, ε-regularity, superregularity (dense and sparse), partition-level
//! checks, and the randomized splitting/orientation constructions.
//!
//! Regularity quantifies over exponentially many subset pairs, so testing is
//! exhaustive only up to [`EXHAUSTIVE_CAP`] total vertices; above that a
//! sampled mode tests [`SAMPLE_COUNT`] seeded subset pairs of the minimal
//! qualifying size and reports a probabilistic certificate. All thresholds
//! are exact rationals; fractional powers are rounded up (relaxing, never
//! tightening, a check).

use crate::error::Error;
use crate::graph::{EdgeId, MultiGraph, VertexId};
use crate::rat::{self, Rat};
use crate::rng;
use crate::Result;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use num_traits::{One, Signed, Zero};

/// Exhaustive subset enumeration cap: m_A + m_B at most this.
pub const EXHAUSTIVE_CAP: usize = 24;
/// Subset pairs tested in sampled mode.
pub const SAMPLE_COUNT: usize = 200;
/// Retry budget for every probabilistic construction.
pub const RETRIES: usize = 20;
/// Superregularity sub-checks are vacuous below this side size.
pub const SIZE_FLOOR: usize = 4;

/// A bipartite view: two vertex lists (parent labels) and the edges between
/// them, with cached degrees and an adjacency matrix.
#[derive(Debug, Clone)]
pub struct BipartitePair {
    pub a: Vec<VertexId>,
    pub b: Vec<VertexId>,
    /// (a-index, b-index, parent edge id)
    pub edges: Vec<(usize, usize, EdgeId)>,
    deg_a: Vec<usize>,
    deg_b: Vec<usize>,
    adj: Vec<u32>, // row per a-index, bit per b-index; only for m_b <= 32
    adj_wide: Option<Vec<BTreeSet<usize>>>,
}

impl BipartitePair {
    pub fn new(
        a: Vec<VertexId>,
        b: Vec<VertexId>,
        edges: Vec<(usize, usize, EdgeId)>,
    ) -> Result<Self> {
        let set_a: BTreeSet<_> = a.iter().collect();
        let set_b: BTreeSet<_> = b.iter().collect();
        if set_a.len() != a.len() || set_b.len() != b.len() {
            return Err(Error::invalid("duplicate vertices in a pair side"));
        }
        if set_a.intersection(&set_b).next().is_some() {
            return Err(Error::invalid("pair sides intersect"));
        }
        let mut deg_a = vec![0; a.len()];
        let mut deg_b = vec![0; b.len()];
        let narrow = b.len() <= 32;
        let mut adj = vec![0u32; if narrow { a.len() } else { 0 }];
        let mut adj_wide = if narrow {
            None
        } else {
            Some(vec![BTreeSet::new(); a.len()])
        };
        for &(ai, bi, _) in &edges {
            if ai >= a.len() || bi >= b.len() {
                return Err(Error::invalid("pair edge index out of range"));
            }
            deg_a[ai] += 1;
            deg_b[bi] += 1;
            if narrow {
                if adj[ai] & (1 << bi) != 0 {
                    return Err(Error::invalid("parallel edge inside a pair"));
                }
                adj[ai] |= 1 << bi;
            } else if let Some(w) = adj_wide.as_mut() {
                if !w[ai].insert(bi) {
                    return Err(Error::invalid("parallel edge inside a pair"));
                }
            }
        }
        Ok(BipartitePair {
            a,
            b,
            edges,
            deg_a,
            deg_b,
            adj,
            adj_wide,
        })
    }

    /// All edges of `g` between `a` and `b`.
    pub fn from_graph(g: &MultiGraph, a: &[VertexId], b: &[VertexId]) -> Result<Self> {
        let pos_a: alloc::collections::BTreeMap<VertexId, usize> =
            a.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let pos_b: alloc::collections::BTreeMap<VertexId, usize> =
            b.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut edges = Vec::new();
        for (e, &(u, v)) in g.edge_list().iter().enumerate() {
            if let (Some(&ai), Some(&bi)) = (pos_a.get(&u), pos_b.get(&v)) {
                edges.push((ai, bi, e));
            } else if let (Some(&ai), Some(&bi)) = (pos_a.get(&v), pos_b.get(&u)) {
                edges.push((ai, bi, e));
            }
        }
        Self::new(a.to_vec(), b.to_vec(), edges)
    }

    /// Complete synthetic pair on fresh labels 0..m_a and m_a..m_a+m_b.
    pub fn complete(m_a: usize, m_b: usize) -> Self {
        let a: Vec<usize> = (0..m_a).collect();
        let b: Vec<usize> = (m_a..m_a + m_b).collect();
        let mut edges = Vec::new();
        for ai in 0..m_a {
            for bi in 0..m_b {
                edges.push((ai, bi, ai * m_b + bi));
            }
        }
        Self::new(a, b, edges).unwrap()
    }

    pub fn m_a(&self) -> usize {
        self.a.len()
    }

    pub fn m_b(&self) -> usize {
        self.b.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_balanced(&self) -> bool {
        self.m_a() == self.m_b()
    }

    pub fn deg_a(&self, ai: usize) -> usize {
        self.deg_a[ai]
    }

    pub fn deg_b(&self, bi: usize) -> usize {
        self.deg_b[bi]
    }

    pub fn min_degree(&self) -> usize {
        self.deg_a
            .iter()
            .chain(self.deg_b.iter())
            .copied()
            .min()
            .unwrap_or(0)
    }

    pub fn max_degree(&self) -> usize {
        self.deg_a
            .iter()
            .chain(self.deg_b.iter())
            .copied()
            .max()
            .unwrap_or(0)
    }

    pub fn has_edge(&self, ai: usize, bi: usize) -> bool {
        if let Some(w) = &self.adj_wide {
            w[ai].contains(&bi)
        } else {
            self.adj[ai] & (1 << bi) != 0
        }
    }

    pub fn neighbors_of_a(&self, ai: usize) -> Vec<usize> {
        if let Some(w) = &self.adj_wide {
            w[ai].iter().copied().collect()
        } else {
            (0..self.m_b()).filter(|&bi| self.has_edge(ai, bi)).collect()
        }
    }

    pub fn neighbors_of_b(&self, bi: usize) -> Vec<usize> {
        (0..self.m_a()).filter(|&ai| self.has_edge(ai, bi)).collect()
    }

    pub fn codegree_a(&self, a1: usize, a2: usize) -> usize {
        if let Some(w) = &self.adj_wide {
            w[a1].intersection(&w[a2]).count()
        } else {
            (self.adj[a1] & self.adj[a2]).count_ones() as usize
        }
    }

    pub fn codegree_b(&self, b1: usize, b2: usize) -> usize {
        (0..self.m_a())
            .filter(|&ai| self.has_edge(ai, b1) && self.has_edge(ai, b2))
            .count()
    }

    /// Keeps only the listed edge positions (indices into `self.edges`).
    pub fn with_edges(&self, keep: &[usize]) -> BipartitePair {
        let edges: Vec<(usize, usize, EdgeId)> = keep.iter().map(|&i| self.edges[i]).collect();
        BipartitePair::new(self.a.clone(), self.b.clone(), edges).unwrap()
    }

    /// Induced sub-pair on subsets of side indices; labels are preserved.
    pub fn restrict(&self, asub: &[usize], bsub: &[usize]) -> BipartitePair {
        let amap: alloc::collections::BTreeMap<usize, usize> =
            asub.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let bmap: alloc::collections::BTreeMap<usize, usize> =
            bsub.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let edges: Vec<(usize, usize, EdgeId)> = self
            .edges
            .iter()
            .filter_map(|&(ai, bi, id)| match (amap.get(&ai), bmap.get(&bi)) {
                (Some(&na), Some(&nb)) => Some((na, nb, id)),
                _ => None,
            })
            .collect();
        let a: Vec<VertexId> = asub.iter().map(|&i| self.a[i]).collect();
        let b: Vec<VertexId> = bsub.iter().map(|&i| self.b[i]).collect();
        BipartitePair::new(a, b, edges).unwrap()
    }

    pub fn parent_edge_ids(&self) -> Vec<EdgeId> {
        self.edges.iter().map(|&(_, _, id)| id).collect()
    }
}

/// `density`: e(A,B) / (|A| |B|) as an exact rational.
pub fn density(p: &BipartitePair) -> Result<Rat> {
    if p.m_a() == 0 || p.m_b() == 0 {
        return Err(Error::invalid("density of a pair with an empty side"));
    }
    Ok(rat::ratio_of(p.edge_count(), p.m_a() * p.m_b()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestMode {
    Exhaustive,
    Sampled { seed: u64 },
    /// Exhaustive when within the cap, sampled otherwise.
    Auto { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeUsed {
    Exhaustive,
    Sampled,
    CodegreeCertificate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub a_sub: Vec<VertexId>,
    pub b_sub: Vec<VertexId>,
    pub density: Rat,
}

#[derive(Debug, Clone)]
pub struct RegularityReport {
    pub mode: ModeUsed,
    pub density: Rat,
    pub epsilon: Rat,
    pub regular: bool,
    pub witness: Option<Witness>,
}

/// Smallest qualifying subset size: least q >= eps * m (and >= 1).
fn qualifying_size(eps: &Rat, m: usize) -> usize {
    let target = eps * rat::rat_usize(m);
    let ceil = target.ceil();
    let q = ceil.numer(); // integer after ceil
    let mut q_usize = 0usize;
    let (_, digits) = q.to_u32_digits();
    if let Some(&d) = digits.first() {
        q_usize = d as usize;
    }
    q_usize.max(1).min(m)
}

/// |e' * MA * MB - E * a * b| >= eps * a * b * MA * MB, in integers.
#[allow(clippy::too_many_arguments)]
fn violates(
    e_sub: u64,
    a: u64,
    b: u64,
    e_total: u64,
    ma: u64,
    mb: u64,
    eps_num: &num_bigint::BigInt,
    eps_den: &num_bigint::BigInt,
) -> bool {
    let lhs_raw = i128::from(e_sub) * i128::from(ma) * i128::from(mb)
        - i128::from(e_total) * i128::from(a) * i128::from(b);
    let lhs = num_bigint::BigInt::from(lhs_raw.abs()) * eps_den;
    let rhs = eps_num
        * num_bigint::BigInt::from(a)
        * num_bigint::BigInt::from(b)
        * num_bigint::BigInt::from(ma)
        * num_bigint::BigInt::from(mb);
    lhs >= rhs
}

fn witness_from_masks(p: &BipartitePair, amask: u32, bmask: u32, e_sub: u64) -> Witness {
    let a_sub: Vec<VertexId> = (0..p.m_a())
        .filter(|&i| amask & (1 << i) != 0)
        .map(|i| p.a[i])
        .collect();
    let b_sub: Vec<VertexId> = (0..p.m_b())
        .filter(|&i| bmask & (1 << i) != 0)
        .map(|i| p.b[i])
        .collect();
    let density = rat::ratio_of(e_sub as usize, a_sub.len() * b_sub.len());
    Witness {
        a_sub,
        b_sub,
        density,
    }
}

fn rows_over_a(p: &BipartitePair) -> Vec<u32> {
    (0..p.m_b())
        .map(|bi| {
            let mut row = 0u32;
            for ai in 0..p.m_a() {
                if p.has_edge(ai, bi) {
                    row |= 1 << ai;
                }
            }
            row
        })
        .collect()
}

/// Exhaustive search for a violating subset pair; `None` certifies
/// ε-regularity.
fn exhaustive_violation(p: &BipartitePair, eps: &Rat) -> Option<Witness> {
    let (ma, mb) = (p.m_a(), p.m_b());
    let e_total = p.edge_count() as u64;
    let qa = qualifying_size(eps, ma);
    let qb = qualifying_size(eps, mb);
    let eps_num = eps.numer().clone();
    let eps_den = eps.denom().clone();
    let rows_b = rows_over_a(p);
    for amask in 1u32..(1u32 << ma) {
        let a = amask.count_ones() as u64;
        if (a as usize) < qa {
            continue;
        }
        let deg: Vec<u64> = rows_b
            .iter()
            .map(|row| (row & amask).count_ones() as u64)
            .collect();
        // Gray-code walk over B subsets with an incremental edge sum
        let mut e_sub: u64 = 0;
        let mut prev_gray = 0u32;
        for i in 1u32..(1u32 << mb) {
            let gray = i ^ (i >> 1);
            let changed = gray ^ prev_gray;
            let bi = changed.trailing_zeros() as usize;
            if gray & changed != 0 {
                e_sub += deg[bi];
            } else {
                e_sub -= deg[bi];
            }
            prev_gray = gray;
            let b = gray.count_ones() as u64;
            if (b as usize) < qb {
                continue;
            }
            if violates(e_sub, a, b, e_total, ma as u64, mb as u64, &eps_num, &eps_den) {
                return Some(witness_from_masks(p, amask, gray, e_sub));
            }
        }
    }
    None
}

fn sampled_violation(p: &BipartitePair, eps: &Rat, seed: u64) -> Option<Witness> {
    let (ma, mb) = (p.m_a(), p.m_b());
    let qa = qualifying_size(eps, ma);
    let qb = qualifying_size(eps, mb);
    let e_total = p.edge_count() as u64;
    let eps_num = eps.numer().clone();
    let eps_den = eps.denom().clone();
    let mut rng = rng::substream(seed, 0x5eed_5a3b);
    for _ in 0..SAMPLE_COUNT {
        let asub = rng::sample_distinct(&mut rng, ma, qa);
        let bsub = rng::sample_distinct(&mut rng, mb, qb);
        let mut e_sub = 0u64;
        for &ai in &asub {
            for &bi in &bsub {
                if p.has_edge(ai, bi) {
                    e_sub += 1;
                }
            }
        }
        if violates(
            e_sub,
            qa as u64,
            qb as u64,
            e_total,
            ma as u64,
            mb as u64,
            &eps_num,
            &eps_den,
        ) {
            let density = rat::ratio_of(e_sub as usize, qa * qb);
            return Some(Witness {
                a_sub: asub.iter().map(|&i| p.a[i]).collect(),
                b_sub: bsub.iter().map(|&i| p.b[i]).collect(),
                density,
            });
        }
    }
    None
}

/// `test_regular`: certifies or refutes ε-regularity.
pub fn test_regular(p: &BipartitePair, eps: &Rat, mode: TestMode) -> Result<RegularityReport> {
    if eps <= &Rat::zero() || eps > &Rat::one() {
        return Err(Error::invalid("epsilon must be in (0, 1]"));
    }
    let d = density(p)?;
    let within_cap = p.m_a() + p.m_b() <= EXHAUSTIVE_CAP;
    let (used, witness) = match mode {
        TestMode::Exhaustive => {
            if !within_cap {
                return Err(Error::invalid(format!(
                    "exhaustive regularity testing needs m_A + m_B <= {EXHAUSTIVE_CAP} \
                     (got {}); use sampled mode",
                    p.m_a() + p.m_b()
                )));
            }
            (ModeUsed::Exhaustive, exhaustive_violation(p, eps))
        }
        TestMode::Sampled { seed } => (ModeUsed::Sampled, sampled_violation(p, eps, seed)),
        TestMode::Auto { seed } => {
            if within_cap {
                (ModeUsed::Exhaustive, exhaustive_violation(p, eps))
            } else {
                (ModeUsed::Sampled, sampled_violation(p, eps, seed))
            }
        }
    };
    Ok(RegularityReport {
        mode: used,
        density: d,
        epsilon: eps.clone(),
        regular: witness.is_none(),
        witness,
    })
}

/// `certify_regular_codegree`: degree floor plus two-sided codegree window.
/// A `true` answer implies 2ε^{1/6}-regularity (trivially when that bound
/// reaches 1). Exact, O(m_A^2 m_B).
pub fn certify_regular_codegree(p: &BipartitePair, eps: &Rat) -> Result<bool> {
    if eps <= &Rat::zero() || eps >= &Rat::one() {
        return Err(Error::invalid("epsilon must be in (0, 1)"));
    }
    let d = density(p)?;
    let ma = p.m_a();
    let mb = rat::rat_usize(p.m_b());
    // all but eps*mA vertices of A have degree >= (d - eps) mB
    let floor = (&d - eps) * &mb;
    let low_degree = (0..ma)
        .filter(|&ai| rat::rat_usize(p.deg_a(ai)) < floor)
        .count();
    if rat::rat_usize(low_degree) > eps * rat::rat_usize(ma) {
        return Ok(false);
    }
    // codegree window (d +- eps)^2 mB over ordered pairs
    let hi = rat::pow(&(&d + eps), 2) * &mb;
    let lo = rat::pow(&(&d - eps), 2) * &mb;
    let mut bad_hi = 0usize;
    let mut bad_lo = 0usize;
    for a1 in 0..ma {
        for a2 in 0..ma {
            if a1 == a2 {
                continue;
            }
            let co = rat::rat_usize(p.codegree_a(a1, a2));
            if co >= hi {
                bad_hi += 1;
            }
            if co <= lo {
                bad_lo += 1;
            }
        }
    }
    let cap = eps * rat::rat_usize(ma * ma);
    Ok(rat::rat_usize(bad_hi) <= cap && rat::rat_usize(bad_lo) <= cap)
}

/// Degree window part of [ε, d]-superregularity.
fn degree_window_ok(p: &BipartitePair, eps: &Rat, d: &Rat) -> bool {
    let lo_a = (d - eps) * rat::rat_usize(p.m_b());
    let hi_a = (d + eps) * rat::rat_usize(p.m_b());
    let lo_b = (d - eps) * rat::rat_usize(p.m_a());
    let hi_b = (d + eps) * rat::rat_usize(p.m_a());
    (0..p.m_a()).all(|ai| {
        let deg = rat::rat_usize(p.deg_a(ai));
        deg >= lo_a && deg <= hi_a
    }) && (0..p.m_b()).all(|bi| {
        let deg = rat::rat_usize(p.deg_b(bi));
        deg >= lo_b && deg <= hi_b
    })
}

/// `check_superregular`: ε-regular plus the (d ± ε) degree window on both
/// sides. Vacuously true below the size floor.
pub fn check_superregular(p: &BipartitePair, eps: &Rat, d: &Rat, mode: TestMode) -> Result<bool> {
    if p.m_a() < SIZE_FLOOR || p.m_b() < SIZE_FLOOR {
        return Ok(true);
    }
    if !degree_window_ok(p, eps, d) {
        return Ok(false);
    }
    Ok(test_regular(p, eps, mode)?.regular)
}

/// `[ε, >= d]`-superregularity: superregular at the pair's own density, which
/// must be at least d.
pub fn check_superregular_geq(
    p: &BipartitePair,
    eps: &Rat,
    d: &Rat,
    mode: TestMode,
) -> Result<bool> {
    if p.m_a() < SIZE_FLOOR || p.m_b() < SIZE_FLOOR {
        return Ok(true);
    }
    let dens = density(p)?;
    if &dens < d {
        return Ok(false);
    }
    check_superregular(p, eps, &dens, mode)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SparseFlags {
    pub reg1: bool,
    pub reg2: bool,
    pub reg3: bool,
    pub reg4: bool,
}

impl SparseFlags {
    pub fn all(&self) -> bool {
        self.reg1 && self.reg2 && self.reg3 && self.reg4
    }
}

/// Relative-density check for {ε, d}-regularity: d(A',B') = (1 ± ε) d over
/// qualifying subsets.
fn sparse_reg1(p: &BipartitePair, eps: &Rat, d: &Rat, mode: TestMode) -> Result<bool> {
    let q_a = qualifying_size(eps, p.m_a());
    let q_b = qualifying_size(eps, p.m_b());
    let check = |e_sub: usize, a: usize, b: usize| -> bool {
        let lhs = (rat::ratio_of(e_sub, a * b) - d).abs();
        lhs <= eps * d
    };
    let within_cap = p.m_a() + p.m_b() <= EXHAUSTIVE_CAP;
    let exhaustive = match mode {
        TestMode::Exhaustive => {
            if !within_cap {
                return Err(Error::invalid(
                    "exhaustive sparse Reg1 above the size cap; use sampled mode",
                ));
            }
            true
        }
        TestMode::Auto { .. } => within_cap,
        TestMode::Sampled { .. } => false,
    };
    if exhaustive {
        let rows_b = rows_over_a(p);
        for amask in 1u32..(1u32 << p.m_a()) {
            let a = amask.count_ones() as usize;
            if a < q_a {
                continue;
            }
            let deg: Vec<u64> = rows_b
                .iter()
                .map(|row| (row & amask).count_ones() as u64)
                .collect();
            let mut e_sub = 0u64;
            let mut prev_gray = 0u32;
            for i in 1u32..(1u32 << p.m_b()) {
                let gray = i ^ (i >> 1);
                let changed = gray ^ prev_gray;
                let bi = changed.trailing_zeros() as usize;
                if gray & changed != 0 {
                    e_sub += deg[bi];
                } else {
                    e_sub -= deg[bi];
                }
                prev_gray = gray;
                let b = gray.count_ones() as usize;
                if b < q_b {
                    continue;
                }
                if !check(e_sub as usize, a, b) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    } else {
        let seed = match mode {
            TestMode::Sampled { seed } | TestMode::Auto { seed } => seed,
            TestMode::Exhaustive => 0,
        };
        let mut rng = rng::substream(seed, 0x0f1a_65);
        for _ in 0..SAMPLE_COUNT {
            let asub = rng::sample_distinct(&mut rng, p.m_a(), q_a);
            let bsub = rng::sample_distinct(&mut rng, p.m_b(), q_b);
            let mut e_sub = 0usize;
            for &ai in &asub {
                for &bi in &bsub {
                    if p.has_edge(ai, bi) {
                        e_sub += 1;
                    }
                }
            }
            if !check(e_sub, q_a, q_b) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// `check_sparse_superregular`: the (Reg1)-(Reg4) package. Reg2-Reg4 are
/// exact; Reg1 follows the chosen mode.
pub fn check_sparse_superregular(
    p: &BipartitePair,
    eps: &Rat,
    d: &Rat,
    d_star: &Rat,
    c: &Rat,
    mode: TestMode,
) -> Result<SparseFlags> {
    if !p.is_balanced() {
        return Err(Error::invalid("sparse superregularity needs a balanced pair"));
    }
    let m = rat::rat_usize(p.m_a());
    let reg1 = if d.is_zero() {
        p.edge_count() == 0
    } else {
        sparse_reg1(p, eps, d, mode)?
    };
    let co_cap = rat::pow(c, 2) * &m;
    let mut reg2 = true;
    'co: for x in 0..p.m_a() {
        for y in x + 1..p.m_a() {
            if rat::rat_usize(p.codegree_a(x, y)) > co_cap {
                reg2 = false;
                break 'co;
            }
        }
    }
    if reg2 {
        'co2: for x in 0..p.m_b() {
            for y in x + 1..p.m_b() {
                if rat::rat_usize(p.codegree_b(x, y)) > co_cap {
                    reg2 = false;
                    break 'co2;
                }
            }
        }
    }
    let reg3 = rat::rat_usize(p.max_degree()) <= c * &m;
    let reg4 = rat::rat_usize(p.min_degree()) >= d_star * &m;
    Ok(SparseFlags {
        reg1,
        reg2,
        reg3,
        reg4,
    })
}

/// Per-clause result of a superregular-partition check.
#[derive(Debug, Clone, Default)]
pub struct SrpReport {
    pub violations: Vec<(u8, String)>, // (clause number 1..=6, description)
}

impl SrpReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first(&self) -> Option<&(u8, String)> {
        self.violations.first()
    }
}

/// `check_superregular_partition`: clauses (SRP1)-(SRP6) of an
/// (ε, >= d, k, m, R)-superregular (equalised) partition.
pub fn check_superregular_partition(
    g: &MultiGraph,
    part: &crate::graph::ClusterPartition,
    eps: &Rat,
    d: &Rat,
    equalised: bool,
    mode: TestMode,
) -> Result<SrpReport> {
    let mut report = SrpReport::default();
    let m = part.m();
    // SRP1: equal cluster sizes (guaranteed by construction, still checked)
    if part.clusters.iter().any(|c| c.len() != m) {
        report
            .violations
            .push((1, String::from("cluster sizes differ")));
    }
    // SRP2: |V0| <= eps n
    if rat::rat_usize(part.v0.len()) > eps * rat::rat_usize(g.n()) {
        report
            .violations
            .push((2, format!("|V0| = {} exceeds eps*n", part.v0.len())));
    }
    // SRP3: G[V_i] empty
    'srp3: for (e, &(u, v)) in g.edge_list().iter().enumerate() {
        if let (Some(i), Some(j)) = (part.cluster_of(u), part.cluster_of(v)) {
            if i == j {
                report
                    .violations
                    .push((3, format!("edge {e} lies inside cluster {i}")));
                break 'srp3;
            }
        }
    }
    // SRP4 is definitional here: the reduced graph is derived from g.
    let reduced = part.reduced_edges(g);
    // SRP5 / SRP6 over recomputed support clusters
    let mut support = part.clone();
    support.recompute_support(g);
    let floor = (Rat::one() - eps) * rat::rat_usize(m);
    for &(i, j) in &reduced {
        let vij = support.support.get(&(i, j)).cloned().unwrap_or_default();
        let vji = support.support.get(&(j, i)).cloned().unwrap_or_default();
        if rat::rat_usize(vij.len()) < floor || rat::rat_usize(vji.len()) < floor {
            report
                .violations
                .push((5, format!("support of pair ({i},{j}) below (1-eps)m")));
            continue;
        }
        let pair = BipartitePair::from_graph(g, &vij, &vji)?;
        if !check_superregular_geq(&pair, eps, d, mode)? {
            report
                .violations
                .push((5, format!("pair ({i},{j}) is not [eps, >=d]-superregular")));
        }
        if equalised {
            let target = part.m_prime.unwrap_or(vij.len());
            if vij.len() != target || vji.len() != target {
                report.violations.push((
                    6,
                    format!(
                        "support sizes of pair ({i},{j}) are {}/{}, want {target}",
                        vij.len(),
                        vji.len()
                    ),
                ));
            }
        }
    }
    Ok(report)
}

/// Picks a slice index for one edge: slice i with probability d_i/d, the
/// remainder slot (targets.len()) otherwise.
fn pick_slice(rng: &mut rng::ChaCha8Rng, targets: &[Rat], d: &Rat) -> usize {
    let u: u64 = rand::Rng::gen(rng);
    let point = Rat::new(u.into(), num_bigint::BigInt::from(u128::from(u64::MAX) + 1));
    let mut acc = Rat::zero();
    for (i, t) in targets.iter().enumerate() {
        acc += t / d;
        if point < acc {
            return i;
        }
    }
    targets.len()
}

/// `split_edges`: randomly partitions the edges into slices with target
/// densities plus a remainder slice. Each slice is re-checked (regular or
/// superregular) at the relaxed parameter ε^{1/12}; failed splits retry.
pub fn split_edges(
    p: &BipartitePair,
    targets: &[Rat],
    eps: &Rat,
    superregular: bool,
    seed: u64,
) -> Result<(Vec<BipartitePair>, BipartitePair)> {
    let d = density(p)?;
    let total: Rat = targets.iter().fold(Rat::zero(), |acc, t| acc + t);
    if total > d {
        return Err(Error::invalid("target densities exceed the pair density"));
    }
    if targets.iter().any(|t| t.is_negative() || t.is_zero()) {
        return Err(Error::invalid("target densities must be positive"));
    }
    let eps_relaxed = rat::min(rat::nth_root_upper(eps, 12), Rat::one());
    let exact = total == d;
    for attempt in 0..RETRIES {
        let mut rng = rng::substream(seed, 0xed6e + attempt as u64);
        let assignment: Vec<usize> = (0..p.edge_count())
            .map(|_| pick_slice(&mut rng, targets, &d))
            .collect();
        let mut slices = Vec::new();
        let mut ok = true;
        for (i, target) in targets.iter().enumerate() {
            let keep: Vec<usize> = (0..p.edge_count())
                .filter(|&e| assignment[e] == i)
                .collect();
            let slice = p.with_edges(&keep);
            if p.m_a() >= SIZE_FLOOR && p.m_b() >= SIZE_FLOOR {
                let verdict = if superregular {
                    check_superregular(&slice, &eps_relaxed, target, TestMode::Auto { seed })?
                } else {
                    let dev = (density(&slice)? - target).abs();
                    dev <= eps_relaxed
                        && test_regular(&slice, &eps_relaxed, TestMode::Auto { seed })?.regular
                };
                if !verdict {
                    ok = false;
                    break;
                }
            }
            slices.push(slice);
        }
        if !ok {
            continue;
        }
        let rest: Vec<usize> = (0..p.edge_count())
            .filter(|&e| assignment[e] == targets.len())
            .collect();
        if exact && !rest.is_empty() {
            // exact splits route every edge into a slice; re-draw
            continue;
        }
        let g0 = p.with_edges(&rest);
        return Ok((slices, g0));
    }
    Err(Error::RetriesExhausted {
        op: "split_edges",
        detail: format!("no verified split after {RETRIES} attempts"),
    })
}

#[derive(Debug, Clone)]
pub struct VertexSplit {
    pub a_parts: Vec<Vec<usize>>, // a-indices per part
    pub b_parts: Vec<Vec<usize>>,
}

/// `split_vertices`: random equipartition of both sides into `r` parts, with
/// every cross sub-pair verified superregular at ε^{1/7} and the degree cap
/// (Δ(G) + η m)/r per part.
pub fn split_vertices(
    p: &BipartitePair,
    r: usize,
    eps: &Rat,
    d: &Rat,
    eta: &Rat,
    seed: u64,
) -> Result<VertexSplit> {
    if r == 0 || r > p.m_a() || r > p.m_b() {
        return Err(Error::invalid("part count out of range"));
    }
    if !p.is_balanced() {
        return Err(Error::invalid("split_vertices needs a balanced pair"));
    }
    let m = p.m_a();
    let eps_relaxed = rat::min(rat::nth_root_upper(eps, 7), Rat::one());
    let delta_cap =
        (rat::rat_usize(p.max_degree()) + eta * rat::rat_usize(m)) / rat::rat_usize(r);
    for attempt in 0..RETRIES {
        let mut rng = rng::substream(seed, 0x5b17 + attempt as u64);
        let a_perm = rng::shuffled(&mut rng, m);
        let b_perm = rng::shuffled(&mut rng, m);
        let mut a_parts = vec![Vec::new(); r];
        let mut b_parts = vec![Vec::new(); r];
        for (idx, &ai) in a_perm.iter().enumerate() {
            a_parts[idx % r].push(ai);
        }
        for (idx, &bi) in b_perm.iter().enumerate() {
            b_parts[idx % r].push(bi);
        }
        for part in a_parts.iter_mut().chain(b_parts.iter_mut()) {
            part.sort_unstable();
        }
        let mut ok = true;
        'verify: for i in 0..r {
            for j in 0..r {
                let sub = p.restrict(&a_parts[i], &b_parts[j]);
                if sub.m_a() >= SIZE_FLOOR
                    && sub.m_b() >= SIZE_FLOOR
                    && !check_superregular(&sub, &eps_relaxed, d, TestMode::Auto { seed })?
                {
                    ok = false;
                    break 'verify;
                }
                if rat::rat_usize(sub.max_degree()) > delta_cap {
                    ok = false;
                    break 'verify;
                }
            }
        }
        if ok {
            return Ok(VertexSplit { a_parts, b_parts });
        }
    }
    Err(Error::RetriesExhausted {
        op: "split_vertices",
        detail: format!("no verified vertex split after {RETRIES} attempts"),
    })
}

/// `orient_balanced`: splits a superregular pair into two directed halves,
/// each verified [ε^{1/12}, d/2]-superregular. Returns the parent ids of the
/// edges oriented a->b plus the two halves.
pub fn orient_balanced(
    p: &BipartitePair,
    eps: &Rat,
    d: &Rat,
    seed: u64,
) -> Result<(BTreeSet<EdgeId>, BipartitePair, BipartitePair)> {
    if !p.is_balanced() {
        return Err(Error::invalid("orient_balanced needs a balanced pair"));
    }
    if p.m_a() >= SIZE_FLOOR && !check_superregular(p, eps, d, TestMode::Auto { seed })? {
        return Err(Error::invalid(
            "orient_balanced precondition: pair is not [eps, d]-superregular",
        ));
    }
    if p.m_a() < SIZE_FLOOR {
        // below the floor: deterministic split, checks skipped
        let idx: Vec<usize> = (0..p.edge_count()).filter(|i| i % 2 == 0).collect();
        let rest: Vec<usize> = (0..p.edge_count()).filter(|i| i % 2 == 1).collect();
        let fwd = p.with_edges(&idx);
        let bwd = p.with_edges(&rest);
        let ids = fwd.parent_edge_ids().into_iter().collect();
        return Ok((ids, fwd, bwd));
    }
    let half = d / rat::rat_int(2);
    let (slices, rest) = split_edges(p, &[half.clone(), half], eps, true, seed)?;
    debug_assert!(rest.edge_count() == 0);
    let mut it = slices.into_iter();
    let forward = it.next().unwrap();
    let backward = it.next().unwrap();
    let ids: BTreeSet<EdgeId> = forward.parent_edge_ids().into_iter().collect();
    Ok((ids, forward, backward))
}

/// `sparse_slice`: edge-samples at probability d'/d and verifies the sparse
/// package (ε^{1/12}, d', d'/2, 3d'/(2d)).
pub fn sparse_slice(
    p: &BipartitePair,
    eps: &Rat,
    d: &Rat,
    d_prime: &Rat,
    seed: u64,
) -> Result<BipartitePair> {
    if d_prime > d {
        return Err(Error::invalid("sparse slice target exceeds the density"));
    }
    if d_prime == d {
        return Ok(p.clone());
    }
    let eps_relaxed = rat::min(rat::nth_root_upper(eps, 12), Rat::one());
    let d_star = d_prime / rat::rat_int(2);
    let c = rat::rat_int(3) * d_prime / (rat::rat_int(2) * d);
    let prob = d_prime / d;
    for attempt in 0..RETRIES {
        let mut rng = rng::substream(seed, 0x51ab + attempt as u64);
        let keep: Vec<usize> = (0..p.edge_count())
            .filter(|_| rng::bernoulli(&mut rng, &prob))
            .collect();
        let slice = p.with_edges(&keep);
        let flags = check_sparse_superregular(
            &slice,
            &eps_relaxed,
            d_prime,
            &d_star,
            &c,
            TestMode::Auto { seed },
        )?;
        if flags.all() {
            return Ok(slice);
        }
    }
    Err(Error::RetriesExhausted {
        op: "sparse_slice",
        detail: format!("no verified sparse slice after {RETRIES} attempts"),
    })
}

/// `stability_check_removal`: verifies on the instance that removing at most
/// d'm vertices per class and d'm edges per surviving vertex preserves
/// regularity at (2 sqrt(d'), >= d - 2 sqrt(d')), plus the superregular
/// variant when the hypothesis held.
pub fn stability_check_removal(
    before: &BipartitePair,
    after: &BipartitePair,
    eps: &Rat,
    d_prime: &Rat,
    seed: u64,
) -> Result<bool> {
    let m = rat::rat_usize(before.m_a().max(before.m_b()));
    let budget = d_prime * &m;
    let before_a: BTreeSet<_> = before.a.iter().collect();
    let before_b: BTreeSet<_> = before.b.iter().collect();
    if !after.a.iter().all(|v| before_a.contains(v))
        || !after.b.iter().all(|v| before_b.contains(v))
    {
        return Err(Error::invalid("after is not a sub-pair of before"));
    }
    if rat::rat_usize(before.m_a() - after.m_a()) > budget
        || rat::rat_usize(before.m_b() - after.m_b()) > budget
    {
        return Err(Error::invalid("vertex removal exceeds d'm"));
    }
    let after_ids: BTreeSet<EdgeId> = after.parent_edge_ids().into_iter().collect();
    let surviving_a: BTreeSet<VertexId> = after.a.iter().copied().collect();
    let surviving_b: BTreeSet<VertexId> = after.b.iter().copied().collect();
    let mut removed_at: alloc::collections::BTreeMap<VertexId, usize> =
        alloc::collections::BTreeMap::new();
    for &(ai, bi, id) in &before.edges {
        if after_ids.contains(&id) {
            continue;
        }
        let (va, vb) = (before.a[ai], before.b[bi]);
        if surviving_a.contains(&va) && surviving_b.contains(&vb) {
            *removed_at.entry(va).or_insert(0) += 1;
            *removed_at.entry(vb).or_insert(0) += 1;
        }
    }
    if removed_at.values().any(|&c| rat::rat_usize(c) > budget) {
        return Err(Error::invalid("edge removal at a vertex exceeds d'm"));
    }
    // conclusion at the relaxed parameters
    let relaxed = rat::min(rat::rat_int(2) * rat::sqrt_upper(d_prime), Rat::one());
    if !test_regular(before, eps, TestMode::Auto { seed })?.regular {
        return Ok(true); // hypothesis empty, nothing to assert
    }
    let d_before = density(before)?;
    let after_regular = test_regular(after, &relaxed, TestMode::Auto { seed })?.regular;
    let density_floor = &d_before - &relaxed;
    let regular_part = after_regular && density(after)? >= density_floor;
    if check_superregular(before, eps, &d_before, TestMode::Auto { seed })? {
        let sup_after = check_superregular(after, &relaxed, &d_before, TestMode::Auto { seed })?;
        return Ok(regular_part && sup_after);
    }
    Ok(regular_part)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_int};

    fn matching_pair(m: usize) -> BipartitePair {
        let a: Vec<usize> = (0..m).collect();
        let b: Vec<usize> = (m..2 * m).collect();
        let edges: Vec<(usize, usize, EdgeId)> = (0..m).map(|i| (i, i, i)).collect();
        BipartitePair::new(a, b, edges).unwrap()
    }

    #[test]
    fn density_examples() {
        assert_eq!(density(&BipartitePair::complete(3, 3)).unwrap(), rat_int(1));
        let empty = BipartitePair::new(vec![0, 1, 2], vec![3, 4, 5], vec![]).unwrap();
        assert_eq!(density(&empty).unwrap(), rat_int(0));
        // C6 as a bipartite pair: 3+3 vertices, 6 edges
        let g = MultiGraph::build(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)]).unwrap();
        let p = BipartitePair::from_graph(&g, &[0, 2, 4], &[1, 3, 5]).unwrap();
        assert_eq!(density(&p).unwrap(), rat(2, 3));
        let degenerate = BipartitePair::new(vec![], vec![0], vec![]).unwrap();
        assert!(density(&degenerate).is_err());
    }

    #[test]
    fn complete_pair_is_regular() {
        let p = BipartitePair::complete(6, 6);
        for eps in [rat(1, 10), rat(1, 2), rat_int(1)] {
            let r = test_regular(&p, &eps, TestMode::Exhaustive).unwrap();
            assert!(r.regular);
            assert_eq!(r.density, rat_int(1));
        }
    }

    #[test]
    fn matching_violates_quarter() {
        let p = matching_pair(4);
        let r = test_regular(&p, &rat(1, 4), TestMode::Exhaustive).unwrap();
        assert!(!r.regular);
        let w = r.witness.unwrap();
        assert!(!w.a_sub.is_empty() && !w.b_sub.is_empty());
        // the witness really violates the definition
        assert!((w.density - r.density).abs() >= rat(1, 4));
    }

    #[test]
    fn disjoint_bicliques_violate_half() {
        // K_{2,2} + K_{2,2} viewed as a 4+4 pair
        let a = vec![0, 1, 2, 3];
        let b = vec![4, 5, 6, 7];
        let mut edges = Vec::new();
        let mut id = 0;
        for ai in 0..2 {
            for bi in 0..2 {
                edges.push((ai, bi, id));
                id += 1;
            }
        }
        for ai in 2..4 {
            for bi in 2..4 {
                edges.push((ai, bi, id));
                id += 1;
            }
        }
        let p = BipartitePair::new(a, b, edges).unwrap();
        assert_eq!(density(&p).unwrap(), rat(1, 2));
        let r = test_regular(&p, &rat(1, 2), TestMode::Exhaustive).unwrap();
        assert!(!r.regular);
        assert_eq!(r.witness.unwrap().density, rat_int(1));
    }

    #[test]
    fn exhaustive_cap_enforced() {
        let p = BipartitePair::complete(13, 13);
        assert!(test_regular(&p, &rat(1, 2), TestMode::Exhaustive).is_err());
        let r = test_regular(&p, &rat(1, 2), TestMode::Auto { seed: 1 }).unwrap();
        assert!(r.regular);
        assert_eq!(r.mode, ModeUsed::Sampled);
    }

    #[test]
    fn codegree_examples() {
        let p = BipartitePair::complete(8, 8);
        assert!(certify_regular_codegree(&p, &rat(1, 10)).unwrap());
        let m = matching_pair(8);
        assert!(!certify_regular_codegree(&m, &rat(1, 10)).unwrap());
    }

    #[test]
    fn superregular_examples() {
        let p = BipartitePair::complete(6, 6);
        assert!(check_superregular(&p, &rat(1, 10), &rat_int(1), TestMode::Exhaustive).unwrap());

        // K_{6,6} minus a perfect matching: a 2x2 matched-complement witness
        // deviates by 1/3, so the pair fails at eps = 1/5 and passes at 17/50
        let a: Vec<usize> = (0..6).collect();
        let b: Vec<usize> = (6..12).collect();
        let mut edges = Vec::new();
        let mut id = 0;
        for ai in 0..6 {
            for bi in 0..6 {
                if ai != bi {
                    edges.push((ai, bi, id));
                    id += 1;
                }
            }
        }
        let p = BipartitePair::new(a, b, edges).unwrap();
        assert_eq!(density(&p).unwrap(), rat(5, 6));
        assert!(!check_superregular(&p, &rat(1, 5), &rat(5, 6), TestMode::Exhaustive).unwrap());
        assert!(check_superregular(&p, &rat(17, 50), &rat(5, 6), TestMode::Exhaustive).unwrap());

        // star: one A-vertex of full degree, the rest isolated
        let a: Vec<usize> = (0..6).collect();
        let b: Vec<usize> = (6..12).collect();
        let edges: Vec<(usize, usize, EdgeId)> = (0..6).map(|bi| (0, bi, bi)).collect();
        let star = BipartitePair::new(a, b, edges).unwrap();
        let d = density(&star).unwrap();
        assert!(!check_superregular(&star, &rat(1, 10), &d, TestMode::Exhaustive).unwrap());
    }

    #[test]
    fn sparse_flags_examples() {
        // empty pair with d = 0
        let empty = BipartitePair::new(vec![0, 1, 2, 6], vec![3, 4, 5, 7], vec![]).unwrap();
        let f = check_sparse_superregular(
            &empty,
            &rat(1, 4),
            &rat_int(0),
            &rat(1, 10),
            &rat(1, 2),
            TestMode::Exhaustive,
        )
        .unwrap();
        assert!(f.reg1 && f.reg2 && f.reg3 && !f.reg4);

        // m-edge perfect matching at (d, d*, c) = (1/m, 1/m, 2/m): Reg2-Reg4
        // hold exactly; Reg1 fails (a matched eps-subset pair has relative
        // density far above (1+eps)d)
        let m = 8usize;
        let p = matching_pair(m);
        let f = check_sparse_superregular(
            &p,
            &rat(1, 4),
            &rat(1, m as i64),
            &rat(1, m as i64),
            &rat(2, m as i64),
            TestMode::Exhaustive,
        )
        .unwrap();
        assert!(f.reg2 && f.reg3 && f.reg4);
        assert!(!f.reg1);

        // K_{m,m} with c = 1/2 violates the max-degree cap
        let k = BipartitePair::complete(6, 6);
        let f = check_sparse_superregular(
            &k,
            &rat(1, 4),
            &rat_int(1),
            &rat(1, 2),
            &rat(1, 2),
            TestMode::Exhaustive,
        )
        .unwrap();
        assert!(!f.reg3);

        let unbalanced = BipartitePair::complete(3, 4);
        assert!(check_sparse_superregular(
            &unbalanced,
            &rat(1, 4),
            &rat_int(1),
            &rat(1, 2),
            &rat(1, 2),
            TestMode::Exhaustive
        )
        .is_err());
    }

    #[test]
    fn split_edges_k_mm() {
        let p = BipartitePair::complete(8, 8);
        let (slices, g0) =
            split_edges(&p, &[rat(1, 2), rat(1, 2)], &rat(1, 10), true, 42).unwrap();
        assert_eq!(slices.len(), 2);
        assert_eq!(g0.edge_count(), 0);
        assert_eq!(
            slices[0].edge_count() + slices[1].edge_count(),
            p.edge_count()
        );
        let ids0: BTreeSet<_> = slices[0].parent_edge_ids().into_iter().collect();
        let ids1: BTreeSet<_> = slices[1].parent_edge_ids().into_iter().collect();
        assert!(ids0.is_disjoint(&ids1));

        assert!(split_edges(&p, &[rat(3, 2)], &rat(1, 10), true, 1).is_err());
    }

    #[test]
    fn split_vertices_k_mm() {
        let p = BipartitePair::complete(8, 8);
        let split = split_vertices(&p, 2, &rat(1, 10), &rat_int(1), &rat(1, 2), 7).unwrap();
        assert_eq!(split.a_parts.len(), 2);
        assert_eq!(split.a_parts[0].len() + split.a_parts[1].len(), 8);
        assert!(split_vertices(&p, 9, &rat(1, 10), &rat_int(1), &rat(1, 2), 7).is_err());
    }

    #[test]
    fn orient_balanced_k_mm() {
        let p = BipartitePair::complete(8, 8);
        let (fwd_ids, fwd, bwd) = orient_balanced(&p, &rat(1, 10), &rat_int(1), 3).unwrap();
        assert_eq!(fwd.edge_count() + bwd.edge_count(), 64);
        assert_eq!(fwd_ids.len(), fwd.edge_count());
        let d = density(&fwd).unwrap();
        assert!((d - rat(1, 2)).abs() <= rat(1, 4));

        // single-edge pair: below the size floor, checks skipped
        let tiny = BipartitePair::new(vec![0], vec![1], vec![(0, 0, 0)]).unwrap();
        let (ids, fwd, bwd) = orient_balanced(&tiny, &rat(1, 10), &rat_int(1), 3).unwrap();
        assert_eq!(ids.len() + bwd.edge_count(), 1);
        assert_eq!(fwd.edge_count() + bwd.edge_count(), 1);

        let sparse = matching_pair(8);
        assert!(orient_balanced(&sparse, &rat(1, 10), &rat_int(1), 3).is_err());
    }

    #[test]
    fn sparse_slice_identity_and_reject() {
        let p = BipartitePair::complete(8, 8);
        let s = sparse_slice(&p, &rat(1, 10), &rat_int(1), &rat_int(1), 1).unwrap();
        assert_eq!(s.edge_count(), p.edge_count());
        assert!(sparse_slice(&p, &rat(1, 10), &rat(1, 2), &rat_int(1), 1).is_err());
    }

    #[test]
    fn stability_check() {
        let p = BipartitePair::complete(10, 10);
        let asub: Vec<usize> = (1..10).collect();
        let bsub: Vec<usize> = (1..10).collect();
        let after = p.restrict(&asub, &bsub);
        assert!(stability_check_removal(&p, &after, &rat(1, 10), &rat(1, 5), 5).unwrap());
        // removing too much violates the precondition
        let tiny = p.restrict(&[0, 1, 2], &[0, 1, 2]);
        assert!(stability_check_removal(&p, &tiny, &rat(1, 10), &rat(1, 10), 5).is_err());
    }

    #[test]
    fn subgraph_property_on_certified_pairs() {
        // induced sub-pairs of a certified pair stay regular at eps/eta with
        // density >= d - eps (the subgraph stability lemma, at desk scale)
        let p = BipartitePair::complete(6, 6);
        let eps = rat(1, 3);
        assert!(test_regular(&p, &eps, TestMode::Exhaustive).unwrap().regular);
        let eta = rat(1, 2);
        let sub = p.restrict(&[0, 1, 2], &[3, 4, 5]);
        let sub_eps = rat::min(&eps / &eta, rat_int(1));
        let r = test_regular(&sub, &sub_eps, TestMode::Exhaustive).unwrap();
        assert!(r.regular);
        assert!(density(&sub).unwrap() >= density(&p).unwrap() - &eps);
    }
}
