use decomp_core::gen;
use decomp_core::graph::{verify_decomposition, Decomposition, EdgeId, Walk};
use decomp_core::rat::rat;
use decomp_core::regularise::{self, OddityLedger};
use std::collections::BTreeSet;

#[test]
fn eulerianise_pairs_clears_injected_defects() {
    let mut successes = 0;
    for seed in 0..10u64 {
        let (g, part) = gen::blowup_cycle_with_defects(4, 24, &rat(1, 2), seed).unwrap();
        assert!(g.is_eulerian());
        let budget = regularise::eulerianise_budget(&rat(1, 2), 4);
        match regularise::eulerianise_pairs(&g, &part, &rat(1, 2), &rat(1, 3)) {
            Ok(out) => {
                // final oddity is exactly zero
                let alive: Vec<bool> = (0..g.m()).map(|e| out.remaining.contains(&e)).collect();
                let ledger = OddityLedger::new(&g, &alive, &part);
                assert_eq!(ledger.positive(), 0, "seed {seed}: oddity must vanish");
                // removed cycles are edge-disjoint valid walks partitioning
                // g minus remaining
                let mut seen: BTreeSet<EdgeId> = BTreeSet::new();
                for c in &out.removed {
                    c.trail(&g).expect("removed cycles are valid");
                    for &e in &c.edges {
                        assert!(seen.insert(e), "cycles overlap at edge {e}");
                    }
                }
                assert_eq!(seen.len() + out.remaining.len(), g.m());
                assert!(
                    out.removed.len() <= budget,
                    "seed {seed}: {} cycles exceeds c(d,k) = {budget}",
                    out.removed.len()
                );
                successes += 1;
            }
            Err(e) => {
                eprintln!("seed {seed}: explicit failure: {e}");
            }
        }
    }
    assert!(successes >= 8, "only {successes}/10 runs succeeded");
}

#[test]
fn regularise_pair_restores_regularity() {
    let mut successes = 0;
    for seed in 0..10u64 {
        let p = gen::near_regular_pair(12, 6, 2, seed).unwrap();
        let delta = p.max_degree();
        let theta = delta - p.min_degree();
        match regularise::regularise_pair(&p, &rat(1, 2), seed) {
            Ok(out) => {
                assert_eq!(out.kept.max_degree(), out.kept.min_degree());
                assert!(out.r_final >= delta.saturating_sub(4 * theta));
                assert!(out.removed.len() <= 2 * theta);
                for c in &out.removed {
                    assert!(3 * c.len() >= 2 * 12, "cycle shorter than 2m/3");
                }
                successes += 1;
            }
            Err(e) => eprintln!("seed {seed}: explicit failure: {e}"),
        }
    }
    assert!(successes >= 8, "only {successes}/10 runs succeeded");
}

#[test]
fn eulerianise_then_cycles_covers_k6() {
    let k6 = gen::k_complete(6);
    let (removed, _) = regularise::eulerianise_graph(&k6, &rat(1, 2)).unwrap();
    let removed_ids: BTreeSet<EdgeId> = removed.iter().flat_map(|w| w.edges.iter().copied()).collect();
    let keep: BTreeSet<EdgeId> = (0..k6.m()).filter(|e| !removed_ids.contains(e)).collect();
    let (rest, back) = k6.restrict_edges(&keep);
    let cycles = decomp_core::basic::euler_split(&rest).unwrap();
    let mut parts: Vec<Walk> = removed;
    for mut c in cycles {
        for e in c.edges.iter_mut() {
            *e = back[*e];
        }
        parts.push(c);
    }
    let d = Decomposition::from_parts(parts);
    assert!(verify_decomposition(&k6, &d).valid);
}

#[test]
fn approx_decompose_blowup_end_to_end() {
    // k = 4, m = 12, dm = 6 (d = 1/2), r = 1: h = 4 Hamilton cycles plus a
    // per-pair 2-regular leftover
    let mut ok = false;
    for seed in 0..8u64 {
        let (g, part) = gen::blowup_cycle(4, 12, &rat(1, 2), 100 + seed).unwrap();
        match decomp_core::hamdecomp::approx_decompose_blowup(&g, &part, 1, &rat(1, 2), seed) {
            Ok(out) => {
                assert_eq!(out.cycles.len(), 4);
                let mut covered: BTreeSet<EdgeId> = BTreeSet::new();
                for c in &out.cycles {
                    let seq = c.trail(&g).unwrap();
                    assert_eq!(seq.len(), 48, "cycles must span all clusters");
                    for &e in &c.edges {
                        assert!(covered.insert(e));
                    }
                }
                assert_eq!(covered.len() + out.leftover.len(), g.m());
                assert!(out.surgery.iter().all(|e| out.leftover.contains(e)));
                ok = true;
                break;
            }
            Err(e) => eprintln!("seed {seed}: {e}"),
        }
    }
    assert!(ok, "no seed produced a verified approximate decomposition");
}

#[test]
fn approx_rejects_bad_inputs() {
    let (g, part) = gen::blowup_cycle(4, 12, &rat(1, 2), 3).unwrap();
    // r = 0 rejected
    assert!(decomp_core::hamdecomp::approx_decompose_blowup(&g, &part, 0, &rat(1, 2), 1).is_err());
    // h not divisible by k rejected: dm = 6, r = 2 -> h = 2, k = 4
    assert!(decomp_core::hamdecomp::approx_decompose_blowup(&g, &part, 2, &rat(1, 2), 1).is_err());
}
