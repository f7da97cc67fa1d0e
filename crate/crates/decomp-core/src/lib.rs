//! Decomposing multigraphs into few paths and cycles.
//!
//! The crate is organised around a plain edge-id multigraph ([`graph::MultiGraph`])
//! and a [`graph::Decomposition`] container (walks plus an explicit leftover edge
//! set). On top of that sit:
//!
//! * [`regularity`] — density and ε-regularity testing (exhaustive on small
//!   pairs, sampled above the cap), superregularity in its dense and sparse
//!   forms, partition-level checks, and the randomized edge/vertex splitting
//!   constructions;
//! * [`basic`] — Eulerian circuits, greedy path/cycle decomposition, Vizing edge
//!   coloring and the even-matching split;
//! * [`oracle`] — exact minimum decompositions of tiny graphs by exhaustive
//!   search, used as ground truth everywhere;
//! * [`regularise`] — making every superregular pair Eulerian (oddity
//!   reduction) and making Eulerian near-regular pairs exactly regular;
//! * [`tying`] — link paths inside regular pairs, and the budgeted machinery
//!   that ties linear forests into cycles;
//! * [`hamdecomp`] — bipartite Hamilton cycle search, matching decompositions,
//!   matching-chain closure, Hamilton packing and the approximate Hamilton
//!   decomposition of cycle blow-ups;
//! * [`pipeline`] — end-to-end decomposers and bound audits;
//! * [`gen`] — seeded instance generators.
//!
//! All randomized operations are deterministic given their seed. The crate is
//! `no_std` (with `alloc`); IO, file formats and the CLI live in `decomp-cli`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod basic;
pub mod error;
pub mod gen;
pub mod graph;
pub mod hamdecomp;
pub mod oracle;
pub mod pipeline;
pub mod rat;
pub mod regularise;
pub mod regularity;
pub mod rng;
pub mod tying;

pub use error::Error;
pub use graph::{Decomposition, LinearForest, MultiGraph, Walk, WalkKind};
pub use rat::Rat;

pub type Result<T> = core::result::Result<T, Error>;
