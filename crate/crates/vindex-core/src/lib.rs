//! Volpert indexing of chemical reaction networks and enumeration of all
//! inclusion-minimal initial species sets from which every species attains
//! a finite Volpert index (hence positive concentration for all finite
//! times).
//!
//! Three interchangeable engines answer the minimal-sets question:
//!
//! * [`minimal::brute_force_minimal_initials`] — reduced power-set scan over
//!   the reactant species;
//! * [`ilp`] — a 0-1 integer program solved by a built-in branch and bound,
//!   with exclusion cuts to enumerate every optimum;
//! * [`lexenum`] — implicit enumeration of candidate vectors in (reverse)
//!   lexicographic order with atomic-coverage and non-minimality jump rules.
//!
//! The crate is `no_std` (with `alloc`); file formats, JSON and the command
//! line live in the companion `vindex` crate.

#![no_std]

extern crate alloc;

pub mod bitset;
pub mod ilp;
pub mod lexenum;
pub mod minimal;
pub mod reaction;
pub mod volpert;

pub use bitset::BitSet;
pub use minimal::{
    minimal_ones, powerset_base, ComponentOrder, Engine, MinimalFamily, SearchError,
    SearchOptions, VectorOrder,
};
pub use reaction::{parse_formula, parse_network, AtomComposition, ReactionNetwork};
pub use volpert::{
    build_volpert_graph, finite_indices, volpert_index, VolpertGraph, VolpertIndex,
    VolpertIndexing,
};
