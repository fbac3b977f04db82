//! Implicit enumeration of candidate initial sets in (reverse) lexicographic
//! order, with jump rules that skip dominated and atom-deficient regions
//! without visiting them.
//!
//! Candidate vectors live over the power-set base (reactant species minus
//! intermediates), optionally permuted so that species likely to appear in
//! minimal sets toggle fastest. Three rules move the cursor:
//!
//! * `next` — the plain successor in the chosen order;
//! * the atomic jump — an uncovered atom forces its least significant
//!   carrier into the set, the smallest step that restores coverage;
//! * the minimality jump — a candidate containing an already-found minimal
//!   set carries past the entire dominated block.
//!
//! Every skipped vector is either missing an atom, dominated, or over the
//! cardinality cap; the exhaustive scan tests assert exactly that.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering as CmpOrdering;

use crate::bitset::BitSet;
use crate::minimal::{
    empty_set_candidate, minimal_ones, powerset_base, ComponentOrder, MinimalFamily, SearchError,
    SearchOptions, VectorOrder,
};
use crate::reaction::ReactionNetwork;
use crate::volpert::Evaluator;

/// A candidate vector over the enumeration order of the base species.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateVector {
    /// Bit `i` is the vector's position `i + 1` in 1-based notation.
    pub bits: BitSet,
    pub order: VectorOrder,
}

impl CandidateVector {
    pub fn zeros(n: usize, order: VectorOrder) -> Self {
        CandidateVector {
            bits: BitSet::new(n),
            order,
        }
    }

    pub fn from_positions(n: usize, positions: &[usize], order: VectorOrder) -> Self {
        CandidateVector {
            bits: BitSet::from_indices(n, positions),
            order,
        }
    }

    pub fn next(&self) -> Option<Self> {
        match self.order {
            VectorOrder::Lex => next_lex(self),
            VectorOrder::RevLex => next_revlex(self),
        }
    }
}

/// Lexicographic successor: the last 0 flips to 1 and everything after it
/// clears. `None` when the vector is all ones.
pub fn next_lex(u: &CandidateVector) -> Option<CandidateVector> {
    let n = u.bits.len();
    let p = (0..n).rev().find(|&i| !u.bits.contains(i))?;
    let mut bits = u.bits.clone();
    bits.insert(p);
    for i in p + 1..n {
        bits.remove(i);
    }
    Some(CandidateVector {
        bits,
        order: u.order,
    })
}

/// Reverse lexicographic successor: the first 0 flips to 1 and everything
/// before it clears. `None` when the vector is all ones.
pub fn next_revlex(u: &CandidateVector) -> Option<CandidateVector> {
    let n = u.bits.len();
    let p = (0..n).find(|&i| !u.bits.contains(i))?;
    let mut bits = u.bits.clone();
    bits.insert(p);
    for i in 0..p {
        bits.remove(i);
    }
    Some(CandidateVector {
        bits,
        order: u.order,
    })
}

/// Position order from most to least significant under `order`.
fn cmp_order(a: &BitSet, b: &BitSet, order: VectorOrder) -> CmpOrdering {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len();
    match order {
        VectorOrder::Lex => {
            for i in 0..n {
                match (a.contains(i), b.contains(i)) {
                    (false, true) => return CmpOrdering::Less,
                    (true, false) => return CmpOrdering::Greater,
                    _ => {}
                }
            }
            CmpOrdering::Equal
        }
        VectorOrder::RevLex => a.cmp_value(b),
    }
}

/// Result of a carry-style jump.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Jump {
    Jumped,
    /// The significant end is a solid block of ones; there is no position to
    /// carry into, the caller advances by plain `next`.
    Saturated,
}

/// Carries out of the least significant maximal 1-block: the last 0 before
/// the block flips to 1 and every position after it clears. This is both the
/// escape move from a dominated candidate and the cardinality-cap skip.
fn carry_lowest_block(bits: &mut BitSet, order: VectorOrder) -> Jump {
    let n = bits.len();
    match order {
        VectorOrder::Lex => {
            // Least significant = highest position index.
            let b = bits.max_set_bit().expect("carry on empty vector");
            let mut q = b;
            while q > 0 && bits.contains(q - 1) {
                q -= 1;
            }
            if q == 0 {
                return Jump::Saturated;
            }
            for i in q..=b {
                bits.remove(i);
            }
            bits.insert(q - 1);
            Jump::Jumped
        }
        VectorOrder::RevLex => {
            let b = bits.min_set_bit().expect("carry on empty vector");
            let mut q = b;
            while q + 1 < n && bits.contains(q + 1) {
                q += 1;
            }
            if q + 1 == n {
                return Jump::Saturated;
            }
            for i in b..=q {
                bits.remove(i);
            }
            bits.insert(q + 1);
            Jump::Jumped
        }
    }
}

/// Outcome of the minimality jump.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MinimalityJump {
    /// No family member is contained in the candidate; it stays unchanged.
    NotDominated,
    Jumped(CandidateVector),
    /// Dominated but saturated; advance via `next`.
    NeedNext,
}

/// Escapes a candidate that contains an already-found set: flips the last 0
/// before the last 1 and clears everything after it, implicitly skipping the
/// dominated block (every skipped vector contains the same family member).
pub fn minimality_jump(u: &CandidateVector, family: &[BitSet]) -> MinimalityJump {
    if !family.iter().any(|v| v.is_subset_of(&u.bits)) {
        return MinimalityJump::NotDominated;
    }
    let mut bits = u.bits.clone();
    match carry_lowest_block(&mut bits, u.order) {
        Jump::Saturated => MinimalityJump::NeedNext,
        Jump::Jumped => MinimalityJump::Jumped(CandidateVector {
            bits,
            order: u.order,
        }),
    }
}

/// Per-atom characteristic vectors over the enumeration order.
#[derive(Clone, Debug)]
pub struct AtomVectors {
    pub order: VectorOrder,
    pub atoms: Vec<AtomVector>,
}

#[derive(Clone, Debug)]
pub struct AtomVector {
    pub atom: String,
    /// Positions of the species carrying this atom.
    pub mask: BitSet,
    /// The least significant carrier: the last one in lexicographic order,
    /// the first one in reverse lexicographic order. `None` when no base
    /// species carries the atom.
    pub jump_position: Option<usize>,
}

impl AtomVectors {
    /// First atom (in atom order) with no carrier in `bits`.
    pub fn first_uncovered(&self, bits: &BitSet) -> Option<&AtomVector> {
        self.atoms.iter().find(|a| !a.mask.intersects(bits))
    }

    /// `positions[i]` is the network ordinal of the species at enumeration
    /// position `i`.
    pub fn build(net: &ReactionNetwork, positions: &[usize], order: VectorOrder) -> Self {
        let n = positions.len();
        let atoms = net
            .atoms()
            .iter()
            .map(|atom| {
                let mut mask = BitSet::new(n);
                for (i, &m) in positions.iter().enumerate() {
                    if net.species()[m].composition.0.contains_key(atom) {
                        mask.insert(i);
                    }
                }
                let jump_position = match order {
                    VectorOrder::Lex => mask.max_set_bit(),
                    VectorOrder::RevLex => mask.min_set_bit(),
                };
                AtomVector {
                    atom: String::from(atom.as_str()),
                    mask,
                    jump_position,
                }
            })
            .collect();
        AtomVectors { order, atoms }
    }

    pub fn uncoverable(&self) -> Option<&AtomVector> {
        self.atoms.iter().find(|a| a.jump_position.is_none())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UncoverableAtom;

/// For each atom with no carrier in the candidate, forces the atom's least
/// significant carrier in. The result is the smallest vector (in the active
/// order) that contains the present species and covers every atom.
///
/// Applied blindly this can overshoot: when one species carries several
/// atoms, the combined target may pass over a smaller covering vector (the
/// exhaustive scan tests exhibit such cases). The enumeration therefore only
/// uses the jump from states where it is provably safe and falls back to
/// test-and-skip otherwise; see `enumerate_shard`.
pub fn atomic_jump(
    u: &CandidateVector,
    av: &AtomVectors,
) -> Result<CandidateVector, UncoverableAtom> {
    debug_assert_eq!(av.order, u.order);
    let mut bits = u.bits.clone();
    for atom in &av.atoms {
        if !atom.mask.intersects(&bits) {
            match atom.jump_position {
                Some(p) => bits.insert(p),
                None => return Err(UncoverableAtom),
            }
        }
    }
    Ok(CandidateVector {
        bits,
        order: u.order,
    })
}

/// Running counters, surfaced through the progress callback.
#[derive(Clone, Copy, Debug, Default)]
pub struct EnumStats {
    /// Loop states looked at, including jumped-from ones.
    pub considered: u64,
    /// Candidates actually handed to the indexing test.
    pub tested: u64,
}

/// Emit a progress call every this many considered states.
const PROGRESS_EVERY: u64 = 1 << 20;

/// Enumerates the whole candidate space sequentially.
pub fn enumerate_minimal(
    net: &ReactionNetwork,
    opts: &SearchOptions,
) -> Result<MinimalFamily, SearchError> {
    enumerate_minimal_with_progress(net, opts, &mut |_| {})
}

pub fn enumerate_minimal_with_progress(
    net: &ReactionNetwork,
    opts: &SearchOptions,
    progress: &mut dyn FnMut(EnumStats),
) -> Result<MinimalFamily, SearchError> {
    let keepers = enumerate_shard(net, opts, 0, 0, progress)?;
    Ok(minimal_ones(keepers))
}

/// Enumerates one shard: the subinterval of the order obtained by fixing the
/// top `shard_bits` significant positions to the binary code of
/// `shard_index`. Returns locally minimal sets in network-ordinal space;
/// shards are merged with [`minimal_ones`]. A worker only knows its own
/// finds, so it may keep sets dominated by another shard; the merge removes
/// them.
pub fn enumerate_shard(
    net: &ReactionNetwork,
    opts: &SearchOptions,
    shard_bits: u32,
    shard_index: u64,
    progress: &mut dyn FnMut(EnumStats),
) -> Result<Vec<BitSet>, SearchError> {
    let base = powerset_base(net, &opts.intermediates);
    let positions = position_map(net, &base, opts);
    let n = positions.len();
    if n > 62 && opts.cardinality_cap.is_none() {
        return Err(SearchError::BaseTooLarge { size: n, limit: 62 });
    }
    // More shards than the space can hold: the excess ones are empty.
    let shard_bits = shard_bits.min(n as u32);
    if shard_index >= 1u64 << shard_bits {
        return Ok(Vec::new());
    }

    let mut eval = Evaluator::new(net);
    if shard_index == 0
        && empty_set_candidate(net, opts)
        && eval.all_finite(&BitSet::new(net.species_count()))
    {
        // Nothing beats the empty set; it is the whole family.
        return Ok(alloc::vec![BitSet::new(net.species_count())]);
    }

    let atom_vectors = if opts.atomic_filter {
        let av = AtomVectors::build(net, &positions, opts.order);
        if av.uncoverable().is_some() {
            // Some atom has no carrier among the base species: no candidate
            // can pass the filter. An empty family, not an error.
            return Ok(Vec::new());
        }
        Some(av)
    } else {
        None
    };

    // Shard interval [start, end) in the significance order.
    let mut u = CandidateVector::zeros(n, opts.order);
    let mut end: Option<BitSet> = None;
    if shard_bits > 0 {
        let sig = |k: usize| match opts.order {
            // Significance rank k (0 = most significant) to position.
            VectorOrder::Lex => k,
            VectorOrder::RevLex => n - 1 - k,
        };
        for k in 0..shard_bits as usize {
            if shard_index >> (shard_bits as usize - 1 - k) & 1 == 1 {
                u.bits.insert(sig(k));
            }
        }
        if shard_index + 1 < (1u64 << shard_bits) {
            let mut e = BitSet::new(n);
            let next_index = shard_index + 1;
            for k in 0..shard_bits as usize {
                if next_index >> (shard_bits as usize - 1 - k) & 1 == 1 {
                    e.insert(sig(k));
                }
            }
            end = Some(e);
        }
    }

    let mut family: Vec<BitSet> = Vec::new(); // in position space
    let mut keepers: Vec<BitSet> = Vec::new(); // in network-ordinal space
    let mut stats = EnumStats::default();
    let mut species_set = BitSet::new(net.species_count());

    let in_range = |u: &BitSet, end: &Option<BitSet>| match end {
        None => true,
        Some(e) => cmp_order(u, e, opts.order) == CmpOrdering::Less,
    };

    'outer: loop {
        // Stabilize the cursor: atoms, dominance, cardinality, in that
        // order, until no rule fires. Every rule strictly advances.
        loop {
            stats.considered += 1;
            if stats.considered % PROGRESS_EVERY == 0 {
                progress(stats);
            }
            if !in_range(&u.bits, &end) {
                break 'outer;
            }
            if let Some(av) = &atom_vectors {
                if let Some(atom) = av.first_uncovered(&u.bits) {
                    let c = atom.jump_position.expect("coverable atoms checked upfront");
                    // Forcing the carrier in skips exactly the vectors
                    // u | delta with delta strictly less significant than c;
                    // none of them carries this atom, so the skip is sound
                    // only while u has no bits in that low range. Otherwise
                    // the candidate merely fails the filter and the cursor
                    // advances one step.
                    let jump_safe = match opts.order {
                        VectorOrder::RevLex => u.bits.min_set_bit().map_or(true, |b| b >= c),
                        VectorOrder::Lex => u.bits.max_set_bit().map_or(true, |b| b <= c),
                    };
                    if jump_safe {
                        u.bits.insert(c);
                    } else {
                        match u.next() {
                            Some(v) => u = v,
                            None => break 'outer,
                        }
                    }
                    continue;
                }
            }
            match minimality_jump(&u, &family) {
                MinimalityJump::NotDominated => {}
                MinimalityJump::Jumped(v) => {
                    u = v;
                    continue;
                }
                MinimalityJump::NeedNext => match u.next() {
                    Some(v) => {
                        u = v;
                        continue;
                    }
                    None => break 'outer,
                },
            }
            if let Some(cap) = opts.cardinality_cap {
                if u.bits.count_ones() > cap {
                    let mut bits = u.bits.clone();
                    match carry_lowest_block(&mut bits, opts.order) {
                        Jump::Jumped => {
                            u = CandidateVector {
                                bits,
                                order: opts.order,
                            };
                            continue;
                        }
                        Jump::Saturated => match u.next() {
                            Some(v) => {
                                u = v;
                                continue;
                            }
                            None => break 'outer,
                        },
                    }
                }
            }
            break;
        }

        if !u.bits.is_empty() {
            stats.tested += 1;
            species_set.clear();
            for i in u.bits.iter_ones() {
                species_set.insert(positions[i]);
            }
            if eval.all_finite(&species_set) {
                // Subset precedes superset in both orders, so no stored set
                // can be a superset of u; the deletion is kept anyway.
                family.retain(|v| !u.bits.is_subset_of(v));
                family.push(u.bits.clone());
                keepers.retain(|v| !species_set.is_subset_of(v));
                keepers.push(species_set.clone());
            }
        }

        match u.next() {
            Some(v) => u = v,
            None => break,
        }
    }
    progress(stats);
    Ok(keepers)
}

/// Network ordinal at each enumeration position.
fn position_map(net: &ReactionNetwork, base: &BitSet, opts: &SearchOptions) -> Vec<usize> {
    let in_network_order: Vec<usize> = base.iter_ones().collect();
    match opts.component_order {
        ComponentOrder::Input => in_network_order,
        ComponentOrder::Frequency => {
            // Species in many reactant complexes are likely members of
            // minimal sets; they go to the fastest-toggling end.
            let mut fastest_first = in_network_order;
            fastest_first.sort_by(|&a, &b| {
                net.consuming(b)
                    .len()
                    .cmp(&net.consuming(a).len())
                    .then(a.cmp(&b))
            });
            match opts.order {
                VectorOrder::RevLex => fastest_first, // position 0 toggles fastest
                VectorOrder::Lex => fastest_first.into_iter().rev().collect(),
            }
        }
    }
}
