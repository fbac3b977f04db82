//! The Volpert graph and Volpert indexing of species and reaction steps.
//!
//! Indices measure production distance from an initial species set: initial
//! species get 0, a step fires at the maximum index of its reactants, and a
//! produced species gets one more than the first step producing it. A step
//! with an empty reactant side (zero complex) fires at 0 unconditionally.
//! Whatever stays unreached is infinite.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::bitset::BitSet;
use crate::reaction::ReactionNetwork;

/// A Volpert index: a level in the propagation, or unreachable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VolpertIndex {
    Finite(u32),
    Infinite,
}

impl VolpertIndex {
    pub fn is_finite(self) -> bool {
        matches!(self, VolpertIndex::Finite(_))
    }

    pub fn finite(self) -> Option<u32> {
        match self {
            VolpertIndex::Finite(k) => Some(k),
            VolpertIndex::Infinite => None,
        }
    }
}

impl fmt::Display for VolpertIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VolpertIndex::Finite(k) => write!(f, "{k}"),
            VolpertIndex::Infinite => write!(f, "inf"),
        }
    }
}

/// Directed bipartite graph: species -> step edges where alpha > 0, step ->
/// species edges where beta > 0. Multiplicities are recorded but the indexing
/// only uses positivity.
#[derive(Clone, Debug)]
pub struct VolpertGraph {
    /// Per species, `(step, alpha)` ascending by step ordinal.
    pub species_to_steps: Vec<Vec<(usize, u32)>>,
    /// Per step, `(species, beta)` ascending by species ordinal.
    pub step_to_species: Vec<Vec<(usize, u32)>>,
}

pub fn build_volpert_graph(net: &ReactionNetwork) -> VolpertGraph {
    let mut species_to_steps = vec![Vec::new(); net.species_count()];
    let mut step_to_species = vec![Vec::new(); net.step_count()];
    for step in net.steps() {
        for &(m, alpha) in &step.reactants {
            species_to_steps[m].push((step.ordinal, alpha));
        }
        for &(m, beta) in &step.products {
            step_to_species[step.ordinal].push((m, beta));
        }
    }
    VolpertGraph {
        species_to_steps,
        step_to_species,
    }
}

/// The result of indexing a network from an initial species set.
#[derive(Clone, Debug)]
pub struct VolpertIndexing {
    pub species: Vec<VolpertIndex>,
    pub steps: Vec<VolpertIndex>,
    pub initial: BitSet,
    /// True iff the network has a step with an empty reactant side; such a
    /// step is treated as if its (empty) reactant complex were present from
    /// the start and receives index 0.
    pub zero_complex_active: bool,
}

impl VolpertIndexing {
    pub fn all_finite(&self) -> bool {
        self.species.iter().all(|i| i.is_finite())
    }

    pub fn max_species_index(&self) -> VolpertIndex {
        self.species.iter().copied().max().unwrap_or(VolpertIndex::Finite(0))
    }

    pub fn max_step_index(&self) -> VolpertIndex {
        self.steps.iter().copied().max().unwrap_or(VolpertIndex::Finite(0))
    }
}

/// Reusable scratch for repeated indexing queries against one network.
/// The search engines evaluate hundreds of thousands of candidate sets, so
/// the per-query state is recycled instead of reallocated.
pub struct Evaluator<'n> {
    net: &'n ReactionNetwork,
    species_level: Vec<u32>,
    step_level: Vec<u32>,
    remaining: Vec<u32>,
    queue: Vec<usize>,
}

const UNSET: u32 = u32::MAX;

impl<'n> Evaluator<'n> {
    pub fn new(net: &'n ReactionNetwork) -> Self {
        Evaluator {
            net,
            species_level: vec![UNSET; net.species_count()],
            step_level: vec![UNSET; net.step_count()],
            remaining: vec![0; net.step_count()],
            queue: Vec::with_capacity(net.species_count()),
        }
    }

    pub fn network(&self) -> &'n ReactionNetwork {
        self.net
    }

    /// Layered propagation from `initial`. Runs in O(edges).
    fn propagate(&mut self, initial: &BitSet) {
        debug_assert_eq!(initial.len(), self.net.species_count());
        self.species_level.iter_mut().for_each(|l| *l = UNSET);
        self.step_level.iter_mut().for_each(|l| *l = UNSET);
        self.queue.clear();
        for (r, step) in self.net.steps().iter().enumerate() {
            self.remaining[r] = step.reactants.len() as u32;
        }

        for m in initial.iter_ones() {
            self.species_level[m] = 0;
            self.queue.push(m);
        }
        // Zero-complex steps fire immediately.
        for (r, step) in self.net.steps().iter().enumerate() {
            if step.reactants.is_empty() {
                self.step_level[r] = 0;
                for &(p, _) in &step.products {
                    if self.species_level[p] == UNSET {
                        self.species_level[p] = 1;
                        self.queue.push(p);
                    }
                }
            }
        }

        // Species leave the queue in nondecreasing level order; a step fires
        // when its last reactant arrives, so its level is that reactant's
        // level, which is the maximum over its reactants.
        let mut head = 0;
        while head < self.queue.len() {
            let m = self.queue[head];
            head += 1;
            let level = self.species_level[m];
            for &r in self.net.consuming(m) {
                if self.remaining[r] == 0 {
                    continue;
                }
                self.remaining[r] -= 1;
                if self.remaining[r] == 0 && self.step_level[r] == UNSET {
                    self.step_level[r] = level;
                    for &(p, _) in &self.net.steps()[r].products {
                        if self.species_level[p] == UNSET {
                            self.species_level[p] = level + 1;
                            self.queue.push(p);
                        }
                    }
                }
            }
        }
    }

    /// True iff every species gets a finite index from `initial`.
    pub fn all_finite(&mut self, initial: &BitSet) -> bool {
        self.propagate(initial);
        self.species_level.iter().all(|&l| l != UNSET)
    }

    pub fn indexing(&mut self, initial: &BitSet) -> VolpertIndexing {
        self.propagate(initial);
        VolpertIndexing {
            species: self
                .species_level
                .iter()
                .map(|&l| {
                    if l == UNSET {
                        VolpertIndex::Infinite
                    } else {
                        VolpertIndex::Finite(l)
                    }
                })
                .collect(),
            steps: self
                .step_level
                .iter()
                .map(|&l| {
                    if l == UNSET {
                        VolpertIndex::Infinite
                    } else {
                        VolpertIndex::Finite(l)
                    }
                })
                .collect(),
            initial: initial.clone(),
            zero_complex_active: self.net.has_zero_complex_reactant(),
        }
    }
}

/// Indexes the network from `initial`. An empty initial set is not an error:
/// without a zero-complex step everything simply comes out infinite.
pub fn volpert_index(net: &ReactionNetwork, initial: &BitSet) -> VolpertIndexing {
    Evaluator::new(net).indexing(initial)
}

/// True iff every species index is finite. Step indices follow: if all
/// species are finite, every step fires at the maximum of its reactant
/// levels, which is then finite too.
pub fn finite_indices(net: &ReactionNetwork, initial: &BitSet) -> bool {
    Evaluator::new(net).all_finite(initial)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reaction::parse_network;
    use alloc::vec::Vec;

    fn set(net: &ReactionNetwork, names: &[&str]) -> BitSet {
        let mut s = BitSet::new(net.species_count());
        for n in names {
            s.insert(net.species_by_name(n).unwrap());
        }
        s
    }

    fn fin(k: u32) -> VolpertIndex {
        VolpertIndex::Finite(k)
    }

    #[test]
    fn graph_of_michaelis_menten() {
        let net = parse_network("E + S <=> C\nC -> E + P").unwrap();
        let g = build_volpert_graph(&net);
        let e = net.species_by_name("E").unwrap();
        let s = net.species_by_name("S").unwrap();
        let c = net.species_by_name("C").unwrap();
        let p = net.species_by_name("P").unwrap();
        // Species -> step edges: E->r0, S->r0, C->r1, C->r2.
        assert_eq!(g.species_to_steps[e], [(0, 1)]);
        assert_eq!(g.species_to_steps[s], [(0, 1)]);
        assert_eq!(g.species_to_steps[c], [(1, 1), (2, 1)]);
        assert!(g.species_to_steps[p].is_empty());
        // Step -> species edges: r0->C, r1->E,S, r2->E,P.
        assert_eq!(g.step_to_species[0], [(c, 1)]);
        assert_eq!(g.step_to_species[1], [(e, 1), (s, 1)]);
        assert_eq!(g.step_to_species[2], [(e, 1), (p, 1)]);
    }

    #[test]
    fn graph_multiplicities() {
        let net = parse_network("2X -> 3X").unwrap();
        let g = build_volpert_graph(&net);
        assert_eq!(g.species_to_steps[0], [(0, 2)]);
        assert_eq!(g.step_to_species[0], [(0, 3)]);

        let net = parse_network("X -> Y").unwrap();
        let g = build_volpert_graph(&net);
        assert_eq!(g.species_to_steps[0], [(0, 1)]);
        assert_eq!(g.step_to_species[0], [(1, 1)]);
    }

    #[test]
    fn michaelis_menten_favorable() {
        let net = parse_network("E + S <=> C\nC -> E + P").unwrap();
        let ix = volpert_index(&net, &set(&net, &["E", "S"]));
        let by = |n: &str| ix.species[net.species_by_name(n).unwrap()];
        assert_eq!(by("S"), fin(0));
        assert_eq!(by("E"), fin(0));
        assert_eq!(by("C"), fin(1));
        assert_eq!(by("P"), fin(2));
        // Steps in file order: E+S->C, C->E+S, C->E+P.
        assert_eq!(ix.steps, [fin(0), fin(1), fin(1)]);
        assert!(ix.all_finite());
    }

    #[test]
    fn michaelis_menten_unfavorable() {
        let net = parse_network("E + S <=> C\nC -> E + P").unwrap();
        let ix = volpert_index(&net, &set(&net, &["P"]));
        let p = net.species_by_name("P").unwrap();
        for (m, &idx) in ix.species.iter().enumerate() {
            if m == p {
                assert_eq!(idx, fin(0));
            } else {
                assert_eq!(idx, VolpertIndex::Infinite);
            }
        }
        assert!(ix.steps.iter().all(|&s| s == VolpertIndex::Infinite));
        assert!(!ix.all_finite());
    }

    const MAPK: &str = "X10 -> X11\nX10 -> X2 + X5\nX7 -> X3 + X4\nX7 -> X2 + X4\n\
                        X11 -> X1 + X5\nX2 + X5 -> X10\nX2 + X5 -> X9\nX3 + X5 -> X8\n\
                        X2 + X4 -> X7\nX1 + X5 -> X11\nX9 -> X2 + X5\nX8 -> X9\n\
                        X8 -> X3 + X5\nX1 + X4 -> X6\nX6 -> X2 + X4\nX6 -> X1 + X4\n";

    #[test]
    fn mapk_indexing_table() {
        let net = parse_network(MAPK).unwrap();
        assert_eq!(net.species_count(), 11);
        assert_eq!(net.step_count(), 16);
        let ix = volpert_index(&net, &set(&net, &["X10", "X7"]));
        let by = |n: &str| ix.species[net.species_by_name(n).unwrap()];
        for (name, level) in [
            ("X10", 0),
            ("X7", 0),
            ("X11", 1),
            ("X5", 1),
            ("X3", 1),
            ("X2", 1),
            ("X4", 1),
            ("X9", 2),
            ("X8", 2),
            ("X1", 2),
            ("X6", 3),
        ] {
            assert_eq!(by(name), fin(level), "species {name}");
        }
        let expected_steps: Vec<u32> = vec![0, 0, 0, 0, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 3, 3];
        let got: Vec<_> = ix.steps.iter().map(|s| s.finite().unwrap()).collect();
        assert_eq!(got, expected_steps);
    }

    #[test]
    fn zero_complex_with_empty_initial() {
        let net = parse_network("0 -> X").unwrap();
        let ix = volpert_index(&net, &BitSet::new(1));
        assert_eq!(ix.steps, [fin(0)]);
        assert_eq!(ix.species, [fin(1)]);
        assert!(ix.zero_complex_active);
        assert!(ix.all_finite());
    }

    #[test]
    fn empty_initial_without_zero_complex_is_all_infinite() {
        let net = parse_network("X -> Y").unwrap();
        let ix = volpert_index(&net, &BitSet::new(2));
        assert!(ix.species.iter().all(|&s| s == VolpertIndex::Infinite));
        assert!(!ix.zero_complex_active);
    }

    #[test]
    fn initial_membership_dominates() {
        // X is produced only by an unreachable step but is itself initial.
        let net = parse_network("A -> X\nX -> Y").unwrap();
        let ix = volpert_index(&net, &set(&net, &["X"]));
        assert_eq!(ix.species[net.species_by_name("X").unwrap()], fin(0));
        assert_eq!(
            ix.species[net.species_by_name("A").unwrap()],
            VolpertIndex::Infinite
        );
    }

    #[test]
    fn finite_indices_examples() {
        let net = parse_network("E + S <=> C\nC -> E + P").unwrap();
        assert!(finite_indices(&net, &set(&net, &["E", "S"])));
        assert!(!finite_indices(&net, &set(&net, &["E"])));
        assert!(finite_indices(&net, &BitSet::all_ones(4)));
    }
}
