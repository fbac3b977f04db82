//! Antichain machinery and the tamed brute-force search for minimal initial
//! species sets.
//!
//! A family of sets is kept as an antichain (no member contains another) in
//! a canonical order: ascending cardinality, ties broken by the bit vector
//! read as a binary number. All engines return this form, so their outputs
//! can be compared verbatim.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::bitset::BitSet;
use crate::reaction::ReactionNetwork;
use crate::volpert::Evaluator;

/// An antichain of species sets, canonically sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MinimalFamily {
    sets: Vec<BitSet>,
}

impl MinimalFamily {
    pub fn sets(&self) -> &[BitSet] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// True iff some member is a subset of `candidate`.
    pub fn dominates(&self, candidate: &BitSet) -> bool {
        self.sets.iter().any(|s| s.is_subset_of(candidate))
    }

    /// Member names per set, each set in species-ordinal order.
    pub fn names(&self, net: &ReactionNetwork) -> Vec<Vec<String>> {
        self.sets
            .iter()
            .map(|s| {
                s.iter_ones()
                    .map(|m| String::from(net.species_name(m)))
                    .collect()
            })
            .collect()
    }

    fn canonicalize(mut sets: Vec<BitSet>) -> Vec<BitSet> {
        sets.sort_by(|a, b| {
            a.count_ones()
                .cmp(&b.count_ones())
                .then_with(|| a.cmp_value(b))
        });
        sets.dedup();
        sets
    }
}

impl fmt::Display for MinimalFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.sets.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{s:?}")?;
        }
        Ok(())
    }
}

/// Keeps exactly the members with no strict subset in the input; duplicates
/// collapse to one. This is the Sperner-family (antichain) reduction.
pub fn minimal_ones(sets: impl IntoIterator<Item = BitSet>) -> MinimalFamily {
    let sorted = MinimalFamily::canonicalize(sets.into_iter().collect());
    let mut kept: Vec<BitSet> = Vec::new();
    for s in sorted {
        // Candidates arrive by ascending cardinality, so any strict subset
        // of s is already in `kept`. Equal sets were deduplicated.
        if !kept.iter().any(|k| k.is_subset_of(&s)) {
            kept.push(s);
        }
    }
    MinimalFamily { sets: kept }
}

/// Which search engine to run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Engine {
    #[default]
    Brute,
    Ilp,
    Lex,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Engine::Brute => write!(f, "brute"),
            Engine::Ilp => write!(f, "ilp"),
            Engine::Lex => write!(f, "lex"),
        }
    }
}

/// Enumeration order for the lexicographic engine.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum VectorOrder {
    Lex,
    #[default]
    RevLex,
}

/// How the lexicographic engine assigns species to vector positions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ComponentOrder {
    /// Base species in network order.
    #[default]
    Input,
    /// Species that occur in many reactant complexes toggle fastest.
    Frequency,
}

/// Options shared by all engines. Engine-specific knobs are ignored by the
/// engines that do not use them.
#[derive(Clone, Debug)]
pub struct SearchOptions {
    /// Species the user forbids from initial sets; must be network species.
    pub intermediates: BitSet,
    /// Skip candidate sets that do not contain every atom of the network.
    pub atomic_filter: bool,
    /// Only look for minimal sets up to this cardinality.
    pub cardinality_cap: Option<usize>,
    pub engine: Engine,
    /// Brute-force guard on the power-set base size.
    pub base_limit: usize,
    /// Branch-and-bound node budget for the integer-programming engine.
    pub node_cap: u64,
    pub order: VectorOrder,
    pub component_order: ComponentOrder,
}

pub const DEFAULT_BASE_LIMIT: usize = 25;
pub const DEFAULT_NODE_CAP: u64 = 10_000_000;

impl SearchOptions {
    pub fn new(net: &ReactionNetwork) -> Self {
        SearchOptions {
            intermediates: BitSet::new(net.species_count()),
            atomic_filter: false,
            cardinality_cap: None,
            engine: Engine::Brute,
            base_limit: DEFAULT_BASE_LIMIT,
            node_cap: DEFAULT_NODE_CAP,
            order: VectorOrder::default(),
            component_order: ComponentOrder::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchError {
    /// The power-set base exceeds the engine's guard.
    BaseTooLarge { size: usize, limit: usize },
    /// The branch-and-bound node budget ran out.
    NodeCapExhausted { cap: u64 },
}

impl fmt::Display for SearchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SearchError::BaseTooLarge { size, limit } => {
                write!(f, "power-set base has {size} species, limit is {limit}")
            }
            SearchError::NodeCapExhausted { cap } => {
                write!(f, "branch-and-bound node cap of {cap} exhausted")
            }
        }
    }
}

impl core::error::Error for SearchError {}

/// Reactant species minus intermediates: the base set candidate initial sets
/// are drawn from. Product-only species never help a minimal set, so they
/// are dropped up front.
pub fn powerset_base(net: &ReactionNetwork, intermediates: &BitSet) -> BitSet {
    let mut base = net.reactant_species();
    base.difference_with(intermediates);
    base
}

/// Whether the empty set is admissible as a candidate at all. Only networks
/// where the zero complex is a reactant complex can be driven from nothing,
/// and the atomic filter rejects the empty set whenever any atom occurs.
/// When admissible and all-finite, the minimal family is the single empty
/// set, since every other set strictly contains it.
pub(crate) fn empty_set_candidate(net: &ReactionNetwork, opts: &SearchOptions) -> bool {
    net.has_zero_complex_reactant() && !(opts.atomic_filter && !net.atoms().is_empty())
}

/// Brute force, tamed: enumerate nonempty subsets of the base by ascending
/// cardinality, keep those with all-finite indices, and reduce to the
/// antichain. Supersets of accepted sets are skipped (a pruning step only;
/// the antichain reduction would drop them anyway).
pub fn brute_force_minimal_initials(
    net: &ReactionNetwork,
    opts: &SearchOptions,
) -> Result<MinimalFamily, SearchError> {
    let base = powerset_base(net, &opts.intermediates);
    let base_species: Vec<usize> = base.iter_ones().collect();
    let n = base_species.len();
    if n > opts.base_limit {
        return Err(SearchError::BaseTooLarge {
            size: n,
            limit: opts.base_limit,
        });
    }

    let mut eval = Evaluator::new(net);
    if empty_set_candidate(net, opts) && eval.all_finite(&BitSet::new(net.species_count())) {
        return Ok(minimal_ones([BitSet::new(net.species_count())]));
    }

    let mut kept: Vec<BitSet> = Vec::new();
    let max_k = opts.cardinality_cap.unwrap_or(n).min(n);
    let mut candidate = BitSet::new(net.species_count());
    for k in 1..=max_k {
        // Classic lexicographic k-combinations of base positions.
        let mut comb: Vec<usize> = (0..k).collect();
        'combs: loop {
            candidate.clear();
            for &i in &comb {
                candidate.insert(base_species[i]);
            }
            let dominated = kept.iter().any(|s| s.is_subset_of(&candidate));
            if !dominated
                && (!opts.atomic_filter || net.atoms_present(&candidate))
                && eval.all_finite(&candidate)
            {
                kept.push(candidate.clone());
            }
            // Advance to the next combination, rightmost movable index first.
            let mut i = k;
            loop {
                if i == 0 {
                    break 'combs;
                }
                i -= 1;
                if comb[i] != i + n - k {
                    comb[i] += 1;
                    for j in i + 1..k {
                        comb[j] = comb[j - 1] + 1;
                    }
                    break;
                }
            }
        }
    }
    Ok(minimal_ones(kept))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reaction::parse_network;
    use crate::volpert::finite_indices;
    use alloc::string::ToString;
    use alloc::vec;

    fn set(net: &ReactionNetwork, names: &[&str]) -> BitSet {
        let mut s = BitSet::new(net.species_count());
        for n in names {
            s.insert(net.species_by_name(n).unwrap());
        }
        s
    }

    fn family_names(net: &ReactionNetwork, fam: &MinimalFamily) -> Vec<Vec<String>> {
        fam.names(net)
    }

    fn mm() -> ReactionNetwork {
        parse_network("E + S <=> C\nC -> E + P").unwrap()
    }

    #[test]
    fn minimal_ones_michaelis_menten_list() {
        let net = mm();
        let input = [
            vec!["C"],
            vec!["E", "S"],
            vec!["E", "C"],
            vec!["S", "C"],
            vec!["C", "P"],
            vec!["E", "S", "C"],
            vec!["E", "S", "P"],
            vec!["E", "C", "P"],
            vec!["S", "C", "P"],
            vec!["E", "S", "C", "P"],
        ];
        let fam = minimal_ones(input.iter().map(|names| set(&net, names)));
        assert_eq!(
            family_names(&net, &fam),
            [vec!["C".to_string()], vec!["E".into(), "S".into()]]
        );
    }

    #[test]
    fn minimal_ones_empty_and_duplicates() {
        assert!(minimal_ones([]).is_empty());
        let a = BitSet::from_indices(3, &[0]);
        let ab = BitSet::from_indices(3, &[0, 1]);
        let fam = minimal_ones([a.clone(), a.clone(), ab]);
        assert_eq!(fam.sets(), &[a]);
    }

    #[test]
    fn minimal_ones_matches_pairwise_scan_oracle() {
        // Oracle: keep s iff no other input set is a strict subset of s.
        let nets = [
            vec![vec![0], vec![0, 1], vec![2], vec![1, 2], vec![0, 2]],
            vec![vec![1, 2], vec![0, 1, 2], vec![1], vec![1]],
        ];
        for input in nets {
            let sets: Vec<BitSet> = input.iter().map(|v| BitSet::from_indices(4, v)).collect();
            let expect: Vec<BitSet> = sets
                .iter()
                .filter(|s| !sets.iter().any(|t| t.is_strict_subset_of(s)))
                .cloned()
                .collect();
            let fam = minimal_ones(sets.clone());
            for e in &expect {
                assert!(fam.sets().contains(e));
            }
            assert_eq!(
                fam.len(),
                {
                    let mut uniq = expect.clone();
                    uniq.sort_by(|a, b| a.cmp_value(b));
                    uniq.dedup();
                    uniq.len()
                }
            );
        }
    }

    #[test]
    fn powerset_base_examples() {
        let net = mm();
        let base = powerset_base(&net, &set(&net, &["C"]));
        let names: Vec<_> = base.iter_ones().map(|m| net.species_name(m)).collect();
        assert_eq!(names, ["E", "S"]);

        let base = powerset_base(&net, &BitSet::new(4));
        let names: Vec<_> = base.iter_ones().map(|m| net.species_name(m)).collect();
        assert_eq!(names, ["E", "S", "C"]);

        let all_reactants = net.reactant_species();
        assert!(powerset_base(&net, &all_reactants).is_empty());
    }

    #[test]
    fn brute_michaelis_menten() {
        let net = mm();
        let fam = brute_force_minimal_initials(&net, &SearchOptions::new(&net)).unwrap();
        assert_eq!(
            family_names(&net, &fam),
            [vec!["C".to_string()], vec!["E".into(), "S".into()]]
        );

        let mut opts = SearchOptions::new(&net);
        opts.intermediates = set(&net, &["C"]);
        let fam = brute_force_minimal_initials(&net, &opts).unwrap();
        assert_eq!(family_names(&net, &fam), [vec!["E".to_string(), "S".into()]]);
    }

    #[test]
    fn brute_emanuel_knorre_all_variants() {
        let net =
            parse_network("Cl2 -> 2Cl*\nCH4 + Cl* -> *CH3 + HCl\n*CH3 + Cl2 -> CH3Cl + Cl*")
                .unwrap();
        for atomic in [false, false, true] {
            let mut opts = SearchOptions::new(&net);
            opts.atomic_filter = atomic;
            let fam = brute_force_minimal_initials(&net, &opts).unwrap();
            assert_eq!(
                family_names(&net, &fam),
                [vec!["Cl2".to_string(), "CH4".into()]]
            );
        }
    }

    #[test]
    fn brute_respects_base_limit() {
        let net = mm();
        let mut opts = SearchOptions::new(&net);
        opts.base_limit = 2;
        let err = brute_force_minimal_initials(&net, &opts).unwrap_err();
        assert_eq!(err, SearchError::BaseTooLarge { size: 3, limit: 2 });
    }

    #[test]
    fn brute_soundness_and_minimality() {
        let net = mm();
        let fam = brute_force_minimal_initials(&net, &SearchOptions::new(&net)).unwrap();
        for s in fam.sets() {
            assert!(finite_indices(&net, s));
            for m in s.iter_ones() {
                let mut smaller = s.clone();
                smaller.remove(m);
                assert!(!finite_indices(&net, &smaller));
            }
        }
    }

    #[test]
    fn zero_complex_network_yields_empty_set() {
        let net = parse_network("0 -> X\nX -> Y").unwrap();
        let fam = brute_force_minimal_initials(&net, &SearchOptions::new(&net)).unwrap();
        assert_eq!(fam.len(), 1);
        assert!(fam.sets()[0].is_empty());
    }
}
