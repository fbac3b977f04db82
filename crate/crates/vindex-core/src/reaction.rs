//! Reaction networks: parsing, stoichiometric structure and atom bookkeeping.
//!
//! A network is a list of species and a list of irreversible reaction steps
//! with positive integer reactant/product coefficients. Reversible arrows in
//! the input expand into two opposed steps. Species names are opaque tokens;
//! when a name happens to read as a chemical formula its atom composition is
//! recorded, otherwise the species counts as carrying no atoms and its name
//! goes on the warning list.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;

use crate::bitset::BitSet;

/// Atom counts of one species, keyed by element symbol.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AtomComposition(pub BTreeMap<String, u32>);

impl AtomComposition {
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(|s| s.as_str())
    }
}

#[derive(Clone, Debug)]
pub struct Species {
    pub name: String,
    /// Position in the network's species sequence.
    pub ordinal: usize,
    /// Empty when the name does not parse as a formula (opaque species).
    pub composition: AtomComposition,
}

#[derive(Clone, Debug)]
pub struct ReactionStep {
    pub ordinal: usize,
    /// `(species ordinal, alpha)` pairs, ascending by ordinal, alpha > 0.
    pub reactants: Vec<(usize, u32)>,
    /// `(species ordinal, beta)` pairs, ascending by ordinal, beta > 0.
    pub products: Vec<(usize, u32)>,
    /// The step as written, for reporting.
    pub source: String,
}

#[derive(Clone, Debug)]
pub struct ReactionNetwork {
    species: Vec<Species>,
    steps: Vec<ReactionStep>,
    /// Sorted element symbols occurring in any species.
    atoms: Vec<String>,
    /// Names whose formula parse failed (treated as atom-free).
    opaque_species: Vec<String>,
    /// Derived: per species, the steps producing it (beta > 0).
    producing: Vec<Vec<usize>>,
    /// Derived: per species, the steps consuming it (alpha > 0).
    consuming: Vec<Vec<usize>>,
    has_zero_complex_reactant: bool,
}

/// Where in the input an error was found (1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseError {
    Syntax { at: Location, message: String },
    ZeroCoefficient { at: Location, token: String },
    UnknownSpecies { at: Location, name: String },
    DuplicateSpecies { at: Location, name: String },
    NoSteps,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::Syntax { at, message } => {
                write!(f, "{}:{}: {message}", at.line, at.column)
            }
            ParseError::ZeroCoefficient { at, token } => write!(
                f,
                "{}:{}: zero stoichiometric coefficient in `{token}`",
                at.line, at.column
            ),
            ParseError::UnknownSpecies { at, name } => write!(
                f,
                "{}:{}: species `{name}` not declared in species header",
                at.line, at.column
            ),
            ParseError::DuplicateSpecies { at, name } => {
                write!(f, "{}:{}: duplicate species `{name}`", at.line, at.column)
            }
            ParseError::NoSteps => write!(f, "network has no reaction steps"),
        }
    }
}

impl core::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NetworkError {
    NoSpecies,
    NoSteps,
    BadOrdinal { step: usize, ordinal: usize },
    ZeroCoefficient { step: usize, ordinal: usize },
    DuplicateName(String),
}

impl fmt::Display for NetworkError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NetworkError::NoSpecies => write!(f, "network has no species"),
            NetworkError::NoSteps => write!(f, "network has no reaction steps"),
            NetworkError::BadOrdinal { step, ordinal } => {
                write!(f, "step {step} references species ordinal {ordinal} out of range")
            }
            NetworkError::ZeroCoefficient { step, ordinal } => {
                write!(f, "step {step} has zero coefficient for species {ordinal}")
            }
            NetworkError::DuplicateName(n) => write!(f, "duplicate species name `{n}`"),
        }
    }
}

impl core::error::Error for NetworkError {}

impl ReactionNetwork {
    /// Builds a network from raw parts, deriving compositions and index sets.
    pub fn new(
        names: Vec<String>,
        raw_steps: Vec<(Vec<(usize, u32)>, Vec<(usize, u32)>, String)>,
    ) -> Result<Self, NetworkError> {
        if names.is_empty() {
            return Err(NetworkError::NoSpecies);
        }
        if raw_steps.is_empty() {
            return Err(NetworkError::NoSteps);
        }
        let m = names.len();
        {
            let mut seen = names.clone();
            seen.sort();
            if seen.windows(2).any(|w| w[0] == w[1]) {
                let dup = seen
                    .windows(2)
                    .find(|w| w[0] == w[1])
                    .map(|w| w[0].clone())
                    .unwrap_or_default();
                return Err(NetworkError::DuplicateName(dup));
            }
        }

        let mut opaque_species = Vec::new();
        let species: Vec<Species> = names
            .into_iter()
            .enumerate()
            .map(|(ordinal, name)| {
                let composition = match parse_formula(&name) {
                    Some(c) => c,
                    None => {
                        opaque_species.push(name.clone());
                        AtomComposition::default()
                    }
                };
                Species {
                    name,
                    ordinal,
                    composition,
                }
            })
            .collect();

        let mut steps = Vec::with_capacity(raw_steps.len());
        for (ordinal, (mut reactants, mut products, source)) in raw_steps.into_iter().enumerate() {
            for list in [&mut reactants, &mut products] {
                list.sort_by_key(|&(m, _)| m);
                for &(sp, coef) in list.iter() {
                    if sp >= m {
                        return Err(NetworkError::BadOrdinal {
                            step: ordinal,
                            ordinal: sp,
                        });
                    }
                    if coef == 0 {
                        return Err(NetworkError::ZeroCoefficient {
                            step: ordinal,
                            ordinal: sp,
                        });
                    }
                }
                debug_assert!(list.windows(2).all(|w| w[0].0 < w[1].0));
            }
            steps.push(ReactionStep {
                ordinal,
                reactants,
                products,
                source,
            });
        }

        let mut producing = alloc::vec![Vec::new(); m];
        let mut consuming = alloc::vec![Vec::new(); m];
        let mut has_zero_complex_reactant = false;
        for step in &steps {
            if step.reactants.is_empty() {
                has_zero_complex_reactant = true;
            }
            for &(sp, _) in &step.reactants {
                consuming[sp].push(step.ordinal);
            }
            for &(sp, _) in &step.products {
                producing[sp].push(step.ordinal);
            }
        }

        let mut atom_set: BTreeMap<&str, ()> = BTreeMap::new();
        for sp in &species {
            for a in sp.composition.atoms() {
                atom_set.entry(a).or_insert(());
            }
        }
        let atoms = atom_set.keys().map(|a| a.to_string()).collect();

        Ok(ReactionNetwork {
            species,
            steps,
            atoms,
            opaque_species,
            producing,
            consuming,
            has_zero_complex_reactant,
        })
    }

    pub fn species_count(&self) -> usize {
        self.species.len()
    }

    pub fn step_count(&self) -> usize {
        self.steps.len()
    }

    pub fn species(&self) -> &[Species] {
        &self.species
    }

    pub fn steps(&self) -> &[ReactionStep] {
        &self.steps
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn opaque_species(&self) -> &[String] {
        &self.opaque_species
    }

    pub fn species_name(&self, m: usize) -> &str {
        &self.species[m].name
    }

    pub fn species_by_name(&self, name: &str) -> Option<usize> {
        self.species.iter().position(|s| s.name == name)
    }

    /// Steps producing species `m` (beta > 0).
    pub fn producing(&self, m: usize) -> &[usize] {
        &self.producing[m]
    }

    /// Steps consuming species `m` (alpha > 0).
    pub fn consuming(&self, m: usize) -> &[usize] {
        &self.consuming[m]
    }

    pub fn has_zero_complex_reactant(&self) -> bool {
        self.has_zero_complex_reactant
    }

    /// Union of reactant species over all steps.
    pub fn reactant_species(&self) -> BitSet {
        let mut set = BitSet::new(self.species_count());
        for step in &self.steps {
            for &(m, _) in &step.reactants {
                set.insert(m);
            }
        }
        set
    }

    /// True iff every atom of the network occurs in some member of `subset`.
    pub fn atoms_present(&self, subset: &BitSet) -> bool {
        debug_assert_eq!(subset.len(), self.species_count());
        let mut missing: Vec<&str> = self.atoms.iter().map(|s| s.as_str()).collect();
        for m in subset.iter_ones() {
            missing.retain(|a| !self.species[m].composition.0.contains_key(*a));
            if missing.is_empty() {
                return true;
            }
        }
        missing.is_empty()
    }

    /// Set-of-tokens form: each token is formula-parsed on its own (it need
    /// not name a species of the network) and the union of the resulting
    /// atoms is compared for equality with the network's atom set.
    pub fn atoms_present_tokens(&self, tokens: &[&str]) -> bool {
        let mut union: BTreeMap<String, ()> = BTreeMap::new();
        for t in tokens {
            if let Some(c) = parse_formula(t) {
                for a in c.atoms() {
                    union.insert(a.to_string(), ());
                }
            }
        }
        union.len() == self.atoms.len() && self.atoms.iter().all(|a| union.contains_key(a))
    }

    /// Fraction of nonempty species subsets that contain every atom of the
    /// network, computed by inclusion-exclusion over the atom-missing
    /// families rather than by materializing the power set.
    pub fn atomic_saving(&self) -> Result<SavingRatio, SavingError> {
        if self.species.iter().all(|s| s.composition.is_empty()) {
            return Err(SavingError::NoAtoms);
        }
        let m = self.species_count();
        let t = self.atoms.len();
        // Covering subsets = sum over atom subsets B of (-1)^|B| * 2^f(B),
        // f(B) = number of species containing no atom of B. The empty
        // species set contributes (1-1)^t = 0, so no correction is needed.
        let mut positive = BigUint::from(0u32);
        let mut negative = BigUint::from(0u32);
        for mask in 0u64..(1u64 << t) {
            let f = self
                .species
                .iter()
                .filter(|s| {
                    (0..t).all(|a| mask >> a & 1 == 0 || !s.composition.0.contains_key(&self.atoms[a]))
                })
                .count();
            let term = BigUint::from(1u32) << f;
            if mask.count_ones() % 2 == 0 {
                positive += term;
            } else {
                negative += term;
            }
        }
        let numerator = positive - negative;
        let denominator = (BigUint::from(1u32) << m) - BigUint::from(1u32);
        Ok(SavingRatio {
            numerator,
            denominator,
        })
    }

    /// Normalized text form: species header plus one line per step.
    pub fn to_rxn_text(&self) -> String {
        let mut out = String::new();
        out.push_str("species: ");
        for (i, s) in self.species.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            out.push_str(&s.name);
        }
        out.push('\n');
        for step in &self.steps {
            out.push_str(&self.complex_text(&step.reactants));
            out.push_str(" -> ");
            out.push_str(&self.complex_text(&step.products));
            out.push('\n');
        }
        out
    }

    fn complex_text(&self, side: &[(usize, u32)]) -> String {
        if side.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, &(m, coef)) in side.iter().enumerate() {
            if i > 0 {
                out.push_str(" + ");
            }
            if coef != 1 {
                out.push_str(&format!("{coef}"));
            }
            out.push_str(&self.species[m].name);
        }
        out
    }
}

/// Exact covering-subset ratio.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SavingRatio {
    pub numerator: BigUint,
    pub denominator: BigUint,
}

impl SavingRatio {
    pub fn to_f64(&self) -> f64 {
        biguint_to_f64(&self.numerator) / biguint_to_f64(&self.denominator)
    }
}

fn biguint_to_f64(n: &BigUint) -> f64 {
    let mut x = 0.0;
    for d in n.to_u64_digits().into_iter().rev() {
        x = x * 18446744073709551616.0 + d as f64;
    }
    x
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SavingError {
    /// No species has a nonempty atom composition.
    NoAtoms,
}

impl fmt::Display for SavingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SavingError::NoAtoms => write!(f, "no species has an atomic composition"),
        }
    }
}

impl core::error::Error for SavingError {}

// ---------------------------------------------------------------------------
// Reaction file grammar
// ---------------------------------------------------------------------------

/// Parses the `.rxn` grammar:
///
/// ```text
/// line    := step | header | comment | blank
/// header  := "species:" name ("," name)*
/// step    := complex ("->" | "<=>") complex
/// complex := "0" | term ("+" term)*
/// term    := [integer] name
/// comment := "#" any
/// ```
///
/// Reversible arrows expand into forward then backward irreversible steps.
/// Species order is first occurrence unless the header fixes it.
pub fn parse_network(text: &str) -> Result<ReactionNetwork, ParseError> {
    let mut names: Vec<String> = Vec::new();
    let mut fixed_order = false;
    let mut raw_steps: Vec<(Vec<(usize, u32)>, Vec<(usize, u32)>, String)> = Vec::new();

    for (line_idx, raw_line) in text.lines().enumerate() {
        let line_no = line_idx + 1;
        let line = match raw_line.find('#') {
            Some(p) => &raw_line[..p],
            None => raw_line,
        };
        if line.trim().is_empty() {
            continue;
        }
        let trimmed = line.trim_start();
        if let Some(rest) = trimmed.strip_prefix("species:") {
            let at = Location {
                line: line_no,
                column: 1,
            };
            if fixed_order || !raw_steps.is_empty() || !names.is_empty() {
                return Err(ParseError::Syntax {
                    at,
                    message: "species header must appear once, before any step".to_string(),
                });
            }
            for name in rest.split(',') {
                let name = name.trim();
                if name.is_empty() {
                    return Err(ParseError::Syntax {
                        at,
                        message: "empty name in species header".to_string(),
                    });
                }
                if names.iter().any(|n| n == name) {
                    return Err(ParseError::DuplicateSpecies {
                        at,
                        name: name.to_string(),
                    });
                }
                names.push(name.to_string());
            }
            fixed_order = true;
            continue;
        }

        // A step line. Locate the arrow.
        let (arrow_pos, arrow, reversible) = match (line.find("<=>"), line.find("->")) {
            (Some(p), _) => (p, "<=>", true),
            (None, Some(p)) => (p, "->", false),
            (None, None) => {
                return Err(ParseError::Syntax {
                    at: Location {
                        line: line_no,
                        column: 1,
                    },
                    message: "expected `->` or `<=>` in step".to_string(),
                })
            }
        };
        let lhs_text = &line[..arrow_pos];
        let rhs_text = &line[arrow_pos + arrow.len()..];
        if rhs_text.contains("->") || rhs_text.contains("<=>") {
            return Err(ParseError::Syntax {
                at: Location {
                    line: line_no,
                    column: arrow_pos + arrow.len() + 1,
                },
                message: "more than one arrow in step".to_string(),
            });
        }
        let lhs = parse_complex(lhs_text, line_no, 0, &mut names, fixed_order)?;
        let rhs = parse_complex(rhs_text, line_no, arrow_pos + arrow.len(), &mut names, fixed_order)?;
        if reversible {
            // Each direction reports itself as an irreversible step.
            let forward = format!("{} -> {}", lhs_text.trim(), rhs_text.trim());
            let backward = format!("{} -> {}", rhs_text.trim(), lhs_text.trim());
            raw_steps.push((lhs.clone(), rhs.clone(), forward));
            raw_steps.push((rhs, lhs, backward));
        } else {
            raw_steps.push((lhs, rhs, line.trim().to_string()));
        }
    }

    if raw_steps.is_empty() {
        return Err(ParseError::NoSteps);
    }
    ReactionNetwork::new(names, raw_steps).map_err(|e| match e {
        NetworkError::DuplicateName(name) => ParseError::DuplicateSpecies {
            at: Location { line: 1, column: 1 },
            name,
        },
        _ => ParseError::Syntax {
            at: Location { line: 1, column: 1 },
            message: e.to_string(),
        },
    })
}

/// Parses one side of a step into `(ordinal, coefficient)` pairs, merging
/// repeated names. Registers new species unless the order is fixed.
fn parse_complex(
    text: &str,
    line: usize,
    offset: usize,
    names: &mut Vec<String>,
    fixed_order: bool,
) -> Result<Vec<(usize, u32)>, ParseError> {
    let mut terms: BTreeMap<usize, u32> = BTreeMap::new();
    let mut pending_coef: Option<(u32, usize)> = None;
    let mut saw_term = false;
    let mut expect_term = true;
    let mut zero_complex = false;

    let mut token_start = None;
    let bytes = text.as_bytes();
    let mut tokens: Vec<(usize, &str)> = Vec::new();
    for (i, &b) in bytes.iter().enumerate() {
        if b.is_ascii_whitespace() {
            if let Some(s) = token_start.take() {
                tokens.push((s, &text[s..i]));
            }
        } else if token_start.is_none() {
            token_start = Some(i);
        }
    }
    if let Some(s) = token_start {
        tokens.push((s, &text[s..]));
    }

    let loc = |col: usize| Location {
        line,
        column: offset + col + 1,
    };

    for (col, tok) in tokens {
        if tok == "+" {
            if expect_term || pending_coef.is_some() {
                return Err(ParseError::Syntax {
                    at: loc(col),
                    message: "unexpected `+`".to_string(),
                });
            }
            expect_term = true;
            continue;
        }
        if zero_complex {
            return Err(ParseError::Syntax {
                at: loc(col),
                message: "zero complex `0` must stand alone".to_string(),
            });
        }
        if tok.chars().all(|c| c.is_ascii_digit()) {
            if pending_coef.is_some() {
                return Err(ParseError::Syntax {
                    at: loc(col),
                    message: "two consecutive integers".to_string(),
                });
            }
            let value: u32 = tok.parse().map_err(|_| ParseError::Syntax {
                at: loc(col),
                message: "integer too large".to_string(),
            })?;
            if value == 0 {
                if tok == "0" && !saw_term && expect_term {
                    zero_complex = true;
                    expect_term = false;
                    continue;
                }
                return Err(ParseError::ZeroCoefficient {
                    at: loc(col),
                    token: tok.to_string(),
                });
            }
            pending_coef = Some((value, col));
            continue;
        }
        // A term token, possibly with glued leading digits.
        let digits_end = tok.find(|c: char| !c.is_ascii_digit()).unwrap_or(tok.len());
        let (coef_str, name) = tok.split_at(digits_end);
        let mut coef = 1u32;
        if !coef_str.is_empty() {
            if pending_coef.is_some() {
                return Err(ParseError::Syntax {
                    at: loc(col),
                    message: "two consecutive integers".to_string(),
                });
            }
            coef = coef_str.parse().map_err(|_| ParseError::Syntax {
                at: loc(col),
                message: "integer too large".to_string(),
            })?;
            if coef == 0 {
                return Err(ParseError::ZeroCoefficient {
                    at: loc(col),
                    token: tok.to_string(),
                });
            }
        } else if let Some((c, _)) = pending_coef.take() {
            coef = c;
        }
        if name.is_empty() {
            return Err(ParseError::Syntax {
                at: loc(col),
                message: "expected species name".to_string(),
            });
        }
        if !expect_term {
            return Err(ParseError::Syntax {
                at: loc(col),
                message: "expected `+` between terms".to_string(),
            });
        }
        if let Some(c) = name.chars().find(|&c| !is_name_char(c)) {
            return Err(ParseError::Syntax {
                at: loc(col),
                message: format!("unknown token character `{c}` in `{tok}`"),
            });
        }
        let ordinal = match names.iter().position(|n| n == name) {
            Some(i) => i,
            None if fixed_order => {
                return Err(ParseError::UnknownSpecies {
                    at: loc(col),
                    name: name.to_string(),
                })
            }
            None => {
                names.push(name.to_string());
                names.len() - 1
            }
        };
        *terms.entry(ordinal).or_insert(0) += coef;
        saw_term = true;
        expect_term = false;
    }

    if let Some((_, col)) = pending_coef {
        return Err(ParseError::Syntax {
            at: loc(col),
            message: "dangling coefficient".to_string(),
        });
    }
    if expect_term && !zero_complex {
        return Err(ParseError::Syntax {
            at: loc(0),
            message: "empty complex (write `0` for the zero complex)".to_string(),
        });
    }
    Ok(terms.into_iter().collect())
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '*' | '(' | ')' | '^' | '\'' | '-' | '+' | '.')
}

// ---------------------------------------------------------------------------
// Formula parsing
// ---------------------------------------------------------------------------

/// IUPAC element symbols, for validating parsed symbols.
const ELEMENTS: &[&str] = &[
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al", "Si", "P", "S", "Cl",
    "Ar", "K", "Ca", "Sc", "Ti", "V", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As",
    "Se", "Br", "Kr", "Rb", "Sr", "Y", "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In",
    "Sn", "Sb", "Te", "I", "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd", "Pm", "Sm", "Eu", "Gd", "Tb",
    "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W", "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl",
    "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U", "Np", "Pu", "Am", "Cm", "Bk",
    "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs", "Mt", "Ds", "Rg", "Cn",
    "Nh", "Fl", "Mc", "Lv", "Ts", "Og",
];

fn is_element(sym: &str) -> bool {
    ELEMENTS.contains(&sym)
}

/// Best-effort decomposition of a species name into atom counts.
///
/// Understands element symbols, digit multipliers and parenthesized groups
/// with multipliers. Radical markers `*` are ignored anywhere; a `^` starts a
/// charge suffix and the rest of the token is ignored (it may only contain
/// digits, `+`, `-`); trailing `+`/`-` runs are ignored. Returns `None` for
/// anything else — the species is then opaque and carries no atoms.
pub fn parse_formula(token: &str) -> Option<AtomComposition> {
    let chars: Vec<char> = token.chars().collect();
    let mut pos = 0usize;
    let counts = parse_group(&chars, &mut pos, 0)?;
    if pos < chars.len() {
        return None;
    }
    if counts.is_empty() {
        return None;
    }
    Some(AtomComposition(counts))
}

fn parse_group(
    chars: &[char],
    pos: &mut usize,
    depth: usize,
) -> Option<BTreeMap<String, u32>> {
    let mut counts: BTreeMap<String, u32> = BTreeMap::new();
    while *pos < chars.len() {
        let c = chars[*pos];
        match c {
            '*' => {
                *pos += 1;
            }
            '(' => {
                *pos += 1;
                let inner = parse_group(chars, pos, depth + 1)?;
                if *pos >= chars.len() || chars[*pos] != ')' {
                    return None;
                }
                *pos += 1;
                let mult = parse_count(chars, pos);
                merge_counts(&mut counts, inner, mult)?;
            }
            ')' => {
                if depth == 0 {
                    return None;
                }
                return Some(counts);
            }
            '^' => {
                if depth != 0 {
                    return None;
                }
                // Charge suffix: validate and consume the rest of the token.
                *pos += 1;
                while *pos < chars.len() {
                    let t = chars[*pos];
                    if t.is_ascii_digit() || t == '+' || t == '-' || t == '*' {
                        *pos += 1;
                    } else {
                        return None;
                    }
                }
            }
            '+' | '-' => {
                if depth != 0 {
                    return None;
                }
                // Trailing charge signs only.
                while *pos < chars.len() {
                    let t = chars[*pos];
                    if t == '+' || t == '-' || t == '*' {
                        *pos += 1;
                    } else {
                        return None;
                    }
                }
            }
            c if c.is_ascii_uppercase() => {
                let mut sym = String::new();
                sym.push(c);
                *pos += 1;
                while *pos < chars.len() && chars[*pos].is_ascii_lowercase() {
                    sym.push(chars[*pos]);
                    *pos += 1;
                }
                if !is_element(&sym) {
                    return None;
                }
                let mult = parse_count(chars, pos);
                let entry = counts.entry(sym).or_insert(0);
                *entry = entry.checked_add(mult)?;
            }
            _ => return None,
        }
    }
    if depth != 0 {
        return None;
    }
    Some(counts)
}

fn parse_count(chars: &[char], pos: &mut usize) -> u32 {
    let start = *pos;
    while *pos < chars.len() && chars[*pos].is_ascii_digit() {
        *pos += 1;
    }
    if start == *pos {
        1
    } else {
        chars[start..*pos]
            .iter()
            .collect::<String>()
            .parse()
            .unwrap_or(u32::MAX)
    }
}

fn merge_counts(
    into: &mut BTreeMap<String, u32>,
    from: BTreeMap<String, u32>,
    mult: u32,
) -> Option<()> {
    for (sym, n) in from {
        let add = n.checked_mul(mult)?;
        let entry = into.entry(sym).or_insert(0);
        *entry = entry.checked_add(add)?;
    }
    Some(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn mm() -> ReactionNetwork {
        parse_network("E + S <=> C\nC -> E + P\n").unwrap()
    }

    fn emanuel_knorre() -> ReactionNetwork {
        parse_network("Cl2 -> 2Cl*\nCH4 + Cl* -> *CH3 + HCl\n*CH3 + Cl2 -> CH3Cl + Cl*\n")
            .unwrap()
    }

    #[test]
    fn michaelis_menten_shape() {
        let net = mm();
        let names: Vec<_> = net.species().iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, ["E", "S", "C", "P"]);
        assert_eq!(net.step_count(), 3);
        // E + S -> C, then the expanded backward step, then C -> E + P.
        assert_eq!(net.steps()[0].reactants, vec![(0, 1), (1, 1)]);
        assert_eq!(net.steps()[0].products, vec![(2, 1)]);
        assert_eq!(net.steps()[1].reactants, vec![(2, 1)]);
        assert_eq!(net.steps()[1].products, vec![(0, 1), (1, 1)]);
        assert_eq!(net.steps()[2].reactants, vec![(2, 1)]);
        assert_eq!(net.steps()[2].products, vec![(0, 1), (3, 1)]);
    }

    #[test]
    fn single_step_network() {
        let net = parse_network("X -> Y").unwrap();
        assert_eq!(net.species_count(), 2);
        assert_eq!(net.step_count(), 1);
        assert_eq!(net.steps()[0].reactants, vec![(0, 1)]);
        assert_eq!(net.steps()[0].products, vec![(1, 1)]);
    }

    #[test]
    fn autocatalytic_coefficients() {
        let net = parse_network("2X -> 3X").unwrap();
        assert_eq!(net.species_count(), 1);
        assert_eq!(net.steps()[0].reactants, vec![(0, 2)]);
        assert_eq!(net.steps()[0].products, vec![(0, 3)]);
    }

    #[test]
    fn reversible_equals_two_steps() {
        let a = parse_network("A <=> B").unwrap();
        let b = parse_network("A -> B\nB -> A").unwrap();
        assert_eq!(a.step_count(), b.step_count());
        for (x, y) in a.steps().iter().zip(b.steps()) {
            assert_eq!(x.reactants, y.reactants);
            assert_eq!(x.products, y.products);
        }
    }

    #[test]
    fn zero_complex_parses() {
        let net = parse_network("0 -> X").unwrap();
        assert_eq!(net.species_count(), 1);
        assert!(net.steps()[0].reactants.is_empty());
        assert!(net.has_zero_complex_reactant());
        let net = parse_network("X -> 0").unwrap();
        assert!(net.steps()[0].products.is_empty());
        assert!(!net.has_zero_complex_reactant());
    }

    #[test]
    fn header_fixes_order_and_rejects_unknown() {
        let net = parse_network("species: P, C, S, E\nE + S -> C\nC -> E + P").unwrap();
        let names: Vec<_> = net.species().iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, ["P", "C", "S", "E"]);
        let err = parse_network("species: A\nA -> B").unwrap_err();
        assert!(matches!(err, ParseError::UnknownSpecies { ref name, .. } if name == "B"));
    }

    #[test]
    fn duplicate_step_lines_are_kept() {
        let net = parse_network("X -> Y\nX -> Y").unwrap();
        assert_eq!(net.step_count(), 2);
    }

    #[test]
    fn merged_duplicate_terms() {
        let net = parse_network("X + X -> Y").unwrap();
        assert_eq!(net.steps()[0].reactants, vec![(0, 2)]);
    }

    #[test]
    fn coefficient_zero_is_an_error() {
        let err = parse_network("0X -> Y").unwrap_err();
        assert!(matches!(err, ParseError::ZeroCoefficient { .. }));
    }

    #[test]
    fn syntax_error_carries_location() {
        let err = parse_network("X -> Y\nX + -> Z").unwrap_err();
        match err {
            ParseError::Syntax { at, .. } => assert_eq!(at.line, 2),
            other => panic!("expected syntax error, got {other:?}"),
        }
        let err = parse_network("X -> Y\nX + + Y -> Z").unwrap_err();
        match err {
            ParseError::Syntax { at, .. } => {
                assert_eq!(at.line, 2);
                assert_eq!(at.column, 5);
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn no_steps_is_an_error() {
        assert_eq!(parse_network("# empty\n").unwrap_err(), ParseError::NoSteps);
    }

    #[test]
    fn formula_examples() {
        let c = parse_formula("CH4").unwrap();
        assert_eq!(c.0.get("C"), Some(&1));
        assert_eq!(c.0.get("H"), Some(&4));

        let c = parse_formula("CH3Cl").unwrap();
        assert_eq!(c.0.get("C"), Some(&1));
        assert_eq!(c.0.get("H"), Some(&3));
        assert_eq!(c.0.get("Cl"), Some(&1));

        // Hand expansion: Mn, then (OH) twice, trailing charge ignored.
        let c = parse_formula("Mn(OH)2+").unwrap();
        assert_eq!(c.0.get("Mn"), Some(&1));
        assert_eq!(c.0.get("O"), Some(&2));
        assert_eq!(c.0.get("H"), Some(&2));
    }

    #[test]
    fn formula_radicals_and_charges() {
        assert_eq!(
            parse_formula("*CH3").unwrap().0,
            parse_formula("CH3").unwrap().0
        );
        assert_eq!(
            parse_formula("Cl*").unwrap().0,
            parse_formula("Cl").unwrap().0
        );
        let c = parse_formula("BrO3^-").unwrap();
        assert_eq!(c.0.get("Br"), Some(&1));
        assert_eq!(c.0.get("O"), Some(&3));
        assert!(parse_formula("H^+").is_some());
    }

    #[test]
    fn opaque_names() {
        assert!(parse_formula("X_10").is_none());
        assert!(parse_formula("E").is_none()); // not an element symbol
        assert!(parse_formula("X10").is_none());
        assert!(parse_formula("Qq").is_none());
        assert!(parse_formula("*").is_none());
    }

    #[test]
    fn opaque_species_are_warned_and_atom_free() {
        let net = parse_network("E + S <=> C\nC -> E + P").unwrap();
        // S, C, P are element symbols; E is not.
        assert_eq!(net.opaque_species(), ["E"]);
        assert_eq!(net.atoms(), ["C", "P", "S"]);
    }

    #[test]
    fn reactant_species_examples() {
        let net = mm();
        let rs = net.reactant_species();
        let names: Vec<_> = rs.iter_ones().map(|m| net.species_name(m)).collect();
        assert_eq!(names, ["E", "S", "C"]);

        let net = parse_network("X -> Y").unwrap();
        assert_eq!(net.reactant_species().iter_ones().count(), 1);

        let net = emanuel_knorre();
        let rs = net.reactant_species();
        let names: Vec<_> = rs.iter_ones().map(|m| net.species_name(m)).collect();
        assert_eq!(names, ["Cl2", "Cl*", "CH4", "*CH3"]);
    }

    #[test]
    fn atoms_present_examples() {
        let net = emanuel_knorre();
        assert_eq!(net.atoms(), ["C", "Cl", "H"]);
        assert!(!net.atoms_present_tokens(&["HCl"]));
        assert!(net.atoms_present_tokens(&["HCl", "C"]));
        let all = BitSet::all_ones(net.species_count());
        assert!(net.atoms_present(&all));
        let hcl = BitSet::from_indices(net.species_count(), &[4]);
        assert!(!net.atoms_present(&hcl));
    }

    #[test]
    fn atomic_saving_emanuel_knorre() {
        let net = emanuel_knorre();
        let r = net.atomic_saving().unwrap();
        assert_eq!(r.numerator, BigUint::from(53u32));
        assert_eq!(r.denominator, BigUint::from(63u32));
        assert!((r.to_f64() - 0.8413).abs() < 5e-5);
    }

    #[test]
    fn atomic_saving_trivial_and_missing() {
        // Every species carries every atom.
        let net = parse_network("CH4 -> CH4 + CH4").unwrap();
        let r = net.atomic_saving().unwrap();
        assert_eq!(r.numerator, BigUint::from(1u32));
        assert_eq!(r.denominator, BigUint::from(1u32));

        // X1, X2 are opaque labels, so there is nothing atomic to save.
        let net = parse_network("X1 -> X2").unwrap();
        assert_eq!(net.atomic_saving().unwrap_err(), SavingError::NoAtoms);
    }

    #[test]
    fn atomic_saving_matches_exhaustive_scan() {
        for text in [
            "Cl2 -> 2Cl*\nCH4 + Cl* -> *CH3 + HCl\n*CH3 + Cl2 -> CH3Cl + Cl*",
            "H2 + O2 -> H2O\nH2O -> H2 + O2\nC -> CO2",
            "Na + Cl2 -> NaCl\nNaCl -> Na",
        ] {
            let net = parse_network(text).unwrap();
            let m = net.species_count();
            assert!(m <= 15);
            let mut covering = 0u64;
            for mask in 1u64..(1u64 << m) {
                let set = BitSet::from_indices(m, &(0..m).filter(|i| mask >> i & 1 == 1).collect::<Vec<_>>());
                if net.atoms_present(&set) {
                    covering += 1;
                }
            }
            let r = net.atomic_saving().unwrap();
            assert_eq!(r.numerator, BigUint::from(covering));
            assert_eq!(r.denominator, BigUint::from((1u64 << m) - 1));
        }
    }

    #[test]
    fn rxn_round_trip() {
        for text in [
            "E + S <=> C\nC -> E + P",
            "0 -> X\nX -> 0",
            "2X -> 3X",
            "Cl2 -> 2Cl*\nCH4 + Cl* -> *CH3 + HCl",
        ] {
            let net = parse_network(text).unwrap();
            let again = parse_network(&net.to_rxn_text()).unwrap();
            assert_eq!(net.species_count(), again.species_count());
            for (a, b) in net.species().iter().zip(again.species()) {
                assert_eq!(a.name, b.name);
            }
            assert_eq!(net.step_count(), again.step_count());
            for (a, b) in net.steps().iter().zip(again.steps()) {
                assert_eq!(a.reactants, b.reactants);
                assert_eq!(a.products, b.products);
            }
        }
    }
}
