//! Deterministic random network generator, used by the `gen` subcommand and
//! as the instance source for the engine-agreement test suites.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vindex_core::ReactionNetwork;

#[derive(Clone, Copy, Debug)]
pub struct GenParams {
    pub species: usize,
    pub steps: usize,
    /// Largest number of distinct species per complex.
    pub max_complex: usize,
    /// Atom alphabet size; 0 generates opaque label species.
    pub atoms: usize,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            species: 8,
            steps: 12,
            max_complex: 3,
            atoms: 0,
            seed: 0,
        }
    }
}

const ATOM_POOL: &[&str] = &[
    "H", "C", "N", "O", "S", "Cl", "P", "F", "Br", "I", "Na", "K",
];

/// Generates a seeded random network. Instances where some species has no
/// producing step are rejected and redrawn; if the parameters make that
/// unlikely to ever pass, the remaining orphans are patched into product
/// complexes so generation always terminates.
pub fn random_network(params: &GenParams) -> ReactionNetwork {
    assert!(params.species >= 1, "at least one species");
    assert!(params.steps >= 1, "at least one step");
    assert!(params.max_complex >= 1, "complexes need a species");
    assert!(params.atoms <= ATOM_POOL.len(), "atom alphabet too large");
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let names = species_names(&mut rng, params);

    for attempt in 0..50 {
        let mut steps = Vec::with_capacity(params.steps);
        for _ in 0..params.steps {
            let reactants = random_complex(&mut rng, params);
            let products = random_complex(&mut rng, params);
            steps.push((reactants, products));
        }
        let mut produced = vec![false; params.species];
        for (_, products) in &steps {
            for &(m, _) in products {
                produced[m] = true;
            }
        }
        let orphans: Vec<usize> = (0..params.species).filter(|&m| !produced[m]).collect();
        if !orphans.is_empty() {
            if attempt < 49 {
                continue;
            }
            for m in orphans {
                let r = rng.gen_range(0..steps.len());
                if !steps[r].1.iter().any(|&(p, _)| p == m) {
                    steps[r].1.push((m, 1));
                }
            }
        }
        let raw = steps
            .into_iter()
            .map(|(reactants, products)| (reactants, products, String::new()))
            .collect();
        let net = ReactionNetwork::new(names.clone(), raw).expect("generated network is valid");
        return net;
    }
    unreachable!("bounded retry loop always returns");
}

fn species_names(rng: &mut ChaCha8Rng, params: &GenParams) -> Vec<String> {
    if params.atoms == 0 {
        return (1..=params.species).map(|i| format!("X{i}")).collect();
    }
    let pool = &ATOM_POOL[..params.atoms];
    let mut names: Vec<String> = Vec::with_capacity(params.species);
    for _ in 0..params.species {
        for widen in 0..u32::MAX {
            let k = rng.gen_range(1..=pool.len().min(3));
            let mut picks: Vec<usize> = (0..pool.len()).collect();
            picks.shuffle(rng);
            picks.truncate(k);
            picks.sort_unstable();
            let name: String = picks
                .iter()
                .map(|&i| {
                    let count = rng.gen_range(1..=3 + widen);
                    if count == 1 {
                        pool[i].to_string()
                    } else {
                        format!("{}{}", pool[i], count)
                    }
                })
                .collect();
            if !names.contains(&name) {
                names.push(name);
                break;
            }
        }
    }
    names
}

fn random_complex(rng: &mut ChaCha8Rng, params: &GenParams) -> Vec<(usize, u32)> {
    let k = rng.gen_range(1..=params.max_complex.min(params.species));
    let mut picks: Vec<usize> = (0..params.species).collect();
    picks.shuffle(rng);
    picks.truncate(k);
    picks.sort_unstable();
    picks
        .into_iter()
        .map(|m| (m, rng.gen_range(1..=2u32)))
        .collect()
}
