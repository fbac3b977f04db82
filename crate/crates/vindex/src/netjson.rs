//! JSON emission of reaction networks.

use serde_json::{json, Map, Value};
use vindex_core::ReactionNetwork;

/// `{"species":[{"name","atoms":{...}}], "steps":[{"reactants":{name:coef},
/// "products":{...}}]}`
pub fn network_to_json(net: &ReactionNetwork) -> Value {
    let species: Vec<Value> = net
        .species()
        .iter()
        .map(|s| {
            let atoms: Map<String, Value> = s
                .composition
                .0
                .iter()
                .map(|(sym, count)| (sym.clone(), json!(count)))
                .collect();
            json!({ "name": s.name, "atoms": atoms })
        })
        .collect();
    let steps: Vec<Value> = net
        .steps()
        .iter()
        .map(|step| {
            let side = |pairs: &[(usize, u32)]| -> Map<String, Value> {
                pairs
                    .iter()
                    .map(|&(m, coef)| (net.species_name(m).to_string(), json!(coef)))
                    .collect()
            };
            json!({ "reactants": side(&step.reactants), "products": side(&step.products) })
        })
        .collect();
    json!({ "species": species, "steps": steps })
}
