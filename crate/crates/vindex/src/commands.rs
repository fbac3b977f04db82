//! Command implementations shared by the binary and the test suites.

use std::fmt;
use std::fs;
use std::path::Path;
use std::time::Instant;

use serde_json::{json, Map, Value};
use vindex_core::ilp;
use vindex_core::lexenum;
use vindex_core::minimal::DEFAULT_NODE_CAP;
use vindex_core::reaction::SavingError;
use vindex_core::volpert::{finite_indices, volpert_index, VolpertIndex};
use vindex_core::{
    minimal_ones, parse_network, powerset_base, BitSet, ComponentOrder, Engine, MinimalFamily,
    ReactionNetwork, SearchError, SearchOptions, VectorOrder,
};

use crate::gen::{random_network, GenParams};
use crate::netjson::network_to_json;

#[derive(Debug)]
pub enum CliError {
    Parse(String),
    UnknownSpecies(String),
    /// An engine guard tripped (base too large, node cap exhausted).
    Guard(String),
    NoAtoms,
    Io(String),
    /// `--verify` found an unsound or non-minimal set, or engines disagreed.
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 2,
            CliError::UnknownSpecies(_) => 3,
            CliError::Guard(_) => 4,
            CliError::NoAtoms => 5,
            CliError::Io(_) | CliError::Check(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::UnknownSpecies(m) => write!(f, "unknown species: {m}"),
            CliError::Guard(m) => write!(f, "engine guard: {m}"),
            CliError::NoAtoms => write!(f, "no species has an atomic composition"),
            CliError::Io(m) => write!(f, "{m}"),
            CliError::Check(m) => write!(f, "check failed: {m}"),
        }
    }
}

impl From<SearchError> for CliError {
    fn from(e: SearchError) -> Self {
        CliError::Guard(e.to_string())
    }
}

/// What a command hands back: plain text for the terminal, a JSON value for
/// `--json`.
#[derive(Debug)]
pub struct CmdOutput {
    pub text: String,
    pub json: Value,
}

pub fn load_network(path: &Path) -> Result<ReactionNetwork, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_network(&text).map_err(|e| CliError::Parse(format!("{}:{e}", path.display())))
}

fn resolve_species(net: &ReactionNetwork, names: &[String]) -> Result<BitSet, CliError> {
    let mut set = BitSet::new(net.species_count());
    for name in names {
        let name = name.trim();
        if name.is_empty() {
            continue;
        }
        match net.species_by_name(name) {
            Some(m) => set.insert(m),
            None => return Err(CliError::UnknownSpecies(name.to_string())),
        }
    }
    Ok(set)
}

fn network_summary(net: &ReactionNetwork) -> Value {
    json!({
        "species_count": net.species_count(),
        "step_count": net.step_count(),
        "atoms": net.atoms(),
    })
}

fn warnings(net: &ReactionNetwork) -> Vec<String> {
    net.opaque_species()
        .iter()
        .map(|n| format!("species `{n}` has no parseable atomic composition"))
        .collect()
}

pub fn node_cap_from_env() -> u64 {
    std::env::var("VINDEX_ILP_NODECAP")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_NODE_CAP)
}

fn index_value(ix: VolpertIndex) -> Value {
    match ix {
        VolpertIndex::Finite(k) => json!(k),
        VolpertIndex::Infinite => json!("inf"),
    }
}

// ---------------------------------------------------------------------------
// index
// ---------------------------------------------------------------------------

pub fn cmd_index(path: &Path, initial_names: &[String]) -> Result<CmdOutput, CliError> {
    let net = load_network(path)?;
    let initial = resolve_species(&net, initial_names)?;
    let started = Instant::now();
    let ix = volpert_index(&net, &initial);
    let elapsed_ms = started.elapsed().as_secs_f64() * 1e3;

    let mut text = String::new();
    let name_width = net
        .species()
        .iter()
        .map(|s| s.name.len())
        .max()
        .unwrap_or(7)
        .max("Species".len());
    text.push_str(&format!("{:name_width$}  Index\n", "Species"));
    for s in net.species() {
        text.push_str(&format!(
            "{:name_width$}  {}\n",
            s.name, ix.species[s.ordinal]
        ));
    }
    text.push('\n');
    let step_width = net
        .steps()
        .iter()
        .map(|s| s.source.len())
        .max()
        .unwrap_or(13)
        .max("Reaction step".len());
    text.push_str(&format!("{:step_width$}  Index\n", "Reaction step"));
    for step in net.steps() {
        text.push_str(&format!(
            "{:step_width$}  {}\n",
            step.source, ix.steps[step.ordinal]
        ));
    }

    let species_map: Map<String, Value> = net
        .species()
        .iter()
        .map(|s| (s.name.clone(), index_value(ix.species[s.ordinal])))
        .collect();
    let json = json!({
        "command": "index",
        "file": path.display().to_string(),
        "initial": initial.iter_ones().map(|m| net.species_name(m)).collect::<Vec<_>>(),
        "species": species_map,
        "steps": ix.steps.iter().map(|&s| index_value(s)).collect::<Vec<_>>(),
        "zero_complex_active": ix.zero_complex_active,
        "network": network_summary(&net),
        "timing_ms": { "index": elapsed_ms },
        "warnings": warnings(&net),
    });
    Ok(CmdOutput { text, json })
}

// ---------------------------------------------------------------------------
// minimal
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct MinimalArgs {
    pub intermediates: Vec<String>,
    pub atomic: bool,
    pub engine: Engine,
    pub cap: Option<usize>,
    pub component_order: ComponentOrder,
    pub vector_order: VectorOrder,
    pub shards: u32,
    pub base_cap: Option<usize>,
    pub verify: bool,
    pub quiet: bool,
}

impl Default for MinimalArgs {
    fn default() -> Self {
        MinimalArgs {
            intermediates: Vec::new(),
            atomic: false,
            engine: Engine::Brute,
            cap: None,
            component_order: ComponentOrder::Input,
            vector_order: VectorOrder::RevLex,
            shards: 1,
            base_cap: None,
            verify: false,
            quiet: true,
        }
    }
}

pub fn search_options(
    net: &ReactionNetwork,
    args: &MinimalArgs,
) -> Result<SearchOptions, CliError> {
    let mut opts = SearchOptions::new(net);
    opts.intermediates = resolve_species(net, &args.intermediates)?;
    opts.atomic_filter = args.atomic;
    opts.cardinality_cap = args.cap;
    opts.engine = args.engine;
    opts.order = args.vector_order;
    opts.component_order = args.component_order;
    opts.node_cap = node_cap_from_env();
    if let Some(cap) = args.base_cap {
        opts.base_limit = cap;
    }
    Ok(opts)
}

/// Runs the selected engine; the lexicographic engine fans out over shards
/// when asked to.
pub fn run_engine(
    net: &ReactionNetwork,
    opts: &SearchOptions,
    shards: u32,
    quiet: bool,
) -> Result<MinimalFamily, SearchError> {
    match opts.engine {
        Engine::Brute => vindex_core::minimal::brute_force_minimal_initials(net, opts),
        Engine::Ilp => ilp::minimal_family(net, opts),
        Engine::Lex => {
            if shards <= 1 {
                let mut progress = |stats: lexenum::EnumStats| {
                    if !quiet {
                        eprintln!(
                            "lex: {} candidates considered, {} tested",
                            stats.considered, stats.tested
                        );
                    }
                };
                lexenum::enumerate_minimal_with_progress(net, opts, &mut progress)
            } else {
                let base_size = powerset_base(net, &opts.intermediates).count_ones() as u32;
                let bits = (32 - (shards - 1).leading_zeros()).min(base_size);
                let tasks = 1u64 << bits;
                let results = std::thread::scope(|scope| {
                    let handles: Vec<_> = (0..tasks)
                        .map(|index| {
                            scope.spawn(move || {
                                lexenum::enumerate_shard(net, opts, bits, index, &mut |_| {})
                            })
                        })
                        .collect();
                    handles
                        .into_iter()
                        .map(|h| h.join().expect("shard worker panicked"))
                        .collect::<Vec<_>>()
                });
                let mut keepers = Vec::new();
                for r in results {
                    keepers.extend(r?);
                }
                Ok(minimal_ones(keepers))
            }
        }
    }
}

/// Re-checks soundness (all indices finite) and minimality (dropping any
/// member breaks finiteness) of every returned set.
pub fn verify_family(net: &ReactionNetwork, family: &MinimalFamily) -> Result<(), String> {
    for s in family.sets() {
        if !finite_indices(net, s) {
            return Err(format!("unsound set {:?}", family.names(net)));
        }
        for m in s.iter_ones() {
            let mut smaller = s.clone();
            smaller.remove(m);
            if finite_indices(net, &smaller) {
                return Err(format!(
                    "non-minimal set containing {}",
                    net.species_name(m)
                ));
            }
        }
    }
    Ok(())
}

pub fn cmd_minimal(path: &Path, args: &MinimalArgs) -> Result<CmdOutput, CliError> {
    let net = load_network(path)?;
    let opts = search_options(&net, args)?;
    let started = Instant::now();
    let family = run_engine(&net, &opts, args.shards, args.quiet)?;
    let elapsed_ms = started.elapsed().as_secs_f64() * 1e3;
    let verified = if args.verify {
        verify_family(&net, &family).map_err(CliError::Check)?;
        Some(true)
    } else {
        None
    };

    let names = family.names(&net);
    let mut text = String::new();
    for set in &names {
        if set.is_empty() {
            text.push_str("(empty set)\n");
        } else {
            text.push_str(&set.join(" "));
            text.push('\n');
        }
    }
    if !args.quiet {
        eprintln!(
            "{} sets, engine {}, {:.3} ms",
            family.len(),
            opts.engine,
            elapsed_ms
        );
    }

    let json = json!({
        "command": "minimal",
        "file": path.display().to_string(),
        "engine": opts.engine.to_string(),
        "minimal_sets": names,
        "elapsed_ms": elapsed_ms,
        "options": {
            "intermediates": opts.intermediates.iter_ones().map(|m| net.species_name(m)).collect::<Vec<_>>(),
            "atomic": opts.atomic_filter,
            "cap": opts.cardinality_cap,
            "order": match opts.component_order {
                ComponentOrder::Input => "input",
                ComponentOrder::Frequency => "frequency",
            },
            "vector_order": match opts.order {
                VectorOrder::Lex => "lex",
                VectorOrder::RevLex => "revlex",
            },
            "shards": args.shards,
        },
        "verified": verified,
        "network": network_summary(&net),
        "warnings": warnings(&net),
    });
    Ok(CmdOutput { text, json })
}

// ---------------------------------------------------------------------------
// saving
// ---------------------------------------------------------------------------

pub fn cmd_saving(path: &Path) -> Result<CmdOutput, CliError> {
    let net = load_network(path)?;
    let started = Instant::now();
    let ratio = net.atomic_saving().map_err(|e| match e {
        SavingError::NoAtoms => CliError::NoAtoms,
    })?;
    let elapsed_ms = started.elapsed().as_secs_f64() * 1e3;
    let text = format!("{:.4}\n", ratio.to_f64());
    let json = json!({
        "command": "saving",
        "file": path.display().to_string(),
        "ratio": ratio.to_f64(),
        "numerator": ratio.numerator.to_string(),
        "denominator": ratio.denominator.to_string(),
        "network": network_summary(&net),
        "timing_ms": { "saving": elapsed_ms },
        "warnings": warnings(&net),
    });
    Ok(CmdOutput { text, json })
}

// ---------------------------------------------------------------------------
// export-ilp
// ---------------------------------------------------------------------------

pub fn cmd_export_ilp(path: &Path, output: Option<&Path>) -> Result<CmdOutput, CliError> {
    let net = load_network(path)?;
    let model = ilp::build_model(&net);
    let lp = ilp::export_lp(&model);
    let text = match output {
        Some(out) => {
            fs::write(out, &lp).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
            format!(
                "wrote {} ({} binaries, {} rows)\n",
                out.display(),
                model.var_count(),
                model.rows.len()
            )
        }
        None => lp,
    };
    let json = json!({
        "command": "export-ilp",
        "file": path.display().to_string(),
        "output": output.map(|p| p.display().to_string()),
        "variables": model.var_count(),
        "rows": model.rows.len(),
        "network": network_summary(&net),
    });
    Ok(CmdOutput { text, json })
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

pub fn cmd_bench(
    path: &Path,
    engines: &[Engine],
    reps: usize,
    csv: Option<&Path>,
    seed: Option<u64>,
) -> Result<CmdOutput, CliError> {
    if engines.is_empty() {
        return Err(CliError::Io("no engines requested".into()));
    }
    let reps = reps.max(1);
    let net = load_network(path)?;
    let mut rows: Vec<Value> = Vec::new();
    let mut families: Vec<(Engine, MinimalFamily)> = Vec::new();
    let mut text = format!("{:8}  {:>10}  {:>6}\n", "engine", "median_ms", "sets");
    for &engine in engines {
        let mut opts = SearchOptions::new(&net);
        opts.engine = engine;
        opts.node_cap = node_cap_from_env();
        let mut timings = Vec::with_capacity(reps);
        let mut family = MinimalFamily::default();
        for _ in 0..reps {
            let started = Instant::now();
            family = run_engine(&net, &opts, 1, true)?;
            timings.push(started.elapsed().as_secs_f64() * 1e3);
        }
        timings.sort_by(f64::total_cmp);
        let median = timings[timings.len() / 2];
        text.push_str(&format!(
            "{:8}  {:>10.3}  {:>6}\n",
            engine.to_string(),
            median,
            family.len()
        ));
        rows.push(json!({
            "engine": engine.to_string(),
            "median_ms": median,
            "reps": reps,
            "sets": family.len(),
        }));
        families.push((engine, family));
    }
    let agreement = families.windows(2).all(|w| w[0].1 == w[1].1);
    if !agreement {
        let detail: Vec<String> = families
            .iter()
            .map(|(e, f)| format!("{e}: {} sets", f.len()))
            .collect();
        return Err(CliError::Check(format!(
            "engines disagree: {}",
            detail.join(", ")
        )));
    }
    if let Some(csv_path) = csv {
        let mut body = String::from("dataset,engine,reps,median_ms,sets\n");
        for row in &rows {
            body.push_str(&format!(
                "{},{},{},{},{}\n",
                path.display(),
                row["engine"].as_str().unwrap(),
                row["reps"],
                row["median_ms"],
                row["sets"]
            ));
        }
        fs::write(csv_path, body)
            .map_err(|e| CliError::Io(format!("{}: {e}", csv_path.display())))?;
    }
    let json = json!({
        "command": "bench",
        "file": path.display().to_string(),
        "rows": rows,
        "agreement": agreement,
        "seed": seed,
        "network": network_summary(&net),
    });
    Ok(CmdOutput { text, json })
}

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

pub fn cmd_gen(params: &GenParams, output: Option<&Path>) -> Result<CmdOutput, CliError> {
    let net = random_network(params);
    let rxn = net.to_rxn_text();
    let text = match output {
        Some(out) => {
            fs::write(out, &rxn).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
            format!(
                "wrote {} ({} species, {} steps, seed {})\n",
                out.display(),
                net.species_count(),
                net.step_count(),
                params.seed
            )
        }
        None => rxn,
    };
    let mut json = network_to_json(&net);
    json["command"] = json!("gen");
    json["seed"] = json!(params.seed);
    Ok(CmdOutput { text, json })
}
