use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use vindex::commands::{
    self, CliError, CmdOutput, MinimalArgs,
};
use vindex::gen::GenParams;
use vindex_core::{ComponentOrder, Engine, VectorOrder};

#[derive(Parser)]
#[command(
    name = "vindex",
    version,
    about = "Volpert indices and minimal initial species sets of reaction networks"
)]
struct Cli {
    /// Emit a JSON report instead of plain text.
    #[arg(long, global = true)]
    json: bool,
    /// Suppress progress and summary lines on standard error.
    #[arg(long, global = true)]
    quiet: bool,
    /// Seed echoed into reports and used by `gen`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum EngineArg {
    Brute,
    Ilp,
    Lex,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Engine {
        match e {
            EngineArg::Brute => Engine::Brute,
            EngineArg::Ilp => Engine::Ilp,
            EngineArg::Lex => Engine::Lex,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum OrderArg {
    Input,
    Frequency,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum VectorOrderArg {
    Lex,
    Revlex,
}

#[derive(Subcommand)]
enum Command {
    /// Compute Volpert indices of species and steps for an initial set.
    Index {
        file: PathBuf,
        /// Comma-separated initial species names (may be empty).
        #[arg(long, value_delimiter = ',', num_args = 0.., default_value = "")]
        initial: Vec<String>,
    },
    /// Enumerate all inclusion-minimal initial species sets.
    Minimal {
        file: PathBuf,
        /// Species excluded from initial sets, comma separated.
        #[arg(long, value_delimiter = ',')]
        intermediates: Vec<String>,
        /// Skip candidates that do not contain every atom of the network.
        #[arg(long)]
        atomic: bool,
        #[arg(long, value_enum, default_value = "brute")]
        engine: EngineArg,
        /// Largest cardinality of minimal sets to look for.
        #[arg(long)]
        cap: Option<usize>,
        /// Species-to-position assignment for the lex engine.
        #[arg(long, value_enum, default_value = "input")]
        order: OrderArg,
        /// Enumeration order for the lex engine.
        #[arg(long, value_enum, default_value = "revlex")]
        vector_order: VectorOrderArg,
        /// Static shard count for the lex engine.
        #[arg(long, default_value_t = 1)]
        shards: u32,
        /// Override the brute-force base-size guard (default 25).
        #[arg(long)]
        base_cap: Option<usize>,
        /// Re-check soundness and minimality of every returned set.
        #[arg(long)]
        verify: bool,
    },
    /// Write the 0-1 program for a network in CPLEX LP format.
    ExportIlp {
        file: PathBuf,
        /// Output path; standard output when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Fraction of species subsets containing every atom of the network.
    Saving { file: PathBuf },
    /// Time the engines against each other on one network.
    Bench {
        file: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "brute,ilp,lex")]
        engines: Vec<EngineArg>,
        #[arg(long, default_value_t = 3)]
        reps: usize,
        /// Also write the rows as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Emit a seeded random reaction network as a .rxn file.
    Gen {
        #[arg(long, default_value_t = 8)]
        species: usize,
        #[arg(long, default_value_t = 12)]
        steps: usize,
        /// Largest number of distinct species per complex.
        #[arg(long, default_value_t = 3)]
        max_complex: usize,
        /// Atom alphabet size; 0 generates opaque label species.
        #[arg(long, default_value_t = 0)]
        atoms: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn run(cli: &Cli) -> Result<CmdOutput, CliError> {
    match &cli.command {
        Command::Index { file, initial } => commands::cmd_index(file, initial),
        Command::Minimal {
            file,
            intermediates,
            atomic,
            engine,
            cap,
            order,
            vector_order,
            shards,
            base_cap,
            verify,
        } => {
            let args = MinimalArgs {
                intermediates: intermediates.clone(),
                atomic: *atomic,
                engine: (*engine).into(),
                cap: *cap,
                component_order: match order {
                    OrderArg::Input => ComponentOrder::Input,
                    OrderArg::Frequency => ComponentOrder::Frequency,
                },
                vector_order: match vector_order {
                    VectorOrderArg::Lex => VectorOrder::Lex,
                    VectorOrderArg::Revlex => VectorOrder::RevLex,
                },
                shards: *shards,
                base_cap: *base_cap,
                verify: *verify,
                quiet: cli.quiet,
            };
            commands::cmd_minimal(file, &args)
        }
        Command::ExportIlp { file, output } => {
            commands::cmd_export_ilp(file, output.as_deref())
        }
        Command::Saving { file } => commands::cmd_saving(file),
        Command::Bench {
            file,
            engines,
            reps,
            csv,
        } => {
            let engines: Vec<Engine> = engines.iter().map(|&e| e.into()).collect();
            commands::cmd_bench(file, &engines, *reps, csv.as_deref(), cli.seed)
        }
        Command::Gen {
            species,
            steps,
            max_complex,
            atoms,
            output,
        } => {
            let params = GenParams {
                species: *species,
                steps: *steps,
                max_complex: *max_complex,
                atoms: *atoms,
                seed: cli.seed.unwrap_or(0),
            };
            commands::cmd_gen(&params, output.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&out.json).unwrap());
            } else {
                print!("{}", out.text);
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("vindex: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
