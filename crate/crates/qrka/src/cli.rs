//! Command-line front end: seeded attack campaigns with machine-readable
//! reports, exhaustive circuit verification, netlist export, and unicity
//! estimates.
//!
//! Exit codes are a stable contract: 0 on full success, 1 when a campaign
//! ran but at least one trial failed (the report is still emitted), and 2 for
//! invalid flags or configurations. Reports are JSON by default (stable key
//! order) or CSV; wall-time fields are measured and excluded from the
//! byte-for-byte reproducibility guarantee, everything else is fully
//! determined by the flags plus the seed.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::attack::{self, AttackConfig, Backend, CampaignResult};
use crate::cipher::{self, CipherParams, ToyCipher, DESK_SCALE_MAX_KEY_BITS};
use crate::gf2::BitVec;
use crate::revsim::{
    build_comparator, build_controlled_copy, build_minmax_network, ReversibleCircuit,
    MAX_EXHAUSTIVE_WIDTH,
};

const REPORT_SCHEMA: u32 = 1;

#[derive(Parser)]
#[command(
    name = "qrka",
    version,
    about = "Quantum related-key attack simulator at desk scale"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seeded attack campaign and emit a per-trial report.
    Attack(AttackArgs),
    /// Exhaustively verify the reversible gadgets and print gate statistics.
    VerifyCircuits(VerifyCircuitsArgs),
    /// Write a gadget's netlist (one gate per line).
    EmitNetlist(EmitNetlistArgs),
    /// Print the unicity-distance estimate and, at desk scale, a brute-force
    /// verdict.
    Unicity(UnicityArgs),
}

#[derive(Args)]
struct AttackArgs {
    /// Key width in bits (desk-scale limit 20).
    #[arg(long, default_value_t = 12)]
    key_bits: usize,
    /// Block width in bits (multiple of 4, at most 64).
    #[arg(long, default_value_t = 12)]
    block_bits: usize,
    #[arg(long, default_value_t = cipher::DEFAULT_ROUNDS)]
    rounds: usize,
    /// Override the plaintext-ciphertext pair count (default: the unicity
    /// estimate for the parameters).
    #[arg(long)]
    pairs: Option<usize>,
    #[arg(long, default_value_t = 1)]
    trials: u64,
    /// Base seed; trial t runs on stream t. Falls back to QRKA_SEED.
    #[arg(long, env = "QRKA_SEED", default_value_t = 1)]
    seed: u64,
    /// Period-finding sample budget per trial (default 4 * key_bits).
    #[arg(long)]
    max_samples: Option<u64>,
    #[arg(long, value_enum, default_value_t = BackendArg::Statevector)]
    backend: BackendArg,
    /// Write the report to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
    /// Worker threads for the campaign; any value yields identical results.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    Statevector,
    Analytic,
}

impl From<BackendArg> for Backend {
    fn from(arg: BackendArg) -> Backend {
        match arg {
            BackendArg::Statevector => Backend::Statevector,
            BackendArg::Analytic => Backend::Analytic,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Args)]
struct VerifyCircuitsArgs {
    /// Largest circuit width for the exhaustive bijection check (capped at
    /// 16 wires; wider gadget sizes still get semantic spot checks while the
    /// comparison pair space stays enumerable).
    #[arg(long, default_value_t = MAX_EXHAUSTIVE_WIDTH)]
    max_width: usize,
}

#[derive(Args)]
struct EmitNetlistArgs {
    #[arg(long, value_enum)]
    gadget: GadgetArg,
    /// Data width of the gadget (bits per compared or copied value).
    #[arg(long)]
    width: usize,
    /// Write the netlist to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GadgetArg {
    Comparator,
    ControlledCopy,
    Minmax,
}

#[derive(Args)]
struct UnicityArgs {
    #[arg(long)]
    key_bits: usize,
    #[arg(long)]
    block_bits: usize,
    #[arg(long, default_value_t = cipher::DEFAULT_ROUNDS)]
    rounds: usize,
    #[arg(long, env = "QRKA_SEED", default_value_t = 1)]
    seed: u64,
}

/// Parses the process arguments and runs the selected command.
pub fn run() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Attack(args) => cmd_attack(args),
        Command::VerifyCircuits(args) => cmd_verify_circuits(args),
        Command::EmitNetlist(args) => cmd_emit_netlist(args),
        Command::Unicity(args) => cmd_unicity(args),
    }
}

fn usage_error(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(2)
}

// ---------------------------------------------------------------- attack --

#[derive(Serialize)]
struct AttackReport {
    schema: u32,
    command: &'static str,
    config: ConfigEcho,
    trials: Vec<TrialRow>,
    aggregate: AggregateRow,
}

#[derive(Serialize)]
struct ConfigEcho {
    key_bits: usize,
    block_bits: usize,
    rounds: usize,
    pairs: Option<usize>,
    trials: u64,
    seed: u64,
    max_samples: u64,
    backend: &'static str,
    jobs: usize,
}

#[derive(Serialize)]
struct TrialRow {
    trial: u64,
    seed: u64,
    stream: u64,
    success: bool,
    zero_key: bool,
    pairs: Option<usize>,
    samples: u64,
    superposition_queries: u64,
    classical_queries: u64,
    wall_ms: f64,
    failure: Option<String>,
}

#[derive(Serialize)]
struct AggregateRow {
    trials: u64,
    successes: u64,
    success_rate: f64,
    mean_samples: f64,
    max_samples: u64,
    mean_superposition_queries: f64,
    total_classical_queries: u64,
    total_decrypt_queries: u64,
    mean_wall_ms: f64,
}

fn build_report(config: &AttackConfig, result: &CampaignResult) -> AttackReport {
    let trials = result
        .runs
        .iter()
        .map(|run| TrialRow {
            trial: run.trial,
            seed: config.seed,
            stream: run.trial,
            success: run.outcome.success(),
            zero_key: run.outcome.zero_key_shortcut,
            pairs: run.outcome.pairs,
            samples: run.outcome.stats.samples_drawn,
            superposition_queries: run.outcome.stats.superposition_queries,
            classical_queries: run.outcome.stats.classical_encrypt_queries,
            wall_ms: run.outcome.stats.wall_time.as_secs_f64() * 1e3,
            failure: run.outcome.failure.as_ref().map(|f| f.to_string()),
        })
        .collect();
    let a = result.aggregate;
    AttackReport {
        schema: REPORT_SCHEMA,
        command: "attack",
        config: ConfigEcho {
            key_bits: config.params.key_bits,
            block_bits: config.params.block_bits,
            rounds: config.params.rounds,
            pairs: config.pairs_override,
            trials: config.trials,
            seed: config.seed,
            max_samples: config.max_samples,
            backend: config.backend.name(),
            jobs: config.jobs,
        },
        trials,
        aggregate: AggregateRow {
            trials: a.trials,
            successes: a.successes,
            success_rate: a.success_rate,
            mean_samples: a.mean_samples,
            max_samples: a.max_samples,
            mean_superposition_queries: a.mean_superposition_queries,
            total_classical_queries: a.total_classical_queries,
            total_decrypt_queries: a.total_decrypt_queries,
            mean_wall_ms: a.mean_wall_ms,
        },
    }
}

fn csv_escape(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn report_to_csv(report: &AttackReport) -> String {
    let mut out = String::from(
        "trial,seed,stream,success,zero_key,pairs,samples,superposition_queries,classical_queries,wall_ms,failure\n",
    );
    for row in &report.trials {
        let pairs = row.pairs.map_or(String::new(), |p| p.to_string());
        let failure = row.failure.as_deref().map_or(String::new(), csv_escape);
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            row.trial,
            row.seed,
            row.stream,
            row.success,
            row.zero_key,
            pairs,
            row.samples,
            row.superposition_queries,
            row.classical_queries,
            row.wall_ms,
            failure,
        ));
    }
    out
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), String> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| format!("cannot write {path:?}: {e}")),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_attack(args: AttackArgs) -> ExitCode {
    let params = match CipherParams::new(args.key_bits, args.block_bits, args.rounds) {
        Ok(p) => p,
        Err(e) => return usage_error(e),
    };
    let mut config = AttackConfig::new(params, args.seed);
    config.trials = args.trials;
    config.pairs_override = args.pairs;
    config.backend = args.backend.into();
    config.jobs = args.jobs;
    if let Some(max) = args.max_samples {
        config.max_samples = max;
    }
    if let Err(e) = config.validate() {
        return usage_error(e);
    }
    let result = match attack::run_campaign(&config) {
        Ok(r) => r,
        Err(e) => return usage_error(e),
    };
    let report = build_report(&config, &result);
    let rendered = match args.format {
        FormatArg::Json => {
            let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
            s.push('\n');
            s
        }
        FormatArg::Csv => report_to_csv(&report),
    };
    if let Err(e) = emit(&rendered, args.out.as_ref()) {
        return usage_error(e);
    }
    if result.all_succeeded() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

// ------------------------------------------------------- verify-circuits --

struct GadgetRow {
    gadget: &'static str,
    size: usize,
    circuit: ReversibleCircuit,
    bijective: Option<bool>,
    semantics: Option<bool>,
}

fn comparator_semantics(n: usize) -> bool {
    let c = build_comparator(n);
    for i in 0..1u64 << n {
        for j in 0..1u64 << n {
            let input = i | j << n;
            let output = c.run_bits(input);
            let ok = (output >> (2 * n) & 1 == 1) == (i < j)
                && output & !(1 << (2 * n)) == input;
            if !ok {
                return false;
            }
        }
    }
    true
}

fn controlled_copy_semantics(n: usize) -> bool {
    let c = build_controlled_copy(n);
    let mask = (1u64 << n) - 1;
    for input in 0..1u64 << (2 * n + 1) {
        let src = input & mask;
        let ctrl = input >> n & 1;
        let dst = input >> (n + 1) & mask;
        let expect = src | ctrl << n | (dst ^ if ctrl == 1 { src } else { 0 }) << (n + 1);
        if c.run_bits(input) != expect {
            return false;
        }
    }
    true
}

fn minmax_semantics(w: usize) -> bool {
    let net = build_minmax_network(w);
    let mask = (1u64 << w) - 1;
    for a in 0..1u64 << w {
        for b in 0..1u64 << w {
            let input = a | b << w;
            let output = net.run_bits(input);
            let cmp = output >> (2 * w) & 1;
            let lo = output >> (2 * w + 1) & mask;
            let hi = output >> (3 * w + 1) & mask;
            let scratch = output >> (4 * w + 1);
            let ok = (cmp == 1) == (a < b)
                && lo == a.min(b)
                && hi == a.max(b)
                && scratch == 0
                && output & ((1 << (2 * w)) - 1) == input;
            if !ok {
                return false;
            }
        }
    }
    true
}

fn cmd_verify_circuits(args: VerifyCircuitsArgs) -> ExitCode {
    let verify_cap = args.max_width.min(MAX_EXHAUSTIVE_WIDTH);
    if args.max_width > MAX_EXHAUSTIVE_WIDTH {
        eprintln!(
            "note: exhaustive bijection checks cap at width {MAX_EXHAUSTIVE_WIDTH}; \
             using {verify_cap}"
        );
    }
    // Semantic checks enumerate the data inputs only, so they reach farther
    // than full bijection checks: pair space at most 2^16, circuit in a word.
    let semantic_data_cap = 16;

    let mut rows: Vec<GadgetRow> = Vec::new();
    for n in 1.. {
        let circuit = build_comparator(n);
        let verify = circuit.width() <= verify_cap;
        let semantic = 2 * n <= semantic_data_cap && circuit.width() <= 64;
        if !verify && !semantic {
            break;
        }
        rows.push(GadgetRow {
            gadget: "comparator",
            size: n,
            bijective: verify.then(|| circuit.verify_reversible().unwrap()),
            semantics: semantic.then(|| comparator_semantics(n)),
            circuit,
        });
    }
    for n in 1.. {
        let circuit = build_controlled_copy(n);
        let verify = circuit.width() <= verify_cap;
        let semantic = 2 * n < semantic_data_cap;
        if !verify && !semantic {
            break;
        }
        rows.push(GadgetRow {
            gadget: "controlled-copy",
            size: n,
            bijective: verify.then(|| circuit.verify_reversible().unwrap()),
            semantics: semantic.then(|| controlled_copy_semantics(n)),
            circuit,
        });
    }
    for w in 1.. {
        let circuit = build_minmax_network(w);
        let verify = circuit.width() <= verify_cap;
        let semantic = 2 * w <= semantic_data_cap && circuit.width() <= 64;
        if !verify && !semantic {
            break;
        }
        rows.push(GadgetRow {
            gadget: "minmax",
            size: w,
            bijective: verify.then(|| circuit.verify_reversible().unwrap()),
            semantics: semantic.then(|| minmax_semantics(w)),
            circuit,
        });
    }

    println!(
        "{:<16} {:>4} {:>5} {:>5} {:>5} {:>8} {:>5} {:>5} {:>5} {:>9} {:>9}",
        "gadget", "size", "width", "not", "cnot", "toffoli", "cswap", "total", "depth", "bijective", "semantics"
    );
    let mut all_ok = true;
    for row in &rows {
        let stats = row.circuit.gate_stats();
        let render = |v: Option<bool>| match v {
            Some(true) => "pass",
            Some(false) => {
                "FAIL"
            }
            None => "-",
        };
        if row.bijective == Some(false) || row.semantics == Some(false) {
            all_ok = false;
        }
        println!(
            "{:<16} {:>4} {:>5} {:>5} {:>5} {:>8} {:>5} {:>5} {:>5} {:>9} {:>9}",
            row.gadget,
            row.size,
            row.circuit.width(),
            stats.not,
            stats.cnot,
            stats.toffoli,
            stats.cswap,
            stats.total(),
            stats.depth,
            render(row.bijective),
            render(row.semantics),
        );
    }
    if all_ok {
        println!("all gadget checks passed");
        ExitCode::SUCCESS
    } else {
        println!("GADGET CHECKS FAILED");
        ExitCode::from(1)
    }
}

// --------------------------------------------------------- emit-netlist --

fn cmd_emit_netlist(args: EmitNetlistArgs) -> ExitCode {
    if args.width == 0 {
        return usage_error("--width must be at least 1");
    }
    let (name, circuit) = match args.gadget {
        GadgetArg::Comparator => ("comparator", build_comparator(args.width)),
        GadgetArg::ControlledCopy => ("controlled-copy", build_controlled_copy(args.width)),
        GadgetArg::Minmax => ("minmax", build_minmax_network(args.width)),
    };
    let mut text = format!(
        "# {} gadget, data width {}, {} wires\n",
        name,
        args.width,
        circuit.width()
    );
    for reg in circuit.registers() {
        let first = reg.wires.first().copied().unwrap_or(0);
        let last = reg.wires.last().copied().unwrap_or(0);
        text.push_str(&format!(
            "# register {} ({:?}): wires {}..={}\n",
            reg.name, reg.role, first, last
        ));
    }
    text.push_str(&circuit.to_netlist());
    if let Err(e) = emit(&text, args.out.as_ref()) {
        return usage_error(e);
    }
    ExitCode::SUCCESS
}

// -------------------------------------------------------------- unicity --

fn cmd_unicity(args: UnicityArgs) -> ExitCode {
    if args.key_bits == 0 || args.block_bits == 0 {
        return usage_error("key and block widths must be positive");
    }
    let estimate = cipher::min_unicity_pairs(args.key_bits, args.block_bits);
    println!(
        "unicity estimate: r = {} pairs (smallest r with r > ceil({}/{}))",
        estimate, args.key_bits, args.block_bits
    );
    if args.key_bits > DESK_SCALE_MAX_KEY_BITS {
        println!(
            "key space 2^{} exceeds the desk-scale limit 2^{}; estimate only, no brute force",
            args.key_bits, DESK_SCALE_MAX_KEY_BITS
        );
        return ExitCode::SUCCESS;
    }

    let params = match CipherParams::new(args.key_bits, args.block_bits, args.rounds) {
        Ok(p) => p,
        Err(e) => return usage_error(e),
    };
    let cipher = ToyCipher::new(params);
    let mut rng = {
        use rand::SeedableRng;
        rand_chacha::ChaCha12Rng::seed_from_u64(args.seed)
    };
    let key = BitVec::random(params.key_bits, &mut rng);

    let canonical =
        cipher::BlockTuple::from_raw(params.block_bits, (0..estimate as u64).collect())
            .expect("canonical blocks fit");
    match cipher::key_separation(&cipher, &canonical) {
        Ok(report) => {
            println!(
                "canonical tuple (0..{}): separates all 2^{} keys: {} ({} colliding keys, {} distinct images)",
                estimate,
                params.key_bits,
                report.separates_all_keys(),
                report.colliding_keys,
                report.distinct_images
            );
        }
        Err(e) => return usage_error(e),
    }
    match cipher::verify_unicity(&cipher, &canonical, &key) {
        Ok(ok) => println!(
            "brute-force verdict for a random key (seed {}): canonical tuple determines it uniquely: {ok}",
            args.seed
        ),
        Err(e) => return usage_error(e),
    }
    match cipher::find_unicity_tuple(&cipher, &key, &mut rng, 16) {
        Ok(tuple) => {
            println!(
                "unicity tuple found with r = {} pairs: {:?}",
                tuple.len(),
                tuple.raw()
            );
            if tuple.len() > estimate {
                println!(
                    "note: the estimate r = {estimate} fell short; {} pairs were required",
                    tuple.len()
                );
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            println!("unicity tuple search failed: {e}");
            ExitCode::from(1)
        }
    }
}
