use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use ddb_core::bases::{family, BasisLabel};
use ddb_core::circuits::{
    element_circuits, gate_count, measurement_qasm, synth_basis_circuit, CountModel, GateCount, MeasurementSpec,
    PowerMode,
};
use ddb_core::experiment::{
    error_sweep, run_experiment, summarize, write_error_sweep, write_records, write_summary, ExperimentConfig,
};
use ddb_core::linalg::{frobenius_distance, random_rank_r_dm, uhlmann_fidelity};
use ddb_core::partitions::construct_partitions;
use ddb_core::reconstruct::{
    band_from_family, direct_full_with, rank_r_reconstruct, refine_sdp_with, CompletionOptions, DirectOptions, Method,
    SdpOptions,
};
use ddb_core::simulator::{appendix_b_state, family_probs, sample_table, CountsFile, QubitQutritState};
use ddb_core::{DensityMatrix, Error};

const SCHEMA: u32 = 1;

#[derive(Parser)]
#[command(name = "ddb", version, about = "Dense dual basis tomography toolkit")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Emit {
    Gatelist,
    Qasm,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Binary,
    SignedDigit,
}

impl From<Mode> for PowerMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Binary => PowerMode::Binary,
            Mode::SignedDigit => PowerMode::SignedDigit,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Expanded,
    BarencoEstimate,
}

#[derive(Subcommand)]
enum Command {
    /// Pair partitions of {0..d-1}.
    Partitions {
        #[arg(long)]
        dim: usize,
    },
    /// Measurement bases, all or one.
    Bases {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        label: Option<String>,
    },
    /// Measurement circuit for one basis of n qubits.
    Circuits {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        label: String,
        #[arg(long, value_enum, default_value = "gatelist")]
        emit: Emit,
        #[arg(long, value_enum, default_value = "binary")]
        mode: Mode,
        /// Append a gate-count report.
        #[arg(long)]
        counts: bool,
        #[arg(long, value_enum, default_value = "expanded")]
        count_model: Model,
    },
    /// The three measurements that give one element rho_jk.
    Element {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        j: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value = "binary")]
        mode: Mode,
    },
    /// Sample every basis for a random or named state and write a counts file.
    Simulate {
        #[arg(long)]
        dim: Option<usize>,
        /// Rank of a random state.
        #[arg(long)]
        rank: Option<usize>,
        /// Named qubit-qutrit state (dim 6): mixed, balanced, separable, entangled.
        #[arg(long)]
        state: Option<String>,
        #[arg(long)]
        shots: u64,
        /// Also write the true density matrix here.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Reconstruct a state from a counts file.
    Reconstruct {
        #[arg(long)]
        counts: PathBuf,
        #[arg(long, default_value = "direct")]
        method: String,
        /// Band radius for rank-r.
        #[arg(long)]
        rank: Option<usize>,
        /// Density matrix to score against.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Run a batch experiment from a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Per-point summary CSV (overrides the config).
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Direct-reconstruction error under imperfect bases as a function of eps.
    ErrorSweep {
        #[arg(long)]
        dim: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        eps_grid: Vec<f64>,
    },
}

enum Failure {
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Core(e.into())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Core(e.into())
    }
}

type Outcome = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn emit(out: &Option<PathBuf>, bytes: &[u8]) -> Outcome {
    match out {
        Some(p) => fs::write(p, bytes)?,
        None => io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn with_schema(mut v: Value) -> Value {
    if let Value::Object(m) = &mut v {
        m.insert("schema".into(), json!(SCHEMA));
    }
    v
}

fn emit_json(out: &Option<PathBuf>, v: Value) -> Outcome {
    let mut s = serde_json::to_string_pretty(&with_schema(v))?;
    s.push('\n');
    emit(out, s.as_bytes())
}

fn parse_label(s: &str) -> Result<BasisLabel, Failure> {
    s.parse().map_err(|_| usage(format!("invalid basis label `{s}`")))
}

fn read_json<T: serde::de::DeserializeOwned>(p: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(p).map_err(|e| usage(format!("cannot read {}: {e}", p.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", p.display())))
}

fn spec_json(spec: &MeasurementSpec) -> Value {
    json!({
        "label": spec.label.to_string(),
        "qubits": spec.circuit.n_qubits,
        "gates": spec.circuit.gates.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
        "layer": spec.layer_string(),
        "outcome_map": spec.outcome_map,
    })
}

/// One comment line; `prefix` is `#` for gate lists, `//` for QASM.
fn count_text(c: &GateCount, prefix: &str) -> String {
    let kinds: Vec<String> = c.by_kind.iter().map(|(k, v)| format!("{k}={v}")).collect();
    let head = format!("{prefix} count total={} ancillas={}", c.total, c.ancillas);
    if kinds.is_empty() {
        format!("{head}\n")
    } else {
        format!("{head} {}\n", kinds.join(" "))
    }
}

fn partitions(cli: &Cli, dim: usize) -> Outcome {
    let ps = construct_partitions(dim).map_err(|e| usage(e.to_string()))?;
    match cli.format.unwrap_or(Format::Json) {
        Format::Text => {
            let s: String = ps.partitions.iter().map(|p| format!("{p}\n")).collect();
            emit(&cli.out, s.as_bytes())
        }
        Format::Json => emit_json(&cli.out, serde_json::to_value(&ps)?),
        Format::Csv => Err(usage("partitions supports --format json or text")),
    }
}

fn bases(cli: &Cli, dim: usize, label: &Option<String>) -> Outcome {
    let fam = family(dim).map_err(|e| usage(e.to_string()))?;
    if cli.format == Some(Format::Text) {
        let mut s = String::new();
        for b in &fam.bases {
            if label.as_deref().is_some_and(|l| parse_label(l).ok() != Some(b.label)) {
                continue;
            }
            let kets: Vec<String> = b.vectors.iter().map(|v| v.to_string()).collect();
            s.push_str(&format!("{}: {}\n", b.label, kets.join(", ")));
        }
        if s.is_empty() {
            return Err(usage(format!("no basis {} for d={dim}", label.as_deref().unwrap_or(""))));
        }
        return emit(&cli.out, s.as_bytes());
    }
    let v = match label {
        None => fam.to_json(),
        Some(l) => {
            let label = parse_label(l)?;
            let b = fam
                .basis(label)
                .ok_or_else(|| usage(format!("no basis {label} for d={dim}")))?;
            b.to_json()
        }
    };
    emit_json(&cli.out, v)
}

fn check_qubits(n: usize) -> Outcome {
    if n == 0 || n > 16 {
        return Err(usage(format!("--n must be in 1..=16, got {n}")));
    }
    Ok(())
}

fn circuits(cli: &Cli, n: usize, label: &str, how: Emit, mode: Mode, counts: bool, model: Model) -> Outcome {
    check_qubits(n)?;
    let label = parse_label(label)?;
    let spec = synth_basis_circuit(n, label, mode.into()).map_err(|e| usage(e.to_string()))?;
    let model = match model {
        Model::Expanded => CountModel::Expanded,
        Model::BarencoEstimate => CountModel::BarencoEstimate,
    };
    let report = counts.then(|| gate_count(&spec.circuit, model));
    if cli.format == Some(Format::Json) {
        let mut v = spec_json(&spec);
        v["qasm"] = json!(measurement_qasm(&spec));
        if let Some(r) = &report {
            v["counts"] = serde_json::to_value(r)?;
        }
        return emit_json(&cli.out, v);
    }
    let mut s = match how {
        Emit::Gatelist => {
            let mut s = spec.circuit.to_gate_list();
            s.push_str(&format!("# layer {}\n", spec.layer_string()));
            let map: Vec<String> = spec.outcome_map.iter().map(|x| x.to_string()).collect();
            s.push_str(&format!("# outcomes {}\n", map.join(" ")));
            s
        }
        Emit::Qasm => measurement_qasm(&spec),
    };
    if let Some(r) = &report {
        s.push_str(&count_text(r, if matches!(how, Emit::Qasm) { "//" } else { "#" }));
    }
    emit(&cli.out, s.as_bytes())
}

fn element(cli: &Cli, n: usize, j: usize, k: usize, mode: Mode) -> Outcome {
    check_qubits(n)?;
    let e = element_circuits(n, j, k, mode.into()).map_err(|e| usage(e.to_string()))?;
    let o = e.outcomes;
    let recipe = format!(
        "rho[{j},{k}] = (p_{}({}) - i*p_{}({})) - (1 - i)/2 * (p_{}({}) + p_{}({}))",
        e.phi.label, o.phi_plus, e.psi.label, o.psi_plus, e.diag.label, o.diag_j, e.diag.label, o.diag_k
    );
    if cli.format == Some(Format::Text) {
        let mut s = format!("j={j} k={k} s={} shift={}\n", e.s, e.shift);
        for (role, spec) in [("diag", &e.diag), ("phi", &e.phi), ("psi", &e.psi)] {
            s.push_str(&format!("[{role}] {} layer {}\n", spec.label, spec.layer_string()));
            s.push_str(&spec.circuit.to_gate_list());
        }
        s.push_str(&recipe);
        s.push('\n');
        return emit(&cli.out, s.as_bytes());
    }
    emit_json(
        &cli.out,
        json!({
            "n": n, "j": j, "k": k, "s": e.s, "shift": e.shift,
            "measurements": {"diag": spec_json(&e.diag), "phi": spec_json(&e.phi), "psi": spec_json(&e.psi)},
            "outcomes": serde_json::to_value(o)?,
            "recipe": recipe,
        }),
    )
}

fn named_state(name: &str, seed: u64) -> Result<QubitQutritState, Failure> {
    Ok(match name {
        "mixed" => QubitQutritState::Mixed,
        "balanced" => QubitQutritState::Balanced,
        "separable" => QubitQutritState::Separable(seed),
        "entangled" => QubitQutritState::Entangled(seed),
        _ => return Err(usage(format!("unknown state `{name}`"))),
    })
}

fn simulate(cli: &Cli, dim: Option<usize>, rank: Option<usize>, state: &Option<String>, shots: u64, truth: &Option<PathBuf>) -> Outcome {
    let seed = cli.seed.unwrap_or(0);
    let rho: DensityMatrix = match (state, dim, rank) {
        (Some(name), d, None) if d.is_none_or(|d| d == 6) => appendix_b_state(named_state(name, seed)?),
        (None, Some(d), Some(r)) => random_rank_r_dm(d, r, seed).map_err(|e| usage(e.to_string()))?,
        _ => return Err(usage("give --dim with --rank, or --state (dim 6)")),
    };
    if shots == 0 {
        return Err(usage("--shots must be positive"));
    }
    let fam = family(rho.dim())?;
    let counts = sample_table(&family_probs(&rho, &fam)?, shots, seed, 0)?;
    if let Some(p) = truth {
        fs::write(p, serde_json::to_string(&rho)?)?;
    }
    emit_json(&cli.out, serde_json::to_value(CountsFile::from_counts(rho.dim(), shots, &counts))?)
}

fn reconstruct(cli: &Cli, counts: &Path, method: &str, rank: Option<usize>, truth: &Option<PathBuf>) -> Outcome {
    let file: CountsFile = read_json(counts)?;
    let method: Method = method.parse().map_err(|e: Error| usage(e.to_string()))?;
    let fam = family(file.dim).map_err(|e| usage(e.to_string()))?;
    let probs = file.to_probs().map_err(|e| usage(e.to_string()))?;
    let report = match method {
        Method::Direct => direct_full_with(&fam, &probs, DirectOptions::default())?,
        Method::Sdp => refine_sdp_with(&fam, &probs, SdpOptions::default())?,
        Method::RankR => {
            let r = rank.ok_or_else(|| usage("rank-r needs --rank"))?;
            let band = band_from_family(&fam, &probs, r).map_err(|e| usage(e.to_string()))?;
            rank_r_reconstruct(&band, CompletionOptions::default())?
        }
        Method::PauliCs => return Err(usage("pauli-cs does not read counts files; use `experiment`")),
    };
    let mut v = serde_json::to_value(&report)?;
    if let Some(p) = truth {
        let rho: DensityMatrix = read_json(p)?;
        v["frobenius"] = json!(frobenius_distance(&report.estimate, rho.matrix())?);
        v["fidelity"] = json!(uhlmann_fidelity(&rho, &report.density()?)?);
    }
    emit_json(&cli.out, v)
}

fn experiment(cli: &Cli, config: &Path, summary: &Option<PathBuf>) -> Outcome {
    let text = fs::read_to_string(config).map_err(|e| usage(format!("cannot read {}: {e}", config.display())))?;
    let mut cfg = ExperimentConfig::from_json(&text).map_err(|e| usage(e.to_string()))?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let records = run_experiment(&cfg)?;
    let mut buf = Vec::new();
    write_records(&mut buf, &records)?;
    emit(&cli.out.clone().or(cfg.csv.clone()), &buf)?;
    if let Some(p) = summary.clone().or(cfg.summary.clone()) {
        let mut buf = Vec::new();
        write_summary(&mut buf, &summarize(&records))?;
        fs::write(p, buf)?;
    }
    Ok(())
}

fn sweep(cli: &Cli, dim: usize, grid: &[f64]) -> Outcome {
    if grid.iter().any(|e| !e.is_finite() || *e < 0.0) {
        return Err(usage("eps values must be finite and non-negative"));
    }
    let s = error_sweep(dim, grid, cli.seed.unwrap_or(0)).map_err(|e| match e {
        e if e.is_numerical() => Failure::Core(e),
        e => usage(e.to_string()),
    })?;
    match cli.format.unwrap_or(Format::Csv) {
        Format::Json => emit_json(&cli.out, serde_json::to_value(&s)?),
        _ => {
            let mut buf = Vec::new();
            write_error_sweep(&mut buf, &s)?;
            emit(&cli.out, &buf)?;
            match s.slope {
                Some(m) => eprintln!("slope {m:.4}"),
                None => eprintln!("slope: fewer than two positive points, no fit"),
            }
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Partitions { dim } => partitions(cli, *dim),
        Command::Bases { dim, label } => bases(cli, *dim, label),
        Command::Circuits {
            n,
            label,
            emit,
            mode,
            counts,
            count_model,
        } => circuits(cli, *n, label, *emit, *mode, *counts, *count_model),
        Command::Element { n, j, k, mode } => element(cli, *n, *j, *k, *mode),
        Command::Simulate {
            dim,
            rank,
            state,
            shots,
            truth,
        } => simulate(cli, *dim, *rank, state, *shots, truth),
        Command::Reconstruct {
            counts,
            method,
            rank,
            truth,
        } => reconstruct(cli, counts, method, *rank, truth),
        Command::Experiment { config, summary } => experiment(cli, config, summary),
        Command::ErrorSweep { dim, eps_grid } => sweep(cli, *dim, eps_grid),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}
