//! Seeded batch experiments: simulate, reconstruct and score over a grid of
//! (state, method, settings, shots, trial), plus the imperfect-basis sweep.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bases::{family, BasisLabel, DdbFamily};
use crate::error::{Error, Result};
use crate::linalg::random::{random_rank_r_dm_with, rng_for};
use crate::linalg::{eigh, frobenius_distance, uhlmann_fidelity};
use crate::partitions::select_band_partitions;
use crate::reconstruct::{
    complete_known_entries, direct_full_with, known_entries_from_partitions, pauli_cs_baseline, pauli_expectations,
    refine_sdp_with, singular_blocks, CompletionOptions, DirectOptions, Method, PauliOptions, ReconstructionReport,
    SdpOptions,
};
use crate::simulator::{
    appendix_b_state, estimate_probs, family_probs, perturbed_probs, sample_table, ProbTable, QubitQutritState,
};
use crate::state::DensityMatrix;

pub const SCHEMA: u32 = 1;

pub const CSV_HEADER: [&str; 12] = [
    "d",
    "r",
    "method",
    "shots",
    "trial",
    "frobenius",
    "fidelity",
    "iters",
    "flags",
    "state",
    "settings",
    "projectors",
];

/// A point of the shots schedule; `exact` uses the Born probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Shots {
    Exact,
    Finite(u64),
}

impl fmt::Display for Shots {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shots::Exact => f.write_str("exact"),
            Shots::Finite(n) => write!(f, "{n}"),
        }
    }
}

impl FromStr for Shots {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "exact" {
            return Ok(Shots::Exact);
        }
        match s.parse::<u64>() {
            Ok(n) if n >= 1 => Ok(Shots::Finite(n)),
            _ => Err(Error::invalid(format!("shots must be `exact` or a positive integer, got `{s}`"))),
        }
    }
}

impl Serialize for Shots {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Shots::Exact => s.serialize_str("exact"),
            Shots::Finite(n) => s.serialize_u64(*n),
        }
    }
}

impl<'de> Deserialize<'de> for Shots {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(u64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(0) => Err(serde::de::Error::custom("shots must be positive")),
            Raw::N(n) => Ok(Shots::Finite(n)),
            Raw::S(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Which partitions the rank-r method measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SettingsMode {
    /// The band selection for the state's rank.
    #[default]
    Band,
    /// Growing unions of band selections for radius 1, 2, .., d−1.
    Sweep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    /// Hilbert-space dimension; alternatively give `n` qubits.
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub n: Option<usize>,
    /// Ranks of the random test states.
    #[serde(default)]
    pub ranks: Vec<usize>,
    /// Named qubit-qutrit states (`mixed`, `balanced`, `separable`,
    /// `entangled`); requires `dim = 6`.
    #[serde(default)]
    pub states: Vec<String>,
    pub shots: Vec<Shots>,
    pub trials: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    #[serde(default)]
    pub settings: SettingsMode,
    /// Observable counts for the Pauli baseline; empty means `r·n`.
    #[serde(default)]
    pub pauli_counts: Vec<usize>,
    #[serde(default)]
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub summary: Option<PathBuf>,
    #[serde(default)]
    pub sdp: SdpOptions,
    #[serde(default)]
    pub completion: CompletionOptions,
    #[serde(default)]
    pub pauli: PauliOptions,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: ExperimentConfig = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn dimension(&self) -> Result<usize> {
        match (self.dim, self.n) {
            (Some(d), None) => Ok(d),
            (None, Some(n)) if (1..=16).contains(&n) => Ok(1 << n),
            (None, Some(n)) => Err(Error::invalid(format!("qubit count {n} outside 1..=16"))),
            (Some(d), Some(n)) if n < usize::BITS as usize && d == 1 << n => Ok(d),
            (Some(_), Some(_)) => Err(Error::invalid("`dim` and `n` disagree")),
            (None, None) => Err(Error::invalid("config needs `dim` or `n`")),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA {
            return Err(Error::invalid(format!("unsupported schema {}", self.schema)));
        }
        let d = self.dimension()?;
        if d < 2 {
            return Err(Error::InvalidDimension {
                dim: d,
                reason: "experiments need d >= 2",
            });
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if self.methods.is_empty() {
            return Err(Error::invalid("methods must not be empty"));
        }
        if self.shots.is_empty() {
            return Err(Error::invalid("shots schedule must not be empty"));
        }
        if self.ranks.is_empty() && self.states.is_empty() {
            return Err(Error::invalid("give `ranks` or `states`"));
        }
        if let Some(r) = self.ranks.iter().find(|&&r| r == 0 || r > d) {
            return Err(Error::invalid(format!("rank {r} outside 1..={d}")));
        }
        for s in &self.states {
            parse_state(s, 0)?;
            if d != 6 {
                return Err(Error::invalid(format!("state `{s}` needs dim 6")));
            }
        }
        if self.methods.contains(&Method::PauliCs) && !d.is_power_of_two() {
            return Err(Error::InvalidDimension {
                dim: d,
                reason: "the Pauli baseline needs a power of two",
            });
        }
        if self.pauli_counts.contains(&0) {
            return Err(Error::invalid("Pauli observable counts must be positive"));
        }
        Ok(())
    }
}

fn parse_state(name: &str, seed: u64) -> Result<QubitQutritState> {
    Ok(match name {
        "mixed" => QubitQutritState::Mixed,
        "balanced" => QubitQutritState::Balanced,
        "separable" => QubitQutritState::Separable(seed),
        "entangled" => QubitQutritState::Entangled(seed),
        _ => return Err(Error::invalid(format!("unknown state `{name}`"))),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub d: usize,
    pub r: usize,
    pub method: Method,
    pub shots: Shots,
    pub trial: usize,
    pub frobenius: f64,
    pub fidelity: f64,
    pub iters: usize,
    pub flags: Vec<String>,
    pub state: String,
    /// Distinct measurement settings (bases, or Pauli observables).
    pub settings: usize,
    /// Projectors measured: settings times outcomes per setting.
    pub projectors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub d: usize,
    pub r: usize,
    pub state: String,
    pub method: Method,
    pub settings: usize,
    pub projectors: usize,
    pub shots: Shots,
    pub n: usize,
    pub frobenius_mean: f64,
    pub frobenius_std: f64,
    pub fidelity_mean: f64,
    pub fidelity_std: f64,
    pub fidelity_median: f64,
}

#[derive(Debug, Clone, Copy)]
enum Source {
    Random(usize),
    Named(usize),
}

/// One reconstruction variant of a method: the partitions (DDB) or the
/// observable count (Pauli).
#[derive(Debug, Clone)]
enum Variant {
    Full,
    Partitions(Vec<usize>),
    Paulis(usize),
}

struct Task {
    source: Source,
    source_idx: usize,
    method: Method,
    variant: Variant,
    shots: Shots,
    trial: usize,
}

/// SplitMix64 finalizer, used to decorrelate derived seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn trial_seed(seed: u64, source_idx: usize, trial: usize) -> u64 {
    mix(seed ^ mix(((source_idx as u64) << 32) | trial as u64))
}

fn numerical_rank(rho: &DensityMatrix) -> Result<usize> {
    Ok(eigh(rho.matrix())?.eigenvalues.iter().filter(|&&l| l > 1e-10).count())
}

fn partition_plan(fam: &DdbFamily, r: usize, mode: SettingsMode) -> Result<Vec<Vec<usize>>> {
    let d = fam.dim;
    let all: Vec<usize> = (1..=fam.partitions.len()).collect();
    let band = |b: usize| -> Result<Vec<usize>> {
        if b >= d - 1 {
            Ok(all.clone())
        } else {
            select_band_partitions(&fam.partitions, b)
        }
    };
    match mode {
        SettingsMode::Band => Ok(vec![band(r)?]),
        SettingsMode::Sweep => {
            let mut acc = BTreeSet::new();
            let mut out = Vec::new();
            for b in 1..d {
                let before = acc.len();
                acc.extend(band(b)?);
                if acc.len() > before {
                    out.push(acc.iter().copied().collect());
                }
            }
            Ok(out)
        }
    }
}

fn ddb_labels(fam: &DdbFamily, partitions: &[usize]) -> BTreeSet<BasisLabel> {
    let mut labels = BTreeSet::new();
    if fam.dim.is_multiple_of(2) {
        labels.insert(BasisLabel::B0);
    } else {
        labels.extend((1..=fam.dim).map(BasisLabel::B));
    }
    for &t in partitions {
        labels.insert(BasisLabel::B(t));
        labels.insert(BasisLabel::C(t));
    }
    labels
}

struct Prepared {
    fam: DdbFamily,
    d: usize,
}

fn build_state(cfg: &ExperimentConfig, d: usize, source: Source, source_idx: usize, trial: usize) -> Result<DensityMatrix> {
    let seed = trial_seed(cfg.seed, source_idx, trial);
    match source {
        Source::Random(r) => random_rank_r_dm_with(&mut rng_for(seed, 0), d, r),
        Source::Named(i) => Ok(appendix_b_state(parse_state(&cfg.states[i], seed)?)),
    }
}

fn run_task(cfg: &ExperimentConfig, prep: &Prepared, task: &Task) -> Result<TrialRecord> {
    let d = prep.d;
    let fam = &prep.fam;
    let rho = build_state(cfg, d, task.source, task.source_idx, task.trial)?;
    let r = match task.source {
        Source::Random(r) => r,
        Source::Named(_) => numerical_rank(&rho)?,
    };
    let seed = trial_seed(cfg.seed, task.source_idx, task.trial);
    let exact = family_probs(&rho, fam)?;
    let probs_for = |labels: &BTreeSet<BasisLabel>| -> Result<ProbTable> {
        let table: ProbTable = exact
            .iter()
            .filter(|(l, _)| labels.contains(l))
            .map(|(l, p)| (*l, p.clone()))
            .collect();
        match task.shots {
            Shots::Exact => Ok(table),
            Shots::Finite(s) => Ok(sample_table(&table, s, seed, task.trial as u64)?
                .into_iter()
                .map(|(l, c)| (l, estimate_probs(&c)))
                .collect()),
        }
    };

    let (report, settings, projectors): (ReconstructionReport, usize, usize) = match (&task.method, &task.variant) {
        (Method::Direct, _) => {
            let labels: BTreeSet<_> = fam.labels().into_iter().collect();
            let rep = direct_full_with(fam, &probs_for(&labels)?, DirectOptions::default())?;
            (rep, labels.len(), labels.len() * d)
        }
        (Method::Sdp, _) => {
            let labels: BTreeSet<_> = fam.labels().into_iter().collect();
            let rep = refine_sdp_with(fam, &probs_for(&labels)?, cfg.sdp)?;
            (rep, labels.len(), labels.len() * d)
        }
        (Method::RankR, Variant::Partitions(parts)) => {
            let labels = ddb_labels(fam, parts);
            let known = known_entries_from_partitions(fam, &probs_for(&labels)?, parts)?;
            let mut rep = complete_known_entries(&known, cfg.completion)?;
            rep.method = Method::RankR;
            if known.band_radius() >= r && r < d {
                rep.singular_flags = singular_blocks(&known.values, r, cfg.completion.singular_threshold)?;
            }
            (rep, labels.len(), labels.len() * d)
        }
        (Method::PauliCs, Variant::Paulis(m)) => {
            let shots = match task.shots {
                Shots::Exact => None,
                Shots::Finite(s) => Some(s),
            };
            let m = (*m).min(d * d);
            let data = pauli_expectations(&rho, m, shots, seed)?;
            let rep = pauli_cs_baseline(&data, d, cfg.pauli)?;
            (rep, m, 2 * m)
        }
        _ => unreachable!("variant does not match method"),
    };
    let frobenius = frobenius_distance(&report.estimate, rho.matrix())?;
    let fidelity = uhlmann_fidelity(&rho, &report.density()?)?;
    Ok(TrialRecord {
        d,
        r,
        method: task.method,
        shots: task.shots,
        trial: task.trial,
        frobenius,
        fidelity,
        iters: report.iterations,
        flags: report.flag_tokens(),
        state: match task.source {
            Source::Random(_) => "random".to_string(),
            Source::Named(i) => cfg.states[i].clone(),
        },
        settings,
        projectors,
    })
}

/// Runs every (state, method, settings, shots, trial) combination. Trials
/// run in parallel; the output order is fixed by the config.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    let d = cfg.dimension()?;
    let fam = family(d)?;
    let mut states: Vec<Source> = cfg.ranks.iter().map(|&r| Source::Random(r)).collect();
    states.extend((0..cfg.states.len()).map(Source::Named));
    let n_bits = d.trailing_zeros() as usize;

    let mut tasks = Vec::new();
    for (source_idx, source) in states.iter().enumerate() {
        let r_nominal = match source {
            Source::Random(r) => *r,
            Source::Named(_) => d,
        };
        for &method in &cfg.methods {
            let variants = match method {
                Method::Direct | Method::Sdp => vec![Variant::Full],
                Method::RankR => partition_plan(&fam, r_nominal, cfg.settings)?
                    .into_iter()
                    .map(Variant::Partitions)
                    .collect(),
                Method::PauliCs => {
                    if cfg.pauli_counts.is_empty() {
                        vec![Variant::Paulis(r_nominal * n_bits)]
                    } else {
                        cfg.pauli_counts.iter().map(|&m| Variant::Paulis(m)).collect()
                    }
                }
            };
            for variant in variants {
                for &shots in &cfg.shots {
                    for trial in 0..cfg.trials {
                        tasks.push(Task {
                            source: *source,
                            source_idx,
                            method,
                            variant: variant.clone(),
                            shots,
                            trial,
                        });
                    }
                }
            }
        }
    }
    let prep = Prepared { fam, d };
    tasks.par_iter().map(|t| run_task(cfg, &prep, t)).collect()
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Mean, sample standard deviation and median per point, in first-seen order.
pub fn summarize(records: &[TrialRecord]) -> Vec<SummaryRow> {
    type Key = (usize, usize, String, Method, usize, usize, Shots);
    let mut order: Vec<Key> = Vec::new();
    let mut groups: std::collections::HashMap<Key, Vec<&TrialRecord>> = std::collections::HashMap::new();
    for rec in records {
        let key = (rec.d, rec.r, rec.state.clone(), rec.method, rec.settings, rec.projectors, rec.shots);
        groups
            .entry(key.clone())
            .or_insert_with(|| {
                order.push(key.clone());
                Vec::new()
            })
            .push(rec);
    }
    order
        .into_iter()
        .map(|key| {
            let g = &groups[&key];
            let frob: Vec<f64> = g.iter().map(|r| r.frobenius).collect();
            let fid: Vec<f64> = g.iter().map(|r| r.fidelity).collect();
            let (fm, fs) = mean_std(&frob);
            let (im, is) = mean_std(&fid);
            let (d, r, state, method, settings, projectors, shots) = key;
            SummaryRow {
                d,
                r,
                state,
                method,
                settings,
                projectors,
                shots,
                n: g.len(),
                frobenius_mean: fm,
                frobenius_std: fs,
                fidelity_mean: im,
                fidelity_std: is,
                fidelity_median: median(&fid),
            }
        })
        .collect()
}

fn num(x: f64) -> String {
    format!("{x:.12e}")
}

pub fn write_records<W: Write>(w: W, records: &[TrialRecord]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_HEADER)?;
    for r in records {
        out.write_record([
            r.d.to_string(),
            r.r.to_string(),
            r.method.to_string(),
            r.shots.to_string(),
            r.trial.to_string(),
            num(r.frobenius),
            num(r.fidelity),
            r.iters.to_string(),
            r.flags.join(";"),
            r.state.clone(),
            r.settings.to_string(),
            r.projectors.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_summary<W: Write>(w: W, rows: &[SummaryRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "d",
        "r",
        "state",
        "method",
        "settings",
        "projectors",
        "shots",
        "n",
        "frobenius_mean",
        "frobenius_std",
        "fidelity_mean",
        "fidelity_std",
        "fidelity_median",
    ])?;
    for s in rows {
        out.write_record([
            s.d.to_string(),
            s.r.to_string(),
            s.state.clone(),
            s.method.to_string(),
            s.settings.to_string(),
            s.projectors.to_string(),
            s.shots.to_string(),
            s.n.to_string(),
            num(s.frobenius_mean),
            num(s.frobenius_std),
            num(s.fidelity_mean),
            num(s.fidelity_std),
            num(s.fidelity_median),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Least-squares slope of `ln y` against `ln x`, over points with both
/// positive. `None` with fewer than two such points.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSweep {
    pub schema: u32,
    pub dim: usize,
    pub seed: u64,
    /// `(ε, ‖ρ̂ − ρ‖_F^2)` with ρ̂ the direct estimate from perturbed bases.
    pub points: Vec<(f64, f64)>,
    pub slope: Option<f64>,
}

/// Direct reconstruction of a random full-rank state from the averaged
/// imperfect-basis probabilities at each ε.
pub fn error_sweep(d: usize, eps_grid: &[f64], seed: u64) -> Result<ErrorSweep> {
    if eps_grid.is_empty() {
        return Err(Error::invalid("empty ε grid"));
    }
    let fam = family(d)?;
    let rho = random_rank_r_dm_with(&mut rng_for(seed, 0), d, d)?;
    let points = eps_grid
        .iter()
        .map(|&eps| {
            let probs: ProbTable = fam
                .bases
                .iter()
                .map(|b| Ok((b.label, perturbed_probs(&rho, b, eps)?)))
                .collect::<Result<_>>()?;
            let rep = direct_full_with(&fam, &probs, DirectOptions::default())?;
            Ok((eps, frobenius_distance(&rep.estimate, rho.matrix())?.powi(2)))
        })
        .collect::<Result<Vec<_>>>()?;
    let slope = loglog_slope(&points);
    Ok(ErrorSweep {
        schema: SCHEMA,
        dim: d,
        seed,
        points,
        slope,
    })
}

pub fn write_error_sweep<W: Write>(w: W, sweep: &ErrorSweep) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["d", "eps", "frobenius_sq"])?;
    for (eps, e) in &sweep.points {
        out.write_record([sweep.dim.to_string(), num(*eps), num(*e)])?;
    }
    out.flush()?;
    Ok(())
}
