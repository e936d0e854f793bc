//! Born-rule probabilities, shot sampling and the averaged imperfect-basis
//! error model.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bases::{BasisLabel, DdbBasis, DdbFamily};
use crate::error::{Error, Result};
use crate::linalg::random::{haar_state_with, random_unitary_with, rng_for};
use crate::linalg::ComplexMatrix;
use crate::state::DensityMatrix;

const CLAMP: f64 = 1e-12;

/// Outcome distribution of one measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::invalid("empty probability vector"));
        }
        if let Some(x) = p.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(Error::invalid(format!("invalid probability {x}")));
        }
        let s: f64 = p.iter().sum();
        if (s - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(format!("probabilities sum to {s}")));
        }
        Ok(Self(p))
    }

    /// For estimates that may be slightly off the simplex (noise, dust).
    pub fn new_unchecked(p: Vec<f64>) -> Self {
        Self(p)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Index<usize> for ProbVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountVector {
    pub counts: Vec<u64>,
    pub shots: u64,
}

impl CountVector {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        let shots = counts.iter().sum();
        if shots == 0 {
            return Err(Error::invalid("count vector with zero shots"));
        }
        Ok(Self { counts, shots })
    }
}

/// Probabilities for every basis of a family, keyed by label.
pub type ProbTable = BTreeMap<BasisLabel, ProbVector>;

pub fn born_probs(rho: &DensityMatrix, b: &DdbBasis) -> Result<ProbVector> {
    born_probs_matrix(rho.matrix(), b)
}

/// Same as [`born_probs`] for an arbitrary Hermitian matrix.
pub fn born_probs_matrix(m: &ComplexMatrix, b: &DdbBasis) -> Result<ProbVector> {
    if m.rows() != b.dim || m.cols() != b.dim {
        return Err(Error::shape(b.dim, format!("{}x{}", m.rows(), m.cols())));
    }
    let p = b
        .vectors
        .iter()
        .map(|v| {
            let x = v.expectation(m).re;
            if (-CLAMP..0.0).contains(&x) {
                0.0
            } else {
                x
            }
        })
        .collect();
    Ok(ProbVector(p))
}

pub fn family_probs(rho: &DensityMatrix, fam: &DdbFamily) -> Result<ProbTable> {
    fam.bases
        .iter()
        .map(|b| Ok((b.label, born_probs(rho, b)?)))
        .collect()
}

/// Stream id for sampling basis `label` in trial `trial`.
pub fn sample_stream(label: BasisLabel, trial: u64) -> u64 {
    let code = match label {
        BasisLabel::B0 => 0,
        BasisLabel::B(t) => 2 * t as u64 - 1,
        BasisLabel::C(t) => 2 * t as u64,
    };
    (trial << 24) ^ code
}

pub fn sample_counts(p: &ProbVector, shots: u64, seed: u64) -> Result<CountVector> {
    sample_counts_with(&mut rng_for(seed, 0), p, shots)
}

/// Multinomial draw by inverse CDF, one uniform per shot.
pub fn sample_counts_with<R: Rng + ?Sized>(rng: &mut R, p: &ProbVector, shots: u64) -> Result<CountVector> {
    if shots == 0 {
        return Err(Error::invalid("shots must be positive"));
    }
    let mut cdf = Vec::with_capacity(p.len());
    let mut acc = 0.0;
    for &x in p.as_slice() {
        acc += x.max(0.0);
        cdf.push(acc);
    }
    if acc <= 0.0 {
        return Err(Error::invalid("probability vector has no mass"));
    }
    let last = cdf.len() - 1;
    let mut counts = vec![0u64; p.len()];
    for _ in 0..shots {
        let u: f64 = rng.random::<f64>() * acc;
        let i = cdf.partition_point(|&c| c <= u).min(last);
        counts[i] += 1;
    }
    Ok(CountVector { counts, shots })
}

pub fn estimate_probs(c: &CountVector) -> ProbVector {
    let n = c.shots as f64;
    ProbVector(c.counts.iter().map(|&k| k as f64 / n).collect())
}

/// Sample every basis of a table with per-basis streams of `seed`.
pub fn sample_table(exact: &ProbTable, shots: u64, seed: u64, trial: u64) -> Result<BTreeMap<BasisLabel, CountVector>> {
    exact
        .iter()
        .map(|(label, p)| {
            let mut rng = rng_for(seed, sample_stream(*label, trial));
            Ok((*label, sample_counts_with(&mut rng, p, shots)?))
        })
        .collect()
}

/// Averaged effect of measuring in slightly wrong bases: each ideal vector
/// is replaced by `(|v> + ε|e>)` with `|e>` Haar random, normalized.
pub fn perturbed_probs(rho: &DensityMatrix, b: &DdbBasis, eps: f64) -> Result<ProbVector> {
    if !(eps >= 0.0) {
        return Err(Error::invalid(format!("perturbation strength {eps} must be >= 0")));
    }
    let p = born_probs(rho, b)?;
    Ok(ProbVector(perturb(p.as_slice(), eps)))
}

pub(crate) fn perturb(p: &[f64], eps: f64) -> Vec<f64> {
    let d = p.len() as f64;
    let e2 = eps * eps;
    let (w_ideal, w_noise) = if e2.is_infinite() {
        (0.0, 1.0)
    } else {
        (1.0 / (1.0 + e2), e2 / (1.0 + e2))
    };
    let q: Vec<f64> = p.iter().map(|&x| w_ideal * x + w_noise / d).collect();
    let s: f64 = q.iter().sum();
    q.into_iter().map(|x| x / s).collect()
}

/// Monte Carlo version of [`perturbed_probs`], averaging `samples` random
/// perturbations per outcome. Illustration only; it converges to the
/// averaged formula as `samples` grows.
pub fn perturbed_probs_sampled(rho: &DensityMatrix, b: &DdbBasis, eps: f64, samples: usize, seed: u64) -> Result<ProbVector> {
    if !(eps >= 0.0) || samples == 0 {
        return Err(Error::invalid("need eps >= 0 and samples > 0"));
    }
    let d = b.dim;
    let m = rho.matrix();
    let mut rng = rng_for(seed, 0);
    let mut out = Vec::with_capacity(d);
    for v in &b.vectors {
        let ideal = v.to_dense();
        let mut acc = 0.0;
        for _ in 0..samples {
            let e = haar_state_with(&mut rng, d);
            let w: Vec<C64> = ideal.iter().zip(&e).map(|(a, b)| a + b * eps).collect();
            let mw = m.matvec(&w);
            let val: C64 = w.iter().zip(&mw).map(|(a, b)| a.conj() * b).sum();
            acc += val.re;
        }
        out.push(acc / samples as f64 / (1.0 + eps * eps));
    }
    let s: f64 = out.iter().sum();
    Ok(ProbVector(out.into_iter().map(|x| x / s).collect()))
}

/// Qubit-qutrit test states; basis index `3a + b` for qubit `a`, qutrit `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QubitQutritState {
    Mixed,
    Balanced,
    Separable(u64),
    Entangled(u64),
}

impl QubitQutritState {
    pub fn name(&self) -> &'static str {
        match self {
            QubitQutritState::Mixed => "mixed",
            QubitQutritState::Balanced => "balanced",
            QubitQutritState::Separable(_) => "separable",
            QubitQutritState::Entangled(_) => "entangled",
        }
    }
}

pub fn appendix_b_state(kind: QubitQutritState) -> DensityMatrix {
    match kind {
        QubitQutritState::Mixed => DensityMatrix::maximally_mixed(6),
        QubitQutritState::Balanced => {
            DensityMatrix::new_unchecked(ComplexMatrix::from_fn(6, 6, |_, _| C64::new(1.0 / 6.0, 0.0)))
        }
        QubitQutritState::Separable(seed) | QubitQutritState::Entangled(seed) => {
            let mut rng = rng_for(seed, 0);
            let u2 = random_unitary_with(&mut rng, 2);
            let u3 = random_unitary_with(&mut rng, 3);
            let u = u2.kron(&u3);
            let mut phi = vec![C64::new(0.0, 0.0); 6];
            if matches!(kind, QubitQutritState::Separable(_)) {
                phi[0] = C64::new(1.0, 0.0);
            } else {
                for i in [1, 2, 3, 5] {
                    phi[i] = C64::new(0.5, 0.0);
                }
            }
            DensityMatrix::pure(&u.matvec(&phi))
        }
    }
}

/// Partial transpose on the first factor of a `da x db` bipartition.
pub fn partial_transpose_first(m: &ComplexMatrix, da: usize, db: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(da * db, da * db, |r, c| {
        let (a, b) = (r / db, r % db);
        let (a2, b2) = (c / db, c % db);
        m[(a2 * db + b, a * db + b2)]
    })
}

/// Interchange format between simulation and reconstruction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountsFile {
    pub dim: usize,
    pub shots: u64,
    pub records: Vec<CountsRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountsRecord {
    pub basis: BasisLabel,
    pub counts: Vec<u64>,
}

impl CountsFile {
    pub fn from_counts(dim: usize, shots: u64, counts: &BTreeMap<BasisLabel, CountVector>) -> Self {
        Self {
            dim,
            shots,
            records: counts
                .iter()
                .map(|(l, c)| CountsRecord {
                    basis: *l,
                    counts: c.counts.clone(),
                })
                .collect(),
        }
    }

    /// Frequency estimates for each record; every record must have `dim`
    /// entries summing to `shots`.
    pub fn to_probs(&self) -> Result<ProbTable> {
        let mut out = ProbTable::new();
        for rec in &self.records {
            if rec.counts.len() != self.dim {
                return Err(Error::shape(self.dim, rec.counts.len()));
            }
            let total: u64 = rec.counts.iter().sum();
            if total != self.shots {
                return Err(Error::invalid(format!(
                    "basis {} has {total} counts, expected {}",
                    rec.basis, self.shots
                )));
            }
            let cv = CountVector::new(rec.counts.clone())?;
            out.insert(rec.basis, estimate_probs(&cv));
        }
        Ok(out)
    }
}
