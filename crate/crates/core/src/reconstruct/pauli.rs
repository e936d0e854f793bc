//! Compressed-sensing baseline from a random subset of Pauli expectations.

use num_complex::Complex64 as C64;
use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::{Method, ReconstructionReport};
use crate::error::{Error, Result};
use crate::linalg::random::rng_for;
use crate::linalg::{eigh, project_density, ComplexMatrix};
use crate::simulator::{sample_counts_with, ProbVector};
use crate::state::DensityMatrix;

/// `i^{|x & z|} X^x Z^z`, Hermitian, on `n` qubits; bit `q` of a mask acts
/// on bit `q` of the basis index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PauliString {
    pub x: u32,
    pub z: u32,
}

impl PauliString {
    /// Enumeration index `x * 4^n/2^n + z`; 0 is the identity.
    pub fn from_index(n: u32, idx: u64) -> Self {
        let dim = 1u64 << n;
        Self {
            x: (idx / dim) as u32,
            z: (idx % dim) as u32,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// `P|c> = phase(c) |c ^ x>`.
    fn phase(&self, c: usize) -> C64 {
        let y = (self.x & self.z).count_ones() as i64;
        let sign = ((self.z as usize & c).count_ones() % 2) as i64 * 2;
        crate::bases::Phase::from_quarter_turns(y + sign).value()
    }

    /// `tr(M P)`.
    pub fn expectation(&self, m: &ComplexMatrix) -> C64 {
        (0..m.rows()).map(|c| self.phase(c) * m[(c, c ^ self.x as usize)]).sum()
    }

    pub fn to_matrix(&self, dim: usize) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(dim, dim);
        for c in 0..dim {
            m[(c ^ self.x as usize, c)] = self.phase(c);
        }
        m
    }

    /// `M += w P`
    fn add_scaled(&self, m: &mut ComplexMatrix, w: f64) {
        for c in 0..m.rows() {
            m[(c ^ self.x as usize, c)] += self.phase(c) * w;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PauliOptions {
    /// Nuclear-norm weight.
    pub lambda: f64,
    pub max_iter: usize,
    pub tol: f64,
    /// Finite-shot expectations; `None` uses exact values.
    pub shots: Option<u64>,
}

impl Default for PauliOptions {
    fn default() -> Self {
        Self {
            lambda: 1e-3,
            max_iter: 3000,
            tol: 1e-10,
            shots: None,
        }
    }
}

/// `m` distinct non-identity Pauli strings and their (possibly sampled)
/// expectations on `rho`.
pub fn pauli_expectations(rho: &DensityMatrix, m: usize, shots: Option<u64>, seed: u64) -> Result<Vec<(PauliString, f64)>> {
    let d = rho.dim();
    if !d.is_power_of_two() || d < 2 {
        return Err(Error::InvalidDimension {
            dim: d,
            reason: "Pauli baseline needs a power of two",
        });
    }
    let n = d.trailing_zeros();
    let total = d * d - 1;
    if m == 0 || m > total + 1 {
        return Err(Error::invalid(format!("observable count {m} outside 1..={}", total + 1)));
    }
    // m = 4^n counts the identity, which is always known.
    let m = m.min(total);
    let mut rng = rng_for(seed, 0);
    let mut picks: Vec<usize> = sample(&mut rng, total, m).into_vec();
    picks.sort_unstable();
    let mut shot_rng = rng_for(seed, 1);
    picks
        .into_iter()
        .map(|i| {
            let p = PauliString::from_index(n, i as u64 + 1);
            let exact = p.expectation(rho.matrix()).re.clamp(-1.0, 1.0);
            let value = match shots {
                None => exact,
                Some(s) => {
                    let plus = 0.5 * (1.0 + exact);
                    let pv = ProbVector::new_unchecked(vec![plus, 1.0 - plus]);
                    let c = sample_counts_with(&mut shot_rng, &pv, s)?;
                    2.0 * c.counts[0] as f64 / s as f64 - 1.0
                }
            };
            Ok((p, value))
        })
        .collect()
}

/// Least squares over the measured Paulis (and the identity) with a
/// nuclear-norm penalty, solved by accelerated proximal gradient with
/// eigenvalue soft-thresholding. The thresholded solution then seeds a
/// trace-one PSD-constrained least-squares polish, which removes the
/// shrinkage bias, and the result is projected onto the density matrices.
pub fn pauli_cs_baseline(data: &[(PauliString, f64)], d: usize, opts: PauliOptions) -> Result<ReconstructionReport> {
    if data.is_empty() {
        return Err(Error::invalid("no Pauli observables"));
    }
    let dimf = d as f64;
    let step = 1.0 / dimf;
    let identity = PauliString { x: 0, z: 0 };
    let mut obs: Vec<(PauliString, f64)> = vec![(identity, 1.0)];
    obs.extend(data.iter().copied().filter(|(p, _)| !p.is_identity()));

    let gradient = |x: &ComplexMatrix| {
        let mut g = ComplexMatrix::zeros(d, d);
        for (p, y) in &obs {
            let r = p.expectation(x).re - y;
            p.add_scaled(&mut g, r);
        }
        g
    };

    let mut x = ComplexMatrix::identity(d).scale(1.0 / dimf);
    let mut z = x.clone();
    let mut t = 1.0f64;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        iterations += 1;
        let g = gradient(&z);
        let e = eigh(&(&z - &g.scale(step)))?;
        let tau = opts.lambda * step;
        let next = e.recompose_with(|l| l.signum() * (l.abs() - tau).max(0.0));
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let change = (&next - &x).frobenius_norm();
        z = &next + &(&next - &x).scale((t - 1.0) / t_next);
        x = next;
        t = t_next;
        if change < opts.tol {
            converged = true;
            break;
        }
    }

    let mut polish_converged = false;
    let mut y = project_density(&x)?.into_matrix();
    for _ in 0..opts.max_iter {
        iterations += 1;
        let g = gradient(&y);
        let next = project_density(&(&y - &g.scale(step)))?.into_matrix();
        let change = (&next - &y).frobenius_norm();
        y = next;
        if change < opts.tol {
            polish_converged = true;
            break;
        }
    }
    let residual = obs
        .iter()
        .map(|(p, v)| (p.expectation(&y).re - v).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(ReconstructionReport {
        estimate: y,
        physical: true,
        method: Method::PauliCs,
        iterations,
        residual,
        converged: converged && polish_converged,
        singular_flags: Vec::new(),
        adaptive_removed: Vec::new(),
    })
}
