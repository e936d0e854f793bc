use serde::{Deserialize, Serialize};

use super::{probability_residual, Method, ReconstructionReport};
use crate::bases::{family, DdbFamily};
use crate::error::{Error, Result};
use crate::linalg::{project_density, ComplexMatrix};
use crate::simulator::ProbTable;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SdpOptions {
    pub max_iter: usize,
    /// Stop once an iteration moves the estimate by less than this (Frobenius).
    pub tol: f64,
    /// Gradient step; `None` uses `1/(2m)` for `m` measured bases, the
    /// inverse Lipschitz constant of the objective.
    pub step: Option<f64>,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            max_iter: 2000,
            tol: 1e-10,
            step: None,
        }
    }
}

pub fn refine_sdp(probs: &ProbTable, d: usize, opts: SdpOptions) -> Result<ReconstructionReport> {
    refine_sdp_with(&family(d)?, probs, opts)
}

/// Projected gradient descent on `Σ (<v|X|v> − p)^2` over the density
/// matrices, starting from the maximally mixed state. Bases absent from
/// `probs` are ignored.
pub fn refine_sdp_with(fam: &DdbFamily, probs: &ProbTable, opts: SdpOptions) -> Result<ReconstructionReport> {
    let d = fam.dim;
    let measured: Vec<_> = fam.bases.iter().filter(|b| probs.contains_key(&b.label)).collect();
    if measured.is_empty() {
        return Err(Error::invalid("no measured bases for this dimension"));
    }
    for b in &measured {
        let p = &probs[&b.label];
        if p.len() != d {
            return Err(Error::shape(d, p.len()));
        }
    }
    let step = opts.step.unwrap_or(1.0 / (2.0 * measured.len() as f64));
    if !(step > 0.0) {
        return Err(Error::invalid("step must be positive"));
    }

    let mut x = ComplexMatrix::identity(d).scale(1.0 / d as f64);
    let mut best = (probability_residual(fam, probs, &x), x.clone());
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        iterations += 1;
        let mut g = ComplexMatrix::zeros(d, d);
        for b in &measured {
            let p = probs[&b.label].as_slice();
            for (v, &pk) in b.vectors.iter().zip(p) {
                let r = 2.0 * (v.expectation(&x).re - pk);
                if r == 0.0 {
                    continue;
                }
                for &(a, xa) in &v.terms {
                    for &(c, xc) in &v.terms {
                        g[(a, c)] += xa.value() * xc.value().conj() * r;
                    }
                }
            }
        }
        let next = project_density(&(&x - &g.scale(step)))?.into_matrix();
        let change = (&next - &x).frobenius_norm();
        x = next;
        let res = probability_residual(fam, probs, &x);
        if res < best.0 {
            best = (res, x.clone());
        }
        if change < opts.tol {
            converged = true;
            break;
        }
    }
    let (residual, estimate) = if converged {
        (probability_residual(fam, probs, &x), x)
    } else {
        best
    };
    Ok(ReconstructionReport {
        estimate,
        physical: true,
        method: Method::Sdp,
        iterations,
        residual,
        converged,
        singular_flags: Vec::new(),
        adaptive_removed: Vec::new(),
    })
}
