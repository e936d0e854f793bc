//! State estimation from measured outcome probabilities.

mod band;
mod completion;
mod direct;
mod pauli;
mod sdp;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bases::DdbFamily;
use crate::error::{Error, Result};
use crate::linalg::{project_density, ComplexMatrix};
use crate::simulator::ProbTable;
use crate::state::DensityMatrix;

pub use band::{band_from_family, known_entries_from_partitions, BandData, KnownEntries};
pub use completion::{complete_known_entries, rank_r_reconstruct, singular_blocks, CompletionOptions};
pub use direct::{diagonal_estimates, direct_full, direct_full_with, element_bases, element_direct, element_direct_signed, DirectOptions, ElementEstimate, SignPair};
pub use pauli::{pauli_cs_baseline, pauli_expectations, PauliOptions, PauliString};
pub use sdp::{refine_sdp, refine_sdp_with, SdpOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Direct,
    Sdp,
    RankR,
    PauliCs,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Direct, Method::Sdp, Method::RankR, Method::PauliCs];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Direct => "direct",
            Method::Sdp => "sdp",
            Method::RankR => "rank-r",
            Method::PauliCs => "pauli-cs",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown method `{s}` (expected direct, sdp, rank-r or pauli-cs)")))
    }
}

impl Serialize for Method {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Method {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Estimate plus solver diagnostics.
///
/// `estimate` is always Hermitian; it is a density matrix when `physical`
/// is set. Only the unprojected direct estimate can be unphysical.
#[derive(Debug, Clone, Serialize)]
pub struct ReconstructionReport {
    pub estimate: ComplexMatrix,
    pub physical: bool,
    pub method: Method,
    pub iterations: usize,
    /// Root of the summed squared misfit against the data the method used.
    pub residual: f64,
    pub converged: bool,
    /// Start indices `k` of consecutive principal blocks `A_k` that are
    /// numerically singular.
    pub singular_flags: Vec<usize>,
    /// Indices dropped because their diagonal entry vanished.
    pub adaptive_removed: Vec<usize>,
}

impl ReconstructionReport {
    /// The estimate as a density matrix, projecting first if needed.
    pub fn density(&self) -> Result<DensityMatrix> {
        if self.physical {
            Ok(DensityMatrix::new_unchecked(self.estimate.clone()))
        } else {
            project_density(&self.estimate)
        }
    }

    /// Diagnostic tokens for CSV output.
    pub fn flag_tokens(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.converged {
            out.push("not-converged".to_string());
        }
        if !self.physical {
            out.push("unphysical".to_string());
        }
        out.extend(self.singular_flags.iter().map(|k| format!("singular:{k}")));
        out.extend(self.adaptive_removed.iter().map(|k| format!("removed:{k}")));
        out
    }
}

/// `sqrt(Σ (<v|X|v> - p)^2)` over every basis present in both `probs` and `fam`.
pub fn probability_residual(fam: &DdbFamily, probs: &ProbTable, x: &ComplexMatrix) -> f64 {
    let mut s = 0.0;
    for b in &fam.bases {
        if let Some(p) = probs.get(&b.label) {
            for (v, &pk) in b.vectors.iter().zip(p.as_slice()) {
                let r = v.expectation(x).re - pk;
                s += r * r;
            }
        }
    }
    s.sqrt()
}
