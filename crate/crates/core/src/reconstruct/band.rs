use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::direct::{diagonal_estimates, element_direct, lookup};
use crate::bases::{BasisLabel, DdbFamily, VectorKind};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::partitions::select_band_partitions;
use crate::simulator::ProbTable;

const CONSISTENCY_TOL: f64 = 1e-9;
const BAND_TRACE_TOL: f64 = 1e-6;

/// Matrix entries known on the band `|j − k| <= r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandData {
    pub dim: usize,
    pub r: usize,
    /// Dense storage; entries outside the band are zero and ignored.
    pub values: ComplexMatrix,
}

impl BandData {
    /// Checks Hermitian consistency and the diagonal sum.
    pub fn new(r: usize, values: ComplexMatrix) -> Result<Self> {
        let d = values.rows();
        if !values.is_square() || d < 2 {
            return Err(Error::shape("square matrix with d >= 2", format!("{}x{}", values.rows(), values.cols())));
        }
        if r == 0 || r >= d {
            return Err(Error::invalid(format!("band radius {r} outside 1..={}", d - 1)));
        }
        for j in 0..d {
            for k in j..(j + r + 1).min(d) {
                let defect = (values[(j, k)] - values[(k, j)].conj()).norm();
                if defect > CONSISTENCY_TOL {
                    return Err(Error::InconsistentBand(format!(
                        "entries ({j},{k}) and ({k},{j}) are not conjugate (defect {defect:e})"
                    )));
                }
            }
        }
        let tr = values.trace().re;
        if (tr - 1.0).abs() > BAND_TRACE_TOL {
            return Err(Error::InconsistentBand(format!("diagonal sums to {tr}")));
        }
        let values = ComplexMatrix::from_fn(d, d, |j, k| {
            if j.abs_diff(k) <= r {
                values[(j, k)]
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Ok(Self { dim: d, r, values })
    }

    /// Band of a known matrix.
    pub fn from_matrix(m: &ComplexMatrix, r: usize) -> Result<Self> {
        Self::new(r, m.clone())
    }

    pub fn in_band(&self, j: usize, k: usize) -> bool {
        j.abs_diff(k) <= self.r
    }

    pub fn to_known_entries(&self) -> KnownEntries {
        let d = self.dim;
        let mut known = vec![false; d * d];
        for j in 0..d {
            for k in 0..d {
                known[j * d + k] = self.in_band(j, k);
            }
        }
        KnownEntries {
            dim: d,
            known,
            values: self.values.clone(),
        }
    }
}

/// Arbitrary symmetric mask of known entries.
#[derive(Debug, Clone, PartialEq)]
pub struct KnownEntries {
    pub dim: usize,
    /// Row-major `d x d`, symmetric, diagonal always set.
    pub known: Vec<bool>,
    pub values: ComplexMatrix,
}

impl KnownEntries {
    pub fn is_known(&self, j: usize, k: usize) -> bool {
        self.known[j * self.dim + k]
    }

    pub fn count(&self) -> usize {
        self.known.iter().filter(|&&b| b).count()
    }

    /// Largest `b` such that every entry with `|j − k| <= b` is known.
    pub fn band_radius(&self) -> usize {
        let d = self.dim;
        let mut b = 0;
        while b + 1 < d && (0..d - b - 1).all(|j| self.is_known(j, j + b + 1)) {
            b += 1;
        }
        b
    }

    /// Restriction to the index subset `keep` (in the given order).
    pub fn restrict(&self, keep: &[usize]) -> KnownEntries {
        let n = keep.len();
        let mut known = vec![false; n * n];
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate() {
                known[a * n + b] = self.is_known(i, j);
            }
        }
        KnownEntries {
            dim: n,
            known,
            values: self.values.principal(keep),
        }
    }
}

fn extract_pair(fam: &DdbFamily, probs: &ProbTable, diag: &[f64], j: usize, k: usize) -> Result<C64> {
    let p_phi = lookup(fam, probs, VectorKind::PhiPlus, j, k)?;
    let p_psi = lookup(fam, probs, VectorKind::PsiPlus, j, k)?;
    Ok(element_direct(p_phi, p_psi, diag[j], diag[k]))
}

fn require_partitions(fam: &DdbFamily, probs: &ProbTable, partitions: &[usize]) -> Result<()> {
    if fam.dim.is_multiple_of(2) && !probs.contains_key(&BasisLabel::B0) {
        return Err(Error::MissingBasis("B0".into()));
    }
    if fam.dim % 2 == 1 {
        // Diagonal comes from singletons spread over all B_t.
        for t in 1..=fam.dim {
            if !probs.contains_key(&BasisLabel::B(t)) {
                return Err(Error::MissingBasis(format!("B{t} (partition {t}, needed for the diagonal)")));
            }
        }
    }
    for &t in partitions {
        for label in [BasisLabel::B(t), BasisLabel::C(t)] {
            if !probs.contains_key(&label) {
                return Err(Error::MissingBasis(format!("{label} (partition {t})")));
            }
        }
    }
    Ok(())
}

/// Entries `|j − k| <= r` from the bases of the band-selected partitions
/// plus the diagonal source.
pub fn band_from_family(fam: &DdbFamily, probs: &ProbTable, r: usize) -> Result<BandData> {
    let d = fam.dim;
    let selected = select_band_partitions(&fam.partitions, r)?;
    require_partitions(fam, probs, &selected)?;
    let diag = diagonal_estimates(fam, probs)?;
    let mut m = ComplexMatrix::from_real_diag(&diag);
    for j in 0..d {
        for k in j + 1..(j + r + 1).min(d) {
            let v = extract_pair(fam, probs, &diag, j, k)?;
            m[(j, k)] = v;
            m[(k, j)] = v.conj();
        }
    }
    Ok(BandData {
        dim: d,
        r,
        values: m,
    })
}

/// All entries reachable from the diagonal source and the given partitions.
pub fn known_entries_from_partitions(fam: &DdbFamily, probs: &ProbTable, partitions: &[usize]) -> Result<KnownEntries> {
    let d = fam.dim;
    require_partitions(fam, probs, partitions)?;
    let diag = diagonal_estimates(fam, probs)?;
    let mut values = ComplexMatrix::from_real_diag(&diag);
    let mut known = vec![false; d * d];
    for i in 0..d {
        known[i * d + i] = true;
    }
    for &t in partitions {
        let p = fam
            .partitions
            .get(t)
            .ok_or_else(|| Error::invalid(format!("partition {t} out of range")))?;
        for pair in &p.pairs {
            let v = extract_pair(fam, probs, &diag, pair.j, pair.k)?;
            values[(pair.j, pair.k)] = v;
            values[(pair.k, pair.j)] = v.conj();
            known[pair.j * d + pair.k] = true;
            known[pair.k * d + pair.j] = true;
        }
    }
    Ok(KnownEntries { dim: d, known, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::family;
    use crate::linalg::random_rank_r_dm;
    use crate::simulator::family_probs;

    #[test]
    fn band_matches_true_state() {
        let f = family(8).unwrap();
        let rho = random_rank_r_dm(8, 2, 3).unwrap();
        let all = family_probs(&rho, &f).unwrap();
        let keep = [
            BasisLabel::B0,
            BasisLabel::B(1),
            BasisLabel::C(1),
            BasisLabel::B(3),
            BasisLabel::C(3),
            BasisLabel::B(5),
            BasisLabel::C(5),
        ];
        let partial: ProbTable = all.iter().filter(|(l, _)| keep.contains(l)).map(|(l, p)| (*l, p.clone())).collect();
        let band = band_from_family(&f, &partial, 1).unwrap();
        let full = band_from_family(&f, &all, 1).unwrap();
        assert_eq!(band, full);
        let want = BandData::from_matrix(rho.matrix(), 1).unwrap();
        assert!((&band.values - &want.values).max_abs() < 1e-12);

        let mut missing = partial.clone();
        missing.remove(&BasisLabel::C(3));
        let err = band_from_family(&f, &missing, 1).unwrap_err().to_string();
        assert!(err.contains("partition 3"), "{err}");
    }

    #[test]
    fn inconsistent_band_is_rejected() {
        let mut m = ComplexMatrix::identity(3).scale(1.0 / 3.0);
        m[(0, 1)] = C64::new(0.1, 0.0);
        assert!(matches!(BandData::new(1, m.clone()), Err(Error::InconsistentBand(_))));
        m[(1, 0)] = C64::new(0.1, 0.0);
        assert!(BandData::new(1, m).is_ok());
    }

    #[test]
    fn radius_of_masks() {
        let rho = random_rank_r_dm(6, 2, 1).unwrap();
        let band = BandData::from_matrix(rho.matrix(), 2).unwrap();
        assert_eq!(band.to_known_entries().band_radius(), 2);
    }
}
