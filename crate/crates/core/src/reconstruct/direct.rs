use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{probability_residual, Method, ReconstructionReport};
use crate::bases::{family, BasisLabel, DdbFamily, VectorKind};
use crate::error::{Error, Result};
use crate::linalg::{project_density, ComplexMatrix};
use crate::simulator::{ProbTable, ProbVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElementEstimate {
    pub j: usize,
    pub k: usize,
    pub value: C64,
}

/// `ρ_jk = (p_φ+ − i p_ψ+) − ((1 − i)/2)(ρ_jj + ρ_kk)`.
pub fn element_direct(p_phi_plus: f64, p_psi_plus: f64, rho_jj: f64, rho_kk: f64) -> C64 {
    let s = rho_jj + rho_kk;
    C64::new(p_phi_plus, -p_psi_plus) - C64::new(0.5, -0.5) * s
}

/// Which member of each `±` pair feeds the off-diagonal formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignPair {
    #[default]
    PlusPlus,
    PlusMinus,
    MinusPlus,
    MinusMinus,
}

impl SignPair {
    fn phi_kind(self) -> VectorKind {
        match self {
            SignPair::PlusPlus | SignPair::PlusMinus => VectorKind::PhiPlus,
            SignPair::MinusPlus | SignPair::MinusMinus => VectorKind::PhiMinus,
        }
    }

    fn psi_kind(self) -> VectorKind {
        match self {
            SignPair::PlusPlus | SignPair::MinusPlus => VectorKind::PsiPlus,
            SignPair::PlusMinus | SignPair::MinusMinus => VectorKind::PsiMinus,
        }
    }
}

/// Off-diagonal element from the chosen `φ` and `ψ` probabilities, using
/// `Re ρ_jk = p_φ+ − S/2 = S/2 − p_φ−` and `Im ρ_jk = S/2 − p_ψ+ = p_ψ− − S/2`
/// with `S = ρ_jj + ρ_kk`.
pub fn element_direct_signed(signs: SignPair, p_phi: f64, p_psi: f64, rho_jj: f64, rho_kk: f64) -> C64 {
    let half = 0.5 * (rho_jj + rho_kk);
    let re = match signs.phi_kind() {
        VectorKind::PhiPlus => p_phi - half,
        _ => half - p_phi,
    };
    let im = match signs.psi_kind() {
        VectorKind::PsiPlus => half - p_psi,
        _ => p_psi - half,
    };
    C64::new(re, im)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DirectOptions {
    /// Project the estimate onto the density matrices.
    pub project: bool,
    pub signs: SignPair,
}

pub(crate) fn lookup(fam: &DdbFamily, probs: &ProbTable, kind: VectorKind, j: usize, k: usize) -> Result<f64> {
    let (label, outcome) = fam.locate(kind, j, k)?;
    let p: &ProbVector = probs.get(&label).ok_or_else(|| Error::MissingBasis(label.to_string()))?;
    if p.len() != fam.dim {
        return Err(Error::shape(fam.dim, p.len()));
    }
    Ok(p[outcome])
}

/// Diagonal from `B0` (even `d`) or the singleton outcomes (odd `d`).
pub fn diagonal_estimates(fam: &DdbFamily, probs: &ProbTable) -> Result<Vec<f64>> {
    (0..fam.dim).map(|i| lookup(fam, probs, VectorKind::Diag, i, i)).collect()
}

pub fn direct_full(probs: &ProbTable, d: usize, opts: DirectOptions) -> Result<ReconstructionReport> {
    direct_full_with(&family(d)?, probs, opts)
}

pub fn direct_full_with(fam: &DdbFamily, probs: &ProbTable, opts: DirectOptions) -> Result<ReconstructionReport> {
    for label in fam.labels() {
        if !probs.contains_key(&label) {
            return Err(Error::MissingBasis(label.to_string()));
        }
    }
    let d = fam.dim;
    let diag = diagonal_estimates(fam, probs)?;
    let mut m = ComplexMatrix::from_real_diag(&diag);
    for j in 0..d {
        for k in j + 1..d {
            let p_phi = lookup(fam, probs, opts.signs.phi_kind(), j, k)?;
            let p_psi = lookup(fam, probs, opts.signs.psi_kind(), j, k)?;
            let v = element_direct_signed(opts.signs, p_phi, p_psi, diag[j], diag[k]);
            m[(j, k)] = v;
            m[(k, j)] = v.conj();
        }
    }
    let (estimate, physical) = if opts.project {
        (project_density(&m)?.into_matrix(), true)
    } else {
        (m, false)
    };
    let residual = probability_residual(fam, probs, &estimate);
    Ok(ReconstructionReport {
        estimate,
        physical,
        method: Method::Direct,
        iterations: 0,
        residual,
        converged: true,
        singular_flags: Vec::new(),
        adaptive_removed: Vec::new(),
    })
}

/// Label set needed for element `(j, k)`.
pub fn element_bases(fam: &DdbFamily, j: usize, k: usize) -> Result<Vec<BasisLabel>> {
    let mut out = vec![fam.locate(VectorKind::Diag, j, j)?.0, fam.locate(VectorKind::Diag, k, k)?.0];
    out.push(fam.locate(VectorKind::PhiPlus, j, k)?.0);
    out.push(fam.locate(VectorKind::PsiPlus, j, k)?.0);
    out.sort();
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_rank_r_dm;
    use crate::simulator::family_probs;
    use crate::state::DensityMatrix;

    #[test]
    fn formula_examples() {
        assert!((element_direct(1.0, 0.5, 0.5, 0.5) - C64::new(0.5, 0.0)).norm() < 1e-16);
        assert!((element_direct(0.5, 0.5, 1.0, 0.0)).norm() < 1e-16);
        assert!((element_direct(0.5, 1.0, 0.5, 0.5) - C64::new(0.0, -0.5)).norm() < 1e-16);
    }

    #[test]
    fn exact_reconstruction_for_every_sign_choice() {
        for d in [3, 6] {
            let rho = random_rank_r_dm(d, d, 4).unwrap();
            let probs = family_probs(&rho, &family(d).unwrap()).unwrap();
            for signs in [SignPair::PlusPlus, SignPair::PlusMinus, SignPair::MinusPlus, SignPair::MinusMinus] {
                let rep = direct_full(&probs, d, DirectOptions { project: false, signs }).unwrap();
                assert!((&rep.estimate - rho.matrix()).frobenius_norm() < 1e-12);
                assert!(rep.residual < 1e-12);
            }
        }
    }

    #[test]
    fn mixed_state_and_missing_basis() {
        let rho = DensityMatrix::maximally_mixed(4);
        let mut probs = family_probs(&rho, &family(4).unwrap()).unwrap();
        let rep = direct_full(&probs, 4, DirectOptions { project: true, ..Default::default() }).unwrap();
        assert!((&rep.estimate - rho.matrix()).max_abs() < 1e-14);
        assert!(rep.physical);
        probs.remove(&BasisLabel::C(2));
        let err = direct_full(&probs, 4, DirectOptions::default()).unwrap_err();
        assert!(err.to_string().contains("C2"));
    }

    #[test]
    fn element_basis_sets() {
        let f = family(4).unwrap();
        assert_eq!(element_bases(&f, 0, 3).unwrap(), vec![BasisLabel::B0, BasisLabel::B(3), BasisLabel::C(3)]);
    }
}
