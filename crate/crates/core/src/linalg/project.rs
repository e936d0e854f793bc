use super::eigen::{eigh, HermEig};
use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};
use crate::state::DensityMatrix;

/// Euclidean projection of `v` onto the probability simplex.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    if v.is_empty() {
        return Vec::new();
    }
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cumsum += ui;
        let t = (cumsum - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Frobenius-nearest density matrix to the Hermitian part of `a`.
pub fn project_density(a: &ComplexMatrix) -> Result<DensityMatrix> {
    let e = eigh(a)?;
    let p = project_simplex(&e.eigenvalues);
    let projected = HermEig {
        eigenvalues: p,
        eigenvectors: e.eigenvectors,
    }
    .recompose();
    Ok(DensityMatrix::new_unchecked(projected.hermitian_part()))
}

pub fn frobenius_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::shape(
            format!("{}x{}", a.rows(), a.cols()),
            format!("{}x{}", b.rows(), b.cols()),
        ));
    }
    Ok((a - b).frobenius_norm())
}

/// `V sqrt(max(Λ, 0)) V†`
pub fn psd_sqrt(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(eigh(a)?.recompose_with(|l| l.max(0.0).sqrt()))
}

/// Uhlmann fidelity `(tr sqrt(sqrt(ρ) σ sqrt(ρ)))^2`, clamped to [0, 1].
pub fn uhlmann_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::shape(rho.dim(), sigma.dim()));
    }
    let s = psd_sqrt(rho.matrix())?;
    let m = &(&s * sigma.matrix()) * &s;
    let e = eigh(&m)?;
    let tr: f64 = e.eigenvalues.iter().map(|l| l.max(0.0).sqrt()).sum();
    Ok((tr * tr).clamp(0.0, 1.0))
}
