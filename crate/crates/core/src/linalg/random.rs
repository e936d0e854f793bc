use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};
use crate::state::DensityMatrix;

/// Deterministic generator for `(seed, stream)`. Streams let independent
/// consumers (trials, bases) draw from one seed without overlapping.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Standard complex Gaussian: real and imaginary parts iid N(0, 1/2).
pub fn standard_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn haar_state_with<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..d).map(|_| standard_complex(rng)).collect();
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-300 {
            return v.into_iter().map(|z| z / n).collect();
        }
    }
}

pub fn haar_state(d: usize, seed: u64) -> Vec<C64> {
    haar_state_with(&mut rng_for(seed, 0), d)
}

pub fn random_rank_r_dm_with<R: Rng + ?Sized>(rng: &mut R, d: usize, r: usize) -> Result<DensityMatrix> {
    if r == 0 || r > d {
        return Err(Error::invalid(format!("rank {r} outside 1..={d}")));
    }
    let g = ComplexMatrix::from_fn(d, r, |_, _| standard_complex(rng));
    let mut m = &g * &g.adjoint();
    let tr = m.trace().re;
    m = m.scale(1.0 / tr).hermitian_part();
    Ok(DensityMatrix::new_unchecked(m))
}

pub fn random_rank_r_dm(d: usize, r: usize, seed: u64) -> Result<DensityMatrix> {
    random_rank_r_dm_with(&mut rng_for(seed, 0), d, r)
}

/// Gram-Schmidt on a complex Gaussian matrix. The implied R factor has a
/// positive real diagonal, which makes the result Haar distributed.
pub fn random_unitary_with<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(d, d, |_, _| standard_complex(rng));
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(d);
    for c in 0..d {
        let mut v = g.column(c);
        // two passes of modified Gram-Schmidt for stability
        for _ in 0..2 {
            for u in &cols {
                let proj: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= proj * ui;
                }
            }
        }
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        cols.push(v.into_iter().map(|z| z / n).collect());
    }
    ComplexMatrix::from_fn(d, d, |r, c| cols[c][r])
}

pub fn random_unitary(d: usize, seed: u64) -> ComplexMatrix {
    random_unitary_with(&mut rng_for(seed, 0), d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigh;

    #[test]
    fn rank_r_has_rank_r() {
        for seed in 0..100 {
            let rho = random_rank_r_dm(8, 2, seed).unwrap();
            assert!((rho.matrix().trace().re - 1.0).abs() < 1e-12);
            let e = eigh(rho.matrix()).unwrap();
            let rank = e.eigenvalues.iter().filter(|&&l| l > 1e-9).count();
            assert_eq!(rank, 2, "seed {seed}");
        }
    }

    #[test]
    fn unitary_is_unitary() {
        for d in [1, 2, 3, 6, 16] {
            let u = random_unitary(d, 42 + d as u64);
            let uu = &u.adjoint() * &u;
            assert!((&uu - &ComplexMatrix::identity(d)).max_abs() < 1e-10);
        }
    }

    #[test]
    fn seeds_are_reproducible() {
        assert_eq!(haar_state(5, 9), haar_state(5, 9));
        assert_ne!(haar_state(5, 9), haar_state(5, 10));
        let a: u64 = rng_for(1, 2).random();
        let b: u64 = rng_for(1, 3).random();
        assert_ne!(a, b);
    }

    #[test]
    fn invalid_rank() {
        assert!(random_rank_r_dm(4, 0, 1).is_err());
        assert!(random_rank_r_dm(4, 5, 1).is_err());
    }
}
