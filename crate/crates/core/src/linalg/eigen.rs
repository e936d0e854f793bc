use num_complex::Complex64 as C64;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;
const REL_TOL: f64 = 1e-12;

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermEig {
    pub eigenvalues: Vec<f64>,
    /// Column `i` is the eigenvector for `eigenvalues[i]`.
    pub eigenvectors: ComplexMatrix,
}

impl HermEig {
    /// `V f(Λ) V†`.
    pub fn recompose_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let w: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut out = ComplexMatrix::zeros(n, n);
        for (i, &wi) in w.iter().enumerate() {
            if wi == 0.0 {
                continue;
            }
            for r in 0..n {
                let a = v[(r, i)] * wi;
                for c in 0..n {
                    out[(r, c)] += a * v[(c, i)].conj();
                }
            }
        }
        out
    }

    pub fn recompose(&self) -> ComplexMatrix {
        self.recompose_with(|l| l)
    }
}

fn off_diag_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for r in 0..n {
        for c in 0..n {
            if r != c {
                s += a[(r, c)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Cyclic complex Jacobi eigensolver. The input is Hermitized first.
pub fn eigh(input: &ComplexMatrix) -> Result<HermEig> {
    if !input.is_square() {
        return Err(Error::shape(
            "square matrix".to_string(),
            format!("{}x{}", input.rows(), input.cols()),
        ));
    }
    let n = input.rows();
    let mut a = input.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm();
    if scale == 0.0 || !scale.is_finite() {
        if !scale.is_finite() {
            return Err(Error::invalid("matrix has non-finite entries"));
        }
        return Ok(HermEig {
            eigenvalues: vec![0.0; n],
            eigenvectors: v,
        });
    }
    let tol = REL_TOL * scale;

    let mut converged = off_diag_norm(&a) <= tol;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= f64::MIN_POSITIVE {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // Skip rotations that cannot change the diagonal in floating point.
                if sweeps > 4 && app.abs() + 100.0 * mag == app.abs() && aqq.abs() + 100.0 * mag == aqq.abs() {
                    a[(p, q)] = C64::new(0.0, 0.0);
                    a[(q, p)] = C64::new(0.0, 0.0);
                    continue;
                }
                let phase = apq / mag;
                let theta = (aqq - app) / (2.0 * mag);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // J_pp = J_qq = c, J_pq = s e^{iφ}, J_qp = -s e^{-iφ}
                let jpq = phase * s;
                let jqp = -phase.conj() * s;

                // A <- A J
                for r in 0..n {
                    let arp = a[(r, p)];
                    let arq = a[(r, q)];
                    a[(r, p)] = arp * c + arq * jqp;
                    a[(r, q)] = arp * jpq + arq * c;
                }
                // A <- J† A
                for col in 0..n {
                    let apc = a[(p, col)];
                    let aqc = a[(q, col)];
                    a[(p, col)] = apc * c + aqc * jqp.conj();
                    a[(q, col)] = apc * jpq.conj() + aqc * c;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(app - t * mag, 0.0);
                a[(q, q)] = C64::new(aqq + t * mag, 0.0);

                for r in 0..n {
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = vrp * c + vrq * jqp;
                    v[(r, q)] = vrp * jpq + vrq * c;
                }
            }
        }
        converged = off_diag_norm(&a) <= tol;
    }
    if !converged {
        return Err(Error::NotConverged {
            sweeps,
            off_norm: off_diag_norm(&a),
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(HermEig {
        eigenvalues,
        eigenvectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{rng_for, standard_complex};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn diagonal_is_sorted() {
        let e = eigh(&ComplexMatrix::from_real_diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn pauli_x() {
        let x = ComplexMatrix::from_rows(&[vec![c(0., 0.), c(1., 0.)], vec![c(1., 0.), c(0., 0.)]]).unwrap();
        let e = eigh(&x).unwrap();
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-14);
        let v0 = e.eigenvectors.column(0);
        // (|0> - |1>)/sqrt2 up to phase
        assert!((v0[0] + v0[1]).norm() < 1e-14);
        assert!((v0[0].norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn random_hermitian_residuals() {
        let mut rng = rng_for(11, 0);
        for d in [1usize, 2, 5, 8, 17, 33, 64] {
            let g = ComplexMatrix::from_fn(d, d, |_, _| standard_complex(&mut rng));
            let a = g.hermitian_part();
            let e = eigh(&a).unwrap();
            let norm = a.frobenius_norm();
            let back = e.recompose();
            assert!((&back - &a).frobenius_norm() <= 1e-10 * norm, "d={d}");
            let vv = &e.eigenvectors.adjoint() * &e.eigenvectors;
            assert!((&vv - &ComplexMatrix::identity(d)).max_abs() < 1e-10);
            for i in 0..d {
                let v = e.eigenvectors.column(i);
                let av = a.matvec(&v);
                let res: f64 = av
                    .iter()
                    .zip(&v)
                    .map(|(x, y)| (x - y * e.eigenvalues[i]).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                assert!(res <= 1e-10 * norm);
            }
            assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn degenerate_spectrum() {
        let e = eigh(&ComplexMatrix::identity(6).scale(0.25)).unwrap();
        assert!(e.eigenvalues.iter().all(|&l| (l - 0.25).abs() < 1e-15));
    }

    #[test]
    fn deterministic() {
        let mut rng = rng_for(3, 1);
        let g = ComplexMatrix::from_fn(9, 9, |_, _| standard_complex(&mut rng)).hermitian_part();
        let a = eigh(&g).unwrap();
        let b = eigh(&g).unwrap();
        assert_eq!(a.eigenvalues, b.eigenvalues);
        assert_eq!(a.eigenvectors, b.eigenvectors);
    }
}
