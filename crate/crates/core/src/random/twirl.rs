use num_complex::Complex64;

use super::diag::Basis;
use crate::error::{Error, Result};
use crate::linalg::{hadamard_all, qubit_count, ComplexMatrix};

fn square_root_dim(x: &ComplexMatrix) -> Result<usize> {
    if !x.is_square() {
        return Err(Error::DimensionMismatch("twirl input must be square".into()));
    }
    let n = x.rows();
    let d = (n as f64).sqrt().round() as usize;
    if d * d != n {
        return Err(Error::DimensionMismatch(format!("size {n} is not a perfect square")));
    }
    Ok(d)
}

fn check_spectator(x: &ComplexMatrix, d: usize, d_s: usize) -> Result<()> {
    if x.shape() != (d * d * d_s, d * d * d_s) {
        return Err(Error::DimensionMismatch(format!(
            "operator of size {}x{} does not act on {d}x{d}x{d_s}",
            x.rows(),
            x.cols()
        )));
    }
    Ok(())
}

fn z_twirl(x: &ComplexMatrix, d: usize, d_s: usize) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(x.rows(), x.cols());
    for i in 0..d {
        for j in 0..d {
            let row_pair = i * d + j;
            let keep = [i * d + j, j * d + i];
            let n_keep = if i == j { 1 } else { 2 };
            for &col_pair in &keep[..n_keep] {
                for s in 0..d_s {
                    for t in 0..d_s {
                        let (r, c) = (row_pair * d_s + s, col_pair * d_s + t);
                        out[(r, c)] = x[(r, c)];
                    }
                }
            }
        }
    }
    out
}

/// `H ⊗ H ⊗ I_S` for a qubit dimension `d`.
fn hadamard_pair(d: usize, d_s: usize) -> Result<ComplexMatrix> {
    let h = hadamard_all(qubit_count(d)?);
    Ok(h.kron(&h).kron(&ComplexMatrix::identity(d_s)))
}

/// Exact 2-fold twirl over random diagonal unitaries acting on the first two
/// factors of an operator on `A ⊗ A' ⊗ S`.
pub fn twirl2_diag_spectator(x: &ComplexMatrix, d: usize, d_s: usize, basis: Basis) -> Result<ComplexMatrix> {
    check_spectator(x, d, d_s)?;
    qubit_count(d)?;
    Ok(match basis {
        Basis::Z => z_twirl(x, d, d_s),
        Basis::X => {
            let w = hadamard_pair(d, d_s)?;
            w.matmul(&z_twirl(&w.matmul(x).matmul(&w), d, d_s)).matmul(&w)
        }
    })
}

/// `E[(D ⊗ D) X (D ⊗ D)^dagger]` for `D` a random Z- or X-diagonal unitary.
pub fn twirl2_diag(x: &ComplexMatrix, basis: Basis) -> Result<ComplexMatrix> {
    let d = square_root_dim(x)?;
    twirl2_diag_spectator(x, d, 1, basis)
}

/// Haar 2-fold twirl on the first two factors of `A ⊗ A' ⊗ S`, applied blockwise
/// over the spectator: each block becomes `α I + β F`.
pub fn twirl2_haar_spectator(x: &ComplexMatrix, d: usize, d_s: usize) -> Result<ComplexMatrix> {
    check_spectator(x, d, d_s)?;
    if d == 1 {
        return Ok(x.clone());
    }
    let dd = d * d;
    let df = d as f64;
    let denom = df * (df * df - 1.0);
    let mut out = ComplexMatrix::zeros(x.rows(), x.cols());
    for s in 0..d_s {
        for t in 0..d_s {
            let at = |p: usize, q: usize| x[(p * d_s + s, q * d_s + t)];
            let mut tr = Complex64::new(0.0, 0.0);
            let mut tr_f = Complex64::new(0.0, 0.0);
            for i in 0..d {
                for j in 0..d {
                    tr_f += at(i * d + j, j * d + i);
                }
            }
            for p in 0..dd {
                tr += at(p, p);
            }
            let alpha = (tr * df - tr_f) / denom;
            let beta = (tr_f * df - tr) / denom;
            for i in 0..d {
                for j in 0..d {
                    let p = i * d + j;
                    out[(p * d_s + s, p * d_s + t)] += alpha;
                    let q = j * d + i;
                    out[(p * d_s + s, q * d_s + t)] += beta;
                }
            }
        }
    }
    Ok(out)
}

/// Haar 2-fold twirl `α(X) I + β(X) F`.
pub fn twirl2_haar(x: &ComplexMatrix) -> Result<ComplexMatrix> {
    let d = square_root_dim(x)?;
    twirl2_haar_spectator(x, d, 1)
}

/// One application of `R = G_Z ∘ G_X ∘ G_Z` on the first two factors of `A ⊗ A' ⊗ S`.
pub fn apply_r(x: &ComplexMatrix, d: usize, d_s: usize) -> Result<ComplexMatrix> {
    let y = twirl2_diag_spectator(x, d, d_s, Basis::Z)?;
    let y = twirl2_diag_spectator(&y, d, d_s, Basis::X)?;
    twirl2_diag_spectator(&y, d, d_s, Basis::Z)
}

/// `R^ℓ(X)`, which is also the 2-fold moment of `D[ℓ]`.
pub fn apply_r_pow(x: &ComplexMatrix, d: usize, d_s: usize, ell: usize) -> Result<ComplexMatrix> {
    let mut y = x.clone();
    for _ in 0..ell {
        y = apply_r(&y, d, d_s)?;
    }
    Ok(y)
}
