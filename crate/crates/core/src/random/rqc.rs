use num_complex::Complex64;
use rand::Rng;

use super::haar::sample_haar_with;
use super::rng::RngSpec;
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// Left-multiplies `u` by a two-qubit gate acting on qubits `(q1, q2)`;
/// qubit 0 is the most significant bit of the basis index.
pub(crate) fn apply_two_qubit_gate(u: &mut ComplexMatrix, gate: &ComplexMatrix, q1: usize, q2: usize, n: usize) {
    let b1 = 1usize << (n - 1 - q1);
    let b2 = 1usize << (n - 1 - q2);
    let d = 1usize << n;
    let cols = u.cols();
    for base in 0..d {
        if base & (b1 | b2) != 0 {
            continue;
        }
        let idx = [base, base | b2, base | b1, base | b1 | b2];
        for c in 0..cols {
            let v: [Complex64; 4] = [u[(idx[0], c)], u[(idx[1], c)], u[(idx[2], c)], u[(idx[3], c)]];
            for (r, &row) in idx.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..4 {
                    acc += gate[(r, k)] * v[k];
                }
                u[(row, c)] = acc;
            }
        }
    }
}

pub(crate) fn sample_rqc_with<R: Rng + ?Sized>(n_qubits: usize, length: usize, rng: &mut R) -> ComplexMatrix {
    let mut u = ComplexMatrix::identity(1usize << n_qubits);
    for _ in 0..length {
        let q1 = rng.random_range(0..n_qubits);
        let mut q2 = rng.random_range(0..n_qubits - 1);
        if q2 >= q1 {
            q2 += 1;
        }
        let gate = sample_haar_with(4, rng);
        apply_two_qubit_gate(&mut u, &gate, q1, q2, n_qubits);
    }
    u
}

/// Product of `length` Haar-random two-qubit gates on uniformly chosen qubit pairs.
pub fn sample_rqc(n_qubits: usize, length: usize, rng: RngSpec) -> Result<ComplexMatrix> {
    if length > 0 && n_qubits < 2 {
        return Err(Error::InvalidParameter("random circuits need at least two qubits".into()));
    }
    Ok(sample_rqc_with(n_qubits, length, &mut rng.rng()))
}
