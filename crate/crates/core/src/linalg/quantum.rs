use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use super::spectral::{eigh, eigvalsh};
use crate::error::{Error, Result};

/// Absolute tolerance for state invariants.
pub const STATE_TOL: f64 = 1e-10;
/// Violations up to this size are repaired instead of rejected.
pub const REPAIR_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormClass {
    Normalized,
    Subnormalized,
}

/// Density operator with a subsystem-dimension signature.
#[derive(Clone, Debug)]
pub struct QuantumState {
    matrix: ComplexMatrix,
    dims: Vec<usize>,
    norm_class: NormClass,
}

impl QuantumState {
    pub fn new(matrix: ComplexMatrix, dims: Vec<usize>, norm_class: NormClass) -> Result<Self> {
        check_dims(&dims, matrix.rows())?;
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch("density matrix must be square".into()));
        }
        let mut matrix = matrix;
        let dev = matrix.hermitian_deviation();
        if dev > REPAIR_TOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
        if dev > 0.0 {
            matrix = matrix.hermitian_part();
        }
        let e = eigh(&matrix)?;
        if e.min() < -REPAIR_TOL {
            return Err(Error::NotPositive { eigenvalue: e.min() });
        }
        if e.min() < -STATE_TOL {
            matrix = e.map(|x| x.max(0.0));
        }
        let tr = matrix.trace().re;
        match norm_class {
            NormClass::Normalized if (tr - 1.0).abs() > STATE_TOL => {
                return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
            }
            NormClass::Subnormalized if tr > 1.0 + STATE_TOL => {
                return Err(Error::InvalidState(format!("trace {tr} exceeds 1")));
            }
            _ => {}
        }
        Ok(Self { matrix, dims, norm_class })
    }

    /// Normalized state; the trace must equal one.
    pub fn normalized(matrix: ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        Self::new(matrix, dims, NormClass::Normalized)
    }

    /// `|psi><psi|` for a unit vector.
    pub fn pure(psi: &[Complex64], dims: Vec<usize>) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidState(format!("state vector has norm {norm}")));
        }
        Self::normalized(ComplexMatrix::outer(psi, psi), dims)
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Result<Self> {
        let d: usize = dims.iter().product();
        Self::normalized(ComplexMatrix::identity(d).scale(1.0 / d as f64), dims)
    }

    /// Computational basis state `|k><k|` on a single system.
    pub fn basis(d: usize, k: usize) -> Result<Self> {
        if k >= d {
            return Err(Error::InvalidParameter(format!("basis index {k} out of range for d={d}")));
        }
        Self::normalized(ComplexMatrix::basis_projector(d, k), vec![d])
    }

    /// `self ⊗ other` with concatenated dimension lists.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        let norm_class = if self.norm_class == NormClass::Normalized && other.norm_class == NormClass::Normalized {
            NormClass::Normalized
        } else {
            NormClass::Subnormalized
        };
        Self { matrix: self.matrix.kron(&other.matrix), dims, norm_class }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn norm_class(&self) -> NormClass {
        self.norm_class
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        self.matrix.trace_of_product(&self.matrix).re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eigvalsh(&self.matrix).expect("state matrices are Hermitian")
    }

    /// Reduced state on the listed subsystems, kept in their original order.
    pub fn marginal(&self, keep: &[usize]) -> Result<Self> {
        let traced: Vec<usize> = (0..self.dims.len()).filter(|k| !keep.contains(k)).collect();
        let m = partial_trace(&self.matrix, &self.dims, &traced)?;
        let dims = keep_sorted(keep).iter().map(|&k| self.dims[k]).collect();
        Ok(Self { matrix: m, dims, norm_class: self.norm_class })
    }

    /// Reorders subsystems so that new factor `k` is old factor `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let m = permute_subsystems(&self.matrix, &self.dims, perm)?;
        let dims = perm.iter().map(|&k| self.dims[k]).collect();
        Ok(Self { matrix: m, dims, norm_class: self.norm_class })
    }

    /// Entrywise complex conjugate, again a valid state.
    pub fn conjugate(&self) -> Self {
        Self { matrix: self.matrix.conj(), dims: self.dims.clone(), norm_class: self.norm_class }
    }

    /// `U rho U^dagger` for a unitary on the whole space.
    pub fn evolve(&self, u: &ComplexMatrix) -> Self {
        Self {
            matrix: self.matrix.conjugate_by(u).hermitian_part(),
            dims: self.dims.clone(),
            norm_class: self.norm_class,
        }
    }

    /// Collapses the subsystem signature into two factors `(A, B)` split after `k` factors.
    pub fn grouped(&self, k: usize) -> Result<Self> {
        if k > self.dims.len() {
            return Err(Error::InvalidParameter(format!("cannot split {} factors at {k}", self.dims.len())));
        }
        let a: usize = self.dims[..k].iter().product();
        let b: usize = self.dims[k..].iter().product();
        Ok(Self { matrix: self.matrix.clone(), dims: vec![a, b], norm_class: self.norm_class })
    }
}

fn keep_sorted(keep: &[usize]) -> Vec<usize> {
    let mut k = keep.to_vec();
    k.sort_unstable();
    k.dedup();
    k
}

fn check_dims(dims: &[usize], size: usize) -> Result<()> {
    if dims.is_empty() || dims.iter().any(|&d| d == 0) {
        return Err(Error::DimensionMismatch("subsystem dimensions must be positive".into()));
    }
    let prod: usize = dims.iter().product();
    if prod != size {
        return Err(Error::DimensionMismatch(format!(
            "subsystem dimensions {dims:?} multiply to {prod}, matrix has size {size}"
        )));
    }
    Ok(())
}

/// Row-major strides of a multi-index with the first factor most significant.
fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Flat offsets of every multi-index over the listed factors.
fn offsets(dims: &[usize], strides: &[usize], factors: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &f in factors {
        let mut next = Vec::with_capacity(out.len() * dims[f]);
        for &o in &out {
            for i in 0..dims[f] {
                next.push(o + i * strides[f]);
            }
        }
        out = next;
    }
    out
}

/// Traces out the listed factors of an operator on `⊗ dims`.
pub fn partial_trace(m: &ComplexMatrix, dims: &[usize], traced: &[usize]) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("partial trace needs a square matrix".into()));
    }
    check_dims(dims, m.rows())?;
    if let Some(&bad) = traced.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::DimensionMismatch(format!("no subsystem {bad} among {} factors", dims.len())));
    }
    let traced = keep_sorted(traced);
    let kept: Vec<usize> = (0..dims.len()).filter(|k| !traced.contains(k)).collect();
    let st = strides(dims);
    let koff = offsets(dims, &st, &kept);
    let toff = offsets(dims, &st, &traced);
    let n = koff.len();
    let mut out = ComplexMatrix::zeros(n, n);
    for (i, &ri) in koff.iter().enumerate() {
        for (j, &cj) in koff.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for &t in &toff {
                acc += m[(ri + t, cj + t)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// Reorders tensor factors: factor `k` of the result is factor `perm[k]` of the input.
pub fn permute_subsystems(m: &ComplexMatrix, dims: &[usize], perm: &[usize]) -> Result<ComplexMatrix> {
    check_dims(dims, m.rows())?;
    let mut seen = vec![false; dims.len()];
    if perm.len() != dims.len() || perm.iter().any(|&p| p >= dims.len() || std::mem::replace(&mut seen[p], true)) {
        return Err(Error::InvalidParameter(format!("{perm:?} is not a permutation of {} factors", dims.len())));
    }
    let st = strides(dims);
    // offsets enumerates multi-indices in the new order
    let map = offsets(dims, &st, perm);
    let n = map.len();
    Ok(ComplexMatrix::from_fn(n, n, |i, j| m[(map[i], map[j])]))
}

/// Same reordering applied to a state vector.
pub fn permute_vector(v: &[Complex64], dims: &[usize], perm: &[usize]) -> Vec<Complex64> {
    let st = strides(dims);
    offsets(dims, &st, perm).into_iter().map(|k| v[k]).collect()
}

/// `(1/√d) Σ_i |ii>`.
pub fn max_entangled_vector(d: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); d * d];
    let amp = 1.0 / (d as f64).sqrt();
    for i in 0..d {
        v[i * d + i] = Complex64::new(amp, 0.0);
    }
    v
}

/// The maximally entangled state on `H_d ⊗ H_d`.
pub fn max_entangled(d: usize) -> QuantumState {
    let v = max_entangled_vector(d);
    QuantumState { matrix: ComplexMatrix::outer(&v, &v), dims: vec![d, d], norm_class: NormClass::Normalized }
}

/// Swap operator `F = Σ |ij><ji|` on `H_d ⊗ H_d`.
pub fn swap_operator(d: usize) -> ComplexMatrix {
    let mut f = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            f[(i * d + j, j * d + i)] = Complex64::new(1.0, 0.0);
        }
    }
    f
}

/// `H^{⊗n}` as a dense `2^n x 2^n` matrix.
pub fn hadamard_all(n_qubits: usize) -> ComplexMatrix {
    let d = 1usize << n_qubits;
    let scale = 1.0 / (d as f64).sqrt();
    ComplexMatrix::from_fn(d, d, |i, j| {
        let sign = if (i & j).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        Complex64::new(sign * scale, 0.0)
    })
}

/// Number of qubits of a power-of-two dimension.
pub fn qubit_count(d: usize) -> Result<usize> {
    if d == 0 || !d.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(d));
    }
    Ok(d.trailing_zeros() as usize)
}
