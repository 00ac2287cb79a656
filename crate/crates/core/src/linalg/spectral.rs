use faer::Side;
use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

/// Largest tolerated Hermiticity violation for spectral routines.
pub const HERMITIAN_TOL: f64 = 1e-8;
/// Eigenvalues in `[-CLAMP_TOL, 0)` are clamped to zero by PSD routines.
pub const CLAMP_TOL: f64 = 1e-8;

/// Spectral decomposition `h = V diag(values) V^dagger` with ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl Eigh {
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map(|x| x)
    }

    /// `V diag(f(values)) V^dagger`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let fv: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        let v = &self.vectors;
        let mut scaled = v.clone();
        for i in 0..n {
            for j in 0..n {
                scaled[(i, j)] *= fv[j];
            }
        }
        scaled.matmul(&v.adjoint())
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

fn check_hermitian(h: &ComplexMatrix) -> Result<()> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch(format!("expected a square matrix, got {}x{}", h.rows(), h.cols())));
    }
    let dev = h.hermitian_deviation();
    if dev > HERMITIAN_TOL * h.max_abs().max(1.0) {
        return Err(Error::NotHermitian { deviation: dev });
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix; eigenvalues ascend.
pub fn eigh(h: &ComplexMatrix) -> Result<Eigh> {
    check_hermitian(h)?;
    let n = h.rows();
    let hf = h.hermitian_part().to_faer();
    let eig = hf.self_adjoint_eigen(Side::Lower).map_err(|_| Error::Eigen)?;
    let s = eig.S().column_vector();
    let u = eig.U();
    let values: Vec<f64> = (0..n).map(|i| s[i].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| u[(i, j)]);
    Ok(Eigh { values, vectors })
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn eigvalsh(h: &ComplexMatrix) -> Result<Vec<f64>> {
    check_hermitian(h)?;
    let hf = h.hermitian_part().to_faer();
    let vals = hf.self_adjoint_eigenvalues(Side::Lower).map_err(|_| Error::Eigen)?;
    let mut out: Vec<f64> = vals;
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// `[[0, M], [M^dagger, 0]]`, whose spectrum is `±` the singular values of `M`.
fn doubled_embedding(m: &ComplexMatrix) -> ComplexMatrix {
    let (r, c) = m.shape();
    let zero = Complex64::new(0.0, 0.0);
    ComplexMatrix::from_fn(r + c, r + c, |i, j| {
        if i < r && j >= r {
            m[(i, j - r)]
        } else if i >= r && j < r {
            m[(j, i - r)].conj()
        } else {
            zero
        }
    })
}

/// Singular values in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let k = m.rows().min(m.cols());
    let vals = eigvalsh(&doubled_embedding(m))?;
    Ok(vals.iter().rev().take(k).map(|&x| x.max(0.0)).collect())
}

/// Schatten 1-norm.
pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    if m.is_square() && m.hermitian_deviation() <= 1e-12 * m.max_abs().max(1.0) {
        if let Ok(vals) = eigvalsh(m) {
            return vals.iter().map(|x| x.abs()).sum();
        }
    }
    singular_values(m).map(|s| s.iter().sum()).unwrap_or(f64::NAN)
}

/// Largest singular value.
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    if m.is_square() && m.hermitian_deviation() <= 1e-12 * m.max_abs().max(1.0) {
        if let Ok(vals) = eigvalsh(m) {
            return vals.iter().map(|x| x.abs()).fold(0.0, f64::max);
        }
    }
    singular_values(m).map(|s| s.first().copied().unwrap_or(0.0)).unwrap_or(f64::NAN)
}

pub fn min_eigenvalue(h: &ComplexMatrix) -> Result<f64> {
    Ok(eigvalsh(h)?[0])
}

pub fn max_eigenvalue(h: &ComplexMatrix) -> Result<f64> {
    Ok(*eigvalsh(h)?.last().expect("non-empty spectrum"))
}

fn psd_eigh(p: &ComplexMatrix) -> Result<Eigh> {
    let e = eigh(p)?;
    if e.min() < -CLAMP_TOL {
        return Err(Error::NotPositive { eigenvalue: e.min() });
    }
    Ok(e)
}

/// Threshold below which an eigenvalue of a PSD matrix counts as kernel.
pub fn support_threshold(e: &Eigh) -> f64 {
    1e-12 * e.max().abs().max(1.0) * e.values.len() as f64
}

/// Moore-Penrose power `p^a` of a PSD matrix taken on its support.
pub fn pinv_power(p: &ComplexMatrix, exponent: f64) -> Result<ComplexMatrix> {
    let e = psd_eigh(p)?;
    let tol = support_threshold(&e);
    Ok(e.map(|x| if x > tol { x.powf(exponent) } else { 0.0 }))
}

/// `p^{-1/4}` on the support of `p`, zero on its kernel.
pub fn pinv_quarter_root(p: &ComplexMatrix) -> Result<ComplexMatrix> {
    pinv_power(p, -0.25)
}

/// Principal square root of a PSD matrix; slightly negative eigenvalues are clamped.
pub fn sqrt_psd(p: &ComplexMatrix) -> Result<ComplexMatrix> {
    let e = psd_eigh(p)?;
    Ok(e.map(|x| x.max(0.0).sqrt()))
}

/// Projector onto the support of a PSD matrix.
pub fn support_projector(p: &ComplexMatrix) -> Result<ComplexMatrix> {
    let e = psd_eigh(p)?;
    let tol = support_threshold(&e);
    Ok(e.map(|x| if x > tol { 1.0 } else { 0.0 }))
}

/// Orthonormal basis of the support as the columns of a `d x r` matrix.
pub fn support_basis(p: &ComplexMatrix) -> Result<ComplexMatrix> {
    let e = psd_eigh(p)?;
    let tol = support_threshold(&e);
    let cols: Vec<usize> = (0..e.values.len()).filter(|&k| e.values[k] > tol).collect();
    if cols.is_empty() {
        return Err(Error::InvalidState("operator has empty support".into()));
    }
    Ok(ComplexMatrix::from_fn(p.rows(), cols.len(), |i, j| e.vectors[(i, cols[j])]))
}
