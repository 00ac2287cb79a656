use std::fmt;

use num_complex::Complex64;

use super::diag::Basis;
use super::twirl::{apply_r, twirl2_diag, twirl2_haar};
use crate::error::{Error, Result};
use crate::linalg::{eigvalsh, operator_norm, partial_trace, ComplexMatrix};

/// Largest number of superoperator entries `map_r_pow` will allocate.
pub const SUPEROP_ENTRY_LIMIT: usize = 1 << 24;

/// A linear map on `B(H_d ⊗ H_d)` stored as a column-stacking superoperator,
/// `vec(X)[i + j·D] = X[i, j]` with `D = d²`.
#[derive(Clone, Debug)]
pub struct MomentSuperOp {
    pub matrix: ComplexMatrix,
    pub d: usize,
}

impl MomentSuperOp {
    pub fn fold(&self) -> usize {
        2
    }

    /// Dimension `D = d²` of the doubled space.
    pub fn space_dim(&self) -> usize {
        self.d * self.d
    }

    /// Tabulates a linear map by applying it to every matrix unit.
    pub fn from_map(d: usize, f: impl Fn(&ComplexMatrix) -> Result<ComplexMatrix>) -> Result<Self> {
        let dd = d * d;
        let n = dd * dd;
        check_guard(n)?;
        let mut s = ComplexMatrix::zeros(n, n);
        for i in 0..dd {
            for j in 0..dd {
                let y = f(&ComplexMatrix::unit(dd, i, j))?;
                let col = i + j * dd;
                for a in 0..dd {
                    for b in 0..dd {
                        s[(a + b * dd, col)] = y[(a, b)];
                    }
                }
            }
        }
        Ok(Self { matrix: s, d })
    }

    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        let dd = self.space_dim();
        if x.shape() != (dd, dd) {
            return Err(Error::DimensionMismatch(format!("superoperator acts on {dd}x{dd} matrices")));
        }
        let mut v = vec![Complex64::new(0.0, 0.0); dd * dd];
        for i in 0..dd {
            for j in 0..dd {
                v[i + j * dd] = x[(i, j)];
            }
        }
        let w = self.matrix.matvec(&v);
        Ok(ComplexMatrix::from_fn(dd, dd, |i, j| w[i + j * dd]))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self { matrix: self.matrix.matmul(&other.matrix), d: self.d }
    }

    pub fn pow(&self, ell: usize) -> Self {
        let mut out = self.clone();
        for _ in 1..ell {
            out = out.compose(self);
        }
        out
    }

    /// Normalized Choi matrix `(1/D) Σ E_ij ⊗ T(E_ij)` on the `D²`-dimensional space.
    pub fn choi(&self) -> ComplexMatrix {
        let dd = self.space_dim();
        let n = dd * dd;
        let s = &self.matrix;
        ComplexMatrix::from_fn(n, n, |r, c| {
            let (i, k) = (r / dd, r % dd);
            let (j, l) = (c / dd, c % dd);
            s[(k + l * dd, i + j * dd)] / dd as f64
        })
    }

    /// Largest deviation of `tr T(E_ij)` from `δ_ij`.
    pub fn trace_preservation_residual(&self) -> f64 {
        let dd = self.space_dim();
        let mut worst: f64 = 0.0;
        for i in 0..dd {
            for j in 0..dd {
                let col = i + j * dd;
                let tr: Complex64 = (0..dd).map(|a| self.matrix[(a + a * dd, col)]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((tr - target).norm());
            }
        }
        worst
    }
}

fn check_guard(entries_side: usize) -> Result<()> {
    if entries_side.saturating_mul(entries_side) > SUPEROP_ENTRY_LIMIT {
        return Err(Error::SizeGuard(format!(
            "a {entries_side}x{entries_side} superoperator exceeds the {SUPEROP_ENTRY_LIMIT}-entry limit"
        )));
    }
    Ok(())
}

fn qubit_dim(n_qubits: usize) -> Result<usize> {
    if n_qubits == 0 || n_qubits > 16 {
        return Err(Error::InvalidParameter(format!("unsupported qubit count {n_qubits}")));
    }
    let d = 1usize << n_qubits;
    check_guard(d.pow(4))?;
    Ok(d)
}

/// Superoperator of the diagonal twirl in the given basis.
pub fn diag_twirl_superop(n_qubits: usize, basis: Basis) -> Result<MomentSuperOp> {
    let d = qubit_dim(n_qubits)?;
    MomentSuperOp::from_map(d, |x| twirl2_diag(x, basis))
}

/// Superoperator of the Haar 2-fold twirl.
pub fn haar_superop(n_qubits: usize) -> Result<MomentSuperOp> {
    let d = qubit_dim(n_qubits)?;
    MomentSuperOp::from_map(d, twirl2_haar)
}

/// `R^ℓ` with `R = G_Z ∘ G_X ∘ G_Z`, the 2-fold moment operator of `D[ℓ]`.
pub fn map_r_pow(n_qubits: usize, ell: usize) -> Result<MomentSuperOp> {
    if ell == 0 {
        return Err(Error::InvalidParameter("ell must be at least 1".into()));
    }
    let d = qubit_dim(n_qubits)?;
    let r = MomentSuperOp::from_map(d, |x| apply_r(x, d, 1))?;
    Ok(r.pow(ell))
}

/// Exact non-negative rational number.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rational {
    pub num: u128,
    pub den: u128,
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Rational {
    pub fn new(num: u128, den: u128) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidParameter("zero denominator".into()));
        }
        let g = gcd(num, den).max(1);
        Ok(Self { num: num / g, den: den / g })
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

fn checked_pow(base: u128, exp: usize) -> Result<u128> {
    let e = u32::try_from(exp).map_err(|_| Error::InvalidParameter("exponent too large".into()))?;
    base.checked_pow(e).ok_or_else(|| Error::InvalidParameter(format!("{base}^{exp} overflows exact arithmetic")))
}

/// `p_ℓ = (d^{ℓ+1} + d^ℓ - 2) / (d^{2ℓ} (d - 1))` in exact arithmetic.
pub fn p_ell_rational(d: u128, ell: usize) -> Result<Rational> {
    if d < 2 || ell == 0 {
        return Err(Error::InvalidParameter(format!("p_ell needs d >= 2 and ell >= 1, got d={d}, ell={ell}")));
    }
    let num = checked_pow(d, ell + 1)? + checked_pow(d, ell)? - 2;
    let den = checked_pow(d, 2 * ell)?
        .checked_mul(d - 1)
        .ok_or_else(|| Error::InvalidParameter("p_ell denominator overflows".into()))?;
    Rational::new(num, den)
}

/// `p_ℓ` in floating point.
pub fn p_ell(d: usize, ell: usize) -> f64 {
    let (df, l) = (d as f64, ell as i32);
    (df.powi(l + 1) + df.powi(l) - 2.0) / (df.powi(2 * l) * (df - 1.0))
}

/// Validity record of the numerically extracted map `C`.
#[derive(Clone, Debug)]
pub struct Lemma5Report {
    pub min_choi_eigenvalue: f64,
    /// `max |tr_out J(C) - I/D|`.
    pub tp_residual: f64,
    /// `‖C(I) - I‖_∞`.
    pub unital_residual: f64,
    /// `max |R^ℓ - (1-p)G_H - pC|` over superoperator entries.
    pub decomposition_residual: f64,
}

#[derive(Clone, Debug)]
pub struct Lemma5Decomposition {
    pub p_ell: f64,
    pub p_ell_exact: Rational,
    pub c_superop: MomentSuperOp,
    pub c_choi: ComplexMatrix,
    pub report: Lemma5Report,
}

/// Splits `R^ℓ = (1 - p_ℓ) G_H + p_ℓ C` and checks that `C` is a unital CPTP map.
pub fn lemma5_decompose(n_qubits: usize, ell: usize) -> Result<Lemma5Decomposition> {
    let r = map_r_pow(n_qubits, ell)?;
    let g = haar_superop(n_qubits)?;
    let d = r.d;
    let exact = p_ell_rational(d as u128, ell)?;
    let p = exact.to_f64();
    let c_matrix = (&r.matrix - &g.matrix.scale(1.0 - p)).scale(1.0 / p);
    let c = MomentSuperOp { matrix: c_matrix, d };

    let recomposed = &g.matrix.scale(1.0 - p) + &c.matrix.scale(p);
    let decomposition_residual = recomposed.max_abs_diff(&r.matrix);

    let dd = d * d;
    let c_choi = c.choi().hermitian_part();
    let min_choi_eigenvalue = eigvalsh(&c_choi)?[0];
    let tp_residual =
        partial_trace(&c_choi, &[dd, dd], &[1])?.max_abs_diff(&ComplexMatrix::identity(dd).scale(1.0 / dd as f64));
    let c_of_id = c.apply(&ComplexMatrix::identity(dd))?;
    let unital_residual = operator_norm(&(&c_of_id - &ComplexMatrix::identity(dd)));

    Ok(Lemma5Decomposition {
        p_ell: p,
        p_ell_exact: exact,
        c_superop: c,
        c_choi,
        report: Lemma5Report { min_choi_eigenvalue, tp_residual, unital_residual, decomposition_residual },
    })
}
