//! Coherent-state-merging rates, the partial-trace decoupling threshold and the
//! relative-thermalisation condition, evaluated with unsmoothed entropies.

use std::fmt;

use crate::decoupling::{bound_evaluate, BoundKind, BoundParams};
use crate::entropy::{h_0, h_max, h_min_bipartite};
use crate::error::{Error, Result};
use crate::linalg::{max_eigenvalue, partial_trace, ComplexMatrix, QuantumState};

/// Marks outputs where smooth entropies were replaced by their unsmoothed values.
pub const SURROGATE_LABEL: &str = "unsmoothed surrogate";

/// `log₂(1 + 8 d^{2−ℓ})`.
pub fn ell_correction(d_a: usize, ell: usize) -> f64 {
    (1.0 + 8.0 * (d_a as f64).powf(2.0 - ell as f64)).log2()
}

/// `δ' = δ + √(4√δ − 4δ)`.
pub fn delta_prime(delta: f64) -> f64 {
    delta + (4.0 * delta.sqrt() - 4.0 * delta).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MergingRates {
    /// Entanglement gain in ebits.
    pub e_gain: f64,
    /// Quantum communication cost in qubits.
    pub q_cost: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub delta_prime: f64,
    pub ell: usize,
    pub h_min_ar: f64,
    pub h_0_a: f64,
}

impl fmt::Display for MergingRates {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "merging rates ({SURROGATE_LABEL}): e >= {:.6}, q <= {:.6} at epsilon = {:.6} (delta = {}, delta' = {:.6}, ell = {})",
            self.e_gain, self.q_cost, self.epsilon, self.delta, self.delta_prime, self.ell
        )
    }
}

/// Rates for merging `A` of a pure state on `A ⊗ B ⊗ R` with a `D[ℓ]` encoding.
pub fn merging_rates(psi_abr: &QuantumState, ell: usize, delta: f64) -> Result<MergingRates> {
    let dims = psi_abr.dims();
    if dims.len() != 3 {
        return Err(Error::DimensionMismatch(format!("expected dims (d_A, d_B, d_R), got {dims:?}")));
    }
    if (psi_abr.purity() - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidState(format!("merging needs a pure state, purity is {}", psi_abr.purity())));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta = {delta} must lie in (0, 1)")));
    }
    if ell == 0 {
        return Err(Error::InvalidParameter("ell must be at least 1".into()));
    }
    let (d_a, d_r) = (dims[0], dims[2]);
    let psi_ar = psi_abr.marginal(&[0, 2])?;
    let h_min_ar = h_min_bipartite(psi_ar.matrix(), d_a, d_r)?.value;
    let h_0_a = h_0(&psi_abr.marginal(&[0])?);
    let dp = delta_prime(delta);
    let shift = dp.log2() + ell_correction(d_a, ell);
    Ok(MergingRates {
        e_gain: 0.5 * (h_min_ar + h_0_a) + shift,
        q_cost: 0.5 * (h_0_a - h_min_ar) - shift,
        epsilon: 2.0 * (9.0 * dp).sqrt() + 2.0 * delta.sqrt(),
        delta,
        delta_prime: dp,
        ell,
        h_min_ar,
        h_0_a,
    })
}

/// Largest `log₂ d_{A₁}` for which tracing out `A₂` after `D[ℓ]` leaves a mean error of at most `9ε`.
pub fn corollary6_threshold(h_min_ar: f64, d_a: usize, ell: usize, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon = {epsilon} must be positive")));
    }
    if ell == 0 {
        return Err(Error::InvalidParameter("ell must be at least 1".into()));
    }
    Ok(0.5 * (h_min_ar + (d_a as f64).log2()) + epsilon.log2() + ell_correction(d_a, ell))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermalisationVerdict {
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
    /// Fraction of `D[ℓ]` draws that may fail to thermalise.
    pub fraction_bound: f64,
    pub h_min_se_r: f64,
    pub h_min_e: f64,
    pub h_max_s: f64,
    pub k: f64,
}

impl fmt::Display for ThermalisationVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "relative thermalisation ({SURROGATE_LABEL}): lhs = {:.6}, rhs = {:.6}, {}; failure fraction <= {:.6e}",
            self.lhs,
            self.rhs,
            if self.satisfied { "PASS" } else { "FAIL" },
            self.fraction_bound
        )
    }
}

/// Dimensions of the system, environment and reference.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ThermalDims {
    pub d_s: usize,
    pub d_e: usize,
    pub d_r: usize,
}

/// Thresholds of the thermalisation condition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermalParams {
    pub ell: usize,
    pub eps1: f64,
    pub eps2: f64,
    pub eps3: f64,
    pub delta_target: f64,
}

impl ThermalParams {
    fn validate(&self) -> Result<()> {
        let ThermalParams { ell, eps1, eps2, eps3, delta_target } = *self;
        if ell == 0 {
            return Err(Error::InvalidParameter("ell must be at least 1".into()));
        }
        if eps2 < 0.0 || eps3 < 0.0 || eps1.is_nan() {
            return Err(Error::InvalidParameter("smoothing parameters must be non-negative".into()));
        }
        if eps1 <= eps2 + eps3 {
            return Err(Error::InvalidParameter(format!("eps1 = {eps1} must exceed eps2 + eps3 = {}", eps2 + eps3)));
        }
        if delta_target - 24.0 * eps1 <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "delta - 24 eps1 = {} is not positive, so the condition can never hold",
                delta_target - 24.0 * eps1
            )));
        }
        Ok(())
    }
}

/// Checks whether `S` thermalises relative to `R` for a state on `Ξ ⊗ R`.
///
/// `xi` is an isometry from `Ξ` into `S ⊗ E`; `None` takes `Ξ = S ⊗ E`.
pub fn thermalisation_check(
    rho_xi_r: &QuantumState,
    xi: Option<&ComplexMatrix>,
    dims: ThermalDims,
    params: ThermalParams,
) -> Result<ThermalisationVerdict> {
    params.validate()?;
    let ThermalDims { d_s, d_e, d_r } = dims;
    let d_se = d_s * d_e;
    let v = match xi {
        Some(v) => {
            if v.rows() != d_se || v.cols() > d_se || v.cols() == 0 {
                return Err(Error::DimensionMismatch(format!(
                    "isometry must be {d_se} x k with 1 <= k <= {d_se}, got {}x{}",
                    v.rows(),
                    v.cols()
                )));
            }
            let gram = v.adjoint().matmul(v);
            if gram.max_abs_diff(&ComplexMatrix::identity(v.cols())) > 1e-9 {
                return Err(Error::InvalidParameter("xi is not an isometry".into()));
            }
            v.clone()
        }
        None => ComplexMatrix::identity(d_se),
    };
    let d_xi = v.cols();
    if rho_xi_r.dim() != d_xi * d_r {
        return Err(Error::DimensionMismatch(format!(
            "state of dimension {} does not live on Xi ({d_xi}) x R ({d_r})",
            rho_xi_r.dim()
        )));
    }
    let pi_se = v.matmul(&v.adjoint()).scale(1.0 / d_xi as f64);
    let pi_s = QuantumState::normalized(partial_trace(&pi_se, &[d_s, d_e], &[1])?, vec![d_s])?;
    let pi_e = partial_trace(&pi_se, &[d_s, d_e], &[0])?;
    let h_min_e = -max_eigenvalue(&pi_e)?.log2();
    let h_max_s = h_max(&pi_s);
    let h_min_se_r = h_min_bipartite(rho_xi_r.matrix(), d_xi, d_r)?.value;

    let lift = v.kron(&ComplexMatrix::identity(d_r));
    let rho_ser = lift.matmul(rho_xi_r.matrix()).matmul(&lift.adjoint());
    let rho_s = partial_trace(&rho_ser, &[d_s, d_e, d_r], &[1, 2])?;
    let k = d_s as f64 * max_eigenvalue(&rho_s)?;

    let ThermalParams { ell, eps1, eps2, eps3, delta_target } = params;
    let x = eps1 - eps2 - eps3;
    let smoothing = 1.0 - (1.0 - x * x).max(0.0).sqrt();
    let coeff = 2.0 * (1.0 + 8.0 * (d_s as f64).powf(2.0 - ell as f64)).sqrt();
    let rhs = 2.0 * (coeff / (smoothing * (delta_target - 24.0 * eps1))).log2();
    let lhs = h_min_se_r + h_min_e - h_max_s;
    let fraction_bound = bound_evaluate(
        BoundKind::Theorem5Tail,
        &BoundParams::new().with("d_a", d_s as f64).with("ell", ell as f64).with("eta", delta_target).with("k", k),
    )?;
    Ok(ThermalisationVerdict { lhs, rhs, satisfied: lhs >= rhs, fraction_bound, h_min_se_r, h_min_e, h_max_s, k })
}
