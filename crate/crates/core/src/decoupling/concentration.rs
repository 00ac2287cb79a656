use super::bounds::{bound_evaluate, theorem4_coefficient, BoundKind, BoundParams};
use super::instance::{DecouplingInstance, Ensemble};
use super::monte_carlo::mc_errors;
use crate::error::{Error, Result};
use crate::linalg::max_eigenvalue;

/// Outcome of sampling `D[ℓ]` and counting draws above `2Δ + η`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConcentrationRecord {
    pub ell: usize,
    pub eta: f64,
    pub samples: usize,
    /// `Δ` with unsmoothed min-entropies.
    pub delta_bound: f64,
    pub threshold: f64,
    pub exceed_count: usize,
    pub empirical_fraction: f64,
    /// `K = d_A ‖ρ_A‖_∞`.
    pub k: f64,
    pub tail: f64,
    /// `√(p(1−p)/n)` at `p = min(tail, 1)`.
    pub binomial_std: f64,
    pub pass: bool,
}

pub fn concentration_experiment(
    inst: &DecouplingInstance,
    ell: usize,
    eta: f64,
    samples: usize,
) -> Result<ConcentrationRecord> {
    if samples < 100 {
        return Err(Error::InvalidParameter(format!("concentration needs at least 100 samples, got {samples}")));
    }
    if !(eta >= 0.0) {
        return Err(Error::InvalidParameter(format!("eta = {eta} must be non-negative")));
    }
    let run = inst.with_ensemble(Ensemble::DEll(ell))?.with_samples(samples, inst.rng);
    let hmin = run.min_entropies()?;
    let d_a = run.d_a() as f64;
    let delta_bound = theorem4_coefficient(d_a, ell as f64) * (-0.5 * (hmin.hmin_ar + hmin.hmin_ab)).exp2();
    let threshold = 2.0 * delta_bound + eta;
    let k = d_a * max_eigenvalue(&run.rho_a())?;
    let tail = bound_evaluate(
        BoundKind::Theorem5Tail,
        &BoundParams::new().with("d_a", d_a).with("ell", ell as f64).with("eta", eta).with("k", k),
    )?;
    let errors = mc_errors(&run)?;
    let exceed_count = errors.iter().filter(|&&e| e > threshold).count();
    let empirical_fraction = exceed_count as f64 / samples as f64;
    let p = tail.min(1.0);
    let binomial_std = (p * (1.0 - p) / samples as f64).sqrt();
    Ok(ConcentrationRecord {
        ell,
        eta,
        samples,
        delta_bound,
        threshold,
        exceed_count,
        empirical_fraction,
        k,
        tail,
        binomial_std,
        pass: empirical_fraction <= tail + 3.0 * binomial_std,
    })
}
