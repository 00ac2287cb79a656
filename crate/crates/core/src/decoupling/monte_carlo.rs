use std::collections::BTreeMap;

use rayon::prelude::*;

use super::bounds::{bound_evaluate, lambda_rate, BoundKind, BoundParams};
use super::instance::{error_of_unitary, DecouplingInstance, Ensemble};
use super::kernel::{exact_square_bound, haar_square_bound, KERNEL_MAX_DIM};
use crate::error::{Error, Result};

/// Summary of a Monte-Carlo run.
#[derive(Clone, Debug, PartialEq)]
pub struct DecouplingReport {
    pub ensemble: Ensemble,
    pub samples: usize,
    pub mean_error: f64,
    /// Standard error of the mean.
    pub std_error: f64,
    pub mean_square: f64,
    pub mean_square_std_error: f64,
    /// Exact kernel for `D[ℓ]` or Haar ensembles small enough to form it.
    pub exact_square_bound: Option<f64>,
    /// Bound name to value; smoothed bounds are evaluated at `ε = 0` with unsmoothed entropies.
    pub bound_values: BTreeMap<String, f64>,
    /// `−log₂` of the ensemble's own bound, NaN when the ensemble has none.
    pub lambda_rate: f64,
}

impl DecouplingReport {
    pub fn bound(&self, which: BoundKind) -> Option<f64> {
        self.bound_values.get(which.name()).copied()
    }

    /// Standard error of `mean_error²` by first-order propagation.
    pub fn propagated_square_error(&self) -> f64 {
        2.0 * self.mean_error * self.std_error
    }
}

/// Sum in a fixed binary tree, so the result does not depend on scheduling.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Mean and standard error of the mean.
pub fn mean_and_std_error(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let sq: Vec<f64> = xs.iter().map(|x| (x - mean).powi(2)).collect();
    (mean, (pairwise_sum(&sq) / (n - 1.0) / n).sqrt())
}

/// Decoupling errors of the instance's `samples` draws, in sample order.
pub fn mc_errors(inst: &DecouplingInstance) -> Result<Vec<f64>> {
    (0..inst.samples).into_par_iter().map(|i| error_of_unitary(inst, &inst.sample_unitary(i)?)).collect()
}

/// Entropy-based bounds available for the instance.
pub fn instance_bounds(inst: &DecouplingInstance) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    let hmin = inst.min_entropies()?;
    let haar = BoundParams::new().with("h_ar", hmin.hmin_ar).with("h_ab", hmin.hmin_ab).with("epsilon", 0.0);
    out.insert(BoundKind::HaarEq8.name().to_string(), bound_evaluate(BoundKind::HaarEq8, &haar)?);
    if let Some(ell) = inst.ensemble.ell() {
        let h2 = inst.collision_entropies()?;
        let p = BoundParams::new()
            .with("h_ar", h2.h2_ar)
            .with("h_ab", h2.h2_ab)
            .with("d_a", inst.d_a() as f64)
            .with("ell", ell as f64);
        out.insert(BoundKind::Theorem4H2.name().to_string(), bound_evaluate(BoundKind::Theorem4H2, &p)?);
    }
    Ok(out)
}

/// Monte-Carlo estimate of `E‖T(UρU^dagger) − τ_B ⊗ ρ_R‖₁` together with the bounds.
pub fn mc_decoupling(inst: &DecouplingInstance) -> Result<DecouplingReport> {
    if inst.samples < 2 {
        return Err(Error::InvalidParameter("mc_decoupling needs at least two samples".into()));
    }
    let errors = mc_errors(inst)?;
    let (mean_error, std_error) = mean_and_std_error(&errors);
    let squares: Vec<f64> = errors.iter().map(|e| e * e).collect();
    let (mean_square, mean_square_std_error) = mean_and_std_error(&squares);
    let small = inst.d_a() <= KERNEL_MAX_DIM;
    let exact = match inst.ensemble {
        Ensemble::DEll(ell) if small => Some(exact_square_bound(inst, ell, None, None)?),
        Ensemble::Haar if small => Some(haar_square_bound(inst, None, None)?),
        _ => None,
    };
    let bound_values = instance_bounds(inst)?;
    let own = match inst.ensemble {
        Ensemble::DEll(_) => bound_values.get(BoundKind::Theorem4H2.name()).copied(),
        Ensemble::Haar => bound_values.get(BoundKind::HaarEq8.name()).copied(),
        _ => None,
    };
    Ok(DecouplingReport {
        ensemble: inst.ensemble,
        samples: inst.samples,
        mean_error,
        std_error,
        mean_square,
        mean_square_std_error,
        exact_square_bound: exact,
        bound_values,
        lambda_rate: own.map_or(f64::NAN, lambda_rate),
    })
}
