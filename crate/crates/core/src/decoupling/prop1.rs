use super::instance::{prop1_state, DecouplingInstance, Ensemble};
use super::kernel::{pair_contraction, KERNEL_MAX_DIM};
use super::monte_carlo::{mc_errors, mean_and_std_error};
use crate::error::{Error, Result};
use crate::linalg::{qubit_count, swap_operator, Channel};
use crate::random::{twirl2_diag, Basis, RngSpec};

/// Quantities of the two-subsystem example where one round of `D^X D^Z` fails to decouple.
#[derive(Clone, Debug, PartialEq)]
pub struct Prop1Record {
    pub d_a1: usize,
    pub d_a2: usize,
    /// `E tr[(tr_{A₂} UρU^dagger)²]` through the exact twirls, when within the size guard.
    pub exact_second_moment: Option<f64>,
    /// `1/d_{A₁} + 1/d_{A₂} − 1/d_A`.
    pub closed_form: f64,
    pub samples: usize,
    pub mc_mean: f64,
    pub mc_std_error: f64,
    /// `(closed_form − 1/d_{A₁}²)/√2`.
    pub lower_bound: f64,
    /// `d_{A₁}/√d_{A₂}`.
    pub haar_bound: f64,
}

/// `Φ_{A₁R} ⊗ |0⟩⟨0|_{A₂}` with the channel `tr_{A₂}`.
pub fn prop1_instance(
    d_a1: usize,
    d_a2: usize,
    ensemble: Ensemble,
    samples: usize,
    rng: RngSpec,
) -> Result<DecouplingInstance> {
    qubit_count(d_a1)?;
    qubit_count(d_a2)?;
    DecouplingInstance::new(prop1_state(d_a1, d_a2)?, Channel::partial_trace(d_a1, d_a2), ensemble, samples, rng)
}

/// Second moment of the output purity under `D^X D^Z`, from the exact diagonal twirls.
pub fn prop1_exact_second_moment(d_a1: usize, d_a2: usize) -> Result<f64> {
    let d_a = d_a1 * d_a2;
    if d_a > KERNEL_MAX_DIM {
        return Err(Error::SizeGuard(format!("exact second moment needs d_A <= {KERNEL_MAX_DIM}, got {d_a}")));
    }
    let inst = prop1_instance(d_a1, d_a2, Ensemble::DiagZxOnce, 0, RngSpec::new(0, 0))?;
    let m = inst.channel().adjoint_square_of_swap();
    // the twirls are self-adjoint, so the adjoint of X∘Z acts as Z∘X on the observable
    let m = twirl2_diag(&twirl2_diag(&m, Basis::X)?, Basis::Z)?;
    let f_r = swap_operator(d_a1);
    Ok(pair_contraction(inst.rho_ar().matrix(), d_a, d_a1, &m, &f_r).re)
}

pub fn prop1_closed_form(d_a1: usize, d_a2: usize) -> f64 {
    let (a, b) = (d_a1 as f64, d_a2 as f64);
    1.0 / a + 1.0 / b - 1.0 / (a * b)
}

pub fn prop1_quantities(d_a1: usize, d_a2: usize, samples: usize, rng: RngSpec) -> Result<Prop1Record> {
    if samples < 2 {
        return Err(Error::InvalidParameter("Monte-Carlo needs at least two samples".into()));
    }
    let inst = prop1_instance(d_a1, d_a2, Ensemble::DiagZxOnce, samples, rng)?;
    let exact = if d_a1 * d_a2 <= KERNEL_MAX_DIM { Some(prop1_exact_second_moment(d_a1, d_a2)?) } else { None };
    let (mc_mean, mc_std_error) = mean_and_std_error(&mc_errors(&inst)?);
    let closed_form = prop1_closed_form(d_a1, d_a2);
    let a = d_a1 as f64;
    Ok(Prop1Record {
        d_a1,
        d_a2,
        exact_second_moment: exact,
        closed_form,
        samples,
        mc_mean,
        mc_std_error,
        lower_bound: (closed_form - 1.0 / (a * a)) / std::f64::consts::SQRT_2,
        haar_bound: a / (d_a2 as f64).sqrt(),
    })
}
