//! The decoupling error functional, its Monte-Carlo and exact second-moment
//! evaluation, closed-form bounds and the concentration experiment.

mod bounds;
mod concentration;
mod instance;
mod kernel;
mod monte_carlo;
mod prop1;

pub use bounds::{bound_evaluate, chi, lambda_rate, theorem4_coefficient, BoundKind, BoundParams};
pub use concentration::{concentration_experiment, ConcentrationRecord};
pub use instance::{
    error_of_unitary, prop1_state, random_pure_instance_state, DecouplingInstance, Ensemble, InstanceEntropies,
    MinEntropies,
};
pub use kernel::{
    collapsed_square_bound, exact_square_bound, haar_square_bound, weighted_square_error, KERNEL_MAX_DIM,
};
pub use monte_carlo::{instance_bounds, mc_decoupling, mc_errors, mean_and_std_error, pairwise_sum, DecouplingReport};
pub use prop1::{prop1_closed_form, prop1_exact_second_moment, prop1_instance, prop1_quantities, Prop1Record};
