//! Samplers for random-unitary ensembles and exact 2-fold moment operators.

pub mod diag;
pub mod haar;
pub mod moments;
pub mod rng;
pub mod rqc;
pub mod states;
pub mod twirl;

pub use diag::{sample_d_ell, sample_diag, Basis, DiagCircuit, DiagUnitary};
pub use haar::{sample_haar, sample_haar_vector};
pub use moments::{
    diag_twirl_superop, haar_superop, lemma5_decompose, map_r_pow, p_ell, p_ell_rational, Lemma5Decomposition,
    Lemma5Report, MomentSuperOp, Rational,
};
pub use rng::RngSpec;
pub use rqc::sample_rqc;
pub use states::{
    sample_channel, sample_cp_map, sample_ginibre, sample_hermitian, sample_kraus, sample_mixed_state,
    sample_pure_state,
};
pub use twirl::{apply_r, apply_r_pow, twirl2_diag, twirl2_diag_spectator, twirl2_haar, twirl2_haar_spectator};
