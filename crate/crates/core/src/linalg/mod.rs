//! Dense complex linear algebra and the quantum-object layer.

pub mod channel;
pub mod matrix;
pub mod quantum;
pub mod spectral;

pub use channel::{apply_kraus, j_inv_apply, j_map, Channel, ChannelDescription};
pub use matrix::{kron, ComplexMatrix};
pub use quantum::{
    hadamard_all, max_entangled, max_entangled_vector, partial_trace, permute_subsystems, qubit_count, swap_operator,
    NormClass, QuantumState,
};
pub use spectral::{
    eigh, eigvalsh, max_eigenvalue, min_eigenvalue, operator_norm, pinv_power, pinv_quarter_root, singular_values,
    sqrt_psd, support_basis, support_projector, trace_norm, Eigh,
};
