use diagdec::apps::*;
use diagdec::decoupling::{mc_decoupling, random_pure_instance_state, DecouplingInstance, Ensemble};
use diagdec::entropy::h_min_bipartite;
use diagdec::linalg::{max_entangled, Channel, ComplexMatrix, QuantumState};
use diagdec::random::{sample_haar, sample_mixed_state, sample_pure_state, RngSpec};
use diagdec::Complex64;
use proptest::prelude::*;

fn phi_ar_zero_b() -> QuantumState {
    // Φ on (A, R) with |0⟩ on B, reordered to A, B, R
    max_entangled(2).tensor(&QuantumState::basis(2, 0).unwrap()).permuted(&[0, 2, 1]).unwrap()
}

#[test]
fn merging_rates_for_entangled_reference() {
    let r = merging_rates(&phi_ar_zero_b(), 2, 0.01).unwrap();
    assert!((r.h_min_ar + 1.0).abs() < 1e-6);
    assert!((r.h_0_a - 1.0).abs() < 1e-12);
    let dp = 0.01 + (4.0 * 0.1 - 0.04f64).sqrt();
    assert!((r.delta_prime - dp).abs() < 1e-15);
    let expected = dp.log2() + 9f64.log2();
    assert!((r.e_gain - expected).abs() < 1e-6);
    assert!((r.epsilon - (2.0 * (9.0 * dp).sqrt() + 0.2)).abs() < 1e-12);
}

#[test]
fn merging_rates_for_product_a() {
    let psi = QuantumState::basis(2, 0).unwrap().tensor(&max_entangled(2));
    let r = merging_rates(&psi, 2, 0.05).unwrap();
    let shift = r.delta_prime.log2() + 9f64.log2();
    assert!((r.e_gain - shift).abs() < 1e-6);
    assert!((r.q_cost + shift).abs() < 1e-6);
}

#[test]
fn correction_vanishes_with_depth() {
    let psi = sample_pure_state(vec![4, 2, 2], RngSpec::new(3, 0)).unwrap();
    let deep = merging_rates(&psi, 60, 0.02).unwrap();
    let haar_form = 0.5 * (deep.h_min_ar + deep.h_0_a) + deep.delta_prime.log2();
    assert!((deep.e_gain - haar_form).abs() < 1e-12);
    assert!(ell_correction(4, 60) < 1e-30);
    assert!(ell_correction(4, 1) > ell_correction(4, 2));
}

#[test]
fn merging_input_validation() {
    let mixed = sample_mixed_state(vec![2, 2, 2], 2, RngSpec::new(0, 0)).unwrap();
    assert!(merging_rates(&mixed, 2, 0.1).is_err());
    let pure = phi_ar_zero_b();
    assert!(merging_rates(&pure, 2, 1.0).is_err());
    assert!(merging_rates(&pure, 2, 0.0).is_err());
    assert!(merging_rates(&pure, 0, 0.1).is_err());
    assert!(merging_rates(&max_entangled(2), 2, 0.1).is_err());
}

#[test]
fn threshold_arithmetic() {
    let d = 16;
    let v = corollary6_threshold(4.0, d, 2, 0.5).unwrap();
    assert!((v - (4.0 - 1.0 + 9f64.log2())).abs() < 1e-12);
    let a = corollary6_threshold(1.0, d, 2, 0.5).unwrap();
    let b = corollary6_threshold(1.0, d, 2, 1.0).unwrap();
    assert!((b - a - 1.0).abs() < 1e-12);
    assert!(corollary6_threshold(1.0, d, 2, 0.0).is_err());
    assert!(corollary6_threshold(2.0, d, 2, 0.5).unwrap() > a);
}

#[test]
fn partial_trace_below_threshold_decouples_within_nine_epsilon() {
    let (d_a, d_r, eps, ell) = (16usize, 4usize, 0.25, 2usize);
    let rho = random_pure_instance_state(d_a, d_r, RngSpec::new(21, 0)).unwrap();
    let h = h_min_bipartite(rho.matrix(), d_a, d_r).unwrap().value;
    let thr = corollary6_threshold(h, d_a, ell, eps).unwrap();
    let mut d_a1 = 1;
    while 2 * d_a1 < d_a && ((2 * d_a1) as f64).log2() <= thr {
        d_a1 *= 2;
    }
    assert!((d_a1 as f64).log2() <= thr);
    let inst = DecouplingInstance::new(
        rho,
        Channel::partial_trace(d_a1, d_a / d_a1),
        Ensemble::DEll(ell),
        1000,
        RngSpec::new(21, 1),
    )
    .unwrap();
    let r = mc_decoupling(&inst).unwrap();
    assert!(r.mean_error <= 9.0 * eps + 3.0 * r.std_error);
}

fn thermal_params(delta_target: f64) -> ThermalParams {
    ThermalParams { ell: 2, eps1: 0.01, eps2: 0.001, eps3: 0.001, delta_target }
}

#[test]
fn fully_mixed_subspace_marginals() {
    let dims = ThermalDims { d_s: 2, d_e: 8, d_r: 2 };
    let rho_r = sample_mixed_state(vec![2], 2, RngSpec::new(1, 0)).unwrap();
    let rho = QuantumState::maximally_mixed(vec![16]).unwrap().tensor(&rho_r);
    let v = thermalisation_check(&rho, None, dims, thermal_params(1.0)).unwrap();
    assert!((v.h_min_e - 3.0).abs() < 1e-12);
    assert!((v.h_max_s - 1.0).abs() < 1e-12);
    assert!((v.h_min_se_r - 4.0).abs() < 1e-6);
    assert!((v.lhs - (16f64.log2() + 8f64.log2() - 1.0)).abs() < 1e-6);
    let x: f64 = 0.008;
    let expected_rhs = 2.0 * (6.0 / ((1.0 - (1.0 - x * x).sqrt()) * (1.0 - 0.24))).log2();
    assert!((v.rhs - expected_rhs).abs() < 1e-6);
    assert_eq!(v.satisfied, v.lhs >= v.rhs);
    assert!((v.k - 1.0).abs() < 1e-12);
    assert!((0.0..=2.0).contains(&v.fraction_bound));
}

#[test]
fn thermalisation_guards() {
    let dims = ThermalDims { d_s: 2, d_e: 2, d_r: 2 };
    let rho = QuantumState::maximally_mixed(vec![4, 2]).unwrap();
    assert!(thermalisation_check(&rho, None, dims, thermal_params(0.2)).is_err());
    let bad = ThermalParams { eps1: 0.002, ..thermal_params(1.0) };
    assert!(thermalisation_check(&rho, None, dims, bad).is_err());
    let wrong = ThermalDims { d_s: 2, d_e: 4, d_r: 2 };
    assert!(thermalisation_check(&rho, None, wrong, thermal_params(1.0)).is_err());
}

#[test]
fn isometric_subspace_gives_local_microcanonical_state() {
    // Ξ = span{|01⟩, |10⟩} inside two qubits S ⊗ E
    let mut v = ComplexMatrix::zeros(4, 2);
    v[(1, 0)] = Complex64::new(1.0, 0.0);
    v[(2, 1)] = Complex64::new(1.0, 0.0);
    let dims = ThermalDims { d_s: 2, d_e: 2, d_r: 2 };
    let rho = QuantumState::maximally_mixed(vec![2, 2]).unwrap();
    let out = thermalisation_check(&rho, Some(&v), dims, thermal_params(1.0)).unwrap();
    assert!((out.h_max_s - 1.0).abs() < 1e-12);
    assert!((out.h_min_e - 1.0).abs() < 1e-12);
    assert!((out.h_min_se_r - 1.0).abs() < 1e-6);
    let not_iso = v.scale(2.0);
    assert!(thermalisation_check(&rho, Some(&not_iso), dims, thermal_params(1.0)).is_err());
}

#[test]
fn fraction_bound_decreases_with_target_and_system_size() {
    let mut last = f64::INFINITY;
    for delta in [0.5, 1.0, 1.5, 2.0] {
        let dims = ThermalDims { d_s: 2, d_e: 2, d_r: 2 };
        let rho = QuantumState::maximally_mixed(vec![4, 2]).unwrap();
        let f = thermalisation_check(&rho, None, dims, thermal_params(delta)).unwrap().fraction_bound;
        assert!(f <= last);
        last = f;
    }
    let mut last = f64::INFINITY;
    for d_s in [2, 4, 8] {
        let dims = ThermalDims { d_s, d_e: 2, d_r: 2 };
        let rho = QuantumState::maximally_mixed(vec![2 * d_s, 2]).unwrap();
        let f = thermalisation_check(&rho, None, dims, thermal_params(1.0)).unwrap().fraction_bound;
        assert!(f <= last);
        last = f;
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn rates_sum_to_support_entropy(seed in 0u64..10_000, ell in 1usize..5, delta in 0.001f64..0.5) {
        let psi = sample_pure_state(vec![2, 2, 2], RngSpec::new(seed, 0)).unwrap();
        let r = merging_rates(&psi, ell, delta).unwrap();
        prop_assert!((r.e_gain + r.q_cost - r.h_0_a).abs() < 1e-12);
    }

    #[test]
    fn rates_invariant_under_local_unitaries(seed in 0u64..10_000) {
        let psi = sample_pure_state(vec![2, 2, 2], RngSpec::new(seed, 0)).unwrap();
        let u = sample_haar(2, RngSpec::new(seed, 1)).unwrap();
        let w = sample_haar(2, RngSpec::new(seed, 2)).unwrap();
        let rotated = psi.evolve(&u.kron(&ComplexMatrix::identity(2)).kron(&w));
        let a = merging_rates(&psi, 2, 0.1).unwrap();
        let b = merging_rates(&rotated, 2, 0.1).unwrap();
        prop_assert!((a.e_gain - b.e_gain).abs() < 1e-6);
    }

    #[test]
    fn threshold_grows_with_entropy_and_epsilon(h in -3.0f64..3.0, eps in 0.01f64..0.9) {
        let base = corollary6_threshold(h, 8, 2, eps).unwrap();
        prop_assert!(corollary6_threshold(h + 0.5, 8, 2, eps).unwrap() > base);
        prop_assert!(corollary6_threshold(h, 8, 2, eps * 1.1).unwrap() > base);
    }
}
