use diagdec::decoupling::*;
use diagdec::linalg::{eigvalsh, max_entangled, partial_trace, Channel, ComplexMatrix, QuantumState};
use diagdec::random::{p_ell, sample_d_ell, sample_diag, sample_haar, Basis, RngSpec};
use proptest::prelude::*;

fn random_instance(seed: u64, ensemble: Ensemble, samples: usize) -> DecouplingInstance {
    let rho = random_pure_instance_state(8, 2, RngSpec::new(seed, 0)).unwrap();
    DecouplingInstance::new(rho, Channel::partial_trace(2, 4), ensemble, samples, RngSpec::new(seed, 1)).unwrap()
}

#[test]
fn full_trace_channel_never_fails_to_decouple() {
    let rho = random_pure_instance_state(4, 2, RngSpec::new(1, 0)).unwrap();
    let inst = DecouplingInstance::new(rho, Channel::full_trace(4), Ensemble::DEll(2), 50, RngSpec::new(1, 1)).unwrap();
    for seed in 0..5 {
        let u = sample_haar(4, RngSpec::new(seed, 9)).unwrap();
        assert!(error_of_unitary(&inst, &u).unwrap() < 1e-12);
    }
    let r = mc_decoupling(&inst).unwrap();
    assert!(r.mean_error < 1e-12 && r.std_error < 1e-12);
    assert!(exact_square_bound(&inst, 2, None, None).unwrap().abs() < 1e-10);
}

#[test]
fn identity_channel_on_maximally_entangled_pair() {
    let inst = DecouplingInstance::new(max_entangled(2), Channel::identity(2), Ensemble::Haar, 10, RngSpec::new(0, 0))
        .unwrap();
    for seed in 0..5 {
        let u = sample_haar(2, RngSpec::new(seed, 0)).unwrap();
        assert!((error_of_unitary(&inst, &u).unwrap() - 1.5).abs() < 1e-12);
    }
}

#[test]
fn prop1_instance_at_identity_matches_direct_oracle() {
    for (d1, d2) in [(2, 2), (2, 8), (4, 2)] {
        let inst = prop1_instance(d1, d2, Ensemble::DiagZxOnce, 10, RngSpec::new(0, 0)).unwrap();
        let v = error_of_unitary(&inst, &ComplexMatrix::identity(d1 * d2)).unwrap();
        let rho = prop1_state(d1, d2).unwrap();
        let out = partial_trace(rho.matrix(), &[d1, d2, d1], &[1]).unwrap();
        let diff = &out - &ComplexMatrix::identity(d1 * d1).scale(1.0 / (d1 * d1) as f64);
        let oracle: f64 = eigvalsh(&diff).unwrap().iter().map(|x| x.abs()).sum();
        assert!((v - oracle).abs() < 1e-12);
        let n = (d1 * d1) as f64;
        assert!((v - 2.0 * (1.0 - 1.0 / n)).abs() < 1e-12);
    }
}

#[test]
fn haar_mean_respects_prop1_haar_bound() {
    let inst = prop1_instance(2, 8, Ensemble::Haar, 4000, RngSpec::new(11, 0)).unwrap();
    let r = mc_decoupling(&inst).unwrap();
    assert!(r.mean_error <= 2.0 / 8f64.sqrt() + 3.0 * r.std_error, "{r:?}");
}

#[test]
fn d_ell_mean_respects_collision_bound() {
    for seed in 0..3 {
        let r = mc_decoupling(&random_instance(seed, Ensemble::DEll(2), 2000)).unwrap();
        let bound = r.bound(BoundKind::Theorem4H2).unwrap();
        assert!(r.mean_error <= bound + 3.0 * r.std_error, "seed {seed}: {} > {bound}", r.mean_error);
        assert_eq!(r.lambda_rate, -bound.log2());
    }
}

#[test]
fn haar_mean_respects_min_entropy_bound() {
    for seed in 0..3 {
        let r = mc_decoupling(&random_instance(seed, Ensemble::Haar, 1000)).unwrap();
        let bound = r.bound(BoundKind::HaarEq8).unwrap();
        assert!(r.mean_error <= bound + 3.0 * r.std_error);
        assert_eq!(r.lambda_rate, -bound.log2());
    }
}

#[test]
fn exact_kernel_matches_weighted_monte_carlo() {
    let rho = random_pure_instance_state(4, 2, RngSpec::new(3, 0)).unwrap();
    for ens in [Ensemble::DEll(1), Ensemble::DEll(2), Ensemble::Haar] {
        let inst =
            DecouplingInstance::new(rho.clone(), Channel::partial_trace(2, 2), ens, 4000, RngSpec::new(1, 0)).unwrap();
        let h = inst.collision_entropies().unwrap();
        let ws: Vec<f64> = (0..inst.samples)
            .map(|i| weighted_square_error(&inst, &inst.sample_unitary(i).unwrap(), &h.sigma_b, &h.sigma_r).unwrap())
            .collect();
        let (m, s) = mean_and_std_error(&ws);
        let exact = match ens {
            Ensemble::DEll(ell) => exact_square_bound(&inst, ell, None, None).unwrap(),
            _ => haar_square_bound(&inst, None, None).unwrap(),
        };
        assert!((m - exact).abs() <= 4.0 * s, "{ens}: {m} ± {s} vs {exact}");
        // every sample satisfies ‖X‖₁² ≤ ‖X̃‖₂²
        for i in 0..20 {
            let u = inst.sample_unitary(i).unwrap();
            let e = error_of_unitary(&inst, &u).unwrap();
            assert!(e * e <= weighted_square_error(&inst, &u, &h.sigma_b, &h.sigma_r).unwrap() + 1e-10);
        }
    }
}

#[test]
fn jensen_chain_and_collapse() {
    for seed in 0..3 {
        let inst = random_instance(seed, Ensemble::DEll(2), 2000);
        let r = mc_decoupling(&inst).unwrap();
        let exact = r.exact_square_bound.unwrap();
        assert!(r.mean_error.powi(2) <= r.mean_square + 1e-15);
        assert!(r.mean_square <= exact + 3.0 * r.mean_square_std_error);
        assert!(r.mean_error.powi(2) <= exact + 3.0 * r.propagated_square_error());
        for ell in 1..=3 {
            let e = exact_square_bound(&inst, ell, None, None).unwrap();
            assert!(e <= collapsed_square_bound(&inst, ell).unwrap() * (1.0 + 1e-9));
        }
    }
}

#[test]
fn kernel_approaches_haar_kernel_with_depth() {
    let inst = random_instance(5, Ensemble::DEll(1), 2);
    let h = inst.collision_entropies().unwrap();
    let haar = haar_square_bound(&inst, None, None).unwrap();
    let scale = (-(h.h2_ar + h.h2_ab)).exp2();
    let d2 = (inst.d_a() * inst.d_a()) as f64;
    for ell in 1..=5 {
        let e = exact_square_bound(&inst, ell, None, None).unwrap();
        assert!((e - haar).abs() <= p_ell(inst.d_a(), ell) * (2.0 * d2 + 1.0) * scale + 1e-12, "ell {ell}");
    }
}

#[test]
fn explicit_sigmas_change_the_kernel_but_not_the_inequality() {
    let inst = random_instance(2, Ensemble::DEll(2), 2);
    let sb = ComplexMatrix::identity(2).scale(0.5);
    let sr = ComplexMatrix::identity(2).scale(0.5);
    let e = exact_square_bound(&inst, 2, Some(&sb), Some(&sr)).unwrap();
    let plain = exact_square_bound(&inst, 2, None, None).unwrap();
    assert!(e > 0.0 && plain > 0.0);
    assert!(exact_square_bound(&inst, 2, Some(&ComplexMatrix::identity(3)), Some(&sr)).is_err());
}

#[test]
fn bound_formulas() {
    let p = BoundParams::new().with("h_ar", 1.0).with("h_ab", 0.5).with("d_a", 8.0).with("ell", 2.0);
    let v = bound_evaluate(BoundKind::Theorem4H2, &p).unwrap();
    assert!((v - 3.0 * (-0.75f64).exp2()).abs() < 1e-15);
    let smooth = bound_evaluate(BoundKind::Theorem4Smooth, &p.clone().with("epsilon", 0.01)).unwrap();
    assert!((smooth - v - 0.12).abs() < 1e-15);
    let q = p.clone().with("epsilon", 0.05).with("delta", 0.0);
    assert_eq!(bound_evaluate(BoundKind::TwoDesignEq9, &q).unwrap(), bound_evaluate(BoundKind::HaarEq8, &q).unwrap());
    let t = BoundParams::new().with("d_a", 8.0).with("ell", 2.0).with("eta", 0.0).with("k", 1.0);
    assert_eq!(bound_evaluate(BoundKind::Theorem5Tail, &t).unwrap(), 2.0);
    assert!(matches!(
        bound_evaluate(BoundKind::Theorem4H2, &BoundParams::new().with("h_ar", 0.0)),
        Err(diagdec::Error::MissingParameter(_))
    ));
    let r = BoundParams::new()
        .with("h_ar", 2.0)
        .with("h_ab", 2.0)
        .with("n_a", 3.0)
        .with("eta", 0.0)
        .with("poly_inverse", 0.0);
    assert!((bound_evaluate(BoundKind::RqcEq10, &r).unwrap() - 0.25).abs() < 1e-15);
    for k in BoundKind::ALL {
        assert_eq!(k.name().parse::<BoundKind>().unwrap(), k);
    }
    assert_eq!(lambda_rate(0.25), 2.0);
}

#[test]
fn prop1_record_for_two_qubits() {
    let r = prop1_quantities(2, 2, 2000, RngSpec::new(4, 0)).unwrap();
    assert_eq!(r.closed_form, 0.75);
    assert!((r.exact_second_moment.unwrap() - 0.75).abs() < 1e-9);
    assert!((r.lower_bound - 0.5 / 2f64.sqrt()).abs() < 1e-15);
    assert!((r.lower_bound - 0.35355).abs() < 1e-5);
    assert!(r.mc_mean >= r.lower_bound - 3.0 * r.mc_std_error);
    assert!((r.haar_bound - 2f64.sqrt()).abs() < 1e-15);
}

#[test]
fn concentration_trivial_regimes() {
    let inst = random_instance(7, Ensemble::DEll(2), 2);
    let huge = concentration_experiment(&inst, 2, 10.0, 100).unwrap();
    assert_eq!(huge.exceed_count, 0);
    assert!(huge.pass && huge.tail < 2.0);
    let zero = concentration_experiment(&inst, 2, 0.0, 100).unwrap();
    assert_eq!(zero.tail, 2.0);
    assert!(zero.pass);
    assert!(concentration_experiment(&inst, 2, 0.5, 10).is_err());
}

#[test]
fn leading_z_layer_does_not_change_the_mean() {
    let inst = random_instance(9, Ensemble::DEll(2), 3000);
    let base: Vec<f64> = mc_errors(&inst).unwrap();
    let shifted: Vec<f64> = (0..inst.samples)
        .map(|i| {
            let u = inst.sample_unitary(i).unwrap();
            let z = sample_diag(Basis::Z, 8, RngSpec::new(77, i as u64)).unwrap().matrix();
            error_of_unitary(&inst, &z.matmul(&u)).unwrap()
        })
        .collect();
    let (m0, s0) = mean_and_std_error(&base);
    let (m1, s1) = mean_and_std_error(&shifted);
    assert!((m0 - m1).abs() <= 3.0 * (s0 * s0 + s1 * s1).sqrt(), "{m0} vs {m1}");
}

#[test]
fn monte_carlo_is_deterministic_and_thread_independent() {
    let inst = random_instance(4, Ensemble::DEll(1), 300);
    let a = mc_decoupling(&inst).unwrap();
    let b = mc_decoupling(&inst).unwrap();
    assert_eq!(a, b);
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let many = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let c = single.install(|| mc_decoupling(&inst).unwrap());
    let d = many.install(|| mc_decoupling(&inst).unwrap());
    assert_eq!(c.mean_error, d.mean_error);
    assert_eq!(a.mean_error, c.mean_error);
    let other = mc_decoupling(&inst.clone().with_samples(300, RngSpec::new(5, 1))).unwrap();
    assert_ne!(a.mean_error, other.mean_error);
}

#[test]
fn samples_follow_their_circuits() {
    let inst = random_instance(1, Ensemble::DEll(2), 2);
    let circuit = inst.ensemble.sample_circuit(8, inst.sample_rng(0)).unwrap().unwrap();
    assert!(circuit.matrix().max_abs_diff(&inst.sample_unitary(0).unwrap()) < 1e-15);
    let direct = sample_d_ell(3, 2, inst.sample_rng(0)).unwrap();
    assert_eq!(direct, circuit);
}

#[test]
fn ensemble_names_round_trip() {
    for e in [Ensemble::Haar, Ensemble::DEll(3), Ensemble::Rqc(12), Ensemble::DiagZxOnce] {
        assert_eq!(e.to_string().parse::<Ensemble>().unwrap(), e);
    }
    assert_eq!("d_ell:2".parse::<Ensemble>().unwrap(), Ensemble::DEll(2));
    assert!("d_ell(x)".parse::<Ensemble>().is_err());
    assert!("unitary".parse::<Ensemble>().is_err());
}

#[test]
fn instance_validation() {
    let rho = QuantumState::maximally_mixed(vec![2, 3]).unwrap();
    assert!(DecouplingInstance::new(rho.clone(), Channel::identity(4), Ensemble::Haar, 2, RngSpec::new(0, 0)).is_err());
    assert!(DecouplingInstance::new(rho, Channel::identity(2), Ensemble::DEll(0), 2, RngSpec::new(0, 0)).is_err());
    let odd = QuantumState::maximally_mixed(vec![3, 2]).unwrap();
    assert!(DecouplingInstance::new(odd, Channel::identity(3), Ensemble::DEll(1), 2, RngSpec::new(0, 0)).is_err());
    let inst = random_instance(0, Ensemble::Haar, 2);
    assert!(error_of_unitary(&inst, &ComplexMatrix::identity(4)).is_err());
    assert!(mc_decoupling(&inst.clone().with_samples(1, RngSpec::new(0, 0))).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn error_lies_in_unit_interval_of_two(seed in 0u64..100_000, keep in prop::sample::select(vec![1usize, 2, 4, 8])) {
        let rho = random_pure_instance_state(8, 2, RngSpec::new(seed, 0)).unwrap();
        let ch = Channel::partial_trace(keep, 8 / keep);
        let inst = DecouplingInstance::new(rho, ch, Ensemble::Haar, 2, RngSpec::new(seed, 1)).unwrap();
        let e = error_of_unitary(&inst, &inst.sample_unitary(0).unwrap()).unwrap();
        prop_assert!((0.0..=2.0).contains(&e));
    }
}
