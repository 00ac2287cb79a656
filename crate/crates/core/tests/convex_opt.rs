use diagdec::linalg::{j_map, max_entangled, Channel, ChannelDescription, ComplexMatrix};
use diagdec::random::{haar_superop, map_r_pow, sample_channel, sample_haar, sample_kraus, RngSpec};
use diagdec::sdp::{diamond_norm, diamond_norm_with, solve_sdp, DiamondMethod, SdpProblem, SdpStatus, Sense};
use diagdec::Complex64;
use proptest::prelude::*;

fn conjugated_channel(kraus: &[ComplexMatrix], u: &ComplexMatrix, v: &ComplexMatrix) -> Channel {
    let ops = kraus.iter().map(|k| u.matmul(k).matmul(v)).collect();
    j_map(&ChannelDescription::Kraus(ops)).unwrap()
}

#[test]
fn trace_minimization_with_rank_one_optimum() {
    let mut p = SdpProblem::new(ComplexMatrix::identity(2), Sense::Minimize).unwrap();
    p.add_constraint(&ComplexMatrix::from_real_diag(&[1.0, 0.0]), 1.0).unwrap();
    let s = solve_sdp(&p, 1e-7).unwrap();
    assert_eq!(s.status, SdpStatus::Optimal);
    assert!((s.primal_value - 1.0).abs() < 1e-6);
    assert!(s.gap <= 1e-7 * (1.0 + s.primal_value.abs()));
    assert!(s.primal_infeasibility <= 1e-6 && s.dual_infeasibility <= 1e-6);
}

#[test]
fn min_entropy_program_of_maximally_entangled_pair() {
    // max <Φ, X> s.t. tr_A X = I_B, the dual of min tr σ s.t. I ⊗ σ ⪰ Φ
    let phi = max_entangled(2).into_matrix();
    let mut p = SdpProblem::new(phi, Sense::Maximize).unwrap();
    for j in 0..2 {
        for k in 0..2 {
            for (re, im) in [(1.0, 0.0), (0.0, 1.0)] {
                if j == k && im != 0.0 {
                    continue;
                }
                let unit = ComplexMatrix::from_fn(2, 2, |a, b| {
                    if (a, b) == (j, k) {
                        Complex64::new(re, im)
                    } else if (a, b) == (k, j) {
                        Complex64::new(re, -im)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                });
                let a = ComplexMatrix::identity(2).kron(&unit.hermitian_part());
                let b = if j == k { 1.0 } else { 0.0 };
                p.add_constraint(&a, b).unwrap();
            }
        }
    }
    let s = solve_sdp(&p, 1e-8).unwrap();
    assert_eq!(s.status, SdpStatus::Optimal);
    assert!((s.primal_value - 2.0).abs() < 1e-6);
    assert!((-s.primal_value.log2() + 1.0).abs() < 1e-6);
}

#[test]
fn weak_duality_along_the_path() {
    let mut p = SdpProblem::with_blocks(
        vec![ComplexMatrix::from_real_diag(&[1.0, 3.0]), ComplexMatrix::from_real_diag(&[2.0])],
        Sense::Minimize,
    )
    .unwrap();
    p.add_constraint(&ComplexMatrix::from_real_diag(&[1.0, 1.0, 1.0]), 2.0).unwrap();
    p.add_constraint(&ComplexMatrix::from_real(3, 3, &[0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0]).unwrap(), 0.5)
        .unwrap();
    let s = solve_sdp(&p, 1e-9).unwrap();
    assert_eq!(s.status, SdpStatus::Optimal);
    for h in &s.history {
        assert!(h.complementarity >= -1e-12);
        if h.primal_infeasibility <= 1e-10 && h.dual_infeasibility <= 1e-10 {
            assert!(h.primal_objective >= h.dual_objective - 1e-12);
        }
    }
    assert!(s.primal.iter().all(|x| diagdec::linalg::min_eigenvalue(x).unwrap() >= -1e-8));
}

#[test]
fn identity_versus_identity_is_zero() {
    let id = Channel::identity(2);
    let delta = id.choi() - id.choi();
    assert_eq!(diamond_norm(&delta, 2, 2, 1e-7).unwrap(), 0.0);
}

#[test]
fn identity_minus_completely_depolarizing() {
    let delta = Channel::identity(2).choi() - Channel::completely_depolarizing(2).choi();
    for method in [DiamondMethod::Marginals, DiamondMethod::Structured] {
        let v = diamond_norm_with(&delta, 2, 2, 1e-8, method).unwrap();
        assert!((v - 1.5).abs() < 1e-6, "{method:?} gave {v}");
    }
}

#[test]
fn single_qubit_design_distance_lies_in_interval() {
    let g = haar_superop(1).unwrap();
    for (ell, hi) in [(1, 3.0), (2, 1.5)] {
        let r = map_r_pow(1, ell).unwrap();
        let delta = (&r.choi() - &g.choi()).hermitian_part();
        let a = diamond_norm_with(&delta, 4, 4, 1e-7, DiamondMethod::Marginals).unwrap();
        let b = diamond_norm_with(&delta, 4, 4, 1e-7, DiamondMethod::Structured).unwrap();
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        assert!(a >= -1e-6 && a <= hi + 1e-6);
    }
}

#[test]
fn methods_agree_on_random_channel_pairs() {
    for seed in 0..4 {
        let t1 = sample_channel(2, 3, 2, RngSpec::new(seed, 0)).unwrap();
        let t2 = sample_channel(2, 3, 3, RngSpec::new(seed, 1)).unwrap();
        let delta = t1.choi() - t2.choi();
        let a = diamond_norm_with(&delta, 2, 3, 1e-8, DiamondMethod::Marginals).unwrap();
        let b = diamond_norm_with(&delta, 2, 3, 1e-8, DiamondMethod::Structured).unwrap();
        assert!((a - b).abs() < 1e-6, "seed {seed}: {a} vs {b}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn diamond_norm_of_channel_difference_is_at_most_two(seed in 0u64..10_000, d_out in 2usize..4) {
        let t1 = sample_channel(2, d_out, 2, RngSpec::new(seed, 0)).unwrap();
        let t2 = sample_channel(2, d_out, 1, RngSpec::new(seed, 1)).unwrap();
        let v = diamond_norm(&(t1.choi() - t2.choi()), 2, d_out, 1e-7).unwrap();
        prop_assert!(v <= 2.0 + 1e-6);
        prop_assert!(v >= 0.0);
    }

    #[test]
    fn diamond_norm_symmetric_and_unitarily_invariant(seed in 0u64..10_000) {
        let k1 = sample_kraus(2, 2, 2, RngSpec::new(seed, 0)).unwrap();
        let k2 = sample_kraus(2, 2, 2, RngSpec::new(seed, 1)).unwrap();
        let t1 = j_map(&ChannelDescription::Kraus(k1.clone())).unwrap();
        let t2 = j_map(&ChannelDescription::Kraus(k2.clone())).unwrap();
        let forward = diamond_norm(&(t1.choi() - t2.choi()), 2, 2, 1e-8).unwrap();
        let backward = diamond_norm(&(t2.choi() - t1.choi()), 2, 2, 1e-8).unwrap();
        prop_assert!((forward - backward).abs() < 1e-6);
        let u = sample_haar(2, RngSpec::new(seed, 2)).unwrap();
        let v = sample_haar(2, RngSpec::new(seed, 3)).unwrap();
        let c1 = conjugated_channel(&k1, &u, &v);
        let c2 = conjugated_channel(&k2, &u, &v);
        let rotated = diamond_norm(&(c1.choi() - c2.choi()), 2, 2, 1e-8).unwrap();
        prop_assert!((forward - rotated).abs() < 1e-6, "{} vs {}", forward, rotated);
    }

    #[test]
    fn diamond_norm_is_absolutely_homogeneous(seed in 0u64..10_000, c in prop::sample::select(vec![0.5, 2.0])) {
        let t1 = sample_channel(2, 2, 2, RngSpec::new(seed, 0)).unwrap();
        let t2 = sample_channel(2, 2, 2, RngSpec::new(seed, 1)).unwrap();
        let delta = t1.choi() - t2.choi();
        let base = diamond_norm(&delta, 2, 2, 1e-9).unwrap();
        let scaled = diamond_norm(&delta.scale(c), 2, 2, 1e-9).unwrap();
        prop_assert!((scaled - c * base).abs() < 1e-7, "{} vs {}", scaled, c * base);
        let negated = diamond_norm(&delta.scale(-c), 2, 2, 1e-9).unwrap();
        prop_assert!((negated - c * base).abs() < 1e-7);
    }
}
