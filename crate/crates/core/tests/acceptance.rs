//! Desk-scale acceptance checks, one PASS/FAIL line per criterion.
//!
//! The process exits non-zero when a criterion's outcome differs from the
//! outcome recorded in `EXPECTED_FAIL`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use diagdec::apps::corollary6_threshold;
use diagdec::cli::{design_distance, design_interval};
use diagdec::decoupling::*;
use diagdec::entropy::{h_2_cond, h_min_cond, Cut, H2Mode};
use diagdec::linalg::*;
use diagdec::random::*;
use diagdec::Result;

const SEED: u64 = 20_240_601;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Result<Verdict> {
    Ok(Verdict { pass, detail: detail.into() })
}

/// Criteria whose honest outcome is FAIL, with the reason printed next to them.
const EXPECTED_FAIL: &[(usize, &str)] =
    &[(9, "the adjoint swap bound with constant d_A is violated by rank-one functionals; the d_A^2 constant holds")];

fn c1_moment_decomposition() -> Result<Verdict> {
    let start = Instant::now();
    let mut worst = (f64::INFINITY, 0.0f64, 0.0f64);
    let mut rational_ok = true;
    for n in 1..=2usize {
        let d = 1u128 << n;
        for ell in 1..=3usize {
            let dec = lemma5_decompose(n, ell)?;
            let r = &dec.report;
            worst.0 = worst.0.min(r.min_choi_eigenvalue);
            worst.1 = worst.1.max(r.tp_residual);
            worst.2 = worst.2.max(r.unital_residual);
            let e = ell as u32;
            let num = d.pow(e + 1) + d.pow(e) - 2;
            let den = d.pow(2 * e) * (d - 1);
            rational_ok &= dec.p_ell_exact.num * den == num * dec.p_ell_exact.den;
        }
    }
    let t = start.elapsed();
    verdict(
        worst.0 >= -1e-9 && worst.1 <= 1e-9 && worst.2 <= 1e-9 && rational_ok && t < Duration::from_secs(30),
        format!(
            "min eig {:.2e}, tp {:.2e}, unital {:.2e}, p_ell exact {rational_ok}, {:.1}s",
            worst.0,
            worst.1,
            worst.2,
            t.as_secs_f64()
        ),
    )
}

fn c2_design_interval() -> Result<Verdict> {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for (n, ell) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
        let v = design_distance(n, ell, 1e-7)?;
        let (lo, hi) = design_interval(n, ell);
        pass &= v >= lo - 1e-6 && v <= hi + 1e-6;
        parts.push(format!("N={n} l={ell}: {v:.6} in [{lo:.6}, {hi:.6}]"));
    }
    let t = start.elapsed();
    pass &= t < Duration::from_secs(300);
    verdict(pass, format!("{}, {:.1}s", parts.join("; "), t.as_secs_f64()))
}

fn c3_two_subsystem_example() -> Result<Verdict> {
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, (a, b)) in [(2, 2), (2, 4), (4, 2), (4, 4)].into_iter().enumerate() {
        let rec = prop1_quantities(a, b, 10_000, RngSpec::new(SEED, 300 + i as u64))?;
        let exact = rec.exact_second_moment.unwrap_or(f64::NAN);
        let ok = (exact - rec.closed_form).abs() <= 1e-9 && rec.mc_mean >= rec.lower_bound - 3.0 * rec.mc_std_error;
        pass &= ok;
        parts.push(format!(
            "({a},{b}) |exact-closed| {:.1e}, mc {:.4} >= {:.4}",
            (exact - rec.closed_form).abs(),
            rec.mc_mean,
            rec.lower_bound
        ));
    }
    let once = mc_decoupling(&prop1_instance(2, 8, Ensemble::DiagZxOnce, 10_000, RngSpec::new(SEED, 310))?)?;
    let haar = mc_decoupling(&prop1_instance(2, 8, Ensemble::Haar, 10_000, RngSpec::new(SEED, 311))?)?;
    pass &= once.mean_error > haar.mean_error;
    parts.push(format!("(2,8) zx-once {:.4} > haar {:.4}", once.mean_error, haar.mean_error));
    verdict(pass, parts.join("; "))
}

struct DecouplingRun {
    label: String,
    ell: usize,
    report: DecouplingReport,
    h2_ar: f64,
    h2_ab: f64,
}

fn c4_instances() -> Result<Vec<(String, QuantumState, Channel, usize)>> {
    let mut out = vec![("prop1(2,4)".to_string(), prop1_state(2, 4)?, Channel::partial_trace(2, 4), 2)];
    for k in 0..5u64 {
        let rho = random_pure_instance_state(8, 4, RngSpec::new(SEED, 400 + k))?;
        out.push((format!("haar-pure#{k}"), rho, Channel::partial_trace(2, 4), 1));
    }
    Ok(out)
}

fn decoupling_runs() -> Result<Vec<DecouplingRun>> {
    let mut runs = Vec::new();
    for (idx, (label, rho, channel, a_factors)) in c4_instances()?.into_iter().enumerate() {
        let n = rho.dims().len();
        let h2_ar = h_2_cond(&rho, &Cut::split(a_factors, n)?, H2Mode::Optimized)?.value;
        let tau = QuantumState::normalized(channel.choi().clone(), vec![channel.d_in(), channel.d_out()])?;
        let h2_ab = h_2_cond(&tau, &Cut::split(1, 2)?, H2Mode::Optimized)?.value;
        for ell in 1..=3usize {
            let rng = RngSpec::new(SEED, 500 + 10 * idx as u64 + ell as u64);
            let inst = DecouplingInstance::new(rho.clone(), channel.clone(), Ensemble::DEll(ell), 10_000, rng)?;
            runs.push(DecouplingRun { label: label.clone(), ell, report: mc_decoupling(&inst)?, h2_ar, h2_ab });
        }
    }
    Ok(runs)
}

fn c4_collision_bound(runs: &[DecouplingRun], elapsed: Duration) -> Result<Verdict> {
    let mut pass = elapsed < Duration::from_secs(600);
    let mut worst = f64::NEG_INFINITY;
    let mut failures = Vec::new();
    for r in runs {
        let bound = (1.0 + 8.0 * 8f64.powf(2.0 - r.ell as f64)).sqrt() * (-(r.h2_ar + r.h2_ab) / 2.0).exp2();
        let slack = r.report.mean_error - bound - 3.0 * r.report.std_error;
        worst = worst.max(slack);
        if slack > 0.0 {
            pass = false;
            failures.push(format!("{} l={}", r.label, r.ell));
        }
    }
    verdict(
        pass,
        format!(
            "{} runs, max(mean - bound - 3sd) {worst:.3e}, failures {failures:?}, {:.1}s",
            runs.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn c5_exact_kernel(runs: &[DecouplingRun]) -> Result<Verdict> {
    let mut pass = true;
    let mut worst = f64::NEG_INFINITY;
    for r in runs {
        let Some(exact) = r.report.exact_square_bound else {
            pass = false;
            continue;
        };
        let slack = r.report.mean_error.powi(2) - exact - 3.0 * r.report.propagated_square_error();
        worst = worst.max(slack);
        pass &= slack <= 0.0;
    }
    verdict(pass, format!("{} runs, max(mean^2 - exact - 3 prop) {worst:.3e}", runs.len()))
}

fn c6_entropy_oracles() -> Result<Verdict> {
    let split = Cut::split(1, 2)?;
    let mut err: f64 = 0.0;
    for d in [2usize, 4, 8] {
        let phi = h_min_cond(&max_entangled(d), &split)?.value;
        err = err.max((phi + (d as f64).log2()).abs());
        let sigma = sample_mixed_state(vec![3], 2, RngSpec::new(SEED, 600 + d as u64))?;
        let prod = QuantumState::maximally_mixed(vec![d])?.tensor(&sigma);
        err = err.max((h_min_cond(&prod, &split)?.value - (d as f64).log2()).abs());
    }
    let mut gap = f64::INFINITY;
    for k in 0..100u64 {
        let rank = 1 + (k % 4) as usize;
        let rho = sample_mixed_state(vec![2, 2], rank, RngSpec::new(SEED, 700 + k))?;
        gap = gap.min(h_2_cond(&rho, &split, H2Mode::Optimized)?.value - h_min_cond(&rho, &split)?.value);
    }
    verdict(err <= 1e-6 && gap >= -1e-6, format!("oracle error {err:.2e}, min(H2 - Hmin) over 100 states {gap:.3e}"))
}

fn twirl_mc(unitaries: &[ComplexMatrix], x: &ComplexMatrix) -> ComplexMatrix {
    let n = x.rows();
    let mut acc = ComplexMatrix::zeros(n, n);
    for u in unitaries {
        let uu = u.kron(u);
        acc = &acc + &uu.matmul(x).matmul(&uu.adjoint());
    }
    acc.scale(1.0 / unitaries.len() as f64)
}

fn c7_twirls() -> Result<Verdict> {
    let samples = 10_000usize;
    let tol = 5.0 / (samples as f64).sqrt();
    let mut worst: f64 = 0.0;
    for d in [2usize, 4] {
        let draw = |f: &dyn Fn(RngSpec) -> Result<ComplexMatrix>, stream: u64| -> Result<Vec<ComplexMatrix>> {
            (0..samples as u64).map(|i| f(RngSpec::new(SEED, (stream << 32) ^ i))).collect()
        };
        let zs = draw(&|r| Ok(sample_diag(Basis::Z, d, r)?.matrix()), 800 + d as u64)?;
        let xs = draw(&|r| Ok(sample_diag(Basis::X, d, r)?.matrix()), 810 + d as u64)?;
        let hs = draw(&|r| sample_haar(d, r), 820 + d as u64)?;
        for k in 0..10u64 {
            let g = sample_ginibre(d * d, d * d, RngSpec::new(SEED, 830 + 16 * d as u64 + k));
            let x = g.scale(1.0 / g.frobenius_norm());
            worst = worst.max(twirl2_diag(&x, Basis::Z)?.max_abs_diff(&twirl_mc(&zs, &x)));
            worst = worst.max(twirl2_diag(&x, Basis::X)?.max_abs_diff(&twirl_mc(&xs, &x)));
            worst = worst.max(twirl2_haar(&x)?.max_abs_diff(&twirl_mc(&hs, &x)));
        }
    }
    verdict(worst <= tol, format!("max entrywise deviation {worst:.4} (tolerance {tol})"))
}

fn c8_concentration() -> Result<Verdict> {
    let rho = random_pure_instance_state(8, 4, RngSpec::new(SEED, 900))?;
    let inst =
        DecouplingInstance::new(rho, Channel::partial_trace(2, 4), Ensemble::DEll(2), 1000, RngSpec::new(SEED, 901))?;
    let mut pass = true;
    let mut parts = Vec::new();
    for eta in [0.3, 0.5] {
        let rec = concentration_experiment(&inst, 2, eta, 1000)?;
        pass &= rec.empirical_fraction <= rec.tail + 3.0 * rec.binomial_std;
        parts.push(format!("eta={eta}: fraction {} vs tail {:.3e}", rec.empirical_fraction, rec.tail));
    }
    if parts.iter().all(|p| p.ends_with("2.000e0")) {
        parts.push("the tail bound exceeds 1 at this size, so the check cannot fail".into());
    }
    verdict(pass, parts.join("; "))
}

fn phi_norm(x: &ComplexMatrix) -> f64 {
    let d = x.rows();
    let v = x.kron(&ComplexMatrix::identity(d)).matvec(&max_entangled_vector(d));
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn c9_property_suite() -> Result<Verdict> {
    let start = Instant::now();
    let cases = 50u64;
    let mut cj = 0;
    let mut swap = 0;
    let mut chain = 0;
    for k in 0..cases {
        let (di, dout) = ([2usize, 4][k as usize % 2], [2usize, 3, 4][k as usize % 3]);
        let ops = sample_kraus(di, dout, 3, RngSpec::new(SEED, 1000 + k))?;
        let ch = j_map(&ChannelDescription::Kraus(ops.clone()))?;
        let rho = sample_mixed_state(vec![di], di, RngSpec::new(SEED, 1100 + k))?;
        cj += (j_inv_apply(&ch, rho.matrix())?.max_abs_diff(&apply_kraus(&ops, rho.matrix())) < 1e-9) as usize;

        let d = 1 + k as usize % 5;
        let x = sample_ginibre(d, d, RngSpec::new(SEED, 1200 + k));
        let y = sample_ginibre(d, d, RngSpec::new(SEED, 1300 + k));
        swap += ((x.kron(&y).matmul(&swap_operator(d)).trace() - x.matmul(&y).trace()).norm() < 1e-10) as usize;

        let u: Vec<ComplexMatrix> =
            (0..4).map(|j| sample_haar(d, RngSpec::new(SEED, 1400 + 4 * k + j))).collect::<Result<_>>()?;
        let lhs = phi_norm(&(&u[0].matmul(&u[1]) - &u[2].matmul(&u[3])));
        chain += (lhs <= phi_norm(&(&u[0] - &u[2])) + phi_norm(&(&u[1] - &u[3])) + 1e-10) as usize;
    }

    // random CP maps and the rank-one functionals X -> <k|X|k>
    let mut maps = Vec::new();
    for k in 0..cases {
        let di = [2usize, 4][k as usize % 2];
        maps.push(sample_cp_map(di, 1 + k as usize % 4, 2, RngSpec::new(SEED, 1500 + k))?);
    }
    for d in [2usize, 4, 8] {
        let row = sample_ginibre(1, d, RngSpec::new(SEED, 1600 + d as u64));
        maps.push(j_map(&ChannelDescription::Kraus(vec![row]))?);
    }
    let (mut linear_ok, mut square_ok, mut max_ratio) = (0, 0, 0.0f64);
    for m in &maps {
        let d_a = m.d_in() as f64;
        let lhs = operator_norm(&m.adjoint_square_of_swap());
        let purity = m.choi().matmul(m.choi()).trace().re;
        linear_ok += (lhs <= d_a * purity + 1e-8) as usize;
        square_ok += (lhs <= d_a * d_a * purity + 1e-8) as usize;
        max_ratio = max_ratio.max(lhs / (d_a * purity));
    }
    let t = start.elapsed();
    let n = maps.len();
    let all = cases as usize;
    let pass = cj == all && swap == all && chain == all && linear_ok == n && t < Duration::from_secs(60);
    verdict(
        pass,
        format!(
            "cj {cj}/{all}, swap {swap}/{all}, chain {chain}/{all}, bound with d_A {linear_ok}/{n} (max lhs/(d_A tr J^2) = {max_ratio:.3}), bound with d_A^2 {square_ok}/{n}, {:.1}s",
            t.as_secs_f64()
        ),
    )
}

fn c10_partial_trace_threshold() -> Result<Verdict> {
    let (d_a, d_r, eps, ell) = (16usize, 4usize, 0.25, 2usize);
    let rho = random_pure_instance_state(d_a, d_r, RngSpec::new(SEED, 1700))?;
    let h = h_min_cond(&rho, &Cut::split(1, 2)?)?.value;
    let thr = corollary6_threshold(h, d_a, ell, eps)?;
    let mut d_a1 = 1;
    while 2 * d_a1 < d_a && ((2 * d_a1) as f64).log2() <= thr {
        d_a1 *= 2;
    }
    let below = (d_a1 as f64).log2() <= thr;
    let inst = DecouplingInstance::new(
        rho,
        Channel::partial_trace(d_a1, d_a / d_a1),
        Ensemble::DEll(ell),
        10_000,
        RngSpec::new(SEED, 1701),
    )?;
    let r = mc_decoupling(&inst)?;
    verdict(
        below && r.mean_error <= 9.0 * eps + 3.0 * r.std_error,
        format!(
            "threshold log2 d_A1 <= {thr:.3}, d_A1 = {d_a1}, mean {:.4} <= {} (trace distance never exceeds 2, so the check cannot fail)",
            r.mean_error,
            9.0 * eps
        ),
    )
}

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let mut results: Vec<(usize, &str, Result<Verdict>)> = Vec::new();
    results.push((1, "moment decomposition", c1_moment_decomposition()));
    results.push((2, "design distance interval", c2_design_interval()));
    results.push((3, "two-subsystem example", c3_two_subsystem_example()));
    let start = Instant::now();
    let runs = decoupling_runs();
    let elapsed = start.elapsed();
    match runs {
        Ok(runs) => {
            results.push((4, "collision-entropy decoupling bound", c4_collision_bound(&runs, elapsed)));
            results.push((5, "exact kernel chain", c5_exact_kernel(&runs)));
        }
        Err(e) => {
            results.push((4, "collision-entropy decoupling bound", Err(e.clone())));
            results.push((5, "exact kernel chain", Err(e)));
        }
    }
    results.push((6, "entropy oracles", c6_entropy_oracles()));
    results.push((7, "twirl correctness", c7_twirls()));
    results.push((8, "concentration tail", c8_concentration()));
    results.push((9, "linear-algebra property suite", c9_property_suite()));
    results.push((10, "partial-trace threshold", c10_partial_trace_threshold()));

    let mut unexpected = 0;
    for (id, name, res) in results {
        let (pass, detail) = match res {
            Ok(v) => (v.pass, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let expected_fail = EXPECTED_FAIL.iter().find(|(k, _)| *k == id);
        println!("criterion {id:>2} {}: {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        if let Some((_, reason)) = expected_fail {
            println!("             expected FAIL: {reason}");
        }
        if pass == expected_fail.is_some() {
            unexpected += 1;
        }
    }
    if unexpected == 0 {
        println!("acceptance: all outcomes as expected");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {unexpected} unexpected outcome(s)");
        ExitCode::FAILURE
    }
}
