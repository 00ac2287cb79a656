use std::fmt::Write as _;

use super::config::{ExperimentConfig, Subcommand};
use crate::apps::{merging_rates, thermalisation_check, ThermalDims, ThermalParams, SURROGATE_LABEL};
use crate::decoupling::{
    collapsed_square_bound, exact_square_bound, haar_square_bound, mc_decoupling, prop1_quantities, prop1_state,
    BoundKind, DecouplingInstance, Ensemble,
};
use crate::entropy::{h_0, h_2_cond, h_max, h_min_cond, Cut, H2Mode};
use crate::error::{Error, Result};
use crate::linalg::{Channel, ComplexMatrix, QuantumState};
use crate::random::{haar_superop, lemma5_decompose, map_r_pow, sample_mixed_state, sample_pure_state, RngSpec};
use crate::sdp::diamond_norm;

const INTERVAL_TOL: f64 = 1e-6;
const LEMMA5_TOL: f64 = 1e-9;

/// Outcome of one configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub csv: String,
    pub summary: String,
    /// False when some tested inequality failed.
    pub passed: bool,
    /// Serialized circuits when `circuits` was requested.
    pub circuits: Option<String>,
}

/// Header plus rows of already formatted cells.
struct Table {
    header: &'static [&'static str],
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &'static [&'static str]) -> Self {
        Self { header, rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}

/// 17 significant digits; NaN becomes an empty cell.
pub fn fmt_real(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, fmt_real)
}

fn need<T>(v: Option<T>, key: &str) -> Result<T> {
    v.ok_or_else(|| Error::MissingParameter(key.to_string()))
}

fn state_rng(seed: u64, id: usize) -> RngSpec {
    RngSpec::new(seed, 2 * id as u64)
}

fn sample_rng(seed: u64, id: usize) -> RngSpec {
    RngSpec::new(seed, 2 * id as u64 + 1)
}

/// Builds instance `id` of the configured state with `dims` as the default layout.
fn build_state(cfg: &ExperimentConfig, id: usize, dims: Vec<usize>) -> Result<QuantumState> {
    let rng = state_rng(cfg.seed(), id);
    match cfg.word("state", "random_pure") {
        "random_pure" => sample_pure_state(dims, rng),
        "random_mixed" => {
            let rank = cfg.usize("rank").unwrap_or_else(|| dims.iter().product());
            sample_mixed_state(dims, rank, rng)
        }
        "maximally_mixed" => QuantumState::maximally_mixed(dims),
        "prop1" => prop1_state(need(cfg.usize("d1"), "d1")?, need(cfg.usize("d2"), "d2")?),
        "file" => {
            let path = need(cfg.path("state_file"), "state_file")?;
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            QuantumState::normalized(ComplexMatrix::from_text(&text)?, need(cfg.list("dims"), "dims")?)
        }
        other => Err(Error::InvalidParameter(format!("unknown state `{other}`"))),
    }
}

fn decouple_state(cfg: &ExperimentConfig, id: usize) -> Result<QuantumState> {
    let dims = match (cfg.usize("d_a"), cfg.usize("d_r")) {
        (Some(a), Some(r)) => vec![a, r],
        _ => Vec::new(),
    };
    build_state(cfg, id, dims)
}

fn decouple_channel(cfg: &ExperimentConfig, state: &QuantumState) -> Result<Channel> {
    let d_a = match cfg.word("state", "random_pure") {
        "prop1" => state.dims()[0] * state.dims()[1],
        _ => need(cfg.usize("d_a"), "d_a")?,
    };
    match cfg.word("channel", "partial_trace") {
        "partial_trace" => {
            let keep = match cfg.usize("d_a1") {
                Some(k) => k,
                None => need(cfg.usize("d1"), "d_a1")?,
            };
            if keep == 0 || d_a % keep != 0 {
                return Err(Error::InvalidParameter(format!("d_a1 = {keep} does not divide d_A = {d_a}")));
            }
            Ok(Channel::partial_trace(keep, d_a / keep))
        }
        "identity" => Ok(Channel::identity(d_a)),
        "full_trace" => Ok(Channel::full_trace(d_a)),
        "depolarizing" => Channel::depolarizing(d_a, need(cfg.real("p"), "p")?),
        other => Err(Error::InvalidParameter(format!("unknown channel `{other}`"))),
    }
}

fn ensembles(cfg: &ExperimentConfig) -> Result<Vec<Ensemble>> {
    Ok(match cfg.word("ensemble", "d_ell") {
        "haar" => vec![Ensemble::Haar],
        "diag_zx_once" => vec![Ensemble::DiagZxOnce],
        "rqc" => vec![Ensemble::Rqc(need(cfg.usize("length"), "length")?)],
        _ => need(cfg.list("ell"), "ell")?.into_iter().map(Ensemble::DEll).collect(),
    })
}

fn run_decouple_mc(cfg: &ExperimentConfig) -> Result<RunOutput> {
    const HEADER: &[&str] = &[
        "instance_id",
        "ensemble",
        "ell",
        "samples",
        "seed",
        "mean_error",
        "std_error",
        "bound_theorem4",
        "bound_haar",
        "exact_square_bound",
        "lambda_rate",
    ];
    let seed = cfg.seed();
    let samples = need(cfg.usize("samples"), "samples")?;
    let ensembles = ensembles(cfg)?;
    let mut table = Table::new(HEADER);
    let mut circuits = cfg.path("circuits").map(|_| String::new());
    let mut violations = Vec::new();
    for id in 0..cfg.usize("instances").unwrap_or(1) {
        let state = decouple_state(cfg, id)?;
        let channel = decouple_channel(cfg, &state)?;
        let base = DecouplingInstance::new(state, channel, ensembles[0], samples, sample_rng(seed, id))?;
        for &ens in &ensembles {
            let inst = base.with_ensemble(ens)?;
            let r = mc_decoupling(&inst)?;
            let t4 = r.bound(BoundKind::Theorem4H2);
            let haar = r.bound(BoundKind::HaarEq8);
            let own = match ens {
                Ensemble::DEll(_) => t4,
                Ensemble::Haar => haar,
                _ => None,
            };
            if let Some(b) = own {
                if r.mean_error > b + 3.0 * r.std_error {
                    violations.push(format!("instance {id} {ens}: mean {} above bound {b}", r.mean_error));
                }
            }
            if let Some(k) = r.exact_square_bound {
                if r.mean_error * r.mean_error > k + 3.0 * r.propagated_square_error() {
                    violations.push(format!("instance {id} {ens}: squared mean above exact kernel {k}"));
                }
            }
            table.push(vec![
                id.to_string(),
                ens.to_string(),
                ens.ell().map_or_else(String::new, |l| l.to_string()),
                samples.to_string(),
                seed.to_string(),
                fmt_real(r.mean_error),
                fmt_real(r.std_error),
                fmt_opt(t4),
                fmt_opt(haar),
                fmt_opt(r.exact_square_bound),
                fmt_real(r.lambda_rate),
            ]);
            if let Some(out) = circuits.as_mut() {
                for i in 0..samples {
                    if let Some(c) = ens.sample_circuit(inst.d_a(), inst.sample_rng(i))? {
                        let _ = writeln!(out, "# instance {id} ensemble {ens} sample {i}");
                        out.push_str(&c.to_text());
                    }
                }
            }
        }
    }
    let summary = if violations.is_empty() {
        format!("decouple-mc: {} rows, every bound holds within 3 standard errors", table.rows.len())
    } else {
        format!("decouple-mc: {} violation(s): {}", violations.len(), violations.join("; "))
    };
    Ok(RunOutput { csv: table.to_csv(), summary, passed: violations.is_empty(), circuits })
}

fn run_decouple_exact(cfg: &ExperimentConfig) -> Result<RunOutput> {
    const HEADER: &[&str] = &[
        "instance_id",
        "ell",
        "seed",
        "d_a",
        "h2_ar",
        "h2_ab",
        "exact_square_bound",
        "collapsed_bound",
        "haar_square_bound",
        "pass",
    ];
    let seed = cfg.seed();
    let ells = need(cfg.list("ell"), "ell")?;
    let mut table = Table::new(HEADER);
    let mut failed = 0;
    for id in 0..cfg.usize("instances").unwrap_or(1) {
        let state = decouple_state(cfg, id)?;
        let channel = decouple_channel(cfg, &state)?;
        let inst = DecouplingInstance::new(state, channel, Ensemble::Haar, 0, sample_rng(seed, id))?;
        let h2 = inst.collision_entropies()?;
        let haar = haar_square_bound(&inst, None, None)?;
        for &ell in &ells {
            let exact = exact_square_bound(&inst, ell, None, None)?;
            let collapsed = collapsed_square_bound(&inst, ell)?;
            let pass = exact >= -1e-12 && exact <= collapsed * (1.0 + 1e-9) + 1e-12;
            failed += usize::from(!pass);
            table.push(vec![
                id.to_string(),
                ell.to_string(),
                seed.to_string(),
                inst.d_a().to_string(),
                fmt_real(h2.h2_ar),
                fmt_real(h2.h2_ab),
                fmt_real(exact),
                fmt_real(collapsed),
                fmt_real(haar),
                pass.to_string(),
            ]);
        }
    }
    let summary = format!("decouple-exact: {} rows, {failed} with kernel above the collapsed bound", table.rows.len());
    Ok(RunOutput { csv: table.to_csv(), summary, passed: failed == 0, circuits: None })
}

/// `[2·2^{−ℓN}(1 − 1/(2^N−1)), 2·2^{−ℓN}(1 + 2/(2^N−1))]`.
pub fn design_interval(n_qubits: usize, ell: usize) -> (f64, f64) {
    let scale = 2.0 * 2f64.powi(-((ell * n_qubits) as i32));
    let m = 2f64.powi(n_qubits as i32) - 1.0;
    (scale * (1.0 - 1.0 / m), scale * (1.0 + 2.0 / m))
}

/// `‖G²_{D[ℓ]} − G²_Haar‖⋄` on `n_qubits` qubits.
pub fn design_distance(n_qubits: usize, ell: usize, gap_tol: f64) -> Result<f64> {
    let r = map_r_pow(n_qubits, ell)?;
    let g = haar_superop(n_qubits)?;
    let delta = (&r.choi() - &g.choi()).hermitian_part();
    let dd = r.space_dim();
    diamond_norm(&delta, dd, dd, gap_tol)
}

fn run_design_delta(cfg: &ExperimentConfig) -> Result<RunOutput> {
    const HEADER: &[&str] =
        &["n_qubits", "ell", "seed", "diamond_distance", "interval_lower", "interval_upper", "pass"];
    let n = need(cfg.usize("n_qubits"), "n_qubits")?;
    let gap_tol = cfg.real("gap_tol").unwrap_or(1e-7);
    let mut table = Table::new(HEADER);
    let mut failed = 0;
    for ell in need(cfg.list("ell"), "ell")? {
        let v = design_distance(n, ell, gap_tol)?;
        let (lo, hi) = design_interval(n, ell);
        let pass = v >= lo - INTERVAL_TOL && v <= hi + INTERVAL_TOL;
        failed += usize::from(!pass);
        table.push(vec![
            n.to_string(),
            ell.to_string(),
            cfg.seed().to_string(),
            fmt_real(v),
            fmt_real(lo),
            fmt_real(hi),
            pass.to_string(),
        ]);
    }
    let summary = format!("design-delta: {} rows, {failed} outside the interval", table.rows.len());
    Ok(RunOutput { csv: table.to_csv(), summary, passed: failed == 0, circuits: None })
}

fn run_moments(cfg: &ExperimentConfig) -> Result<RunOutput> {
    const HEADER: &[&str] = &[
        "n_qubits",
        "ell",
        "seed",
        "p_ell",
        "p_ell_exact",
        "min_choi_eigenvalue",
        "tp_residual",
        "unital_residual",
        "decomposition_residual",
        "pass",
    ];
    let n = need(cfg.usize("n_qubits"), "n_qubits")?;
    let mut table = Table::new(HEADER);
    let mut failed = 0;
    for ell in need(cfg.list("ell"), "ell")? {
        let dec = lemma5_decompose(n, ell)?;
        let r = &dec.report;
        let pass = r.min_choi_eigenvalue >= -LEMMA5_TOL
            && r.tp_residual <= LEMMA5_TOL
            && r.unital_residual <= LEMMA5_TOL
            && r.decomposition_residual <= LEMMA5_TOL;
        failed += usize::from(!pass);
        table.push(vec![
            n.to_string(),
            ell.to_string(),
            cfg.seed().to_string(),
            fmt_real(dec.p_ell),
            dec.p_ell_exact.to_string(),
            fmt_real(r.min_choi_eigenvalue),
            fmt_real(r.tp_residual),
            fmt_real(r.unital_residual),
            fmt_real(r.decomposition_residual),
            pass.to_string(),
        ]);
    }
    let summary = format!("moments-lemma5: {} rows, {failed} invalid decompositions", table.rows.len());
    Ok(RunOutput { csv: table.to_csv(), summary, passed: failed == 0, circuits: None })
}

fn run_entropy(cfg: &ExperimentConfig) -> Result<RunOutput> {
    const HEADER: &[&str] =
        &["instance_id", "seed", "d_a", "d_b", "h_min", "h_2_plugin", "h_2_optimized", "h_0_a", "h_max_a", "pass"];
    let dims = need(cfg.list("dims"), "dims")?;
    let k = cfg.usize("cut").unwrap_or(1);
    let mut table = Table::new(HEADER);
    let mut failed = 0;
    for id in 0..cfg.usize("instances").unwrap_or(1) {
        let rho = build_state(cfg, id, dims.clone())?;
        let cut = Cut::split(k, rho.dims().len())?;
        let h_min = h_min_cond(&rho, &cut)?.value;
        let plugin = h_2_cond(&rho, &cut, H2Mode::Plugin)?.value;
        let optimized = h_2_cond(&rho, &cut, H2Mode::Optimized)?.value;
        let rho_a = rho.marginal(&cut.a)?;
        let pass = optimized >= h_min - 1e-6 && optimized >= plugin - 1e-9;
        failed += usize::from(!pass);
        let d_a: usize = cut.a.iter().map(|&i| rho.dims()[i]).product();
        let d_b: usize = cut.b.iter().map(|&i| rho.dims()[i]).product();
        table.push(vec![
            id.to_string(),
            cfg.seed().to_string(),
            d_a.to_string(),
            d_b.to_string(),
            fmt_real(h_min),
            fmt_real(plugin),
            fmt_real(optimized),
            fmt_real(h_0(&rho_a)),
            fmt_real(h_max(&rho_a)),
            pass.to_string(),
        ]);
    }
    let summary = format!("entropy: {} rows, {failed} with H2 below H_min", table.rows.len());
    Ok(RunOutput { csv: table.to_csv(), summary, passed: failed == 0, circuits: None })
}

fn run_prop1(cfg: &ExperimentConfig) -> Result<RunOutput> {
    const HEADER: &[&str] =
        &["d1", "d2", "closed_form", "exact_twirl", "mc_mean", "mc_std", "lower_bound", "haar_bound", "seed", "pass"];
    let (d1, d2) = (need(cfg.usize("d1"), "d1")?, need(cfg.usize("d2"), "d2")?);
    let samples = need(cfg.usize("samples"), "samples")?;
    let rec = prop1_quantities(d1, d2, samples, sample_rng(cfg.seed(), 0))?;
    let exact_ok = rec.exact_second_moment.is_none_or(|e| (e - rec.closed_form).abs() <= 1e-9);
    let lower_ok = rec.mc_mean >= rec.lower_bound - 3.0 * rec.mc_std_error;
    let pass = exact_ok && lower_ok;
    let mut table = Table::new(HEADER);
    table.push(vec![
        d1.to_string(),
        d2.to_string(),
        fmt_real(rec.closed_form),
        fmt_opt(rec.exact_second_moment),
        fmt_real(rec.mc_mean),
        fmt_real(rec.mc_std_error),
        fmt_real(rec.lower_bound),
        fmt_real(rec.haar_bound),
        cfg.seed().to_string(),
        pass.to_string(),
    ]);
    let summary = format!(
        "prop1: mc mean {:.6} (lower bound {:.6}, Haar bound {:.6}), {}",
        rec.mc_mean,
        rec.lower_bound,
        rec.haar_bound,
        if pass { "PASS" } else { "FAIL" }
    );
    Ok(RunOutput { csv: table.to_csv(), summary, passed: pass, circuits: None })
}

fn run_merging(cfg: &ExperimentConfig) -> Result<RunOutput> {
    const HEADER: &[&str] =
        &["instance_id", "seed", "ell", "delta", "delta_prime", "epsilon", "h_min_ar", "h_0_a", "e_gain", "q_cost"];
    let dims = match (cfg.usize("d_a"), cfg.usize("d_b"), cfg.usize("d_r")) {
        (Some(a), Some(b), Some(r)) => vec![a, b, r],
        _ => Vec::new(),
    };
    let delta = need(cfg.real("delta"), "delta")?;
    let mut table = Table::new(HEADER);
    for id in 0..cfg.usize("instances").unwrap_or(1) {
        let psi = build_state(cfg, id, dims.clone())?;
        for ell in need(cfg.list("ell"), "ell")? {
            let r = merging_rates(&psi, ell, delta)?;
            table.push(vec![
                id.to_string(),
                cfg.seed().to_string(),
                ell.to_string(),
                fmt_real(r.delta),
                fmt_real(r.delta_prime),
                fmt_real(r.epsilon),
                fmt_real(r.h_min_ar),
                fmt_real(r.h_0_a),
                fmt_real(r.e_gain),
                fmt_real(r.q_cost),
            ]);
        }
    }
    let summary = format!("apps-merging ({SURROGATE_LABEL}): {} rows", table.rows.len());
    Ok(RunOutput { csv: table.to_csv(), summary, passed: true, circuits: None })
}

fn run_therm(cfg: &ExperimentConfig) -> Result<RunOutput> {
    const HEADER: &[&str] = &[
        "instance_id",
        "seed",
        "ell",
        "lhs",
        "rhs",
        "satisfied",
        "fraction_bound",
        "h_min_se_r",
        "h_min_e",
        "h_max_s",
        "k",
    ];
    let (d_s, d_e, d_r) =
        (need(cfg.usize("d_s"), "d_s")?, need(cfg.usize("d_e"), "d_e")?, need(cfg.usize("d_r"), "d_r")?);
    let dims = ThermalDims { d_s, d_e, d_r };
    let mut table = Table::new(HEADER);
    let mut failed = 0;
    for id in 0..cfg.usize("instances").unwrap_or(1) {
        let rho = build_state(cfg, id, vec![d_s * d_e, d_r])?;
        for ell in need(cfg.list("ell"), "ell")? {
            let params = ThermalParams {
                ell,
                eps1: need(cfg.real("eps1"), "eps1")?,
                eps2: need(cfg.real("eps2"), "eps2")?,
                eps3: need(cfg.real("eps3"), "eps3")?,
                delta_target: need(cfg.real("delta_target"), "delta_target")?,
            };
            let v = thermalisation_check(&rho, None, dims, params)?;
            failed += usize::from(!v.satisfied);
            table.push(vec![
                id.to_string(),
                cfg.seed().to_string(),
                ell.to_string(),
                fmt_real(v.lhs),
                fmt_real(v.rhs),
                v.satisfied.to_string(),
                fmt_real(v.fraction_bound),
                fmt_real(v.h_min_se_r),
                fmt_real(v.h_min_e),
                fmt_real(v.h_max_s),
                fmt_real(v.k),
            ]);
        }
    }
    let summary = format!(
        "apps-therm ({SURROGATE_LABEL}): {} rows, {failed} where the thermalisation condition fails",
        table.rows.len()
    );
    Ok(RunOutput { csv: table.to_csv(), summary, passed: failed == 0, circuits: None })
}

/// Executes a validated configuration.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    match cfg.subcommand {
        Subcommand::DecoupleMc => run_decouple_mc(cfg),
        Subcommand::DecoupleExact => run_decouple_exact(cfg),
        Subcommand::DesignDelta => run_design_delta(cfg),
        Subcommand::MomentsLemma5 => run_moments(cfg),
        Subcommand::Entropy => run_entropy(cfg),
        Subcommand::Prop1 => run_prop1(cfg),
        Subcommand::AppsMerging => run_merging(cfg),
        Subcommand::AppsTherm => run_therm(cfg),
    }
}
