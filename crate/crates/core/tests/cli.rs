use std::process::Command;

use diagdec::cli::*;
use diagdec::decoupling::random_pure_instance_state;
use diagdec::decoupling::{DecouplingInstance, Ensemble};
use diagdec::linalg::Channel;
use diagdec::random::{DiagCircuit, RngSpec};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_diagdec"))
}

fn messages(e: &ConfigErrors) -> Vec<String> {
    e.0.iter().map(ToString::to_string).collect()
}

#[test]
fn prop1_example_config_is_valid() {
    let cfg = parse_config("subcommand = prop1\nd1 = 2\nd2 = 4\nsamples = 10000\nseed = 42").unwrap();
    assert_eq!(cfg.subcommand, Subcommand::Prop1);
    assert_eq!(cfg.usize("d1"), Some(2));
    assert_eq!(cfg.usize("samples"), Some(10_000));
    assert_eq!(cfg.seed(), 42);
    assert_eq!(parse_config(&cfg.to_text()).unwrap(), cfg);
}

#[test]
fn zero_depth_is_rejected() {
    let e = parse_config("ell = 0").unwrap_err();
    assert!(messages(&e).iter().any(|m| m.contains("`ell`") && m.starts_with("line 1")));
}

#[test]
fn duplicate_key_names_both_lines() {
    let e = parse_config("subcommand = prop1\nd1 = 2\n# comment\nd1 = 4\nd2 = 2\nsamples = 10").unwrap_err();
    let m = messages(&e);
    assert_eq!(m.len(), 1);
    assert!(m[0].contains("`d1`") && m[0].contains("line 2") && m[0].contains("line 4"), "{}", m[0]);
}

#[test]
fn all_errors_are_collected() {
    let src = "subcommand = prop1\nd1 = two\nbogus = 1\nd2 = 4\nsamples = 1\nd_s = 2\nnot a pair\n";
    let m = messages(&parse_config(src).unwrap_err());
    assert_eq!(m.len(), 5, "{m:?}");
    assert!(m[0].starts_with("line 2") && m[0].contains("integer"));
    assert!(m[1].starts_with("line 3") && m[1].contains("unknown key"));
    assert!(m[2].starts_with("line 5") && m[2].contains("outside"));
    assert!(m[3].starts_with("line 6") && m[3].contains("not used by prop1"));
    assert!(m[4].starts_with("line 7"));
}

#[test]
fn missing_and_cross_key_errors() {
    let m = messages(&parse_config("subcommand = decouple-mc\nd_a = 8\nd_a1 = 3\n").unwrap_err());
    for needed in ["`d_r`", "`samples`", "`ell`", "does not divide"] {
        assert!(m.iter().any(|x| x.contains(needed)), "{needed} not in {m:?}");
    }
    let m = messages(&parse_config("subcommand = design-delta\nn_qubits = 3\nell = 1").unwrap_err());
    assert!(m[0].contains("n_qubits <= 2"));
    assert!(parse_config("d1 = 2").unwrap_err().0.iter().any(|e| e.message.contains("subcommand")));
    let therm = "subcommand = apps-therm\nd_s=2\nd_e=2\nd_r=2\nell=2\neps1=0.01\neps2=0.01\neps3=0\ndelta_target=1";
    assert!(messages(&parse_config(therm).unwrap_err())[0].contains("eps1"));
}

#[test]
fn overrides_replace_file_values() {
    let cfg =
        parse_with_overrides("subcommand = prop1\nd1 = 2\nd2 = 4\nsamples = 10", &["d1=4".into(), "seed=9".into()])
            .unwrap();
    assert_eq!(cfg.usize("d1"), Some(4));
    assert_eq!(cfg.seed(), 9);
    assert!(parse_with_overrides("subcommand = prop1", &["novalue".into()]).is_err());
}

#[test]
fn float_cells_carry_seventeen_digits() {
    assert_eq!(fmt_real(0.1), "1.0000000000000001e-1");
    assert_eq!(fmt_real(f64::NAN), "");
    let back: f64 = fmt_real(std::f64::consts::PI).parse().unwrap();
    assert_eq!(back, std::f64::consts::PI);
}

#[test]
fn prop1_schema() {
    let cfg = parse_config("subcommand = prop1\nd1 = 2\nd2 = 2\nsamples = 200\nseed = 3").unwrap();
    let out = run(&cfg).unwrap();
    let mut lines = out.csv.lines();
    assert_eq!(lines.next().unwrap(), "d1,d2,closed_form,exact_twirl,mc_mean,mc_std,lower_bound,haar_bound,seed,pass");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[2].parse::<f64>().unwrap(), 0.75);
    assert!((row[3].parse::<f64>().unwrap() - 0.75).abs() < 1e-12);
    assert_eq!(row[8], "3");
    assert!(lines.next().is_none());
    assert!(out.passed);
}

#[test]
fn design_delta_two_qubits_depth_one_passes_iff_inside_interval() {
    let (lo, hi) = design_interval(2, 1);
    assert!((lo - 1.0 / 3.0).abs() < 1e-15 && (hi - 5.0 / 6.0).abs() < 1e-15);
    let cfg = parse_config("subcommand = design-delta\nn_qubits = 2\nell = 1").unwrap();
    let out = run(&cfg).unwrap();
    let row: Vec<&str> = out.csv.lines().nth(1).unwrap().split(',').collect();
    let v: f64 = row[3].parse().unwrap();
    assert_eq!(out.passed, (lo - 1e-6..=hi + 1e-6).contains(&v));
    assert!(out.passed, "design distance {v}");
}

#[test]
fn decouple_rows_follow_the_documented_columns() {
    let cfg = parse_config(
        "subcommand = decouple-mc\nd_a = 4\nd_r = 2\nd_a1 = 2\nensemble = haar\nsamples = 50\ninstances = 2\nseed = 5",
    )
    .unwrap();
    let out = run(&cfg).unwrap();
    let lines: Vec<&str> = out.csv.lines().collect();
    assert_eq!(
        lines[0],
        "instance_id,ensemble,ell,samples,seed,mean_error,std_error,bound_theorem4,bound_haar,exact_square_bound,lambda_rate"
    );
    assert_eq!(lines.len(), 3);
    let row: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(row.len(), 11);
    assert_eq!((row[1], row[2], row[7]), ("haar", "", ""));
    let haar: f64 = row[8].parse().unwrap();
    let lambda: f64 = row[10].parse().unwrap();
    assert!((lambda + haar.log2()).abs() < 1e-12);
}

#[test]
fn dumped_circuits_reproduce_the_sampled_unitaries() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("circuits.txt");
    let src = format!(
        "subcommand = decouple-mc\nd_a = 4\nd_r = 2\nd_a1 = 2\nell = 2\nsamples = 5\nseed = 11\ncircuits = {}",
        path.display()
    );
    let out = run(&parse_config(&src).unwrap()).unwrap();
    let text = out.circuits.unwrap();
    let blocks: Vec<&str> = text.split("# instance").skip(1).collect();
    assert_eq!(blocks.len(), 5);
    let rho = random_pure_instance_state(4, 2, RngSpec::new(11, 0)).unwrap();
    let inst =
        DecouplingInstance::new(rho, Channel::partial_trace(2, 2), Ensemble::DEll(2), 5, RngSpec::new(11, 1)).unwrap();
    for (i, block) in blocks.iter().enumerate() {
        let body = block.split_once('\n').unwrap().1;
        let c = DiagCircuit::from_text(body).unwrap();
        assert_eq!(c.matrix().max_abs_diff(&inst.sample_unitary(i).unwrap()), 0.0);
    }
}

#[test]
fn exact_kernel_rows_stay_below_collapsed_bound() {
    let cfg = parse_config("subcommand = decouple-exact\nstate = prop1\nd1 = 2\nd2 = 2\nell = 1,2,3").unwrap();
    let out = run(&cfg).unwrap();
    assert_eq!(out.csv.lines().count(), 4);
    assert!(out.passed);
}

#[test]
fn binary_is_deterministic_and_maps_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "subcommand = decouple-mc\nd_a = 8\nd_r = 2\nd_a1 = 4\nell = 1,2\nsamples = 64\nseed = 7\n")
        .unwrap();
    let mut outputs = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let out = dir.path().join(name);
        let status = bin().arg("--config").arg(&cfg).arg("--out").arg(&out).status().unwrap();
        assert_eq!(status.code(), Some(0));
        outputs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert!(!outputs[0].contains(&b'\r'));

    let bad = bin().args(["--set", "subcommand=prop1", "--set", "ell=0"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("ell"));

    let therm = bin()
        .args(["--set", "subcommand=apps-therm", "--set", "d_s=2", "--set", "d_e=8", "--set", "d_r=2"])
        .args(["--set", "ell=2", "--set", "eps1=0.01", "--set", "eps2=0.001", "--set", "eps3=0.001"])
        .args(["--set", "delta_target=1", "--set", "state=maximally_mixed"])
        .output()
        .unwrap();
    assert_eq!(therm.status.code(), Some(1));
    let csv = String::from_utf8(therm.stdout).unwrap();
    assert!(csv.lines().nth(1).unwrap().contains(",false,"));
}
