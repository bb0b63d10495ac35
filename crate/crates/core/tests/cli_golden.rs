mod common;

use awgn_reliability::cli::{main_with_args, EXIT_INFEASIBLE, EXIT_USAGE};

fn case(name: &str) -> &'static common::GoldenCase {
    common::CASES.iter().find(|c| c.name == name).expect("known case")
}

#[test]
fn capacity_golden() {
    common::check(case("capacity.txt")).unwrap();
}

#[test]
fn exponent_curve_golden() {
    common::check(case("exponent_curve.csv")).unwrap();
}

#[test]
fn parametric_golden() {
    common::check(case("parametric.csv")).unwrap();
}

#[test]
fn types_audit_golden() {
    common::check(case("types_audit.csv")).unwrap();
}

#[test]
fn quant_audit_golden() {
    common::check(case("quant_audit.csv")).unwrap();
}

#[test]
fn simulate_goldens() {
    common::check(case("simulate_exhaustive.json")).unwrap();
    common::check(case("simulate_ensemble.json")).unwrap();
}

#[test]
fn reruns_are_byte_identical() {
    for c in common::CASES {
        assert_eq!(common::render(c), common::render(c), "{}", c.name);
    }
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut full = vec!["awgn-rel"];
    full.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = main_with_args(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["capacity", "--snr", "0"]).0, EXIT_USAGE);
    assert_eq!(run(&["capacity"]).0, EXIT_USAGE);
    assert_eq!(run(&["capacity", "--snr", "1", "--base", "1"]).0, EXIT_USAGE);
    let (code, _, err) = run(&["quant-audit", "--alpha", "0.3", "--beta", "0.3"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("delta1"), "{err}");
}

#[test]
fn oversized_enumeration_exits_3() {
    let (code, _, err) = run(&["types-audit", "--n", "50", "--ceiling", "1000"]);
    assert_eq!(code, EXIT_INFEASIBLE);
    assert!(err.contains("bounds-only"), "{err}");
}

#[test]
fn oversized_codebook_exits_3() {
    let (code, _, _) = run(&["simulate", "--n", "64", "--rate-frac-of-capacity", "1", "--snr", "1", "--trials", "1"]);
    assert_eq!(code, EXIT_INFEASIBLE);
}

#[test]
fn csv_manifest_precedes_data() {
    let (_, out, _) = run(&["parametric", "--snr", "1", "--points", "3"]);
    let first_data = out.lines().position(|l| !l.starts_with('#')).unwrap();
    assert!(first_data >= 4);
    assert_eq!(out.lines().nth(first_data).unwrap(), "rho,rate,exponent,kind");
    assert!(out.contains("# seed:") || out.contains("# version:"));
}
