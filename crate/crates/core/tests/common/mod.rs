//! Pinned CLI invocations shared by the golden-file tests and the acceptance run.

#![allow(dead_code)]

use std::path::PathBuf;

use awgn_reliability::cli::{data_section, main_with_args};

pub struct GoldenCase {
    pub name: &'static str,
    pub args: &'static [&'static str],
    pub exit: i32,
    pub json: bool,
}

pub const CASES: &[GoldenCase] = &[
    GoldenCase { name: "capacity.txt", args: &["capacity", "--snr", "3"], exit: 0, json: false },
    GoldenCase {
        name: "exponent_curve.csv",
        args: &["exponent-curve", "--snr", "1", "--rate-min", "0.05", "--rate-max", "1.0", "--points", "8"],
        exit: 0,
        json: false,
    },
    GoldenCase {
        name: "parametric.csv",
        args: &["parametric", "--snr", "4", "--base", "e", "--points", "8"],
        exit: 0,
        json: false,
    },
    GoldenCase { name: "types_audit.csv", args: &["types-audit", "--n", "4"], exit: 0, json: false },
    GoldenCase {
        name: "quant_audit.csv",
        args: &["quant-audit", "--n", "400", "--instances", "2", "--seed", "7"],
        exit: 0,
        json: false,
    },
    GoldenCase {
        name: "simulate_exhaustive.json",
        args: &["simulate", "--n", "8", "--rate-frac-of-capacity", "0.5", "--snr", "1", "--trials", "2000", "--seed", "3"],
        exit: 0,
        json: true,
    },
    GoldenCase {
        name: "simulate_ensemble.json",
        args: &[
            "simulate", "--n", "32", "--rate-frac-of-capacity", "2", "--snr", "1", "--trials", "500", "--seed", "5",
            "--rule", "sphere", "--mode", "ensemble", "--tilt",
        ],
        exit: 0,
        json: true,
    },
];

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

/// Runs the case and returns (exit code, comparable data section).
pub fn render(case: &GoldenCase) -> (i32, String) {
    let mut args = vec!["awgn-rel"];
    args.extend_from_slice(case.args);
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = main_with_args(args, &mut out, &mut err);
    let text = String::from_utf8(out).expect("utf-8 output");
    let data = if case.json {
        let mut v: serde_json::Value = serde_json::from_str(&text).expect("json output");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("manifest");
        }
        serde_json::to_string_pretty(&v).unwrap() + "\n"
    } else {
        data_section(&text)
    };
    (code, data)
}

/// Compares against the fixture; `BLESS=1` rewrites it instead.
pub fn check(case: &GoldenCase) -> Result<(), String> {
    let (code, data) = render(case);
    if code != case.exit {
        return Err(format!("{}: exit {code}, expected {}", case.name, case.exit));
    }
    let path = golden_dir().join(case.name);
    if std::env::var_os("BLESS").is_some() {
        std::fs::write(&path, &data).map_err(|e| e.to_string())?;
        return Ok(());
    }
    let want = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if want != data {
        return Err(format!("{}: data section differs from fixture", case.name));
    }
    Ok(())
}
