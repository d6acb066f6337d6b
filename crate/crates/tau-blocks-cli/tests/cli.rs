use std::process::{Command, Output};

use clap::Parser;
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use serde_json::Value;
use tau_blocks::kernel::Scalar;
use tau_blocks_cli::args::{parse_scalar, Cli, Command as Sub};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tau-blocks")).args(args).output().expect("spawn binary")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json report")
}

#[test]
fn passing_identity_exits_zero() {
    let out = cli(&["verify", "--id", "s0", "--sigma", "1/5", "--order", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["command"], "verify");
    assert_eq!(r["pass"], true);
    assert_eq!(r["params"]["sigma"], "1/5");
    assert_eq!(r["residual_max_order"], "6");
}

#[test]
fn resonant_sigma_exits_two() {
    let out = cli(&["verify", "--id", "s0", "--sigma", "1/2", "--order", "6"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn bad_flags_exit_two_and_name_the_flag() {
    let out = cli(&["verify", "--id", "nope", "--sigma", "1/5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--id"));

    let out = cli(&["verify", "--id", "bilin", "--b", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--P"));

    let out = cli(&["block", "--c", "one", "--delta", "1/3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--c"));

    let out = cli(&["selftest", "--criteria", "10"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failing_identity_exits_one() {
    let out = cli(&["selftest", "--criteria", "5", "--mutation", "hirota-coefficient"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("criterion 5: FAIL"));
    assert_eq!(json(&out)["pass"], false);
}

#[test]
fn output_is_deterministic() {
    let args = ["block", "--b", "2/3", "--P", "1/7", "--externals", "1/3,1/5,1/7,1/11", "--order", "3"];
    assert_eq!(cli(&args).stdout, cli(&args).stdout);

    let strip = |out: &Output| {
        let mut r = json(out);
        for c in r["result"].as_array_mut().expect("reports") {
            c.as_object_mut().expect("report").remove("seconds");
        }
        r
    };
    let args = ["selftest", "--criteria", "4", "--seed", "7"];
    assert_eq!(strip(&cli(&args)), strip(&cli(&args)));
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("tau-blocks-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    let path = dir.join("report.json");
    let out = cli(&["--out", path.to_str().expect("utf8"), "fast-block", "--scheme", "c1-irregular", "--sigma", "1/5", "--order", "4"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&path).expect("report")).expect("json");
    assert_eq!(r["command"], "fast-block");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn csv_outputs_have_headers() {
    let out = cli(&["bench", "--scheme", "c1-irregular", "--sigma", "1/5", "--n-list", "4,6"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).expect("utf8");
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("scheme,N,wall_ms"));
    assert_eq!(lines.count(), 2);

    let out = cli(&["tau3", "--sigma", "1/5", "--n-range", "3", "--n-max", "10", "--samples", "0.01", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).expect("utf8");
    assert!(text.starts_with("t,zeta,sigma_residual\n"));
}

fn scalar() -> impl Strategy<Value = Scalar> {
    (-50i64..50, 1i64..40, -50i64..50, 1i64..40).prop_map(|(a, b, c, d)| {
        Scalar::new(BigRational::new(BigInt::from(a), BigInt::from(b)), BigRational::new(BigInt::from(c), BigInt::from(d)))
    })
}

proptest! {
    #[test]
    fn scalar_flags_round_trip_through_params(delta in scalar(), p in scalar()) {
        let d = delta.to_string();
        prop_assert_eq!(parse_scalar(&d).expect("parse"), delta.clone());
        let parsed = Cli::try_parse_from(["tau-blocks", "block", "--c", "1", "--delta", d.as_str()]).expect("flags");
        let Sub::Block(args) = &parsed.command else { panic!("block") };
        let echoed = serde_json::to_value(args).expect("echo");
        let back = parse_scalar(echoed["delta"].as_str().expect("string")).expect("reparse");
        prop_assert_eq!(back, delta);

        let text = p.to_string();
        let parsed = Cli::try_parse_from(["tau-blocks", "oracle-l", "--b", "2", "--P", text.as_str(), "--Pp", "1/3", "--alpha", "1", "--n", "0", "--np", "0"]).expect("flags");
        let echoed = serde_json::to_value(match &parsed.command { Sub::OracleL(a) => a, _ => panic!("oracle-l") }).expect("echo");
        prop_assert_eq!(parse_scalar(echoed["p"].as_str().expect("string")).expect("reparse"), p);
    }
}
