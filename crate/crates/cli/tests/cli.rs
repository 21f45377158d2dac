use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_padic-resolvent"));
    c.env_remove("PADIC_RESOLVENT_OUT_DIR");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str) -> PathBuf {
    let dir =
        std::env::temp_dir().join(format!("padic-resolvent-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn formula_values() {
    let out = run(&[
        "formula", "eval", "--which", "delta", "--p", "5", "--n", "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["value"], "-5/4");
    assert_eq!(v["identity_checks"]["omega_relation"], true);

    let v = json_of(&run(&[
        "formula", "eval", "--which", "lvalue", "--p", "5", "--n", "3",
    ]));
    assert_eq!(v["value"], "-9/5");
    let v = json_of(&run(&["formula", "eval", "--which", "bound", "--p", "7"]));
    assert_eq!(v["value"], "-4/3");
    assert_eq!(v["identity_checks"]["equals_level_two_value"], true);

    let v = json_of(&run(&[
        "formula", "eval", "--which", "parity", "--p", "5", "--n", "2", "--W", "1",
    ]));
    assert_eq!(v["value"], "-1/1");
    assert_eq!(v["vanishing"], true);
}

#[test]
fn formula_with_invariants() {
    let v = json_of(&run(&[
        "formula", "eval", "--which", "lvalue", "--p", "5", "--n", "2", "--lambda", "2", "--mu",
        "1",
    ]));
    // 2/20 + 1 - 5/4
    assert_eq!(v["value"], "-3/20");
    assert_eq!(v["identity_checks"]["invariants_plus_delta"], true);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(
        run(&["suite", "run", "--name", "nope"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["suite", "run", "--p", "4"]).status.code(), Some(2));
    assert_eq!(
        run(&["table", "--kind", "bogus", "--p", "5", "--n", "2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["formula", "eval", "--which", "bound", "--p", "3"])
            .status
            .code(),
        Some(2)
    );
    // parity mismatch: the L-value vanishes, no finite valuation
    assert_eq!(
        run(&["formula", "eval", "--which", "lvalue", "--p", "5", "--n", "2", "--W", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&[
            "resolvent",
            "compute",
            "--p",
            "5",
            "--n",
            "1",
            "--alpha",
            "/no/such/file.json"
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn tables_are_stable() {
    let a = run(&[
        "table",
        "--kind",
        "valuation-growth",
        "--p",
        "5",
        "--n",
        "9",
    ]);
    let b = run(&[
        "table",
        "--kind",
        "valuation-growth",
        "--p",
        "5",
        "--n",
        "9",
    ]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,valuation");
    assert_eq!(lines[1], "1,-1/1");
    assert_eq!(lines[3], "3,-9/5");
    assert_eq!(lines.len(), 10);

    let v = json_of(&run(&[
        "ramification",
        "table",
        "--p",
        "3",
        "--n",
        "2",
        "--format",
        "json",
    ]));
    for row in v["rows"].as_array().unwrap() {
        assert_eq!(row["closed_form"], row["empirical"], "{row}");
    }
}

#[test]
fn suite_reports_are_deterministic() {
    let args = [
        "suite",
        "run",
        "--name",
        "resolvent-bound",
        "--p",
        "3",
        "--n",
        "1,2",
        "--f",
        "1",
        "--samples",
        "20",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(
        a.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&a.stderr)
    );
    assert_eq!(a.stdout, b.stdout);
    let v = json_of(&a);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["summary"]["fail"], 0);
    assert_eq!(v["config"]["random_samples"], 20);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = scratch("config");
    let cfg = dir.join("run.conf");
    fs::write(&cfg, "seed = 99\nrandom_samples = 5\n").unwrap();
    let cfg_s = cfg.to_str().unwrap();
    let base = [
        "suite",
        "run",
        "--name",
        "resolvent-bound",
        "--p",
        "3",
        "--n",
        "1",
        "--f",
        "1",
        "--config",
        cfg_s,
    ];
    let v = json_of(&run(&base));
    assert_eq!(v["seed"], 99);
    assert_eq!(v["config"]["random_samples"], 5);

    let mut with_flag = base.to_vec();
    with_flag.extend(["--seed", "7"]);
    let v = json_of(&run(&with_flag));
    assert_eq!(v["seed"], 7);
    assert_eq!(v["config"]["random_samples"], 5);

    fs::write(&cfg, "sead = 1\n").unwrap();
    assert_eq!(run(&base).status.code(), Some(2));
}

#[test]
fn output_directory_from_environment() {
    let dir = scratch("outdir");
    let out = bin()
        .env("PADIC_RESOLVENT_OUT_DIR", &dir)
        .args([
            "table", "--kind", "omega", "--p", "5", "--n", "3", "--format", "json",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let written = fs::read_to_string(dir.join("table-omega-p5-n3.json")).unwrap();
    let v: Value = serde_json::from_str(&written).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 6);

    // an explicit --out wins over the environment
    let explicit = dir.join("nested").join("explicit.csv");
    let out = bin()
        .env("PADIC_RESOLVENT_OUT_DIR", &dir)
        .args(["table", "--kind", "omega", "--p", "5", "--n", "2", "--out"])
        .arg(&explicit)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(fs::read_to_string(explicit)
        .unwrap()
        .starts_with("sign,m,factors,valuation"));
}

#[test]
fn resolvent_of_uniformizer() {
    let v = json_of(&run(&[
        "resolvent",
        "compute",
        "--p",
        "5",
        "--n",
        "2",
        "--f",
        "2",
        "--tame",
        "0",
        "--wild",
        "3",
    ]));
    let row = &v["characters"][0];
    assert_eq!(row["valuation"], "3/2");
    assert_eq!(row["meets_bound"], true);
    assert_eq!(row["equality"], true);
    assert_eq!(v["alpha_valuation"], "1/25");

    let short = json_of(&run(&[
        "resolvent",
        "compute",
        "--p",
        "5",
        "--n",
        "2",
        "--f",
        "2",
        "--char",
        "0,3",
    ]));
    assert_eq!(short["characters"], v["characters"]);
    assert_eq!(
        run(&[
            "resolvent",
            "compute",
            "--p",
            "5",
            "--n",
            "1",
            "--char",
            "1"
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn resolvent_from_element_file() {
    let dir = scratch("element");
    let out = run(&[
        "resolvent",
        "compute",
        "--p",
        "3",
        "--n",
        "1",
        "--alpha",
        "zeta",
        "--tame",
        "1",
        "--wild",
        "1",
        "--elements",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    let element = &v["characters"][0]["resolvent"];
    let path = dir.join("r.json");
    fs::write(&path, serde_json::to_string(element).unwrap()).unwrap();

    let out = run(&[
        "resolvent",
        "compute",
        "--p",
        "3",
        "--n",
        "1",
        "--alpha",
        path.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = json_of(&out);
    assert_eq!(v["characters"].as_array().unwrap().len(), 2 * 3);
}

#[test]
fn suite_list_names_every_suite() {
    let out = run(&["suite", "list"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "ramification",
        "resolvent-bound",
        "resolvent-equality",
        "frobenius-uniformizer",
        "lagrange",
        "gauss-lambda",
        "formula-consistency",
    ] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name}");
    }
}
