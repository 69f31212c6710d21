use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn qdice(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdice"))
        .args(args)
        .env_remove("QDICE_SEED")
        .output()
        .expect("run qdice")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let out = qdice(&all);
    serde_json::from_str(&stdout(&out)).expect("valid json")
}

fn csv_records(text: &str) -> Vec<csv::StringRecord> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes())
        .records()
        .map(|r| r.unwrap())
        .collect()
}

fn golden(name: &str, actual: &str) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
    assert_eq!(actual, expected, "{name} differs from golden output");
}

#[test]
fn roll_superposition_passes() {
    let out = qdice(&["roll", "--state", "+x", "--direction", "z", "--trials", "100000", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("overall: PASS"));
}

#[test]
fn roll_eigenstate_is_certain() {
    let v = json(&["roll", "--state", "+z", "--direction", "z", "--trials", "10"]);
    assert_eq!(v["rows"][0]["label"], "+1");
    assert_eq!(v["rows"][0]["estimate"]["count"], 10);
    assert_eq!(v["pass"], true);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["roll", "--state", "+y", "--direction", "z"],
        vec!["roll", "--state", "+x", "--direction", "y"],
        vec!["roll", "--state", "+x", "--direction", "z", "--trials", "0"],
        vec!["roll", "--state", "+x", "--direction", "z", "--bogus"],
        vec!["roll", "--state", "+x", "--direction", "z", "--sigma", "-1"],
        vec!["bell", "--variant", "maybe"],
        vec!["probabilities", "--format", "xml"],
        vec![],
    ] {
        assert_eq!(qdice(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn statistical_failure_exits_one() {
    // An odd trial count cannot hit ½ exactly, and a vanishing interval rejects it.
    let out = qdice(&[
        "roll", "--state", "+x", "--direction", "z", "--trials", "1001", "--sigma", "1e-9",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL"));
}

#[test]
fn probabilities_in_every_format() {
    let human = stdout(&qdice(&["probabilities"]));
    assert!(human
        .lines()
        .any(|l| l.starts_with("|+⟩_x") && l.contains("z-roll") && l.contains("+1") && l.ends_with("0.500000")));
    assert!(human.contains("F_z = [[1, 0], [0, -1]]"));

    let v = json(&["probabilities"]);
    let probs = v["probabilities"].as_array().unwrap();
    assert_eq!(probs.len(), 16);
    let cell = probs
        .iter()
        .find(|p| p["state"] == "+x" && p["direction"] == "z" && p["reading"] == 1)
        .unwrap();
    assert!((cell["probability"].as_f64().unwrap() - 0.5).abs() < 1e-12);

    let csv = stdout(&qdice(&["probabilities", "--format", "csv"]));
    assert_eq!(csv.lines().count(), 17);
    assert_eq!(csv.lines().next().unwrap(), "label,state,direction,reading,probability");

    // Same numbers in both machine formats.
    for (record, entry) in csv_records(&csv).iter().zip(probs) {
        assert_eq!(record[4].parse::<f64>().unwrap(), entry["probability"].as_f64().unwrap());
    }
}

#[test]
fn interference_worked_example() {
    let v = json(&["interference", "--state", "+z", "--condition", "x", "--target", "z", "--trials", "0"]);
    let a = &v["analytic"];
    for (key, want) in [("marginal", 1.0), ("joint_then", 0.25), ("joint_complement_then", 0.25), ("interference", 0.5)] {
        assert!((a[key].as_f64().unwrap() - want).abs() < 1e-12, "{key}");
    }
    assert!(a["closure_residual"].as_f64().unwrap().abs() < 1e-12);
    assert!(v["session"].is_null());

    let v = json(&["interference", "--state", "+z", "--condition", "z", "--target", "z", "--trials", "0"]);
    let got: Vec<f64> = ["marginal", "joint_then", "joint_complement_then", "interference"]
        .iter()
        .map(|k| v["analytic"][*k].as_f64().unwrap())
        .collect();
    assert_eq!(got, vec![1.0, 1.0, 0.0, 0.0]);
}

#[test]
fn interference_session_shows_deficit() {
    let out = qdice(&["interference", "--state", "+z", "--condition", "x", "--target", "z", "--seed", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("classical-sum deficit: 0.500000"));
    assert!(text.contains("empirical deficit"));

    let v = json(&["interference", "--state", "+z", "--condition", "x", "--target", "z", "--seed", "4"]);
    let deficit = v["session"]["deficits"][0]["empirical_deficit"].as_f64().unwrap();
    assert!((deficit - 0.5).abs() < 0.01);
    assert_eq!(v["config"]["seed"], 4);
}

#[test]
fn bell_rolled_reaches_four() {
    let v = json(&["bell", "--trials", "100000", "--seed", "3"]);
    assert_eq!(v["analytic"]["i_value"], 4.0);
    assert!((v["estimated_i"].as_f64().unwrap() - 4.0).abs() <= 0.02);
    assert!((v["bounds"]["tsirelson"].as_f64().unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-15);
    assert_eq!(v["all_pass"], true);

    let human = stdout(&qdice(&["bell", "--trials", "1000"]));
    assert!(human.contains("2√2 ≈ 2.8284"));
}

#[test]
fn bell_discovery_stays_local() {
    let out = qdice(&["bell", "--variant", "discovery"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("16 enumerated, I ∈ [2, 2]"));
    let v = json(&["bell", "--variant", "discovery", "--die-a", "-x", "--die-b", "-x", "--trials", "1000"]);
    assert_eq!(v["enumeration"]["max_i"], 2.0);
    assert!(v["estimated_i"].as_f64().unwrap() <= 2.0);
    assert_eq!(v["config"]["protocol"]["die_a"], "-x");
}

#[test]
fn oracle_sweep_passes() {
    let out = qdice(&["oracle"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("16/16 cells pass"));
    let v = json(&["oracle", "--grid", "1000"]);
    let cells = v["cells"].as_array().unwrap();
    let find = |s: &str, d: &str, r: i64| {
        cells
            .iter()
            .find(|c| c["state"] == s && c["direction"] == d && c["reading"] == r)
            .unwrap()
            .clone()
    };
    let c = find("+z", "z", 1);
    assert_eq!((c["closed_form"].as_f64(), c["born"].as_f64()), (Some(1.0), Some(1.0)));
    assert_eq!(find("-x", "x", 1)["closed_form"], 0.0);
    assert_eq!(v["passed"], 16);
}

#[test]
fn json_and_csv_agree() {
    let args = ["roll", "--state", "-x", "--direction", "z", "--trials", "5000", "--seed", "12"];
    let v = json(&args);
    let mut csv_args = args.to_vec();
    csv_args.extend(["--format", "csv"]);
    let csv_text = stdout(&qdice(&csv_args));
    let records = csv_records(&csv_text);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(records.len(), rows.len());
    for (rec, row) in records.iter().zip(rows) {
        assert_eq!(&rec[0], row["label"].as_str().unwrap());
        assert_eq!(rec[1].parse::<f64>().unwrap(), row["analytic"].as_f64().unwrap());
        assert_eq!(rec[2].parse::<u64>().unwrap(), row["estimate"]["count"].as_u64().unwrap());
        assert_eq!(rec[4].parse::<f64>().unwrap(), row["estimate"]["p_hat"].as_f64().unwrap());
        assert_eq!(rec[5].parse::<f64>().unwrap(), row["estimate"]["ci_half_width"].as_f64().unwrap());
    }

    let config_line = csv_text.lines().next().unwrap().strip_prefix("# config ").unwrap();
    let config: Value = serde_json::from_str(config_line).unwrap();
    assert_eq!(config, v["config"]);
}

#[test]
fn seed_from_environment_is_echoed() {
    let out = Command::new(env!("CARGO_BIN_EXE_qdice"))
        .args(["roll", "--state", "+x", "--direction", "x", "--trials", "10", "--format", "json"])
        .env("QDICE_SEED", "77")
        .output()
        .unwrap();
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["config"]["seed"], 77);

    let out = Command::new(env!("CARGO_BIN_EXE_qdice"))
        .args(["roll", "--state", "+x", "--direction", "x", "--trials", "10"])
        .env("QDICE_SEED", "77")
        .output()
        .unwrap();
    assert!(stdout(&out).contains("seed 77 (from QDICE_SEED)"));
}

#[test]
fn runs_are_byte_identical_across_lanes() {
    let base = ["bell", "--trials", "20000", "--seed", "5", "--format", "json"];
    let one = stdout(&qdice(&base));
    assert_eq!(one, stdout(&qdice(&base)));
    let mut laned = base.to_vec();
    laned.extend(["--lanes", "4"]);
    assert_eq!(one, stdout(&qdice(&laned)));
}

#[test]
fn golden_outputs() {
    golden("probabilities.json", &stdout(&qdice(&["probabilities", "--format", "json"])));
    golden("probabilities.csv", &stdout(&qdice(&["probabilities", "--format", "csv"])));
    golden(
        "interference_analytic.json",
        &stdout(&qdice(&[
            "interference", "--state", "+z", "--condition", "x", "--target", "z", "--trials", "0", "--format", "json",
        ])),
    );
    golden(
        "roll_small.csv",
        &stdout(&qdice(&[
            "roll", "--state", "+x", "--direction", "z", "--trials", "100", "--seed", "7", "--format", "csv",
        ])),
    );
    golden(
        "bell_discovery.json",
        &stdout(&qdice(&["bell", "--variant", "discovery", "--trials", "10", "--format", "json"])),
    );
    golden("oracle_small.csv", &stdout(&qdice(&["oracle", "--grid", "1000", "--format", "csv"])));
}
