use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn grslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_grslab")).args(args).output().expect("spawn grslab")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("grslab-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const BEC_SPEC: &str = r#"{
  "code": {"generate": {"p": 2, "m": 4, "n": 15, "k": 7}},
  "channel": {"kind": "bec", "eps": [0.2, 0.4]},
  "decoder": {"kind": "bec_ml"},
  "trials": {"min_trials": 200, "min_errors": 1000000, "max_trials": 200},
  "seed": 5
}"#;

#[test]
fn simulate_writes_csv_and_manifest() {
    let dir = scratch("sim");
    let spec = write(&dir, "spec.json", BEC_SPEC);
    let out = dir.join("fer.csv");
    let trials = dir.join("trials.csv");
    let o = grslab(&[
        "simulate",
        "--spec",
        spec.to_str().unwrap(),
        "--workers",
        "1",
        "--out",
        out.to_str().unwrap(),
        "--trials-out",
        trials.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "channel_param,trials,errors,fer,ci_lo,ci_hi,mean_iters,mean_queries,certified_frac,es_n0_db"
    );
    assert_eq!(lines.count(), 2);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("fer.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["schema_version"], 1);
    assert_eq!(manifest["seed"], 5);
    assert_eq!(std::fs::read_to_string(&trials).unwrap().lines().count(), 401);
}

#[test]
fn seed_override_reproduces() {
    let dir = scratch("seed");
    let spec = write(&dir, "spec.json", BEC_SPEC);
    let run = |w: &str| {
        let o = grslab(&["simulate", "--spec", spec.to_str().unwrap(), "--seed", "9", "--workers", w]);
        assert!(o.status.success());
        o.stdout
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn config_errors_exit_2() {
    let dir = scratch("bad");
    let bad = write(&dir, "bad.json", &BEC_SPEC.replace("[0.2, 0.4]", "[0.2, 1.4]"));
    let o = grslab(&["simulate", "--spec", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("channel.eps[1]"));

    let typo = write(&dir, "typo.json", &BEC_SPEC.replace("\"n\": 15", "\"nn\": 15"));
    let o = grslab(&["simulate", "--spec", typo.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("code.generate"));

    let o = grslab(&["code", "gen", "--p", "2", "--m", "3", "--n", "9", "--k", "3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn code_gen_round_trips_through_simulate() {
    let dir = scratch("gen");
    let code = dir.join("code.json");
    let o = grslab(&["code", "gen", "--p", "3", "--m", "2", "--n", "8", "--k", "3", "--shift", "random", "--out", code.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let spec = write(
        &dir,
        "spec.json",
        r#"{"code": {"path": "code.json"},
            "channel": {"kind": "awgn", "modulation": "pam3", "ebn0_db": [4.0]},
            "decoder": {"kind": "lc_osd", "delta": 2, "max_queries": 64},
            "trials": {"min_trials": 50, "max_trials": 50}}"#,
    );
    let o = grslab(&["simulate", "--spec", spec.to_str().unwrap(), "--workers", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 2);
}

#[test]
fn bounds_and_table1() {
    let dir = scratch("bounds");
    let spec = write(&dir, "ub.json", r#"{"kind": "approx_ub", "m": 8, "n": 16, "k": 8, "eps": [0.3, 0.4, 0.45]}"#);
    let o = grslab(&["bounds", "--spec", spec.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8_lossy(&o.stdout).to_string();
    assert!(text.starts_with("kind,param,value,ci_low,ci_high\n"));
    assert_eq!(text.lines().count(), 4);

    let t1 = write(&dir, "t1.json", r#"{"m": 4, "n": 15, "k_digits": [28], "eps": [0.2]}"#);
    let o = grslab(&["table1", "--spec", t1.to_str().unwrap(), "--trials", "50", "--workers", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("k_digits,eps,trials,cob_mean,ge_mean,reduction,rank_deficient_frac\n"));
}
