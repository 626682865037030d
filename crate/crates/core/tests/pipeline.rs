use std::path::Path;

use grslab::bounds::{er, DmcModel};
use grslab::harness::curves::{bound_curve, BoundSpec};
use grslab::harness::{self, points_csv, ExperimentSpec};

fn spec(text: &str) -> ExperimentSpec {
    ExperimentSpec::from_json(text).unwrap()
}

const OSD: &str = r#"{
  "code": {"generate": {"p": 3, "m": 2, "n": 8, "k": 3, "seed": 4}},
  "channel": {"kind": "awgn", "modulation": "pam3", "ebn0_db": [1.0, 3.0]},
  "decoder": {"kind": "lc_osd", "delta": 3, "max_queries": 100},
  "trials": {"min_trials": 300, "max_trials": 300},
  "seed": 8
}"#;

#[test]
fn manifest_spec_reproduces_run() {
    let first = harness::run(&spec(OSD), Path::new(".")).unwrap();
    let pinned = first.manifest.spec.to_string();
    assert!(pinned.contains("pinned"));
    let again = harness::run(&spec(&pinned), Path::new(".")).unwrap();
    assert_eq!(points_csv(&first.points).unwrap(), points_csv(&again.points).unwrap());
}

#[test]
fn worker_count_does_not_change_results() {
    let mut s = spec(OSD);
    s.workers = Some(1);
    let a = harness::run(&s, Path::new(".")).unwrap();
    s.workers = Some(3);
    let b = harness::run(&s, Path::new(".")).unwrap();
    assert_eq!(points_csv(&a.points).unwrap(), points_csv(&b.points).unwrap());
    assert!(a.points[0].fer > a.points[1].fer);
}

#[test]
fn exponent_curve_matches_direct_evaluation() {
    let s: BoundSpec =
        serde_json::from_str(r#"{"kind": "exponent", "model": {"kind": "symmetric", "p": 3, "eps": 0.1}, "rates": [0.1, 0.3, 0.5]}"#).unwrap();
    let m = DmcModel::symmetric(3, 0.1).unwrap();
    for row in bound_curve(&s).unwrap() {
        assert_eq!(row.value, er(&m, row.param));
    }
}
