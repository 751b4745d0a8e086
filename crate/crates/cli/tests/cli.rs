use std::path::{Path, PathBuf};
use std::process::Command;

use umlsat_core::loader::parse_model;

use umlsat::{execute, CliError, CommandKind, ExitStatus, JsonHierarchy, JsonReport, RunConfig};

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).display().to_string()
}

fn cli(args: &[&str]) -> (ExitStatus, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let status = umlsat::run(std::iter::once("umlsat").chain(args.iter().copied()), &mut out, &mut err);
    (status, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn exit_codes_follow_the_outcome() {
    assert_eq!(cli(&["check", &fixture("two_classes.uml")]).0, ExitStatus::Clean);
    assert_eq!(cli(&["check", &fixture("ordered_clash.uml")]).0, ExitStatus::Findings);
    let (status, out, err) = cli(&["check", &fixture("malformed.uml")]);
    assert_eq!(status, ExitStatus::InputError);
    assert!(out.is_empty());
    assert!(err.contains("malformed.uml"), "{err}");
    assert_eq!(cli(&["check", &fixture("does_not_exist.uml")]).0, ExitStatus::InputError);
}

#[test]
fn exhausted_node_budget_is_indeterminate() {
    let mut cfg = RunConfig::new(CommandKind::Check, vec![PathBuf::from(fixture("two_classes.uml"))]);
    cfg.reasoner.node_cap = 1;
    let err = execute(&cfg).err().expect("budget of one node is exhausted");
    assert!(matches!(err, CliError::Analysis(_)));
    assert_eq!(err.status(), ExitStatus::Indeterminate);
}

#[test]
fn node_cap_is_read_from_the_environment() {
    let status = Command::new(env!("CARGO_BIN_EXE_umlsat"))
        .args(["check", &fixture("two_classes.uml")])
        .env("UMLSAT_NODE_CAP", "1")
        .status()
        .expect("binary runs");
    assert_eq!(status.code(), Some(3));
}

#[test]
fn json_report_round_trips() {
    let (status, out, _) = cli(&["check", &fixture("ownership_cycle.uml"), "--format", "json"]);
    assert_eq!(status, ExitStatus::Findings);
    let report: JsonReport = serde_json::from_str(&out).unwrap();
    assert!(!report.report.consistent);
    assert!(report.census.total > 0);
    let again: JsonReport = serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
    assert_eq!(again, report);
    let raw: serde_json::Value = serde_json::from_str(&out).unwrap();
    for key in ["consistent", "unsatisfiable", "clashes", "census", "timings"] {
        assert!(raw.get(key).is_some(), "missing {key}");
    }
    for key in ["kind", "message", "participants", "provenance"] {
        assert!(raw["clashes"][0].get(key).is_some(), "clash missing {key}");
    }
}

#[test]
fn output_flag_writes_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.ofn");
    let (status, out, _) = cli(&["translate", &fixture("two_classes.uml"), "--output", &path.display().to_string()]);
    assert_eq!(status, ExitStatus::Clean);
    assert!(out.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), std::fs::read_to_string(fixture("two_classes.ofn")).unwrap());

    let missing = dir.path().join("no/such/dir/out.ofn");
    let (status, _, err) = cli(&["translate", &fixture("two_classes.uml"), "-o", &missing.display().to_string()]);
    assert_eq!(status, ExitStatus::InputError);
    assert!(!err.is_empty());
}

#[test]
fn empty_model_translates_and_classifies() {
    let (status, out, _) = cli(&["translate", &fixture("empty.uml")]);
    assert_eq!(status, ExitStatus::Clean);
    assert!(out.contains("Ontology(<urn:umlsat:empty>"), "{out}");
    let (status, out, _) = cli(&["classify", &fixture("empty.uml")]);
    assert_eq!(status, ExitStatus::Clean);
    assert_eq!(out, "Classifying 0 elements\nowl:Thing\n");
    let (status, out, _) = cli(&["check", &fixture("empty.uml")]);
    assert_eq!(status, ExitStatus::Clean);
    assert!(out.starts_with("Consistent: Yes"), "{out}");
}

#[test]
fn classify_renders_json() {
    let (status, out, _) = cli(&["classify", &fixture("diamond.uml"), "--format", "json"]);
    assert_eq!(status, ExitStatus::Clean);
    let h: JsonHierarchy = serde_json::from_str(&out).unwrap();
    assert!(h.consistent);
    assert_eq!(h.tree, "owl:Thing\n  Top\n    Left\n      Bottom\n    Right\n      Bottom\n");
}

#[test]
fn merging_a_model_with_itself_is_idempotent() {
    let once = cli(&["merge", &fixture("cms.uml")]);
    let twice = cli(&["merge", &fixture("cms.uml"), &fixture("cms.uml")]);
    assert_eq!(once.0, ExitStatus::Clean);
    assert_eq!(twice.0, ExitStatus::Clean);
    let canonical = |text: &str| {
        let mut m = parse_model(text).unwrap().model;
        m.canonicalize();
        m
    };
    assert_eq!(canonical(&once.1), canonical(&twice.1));
}

#[test]
fn both_backends_agree_on_fixtures() {
    for name in ["two_classes.uml", "ordered.uml", "ordered_clash.uml", "ownership_chain.uml", "ownership_cycle.uml"] {
        let tableau = cli(&["check", &fixture(name), "--format", "json"]);
        let both = cli(&["check", &fixture(name), "--format", "json", "--backend", "both"]);
        assert_eq!(tableau.0, both.0, "{name}: {}", both.2);
        let (t, b): (JsonReport, JsonReport) = (serde_json::from_str(&tableau.1).unwrap(), serde_json::from_str(&both.1).unwrap());
        assert_eq!(t.report.consistent, b.report.consistent, "{name}");
        assert_eq!(t.report.unsatisfiable, b.report.unsatisfiable, "{name}");
    }
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(cli(&["--help"]).0, ExitStatus::Clean);
    assert_eq!(cli(&["--version"]).0, ExitStatus::Clean);
    assert_eq!(cli(&["frobnicate"]).0, ExitStatus::InputError);
}
