use std::path::Path;
use std::process::{Command, Output};

use fria_core::reporting::{import_assessment, read_report_document};
use serde_json::Value;

fn fria(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fria"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = fria(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn error_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("structured error on stderr")
}

fn passport_through(dir: &Path, last: &str) {
    ok(dir, &["demo", "."]);
    let steps: [&[&str]; 6] = [
        &["check", "profile.json", "--jurisdiction", "IE", "--id", "passport", "--out", "a.json"],
        &["import-dpia", "a.json", "dpia.json"],
        &["assess", "a.json", "answers.json"],
        &["risks", "score", "a.json", "risks.json"],
        &["impacts", "derive", "a.json", "--decisions", "decisions.json"],
        &["report", "compile", "a.json", "--out", "report.json"],
    ];
    for s in steps {
        ok(dir, s);
        if s[0] == last {
            return;
        }
    }
}

#[test]
fn passport_runs_through_all_stages() {
    let dir = tempfile::tempdir().unwrap();
    passport_through(dir.path(), "report");
    let a = import_assessment(&std::fs::read(dir.path().join("a.json")).unwrap()).unwrap();
    for n in 1..=5 {
        assert!(a.stage(n).is_settled(), "stage {n}");
    }
    let bytes = std::fs::read(dir.path().join("report.json")).unwrap();
    let report = read_report_document(&bytes).unwrap();
    assert_eq!(report.report.assessment.id, "passport");
    assert!(report.bytes == bytes);

    let out = ok(
        dir.path(),
        &[
            "notify", "--dry-run", "report.json", "--mode", "market-surveillance", "--authority", "IE-MSA",
            "--submitter-id", "ba", "--submitter-name", "Border Agency",
        ],
    );
    let payload: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(payload["dry_run"], true);
    assert_eq!(payload["report_checksum"], report.checksum.as_str());
    assert!(!payload["residual_summary"].as_array().unwrap().is_empty());
}

#[test]
fn check_reports_the_border_rule() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["demo", "."]);
    let out = ok(dir.path(), &["check", "profile.json", "--jurisdiction", "IE", "--format", "json"]);
    let d: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(d["outcome"], "Required");
    assert!(d["fired_rules"].as_array().unwrap().iter().any(|r| r["rule_id"] == "art27.deployer"));
    assert!(!dir.path().join("a.json").exists());
}

#[test]
fn impacts_stay_open_without_decisions() {
    let dir = tempfile::tempdir().unwrap();
    passport_through(dir.path(), "risks");
    let out = ok(dir.path(), &["impacts", "derive", "a.json", "--format", "json"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(v["open"].as_u64().unwrap() > 0);
    let a = import_assessment(&std::fs::read(dir.path().join("a.json")).unwrap()).unwrap();
    assert!(a.stage(3).is_settled());
    assert!(!a.stage(4).is_settled());

    let refused = fria(dir.path(), &["report", "compile", "a.json", "--format", "json"]);
    assert_eq!(refused.status.code(), Some(1));
    assert_eq!(error_json(&refused)["code"], "stage_order");
}

#[test]
fn out_leaves_the_input_untouched() {
    let dir = tempfile::tempdir().unwrap();
    passport_through(dir.path(), "check");
    let before = std::fs::read(dir.path().join("a.json")).unwrap();
    ok(dir.path(), &["import-dpia", "a.json", "dpia.json", "--out", "b.json"]);
    assert_eq!(std::fs::read(dir.path().join("a.json")).unwrap(), before);
    let b = import_assessment(&std::fs::read(dir.path().join("b.json")).unwrap()).unwrap();
    assert!(b.stage(2).is_settled());
}

#[test]
fn answers_accept_an_object() {
    let dir = tempfile::tempdir().unwrap();
    passport_through(dir.path(), "import-dpia");
    std::fs::write(dir.path().join("one.json"), r#"{"Q2.3": true}"#).unwrap();
    ok(dir.path(), &["assess", "a.json", "one.json"]);
    let a = import_assessment(&std::fs::read(dir.path().join("a.json")).unwrap()).unwrap();
    assert!(a.intake.answers.contains_key("Q2.3"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(fria(dir.path(), &[]).status.code(), Some(2));
    assert_eq!(fria(dir.path(), &["check"]).status.code(), Some(2));
    assert_eq!(fria(dir.path(), &["check", "missing.json", "--jurisdiction", "IE"]).status.code(), Some(2));
    ok(dir.path(), &["demo", "."]);
    let no_j = fria(dir.path(), &["check", "profile.json", "--format", "json"]);
    assert_eq!(no_j.status.code(), Some(2));
    assert_eq!(error_json(&no_j)["code"], "usage");
    assert_eq!(fria(dir.path(), &["check", "profile.json", "--jurisdiction", "XX"]).status.code(), Some(2));
    assert_eq!(fria(dir.path(), &["catalog", "tally", "--source", "nowhere"]).status.code(), Some(2));
    assert_eq!(
        fria(dir.path(), &["notify", "report.json", "--submitter-id", "a", "--submitter-name", "b"]).status.code(),
        Some(2)
    );
}

#[test]
fn validation_failures_exit_one_with_details() {
    let dir = tempfile::tempdir().unwrap();
    passport_through(dir.path(), "import-dpia");
    std::fs::write(dir.path().join("bad.json"), r#"[{"question_id": "Q4.5", "value": "soon"}]"#).unwrap();
    let before = std::fs::read(dir.path().join("a.json")).unwrap();
    let out = fria(dir.path(), &["assess", "a.json", "bad.json", "--format", "json"]);
    assert_eq!(out.status.code(), Some(1));
    let e = error_json(&out);
    assert_eq!(e["code"], "validation");
    assert!(e["message"].is_string());
    assert!(e["details"].is_array());
    assert_eq!(std::fs::read(dir.path().join("a.json")).unwrap(), before);

    std::fs::write(dir.path().join("unknown.json"), r#"{"Q9.9": 1}"#).unwrap();
    let out = fria(dir.path(), &["assess", "a.json", "unknown.json", "--format", "json"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_json(&out)["code"], "not_found");

    std::fs::write(dir.path().join("garbled.json"), "{").unwrap();
    let out = fria(dir.path(), &["gaps", "garbled.json", "--format", "json"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_json(&out)["code"], "bad_document");
}

#[test]
fn self_assessment_records_refuse_an_authority() {
    let dir = tempfile::tempdir().unwrap();
    passport_through(dir.path(), "report");
    let out = fria(
        dir.path(),
        &[
            "notify", "--dry-run", "report.json", "--authority", "IE-MSA", "--submitter-id", "a", "--submitter-name",
            "b", "--format", "json",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_json(&out)["code"], "validation");
}

#[test]
fn catalog_commands() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(dir.path(), &["catalog", "tally", "--source", "annex3", "--format", "json"]);
    let t: Value = serde_json::from_str(&out).unwrap();
    assert_eq!((t["total"].as_u64(), t["required"].as_u64(), t["conditional"].as_u64()), (Some(25), Some(22), Some(3)));

    let seed = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/catalogs/rights.json");
    ok(dir.path(), &["catalog", "validate", seed.to_str().unwrap()]);

    std::fs::write(dir.path().join("rights.json"), r#"{"version": "x", "rights": "none"}"#).unwrap();
    assert_eq!(fria(dir.path(), &["catalog", "validate", "rights.json"]).status.code(), Some(1));
    std::fs::write(dir.path().join("whatever.json"), "{}").unwrap();
    assert_eq!(fria(dir.path(), &["catalog", "validate", "whatever.json"]).status.code(), Some(2));
}

#[test]
fn catalog_directory_overrides_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cats = dir.path().join("cats");
    std::fs::create_dir(&cats).unwrap();
    std::fs::write(cats.join("conditions.json"), "not json").unwrap();
    let out = fria(dir.path(), &["--catalog", "cats", "catalog", "tally", "--format", "json"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_json(&out)["code"], "catalog");
}
