use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn dholc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dholc")).args(args).env_remove("DHOLC_PROVER").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn check_with_report(file: &str, extra: &[&str]) -> (i32, Value) {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let path = corpus(file);
    let mut args = vec!["check", path.to_str().unwrap(), "--report", report.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = dholc(&args);
    let json: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    (o.status.code().unwrap(), json)
}

fn validate(report: &Value) {
    let schema_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/report.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(schema_path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(report).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}");
    let s = &report["summary"];
    let count = |k: &str| report["obligations"].as_array().unwrap().iter().filter(|o| o["outcome"] == k).count() as u64;
    assert_eq!(s["total"].as_u64().unwrap(), report["obligations"].as_array().unwrap().len() as u64);
    for k in ["discharged", "remaining", "refuted"] {
        assert_eq!(s[k].as_u64().unwrap(), count(k), "{k}");
    }
}

#[test]
fn lists_have_no_obligations() {
    let (code, r) = check_with_report("lists.dhol", &[]);
    assert_eq!(code, 0);
    assert_eq!(r["summary"]["total"], 0);
    validate(&r);
}

#[test]
fn sets_are_finitely_valid() {
    let (code, r) = check_with_report("sets.dhol", &["--oracle-size", "2"]);
    assert_eq!(code, 0);
    validate(&r);
    let rules: Vec<&str> = r["obligations"].as_array().unwrap().iter().map(|o| o["rule"].as_str().unwrap()).collect();
    assert!(rules.contains(&"Qtype-sym") && rules.contains(&"Qtype-trans"));
}

#[test]
fn broken_sets_are_refuted() {
    let (code, r) = check_with_report("sets_broken.dhol", &["--oracle-size", "2"]);
    assert_eq!(code, 1);
    validate(&r);
    let sym = r["obligations"].as_array().unwrap().iter().find(|o| o["rule"] == "Qtype-sym").unwrap();
    assert_eq!(sym["outcome"], "refuted");
    assert!(sym["counterexample"].as_str().unwrap().contains("contains"));
}

#[test]
fn without_oracle_obligations_remain() {
    let (code, r) = check_with_report("sets.dhol", &[]);
    assert_eq!(code, 1);
    assert!(r["summary"]["remaining"].as_u64().unwrap() > 0);
    validate(&r);
}

#[test]
fn exit_codes_are_stable() {
    for _ in 0..2 {
        assert_eq!(dholc(&["check", corpus("sets_broken.dhol").to_str().unwrap(), "--oracle-size", "2"]).status.code(), Some(1));
    }
}

#[test]
fn structural_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.dhol");
    std::fs::write(&bad, "type nat\nconst c : list\n").unwrap();
    let o = dholc(&["check", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("list"));
    std::fs::write(&bad, "type\n").unwrap();
    assert_eq!(dholc(&["check", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(dholc(&["check", "/nonexistent.dhol"]).status.code(), Some(2));
}

#[test]
fn normalize_merges_refinements() {
    let o = dholc(&["normalize", "(A | p) | q"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), r"A | (\x:A. p x /\ q x)");
}

#[test]
fn normalize_expands_definitions() {
    let o = dholc(&["normalize", "--theory", corpus("sets.dhol").to_str().unwrap(), "obj -> set"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("(obj -> list) / "), "{}", stdout(&o));
    let off = dholc(&["normalize", "--no-quot-cod-axiom", "A -> B / r"]);
    assert_eq!(stdout(&off).trim(), "A -> B / r");
}

#[test]
fn translate_emits_one_problem_per_goal() {
    let dir = tempfile::tempdir().unwrap();
    let o = dholc(&["translate", corpus("settheory.dhol").to_str().unwrap(), "-o", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    for name in ["settheory__composition.p", "settheory__associativity.p"] {
        let text = std::fs::read_to_string(dir.path().join(name)).unwrap();
        assert!(text.contains(", conjecture,"), "{text}");
    }
}

#[test]
fn translate_of_empty_theory_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.dhol");
    std::fs::write(&empty, "# nothing\n").unwrap();
    let out = dir.path().join("out");
    let o = dholc(&["translate", empty.to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!out.exists());
}

#[test]
fn prove_needs_a_prover() {
    let o = dholc(&["prove", corpus("sets.dhol").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn prove_uses_the_template_and_saves_transcripts() {
    let dir = tempfile::tempdir().unwrap();
    let stub = dir.path().join("stub.sh");
    std::fs::write(&stub, "#!/bin/sh\ngrep -q conjecture \"$1\" && echo '% SZS status Theorem'\n").unwrap();
    let emit = dir.path().join("thf");
    let report = dir.path().join("r.json");
    let o = Command::new(env!("CARGO_BIN_EXE_dholc"))
        .args(["prove", corpus("sets.dhol").to_str().unwrap(), "--jobs", "3", "--emit-tptp", emit.to_str().unwrap()])
        .args(["--report", report.to_str().unwrap()])
        .env("DHOLC_PROVER", format!("sh {} {{file}}", stub.display()))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    validate(&r);
    for ob in r["obligations"].as_array().unwrap() {
        let file = PathBuf::from(ob["tptpFile"].as_str().unwrap());
        assert!(file.exists());
        if ob["verdict"] == "theorem" {
            assert!(file.with_extension("out").exists());
        }
    }
}

#[test]
fn disagreement_between_oracle_and_prover_aborts() {
    let dir = tempfile::tempdir().unwrap();
    let liar = dir.path().join("liar.sh");
    std::fs::write(&liar, "#!/bin/sh\necho '% SZS status Theorem'\n").unwrap();
    let o = dholc(&[
        "prove",
        corpus("sets_broken.dhol").to_str().unwrap(),
        "--oracle-size",
        "2",
        "--prover",
        &format!("sh {} {{file}}", liar.display()),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("disagree"));
}
