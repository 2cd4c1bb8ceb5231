use std::path::{Path, PathBuf};
use std::process::Command;

use twistedcx_cli::{execute, parse_input, serialize, Command as Cmd};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_twistedcx")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

fn run_on(cmd: &str, file: &str, extra: &[&str]) -> (i32, String) {
    let path = fixture(file);
    let mut args = vec![cmd, "--input", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

const CORPUS: &[(&str, &str, i32)] = &[
    ("validate", "constant_interval.json", 0),
    ("twist", "constant_interval.json", 0),
    ("resolve", "constant_interval.json", 0),
    ("cohomology", "constant_interval.json", 0),
    ("validate", "open_faces.json", 0),
    ("validate", "zero_gluing.json", 0),
    ("sheafify", "zero_gluing.json", 0),
    ("local-equiv", "zero_gluing.json", 0),
    ("adjunction", "zero_gluing.json", 0),
    ("check-weq", "zero_gluing.json", 1),
    ("validate", "broken_gluing.json", 1),
    ("shift", "broken_gluing.json", 1),
    ("validate", "syntax_error.json", 2),
    ("validate", "non_natural.json", 2),
    ("fiber-product", "open_faces.json", 2),
    ("cone", "constant_interval.json", 2),
    ("validate", "missing.json", 2),
];

#[test]
fn corpus_exit_codes() {
    for (cmd, file, code) in CORPUS {
        let (got, out) = run_on(cmd, file, &[]);
        assert_eq!(got, *code, "{cmd} on {file}:\n{out}");
    }
}

#[test]
fn reports_are_byte_identical_across_runs() {
    for (cmd, file, _) in CORPUS {
        for fmt in ["text", "machine"] {
            let a = run_on(cmd, file, &["--format", fmt]);
            let b = run_on(cmd, file, &["--format", fmt]);
            assert_eq!(a, b, "{cmd} on {file}");
        }
    }
}

#[test]
fn zero_gluing_is_not_a_weak_equivalence() {
    let (code, out) = run_on("check-weq", "zero_gluing.json", &[]);
    assert_eq!(code, 1);
    assert!(out.contains("not a weak equivalence"), "{out}");
    assert!(out.contains("sheafification of E is acyclic on every face"), "{out}");
}

#[test]
fn parse_errors_carry_a_location() {
    let (_, out) = run_on("validate", "syntax_error.json", &["--format", "machine"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["status"], "error");
    assert_eq!(v["error"]["kind"], "parse");
    assert_eq!(v["error"]["line"], 4);
}

#[test]
fn validation_errors_name_the_object() {
    let (_, out) = run_on("validate", "non_natural.json", &[]);
    assert!(out.contains("component (U,U)") && out.contains("U -> U,V"), "{out}");
}

#[test]
fn closure_warning_is_reported() {
    let (_, out) = run_on("validate", "open_faces.json", &[]);
    assert!(out.contains("warning: faces not closed under subsets; added A,B A,C B,C"), "{out}");
}

#[test]
fn resolve_then_check_the_comparison() {
    let dir = std::env::temp_dir().join(format!("twistedcx-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let emitted = dir.join("resolved.json");
    let (code, _) = run_on("resolve", "constant_interval.json", &["--emit", emitted.to_str().unwrap()]);
    assert_eq!(code, 0);
    let path = emitted.to_str().unwrap();
    let (code, out) = run(&["check-weq", "--input", path, "--name", "resolve.P.comparison"]);
    assert_eq!(code, 0, "{out}");
    let (code, out) = run(&["fiber-product", "--input", path, "--name", "resolve.P"]);
    assert_eq!(code, 0, "{out}");
    let (code, out) = run(&["transfer", "--input", path, "--name", "resolve.P.comparison"]);
    assert_eq!(code, 0, "{out}");
    let (code, out) = run(&["cone", "--input", path, "--out", dir.join("r.txt").to_str().unwrap()]);
    assert_eq!((code, out.as_str()), (0, ""));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn serialization_round_trips() {
    for file in ["constant_interval.json", "zero_gluing.json", "open_faces.json", "broken_gluing.json"] {
        let text = std::fs::read_to_string(fixture(file)).unwrap();
        let ws = parse_input(&text, None).unwrap().workspace;
        let again = parse_input(&serialize(&ws), None).unwrap().workspace;
        assert_eq!(ws, again, "{file}");
        assert_eq!(serialize(&ws), serialize(&again));
    }
    let text = std::fs::read_to_string(fixture("constant_interval.json")).unwrap();
    for cmd in [Cmd::Resolve, Cmd::Twist] {
        let (_, ws) = execute(cmd, &text, None, None);
        let ws = ws.unwrap();
        let again = parse_input(&serialize(&ws), None).unwrap().workspace;
        assert_eq!(ws, again);
    }
}

#[test]
fn field_flag_overrides_the_document() {
    let (code, out) = run_on("cohomology", "constant_interval.json", &["--field", "fp:7"]);
    assert_eq!(code, 0);
    assert!(out.contains("field: fp:7"), "{out}");
    let (code, _) = run_on("cohomology", "constant_interval.json", &["--field", "fp:8"]);
    assert_eq!(code, 2);
}
