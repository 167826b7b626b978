use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(file)
}

fn solquo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_solquo"))
        .args(args)
        .env_remove("SOLQUO_FORMAT")
        .env_remove("SOLQUO_SERIES")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn collect_and_check() {
    let s4 = corpus("s4.pc");
    let s4 = s4.to_str().unwrap();
    let out = solquo(&["collect", s4, "b b a"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "a b d\n");
    let out = solquo(&["check", s4]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "consistent (20 test words)\n");
}

#[test]
fn run_text_report() {
    let out = solquo(&[
        "run",
        corpus("g2.fp").to_str().unwrap(),
        "--series",
        "[(2,1),(3,1),(2,2)]",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(
        text.starts_with("order 192 = 2^6 * 3\nachieved [(2,1),(3,1),(2,2)]\n"),
        "{text}"
    );
    assert!(text.contains("epimorphism\n  x -> a\n  y -> b\n"), "{text}");
}

#[test]
fn run_structured_report() {
    let out = solquo(&[
        "--format",
        "structured",
        "run",
        corpus("p12.fp").to_str().unwrap(),
        "--series",
        "[(5,1),(31,1),(2,1)]",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["order"], "4960");
    assert_eq!(doc["achieved"], serde_json::json!([[5, 1], [31, 1], [2, 1]]));
    assert_eq!(doc["layer_log"].as_array().unwrap().len(), 3);
}

#[test]
fn cover_report() {
    let out = solquo(&["cover", corpus("s4.pc").to_str().unwrap(), "--prime", "2"]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("order 6144 = 2^11 * 3\nmodule dimension 8\n"));
}

#[test]
fn exit_codes() {
    let g2 = corpus("g2.fp");
    let g2 = g2.to_str().unwrap();
    assert_eq!(solquo(&["run", g2, "--series", "[(4,1)]"]).status.code(), Some(1));
    assert_eq!(
        solquo(&["check", corpus("missing.pc").to_str().unwrap()]).status.code(),
        Some(1)
    );
    let capped = solquo(&["run", g2, "--series", "[(2,1),(3,1),(2,2)]", "--max-order", "100"]);
    assert_eq!(capped.status.code(), Some(3));
    assert!(stdout(&capped).starts_with("order 24 "));
    let unbounded = solquo(&["run", g2, "--series", "[(2,1),(3,1),(2,2)]", "--max-order", "none"]);
    assert_eq!(unbounded.status.code(), Some(0));
}
