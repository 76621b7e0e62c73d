use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn aptile(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aptile"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn last_json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stdout);
    serde_json::from_str(text.lines().last().expect("some output")).expect("json line")
}

#[test]
fn generated_patches_verify() {
    let dir = tempfile::tempdir().unwrap();
    let gen = aptile(
        &["gen", "--rect", "1,1,65,65", "--out", "p.tile"],
        dir.path(),
    );
    assert_eq!(gen.status.code(), Some(0));
    let ok = aptile(&["verify", "p.tile", "--palette", "ce"], dir.path());
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(last_json(&ok)["ok"], true);

    // flip one bracket bit in the first row of vertical edges
    let text = std::fs::read_to_string(dir.path().join("p.tile")).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let row = &mut lines[1];
    let c = u8::from_str_radix(&row[5..6], 16).unwrap() ^ 1;
    row.replace_range(5..6, &format!("{c:x}"));
    std::fs::write(dir.path().join("bad.tile"), lines.join("\n") + "\n").unwrap();
    let bad = aptile(&["verify", "bad.tile", "--palette", "ce"], dir.path());
    assert_eq!(bad.status.code(), Some(1));
    assert_eq!(last_json(&bad)["ok"], false);
}

#[test]
fn torus_has_no_solutions() {
    let dir = tempfile::tempdir().unwrap();
    let out = aptile(&["torus"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = last_json(&out);
    assert_eq!(v["solutions"], 0);
    assert_eq!(v["certificate"]["parity_matchings_z6"], 0);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        aptile(&["gen", "--rect", "1,1,0,5"], dir.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        aptile(&["gen", "--rect", "0,0,4,4", "--sym", "q"], dir.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(aptile(&["frobnicate"], dir.path()).status.code(), Some(2));
    assert_eq!(
        aptile(&["verify", "missing.tile"], dir.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        aptile(&["levitsky", "--radius", "4"], dir.path())
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn budgets_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = aptile(&["enum", "--width", "7", "--budget", "100"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(last_json(&out)["outcome"]["exhausted"], false);
}

#[test]
fn single_thread_output_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "enum",
        "--width",
        "5",
        "--check",
        "colors",
        "--threads",
        "1",
    ];
    let a = aptile(&args, dir.path());
    let b = aptile(&args, dir.path());
    assert_eq!(a.status.code(), Some(1));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn interrupted_levitsky_run_resumes_to_the_same_counts() {
    let dir = tempfile::tempdir().unwrap();
    let full = last_json(&aptile(
        &["levitsky", "--radius", "6", "--threads", "8"],
        dir.path(),
    ));
    let first = aptile(
        &[
            "levitsky",
            "--radius",
            "6",
            "--threads",
            "8",
            "--checkpoint",
            "s.ck",
            "--max-shards",
            "5",
        ],
        dir.path(),
    );
    assert!(matches!(first.status.code(), Some(1 | 3)));
    assert_eq!(last_json(&first)["exhausted"], false);
    let resumed = aptile(
        &[
            "levitsky",
            "--radius",
            "6",
            "--threads",
            "8",
            "--checkpoint",
            "s.ck",
        ],
        dir.path(),
    );
    let resumed = last_json(&resumed);
    assert_eq!(resumed["exhausted"], true);
    for key in ["count", "violations", "nodes", "shards"] {
        assert_eq!(
            resumed["report"]["vertical"][key], full["report"]["vertical"][key],
            "{key}"
        );
    }
    assert!(
        resumed["report"]["vertical"]["shards_resumed"]
            .as_u64()
            .unwrap()
            >= 5
    );
}

#[test]
fn decode_render_palette_and_checks() {
    let dir = tempfile::tempdir().unwrap();
    let gen = aptile(
        &[
            "gen",
            "--rect",
            "100,100,164,164",
            "--shift-x",
            "5",
            "--shift-y=-3",
            "--out",
            "w.tile",
        ],
        dir.path(),
    );
    assert_eq!(gen.status.code(), Some(0));
    let est = last_json(&aptile(&["decode", "w.tile"], dir.path()));
    assert_eq!(est["estimate"]["dx_mod"], 5);
    assert_eq!(est["estimate"]["dy_mod"], 5);

    let svg = aptile(
        &[
            "render", "--input", "w.tile", "--format", "svg", "--out", "w.svg",
        ],
        dir.path(),
    );
    assert_eq!(svg.status.code(), Some(0));
    assert!(std::fs::read_to_string(dir.path().join("w.svg"))
        .unwrap()
        .starts_with("<svg"));

    let pal = last_json(&aptile(
        &["palette", "--radius", "64", "--out", "ce.pal"],
        dir.path(),
    ));
    assert_eq!(pal["report"]["off_axis_orbits"], 7);
    let ok = aptile(&["verify", "w.tile", "--palette", "ce.pal"], dir.path());
    assert_eq!(ok.status.code(), Some(0));

    for args in [
        &["remark1", "--k", "3", "--i", "2"][..],
        &["lemma", "--k", "2", "--rect", "3,5,67,69"],
        &["corollary", "--k", "1", "--samples", "4"],
        &["stats", "--rect", "1,1,65,65", "--max-period", "4"],
    ] {
        let out = aptile(args, dir.path());
        assert_eq!(
            out.status.code(),
            Some(0),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let stats = last_json(&aptile(
        &["stats", "--rect", "1,1,65,65", "--max-period", "4"],
        dir.path(),
    ));
    assert_eq!(stats["periods"], serde_json::json!([]));
}
