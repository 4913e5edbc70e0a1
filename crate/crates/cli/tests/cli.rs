use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_strongcluster"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn path_of_three_is_one_cluster_under_both_executors() {
    let o = run(&[
        "cluster",
        "--family",
        "path",
        "--n",
        "3",
        "--backend",
        "both",
        "--verify",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["clusters"].as_array().unwrap().len(), 1);
    assert_eq!(v["coverage"], 3);
    assert_eq!(v["equivalence"], "PASS");
}

#[test]
fn single_edge_file_takes_sixty_one_rounds() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("k2.txt");
    fs::write(&g, "2 1\n0 1\n").unwrap();
    let o = run(&["cluster", "--input", p(&g), "--backend", "simulated"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["rounds"], 61);
    assert_eq!(v["b"], 1);
}

#[test]
fn tampered_clustering_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let art = dir.path().join("c.json");
    let o = run(&["cluster", "--family", "grid", "--n", "16", "-o", p(&art)]);
    assert!(o.status.success());
    let ok = run(&[
        "verify",
        "--family",
        "grid",
        "--n",
        "16",
        "--artifact",
        p(&art),
    ]);
    assert!(ok.status.success(), "{}", stdout(&ok));

    let mut v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&art).unwrap()).unwrap();
    let moved = v["clusters"][0]["nodes"]
        .as_array_mut()
        .unwrap()
        .pop()
        .unwrap();
    v["unclustered"].as_array_mut().unwrap().push(moved);
    fs::write(&art, serde_json::to_string(&v).unwrap()).unwrap();
    let bad = run(&[
        "verify",
        "--family",
        "grid",
        "--n",
        "16",
        "--artifact",
        p(&art),
    ]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("FAIL"));
}

#[test]
fn outputs_repeat_exactly() {
    for args in [
        &[
            "cluster", "--family", "gnp", "--n", "60", "--seed", "4", "--ids", "permuted",
        ][..],
        &[
            "decompose",
            "--family",
            "tree",
            "--n",
            "40",
            "--ids",
            "scattered",
            "--seed",
            "2",
        ],
        &["mis", "--family", "cycle", "--n", "25"],
        &["gen", "--family", "gnp", "--n", "30", "--seed", "9"],
    ] {
        let a = run(args);
        let b = run(args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn generated_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.txt");
    assert!(run(&[
        "gen",
        "--family",
        "hypercube",
        "--n",
        "16",
        "--ids",
        "reversed",
        "-o",
        p(&g)
    ])
    .status
    .success());
    let from_file = run(&["cluster", "--input", p(&g)]);
    let from_family = run(&[
        "cluster",
        "--family",
        "hypercube",
        "--n",
        "16",
        "--ids",
        "reversed",
    ]);
    assert_eq!(from_file.stdout, from_family.stdout);
}

#[test]
fn decomposition_and_mis_verify() {
    let dir = tempfile::tempdir().unwrap();
    for (cmd, name) in [("decompose", "d.json"), ("mis", "m.json")] {
        let art = dir.path().join(name);
        assert!(run(&[
            cmd,
            "--family",
            "grid",
            "--n",
            "49",
            "--verify",
            "-o",
            p(&art)
        ])
        .status
        .success());
        let o = run(&[
            "verify",
            "--family",
            "grid",
            "--n",
            "49",
            "--artifact",
            p(&art),
            "--json",
        ]);
        assert!(o.status.success());
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["all_pass"], true);
    }
}

#[test]
fn trace_files_land_in_configured_directory() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_strongcluster"))
        .args([
            "cluster",
            "--family",
            "path",
            "--n",
            "4",
            "--backend",
            "both",
            "--trace",
        ])
        .env("STRONGCLUSTER_TRACE_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    let names: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert!(
        names.iter().any(|n| n.starts_with("reference-phase-")),
        "{names:?}"
    );
    assert!(
        names.contains(&"simulated-rounds.log".to_string()),
        "{names:?}"
    );
}

#[test]
fn bench_emits_csv() {
    let o = run(&[
        "bench",
        "--family",
        "path",
        "--sizes",
        "4,16",
        "--backend",
        "reference",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,b,coverage,max_diameter,rounds,rounds_per_b6");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("4,2,4,"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["cluster"]).status.code(), Some(2));
    assert_eq!(
        run(&["cluster", "--family", "blob", "--n", "4"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["cluster", "--input", "/nonexistent/graph"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["cluster", "--family", "path", "--n", "0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}
