use std::path::Path;
use std::process::{Command, Output};

use ekrf_core::cli::manifest::verify_manifest;
use serde_json::Value;

fn ekrf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ekrf"))
        .args(args)
        .env_remove("EKRF_THREADS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("bad json ({e}): {}", stdout(out)))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn construct(dir: &Path, name: &str, args: &[&str]) -> std::path::PathBuf {
    let path = dir.join(name);
    let mut full = vec!["construct"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", p(&path)]);
    let out = ekrf(&full);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn construct_writes_a_verifiable_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let fam = construct(
        dir.path(),
        "t6.fam",
        &[
            "--variant",
            "thm6",
            "--n",
            "10",
            "--k",
            "4",
            "--t",
            "1",
            "--ell",
            "3",
        ],
    );
    assert!(verify_manifest(&fam).unwrap());
    let manifest: Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("t6.fam.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["output"], "t6.fam");
    assert_eq!(manifest["params"]["n"], 10);
    assert_eq!(manifest["sha256"].as_str().unwrap().len(), 64);

    let text = std::fs::read_to_string(&fam).unwrap();
    std::fs::write(&fam, text.replacen("1,2,3,4\n", "1,2,3,9\n", 1)).unwrap();
    assert!(!verify_manifest(&fam).unwrap());
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let fam = construct(
        dir.path(),
        "a.fam",
        &[
            "--variant",
            "thm6",
            "--n",
            "10",
            "--k",
            "3",
            "--t",
            "1",
            "--ell",
            "3",
        ],
    );
    let ok = ekrf(&[
        "--json",
        "verify",
        "--family",
        p(&fam),
        "--ell",
        "3",
        "--variant",
        "eq4",
    ]);
    assert_eq!(code(&ok), 0);
    let v = json(&ok);
    assert_eq!(v["status"], "ok");
    assert_eq!(v["min_pairsum"], v["threshold"]);

    let bad = ekrf(&[
        "--json",
        "verify",
        "--family",
        p(&fam),
        "--ell",
        "3",
        "--variant",
        "eq3",
    ]);
    assert_eq!(code(&bad), 1);
    let v = json(&bad);
    assert_eq!(v["status"], "violation");
    let sets = v["sets"].as_array().unwrap();
    assert_eq!(sets.len(), 3);
    // the witness sets really are that light
    let sets: Vec<Vec<u64>> = sets
        .iter()
        .map(|s| {
            s.as_array()
                .unwrap()
                .iter()
                .map(|x| x.as_u64().unwrap())
                .collect()
        })
        .collect();
    let mut weight = 0;
    for i in 0..3 {
        for j in i + 1..3 {
            weight += sets[i].iter().filter(|x| sets[j].contains(x)).count();
        }
    }
    assert_eq!(Some(weight as i64), v["pair_sum"].as_i64());
    assert!(v["pair_sum"].as_i64() < v["threshold"].as_i64());
}

#[test]
fn usage_and_input_errors_exit_2() {
    assert_eq!(code(&ekrf(&["no-such-command"])), 2);
    assert_eq!(
        code(&ekrf(&[
            "verify",
            "--family",
            "/nonexistent/x.fam",
            "--ell",
            "3",
            "--variant",
            "eq4"
        ])),
        2
    );
    // t + ell - 2 <= k fails
    assert_eq!(
        code(&ekrf(&[
            "construct",
            "--variant",
            "thm6",
            "--n",
            "9",
            "--k",
            "2",
            "--t",
            "1",
            "--ell",
            "4"
        ])),
        2
    );

    let dir = tempfile::tempdir().unwrap();
    let garbage = dir.path().join("g.fam");
    std::fs::write(&garbage, "# n=5 k=2\n1 2\n3 x\n").unwrap();
    let out = ekrf(&["verify", "--family", p(&garbage), "--variant", "pairwise"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
}

#[test]
fn search_optimal_and_unproven() {
    let out = ekrf(&[
        "--json",
        "search",
        "--n",
        "6",
        "--k",
        "3",
        "--variant",
        "pairwise",
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["size"], 10);
    assert_eq!(v["optimal"], true);

    let out = ekrf(&[
        "search",
        "--n",
        "8",
        "--k",
        "3",
        "--ell",
        "3",
        "--variant",
        "eq3",
        "--node-cap",
        "20",
    ]);
    assert_eq!(code(&out), 3);
}

#[test]
fn search_is_the_same_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut bodies = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("s{threads}.fam"));
        let r = ekrf(&[
            "--threads",
            threads,
            "search",
            "--n",
            "7",
            "--k",
            "3",
            "--ell",
            "3",
            "--variant",
            "eq3",
            "--out",
            p(&out),
        ]);
        assert_eq!(code(&r), 0);
        bodies.push(std::fs::read_to_string(&out).unwrap());
        // the written family is valid verify input
        let v = ekrf(&[
            "verify",
            "--family",
            p(&out),
            "--ell",
            "3",
            "--variant",
            "eq3",
        ]);
        assert_eq!(code(&v), 0);
    }
    assert_eq!(bodies[0], bodies[1]);
    assert!(bodies[0].starts_with("# n=7 k=3"));
}

#[test]
fn text_and_json_report_the_same_numbers() {
    let out_text = stdout(&ekrf(&[
        "bound", "--kind", "t6", "--n", "10", "--k", "4", "--t", "1", "--ell", "3",
    ]));
    let out_json = json(&ekrf(&[
        "--json", "bound", "--kind", "t6", "--n", "10", "--k", "4", "--t", "1", "--ell", "3",
    ]));
    assert_eq!(out_text.trim(), out_json["value"].as_str().unwrap());
    assert_eq!(out_text.trim(), "140");

    let text = stdout(&ekrf(&["profile", "--t", "2", "--ell", "5"]));
    let v = json(&ekrf(&["--json", "profile", "--t", "2", "--ell", "5"]));
    let values: Vec<String> = v["points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["value"].to_string())
        .collect();
    let from_text: Vec<String> = text
        .lines()
        .skip(1)
        .take(values.len())
        .map(|l| l.split_whitespace().nth(1).unwrap().to_string())
        .collect();
    assert_eq!(values, from_text);
}

#[test]
fn documented_examples() {
    let v = json(&ekrf(&["--json", "profile", "--t", "2", "--ell", "4"]));
    let values: Vec<i64> = v["points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["value"].as_i64().unwrap())
        .collect();
    assert_eq!(values, [18, 12, 9, 9, 12]);
    let out = ekrf(&[
        "bound", "--kind", "t7", "--n", "10", "--k", "3", "--ell", "3",
    ]);
    assert_eq!(stdout(&out).trim(), "64");
}

#[test]
fn report_empty_grid_and_csv() {
    let out = ekrf(&["report"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).lines().count(), 1);

    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    let out = ekrf(&[
        "report",
        "--grid",
        "10,4,1,3;8,3,2,3",
        "--max-candidates",
        "0",
        "--csv",
        p(&csv),
    ]);
    assert_eq!(code(&out), 0);
    let body = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = body.lines().collect();
    assert_eq!(
        rows[0],
        "n,k,t,ell,s,bound,construction,solver_best,optimal,agreement,error"
    );
    assert!(rows[1].starts_with("10,4,1,3,-,140,140,"));
    assert!(rows[2].starts_with("8,3,2,3,-,11,11,"));
    assert!(verify_manifest(&csv).unwrap());
}

#[test]
fn structure_commands() {
    let dir = tempfile::tempdir().unwrap();
    let flower = construct(
        dir.path(),
        "f.fam",
        &[
            "--variant",
            "sunflower",
            "--n",
            "10",
            "--k",
            "3",
            "--t",
            "1",
            "--u",
            "4",
        ],
    );
    let v = json(&ekrf(&[
        "--json",
        "structure",
        "sunflower",
        "--family",
        p(&flower),
        "--t",
        "1",
        "--u",
        "4",
    ]));
    assert_eq!(v["kernel"], serde_json::json!([1]));
    let v = json(&ekrf(&[
        "--json",
        "structure",
        "matching",
        "--family",
        p(&flower),
    ]));
    assert_eq!(v["nu"], 1);
    let out = ekrf(&[
        "--json",
        "structure",
        "decompose",
        "--family",
        p(&flower),
        "--kernel",
        "1",
    ]);
    assert_eq!(code(&out), 0);

    let fam = construct(
        dir.path(),
        "t6.fam",
        &[
            "--variant",
            "thm6",
            "--n",
            "20",
            "--k",
            "4",
            "--t",
            "2",
            "--ell",
            "3",
        ],
    );
    let out = ekrf(&[
        "--json",
        "structure",
        "audit",
        "--family",
        p(&fam),
        "--t",
        "2",
        "--ell",
        "3",
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!(v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["passed"] == true));
}

#[test]
fn exports_write_files_with_manifests() {
    let dir = tempfile::tempdir().unwrap();
    let lp = dir.path().join("m.lp");
    let out = ekrf(&[
        "export",
        "ilp",
        "--n",
        "5",
        "--k",
        "2",
        "--variant",
        "pairwise",
        "--out",
        p(&lp),
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&lp).unwrap();
    assert_eq!(
        text.lines()
            .filter(|l| l.trim_start().starts_with('c') && l.contains("<="))
            .count(),
        15
    );
    assert!(verify_manifest(&lp).unwrap());

    let cnf = dir.path().join("m.cnf");
    let out = ekrf(&[
        "export",
        "cnf",
        "--n",
        "5",
        "--k",
        "2",
        "--variant",
        "pairwise",
        "--target",
        "4",
        "--out",
        p(&cnf),
    ]);
    assert_eq!(code(&out), 0);
    // ten set variables come first, totalizer outputs after them
    let header = std::fs::read_to_string(&cnf).unwrap();
    let header = header
        .lines()
        .find(|l| l.starts_with("p cnf "))
        .unwrap()
        .to_string();
    let vars: usize = header.split_whitespace().nth(2).unwrap().parse().unwrap();
    assert!(vars > 10);

    let out = ekrf(&[
        "export",
        "ilp",
        "--n",
        "12",
        "--k",
        "2",
        "--ell",
        "3",
        "--variant",
        "eq4",
        "--cap",
        "10",
        "--out",
        p(&lp),
    ]);
    assert_eq!(code(&out), 2);
}
