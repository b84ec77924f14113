use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_nlform"));
    c.env_remove("NLFORM_OUT");
    c
}

fn manifests() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../manifests")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().display().to_string(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL_BATCH: &str = r#"{
  "kind": "theorem-batch",
  "seed": 11,
  "params": { "count": 6, "functions": 40, "generator": { "m_max": 6, "random_gamma": true } }
}"#;

#[test]
fn reruns_are_byte_identical_across_worker_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let m = write(tmp.path(), "m.json", SMALL_BATCH);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let o1 = run(&["verify", "--manifest", m.to_str().unwrap(), "--out", a.to_str().unwrap(), "--jobs", "1"]);
    let o2 = run(&["verify", "--manifest", m.to_str().unwrap(), "--out", b.to_str().unwrap(), "--jobs", "3"]);
    assert_eq!(o1.status.code(), Some(0), "{}", stderr(&o1));
    assert_eq!(o2.status.code(), Some(0), "{}", stderr(&o2));
    let (ta, tb) = (tree(&a), tree(&b));
    assert!(ta.contains_key("summary.csv") && ta.contains_key("report.json"));
    assert_eq!(ta, tb);
}

#[test]
fn seed_override_changes_the_instances() {
    let tmp = tempfile::tempdir().unwrap();
    let m = write(tmp.path(), "m.json", SMALL_BATCH);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    run(&["verify", "--manifest", m.to_str().unwrap(), "--out", a.to_str().unwrap()]);
    run(&["verify", "--manifest", m.to_str().unwrap(), "--out", b.to_str().unwrap(), "--seed", "12"]);
    assert_ne!(tree(&a).get("instances/inst-000.json"), tree(&b).get("instances/inst-000.json"));
}

#[test]
fn asymmetric_kernel_exits_2_naming_the_pair() {
    let tmp = tempfile::tempdir().unwrap();
    let m = write(
        tmp.path(),
        "m.json",
        r#"{"kind":"finite-verify","seed":1,"params":{"instances":[{"name":"bad","instance":{"mu":[1,1,1],"j":[[0,1,0],[1,0,2],[0,3,0]]}}]}}"#,
    );
    let o = run(&["verify", "--manifest", m.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("asymmetric") && e.contains("(1, 2)") && e.contains("bad"), "{e}");
    assert!(!tmp.path().join("o").exists());
}

#[test]
fn schema_violations_exit_2_with_field_and_line() {
    let tmp = tempfile::tempdir().unwrap();
    let m = write(tmp.path(), "m.json", "{\n  \"kind\": \"theorem-batch\",\n  \"seed\": 1,\n  \"params\": { \"count\": 2, \"colour\": 3 }\n}");
    let o = run(&["verify", "--manifest", m.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("colour") && stderr(&o).contains("line 4"), "{}", stderr(&o));

    let m = write(tmp.path(), "m2.json", r#"{"kind":"theorem-batch","params":{"count":2}}"#);
    let o = run(&["verify", "--manifest", m.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("seed"), "{}", stderr(&o));

    let m = write(tmp.path(), "m3.json", r#"{"kind":"theorem-batch","seed":1,"tolerances":{"tol":-1},"params":{"count":2}}"#);
    assert_eq!(run(&["verify", "--manifest", m.to_str().unwrap()]).status.code(), Some(2));

    let m = write(tmp.path(), "m4.json", r#"{"kind":"spectral-gap","seed":1,"params":{}}"#);
    assert_eq!(run(&["verify", "--manifest", m.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn kind_must_match_subcommand() {
    let o = run(&["subordinate", "--manifest", manifests().join("finite-verify.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("lattice-subordination"));
}

#[test]
fn theorem_needs_matching_model() {
    let tmp = tempfile::tempdir().unwrap();
    let m = write(
        tmp.path(),
        "m.json",
        r#"{"kind":"finite-verify","seed":1,"params":{"theorems":["thm43"],"instances":[{"instance":{"mu":[1,1],"j":[[0,1],[1,0]]}}]}}"#,
    );
    let o = run(&["verify", "--manifest", m.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn failed_expectation_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    let m = write(
        tmp.path(),
        "m.json",
        r#"{"kind":"sharpness-scan","seed":0,"params":{"nm":[{"n":2,"alpha1":1.0,"alpha2":1.5,
            "young":{"name":"min_power","params":{"p1":1.5,"p2":1.6}},"expect_bounded":true}]}}"#,
    );
    let out = tmp.path().join("o");
    let o = run(&["sharpness", "--manifest", m.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().contains(",false,"), "{csv}");
}

#[test]
fn theorem_batch_over_fifty_instances() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("batch");
    let o = run(&["verify", "--manifest", manifests().join("theorem-batch.json").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("instance,theorem,pass,worst_slack"));
    let rows: Vec<&str> = lines.collect();
    // five suites, the chained one reporting twice
    assert_eq!(rows.len(), 50 * 6);
    assert!(rows.iter().all(|r| r.split(',').nth(2) == Some("true")));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["kind"], "theorem-batch");
}

#[test]
fn example_manifests_pass() {
    let tmp = tempfile::tempdir().unwrap();
    for (cmd, file) in [
        ("verify", "finite-verify.json"),
        ("enumerate", "finite-verify.json"),
        ("subordinate", "lattice-subordination.json"),
        ("sharpness", "sharpness-scan.json"),
        ("perturbed", "perturbed-threshold.json"),
    ] {
        let out = tmp.path().join(cmd);
        let o = run(&[cmd, "--manifest", manifests().join(file).to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{cmd} {file}: {}", stderr(&o));
        assert!(out.join("report.json").exists() && out.join("summary.csv").exists());
    }
}

#[test]
fn output_dir_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("env-out");
    let o = bin()
        .args(["sharpness", "--manifest", manifests().join("sharpness-scan.json").to_str().unwrap()])
        .env("NLFORM_OUT", &out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(out.join("report.json").exists());
}

#[test]
fn generate_is_deterministic_and_respects_bounds() {
    let tmp = tempfile::tempdir().unwrap();
    let params = r#"{"m_min":8,"m_max":8,"mass_range":[0.5,2.0]}"#;
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for d in [&a, &b] {
        let o = run(&["generate", "--kind", "finite-space", "--seed", "7", "--count", "5", "--params", params, "--out", d.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    assert_eq!(tree(&a), tree(&b));
    for i in 0..5 {
        let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(a.join(format!("instance-{i:03}.json"))).unwrap()).unwrap();
        let mu = doc["mu"].as_array().unwrap();
        assert_eq!(mu.len(), 8);
        assert!(mu.iter().all(|m| (0.5..=2.0).contains(&m.as_f64().unwrap())));
    }
    let o = run(&["generate", "--kind", "lattice-window", "--params", r#"{"n":2,"side":3}"#, "--out", tmp.path().join("w").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("w/window-n2-side3.json")).unwrap()).unwrap();
    assert_eq!(doc["mu"].as_array().unwrap().len(), 9);
    let bad = run(&["generate", "--kind", "finite-space", "--params", r#"{"m_min":9,"m_max":3}"#, "--out", tmp.path().join("x").to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn generated_files_feed_verify() {
    let tmp = tempfile::tempdir().unwrap();
    let g = tmp.path().join("g");
    run(&["generate", "--kind", "finite-space", "--seed", "3", "--count", "2", "--params", r#"{"killing":true,"m_max":6}"#, "--out", g.to_str().unwrap()]);
    let m = write(
        tmp.path(),
        "m.json",
        r#"{"kind":"finite-verify","seed":5,"params":{"functions":50,"instances":[{"path":"g/instance-000.json"},{"path":"g/instance-001.json"}]}}"#,
    );
    let o = run(&["verify", "--manifest", m.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(tmp.path().join("o/summary.csv")).unwrap();
    assert!(csv.contains("instance-000,thm43,true"), "{csv}");
}
