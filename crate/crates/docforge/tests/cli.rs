mod common;

#[test]
fn unknown_flag_prints_usage_and_exits_1() {
    let o = common::run_bin(&[&"generate", &"--frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    let o = common::run_bin(&[&"no-such-command"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn missing_manifest_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = common::run_bin(&[&"build-db", &"--corpus", &dir.path().join("none.jsonl"), &"--out", &dir.path()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn generate_twice_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = common::write_config(d);
    let o = common::run_bin(&[&"synth-corpus", &"--config", &cfg, &"--pages", &"4", &"--out", &d.join("c")]);
    assert!(o.status.success());
    let m = d.join("c/manifest.jsonl");
    let o = common::run_bin(&[&"build-db", &"--config", &cfg, &"--corpus", &m, &"--out", &d.join("db")]);
    assert!(o.status.success());
    let mut trees = Vec::new();
    for (name, workers) in [("a", "1"), ("b", "1"), ("c8", "8")] {
        let out = d.join(name);
        let o = common::run_bin(&[
            &"generate", &"--config", &cfg, &"--seed", &"7", &"--workers", &workers, &"--corpus", &m, &"--db", &d.join("db"),
            &"--out", &out,
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(summary["command"], "generate");
        assert_eq!(summary["summary"]["documents"], 4);
        trees.push(common::tree(&out));
    }
    assert_eq!(trees[0], trees[1]);
    assert_eq!(trees[0], trees[2]);
    assert_eq!(trees[0].iter().filter(|(p, _)| p.starts_with("masks")).count(), 4);
}
