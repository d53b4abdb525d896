use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn coexplore(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coexplore")).args(args).output().unwrap()
}

fn group_args() -> Vec<String> {
    let mut v = vec!["--universe".to_string(), data("olympics/universe.cxt").display().to_string()];
    for f in ["expert1.json", "expert2.json", "expert3.json"] {
        v.push("--expert".into());
        v.push(data("olympics").join(f).display().to_string());
    }
    v
}

fn explore(out: &std::path::Path, extra: &[&str]) -> Output {
    let mut args = vec!["explore".to_string()];
    args.extend(group_args());
    args.extend(extra.iter().map(|s| s.to_string()));
    args.push("--out".into());
    args.push(out.display().to_string());
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    coexplore(&refs)
}

#[test]
fn explore_writes_the_olympics_result() {
    let dir = tempfile::tempdir().unwrap();
    let out = explore(dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let imp = std::fs::read_to_string(dir.path().join("accepted.imp")).unwrap();
    assert_eq!(imp.lines().count(), 2);
    let ctx = coexplore_core::cxt::parse(&std::fs::read_to_string(dir.path().join("result.cxt")).unwrap()).unwrap();
    assert_eq!(ctx.object_count(), 19);
    let ledger: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("ledger.json")).unwrap()).unwrap();
    assert_eq!(ledger["total"], 16);
    let history = std::fs::read_to_string(dir.path().join("history.jsonl")).unwrap();
    assert_eq!(history.lines().count(), 8);
    let fict: Vec<serde_json::Value> =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("fictitious.json")).unwrap()).unwrap();
    assert_eq!(fict.len(), 3);
}

#[test]
fn explore_is_byte_stable() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        assert!(explore(d.path(), &["--strategy", "iterative", "--order", "shuffled", "--seed", "5"]).status.success());
    }
    for f in ["accepted.imp", "result.cxt", "fictitious.json", "history.jsonl", "ledger.json"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let names: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.len(), 5, "no temporary files left behind");
}

#[test]
fn invalid_expert_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let e1 = std::fs::read_to_string(data("olympics/expert1.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&e1).unwrap();
    v["implications"] = serde_json::json!([{"premise": [], "conclusion": ["≥ 10 events"]}]);
    std::fs::write(&bad, v.to_string()).unwrap();
    let out = coexplore(&[
        "explore",
        "--universe",
        data("olympics/universe.cxt").to_str().unwrap(),
        "--expert",
        bad.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!dir.path().join("o").exists());
}

#[test]
fn oracle_on_a_small_context() {
    let out = coexplore(&["oracle", "--context", data("taekwondo.cxt").to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    // 2^5 premises, 5 conclusions, two tests
    assert_eq!(text.trim(), "1 contexts, 320 checks, 0 mismatches");
    let out = coexplore(&["oracle", "--exhaustive", "9:9"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn convert_round_trips() {
    let full = data("olympics/olympics_full.cxt");
    let out = coexplore(&["convert", full.to_str().unwrap(), "--to", "cxt"]);
    assert!(out.status.success());
    assert_eq!(out.stdout, std::fs::read(&full).unwrap());

    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("full.json");
    assert!(coexplore(&["convert", full.to_str().unwrap(), "--to", "json", "--out", json.to_str().unwrap()])
        .status
        .success());
    let back = coexplore(&["convert", json.to_str().unwrap(), "--to", "cxt"]);
    assert_eq!(back.stdout, std::fs::read(&full).unwrap());

    let formal = coexplore(&["convert", data("taekwondo.cxt").to_str().unwrap(), "--to", "cxt", "--formal"]);
    assert_eq!(formal.status.code(), Some(1));
}

#[test]
fn compare_tabulates_every_strategy() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("c.csv");
    let out = coexplore(&["compare", "--chain", "3:2", "--seeds", "0,1", "--out", csv.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = String::from_utf8(out.stdout).unwrap();
    assert_eq!(table.lines().count(), 1 + 6 * 2);
    let mut r = csv::Reader::from_path(&csv).unwrap();
    let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 12);
    let broadcast = rows.iter().find(|r| &r[0] == "broadcast").unwrap();
    // settling the chain target costs one ask per expert per step
    assert_eq!(&broadcast[9], "6");
    let ignorant = rows.iter().find(|r| &r[0] == "ignorant").unwrap();
    assert_eq!(&ignorant[7], "0");
}
