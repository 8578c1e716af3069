use std::path::Path;
use std::process::{Command, Output};

fn bmlab(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bmlab"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn classify_one_tuple() {
    let dir = tempfile::tempdir().unwrap();
    let args = "classify --d 1 --s 0.7 --u 1 --p 0.5 --q 2 --v 1 --N 2";
    let o = bmlab(dir.path(), &args.split(' ').collect::<Vec<_>>());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("open open-ii"), "{}", stdout(&o));
    let table = std::fs::read_to_string(dir.path().join("00-classify.csv")).unwrap();
    assert!(table.starts_with("d,s,u,p,q,v,a,N,verdict,tag,matching,citation\n"));
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn partial_tuple_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = bmlab(dir.path(), &["classify", "--d", "1", "--s", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("needs all of"));
}

#[test]
fn empty_report_writes_manifest_only() {
    let dir = tempfile::tempdir().unwrap();
    let o = bmlab(dir.path(), &["report"]);
    assert_eq!(o.status.code(), Some(0));
    let names: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    assert_eq!(names, vec![std::ffi::OsString::from("manifest.json")]);
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("lab.toml");
    std::fs::write(&cfg, "seed = 3\nsurprise = true\n").unwrap();
    let o = bmlab(&dir.path().join("out"), &["--config", cfg.to_str().unwrap(), "report"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn config_report_runs_every_section() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("lab.toml");
    std::fs::write(
        &cfg,
        r#"seed = 9

[[classify]]
d = 1
s = 1.5
u = 2.0
p = 1.5
q = 2.0
v = 2.0
a = 1.0
N = 2

[[divergence]]
scenario = "control"
"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = bmlab(&out, &["--config", cfg.to_str().unwrap(), "report"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest: String = std::fs::read_to_string(out.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"seed\": 9"));
    assert!(out.join("00-classify.csv").exists());
    assert!(out.join("01-divergence-control.csv").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let o = bmlab(dir.path(), &["--seed", "4", "equivalence", "--count", "3"]);
        assert_eq!(o.status.code(), Some(0));
    }
    let mut names: Vec<_> = std::fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 3);
    for n in names {
        assert_eq!(
            std::fs::read(a.path().join(&n)).unwrap(),
            std::fs::read(b.path().join(&n)).unwrap()
        );
    }
}

#[test]
fn json_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = bmlab(
        dir.path(),
        &["--format", "json", "divergence", "--scenario", "exp-bump"],
    );
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("00-divergence-exp-bump.json")).unwrap();
    assert!(text.contains("\"kind\": \"divergence\""));
    assert!(dir.path().join("00-divergence-exp-bump.partials.series.csv").exists());
}
