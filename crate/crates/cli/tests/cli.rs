use std::path::Path;
use std::process::{Command, Output};

use hsblab::DynSlackMatrix;
use serde_json::Value;
use tempfile::TempDir;

fn hsblab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hsblab"))
        .current_dir(dir)
        .env_remove("HSBLAB_CACHE_DIR")
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(dir: &Path, args: &[&str]) -> Value {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let out = hsblab(dir, &all);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn number(v: &Value) -> f64 {
    match v {
        Value::Number(n) => n.as_f64().unwrap(),
        Value::String(s) => {
            let (p, q) = s.split_once('/').unwrap_or((s, "1"));
            p.parse::<f64>().unwrap() / q.parse::<f64>().unwrap()
        }
        other => panic!("not a number: {other}"),
    }
}

#[test]
fn zoo_examples() {
    let dir = TempDir::new().unwrap();
    let p3 = json(dir.path(), &["zoo", "permutahedron:n=3", "-o", "p3.json"]);
    assert_eq!(
        (p3["rows"].as_u64(), p3["cols"].as_u64()),
        (Some(6), Some(6))
    );
    assert_eq!(number(&p3["norm"]), 2.0);
    let s = json(dir.path(), &["zoo", "simplex:n=2,lambda=2", "-o", "s.json"]);
    assert_eq!((s["rows"].as_u64(), number(&s["norm"])), (Some(3), 2.0));
    let k4 = json(dir.path(), &["zoo", "sptree:graph=K4", "-o", "k4.json"]);
    assert_eq!(
        (k4["rows"].as_u64(), k4["cols"].as_u64()),
        (Some(20), Some(16))
    );

    let out = hsblab(dir.path(), &["zoo", "cube:n=3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn zoo_files_round_trip() {
    let dir = TempDir::new().unwrap();
    for mode in ["rational", "float"] {
        let name = format!("k4-{mode}.json");
        json(
            dir.path(),
            &["--mode", mode, "zoo", "sptree:graph=K4", "-o", &name],
        );
        let text = std::fs::read_to_string(dir.path().join(&name)).unwrap();
        let back = DynSlackMatrix::from_json(&text).unwrap();
        assert_eq!(back.mode().to_string(), mode);
        assert_eq!(back.to_json(), text);
    }
}

#[test]
fn hsb_examples() {
    let dir = TempDir::new().unwrap();
    let r = json(dir.path(), &["hsb", "simplex:n=3"]);
    assert!((number(&r["value"]) - 4.0).abs() <= 1e-6);
    let r = json(dir.path(), &["hsb", "permutahedron:n=4"]);
    assert!(number(&r["value"]) <= 4.0 + 1e-6);
    assert_eq!(r["status"], "optimal");

    let ones = r#"{"rows":5,"cols":7,"mode":"rational","data":[[1,1,1,1,1,1,1],[1,1,1,1,1,1,1],[1,1,1,1,1,1,1],[1,1,1,1,1,1,1],[1,1,1,1,1,1,1]]}"#;
    std::fs::write(dir.path().join("ones.json"), ones).unwrap();
    let r = json(dir.path(), &["hsb", "ones.json"]);
    assert!((number(&r["value"]) - 1.0).abs() <= 1e-6);

    std::fs::write(
        dir.path().join("zero.json"),
        r#"{"rows":1,"cols":2,"mode":"float","data":[[0,0]]}"#,
    )
    .unwrap();
    let out = hsblab(dir.path(), &["hsb", "zero.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not identically zero"));
}

#[test]
fn rational_mode_is_exact() {
    let dir = TempDir::new().unwrap();
    let r = json(
        dir.path(),
        &["--mode", "rational", "hsb", "simplex:n=4,lambda=3/2"],
    );
    assert_eq!(r["value"], "11/3");
    assert_eq!(r["gap"], "0");
}

#[test]
fn time_limit_exits_three() {
    let dir = TempDir::new().unwrap();
    let out = hsblab(
        dir.path(),
        &["hsb", "permutahedron:n=5", "--time-limit", "0"],
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("time limit"));
}

#[test]
fn transform_then_hsb() {
    let dir = TempDir::new().unwrap();
    json(dir.path(), &["zoo", "simplex:n=3,lambda=2", "-o", "s.json"]);
    let t = json(
        dir.path(),
        &["transform", "s.json", "--normalize-rows", "-o", "n.json"],
    );
    assert_eq!(number(&t["lower_factor"]), 1.0);
    let text = std::fs::read_to_string(dir.path().join("n.json")).unwrap();
    let normalized = DynSlackMatrix::from_json(&text)
        .unwrap()
        .to_rational()
        .matrix;
    assert_eq!(normalized, hsblab::Matrix::identity(4).unwrap());
    let r = json(dir.path(), &["--mode", "rational", "hsb", "n.json"]);
    assert_eq!(r["value"], "4");

    let t = json(
        dir.path(),
        &[
            "transform",
            "s.json",
            "--scale-cols",
            "1,2,1/2,3",
            "--add-row",
            "1/4,1/4,0,0",
            "--solve",
        ],
    );
    assert_eq!(t["bracket_holds"], true);
    let out = hsblab(dir.path(), &["transform", "s.json", "--add-row", "2,2,2,2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_certificates() {
    let dir = TempDir::new().unwrap();
    json(dir.path(), &["zoo", "hypercube:n=3", "-o", "c.json"]);
    json(dir.path(), &["hsb", "c.json", "--cert-out", "cert.json"]);
    let v = json(dir.path(), &["verify", "c.json", "cert.json"]);
    assert_eq!(v["pass"], true);
    assert_eq!(v["within_tol"], true);

    json(
        dir.path(),
        &[
            "zoo",
            "permutahedron:n=3",
            "-o",
            "p.json",
            "--decomposition-out",
            "dec.json",
        ],
    );
    let v = json(
        dir.path(),
        &["--mode", "rational", "verify", "p.json", "dec.json"],
    );
    assert_eq!(v["upper"], "3");

    let mut cert: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("cert.json")).unwrap())
            .unwrap();
    cert["dual"].as_array_mut().unwrap().pop();
    std::fs::write(dir.path().join("bad.json"), cert.to_string()).unwrap();
    let out = hsblab(dir.path(), &["verify", "c.json", "bad.json"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("residual"));
}

#[test]
fn rho_and_bounds() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("x.txt"), "1 -2 3\n-1 4 -5\n2 2 -1\n").unwrap();
    let r = json(dir.path(), &["--mode", "rational", "rho", "x.txt"]);
    assert_eq!(r["value"], "7");
    assert_eq!(r["exact"], true);
    let b = json(dir.path(), &["bounds", "sptree:graph=K4"]);
    assert_eq!(
        (b["rc_lower"].as_u64(), b["rc_exact"].as_bool()),
        (Some(12), Some(true))
    );
}

#[test]
fn cache_dir_memoizes_zoo_matrices() {
    let dir = TempDir::new().unwrap();
    let cache = dir.path().join("cache");
    let run = |out: &str| {
        let status = Command::new(env!("CARGO_BIN_EXE_hsblab"))
            .current_dir(dir.path())
            .env("HSBLAB_CACHE_DIR", &cache)
            .args(["zoo", "hypercube:n=3", "-o", out])
            .stdout(std::process::Stdio::null())
            .status()
            .unwrap();
        assert!(status.success());
    };
    run("a.json");
    assert_eq!(std::fs::read_dir(&cache).unwrap().count(), 1);
    run("b.json");
    let read = |f: &str| std::fs::read_to_string(dir.path().join(f)).unwrap();
    assert_eq!(read("a.json"), read("b.json"));
}

#[test]
fn quick_paper_suite() {
    let dir = TempDir::new().unwrap();
    let out = hsblab(
        dir.path(),
        &["paper-suite", "--sizes", "quick", "--out-dir", "out"],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for table in ["simplex", "hypercube", "scaling", "zonotope", "sptree"] {
        let text =
            std::fs::read_to_string(dir.path().join("out").join(format!("{table}.csv"))).unwrap();
        let header = text.lines().next().unwrap();
        assert!(header
            .starts_with("family,params,m,n,norm,hsb,gap,dual_terms,rc_bound,real_rank,wall_ms,"));
        assert!(header.ends_with(",pass"));
        assert!(
            text.lines().skip(1).all(|l| l.ends_with(",true")),
            "{table}"
        );
    }
    let zonotope = std::fs::read_to_string(dir.path().join("out/zonotope.csv")).unwrap();
    assert!(zonotope.lines().next().unwrap().contains("dual_bound"));
}
