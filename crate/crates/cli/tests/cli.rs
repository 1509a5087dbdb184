use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use fsa_core::{MatPath, Report};

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn fsa(args: &[&str]) -> Run {
    fsa_env(args, &[])
}

fn fsa_env(args: &[&str], env: &[(&str, &str)]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_fsa"))
        .args(args)
        .envs(env.iter().copied())
        .output()
        .expect("run fsa");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn gen(dir: &Path, name: &str, args: &[&str]) -> PathBuf {
    let out = dir.join(name);
    let mut all = vec!["gen"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["--out", p(&out)]);
    let r = fsa(&all);
    assert_eq!(r.code, 0, "gen failed: {}", r.stderr);
    out
}

#[test]
fn gen_scalar_line() {
    let dir = tempfile::tempdir().unwrap();
    let f = gen(dir.path(), "x.json", &["scalar-line", "--m", "8"]);
    let x = MatPath::from_json(&fs::read_to_string(f).unwrap()).unwrap();
    assert_eq!((x.n(), x.m()), (1, 8));
    for j in 0..=8 {
        let want = 0.99 * (2.0 * j as f64 / 8.0 - 1.0);
        assert!((x.node(j).get(0, 0).re - want).abs() < 1e-15);
    }
}

#[test]
fn gen_constant_and_random() {
    let dir = tempfile::tempdir().unwrap();
    let f = gen(dir.path(), "c.json", &["constant-diag(-0.4, 0.3)", "--m", "4"]);
    let x = MatPath::from_json(&fs::read_to_string(f).unwrap()).unwrap();
    assert!(x.nodes().iter().all(|h| h == x.node(0)));

    let args = ["random", "--n", "3", "--q", "2", "--seed", "42"];
    let a = fs::read(gen(dir.path(), "a.json", &args)).unwrap();
    let b = fs::read(gen(dir.path(), "b.json", &args)).unwrap();
    assert_eq!(a, b);

    let r = fsa(&["gen", "spiral"]);
    assert_eq!(r.code, 2);
}

#[test]
fn approx_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = d.join("r.json");

    let x = gen(d, "c.json", &["constant-diag(-0.4,0.3)"]);
    assert_eq!(fsa(&["approx", p(&x), "--eps", "0.5", "--out", p(&out)]).code, 0);
    assert!(matches!(
        Report::from_json(&fs::read_to_string(&out).unwrap()).unwrap(),
        Report::Approximant(_)
    ));

    let x = gen(d, "s.json", &["scalar-line"]);
    assert_eq!(fsa(&["approx", p(&x), "--eps", "0.5", "--out", p(&out)]).code, 3);
    assert!(matches!(
        Report::from_json(&fs::read_to_string(&out).unwrap()).unwrap(),
        Report::Obstruction(_)
    ));

    let big = d.join("big.json");
    let scaled = MatPath::from_json(&fs::read_to_string(&x).unwrap())
        .unwrap()
        .scalar_mul(1.2 / 0.99);
    fs::write(&big, scaled.to_json()).unwrap();
    assert_eq!(fsa(&["approx", p(&big), "--eps", "0.5"]).code, 2);
    assert_eq!(fsa(&["approx", p(&x), "--eps", "2"]).code, 2);

    // Fast random path: the per-segment enclosures are too coarse.
    let x = gen(d, "r.json", &["random", "--n", "2", "--seed", "0"]);
    assert_eq!(fsa(&["approx", p(&x), "--eps", "0.25", "--out", p(&out)]).code, 4);

    assert_eq!(fsa(&["approx", p(&d.join("missing.json")), "--eps", "0.5"]).code, 1);
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let x = gen(d, "c.json", &["constant-diag(-0.4,0.3)"]);
    let out = d.join("r.json");
    assert_eq!(fsa(&["approx", p(&x), "--eps", "0.5", "--out", p(&out)]).code, 0);
    let r = fsa(&["verify", p(&x), p(&out)]);
    assert_eq!(r.code, 0, "{}", r.stdout);

    let text = fs::read_to_string(&out).unwrap();
    let tampered = text.replacen("\"epsilon\": 0.5", "\"epsilon\": 0.55", 1);
    assert_ne!(tampered, text);
    let bad = d.join("bad.json");
    fs::write(&bad, tampered).unwrap();
    let r = fsa(&["verify", p(&x), p(&bad)]);
    assert_eq!(r.code, 5);
    assert!(r.stdout.contains("FAILED partition size matches epsilon"), "{}", r.stdout);

    let other = gen(d, "o.json", &["constant-diag(-0.4,0.31)"]);
    assert_eq!(fsa(&["verify", p(&other), p(&out)]).code, 6);

    let s = gen(d, "s.json", &["scalar-line"]);
    assert_eq!(fsa(&["approx", p(&s), "--eps", "0.5", "--out", p(&out)]).code, 3);
    assert_eq!(fsa(&["verify", p(&s), p(&out)]).code, 0);
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn bands_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    let x = gen(d, "s.json", &["scalar-line", "--m", "4"]);
    let (h, rows) = csv_rows(&fsa(&["bands", p(&x)]).stdout);
    assert_eq!(h, ["s", "lambda_1"]);
    assert_eq!(rows.len(), 5);
    for (j, r) in rows.iter().enumerate() {
        assert_eq!(r[0], j as f64 / 4.0);
        assert!((r[1] - 0.99 * (2.0 * j as f64 / 4.0 - 1.0)).abs() < 1e-15);
    }

    let x = gen(d, "a.json", &["avoided-crossing(0.3)", "--m", "64"]);
    let out = d.join("bands.csv");
    assert_eq!(fsa(&["bands", p(&x), "--out", p(&out)]).code, 0);
    let (h, rows) = csv_rows(&fs::read_to_string(&out).unwrap());
    assert_eq!(h, ["s", "lambda_1", "lambda_2"]);
    let upper_min = rows.iter().map(|r| r[2]).fold(f64::INFINITY, f64::min);
    assert!((upper_min - 0.27).abs() < 1e-12);

    let x = gen(d, "c.json", &["constant-diag(0.5,-0.2)", "--m", "3"]);
    let (_, rows) = csv_rows(&fsa(&["bands", p(&x)]).stdout);
    assert!(rows.iter().all(|r| r[1] == -0.2 && r[2] == 0.5));

    // 17 significant digits
    let text = fsa(&["bands", p(&x)]).stdout;
    let field = text.lines().nth(1).unwrap().split(',').nth(1).unwrap();
    let mantissa = field.split('e').next().unwrap().trim_start_matches('-');
    assert_eq!(mantissa.replace('.', "").len(), 17);
}

#[test]
fn reports_are_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let x = gen(d, "c.json", &["constant-diag(-0.4,0.3)", "--m", "32"]);
    let mut outputs = Vec::new();
    for threads in ["1", "4", "0"] {
        let out = d.join(format!("r{threads}.json"));
        let r = fsa_env(
            &["approx", p(&x), "--eps", "0.25", "--out", p(&out)],
            &[("FSA_THREADS", threads)],
        );
        assert_eq!(r.code, 0);
        outputs.push(fs::read(out).unwrap());
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn no_matrices_drops_projections() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let x = gen(d, "c.json", &["constant-diag(-0.4,0.3)", "--m", "4"]);
    let full = d.join("full.json");
    let lean = d.join("lean.json");
    assert_eq!(fsa(&["approx", p(&x), "--eps", "0.5", "--out", p(&full)]).code, 0);
    assert_eq!(
        fsa(&["approx", p(&x), "--eps", "0.5", "--out", p(&lean), "--no-matrices"]).code,
        0
    );
    let full: serde_json::Value = serde_json::from_str(&fs::read_to_string(full).unwrap()).unwrap();
    let lean_text = fs::read_to_string(&lean).unwrap();
    let lean_json: serde_json::Value = serde_json::from_str(&lean_text).unwrap();
    assert!(full.get("projections").is_some());
    assert!(lean_json.get("projections").is_none());
    assert_eq!(fsa(&["verify", p(&x), p(&lean)]).code, 0);
}
