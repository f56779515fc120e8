use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_copulascope"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn run(args: &[&str]) -> Run {
    run_env(args, &[])
}

fn ok(args: &[&str]) -> String {
    let r = run(args);
    assert_eq!(r.code, 0, "args {args:?}: {}", r.stderr);
    r.stdout
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&ok(args)).unwrap()
}

fn write(dir: &TempDir, name: &str, contents: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn line_csv(dir: &TempDir, name: &str, n: usize, increasing: bool) -> PathBuf {
    let mut text = String::from("a,b\n");
    for k in 0..n {
        let x = k as f64 * 0.5 - 3.0;
        let y = if increasing {
            x * x * x
        } else {
            -2.0 * x + 1.0
        };
        text.push_str(&format!("{x},{y}\n"));
    }
    write(dir, name, &text)
}

#[test]
fn pseudo_on_small_fixture() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "p.csv", "x,y\n2.0,10\n1.0,30\n3.0,20\n");
    let out = ok(&["pseudo", "-i", s(&f)]);
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows[0], "u,v");
    let third = 1.0f64 / 3.0;
    let parse = |r: &str| -> (f64, f64) {
        let (a, b) = r.split_once(',').unwrap();
        (a.parse().unwrap(), b.parse().unwrap())
    };
    assert_eq!(parse(rows[1]), (2.0 / 3.0, third));
    assert_eq!(parse(rows[2]), (third, 1.0));
    assert_eq!(parse(rows[3]), (1.0, 2.0 / 3.0));
}

#[test]
fn pseudo_is_rank_invariant() {
    let dir = TempDir::new().unwrap();
    let xs = [0.3, -1.2, 2.5, 0.9, -0.4];
    let ys = [1.0, 0.2, -0.7, 3.3, 0.0];
    let mut plain = String::from("x,y\n");
    let mut moved = String::from("x,y\n");
    for (x, y) in xs.iter().zip(&ys) {
        plain.push_str(&format!("{x},{y}\n"));
        moved.push_str(&format!("{},{y}\n", f64::exp(*x)));
    }
    let a = write(&dir, "a.csv", &plain);
    let b = write(&dir, "b.csv", &moved);
    assert_eq!(ok(&["pseudo", "-i", s(&a)]), ok(&["pseudo", "-i", s(&b)]));
}

#[test]
fn missing_column_names_it() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "p.csv", "x,y\n1,2\n2,3\n");
    let r = run(&["pseudo", "-i", s(&f), "-y", "height"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("height"));
    assert!(r.stdout.is_empty());
    assert_eq!(run(&["pseudo", "-i", "/no/such/file.csv"]).code, 2);
}

#[test]
fn dropped_rows_are_reported() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "p.csv", "x,y\n1,2\n2,\n3,4\nNA,1\n5,7\n");
    let r = run(&["pseudo", "-i", s(&f)]);
    assert_eq!(r.code, 0);
    assert!(r.stderr.contains("dropped 2 rows"));
    assert_eq!(r.stdout.lines().count(), 4);
}

#[test]
fn measures_monotone_fixtures() {
    let dir = TempDir::new().unwrap();
    let co = line_csv(&dir, "co.csv", 30, true);
    let v = json(&["measures", "-i", s(&co)]);
    assert_eq!(v["rho_n"], 1.0);
    assert_eq!(v["sigma_n"], 1.0);
    assert_eq!(v["quadrant"], "pqd_consistent");
    assert_eq!(v["lp"][0]["delta"], v["sigma_n"]);

    let counter = line_csv(&dir, "counter.csv", 30, false);
    let v = json(&["measures", "-i", s(&counter), "-x", "a", "-y", "b"]);
    assert_eq!(v["rho_n"], -1.0);
    assert_eq!(v["sigma_n"], 1.0);
    assert_eq!(v["quadrant"], "nqd_consistent");
    assert_eq!(v["pearson_r"].as_f64().unwrap(), -1.0);

    assert_eq!(run(&["measures", "-i", s(&co), "--p", "0.5"]).code, 2);
}

#[test]
fn measures_on_independent_preset() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("ind.csv");
    ok(&[
        "synth",
        "--preset",
        "independent_uniform",
        "-n",
        "1000",
        "--seed",
        "7",
        "-o",
        s(&f),
    ]);
    let v = json(&["measures", "-i", s(&f)]);
    assert!(v["sigma_n"].as_f64().unwrap() < 0.1);
}

#[test]
fn synth_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        ok(&[
            "synth",
            "--copula",
            "gaussian:0.6",
            "--x-marginal",
            "normal:0,1",
            "--y-marginal",
            "mixture:0.5,-3,1;0.5,3,1",
            "-n",
            "200",
            "--seed",
            "3",
            "-o",
            s(p),
        ]);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let text = std::fs::read_to_string(&a).unwrap();
    assert!(text.starts_with("x,y\n"));
    assert_eq!(text.lines().count(), 201);
}

#[test]
fn synth_countermonotone_line() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("line.csv");
    ok(&[
        "synth",
        "--preset",
        "countermonotone_line",
        "-n",
        "100",
        "--seed",
        "1",
        "-o",
        s(&f),
    ]);
    let v = json(&["measures", "-i", s(&f)]);
    assert_eq!(v["rho_n"], -1.0);
}

#[test]
fn synth_simpson_is_positive() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("simpson.csv");
    ok(&[
        "synth",
        "--preset",
        "simpson_clusters",
        "-n",
        "1000",
        "--seed",
        "4",
        "-o",
        s(&f),
    ]);
    let v = json(&["measures", "-i", s(&f)]);
    assert!(v["rho_n"].as_f64().unwrap() > 0.5);
}

#[test]
fn synth_errors() {
    let r = run(&["synth", "--preset", "spiral", "-n", "10"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("spiral"));
    assert_eq!(
        run(&["synth", "--copula", "gaussian:1.2", "-n", "10"]).code,
        2
    );
    assert_eq!(
        run(&[
            "synth",
            "--copula",
            "gaussian:0.2",
            "--x-marginal",
            "normal:0,-1",
            "-n",
            "10"
        ])
        .code,
        2
    );
    assert_eq!(
        run(&[
            "synth",
            "--preset",
            "weak_mixed",
            "--copula",
            "independent",
            "-n",
            "10"
        ])
        .code,
        2
    );
}

#[test]
fn matrix_matches_measures() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("g.csv");
    ok(&[
        "synth",
        "--copula",
        "gaussian:0.4",
        "-n",
        "150",
        "--seed",
        "2",
        "-o",
        s(&f),
    ]);
    let single = json(&["measures", "-i", s(&f)]);
    let m = json(&["matrix", "-i", s(&f)]);
    assert_eq!(m["columns"], serde_json::json!(["x", "y"]));
    assert_eq!(m["rho_n"][0][1], single["rho_n"]);
    assert_eq!(m["sigma_n"][1][0], single["sigma_n"]);
    assert_eq!(m["rho_n"][0][0], 1.0);
    assert_eq!(m["sigma_n"][1][1], 1.0);
}

#[test]
fn matrix_is_symmetric_under_threads() {
    let dir = TempDir::new().unwrap();
    let mut text = String::from("a,b,c,d\n");
    let mut state = 12345u64;
    let mut next = || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    for _ in 0..80 {
        let (a, b, c) = (next(), next(), next());
        text.push_str(&format!("{a},{},{c},{}\n", a + 0.3 * b, c * c - a));
    }
    let f = write(&dir, "four.csv", &text);
    let one = run_env(&["matrix", "-i", s(&f)], &[("COPULASCOPE_THREADS", "1")]);
    let four = run_env(&["matrix", "-i", s(&f)], &[("COPULASCOPE_THREADS", "4")]);
    assert_eq!(one.code, 0);
    assert_eq!(one.stdout, four.stdout);
    let m: Value = serde_json::from_str(&one.stdout).unwrap();
    for key in ["rho_n", "sigma_n"] {
        for i in 0..4 {
            for j in 0..4 {
                let (a, b) = (
                    m[key][i][j].as_f64().unwrap(),
                    m[key][j][i].as_f64().unwrap(),
                );
                assert!((a - b).abs() <= 1e-12);
            }
        }
    }
    let csv = ok(&["matrix", "-i", s(&f), "--format", "csv", "--columns", "a,c"]);
    assert_eq!(csv.lines().count(), 5);
    assert_eq!(
        run_env(&["matrix", "-i", s(&f)], &[("COPULASCOPE_THREADS", "zero")]).code,
        2
    );
    assert_eq!(run(&["matrix", "-i", s(&f), "--columns", "a"]).code, 2);
}

#[test]
fn heatmap_outputs() {
    let dir = TempDir::new().unwrap();
    let co = line_csv(&dir, "co.csv", 12, true);
    let (svg, csv) = (dir.path().join("h.svg"), dir.path().join("h.csv"));
    let v = json(&[
        "heatmap",
        "-i",
        s(&co),
        "--kind",
        "normalized",
        "--svg",
        s(&svg),
        "--csv",
        s(&csv),
    ]);
    assert_eq!(v["m"], 12);
    assert_eq!(v["min"], 1.0);
    assert_eq!(v["max"], 1.0);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 11);
    assert!(text.lines().all(|l| l.split(',').all(|c| c == "1")));
    let doc = std::fs::read_to_string(&svg).unwrap();
    let d = roxmltree::Document::parse(&doc).unwrap();
    let cells = d
        .descendants()
        .filter(|n| n.attribute("class") == Some("cell"))
        .count();
    assert_eq!(cells, 121);

    let v = json(&["heatmap", "-i", s(&co), "--kind", "sigma", "--m", "5"]);
    assert_eq!(v["range"], serde_json::json!([0.0, 3.0]));
    assert!(v["min"].as_f64().unwrap() >= 0.0 && v["max"].as_f64().unwrap() <= 3.0);

    let r = run(&["heatmap", "-i", s(&co), "--m", "13"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("m=13"));
}

fn strokes_and_fills(doc: &str) -> Vec<String> {
    let d = roxmltree::Document::parse(doc).unwrap();
    d.descendants()
        .filter(|n| n.has_tag_name("circle") || n.has_tag_name("line"))
        .map(|n| {
            n.attribute("fill")
                .or(n.attribute("stroke"))
                .unwrap()
                .to_string()
        })
        .collect()
}

#[test]
fn colorize_countermonotone_parallel() {
    let dir = TempDir::new().unwrap();
    let counter = line_csv(&dir, "counter.csv", 25, false);
    let doc = ok(&["colorize", "-i", s(&counter), "--plot-kind", "parallel"]);
    let colors = strokes_and_fills(&doc);
    assert_eq!(colors.len(), 25);
    assert!(colors.iter().all(|c| c == "#053061"));
    assert_eq!(
        doc,
        ok(&["colorize", "-i", s(&counter), "--plot-kind", "parallel"])
    );
}

#[test]
fn colorize_independent_is_pale() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("ind.csv");
    ok(&[
        "synth",
        "--preset",
        "independent_uniform",
        "-n",
        "1000",
        "--seed",
        "7",
        "-o",
        s(&f),
    ]);
    let doc = ok(&[
        "colorize",
        "-i",
        s(&f),
        "--plot-kind",
        "scatter",
        "--kind",
        "rho",
    ]);
    let colors = strokes_and_fills(&doc);
    assert_eq!(colors.len(), 1000);
    // channel sum of a pale color stays close to white's 765
    let pale = colors
        .iter()
        .filter(|c| {
            let v = u32::from_str_radix(&c[1..], 16).unwrap();
            (v >> 16) + ((v >> 8) & 255) + (v & 255) > 600
        })
        .count();
    assert!(pale >= 950, "only {pale} pale points");
}

#[test]
fn signtest_table_one_fixture() {
    let dir = TempDir::new().unwrap();
    let mut text = String::from("s,t\n");
    for k in 0..12 {
        text.push_str(if k < 9 { "0.8,0.3\n" } else { "0.2,0.6\n" });
    }
    let f = write(&dir, "st.csv", &text);
    let v = json(&["signtest", "-i", s(&f), "--gamma", "0.9"]);
    assert_eq!(v["m"], 12);
    assert_eq!(v["sum_z"], 9);
    assert!((v["theta_hat"].as_f64().unwrap() - 0.73).abs() < 0.01);
    assert!((v["interval"][0].as_f64().unwrap() - 0.55).abs() < 0.01);
    assert!((v["interval"][1].as_f64().unwrap() - 0.92).abs() < 0.01);
    assert_eq!(v["significant"], true);
    let table = ok(&["signtest", "-i", s(&f), "--format", "table"]);
    assert!(table
        .lines()
        .nth(1)
        .unwrap()
        .ends_with("0.55\t0.73\t0.92\tYes"));
}

#[test]
fn signtest_all_ties_and_bad_gamma() {
    let dir = TempDir::new().unwrap();
    let f = write(
        &dir,
        "ties.csv",
        &"s,t\n"
            .chars()
            .chain("0.5,0.5\n".repeat(12).chars())
            .collect::<String>(),
    );
    let v = json(&["signtest", "-i", s(&f)]);
    assert_eq!(v["sum_z"], 0);
    assert!((v["theta_hat"].as_f64().unwrap() - 0.5 / 13.0).abs() < 1e-15);
    assert_eq!(run(&["signtest", "-i", s(&f), "--gamma", "1.5"]).code, 2);
    let bad = write(&dir, "bad.csv", "s,t\n1.5,0.2\n");
    assert_eq!(run(&["signtest", "-i", s(&bad)]).code, 2);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&[]).code, 2);
    assert_eq!(run(&["frobnicate"]).code, 2);
    assert_eq!(run(&["measures"]).code, 2);
}
