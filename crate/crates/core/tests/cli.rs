use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_geodiam");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env("RUST_LOG", "off").output().expect("spawn geodiam")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn field(text: &str, key: &str) -> Option<String> {
    text.lines().find_map(|l| {
        let (k, v) = l.split_once(' ')?;
        (k == key).then(|| v.trim().to_string())
    })
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn path_file(dir: &Path) -> String {
    let mut s = String::from("geograph v1 square 5 5 4\n");
    for i in 0..5 {
        s += &format!("{i} {} 0.5\n", i as f64 + 0.5);
    }
    for i in 0..4 {
        s += &format!("{i} {}\n", i + 1);
    }
    write(dir, "p5.txt", &s)
}

#[test]
fn generate_is_deterministic() {
    let args = ["generate", "--n", "300", "--rho", "0.3", "--kind", "torus", "--seed", "9"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("geograph v1 torus "));
    assert!(stderr(&a).contains("n 300 m "));
    let c = run(&["generate", "--n", "300", "--rho", "0.3", "--kind", "torus", "--seed", "10"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn generate_to_file_prints_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.txt");
    let o = run(&["generate", "--n", "200", "--seed", "1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("n 200 m "));
    assert!(std::fs::read_to_string(out).unwrap().starts_with("geograph v1 square "));
}

#[test]
fn invalid_rho_is_a_usage_error() {
    let o = run(&["generate", "--n", "100", "--rho", "0.6"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("rho"));
}

#[test]
fn path_file_has_diameter_four() {
    let dir = tempfile::tempdir().unwrap();
    let f = path_file(dir.path());
    for algo in ["naive", "ifub", "framework"] {
        let o = run(&["diameter", "--input", &f, "--algo", algo]);
        assert!(o.status.success(), "{algo}: {}", stderr(&o));
        assert_eq!(stdout(&o).lines().next(), Some("diameter 4"), "{algo}");
    }
}

#[test]
fn torus_grid_has_diameter_two() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = String::from("geograph v1 torus 3 9 18\n");
    for i in 0..9 {
        s += &format!("{i} {} {}\n", (i % 3) as f64 + 0.5, (i / 3) as f64 + 0.5);
    }
    for i in 0..9 {
        let (x, y) = (i % 3, i / 3);
        s += &format!("{i} {}\n", (x + 1) % 3 + 3 * y);
        s += &format!("{i} {}\n", x + 3 * ((y + 1) % 3));
    }
    let f = write(dir.path(), "t.txt", &s);
    for algo in ["naive", "ifub", "framework"] {
        let o = run(&["diameter", "--input", &f, "--algo", algo]);
        assert_eq!(field(&stdout(&o), "diameter").as_deref(), Some("2"), "{algo}: {}", stderr(&o));
    }
}

#[test]
fn algorithms_agree_on_generated_graphs() {
    for (kind, seed) in [("square", "2"), ("torus", "4")] {
        let base = ["diameter", "--n", "800", "--rho", "0.3", "--kind", kind, "--seed", seed];
        let d: Vec<String> = ["naive", "ifub", "framework"]
            .iter()
            .map(|a| {
                let mut args = base.to_vec();
                args.extend(["--algo", a]);
                let o = run(&args);
                assert!(o.status.success(), "{a}: {}", stderr(&o));
                field(&stdout(&o), "diameter").unwrap()
            })
            .collect();
        assert!(d.iter().all(|x| x == &d[0]), "{kind}: {d:?}");
    }
}

#[test]
fn json_and_csv_formats() {
    let dir = tempfile::tempdir().unwrap();
    let f = path_file(dir.path());
    let o = run(&["diameter", "--input", &f, "--algo", "ifub", "--center", "2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["diameter"], 4);
    assert_eq!(v["fringe_bfs"], 1);
    let o = run(&["diameter", "--input", &f, "--algo", "naive", "--format", "csv"]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("diameter,"));
    assert!(lines.next().unwrap().starts_with("4,"));
}

#[test]
fn disconnected_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "d.txt", "geograph v1 square 4 3 1\n0 0.5 0.5\n1 1.5 0.5\n2 3.5 3.5\n0 1\n");
    let o = run(&["diameter", "--input", &f]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("disconnected"));
}

#[test]
fn missing_file_exits_four() {
    let o = run(&["diameter", "--input", "/nonexistent/graph.txt"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn malformed_file_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "bad.txt", "geograph v1 square 4 2 1\n0 0.5 0.5\n1 1.5 0.5\n0 7\n");
    let o = run(&["diameter", "--input", &f]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn single_decide_timeout_exits_three() {
    let args = ["diameter", "--n", "500", "--seed", "3", "--kind", "torus", "--ell", "1", "--budget-cap", "10"];
    let o = run(&args);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert_eq!(field(&stdout(&o), "outcome").as_deref(), Some("timeout"));
}

#[test]
fn single_decide_reports_outcome() {
    let base = ["diameter", "--n", "500", "--seed", "3", "--kind", "torus"];
    let d = field(&stdout(&run(&base)), "diameter").unwrap();
    let d: u32 = d.parse().unwrap();
    let mut at = base.to_vec();
    let ell = d.to_string();
    at.extend(["--ell", &ell]);
    let o = run(&at);
    assert!(o.status.success());
    assert_eq!(field(&stdout(&o), "outcome").as_deref(), Some("equal_or_greater"));
    assert_eq!(field(&stdout(&o), "diameter"), Some(ell));
    let mut above = base.to_vec();
    let ell = (d + 1).to_string();
    above.extend(["--ell", &ell]);
    assert_eq!(field(&stdout(&run(&above)), "outcome").as_deref(), Some("less"));
}

#[test]
fn framework_budget_cap_exits_three() {
    let o = run(&["diameter", "--n", "500", "--seed", "1", "--budget-cap", "50"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn properties_report() {
    let o = run(&["properties", "--n", "400", "--seed", "2", "--properties", "stretch,3,4", "--pairs", "500"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut r = csv::Reader::from_reader(o.stdout.as_slice());
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header,
        ["schema", "property", "n", "kind", "r", "rho", "seed", "param", "statistic", "value", "verdict"]
    );
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    let lower = rows.iter().find(|r| &r[8] == "lower_violations").unwrap();
    assert_eq!((&lower[9], &lower[10]), ("0.0", "PASS"));
    assert!(rows.iter().any(|r| &r[1] == "3" && &r[8] == "max_separator_ratio"));
    assert!(rows.iter().any(|r| &r[1] == "4" && &r[8] == "root_diameter"));
    assert!(!rows.iter().any(|r| &r[1] == "1"));
}

#[test]
fn unknown_property_is_rejected() {
    let o = run(&["properties", "--n", "100", "--properties", "stretch,7"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn all_pairs_properties_refuse_large_graphs() {
    let o = run(&["properties", "--n", "3001", "--properties", "1"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn list_flags_only_for_bench() {
    let o = run(&["diameter", "--n", "100,200"]);
    assert_eq!(o.status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let f = path_file(dir.path());
    let o = run(&["diameter", "--input", &f, "--n", "100"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "n = [250]\nseed = [7]\nkind = [\"torus\"]\n");
    let o = run(&["diameter", "--config", &cfg, "--seed", "3", "--dump-config"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let t: toml::Value = toml::from_str(&stdout(&o)).unwrap();
    assert_eq!(t["n"].as_array().unwrap()[0].as_integer(), Some(250));
    assert_eq!(t["seed"].as_array().unwrap()[0].as_integer(), Some(3));
    assert_eq!(t["kind"].as_array().unwrap()[0].as_str(), Some("torus"));
    assert_eq!(t["rho"].as_array().unwrap()[0].as_float(), Some(0.3));

    let bad = write(dir.path(), "bad.toml", "nn = [1]\n");
    assert_eq!(run(&["diameter", "--config", &bad]).status.code(), Some(4));
}

#[test]
fn bench_rows_are_deterministic() {
    let args = ["bench", "--n", "200,300", "--rho", "0.3", "--seed", "0,1", "--algo", "framework,ifub,naive"];
    let a = run(&args);
    assert!(a.status.success(), "{}", stderr(&a));
    let parse = |o: &Output| {
        let mut r = csv::Reader::from_reader(o.stdout.as_slice());
        let h = r.headers().unwrap().clone();
        let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
        (h, rows)
    };
    let (h, rows) = parse(&a);
    assert_eq!(rows.len(), 12);
    let col = |name: &str| h.iter().position(|c| c == name).unwrap();
    let (status, diam, work, wall) = (col("status"), col("diameter"), col("work"), col("wall_ms"));
    let (_, again) = parse(&run(&args));
    for (x, y) in rows.iter().zip(&again) {
        for (i, (a, b)) in x.iter().zip(y.iter()).enumerate() {
            if i != wall {
                assert_eq!(a, b, "column {}", &h[i]);
            }
        }
    }
    for cell in rows.chunks(3) {
        if &cell[0][status] == "ok" {
            assert!(cell.iter().all(|r| r[diam] == cell[0][diam]));
            assert!(cell.iter().all(|r| r[work].parse::<u64>().unwrap() > 0));
        }
    }
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
}
