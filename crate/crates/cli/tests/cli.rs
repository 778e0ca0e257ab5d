use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn whtrim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_whtrim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn whtrim_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_whtrim"))
        .args(args)
        .env(key, value)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.records()
        .map(|rec| rec.unwrap().iter().map(str::to_owned).collect())
        .collect()
}

fn gen_pair(dir: &Path, name: &str, extra: &[&str]) -> String {
    let path = dir.join(name);
    let p = path.to_str().unwrap().to_owned();
    let mut args = vec!["gen", "--out", &p];
    args.extend_from_slice(extra);
    let o = whtrim(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    p
}

#[test]
fn build_prints_state_counts() {
    let o = whtrim(&["build", "--m", "2", "--k", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().any(|l| l == "states=10"));

    let o = whtrim(&["build", "--m", "2", "--k", "300", "--c", "260"]);
    assert!(stdout(&o).lines().any(|l| l == "states=635"));
}

#[test]
fn build_c1_equals_isomorphic() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.csv");
    let h = dir.path().join("h.csv");
    let o = whtrim(&["build", "--m", "2", "--k", "5", "--c", "1", "--out", t.to_str().unwrap()]);
    assert!(o.status.success());
    let o = whtrim(&["build", "--m", "2", "--k", "5", "--kind", "isomorphic", "--out", h.to_str().unwrap()]);
    assert!(o.status.success());
    let (tt, ht) = (fs::read_to_string(&t).unwrap(), fs::read_to_string(&h).unwrap());
    assert_eq!(tt, ht);
    assert!(tt.starts_with("src,symbol,dst\n"));
    assert!(!tt.contains('\r'));
    let labels = fs::read_to_string(dir.path().join("h.labels.csv")).unwrap();
    assert!(labels.starts_with("index,label\n0,\"0,0\"\n"));
}

#[test]
fn build_dot_and_minimal_labels() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("a.dot");
    let o = whtrim(&["build", "--m", "2", "--k", "5", "--format", "dot", "--out", dot.to_str().unwrap()]);
    assert!(o.status.success());
    let text = fs::read_to_string(&dot).unwrap();
    assert!(text.starts_with("digraph \"anymiss:2:5\""));
    assert!(text.contains("0 [label=\"**111\"];"));
    assert_eq!(text.matches("->").count(), 14 + 1);
}

#[test]
fn build_input_and_budget_errors() {
    assert_eq!(whtrim(&["build", "--m", "5", "--k", "5"]).status.code(), Some(2));
    assert_eq!(whtrim(&["build", "--m", "2", "--k", "5", "--c", "4"]).status.code(), Some(2));
    let o = whtrim_env(&["build", "--m", "3", "--k", "300"], "WHTRIM_STATE_BUDGET", "1000");
    assert_eq!(o.status.code(), Some(3));
    let o = whtrim_env(&["build", "--m", "2", "--k", "5"], "WHTRIM_STATE_BUDGET", "lots");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn stats_rows_match_closed_form_and_build() {
    let o = whtrim(&["stats", "--m", "2", "--k", "300", "--c-min", "100", "--c-max", "300"]);
    assert_eq!(o.status.code(), Some(2));

    let o = whtrim(&["stats", "--m", "2", "--k", "300", "--c-min", "100", "--c-max", "298"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("c,states\n"));
    assert!(text.lines().any(|l| l == "260,635"));
    assert!(text.lines().any(|l| l == "298,597"));
    let o = whtrim(&["stats", "--m", "2", "--k", "50", "--c-min", "45", "--c-max", "45"]);
    assert_eq!(stdout(&o), "c,states\n45,100\n");

    let rows = csv_rows(&stdout(&whtrim(&["stats", "--m", "3", "--k", "9"])));
    for row in rows {
        let built = whtrim(&["build", "--m", "3", "--k", "9", "--c", &row[0]]);
        assert!(stdout(&built).lines().any(|l| l == format!("states={}", row[1])));
    }
}

#[test]
fn growth_rows() {
    let o = whtrim(&["growth", "anymiss:2:36", "anymiss:2:37", "anyhit:34:36"]);
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows[0], ["anymiss:2:36", "630", "7.053", "1.151"]);
    assert_eq!(rows[1], ["anymiss:2:37", "666", "7.240", "1.148"]);
    assert_eq!(rows[2][1..], rows[0][1..]);
    assert_eq!(whtrim(&["growth", "trim:2:5:9"]).status.code(), Some(2));
    let o = whtrim_env(&["growth", "anymiss:2:300"], "WHTRIM_STATE_BUDGET", "100");
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn gen_is_deterministic_and_validated() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen_pair(dir.path(), "a.json", &["--seed", "1", "--dim", "2", "--sr", "0.83"]);
    let b = gen_pair(dir.path(), "b.json", &["--seed", "1", "--dim", "2", "--sr", "0.83"]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let c = gen_pair(dir.path(), "c.json", &["--seed", "2", "--dim", "2", "--sr", "0.83"]);
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
    assert_eq!(whtrim(&["gen", "--sr", "1.2"]).status.code(), Some(2));
    assert_eq!(whtrim(&["gen", "--dim", "11"]).status.code(), Some(2));
    assert_eq!(whtrim(&["gen", "--strategy", "bogus"]).status.code(), Some(2));
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let stable = gen_pair(dir.path(), "s.json", &["--seed", "3", "--sr", "0.5"]);
    let out = dir.path().join("r.csv");
    let hist = dir.path().join("h.csv");
    let table = dir.path().join("t.csv");
    let o = whtrim(&[
        "verify",
        "--pair",
        &stable,
        "--constraint",
        "trim:2:12:6",
        "--out",
        out.to_str().unwrap(),
        "--history",
        hist.to_str().unwrap(),
        "--table",
        table.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("name,constraint,states,verdict,lower,upper,iterations,stored_entries,representation,delta\n"));
    assert_eq!(fs::read_to_string(&out).unwrap(), text);
    let row = &csv_rows(&text)[0];
    assert_eq!(row[1], "trim:2:12:6");
    assert_eq!(row[3], "certified_stable");
    assert!(row[5].parse::<f64>().unwrap() < 1.0);
    assert!(fs::read_to_string(&hist).unwrap().starts_with("iteration,lower,upper,stored_entries,frontier\n0,"));
    assert!(fs::read_to_string(&table).unwrap().starts_with("iter,space,time\n"));

    let hot = dir.path().join("hot.json");
    fs::write(
        &hot,
        r#"{"name":"hot","dim":1,"phi_hit":[[1.01]],"phi_miss":[[1.0]]}"#,
    )
    .unwrap();
    let o = whtrim(&["verify", "--pair", hot.to_str().unwrap(), "--constraint", "anymiss:2:5"]);
    assert_eq!(o.status.code(), Some(11));
    assert_eq!(csv_rows(&stdout(&o))[0][6], "0");

    let o = whtrim(&[
        "verify",
        "--pair",
        &stable,
        "--constraint",
        "anymiss:2:8",
        "--max-iterations",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(10));

    assert_eq!(
        whtrim(&["verify", "--pair", "/definitely/missing.json", "--constraint", "anymiss:2:5"]).status.code(),
        Some(2)
    );
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\n  \"name\": \"x\",\n  \"dim\": 2,\n  \"phi_hit\": 3\n}").unwrap();
    let o = whtrim(&["verify", "--pair", bad.to_str().unwrap(), "--constraint", "anymiss:2:5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 4"));
    assert_eq!(whtrim(&["verify", "--pair", &stable, "--constraint", "nope"]).status.code(), Some(2));
}

#[test]
fn verify_explicit_matches_factored_and_budget() {
    let dir = tempfile::tempdir().unwrap();
    let p = gen_pair(dir.path(), "p.json", &["--seed", "2", "--dim", "3"]);
    let f = whtrim(&["verify", "--pair", &p, "--constraint", "anymiss:2:8"]);
    let e = whtrim(&["verify", "--pair", &p, "--constraint", "anymiss:2:8", "--representation", "explicit"]);
    let (rf, re) = (&csv_rows(&stdout(&f))[0], &csv_rows(&stdout(&e))[0]);
    assert_eq!(rf[3..7], re[3..7]);
    assert_eq!(re[8], "explicit");
    let o = whtrim(&["verify", "--pair", &p, "--constraint", "anymiss:2:300", "--representation", "explicit"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn sweep_rows_ascending_and_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let p = gen_pair(dir.path(), "p.json", &["--seed", "1", "--sr", "0.5"]);
    let o = whtrim(&["sweep", "--pair", &p, "--m", "2", "--k", "8"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("c,states,verdict,lower,upper,iterations,stored_entries,error\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 6);
    let mut prev = usize::MAX;
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row[0], (i + 1).to_string());
        let states: usize = row[1].parse().unwrap();
        assert!(states <= prev);
        prev = states;
        assert_eq!(row[2], "certified_stable");
        assert!(row[7].is_empty());
    }
    let direct = whtrim(&["verify", "--pair", &p, "--constraint", "anymiss:2:8"]);
    let d = &csv_rows(&stdout(&direct))[0];
    assert_eq!(rows[0][2..6], d[3..7]);
    assert_eq!(whtrim(&["sweep", "--pair", &p, "--m", "2", "--k", "8", "--c-max", "7"]).status.code(), Some(2));
    let again = whtrim(&["sweep", "--pair", &p, "--m", "2", "--k", "8"]);
    assert_eq!(stdout(&again), text);
}

#[test]
fn sweep_reports_per_row_errors() {
    let dir = tempfile::tempdir().unwrap();
    let p = gen_pair(dir.path(), "p.json", &["--seed", "1"]);
    let o = whtrim(&[
        "sweep",
        "--pair",
        &p,
        "--m",
        "2",
        "--k",
        "8",
        "--representation",
        "explicit",
        "--c-min",
        "5",
    ]);
    assert!(o.status.success());
    let o = whtrim_env(
        &["sweep", "--pair", &p, "--m", "2", "--k", "8", "--c-min", "1", "--c-max", "2"],
        "WHTRIM_STATE_BUDGET",
        "20",
    );
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    assert!(!rows[0][7].is_empty(), "c=1 has 28 states");
    assert!(rows[1][7].is_empty(), "c=2 has 19 states");
}
