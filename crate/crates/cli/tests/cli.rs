use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use timedart::bench::CSV_HEADER;
use timedart::modelgen::gen_fischer;
use timedart::{dump_model, load_model, reach_darts, reach_naive, SearchOptions};

fn timedart(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_timedart"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn generate(dir: &TempDir, name: &str, args: &[&str]) -> PathBuf {
    let path = dir.path().join(name);
    let mut full = vec!["gen"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", path.to_str().unwrap()]);
    let o = timedart(&full);
    assert!(o.status.success(), "{}", stderr(&o));
    path
}

fn check(model: &Path, goal: &str, extra: &[&str]) -> Output {
    let mut args = vec!["check", model.to_str().unwrap(), "--goal", goal];
    args.extend_from_slice(extra);
    timedart(&args)
}

#[test]
fn fig4_goal_is_unreachable() {
    let dir = TempDir::new().unwrap();
    let fig4 = generate(&dir, "fig4.json", &["fig4"]);
    let o = check(&fig4, "l3", &["--engine", "darts"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "UNREACHABLE\n");
    let stats = stderr(&o);
    assert!(stats.starts_with("discovered="), "{stats}");
    assert!(stats.contains(" stored=6 iterations=7 time_ms="), "{stats}");
}

#[test]
fn initial_goal_is_reachable() {
    let dir = TempDir::new().unwrap();
    let fig4 = generate(&dir, "fig4.json", &["fig4"]);
    for engine in ["naive", "darts"] {
        let o = check(&fig4, "l0", &["--engine", engine]);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(stdout(&o), "REACHABLE\n");
    }
}

#[test]
fn lcm4_reachable_with_naive_engine() {
    let dir = TempDir::new().unwrap();
    let lcm4 = generate(&dir, "lcm4.json", &["lcm", "--n", "4", "--bound", "inf"]);
    let o = check(&lcm4, "Goal", &["--engine", "naive"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "REACHABLE\n");
}

#[test]
fn generated_models_round_trip() {
    let dir = TempDir::new().unwrap();
    for (name, args) in [
        ("fig4.json", vec!["fig4"]),
        ("lcm.json", vec!["lcm", "--n", "3", "--bound", "7"]),
        ("fischer.json", vec!["fischer", "--k", "3"]),
        ("random.json", vec!["random", "--seed", "11"]),
    ] {
        let path = generate(&dir, name, &args);
        let text = fs::read_to_string(&path).unwrap();
        let model = load_model(text.as_bytes()).unwrap();
        assert_eq!(dump_model(&model), text.trim_end(), "{name}");
    }
}

#[test]
fn lcm_model_has_n_plus_one_clocks() {
    let o = timedart(&["gen", "lcm", "--n", "4", "--bound", "inf"]);
    assert!(o.status.success());
    let model = load_model(&o.stdout).unwrap();
    assert_eq!(model.clocks, ["x1", "x2", "x3", "x4", "y"]);
}

#[test]
fn random_generation_is_deterministic() {
    let args = [
        "gen",
        "random",
        "--seed",
        "7",
        "--clocks",
        "3",
        "--locations",
        "5",
        "--edges",
        "9",
    ];
    let a = timedart(&args);
    let b = timedart(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, timedart(&["gen", "random", "--seed", "8"]).stdout);
}

#[test]
fn bench_fischer_writes_one_ok_row_per_cell() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("out.csv");
    let o = timedart(&["bench", "fischer", "3..9", "--csv", csv.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 14);
    assert!(rows
        .iter()
        .all(|r| r.len() == 8 && r[7] == "ok" && r[3] == "false"));
    let stored = |engine: &str| -> u64 {
        rows.iter()
            .find(|r| r[1] == "3" && r[2] == engine)
            .map(|r| r[5].parse().unwrap())
            .unwrap()
    };
    assert!(stored("darts") < stored("naive"));
}

#[test]
fn zero_timeout_marks_rows_and_interrupts_check() {
    let o = timedart(&["bench", "lcm", "1,2", "--timeout-ms", "0", "--parallel"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.ends_with(",timeout")), "{out}");

    let dir = TempDir::new().unwrap();
    let fig4 = generate(&dir, "fig4.json", &["fig4"]);
    let o = check(&fig4, "l3", &["--timeout-ms", "0"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).is_empty());
    assert!(stderr(&o).contains("discovered="));
}

#[test]
fn stored_cap_interrupts_check() {
    let dir = TempDir::new().unwrap();
    let fischer = generate(&dir, "f.json", &["fischer", "--k", "3"]);
    let o = check(
        &fischer,
        "violation",
        &["--engine", "naive", "--max-stored", "10"],
    );
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn bad_input_exits_with_usage_code() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"locations\": [").unwrap();
    let o = check(&bad, "l0", &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).contains("parse error at line 1"),
        "{}",
        stderr(&o)
    );

    let fig4 = generate(&dir, "fig4.json", &["fig4"]);
    assert_eq!(check(&fig4, "nowhere", &[]).status.code(), Some(1));
    assert_eq!(
        check(&fig4, "l3", &["--engine", "naive", "--trace"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(timedart(&["check"]).status.code(), Some(1));
    assert_eq!(
        timedart(&["bench", "fischer", "1..3"]).status.code(),
        Some(1)
    );
    assert_eq!(timedart(&["--help"]).status.code(), Some(0));
}

#[test]
fn trace_prints_one_line_per_iteration() {
    let dir = TempDir::new().unwrap();
    let fig4 = generate(&dir, "fig4.json", &["fig4"]);
    let o = check(&fig4, "l3", &["--trace"]);
    let err = stderr(&o);
    let trace: Vec<&str> = err.lines().filter(|l| l.starts_with("iter=")).collect();
    assert_eq!(trace.len(), 7);
    assert_eq!(
        trace[6],
        "iter=7 picked=l1,(0,1) pw={l0,(0,0)=(0,0); l1,(0,0)=(1,1); l1,(0,1)=(0,0); \
         l1,(0,2)=(0,0); l1,(0,3)=(0,0); l2,(0,0)=(0,0)}"
    );
    assert_eq!(stdout(&o), "UNREACHABLE\n");
}

#[test]
fn custom_bench_reads_model_files() {
    let dir = TempDir::new().unwrap();
    let fig4 = generate(&dir, "fig4.json", &["fig4"]);
    let models = format!("{}:l3,{}:l0", fig4.display(), fig4.display());
    let o = timedart(&["bench", "custom", "--models", &models, "--engines", "darts"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert!(rows[0].starts_with("fig4,0,darts,false,"));
    assert!(rows[1].starts_with("fig4,1,darts,true,"));
}

#[test]
fn cli_verdicts_match_library() {
    let dir = TempDir::new().unwrap();
    let mut cases = vec![(
        generate(&dir, "fischer.json", &["fischer", "--k", "4"]),
        "violation".to_string(),
    )];
    for seed in 0..12 {
        let name = format!("r{seed}.json");
        let path = dir.path().join(&name);
        let o = timedart(&[
            "gen",
            "random",
            "--seed",
            &seed.to_string(),
            "--out",
            path.to_str().unwrap(),
        ]);
        let goal = stderr(&o).trim().strip_prefix("goal=").unwrap().to_string();
        cases.push((path, goal));
    }
    assert_eq!(
        load_model(&fs::read(&cases[0].0).unwrap())
            .unwrap()
            .automaton(),
        &gen_fischer(4)
    );
    for (path, goal) in &cases {
        let model = load_model(&fs::read(path).unwrap()).unwrap();
        let g = model.location_id(goal).unwrap();
        let naive = reach_naive(&model, g, SearchOptions::default())
            .unwrap()
            .reachable;
        let darts = reach_darts(&model, g, SearchOptions::default())
            .unwrap()
            .reachable;
        for (engine, want) in [("naive", naive), ("darts", darts)] {
            let o = check(path, goal, &["--engine", engine]);
            let expected = if want { "REACHABLE\n" } else { "UNREACHABLE\n" };
            assert_eq!(stdout(&o), expected, "{} {engine}", path.display());
        }
    }
}
