use std::fs;
use std::process::{Command, Output};

fn bench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ncg-bench")).args(args).output().expect("spawn ncg-bench")
}

#[test]
fn run_writes_csv_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("q.csv");
    let res = bench(&[
        "run",
        "--family",
        "quadratic",
        "--n",
        "20",
        "--solver",
        "alg1,alg2",
        "--eps-g",
        "1e-6",
        "--instances",
        "2",
        "--out",
        out.to_str().unwrap(),
        "--format",
        "csv",
        "--jobs",
        "2",
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,m,p,solver,mean_objective,mean_wall_s,mean_subproblems,mean_outer,failures");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("20,0,0.0,alg1,"));
    assert!(lines[2].starts_with("20,0,0.0,alg2,"));
    assert!(lines.iter().skip(1).all(|l| l.ends_with(",0")));
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(
        &cfg,
        "version = 1\nfamily = \"repu\"\nsolvers = [\"alg2\"]\ninstances_per_cell = 1\neps_g = 1e-3\n\n[[grid]]\nn = 10\nm = 3\np = 3.0\n",
    )
    .unwrap();
    let res = bench(&["run", "--config", cfg.to_str().unwrap(), "--solver", "acrn", "--format", "markdown"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let stdout = String::from_utf8(res.stdout).unwrap();
    assert!(stdout.contains("| acrn "), "{stdout}");
    assert!(!stdout.contains("alg2"));
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "version = 1\nfamily = \"repu\"\nsolvers = []\neps_g = 1e-3\n[[grid]]\nn = 4\nm = 2\np = 3.0\n")
        .unwrap();
    assert_eq!(bench(&["run", "--config", cfg.to_str().unwrap()]).status.code(), Some(1));
    fs::write(&cfg, "version = 1\nfamily = \"repu\"\nsolvers = [\"alg2\"]\neps_g = 1e-3\ntypo = 3\n").unwrap();
    assert_eq!(bench(&["run", "--config", cfg.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(bench(&["run", "--family", "nope", "--n", "3"]).status.code(), Some(1));
    assert_eq!(
        bench(&["run", "--family", "repu", "--n", "4", "--m", "2", "--p", "3", "--solver", "alg1"]).status.code(),
        Some(1)
    );
}

#[test]
fn run_failures_exit_two() {
    let res = bench(&[
        "run",
        "--family",
        "quadratic",
        "--n",
        "10",
        "--solver",
        "acrn",
        "--eps-g",
        "1e-300",
        "--instances",
        "1",
    ]);
    assert_eq!(res.status.code(), Some(2), "{}", String::from_utf8_lossy(&res.stderr));
}

#[test]
fn instance_generate_then_solve() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("inst.txt");
    let path = file.to_str().unwrap();
    let gen = bench(&[
        "instance",
        "generate",
        "--family",
        "infeasibility",
        "--n",
        "12",
        "--m",
        "3",
        "--p",
        "2.5",
        "--seed",
        "9",
        "--out",
        path,
    ]);
    assert!(gen.status.success());
    let text = fs::read_to_string(&file).unwrap();
    assert!(text.starts_with("ncg-instance v1\nfamily infeasibility\nn 12\nm 3\n"));
    let solve = bench(&["instance", "solve", "--file", path, "--solver", "alg2", "--eps-g", "1e-6"]);
    assert!(solve.status.success(), "{}", String::from_utf8_lossy(&solve.stderr));
    let line = String::from_utf8(solve.stdout).unwrap();
    assert!(line.contains("status=Fosp"), "{line}");
    let again = bench(&["instance", "solve", "--file", path, "--solver", "alg2", "--eps-g", "1e-6"]);
    assert_eq!(line, String::from_utf8(again.stdout).unwrap());
}
