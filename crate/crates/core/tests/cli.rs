use std::path::PathBuf;
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn arraymc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arraymc"))
        .current_dir(root())
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const STATS: [&str; 4] = ["iterations", "nodes", "deleted", "solver-calls"];

#[test]
fn statistics_lines_parse_as_integers() {
    let o = arraymc(&["check", "benchmarks/bakery.abs"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    for key in STATS {
        let line = out.lines().find(|l| l.starts_with(&format!("{key}: "))).unwrap();
        let (_, v) = line.split_once(": ").unwrap();
        v.parse::<u64>().unwrap();
    }
}

#[test]
fn header_echoes_flags() {
    let o = arraymc(&["check", "benchmarks/init_test.abs", "--abstraction=transform", "--accelerate=off", "--max-iters=3", "--max-nodes=50", "--oracle-n=2"]);
    let out = stdout(&o);
    for line in ["abstraction: transform", "accelerate: off", "max-iters: 3", "max-nodes: 50", "oracle-n: 2", "inst-set: default"] {
        assert!(out.lines().any(|l| l == line), "{line} missing from\n{out}");
    }
}

#[test]
fn accelerate_defaults_follow_the_theory() {
    let out = stdout(&arraymc(&["check", "benchmarks/init_test.abs"]));
    assert!(out.contains("accelerate: on\n") && out.contains("accelerated: t1, t3\n"), "{out}");
    assert!(stdout(&arraymc(&["check", "benchmarks/mutex.abs"])).contains("accelerate: off\n"));
}

#[test]
fn unsafe_report_with_run() {
    let o = arraymc(&["check", "benchmarks/init_test_buggy.abs", "--trace"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("trace: t0 t1+ t2 t4\n"), "{out}");
    assert!(out.contains("  init p=0"), "{out}");
}

#[test]
fn resource_limit_exits_two() {
    let o = arraymc(&["check", "benchmarks/bakery.abs", "--max-iters=1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("verdict: RESOURCE LIMIT (iteration limit of 1 reached)"));
}

#[test]
fn oracle_subcommand() {
    let o = arraymc(&["oracle", "benchmarks/mutex.abs", "--n", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("verdict: SAFE at N=3\n"));
    let o = arraymc(&["oracle", "benchmarks/init_test_buggy.abs", "--n", "2", "--int-lo", "0", "--int-hi", "4"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("verdict: UNSAFE at N=2\n") && out.contains("int-hi: 4\n"), "{out}");
}

#[test]
fn dump_output_parses_back() {
    let dir = tempfile::tempdir().unwrap();
    for (bench, flags) in [("init_test.abs", vec![]), ("mutex.abs", vec!["--abstraction=transform"])] {
        let file = format!("benchmarks/{bench}");
        let mut args = vec!["dump", file.as_str()];
        args.extend(flags);
        let o = arraymc(&args);
        assert_eq!(o.status.code(), Some(0));
        let path = dir.path().join(bench);
        std::fs::write(&path, &o.stdout).unwrap();
        let c = arraymc(&["check", path.to_str().unwrap(), "--accelerate=off"]);
        assert_eq!(c.status.code(), Some(0), "{}", stdout(&c));
    }
}

#[test]
fn frontier_dump_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.jsonl");
    let o = arraymc(&["check", "benchmarks/mutex.abs", &format!("--dump-frontier={}", path.display())]);
    let out = stdout(&o);
    let nodes: usize = out.lines().find_map(|l| l.strip_prefix("nodes: ")).unwrap().parse().unwrap();
    assert_eq!(std::fs::read_to_string(path).unwrap().lines().count(), nodes);
}

#[test]
fn smt_dump_writes_queries() {
    let dir = tempfile::tempdir().unwrap();
    let o = arraymc(&["check", "benchmarks/mutex.abs", &format!("--dump-smt={}", dir.path().display())]);
    assert_eq!(o.status.code(), Some(0));
    let q0 = std::fs::read_to_string(dir.path().join("q0.smt2")).unwrap();
    assert!(q0.contains("check-sat"), "{q0}");
}

#[test]
fn usage_and_parse_errors_exit_three() {
    assert_eq!(arraymc(&["check"]).status.code(), Some(3));
    assert_eq!(arraymc(&["check", "benchmarks/mutex.abs", "--abstraction=sometimes"]).status.code(), Some(3));
    assert_eq!(arraymc(&["check", "no/such/file.abs"]).status.code(), Some(3));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.abs");
    std::fs::write(&bad, "(system s (theory simple)\n  (var x frob))\n").unwrap();
    let o = arraymc(&["check", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains(":2:"), "{err}");
}

#[test]
fn help_exits_zero() {
    let o = arraymc(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("check"));
}
