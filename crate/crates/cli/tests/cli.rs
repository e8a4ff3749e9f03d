use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn ctxlang(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctxlang")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn check_accepts_the_map_dsl() {
    let o = ctxlang(&["check", corpus("MapUtils.ctx").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn run_prints_the_greeting() {
    let o = ctxlang(&["run", corpus("hello.ctx").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "hello, world!\n");
}

#[test]
fn run_reads_from_a_mapped_directory() {
    let o = ctxlang(&["run", corpus("try_with.ctx").to_str().unwrap(), "--vfs", corpus("vfs").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "first line\n");
}

#[test]
fn faults_go_to_stderr_and_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("boom.ctx");
    std::fs::write(&file, "main { println(\"before\"); fail(\"boom\"); }\n").unwrap();
    let o = ctxlang(&["run", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "before\n");
    assert!(stderr(&o).starts_with("fault: boom at "), "{}", stderr(&o));
}

#[test]
fn compile_errors_exit_1_with_a_location() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.ctx");
    std::fs::write(&file, "main {\n  int x = \"no\";\n}\n").unwrap();
    let o = ctxlang(&["check", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bad.ctx:2:"), "{}", stderr(&o));
}

#[test]
fn unknown_flags_are_usage_errors() {
    let o = ctxlang(&["--bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage"), "{}", stderr(&o));
}

#[test]
fn dump_core_shows_closures() {
    let o = ctxlang(&["dump-core", corpus("lambda.ctx").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("main = "), "{}", stdout(&o));
    assert!(stdout(&o).contains("lambda"), "{}", stdout(&o));
}

#[test]
fn stats_are_reported_on_stderr() {
    let o = ctxlang(&["--stats", "check", corpus("hello.ctx").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("languages_seen="), "{}", stderr(&o));
}

#[test]
fn bench_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rows.csv");
    let o = ctxlang(&[
        "bench", "--family", "unique_prefix", "--max-p", "4", "--depth", "1", "--no-time", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "");
    let csv = std::fs::read_to_string(out).unwrap();
    assert_eq!(
        csv,
        "family,P,depth,L,memo_entries\nUNIQUE_PREFIX,1,1,6,7\nUNIQUE_PREFIX,2,1,6,7\nUNIQUE_PREFIX,4,1,6,7\n"
    );
}
