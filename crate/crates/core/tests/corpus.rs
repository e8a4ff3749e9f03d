mod common;

use std::collections::BTreeMap;

use common::*;

#[test]
fn hello() {
    assert_eq!(output(run("hello.ctx")), "hello, world!\n");
}

#[test]
fn word_counts_match_a_direct_count() {
    let words = ["x", "y", "x"];
    let mut expected: Vec<(&str, usize)> = Vec::new();
    for w in words {
        match expected.iter_mut().find(|(k, _)| *k == w) {
            Some((_, n)) => *n += 1,
            None => expected.push((w, 1)),
        }
    }
    let rendered: Vec<String> = expected.iter().map(|(k, n)| format!("{k}: {n}")).collect();
    assert_eq!(output(run("count_words.ctx")), format!("{{{}}}\n", rendered.join(", ")));
}

#[test]
fn sum_of_squares_matches_a_loop() {
    let expected: i64 = [1i64, 2, 3].iter().map(|i| i * i).sum();
    assert_eq!(output(run("sum_squares.ctx")), format!("{expected}\n"));
}

#[test]
fn map_indexing_with_priorities() {
    assert_eq!(output(run("colors.ctx")), "RED\n");
}

#[test]
fn lambda_expressions() {
    assert_eq!(output(run("lambda.ctx")), "hi!\n42\n");
}

#[test]
fn pattern_matching() {
    assert_eq!(output(run("match.ctx")), "goodbye, world\nempty string\nhi\n");
}

#[test]
fn reading_lines_inside_open() {
    let r = run("read_lines.ctx");
    assert_eq!(r.vfs.open_count("file.txt"), 2);
    assert_eq!(r.vfs.close_count("file.txt"), 2);
    assert_eq!(output(r), "first line\nsecond line\n2\n");
}

#[test]
fn try_with_closes_its_resource() {
    let r = run("try_with.ctx");
    assert_eq!(r.vfs.open_count("file.txt"), 1);
    assert_eq!(r.vfs.close_count("file.txt"), 1);
    assert_eq!(output(r), "first line\n");
}

#[test]
fn resources_close_once_when_the_body_faults() {
    let open = run_src(r#"import dsl FileRead; main { open "file.txt" { fail("boom"); }; }"#);
    let try_with =
        run_src(r#"import dsl TryWith; main { try (f = new Reader("file.txt")) { fail("boom"); }; }"#);
    for r in [open, try_with] {
        let fault = r.fault.expect("body faults");
        assert_eq!(fault.message, "boom");
        assert_eq!(r.vfs.open_count("file.txt"), 1);
        assert_eq!(r.vfs.close_count("file.txt"), 1);
        assert!(r.vfs.leaked().is_empty());
    }
}

#[test]
fn missing_file_faults_before_anything_opens() {
    let r = run_src(r#"import dsl FileRead; main { open "absent.txt" { println(read line); }; }"#);
    assert!(r.fault.unwrap().message.contains("no such file"));
    assert_eq!(r.vfs.open_count("absent.txt"), 0);
}

#[test]
fn requires_clause_needs_its_assumption() {
    let src = r#"import dsl FileRead;
List<String> getLines() requires FileRead {
  List<String> lines = new List<String>();
  while (has next) { lines.add(read line); }
  return lines;
}
main { List<String> all = getLines(); }"#;
    let err = compile_src(src).err().expect("getLines outside open is rejected");
    assert!(err.rendered.contains("Test.ctx:7:"), "{}", err.rendered);
    let ok = src.replace("main { List<String> all = getLines(); }", "main { open \"file.txt\" { println(getLines()); }; }");
    assert_eq!(output(run_src(&ok)), "[first line, second line]\n");
}

#[test]
fn dangling_else_binds_to_the_inner_if() {
    assert_eq!(output(run("dangling_else.ctx")), "inner then\ninner else\ndone\n");
}

#[test]
fn import_order_breaks_equal_length_ties() {
    assert_eq!(output(run("tie_first_second.ctx")), "first:x\n");
    assert_eq!(output(run("tie_second_first.ctx")), "second:x\n");
}

#[test]
fn nested_if_exists_updates_the_innermost_entry() {
    let src = r#"import dsl MapUtils;
main {
  Map<String, int> outer = {};
  outer["k"] = 1;
  Map<String, int> inner = {};
  inner["k"] = 10;
  if-exists (outer["k"]) if-exists (inner["k"]) it = it + 5 else println("inner missing") else println("outer missing");
  println(outer["k"]);
  println(inner["k"]);
}"#;
    assert_eq!(output(run_src(src)), "1\n15\n");
}

#[test]
fn fold_for_names_must_match_their_binders() {
    let ok = r#"import dsl FoldFor;
main { List<int> xs = new List<int>(); xs.add(4); int t = fold-for (total = 1; x : xs) { total = total * x }; println(t); }"#;
    assert_eq!(output(run_src(ok)), "4\n");
    let bad = ok.replace("total = total * x", "total = total * y");
    let err = compile_src(&bad).err().expect("unbound spelling is rejected");
    assert!(err.rendered.contains("error"), "{}", err.rendered);
}

#[test]
fn every_corpus_program_checks() {
    let mut failures = BTreeMap::new();
    for entry in std::fs::read_dir(corpus_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "ctx") {
            let name = path.file_name().unwrap().to_string_lossy().to_string();
            if let Err(e) = compile(&name) {
                failures.insert(name, e.rendered);
            }
        }
    }
    assert!(failures.is_empty(), "{failures:#?}");
}
