mod common;

use common::*;
use ctxlang_core::bench::log_log_slope;
use ctxlang_core::types::check::Checker;
use ctxlang_core::{load_text, Compilation, Goal, ParseOptions, SearchPaths, Session, Type};

const CHAIN_DSL: &str = r#"import dsl Chain;
dsl Chain {
  static String _ "[x]" (String s) { return s + "x"; }
}
"#;

fn chain_program(depth: usize) -> String {
    format!("{CHAIN_DSL}main {{\n  println(\"a\"{});\n}}\n", "[x]".repeat(depth))
}

#[test]
fn left_recursive_chain_evaluates() {
    assert_eq!(output(run_src(&chain_program(5))), "axxxxx\n");
}

#[test]
fn reparsing_a_span_is_free() {
    let text = chain_program(20);
    let linked = load_text("Test.ctx", &text, &SearchPaths(vec![corpus_dir()])).map_err(|(_, d)| d).unwrap();
    let comp = Compilation::new(&linked, ParseOptions::default()).unwrap();
    let mut ck = Checker::new(&comp, linked.entry, None, false);
    let start = text.find("\"a\"").unwrap();
    let end = text.rfind("[x]").unwrap() + 3;
    let goal = Goal { expected: Type::STR, asm: vec![], min_rank: 0, literal: false };
    let mut s = Session::new(&mut ck, &text[..end], linked.entry);
    let first = s.parse_goal(start, &goal).expect("chain parses");
    assert_eq!(first.end, end);
    let evaluations = s.stats().evaluations;
    let entries = s.memo_len();
    let again = s.parse_goal(start, &goal).expect("chain parses again");
    assert_eq!(again.end, first.end);
    assert_eq!(s.stats().evaluations, evaluations);
    assert_eq!(s.memo_len(), entries);
}

#[test]
fn memo_entries_grow_linearly_with_chain_length() {
    let points: Vec<(f64, f64)> = [25, 50, 100]
        .iter()
        .map(|&d| {
            let p = compile_src(&chain_program(d)).unwrap();
            let s = &p.checked.main_stats;
            (s.input_length as f64, s.memo_entries as f64)
        })
        .collect();
    let slope = log_log_slope(&points);
    assert!((slope - 1.0).abs() <= 0.2, "log-log slope {slope} from {points:?}");
    // Also linear in the plain sense: entries per input byte stay within 20%.
    let rates: Vec<f64> = points.iter().map(|(n, m)| m / n).collect();
    let (lo, hi) = rates.iter().fold((f64::MAX, f64::MIN), |(lo, hi), r| (lo.min(*r), hi.max(*r)));
    assert!(hi / lo <= 1.2, "entries per byte {rates:?}");
}
