mod common;

use common::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Each trial looks up a key that is present or absent at random; the else
/// operand must run exactly when the key is absent and never otherwise.
#[test]
fn untaken_else_branch_has_no_effect() {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let present: Vec<bool> = (0..100).map(|_| rng.gen_bool(0.5)).collect();
    let mut src = String::from(
        "import dsl MapUtils;\nmain {\n  Map<String, int> m = {};\n  List<String> effects = new List<String>();\n  List<String> keys = new List<String>();\n",
    );
    for (i, p) in present.iter().enumerate() {
        if *p {
            src.push_str(&format!("  m[\"k{i}\"] = {i};\n"));
        }
        src.push_str(&format!("  keys.add(\"k{i}\");\n"));
    }
    src.push_str(
        "  for (String k : keys) {\n    if-exists (m[k]) println(\"then \" + k) else { effects.add(k); println(\"else \" + k); };\n  }\n  println(effects.size());\n}\n",
    );
    let out = output(run_src(&src));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 101);
    let mut else_on_present = 0;
    for (i, p) in present.iter().enumerate() {
        let branch = if *p { "then" } else { "else" };
        assert_eq!(lines[i], format!("{branch} k{i}"));
        if *p && lines[i].starts_with("else") {
            else_on_present += 1;
        }
    }
    assert_eq!(else_on_present, 0);
    let absent = present.iter().filter(|p| !**p).count();
    assert_eq!(lines[100], absent.to_string());
}
