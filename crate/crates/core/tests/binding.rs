mod common;

use common::*;
use proptest::prelude::*;

const RESERVED: &[&str] = &[
    "fun", "new", "true", "false", "null", "this", "if", "for", "while", "return", "try", "else", "int", "bool",
    "void", "main", "import", "dsl", "static", "println", "print", "str", "fail", "xs", "t",
];

fn ident() -> impl Strategy<Value = String> {
    "[a-z]{1,6}".prop_filter("reserved", |s| !RESERVED.contains(&s.as_str()))
}

/// The accumulator is declared as `acc` and referenced as `used`.
fn program(acc: &str, used: &str) -> String {
    format!(
        "import dsl FoldFor;\nmain {{ List<int> xs = new List<int>(); xs.add(3); xs.add(4); \
         int t = fold-for ({acc} = 1; elem : xs) {{ {used} = {used} * elem }}; println(t); }}"
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn equal_spellings_bind(name in ident().prop_filter("element name", |s| s != "elem")) {
        let out = output(run_src(&program(&name, &name)));
        prop_assert_eq!(out, "12\n");
    }

    #[test]
    fn unequal_spellings_reject(a in ident(), b in ident()) {
        prop_assume!(a != b && a != "elem" && b != "elem");
        prop_assert!(compile_src(&program(&a, &b)).is_err());
    }
}
