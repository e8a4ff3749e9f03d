//! Fixed declaration grammar and multi-file linking.

mod decl;
mod link;
pub mod scan;
mod stmt;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::diag::{Diagnostics, SourceMap};
use crate::syntax::{FileId, Program};

pub use decl::{check_operator, read_signature};
pub use link::{link, ClassInfo, FileScope, Linked, OpInfo};
pub use stmt::{read_block_at, read_type_at};

pub const PRELUDE_NAME: &str = "PredefOperators";
pub const PRELUDE_SOURCE: &str = include_str!("../../prelude/Predef.ctx");

/// Reads one source file into declarations and raw expression spans.
pub fn read_program(text: &str, file: FileId) -> Result<Program, Diagnostics> {
    decl::Reader::new(text, file).read_program().map_err(Diagnostics::from)
}

/// Where `<Name>.ctx` files are looked up.
pub trait SourceProvider {
    fn find(&self, class_name: &str) -> Option<(PathBuf, String)>;
}

/// Searches directories in order.
#[derive(Debug, Clone, Default)]
pub struct SearchPaths(pub Vec<PathBuf>);

impl SourceProvider for SearchPaths {
    fn find(&self, class_name: &str) -> Option<(PathBuf, String)> {
        self.0.iter().find_map(|dir| {
            let p = dir.join(format!("{class_name}.ctx"));
            std::fs::read_to_string(&p).ok().map(|t| (p, t))
        })
    }
}

/// In-memory sources keyed by class name, for tests and generated programs.
#[derive(Debug, Clone, Default)]
pub struct MemorySources(pub BTreeMap<String, String>);

impl MemorySources {
    pub fn with(mut self, name: &str, text: impl Into<String>) -> Self {
        self.0.insert(name.to_string(), text.into());
        self
    }
}

impl SourceProvider for MemorySources {
    fn find(&self, class_name: &str) -> Option<(PathBuf, String)> {
        self.0.get(class_name).map(|t| (PathBuf::from(format!("{class_name}.ctx")), t.clone()))
    }
}

/// Reads the entry file from disk and links it against `search` plus the
/// entry file's own directory.
pub fn load_file(entry: &Path, search: &[PathBuf]) -> Result<Linked, (SourceMap, Diagnostics)> {
    let mut sources = SourceMap::new();
    let text = match std::fs::read_to_string(entry) {
        Ok(t) => t,
        Err(e) => {
            let f = sources.add(entry, String::new());
            return Err((sources, crate::diag::Diagnostic::at(f, 0, format!("cannot read file: {e}")).into()));
        }
    };
    let mut dirs = Vec::new();
    if let Some(parent) = entry.parent() {
        dirs.push(if parent.as_os_str().is_empty() { PathBuf::from(".") } else { parent.to_path_buf() });
    }
    dirs.extend(search.iter().cloned());
    link(sources, entry, text, &SearchPaths(dirs))
}

/// Links an in-memory entry text.
pub fn load_text(entry_name: &str, text: &str, provider: &dyn SourceProvider) -> Result<Linked, (SourceMap, Diagnostics)> {
    link(SourceMap::new(), Path::new(entry_name), text.to_string(), provider)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::*;

    fn read(text: &str) -> Program {
        read_program(text, FileId(0)).unwrap_or_else(|d| panic!("{d:?}"))
    }

    const MAP_ENTRY_REF: &str = r#"
dsl MapEntryRef <K, V> {
  V "it" () { return map.get(key); }
  void "it" "=" _ (V value) { map.put(key, value); }
  MapEntryRef (Map<K, V> map, K key) { this.map = map; this.key = key; }
  private Map<K, V> map;
  private K key;
}"#;

    #[test]
    fn reads_map_entry_ref() {
        let p = read(MAP_ENTRY_REF);
        let c = &p.classes[0];
        assert!(c.is_dsl);
        assert_eq!(c.operators.len(), 2);
        assert_eq!(c.constructors.len(), 1);
        assert_eq!(c.fields.len(), 2);
        assert!(c.fields.iter().all(|f| f.is_private));
        assert_eq!(render_operator(&c.operators[0]), r#"V "it" ()"#);
    }

    #[test]
    fn empty_file() {
        let p = read("");
        assert!(p.imports.is_empty() && p.classes.is_empty() && p.main.is_none());
    }

    #[test]
    fn reads_priorities() {
        let p = read("dsl MapUtils { priorities p1, p2, p3 { p1 < p2 < p3 } }");
        let pr = p.classes[0].priorities.as_ref().unwrap();
        assert_eq!(pr.names, ["p1", "p2", "p3"]);
        let pairs: Vec<(String, String)> =
            pr.constraints.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
        assert_eq!(pairs, [("p1".into(), "p2".into()), ("p2".into(), "p3".into())]);
    }

    #[test]
    fn signature_round_trip() {
        let text = r#"dsl MapUtils {
  static <K, V> void "if-exists" "(" _ "[" _ "]" ")" _ "else" _
    (Map<K, V> map, K key, MapEntryRef<K, V> |- void thn, Lazy |- void els) { }
  static <K, V> V [p2] _ "[" _ "]" (Map<K, V> map, K key) { return map.get(key); }
  static Id_Lower _ _* (LowerCase lc, Letter... letters) { return new Id_Lower(); }
}"#;
        let p = read(text);
        for op in &p.classes[0].operators {
            let rendered = render_operator(op);
            let back = read_signature(&rendered, &[]).unwrap();
            assert!(back.same_signature(op), "{rendered}");
        }
        assert!(render_operator(&p.classes[0].operators[0])
            .starts_with(r#"static <K, V> void "if-exists" "(" _ "[" _ "]" ")" _ "else" _ ("#));
    }

    #[test]
    fn generic_names_make_operators() {
        let p = read(r#"dsl F <T, R, id1: Id> { R id1 () { return acc; } R plain() { return acc; } private R acc; }"#);
        let c = &p.classes[0];
        assert_eq!(c.operators.len(), 1);
        assert_eq!(c.methods.len(), 1);
        assert_eq!(c.operators[0].syntax, [SyntaxElem::NameOperand("id1".into())]);
    }

    #[test]
    fn rejects_operand_parameter_mismatch() {
        let err = read_program(r#"dsl D { static void "p" _ _ (String s) { } }"#, FileId(0)).unwrap_err();
        assert!(err.iter().next().unwrap().message.contains("operands"));
    }

    #[test]
    fn rejects_turnstile_return() {
        assert!(read_program(r#"dsl D { static Lazy |- void "p" () { } }"#, FileId(0)).is_err());
        assert!(read_program(r#"dsl D { static void "p" _ (List<Lazy |- void> x) { } }"#, FileId(0)).is_err());
    }

    #[test]
    fn unbalanced_brace_reports_opening() {
        let text = "main { if (x) { println(1); }";
        let err = read_program(text, FileId(0)).unwrap_err();
        assert_eq!(err.iter().next().unwrap().offset, 5);
    }

    #[test]
    fn statements_and_raw_spans() {
        let text = r#"main {
  Map<String, Int> r = fold-for (acc = {}; n : list) { if-exists (acc[n]) it = it + 1 else acc[n] = 1 };
  open "f.txt" { while (has next) { println(read line); } };
  for (String s : xs) println(s);
  try { a(); } finally { b(); }
}"#;
        let p = read(text);
        let stmts = &p.main.as_ref().unwrap().stmts;
        assert_eq!(stmts.len(), 4);
        match &stmts[0] {
            Stmt::Local { name, init: Some(raw), .. } => {
                assert_eq!(name, "r");
                let s = &text[raw.span.start..raw.span.end];
                assert!(s.starts_with("fold-for") && s.ends_with('}'));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(&stmts[1], Stmt::Expr(_)));
        assert!(matches!(&stmts[2], Stmt::ForEach { .. }));
        assert!(matches!(&stmts[3], Stmt::TryFinally { .. }));
    }

    #[test]
    fn import_constraints() {
        let p = read("import dsl MapUtils { MapUtils.p2 < PredefOperators.add < MapUtils.p3 };");
        assert_eq!(p.imports[0].constraints.len(), 2);
        assert_eq!(p.imports[0].dsl.to_string(), "MapUtils");
    }
}
