//! Context-sensitive expression language: loading, priority merging,
//! type-directed parsing, checking, lowering and evaluation.

pub mod bench;
pub mod diag;
pub mod driver;
pub mod loader;
pub mod lower;
pub mod parse;
pub mod priority;
pub mod runtime;
pub mod syntax;
pub mod types;

pub use diag::{Diagnostic, Diagnostics, SourceMap};
pub use driver::{compile_file, compile_text, execute, CompileError, Program, Run};
pub use runtime::{Fault, Value, Vfs};
pub use loader::{load_file, load_text, Linked, MemorySources, SearchPaths, SourceProvider};
pub use parse::{Goal, ParseStats, Session};
pub use priority::{PriorityError, PriorityOrder};
pub use syntax::{NameAst, OperatorDecl, QName, Type};
pub use types::check::{Compilation, ParseOptions};
