#![allow(dead_code)]

use std::path::{Path, PathBuf};

use ctxlang_core::*;

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn vfs() -> Vfs {
    Vfs::from_dir(&corpus_dir().join("vfs")).expect("corpus vfs")
}

pub fn compile(name: &str) -> Result<Program, CompileError> {
    compile_file(&corpus_dir().join(name), &[], ParseOptions::default())
}

/// Compiles an in-memory entry file that may import corpus classes.
pub fn compile_src(text: &str) -> Result<Program, CompileError> {
    compile_text("Test.ctx", text, &SearchPaths(vec![corpus_dir()]), ParseOptions::default())
}

pub fn run_program(p: &Program) -> Run {
    execute(&p.core, vfs(), false)
}

pub fn run(name: &str) -> Run {
    let p = compile(name).unwrap_or_else(|e| panic!("{name} failed to compile:\n{e}"));
    run_program(&p)
}

pub fn run_src(text: &str) -> Run {
    let p = compile_src(text).unwrap_or_else(|e| panic!("failed to compile:\n{e}\n{text}"));
    run_program(&p)
}

/// Output of a run that must not fault.
pub fn output(r: Run) -> String {
    if let Some(f) = r.fault {
        panic!("unexpected {f}; output so far:\n{}", r.output);
    }
    r.output
}

pub mod hoas;
