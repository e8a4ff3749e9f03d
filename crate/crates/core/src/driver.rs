//! End-to-end helpers: load, check, lower and run.

use std::path::{Path, PathBuf};

use crate::loader::{load_file, load_text, Linked, SourceProvider};
use crate::lower::{lower_program, CoreProgram};
use crate::runtime::{Fault, Interp, Vfs};
use crate::types::check::{check_program, CheckedProgram, ParseOptions};
use crate::Diagnostics;

/// Stack reserved for the evaluator thread; deep object-language recursion
/// maps onto host recursion.
const RUN_STACK: usize = 256 << 20;

pub struct Program {
    pub linked: Linked,
    pub checked: CheckedProgram,
    pub core: CoreProgram,
}

/// Rendered diagnostics of a failed compilation.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{rendered}")]
pub struct CompileError {
    pub diagnostics: Diagnostics,
    pub rendered: String,
}

impl CompileError {
    pub fn messages(&self) -> Vec<&str> {
        self.diagnostics.iter().map(|d| d.message.as_str()).collect()
    }
}

fn finish(linked: Linked, options: ParseOptions) -> Result<Program, CompileError> {
    let checked = check_program(&linked, options)
        .map_err(|d| CompileError { rendered: d.render(&linked.sources), diagnostics: d })?;
    let core = lower_program(&linked, &checked);
    Ok(Program { linked, checked, core })
}

pub fn compile_file(path: &Path, search: &[PathBuf], options: ParseOptions) -> Result<Program, CompileError> {
    let linked = load_file(path, search).map_err(|(sm, d)| CompileError { rendered: d.render(&sm), diagnostics: d })?;
    finish(linked, options)
}

pub fn compile_text(
    name: &str,
    text: &str,
    provider: &dyn SourceProvider,
    options: ParseOptions,
) -> Result<Program, CompileError> {
    let linked =
        load_text(name, text, provider).map_err(|(sm, d)| CompileError { rendered: d.render(&sm), diagnostics: d })?;
    finish(linked, options)
}

#[derive(Debug)]
pub struct Run {
    pub output: String,
    pub fault: Option<Fault>,
    pub vfs: Vfs,
}

/// Runs `main` on a dedicated thread with a large stack. With `echo`, output
/// also goes to stdout as it is produced.
pub fn execute(core: &CoreProgram, vfs: Vfs, echo: bool) -> Run {
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(RUN_STACK)
            .spawn_scoped(s, || {
                let mut it = Interp::new(core, vfs);
                it.echo = echo;
                let fault = it.run_main().err();
                Run { output: it.output, fault, vfs: it.vfs }
            })
            .expect("spawn evaluator thread")
            .join()
            .expect("evaluator thread panicked")
    })
}
