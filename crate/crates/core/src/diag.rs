use std::fmt;
use std::path::{Path, PathBuf};

use crate::syntax::{FileId, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub file: FileId,
    pub offset: usize,
    pub message: String,
}

impl Diagnostic {
    pub fn error(span: Span, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Error, file: span.file, offset: span.start, message: message.into() }
    }

    pub fn at(file: FileId, offset: usize, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Error, file, offset, message: message.into() }
    }
}

/// Diagnostics kept sorted by (file, offset).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Diagnostics {
    items: Vec<Diagnostic>,
}

impl Diagnostics {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, d: Diagnostic) {
        let idx = self.items.partition_point(|x| (x.file, x.offset) <= (d.file, d.offset));
        self.items.insert(idx, d);
    }

    pub fn extend(&mut self, other: Diagnostics) {
        for d in other.items {
            self.push(d);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn has_errors(&self) -> bool {
        self.items.iter().any(|d| d.severity == Severity::Error)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Diagnostic> {
        self.items.iter()
    }

    pub fn render(&self, files: &SourceMap) -> String {
        let mut out = String::new();
        for d in &self.items {
            let (line, col) = files.line_col(d.file, d.offset);
            out.push_str(&format!("{}:{line}:{col}: {}: {}\n", files.name(d.file), d.severity, d.message));
        }
        out
    }
}

impl From<Diagnostic> for Diagnostics {
    fn from(d: Diagnostic) -> Self {
        Diagnostics { items: vec![d] }
    }
}

#[derive(Debug, Clone)]
pub struct SourceFile {
    pub path: PathBuf,
    pub text: String,
}

/// All files read during one compilation, indexed by `FileId`.
#[derive(Debug, Clone, Default)]
pub struct SourceMap {
    files: Vec<SourceFile>,
}

impl SourceMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, path: impl AsRef<Path>, text: String) -> FileId {
        self.files.push(SourceFile { path: path.as_ref().to_path_buf(), text });
        FileId(self.files.len() as u32 - 1)
    }

    pub fn text(&self, id: FileId) -> &str {
        &self.files[id.0 as usize].text
    }

    pub fn path(&self, id: FileId) -> &Path {
        &self.files[id.0 as usize].path
    }

    pub fn name(&self, id: FileId) -> String {
        self.files.get(id.0 as usize).map(|f| f.path.display().to_string()).unwrap_or_else(|| "<unknown>".into())
    }

    /// One-based line and column of a byte offset.
    pub fn line_col(&self, id: FileId, offset: usize) -> (usize, usize) {
        let Some(f) = self.files.get(id.0 as usize) else { return (1, offset + 1) };
        let before = &f.text[..offset.min(f.text.len())];
        let line = before.matches('\n').count() + 1;
        let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        (line, col)
    }

    pub fn find(&self, path: &Path) -> Option<FileId> {
        self.files.iter().position(|f| f.path == path).map(|i| FileId(i as u32))
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagnostics_stay_sorted() {
        let f = FileId(0);
        let mut ds = Diagnostics::new();
        ds.push(Diagnostic::at(f, 30, "c"));
        ds.push(Diagnostic::at(f, 10, "a"));
        ds.push(Diagnostic::at(f, 20, "b"));
        let msgs: Vec<_> = ds.iter().map(|d| d.message.as_str()).collect();
        assert_eq!(msgs, ["a", "b", "c"]);
    }

    #[test]
    fn render_format() {
        let mut sm = SourceMap::new();
        let f = sm.add("x.ctx", "ab\ncdef".to_string());
        let ds: Diagnostics = Diagnostic::at(f, 5, "boom").into();
        assert_eq!(ds.render(&sm), "x.ctx:2:3: error: boom\n");
    }
}
