//! In-memory read-only filesystem with open/close accounting.

use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Default)]
pub struct Vfs {
    files: BTreeMap<String, String>,
    opened: BTreeMap<String, usize>,
    closed: BTreeMap<String, usize>,
}

/// An open reader over one file's lines.
#[derive(Debug)]
pub struct Handle {
    pub path: String,
    lines: Vec<String>,
    next: usize,
    pub closed: bool,
}

impl Vfs {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_file(mut self, path: &str, contents: &str) -> Self {
        self.files.insert(path.to_string(), contents.to_string());
        self
    }

    /// Loads every regular file under `dir`, keyed by its path relative to
    /// `dir` with `/` separators.
    pub fn from_dir(dir: &Path) -> std::io::Result<Self> {
        let mut vfs = Vfs::new();
        let mut stack = vec![dir.to_path_buf()];
        while let Some(d) = stack.pop() {
            for entry in std::fs::read_dir(&d)? {
                let p = entry?.path();
                if p.is_dir() {
                    stack.push(p);
                } else {
                    let rel = p.strip_prefix(dir).unwrap_or(&p);
                    let key = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
                    vfs.files.insert(key, std::fs::read_to_string(&p)?);
                }
            }
        }
        Ok(vfs)
    }

    pub fn open(&mut self, path: &str) -> Result<Handle, String> {
        let text = self.files.get(path).ok_or_else(|| format!("no such file: {path}"))?;
        *self.opened.entry(path.to_string()).or_default() += 1;
        Ok(Handle { path: path.to_string(), lines: text.lines().map(str::to_string).collect(), next: 0, closed: false })
    }

    /// Closing an already closed handle has no effect.
    pub fn close(&mut self, h: &mut Handle) {
        if !h.closed {
            h.closed = true;
            *self.closed.entry(h.path.clone()).or_default() += 1;
        }
    }

    pub fn open_count(&self, path: &str) -> usize {
        self.opened.get(path).copied().unwrap_or(0)
    }

    pub fn close_count(&self, path: &str) -> usize {
        self.closed.get(path).copied().unwrap_or(0)
    }

    /// Paths opened more often than closed.
    pub fn leaked(&self) -> Vec<String> {
        self.opened.iter().filter(|(p, n)| self.close_count(p) < **n).map(|(p, _)| p.clone()).collect()
    }
}

impl Handle {
    /// Next line, or `None` at end of file.
    pub fn read_line(&mut self) -> Result<Option<String>, String> {
        if self.closed {
            return Err(format!("read from closed handle {}", self.path));
        }
        let line = self.lines.get(self.next).cloned();
        if line.is_some() {
            self.next += 1;
        }
        Ok(line)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn open_read_close() {
        let mut vfs = Vfs::new().with_file("a.txt", "one\ntwo\n");
        let mut h = vfs.open("a.txt").unwrap();
        assert_eq!(h.read_line().unwrap().as_deref(), Some("one"));
        assert_eq!(h.read_line().unwrap().as_deref(), Some("two"));
        assert_eq!(h.read_line().unwrap(), None);
        vfs.close(&mut h);
        vfs.close(&mut h);
        assert_eq!(vfs.close_count("a.txt"), 1);
        assert!(h.read_line().is_err());
        assert!(vfs.leaked().is_empty());
        assert!(vfs.open("missing").is_err());
    }
}
