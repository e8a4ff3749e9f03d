//! Character-level scanning shared by the declaration reader and the
//! expression parser.

use crate::diag::Diagnostic;
use crate::syntax::{is_ident_char, is_ident_start, FileId, Span};

/// Skips whitespace and `//` / `/* */` comments.
pub fn skip_ws(text: &str, mut pos: usize) -> usize {
    let bytes = text.as_bytes();
    loop {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if text[pos..].starts_with("//") {
            pos = text[pos..].find('\n').map_or(text.len(), |i| pos + i + 1);
        } else if text[pos..].starts_with("/*") {
            pos = text[pos + 2..].find("*/").map_or(text.len(), |i| pos + 2 + i + 2);
        } else {
            return pos;
        }
    }
}

/// True when `pos` is not inside an identifier continuing from the left.
pub fn ident_boundary_before(text: &str, pos: usize) -> bool {
    text[..pos].chars().next_back().is_none_or(|c| !is_ident_char(c))
}

pub fn ident_boundary_after(text: &str, pos: usize) -> bool {
    text[pos..].chars().next().is_none_or(|c| !is_ident_char(c))
}

pub fn ident_at(text: &str, pos: usize) -> Option<&str> {
    let rest = &text[pos..];
    let mut chars = rest.char_indices();
    match chars.next() {
        Some((_, c)) if is_ident_start(c) => {}
        _ => return None,
    }
    let end = chars.find(|&(_, c)| !is_ident_char(c)).map_or(rest.len(), |(i, _)| i);
    Some(&rest[..end])
}

/// Reads a double-quoted literal starting at `pos`; returns the decoded
/// text and the position after the closing quote.
pub fn string_lit_at(text: &str, pos: usize) -> Option<(String, usize)> {
    let rest = text.get(pos..)?;
    if !rest.starts_with('"') {
        return None;
    }
    let mut out = String::new();
    let mut chars = rest.char_indices().skip(1);
    while let Some((i, c)) = chars.next() {
        match c {
            '"' => return Some((out, pos + i + 1)),
            '\\' => {
                let (_, e) = chars.next()?;
                out.push(match e {
                    'n' => '\n',
                    't' => '\t',
                    '0' => '\0',
                    other => other,
                });
            }
            '\n' => return None,
            other => out.push(other),
        }
    }
    None
}

/// Position of the bracket closing the one at `open`, skipping strings and
/// comments.
pub fn matching_close(text: &str, open: usize) -> Option<usize> {
    let bytes = text.as_bytes();
    let mut stack = vec![bytes[open]];
    let mut pos = open + 1;
    while pos < bytes.len() {
        match bytes[pos] {
            b'"' => {
                pos = string_lit_at(text, pos)?.1;
                continue;
            }
            b'/' if text[pos..].starts_with("//") || text[pos..].starts_with("/*") => {
                pos = skip_ws(text, pos);
                continue;
            }
            b @ (b'(' | b'[' | b'{') => stack.push(b),
            b @ (b')' | b']' | b'}') => {
                let open_b = stack.pop()?;
                if closer(open_b) != b {
                    return None;
                }
                if stack.is_empty() {
                    return Some(pos);
                }
            }
            _ => {}
        }
        pos += 1;
    }
    None
}

fn closer(open: u8) -> u8 {
    match open {
        b'(' => b')',
        b'[' => b']',
        _ => b'}',
    }
}

/// End of an expression starting at `pos`: the first `;` or unmatched
/// closing bracket at nesting depth zero.
pub fn expr_end(text: &str, pos: usize) -> Result<usize, usize> {
    let bytes = text.as_bytes();
    let mut p = pos;
    while p < bytes.len() {
        match bytes[p] {
            b'"' => {
                p = string_lit_at(text, p).ok_or(p)?.1;
                continue;
            }
            b'/' if text[p..].starts_with("//") || text[p..].starts_with("/*") => {
                p = skip_ws(text, p);
                continue;
            }
            b'(' | b'[' | b'{' => {
                p = matching_close(text, p).ok_or(p)? + 1;
                continue;
            }
            b';' | b')' | b']' | b'}' => return Ok(p),
            _ => {}
        }
        p += 1;
    }
    Ok(p)
}

pub struct Cursor<'a> {
    pub text: &'a str,
    pub pos: usize,
    pub file: FileId,
}

impl<'a> Cursor<'a> {
    pub fn new(text: &'a str, file: FileId) -> Self {
        Cursor { text, pos: 0, file }
    }

    pub fn at(text: &'a str, file: FileId, pos: usize) -> Self {
        Cursor { text, pos, file }
    }

    pub fn ws(&mut self) {
        self.pos = skip_ws(self.text, self.pos);
    }

    pub fn at_end(&mut self) -> bool {
        self.ws();
        self.pos >= self.text.len()
    }

    pub fn peek(&mut self) -> Option<char> {
        self.ws();
        self.text[self.pos..].chars().next()
    }

    pub fn looking_at(&mut self, s: &str) -> bool {
        self.ws();
        self.text[self.pos..].starts_with(s)
    }

    pub fn eat(&mut self, s: &str) -> bool {
        if self.looking_at(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    pub fn looking_at_keyword(&mut self, kw: &str) -> bool {
        self.ws();
        self.text[self.pos..].starts_with(kw) && ident_boundary_after(self.text, self.pos + kw.len())
    }

    pub fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.looking_at_keyword(kw) {
            self.pos += kw.len();
            true
        } else {
            false
        }
    }

    pub fn peek_ident(&mut self) -> Option<&'a str> {
        self.ws();
        ident_at(self.text, self.pos)
    }

    pub fn ident(&mut self) -> Option<String> {
        let id = self.peek_ident()?;
        self.pos += id.len();
        Some(id.to_string())
    }

    pub fn expect_ident(&mut self, what: &str) -> Result<String, Diagnostic> {
        self.ident().ok_or_else(|| self.err(format!("expected {what}")))
    }

    pub fn string_lit(&mut self) -> Option<String> {
        self.ws();
        let (s, end) = string_lit_at(self.text, self.pos)?;
        self.pos = end;
        Some(s)
    }

    pub fn expect(&mut self, s: &str) -> Result<(), Diagnostic> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{s}`")))
        }
    }

    pub fn err(&self, msg: impl Into<String>) -> Diagnostic {
        Diagnostic::at(self.file, self.pos, msg)
    }

    pub fn span_from(&self, start: usize) -> Span {
        Span::new(self.file, start, self.pos)
    }

    /// Consumes a bracketed region starting at the current `(`, `[` or `{`,
    /// returning the inner span.
    pub fn bracketed(&mut self) -> Result<Span, Diagnostic> {
        self.ws();
        let open = self.pos;
        let close = matching_close(self.text, open)
            .ok_or_else(|| Diagnostic::at(self.file, open, "unbalanced bracket"))?;
        self.pos = close + 1;
        Ok(Span::new(self.file, open + 1, close))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ws_and_comments() {
        let t = "  // c\n /* x */ a";
        assert_eq!(skip_ws(t, 0), t.len() - 1);
    }

    #[test]
    fn strings_decode_escapes() {
        assert_eq!(string_lit_at(r#""a\"b" x"#, 0), Some(("a\"b".to_string(), 6)));
        assert_eq!(string_lit_at("\"open", 0), None);
    }

    #[test]
    fn bracket_matching_skips_strings() {
        let t = r#"{ "}" ( ) }x"#;
        assert_eq!(matching_close(t, 0), Some(t.len() - 2));
        assert_eq!(matching_close("(]", 0), None);
    }

    #[test]
    fn expr_end_respects_nesting() {
        let t = "fold-for (a = 0; i : xs) { a = a + i };rest";
        assert_eq!(expr_end(t, 0), Ok(t.find(";rest").unwrap()));
        assert_eq!(expr_end("it = it + 1 }", 0), Ok(12));
    }

    #[test]
    fn keyword_boundaries() {
        let mut c = Cursor::new("iffy if", FileId(0));
        assert!(!c.eat_keyword("if"));
        assert_eq!(c.ident().as_deref(), Some("iffy"));
        assert!(c.eat_keyword("if"));
    }
}
