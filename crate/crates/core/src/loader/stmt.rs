//! Statement grammar. Expression positions become raw spans.

use crate::diag::Diagnostic;
use crate::syntax::*;

use super::decl::Reader;
use super::scan::{expr_end, Cursor};

type R<T> = Result<T, Diagnostic>;

impl<'a> Reader<'a> {
    pub fn block(&mut self) -> R<Block> {
        self.c.ws();
        let start = self.c.pos;
        if !self.c.eat("{") {
            return Err(self.c.err("expected `{`"));
        }
        let mut stmts = Vec::new();
        loop {
            if self.c.eat("}") {
                break;
            }
            if self.c.at_end() {
                return Err(Diagnostic::at(self.c.file, start, "unbalanced bracket: block is not closed"));
            }
            if self.c.eat(";") {
                continue;
            }
            stmts.push(self.stmt()?);
        }
        Ok(Block { stmts, span: self.c.span_from(start) })
    }

    fn paren_expr(&mut self, context: ExprContext) -> R<RawExpr> {
        self.c.ws();
        if !self.c.looking_at("(") {
            return Err(self.c.err("expected `(`"));
        }
        let inner = self.c.bracketed()?;
        Ok(RawExpr { span: inner, context })
    }

    fn raw_expr(&mut self, context: ExprContext) -> R<RawExpr> {
        self.c.ws();
        let start = self.c.pos;
        let end = expr_end(self.c.text, start).map_err(|p| Diagnostic::at(self.c.file, p, "unbalanced bracket"))?;
        let mut trimmed = end;
        while trimmed > start && self.c.text.as_bytes()[trimmed - 1].is_ascii_whitespace() {
            trimmed -= 1;
        }
        if trimmed == start {
            return Err(self.c.err("expected an expression"));
        }
        self.c.pos = end;
        Ok(RawExpr { span: Span::new(self.c.file, start, trimmed), context })
    }

    /// Ends an expression statement: `;` or the enclosing `}`.
    fn stmt_end(&mut self) -> R<()> {
        if self.c.eat(";") || self.c.looking_at("}") {
            Ok(())
        } else {
            Err(self.c.err("expected `;`"))
        }
    }

    /// `if`, `while` and `for` only start a statement when an opening
    /// parenthesis follows, so user syntax such as `if-exists (..)` or
    /// `for each` stays an expression.
    fn control_keyword(&mut self, kw: &str) -> bool {
        let save = self.c.pos;
        if self.c.eat_keyword(kw) && self.c.looking_at("(") {
            return true;
        }
        self.c.pos = save;
        false
    }

    pub fn stmt(&mut self) -> R<Stmt> {
        self.c.ws();
        let start = self.c.pos;
        if self.c.looking_at("{") {
            return Ok(Stmt::Block(self.block()?));
        }
        if self.control_keyword("if") {
            let cond = self.paren_expr(ExprContext::Condition)?;
            let then = Box::new(self.stmt()?);
            let els = if self.c.eat_keyword("else") { Some(Box::new(self.stmt()?)) } else { None };
            return Ok(Stmt::If { cond, then, els });
        }
        if self.control_keyword("while") {
            let cond = self.paren_expr(ExprContext::Condition)?;
            let body = Box::new(self.stmt()?);
            return Ok(Stmt::While { cond, body });
        }
        if self.control_keyword("for") {
            self.c.expect("(")?;
            let ty = self.type_expr()?;
            let var = self.c.expect_ident("a loop variable")?;
            self.c.expect(":")?;
            let iter = self.raw_expr(ExprContext::Iterable)?;
            self.c.expect(")")?;
            let body = Box::new(self.stmt()?);
            return Ok(Stmt::ForEach { ty, var, iter, body });
        }
        if self.c.eat_keyword("return") {
            let value = if self.c.looking_at(";") || self.c.looking_at("}") {
                None
            } else {
                Some(self.raw_expr(ExprContext::Return)?)
            };
            self.stmt_end()?;
            return Ok(Stmt::Return { value, span: self.c.span_from(start) });
        }
        if self.c.looking_at_keyword("try") {
            let save = self.c.pos;
            self.c.eat_keyword("try");
            if self.c.looking_at("{") {
                let body = self.block()?;
                if !self.c.eat_keyword("finally") {
                    return Err(self.c.err("expected `finally`"));
                }
                let finalizer = self.block()?;
                return Ok(Stmt::TryFinally { body, finalizer });
            }
            self.c.pos = save;
        }
        if let Some((ty, name)) = self.local_head() {
            let init = if self.c.eat("=") { Some(self.raw_expr(ExprContext::LocalInit)?) } else { None };
            self.stmt_end()?;
            return Ok(Stmt::Local { ty, name, init, span: self.c.span_from(start) });
        }
        let e = self.raw_expr(ExprContext::Statement)?;
        self.stmt_end()?;
        Ok(Stmt::Expr(e))
    }

    /// `Type name` followed by `=` or `;`, where the type is recognisably a
    /// type: a primitive keyword, a capitalised name, or a type parameter.
    fn local_head(&mut self) -> Option<(Type, String)> {
        let save = self.c.pos;
        let first = self.c.peek_ident()?;
        let plausible = Prim::from_keyword(first).is_some()
            || first.starts_with(|c: char| c.is_ascii_uppercase())
            || self.tparams.iter().any(|p| p.name == first);
        if plausible {
            if let Ok(ty) = self.type_expr() {
                if let Some(name) = self.c.ident() {
                    let eq = self.c.looking_at("=") && !self.c.looking_at("==");
                    if eq || self.c.looking_at(";") {
                        return Some((ty, name));
                    }
                }
            }
        }
        self.c.pos = save;
        None
    }
}

/// Reads the block starting at `pos` (which must be `{`), with the given
/// type parameters in scope. Returns the block and the position after it.
pub fn read_block_at(text: &str, file: FileId, pos: usize, tparams: &[TypeParam]) -> Result<(Block, usize), Diagnostic> {
    let mut r = Reader { c: Cursor::at(text, file, pos), tparams: tparams.to_vec() };
    let b = r.block()?;
    Ok((b, r.c.pos))
}

/// Reads a type expression at `pos`; used by kernel expressions such as
/// `new C<T>(..)` and closure parameters.
pub fn read_type_at(text: &str, file: FileId, pos: usize, tparams: &[TypeParam]) -> Option<(Type, usize)> {
    let mut r = Reader { c: Cursor::at(text, file, pos), tparams: tparams.to_vec() };
    let t = r.type_expr().ok()?;
    Some((t, r.c.pos))
}
