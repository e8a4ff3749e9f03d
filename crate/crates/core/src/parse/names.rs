//! Name parts, generic-name operands and literal values.

use crate::loader::scan::{ident_boundary_after, ident_boundary_before, skip_ws};
use crate::syntax::*;
use crate::types::scope::KERNEL_RANK;

use super::{mk, Goal, Hit, Session};

/// Converts a literal-mode parse into a structural name.
pub fn to_name_ast(e: &TypedExpr, text: &str) -> Option<NameAst> {
    match &e.kind {
        ExprKind::OperatorApp { op, args, .. } => {
            let mut children = Vec::new();
            for a in args {
                match a {
                    OpArg::Single(x) => children.push(to_name_ast(x, text)?),
                    OpArg::Many(xs) => {
                        for x in xs {
                            children.push(to_name_ast(x, text)?);
                        }
                    }
                }
            }
            Some(NameAst { op: *op, children, source: text.get(e.start..e.end)?.to_string() })
        }
        ExprKind::NameLit(n) => Some(n.clone()),
        _ => None,
    }
}

impl Session<'_, '_> {
    /// Matches a name part. Normal mode skips whitespace before each word
    /// and keeps identifier-like words from running into neighbours;
    /// literal mode matches the text exactly.
    pub(crate) fn name_part(&mut self, pos: usize, part: &str, literal: bool) -> Option<usize> {
        let text = self.text;
        if literal {
            if text[pos..].starts_with(part) {
                return Some(pos + part.len());
            }
            self.miss_with(pos, || format!("`{part}`"));
            return None;
        }
        let mut p = pos;
        for word in part.split_whitespace() {
            p = skip_ws(text, p);
            let ok = text[p..].starts_with(word)
                && (!word.starts_with(is_ident_char) || ident_boundary_before(text, p))
                && (!word.ends_with(is_ident_char) || ident_boundary_after(text, p + word.len()));
            if !ok {
                self.miss_with(p, || format!("`{part}`"));
                return None;
            }
            p += word.len();
        }
        Some(p)
    }

    /// Parses a generic name of class `name_type` in literal mode.
    pub(crate) fn name_operand(&mut self, pos: usize, name_type: &QName, literal: bool) -> Option<(NameAst, usize)> {
        let text = self.text;
        let p = if literal { pos } else { skip_ws(text, pos) };
        if !literal && !ident_boundary_before(text, p) {
            return None;
        }
        let goal = Goal {
            expected: Type::Class { name: name_type.clone(), args: vec![] },
            asm: vec![],
            min_rank: 0,
            literal: true,
        };
        let h = self.parse_goal(p, &goal)?;
        if !literal && !ident_boundary_after(text, h.end) {
            self.miss(h.end, "end of name");
            return None;
        }
        Some((to_name_ast(&h.expr, text)?, h.end))
    }

    /// A value of a class that has literal operators, written as a name.
    pub(crate) fn literal_value(&mut self, p: usize, expected: &Type) -> Option<Hit> {
        let name = QName::parse(expected.class_name()?)?;
        if !expected.class_args().is_empty() {
            return None;
        }
        let (ast, end) = self.name_operand(p, &name, false)?;
        Some(Hit {
            expr: mk(ExprKind::NameLit(ast), expected.clone(), p, end),
            ty: expected.clone(),
            end,
            prio: 0,
            closed: true,
            rank: KERNEL_RANK,
        })
    }
}
