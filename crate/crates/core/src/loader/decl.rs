//! Declaration grammar: imports, classes, members, types and signatures.

use crate::diag::Diagnostic;
use crate::syntax::*;

use super::scan::{ident_at, Cursor};

pub(crate) struct Reader<'a> {
    pub c: Cursor<'a>,
    /// Type parameters in scope, innermost last.
    pub tparams: Vec<TypeParam>,
}

type R<T> = Result<T, Diagnostic>;

pub(crate) const TURNSTILES: [&str; 3] = ["|-", "|—", "⊢"];

impl<'a> Reader<'a> {
    pub fn new(text: &'a str, file: FileId) -> Self {
        Reader { c: Cursor::new(text, file), tparams: Vec::new() }
    }

    fn lookup_tparam(&self, name: &str) -> Option<&TypeParam> {
        self.tparams.iter().rev().find(|p| p.name == name)
    }

    fn name_param(&self, name: &str) -> bool {
        self.lookup_tparam(name).is_some_and(|p| p.kind() == Kind::Name)
    }

    pub fn read_program(mut self) -> R<Program> {
        let mut program = Program {
            file: self.c.file,
            imports: Vec::new(),
            classes: Vec::new(),
            functions: Vec::new(),
            main: None,
        };
        while !self.c.at_end() {
            if self.c.looking_at_keyword("import") {
                program.imports.push(self.import()?);
            } else if self.c.looking_at_keyword("dsl") || self.c.looking_at_keyword("class") {
                program.classes.push(self.class()?);
            } else if self.c.eat_keyword("main") {
                if program.main.is_some() {
                    return Err(self.c.err("duplicate main block"));
                }
                program.main = Some(self.block()?);
            } else {
                let start = self.c.pos;
                let is_static = self.c.eat_keyword("static");
                match self.member(None, is_static, false, start)? {
                    Member::Method(m) => program.functions.push(m),
                    _ => return Err(crate::diag::Diagnostic::at(self.c.file, start, "expected a method declaration")),
                }
            }
        }
        Ok(program)
    }

    fn import(&mut self) -> R<Import> {
        let start = self.c.pos;
        self.c.eat_keyword("import");
        if !self.c.eat_keyword("dsl") {
            return Err(self.c.err("expected `dsl` after `import`"));
        }
        let dsl = self.qname()?;
        let mut constraints = Vec::new();
        if self.c.eat("{") {
            constraints = self.constraint_chains("}")?;
        }
        self.c.expect(";")?;
        Ok(Import { dsl, constraints, span: self.c.span_from(start) })
    }

    fn qname(&mut self) -> R<QName> {
        let mut segs = vec![self.c.expect_ident("a name")?];
        while self.c.text[self.c.pos..].starts_with('.') && ident_at(self.c.text, self.c.pos + 1).is_some() {
            self.c.pos += 1;
            segs.push(self.c.expect_ident("a name")?);
        }
        QName::new(segs).ok_or_else(|| self.c.err("invalid name"))
    }

    /// `a < b < c, d < e` up to `close`.
    fn constraint_chains(&mut self, close: &str) -> R<Vec<(QName, QName)>> {
        let mut out = Vec::new();
        if self.c.eat(close) {
            return Ok(out);
        }
        loop {
            let mut prev = self.qname()?;
            while self.c.eat("<") {
                let next = self.qname()?;
                out.push((prev, next.clone()));
                prev = next;
            }
            if self.c.eat(",") {
                continue;
            }
            self.c.expect(close)?;
            return Ok(out);
        }
    }

    fn class(&mut self) -> R<ClassDecl> {
        let start = self.c.pos;
        let is_dsl = self.c.eat_keyword("dsl");
        if !is_dsl {
            self.c.eat_keyword("class");
        }
        let name = self.c.expect_ident("a class name")?;
        let type_params = if self.c.looking_at("<") { self.type_params()? } else { Vec::new() };
        let depth = self.tparams.len();
        self.tparams.extend(type_params.iter().cloned());
        let mut class = ClassDecl {
            name,
            is_dsl,
            type_params,
            priorities: None,
            operators: Vec::new(),
            methods: Vec::new(),
            constructors: Vec::new(),
            fields: Vec::new(),
            span: self.c.span_from(start),
        };
        let result = self.class_body(&mut class);
        self.tparams.truncate(depth);
        result?;
        class.span = self.c.span_from(start);
        Ok(class)
    }

    fn class_body(&mut self, class: &mut ClassDecl) -> R<()> {
        self.c.expect("{")?;
        while !self.c.eat("}") {
            if self.c.at_end() {
                return Err(Diagnostic::at(self.c.file, class.span.start, "unbalanced bracket: class body is not closed"));
            }
            let start = self.c.pos;
            if self.c.eat_keyword("priorities") {
                if class.priorities.is_some() {
                    return Err(self.c.err("duplicate priorities declaration"));
                }
                class.priorities = Some(self.priorities()?);
                continue;
            }
            let mut is_private = false;
            let mut is_static = false;
            let mut is_literal = false;
            loop {
                if self.c.eat_keyword("private") {
                    is_private = true;
                } else if self.c.eat_keyword("public") {
                } else if self.c.eat_keyword("static") {
                    is_static = true;
                } else if self.c.eat_keyword("literal") {
                    is_literal = true;
                } else {
                    break;
                }
            }
            if self.c.peek_ident() == Some(class.name.as_str()) {
                let save = self.c.pos;
                self.c.ident();
                if self.c.looking_at("(") {
                    let params = self.params()?;
                    self.skip_throws()?;
                    let body = self.block()?;
                    class.constructors.push(CtorDecl { params, body, span: self.c.span_from(start) });
                    continue;
                }
                self.c.pos = save;
            }
            match self.member(Some(&class.name), is_static, is_literal, start)? {
                Member::Field(name, ty) => class.fields.push(FieldDecl { name, ty, is_private }),
                Member::Method(m) => class.methods.push(m),
                Member::Operator(o) => class.operators.push(o),
            }
        }
        Ok(())
    }

    fn priorities(&mut self) -> R<PriorityDecl> {
        let mut names = Vec::new();
        loop {
            let n = self.c.expect_ident("a priority name")?;
            if names.contains(&n) {
                return Err(self.c.err(format!("duplicate priority name `{n}`")));
            }
            names.push(n);
            if !self.c.eat(",") {
                break;
            }
        }
        let constraints = if self.c.eat("{") { self.constraint_chains("}")? } else { Vec::new() };
        self.c.eat(";");
        Ok(PriorityDecl { names, constraints })
    }

    pub fn type_params(&mut self) -> R<Vec<TypeParam>> {
        self.c.expect("<")?;
        let mut out: Vec<TypeParam> = Vec::new();
        loop {
            let name = self.c.expect_ident("a type parameter")?;
            let kind = if self.c.eat_keyword("extends") {
                TypeParamKind::Type { bound: Some(self.type_expr()?) }
            } else if self.c.eat(":") {
                TypeParamKind::Name { name_type: self.qname()? }
            } else {
                TypeParamKind::Type { bound: None }
            };
            out.push(TypeParam { name, kind });
            if !self.c.eat(",") {
                break;
            }
        }
        self.c.expect(">")?;
        Ok(out)
    }

    /// A class, primitive or parameter type (no turnstile).
    pub fn type_expr(&mut self) -> R<Type> {
        let start = self.c.pos;
        let name = self.qname()?;
        if name.is_simple() {
            if let Some(p) = Prim::from_keyword(name.last()) {
                return Ok(Type::Prim(p));
            }
            if let Some(tp) = self.lookup_tparam(name.last()) {
                return Ok(Type::Param { name: tp.name.clone(), kind: tp.kind() });
            }
        }
        let mut args = Vec::new();
        if self.c.looking_at("<") {
            self.c.eat("<");
            loop {
                args.push(self.type_expr()?);
                if !self.c.eat(",") {
                    break;
                }
            }
            self.c.expect(">")?;
        }
        let first = name.segments()[0].chars().next().unwrap_or('a');
        if !first.is_ascii_uppercase() {
            return Err(Diagnostic::at(self.c.file, start, format!("unknown type `{name}`")));
        }
        Ok(Type::Class { name, args })
    }

    /// A parameter type, possibly `S |- T`.
    pub fn param_type(&mut self) -> R<Type> {
        let base = self.type_expr()?;
        for t in TURNSTILES {
            if self.c.eat(t) {
                let result = self.type_expr()?;
                return Ok(Type::turnstile(base, result));
            }
        }
        Ok(base)
    }

    pub fn params(&mut self) -> R<Vec<Param>> {
        self.c.expect("(")?;
        let mut out = Vec::new();
        if self.c.eat(")") {
            return Ok(out);
        }
        loop {
            let ty = self.param_type()?;
            let variadic = self.c.eat("...");
            let name = self.c.expect_ident("a parameter name")?;
            out.push(Param { name, ty, variadic });
            if !self.c.eat(",") {
                break;
            }
        }
        self.c.expect(")")?;
        Ok(out)
    }

    fn skip_throws(&mut self) -> R<()> {
        if self.c.eat_keyword("throws") {
            loop {
                self.qname()?;
                if !self.c.eat(",") {
                    break;
                }
            }
        }
        Ok(())
    }

    fn requires(&mut self) -> R<Vec<Type>> {
        let mut out = Vec::new();
        if self.c.eat_keyword("requires") {
            loop {
                let t = self.type_expr()?;
                if !matches!(t, Type::Class { .. }) {
                    return Err(self.c.err("requires clause lists class types"));
                }
                out.push(t);
                if !self.c.eat(",") {
                    break;
                }
            }
        }
        Ok(out)
    }

    fn body(&mut self) -> R<Body> {
        if self.c.eat_keyword("native") {
            let name = self.c.string_lit().ok_or_else(|| self.c.err("expected native name"))?;
            self.c.expect(";")?;
            Ok(Body::Native(name))
        } else {
            Ok(Body::Block(self.block()?))
        }
    }

    /// Field, method or operator after modifiers.
    fn member(&mut self, class: Option<&str>, is_static: bool, is_literal: bool, start: usize) -> R<Member> {
        let depth = self.tparams.len();
        let result = self.member_inner(class, is_static, is_literal, start);
        self.tparams.truncate(depth);
        result
    }

    fn member_inner(&mut self, class: Option<&str>, is_static: bool, is_literal: bool, start: usize) -> R<Member> {
        let type_params = if self.c.looking_at("<") { self.type_params()? } else { Vec::new() };
        self.tparams.extend(type_params.iter().cloned());
        let return_type = self.type_expr()?;
        let priority = if self.c.eat("[") {
            let q = self.qname()?;
            self.c.expect("]")?;
            Some(q)
        } else {
            None
        };
        if priority.is_none() {
            if let Some(id) = self.c.peek_ident() {
                if id != "_" && !self.name_param(id) {
                    self.c.ident();
                    if self.c.eat(";") {
                        if !type_params.is_empty() || is_static || is_literal {
                            return Err(Diagnostic::at(self.c.file, start, "invalid field declaration"));
                        }
                        return Ok(Member::Field(id.to_string(), return_type));
                    }
                    let params = self.params()?;
                    let requires = self.requires()?;
                    self.skip_throws()?;
                    let body = self.body()?;
                    let m = MethodDecl {
                        is_static: is_static || class.is_none(),
                        name: id.to_string(),
                        type_params,
                        params,
                        return_type,
                        requires,
                        body,
                        span: self.c.span_from(start),
                    };
                    check_method(&m)?;
                    return Ok(Member::Method(m));
                }
            }
        }
        let mut syntax = Vec::new();
        while !self.c.looking_at("(") {
            if self.c.at_end() {
                return Err(self.c.err("unterminated operator syntax"));
            }
            if let Some(text) = self.c.string_lit() {
                if text.is_empty() {
                    return Err(self.c.err("empty name part"));
                }
                syntax.push(SyntaxElem::NamePart(text));
            } else if self.c.peek_ident() == Some("_") {
                self.c.ident();
                let repetition = if self.c.text[self.c.pos..].starts_with('*') {
                    self.c.pos += 1;
                    Repetition::Star
                } else if self.c.text[self.c.pos..].starts_with('+') {
                    self.c.pos += 1;
                    Repetition::Plus
                } else {
                    Repetition::One
                };
                let priority = if self.c.eat("[") {
                    let q = self.qname()?;
                    self.c.expect("]")?;
                    Some(q)
                } else {
                    None
                };
                syntax.push(SyntaxElem::Operand { priority, repetition });
            } else if let Some(id) = self.c.peek_ident() {
                if !self.name_param(id) {
                    return Err(self.c.err(format!("`{id}` is not a name parameter")));
                }
                self.c.ident();
                syntax.push(SyntaxElem::NameOperand(id.to_string()));
            } else {
                return Err(self.c.err("expected a name part, `_` or a name parameter"));
            }
        }
        let params = self.params()?;
        let requires = self.requires()?;
        self.skip_throws()?;
        let body = self.body()?;
        let op = OperatorDecl {
            is_static: is_static || class.is_none(),
            is_literal,
            priority,
            type_params,
            return_type,
            syntax,
            params,
            requires,
            body,
            span: self.c.span_from(start),
        };
        check_operator(&op).map_err(|m| Diagnostic::at(self.c.file, start, m))?;
        Ok(Member::Operator(op))
    }
}

enum Member {
    Field(String, Type),
    Method(MethodDecl),
    Operator(OperatorDecl),
}

fn check_method(m: &MethodDecl) -> R<()> {
    if m.return_type.has_nested_turnstile() || matches!(m.return_type, Type::Turnstile { .. }) {
        return Err(Diagnostic::error(m.span, "turnstile types are only allowed as parameter types"));
    }
    for p in &m.params {
        if p.ty.has_nested_turnstile() {
            return Err(Diagnostic::error(m.span, "turnstile types cannot be nested"));
        }
    }
    Ok(())
}

/// Structural validity of an operator signature.
pub fn check_operator(op: &OperatorDecl) -> Result<(), String> {
    if op.syntax.is_empty() {
        return Err("operator syntax is empty".into());
    }
    let operands: Vec<&SyntaxElem> = op.syntax.iter().filter(|e| e.is_operand()).collect();
    if operands.len() != op.params.len() {
        return Err(format!(
            "operator has {} operands but {} parameters",
            operands.len(),
            op.params.len()
        ));
    }
    let repeats = operands
        .iter()
        .filter(|e| matches!(e, SyntaxElem::Operand { repetition: Repetition::Star | Repetition::Plus, .. }))
        .count();
    let mismatched = operands.iter().zip(&op.params).any(|(e, p)| {
        matches!(e, SyntaxElem::Operand { repetition: Repetition::Star | Repetition::Plus, .. }) != p.variadic
    });
    if mismatched {
        return Err("repeated operands must correspond to variadic parameters".into());
    }
    if repeats > 1 {
        return Err("at most one repeated operand is allowed".into());
    }
    if matches!(op.return_type, Type::Turnstile { .. }) || op.return_type.has_nested_turnstile() {
        return Err("turnstile types are only allowed as parameter types".into());
    }
    if op.params.iter().any(|p| p.ty.has_nested_turnstile()) {
        return Err("turnstile types cannot be nested".into());
    }
    let mut seen = Vec::new();
    for e in &op.syntax {
        if let SyntaxElem::NameOperand(n) = e {
            if seen.contains(&n) {
                return Err(format!("name parameter `{n}` occurs more than once"));
            }
            seen.push(n);
        }
    }
    if op.is_literal && op.params.iter().any(|p| matches!(p.ty, Type::Turnstile { .. })) {
        return Err("literal operators cannot take context-sensitive operands".into());
    }
    Ok(())
}

/// Reads a lone operator signature (no body), as produced by `render_operator`.
pub fn read_signature(text: &str, class_params: &[TypeParam]) -> Result<OperatorDecl, Diagnostic> {
    let mut src = text.trim().to_string();
    src.push_str(" native \"_\";");
    let mut r = Reader::new(&src, FileId(0));
    r.tparams.extend(class_params.iter().cloned());
    let start = r.c.pos;
    let mut is_static = false;
    let mut is_literal = false;
    loop {
        if r.c.eat_keyword("static") {
            is_static = true;
        } else if r.c.eat_keyword("literal") {
            is_literal = true;
        } else {
            break;
        }
    }
    match r.member(Some("_"), is_static, is_literal, start)? {
        Member::Operator(o) => Ok(o),
        _ => Err(Diagnostic::at(FileId(0), 0, "not an operator signature")),
    }
}
