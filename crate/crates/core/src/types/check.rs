//! Definition-site checking of bodies. Expression regions are handed to the
//! parse engine with the expected type fixed by their statement position.

use std::collections::HashMap;
use std::rc::Rc;

use crate::diag::{Diagnostic, Diagnostics};
use crate::loader::scan::skip_ws;
use crate::loader::Linked;
use crate::parse::{Goal, GoalInterner, ParseStats, Session};
use crate::priority::{merge, PriorityError, PriorityOrder};
use crate::runtime::builtins::is_native;
use crate::syntax::*;

use super::builtins;
use super::scope::{OpTable, OperatorScope};
use super::Infer;

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    pub trace: bool,
}

/// Program-wide facts shared by every body check.
pub struct Compilation<'l> {
    pub linked: &'l Linked,
    pub order: PriorityOrder,
    pub table: OpTable,
    pub scopes: HashMap<FileId, Rc<OperatorScope>>,
    pub options: ParseOptions,
}

impl<'l> Compilation<'l> {
    pub fn new(linked: &'l Linked, options: ParseOptions) -> Result<Self, Diagnostics> {
        let order = priority_order(linked)?;
        let table = OpTable::build(linked, &order);
        let scopes = linked
            .scopes
            .keys()
            .map(|f| (*f, Rc::new(OperatorScope::for_file(linked, &table, *f))))
            .collect();
        Ok(Compilation { linked, order, table, scopes, options })
    }

    pub fn text(&self, file: FileId) -> &'l str {
        self.linked.sources.text(file)
    }
}

/// Merges the priorities of all loaded classes, in load order, with every
/// import-site constraint.
pub fn priority_order(linked: &Linked) -> Result<PriorityOrder, Diagnostics> {
    let decls: Vec<(String, PriorityDecl)> = linked
        .classes
        .iter()
        .filter_map(|c| c.decl.priorities.clone().map(|p| (c.decl.name.clone(), p)))
        .collect();
    let cons: Vec<(QName, QName)> = linked.import_constraints.iter().map(|(a, b, _)| (a.clone(), b.clone())).collect();
    merge(&decls, &cons).map_err(|e| {
        let span = match &e {
            PriorityError::Unknown(q) => linked
                .import_constraints
                .iter()
                .find(|(a, b, _)| a == q || b == q)
                .map(|(_, _, s)| *s),
            PriorityError::Cycle(_) => linked.import_constraints.first().map(|(_, _, s)| *s),
        };
        let span = span.unwrap_or_else(|| {
            let c = linked.classes.iter().find(|c| c.decl.priorities.is_some()).expect("priorities exist");
            c.decl.span
        });
        Diagnostics::from(Diagnostic::error(span, e.to_string()))
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum TypedBodyKind {
    Block(TypedBlock),
    Native(String),
}

/// A checked operator, method, constructor or function body.
#[derive(Debug, Clone, PartialEq)]
pub struct TypedBody {
    pub params: Vec<String>,
    /// Number of implicit frame parameters supplied by a `requires` clause.
    pub frames: usize,
    pub body: TypedBodyKind,
}

#[derive(Debug, Clone, Default)]
pub struct TypedClass {
    pub operators: Vec<TypedBody>,
    pub methods: Vec<TypedBody>,
    pub constructors: Vec<TypedBody>,
}

/// Checker state for one body.
pub struct Checker<'c> {
    pub comp: &'c Compilation<'c>,
    pub file: FileId,
    pub class: Option<ClassId>,
    pub has_this: bool,
    pub tparams: Vec<TypeParam>,
    pub scope: Rc<OperatorScope>,
    pub infer: Infer,
    pub locals: Vec<(String, Type)>,
    pub asm: Vec<Type>,
    pub ret: Type,
    pub stats: ParseStats,
    pub interner: GoalInterner,
    pub trace: Vec<String>,
}

impl<'c> Checker<'c> {
    pub fn new(comp: &'c Compilation<'c>, file: FileId, class: Option<ClassId>, has_this: bool) -> Self {
        let mut tparams = Vec::new();
        if let Some(c) = class {
            tparams.extend(comp.linked.class(c).type_params.iter().cloned());
        }
        Checker {
            comp,
            file,
            class,
            has_this,
            tparams,
            scope: comp.scopes[&file].clone(),
            infer: Infer::new(),
            locals: Vec::new(),
            asm: Vec::new(),
            ret: Type::VOID,
            stats: ParseStats::default(),
            interner: GoalInterner::default(),
            trace: Vec::new(),
        }
    }

    pub fn linked(&self) -> &'c Linked {
        self.comp.linked
    }

    pub fn lookup_local(&self, name: &str) -> Option<&Type> {
        self.locals.iter().rev().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn bound_of(&self, param: &str) -> Option<Type> {
        self.tparams.iter().rev().find(|p| p.name == param).and_then(|p| match &p.kind {
            TypeParamKind::Type { bound } => bound.clone(),
            _ => None,
        })
    }

    /// Declared types must name known classes with the right arity.
    pub fn well_formed(&self, t: &Type, span: Span) -> Result<(), Diagnostic> {
        match t {
            Type::Class { name, args } => {
                let n = name.last();
                let arity = match builtins::class_arity(n) {
                    Some(a) => a,
                    None => match self.linked().class_named(n) {
                        Some(c) => self.linked().class(c).type_params.len(),
                        None => return Err(Diagnostic::error(span, format!("unknown class `{name}`"))),
                    },
                };
                if arity != args.len() {
                    return Err(Diagnostic::error(
                        span,
                        format!("`{n}` expects {arity} type arguments, found {}", args.len()),
                    ));
                }
                args.iter().try_for_each(|a| self.well_formed(a, span))
            }
            Type::Turnstile { assumption, result } => {
                self.well_formed(assumption, span)?;
                self.well_formed(result, span)
            }
            _ => Ok(()),
        }
    }

    pub fn goal(&self, expected: Type) -> Goal {
        Goal { expected, asm: self.asm.clone(), min_rank: 0, literal: false }
    }

    /// Parses a raw region at `expected`; the whole region must be consumed.
    pub fn parse_raw(&mut self, raw: &RawExpr, expected: Type) -> Result<ExprRef, Diagnostic> {
        let text = &self.comp.text(raw.span.file)[..raw.span.end];
        let goal = self.goal(expected.clone());
        self.stats.input_length += raw.span.end - raw.span.start;
        let mut s = Session::new(self, text, raw.span.file);
        match s.parse_goal(raw.span.start, &goal) {
            Some(h) if skip_ws(text, h.end) >= raw.span.end => Ok(h.expr),
            Some(h) if s.furthest() <= h.end => Err(Diagnostic::at(
                raw.span.file,
                skip_ws(text, h.end),
                format!("unexpected input after an expression of type `{}`", s.ck.infer.resolve(&h.ty)),
            )),
            _ => Err(s.failure(raw.span, &expected)),
        }
    }

    /// Expression statements expect `void`, falling back to any value type.
    fn parse_statement(&mut self, raw: &RawExpr) -> Result<ExprRef, Diagnostic> {
        match self.parse_raw(raw, Type::VOID) {
            Ok(e) => Ok(e),
            Err(first) => {
                let any = self.infer.fresh(Kind::Type);
                self.parse_raw(raw, any).map_err(|_| first)
            }
        }
    }

    pub fn check_block(&mut self, b: &Block) -> Result<TypedBlock, Diagnostic> {
        let mark = self.locals.len();
        let result = b.stmts.iter().map(|s| self.check_stmt(s)).collect::<Result<Vec<_>, _>>();
        self.locals.truncate(mark);
        Ok(TypedBlock { stmts: result? })
    }

    fn check_scoped(&mut self, s: &Stmt) -> Result<TypedStmt, Diagnostic> {
        let mark = self.locals.len();
        let r = self.check_stmt(s);
        self.locals.truncate(mark);
        r
    }

    fn check_stmt(&mut self, s: &Stmt) -> Result<TypedStmt, Diagnostic> {
        Ok(match s {
            Stmt::Local { ty, name, init, span } => {
                self.well_formed(ty, *span)?;
                if ty.is_void() {
                    return Err(Diagnostic::error(*span, "a local variable cannot have type void"));
                }
                let init = init.as_ref().map(|r| self.parse_raw(r, ty.clone())).transpose()?;
                self.locals.push((name.clone(), ty.clone()));
                TypedStmt::Local { name: name.clone(), ty: ty.clone(), init }
            }
            Stmt::Expr(raw) => TypedStmt::Expr(self.parse_statement(raw)?),
            Stmt::If { cond, then, els } => TypedStmt::If {
                cond: self.parse_raw(cond, Type::BOOL)?,
                then: Box::new(self.check_scoped(then)?),
                els: els.as_ref().map(|e| self.check_scoped(e).map(Box::new)).transpose()?,
            },
            Stmt::While { cond, body } => TypedStmt::While {
                cond: self.parse_raw(cond, Type::BOOL)?,
                body: Box::new(self.check_scoped(body)?),
            },
            Stmt::ForEach { ty, var, iter, body } => {
                self.well_formed(ty, iter.span)?;
                let iter_e = self.parse_raw(iter, Type::class("List", vec![ty.clone()]))?;
                let mark = self.locals.len();
                self.locals.push((var.clone(), ty.clone()));
                let body = self.check_stmt(body);
                self.locals.truncate(mark);
                TypedStmt::ForEach { var: var.clone(), iter: iter_e, body: Box::new(body?) }
            }
            Stmt::Return { value, span } => {
                let ret = self.ret.clone();
                match value {
                    Some(v) => {
                        if self.infer.shallow(&ret).is_void() {
                            return Err(Diagnostic::error(*span, "cannot return a value from a void body"));
                        }
                        TypedStmt::Return(Some(self.parse_raw(v, ret)?))
                    }
                    None => {
                        if !self.infer.shallow(&ret).is_void() {
                            return Err(Diagnostic::error(*span, format!("missing return value of type `{ret}`")));
                        }
                        TypedStmt::Return(None)
                    }
                }
            }
            Stmt::TryFinally { body, finalizer } => TypedStmt::TryFinally {
                body: self.check_block(body)?,
                finalizer: self.check_block(finalizer)?,
            },
            Stmt::Block(b) => TypedStmt::Block(self.check_block(b)?),
        })
    }

    /// Checks a statement block that forms a context-sensitive operand:
    /// the operand's assumptions replace the stack and `return` leaves the
    /// operand.
    pub fn check_operand_block(&mut self, asm: Vec<Type>, b: &Block) -> Result<TypedBlock, Diagnostic> {
        let saved_asm = std::mem::replace(&mut self.asm, asm);
        let saved_ret = std::mem::replace(&mut self.ret, Type::VOID);
        let r = self.check_block(b);
        self.asm = saved_asm;
        self.ret = saved_ret;
        r
    }

    /// Checks a `fun (T x) { .. }` body; returns the body and result type.
    pub fn check_closure(&mut self, params: &[(String, Type)], b: &Block) -> Result<(TypedBlock, Type), Diagnostic> {
        let result = self.infer.fresh(Kind::Type);
        let saved_ret = std::mem::replace(&mut self.ret, result.clone());
        let mark = self.locals.len();
        self.locals.extend(params.iter().cloned());
        let r = self.check_block(b);
        self.locals.truncate(mark);
        self.ret = saved_ret;
        let body = r?;
        let mut ty = self.infer.resolve(&result);
        if matches!(ty, Type::Var(_)) && !returns_value(&body) {
            ty = Type::Prim(Prim::Unit);
            let _ = self.infer.unify(&result, &ty);
        }
        Ok((body, ty))
    }
}

fn returns_value(b: &TypedBlock) -> bool {
    fn stmt(s: &TypedStmt) -> bool {
        match s {
            TypedStmt::Return(Some(_)) => true,
            TypedStmt::If { then, els, .. } => stmt(then) || els.as_deref().is_some_and(stmt),
            TypedStmt::While { body, .. } | TypedStmt::ForEach { body, .. } => stmt(body),
            TypedStmt::TryFinally { body, finalizer } => returns_value(body) || returns_value(finalizer),
            TypedStmt::Block(b) => returns_value(b),
            _ => false,
        }
    }
    b.stmts.iter().any(stmt)
}

fn param_local(p: &Param) -> (String, Type) {
    let ty = if p.variadic { Type::class("List", vec![p.ty.clone()]) } else { p.ty.clone() };
    (p.name.clone(), ty)
}

/// Shared shape of operator, method and function bodies.
#[allow(clippy::too_many_arguments)]
fn check_body<'c>(
    comp: &'c Compilation<'c>,
    file: FileId,
    class: Option<ClassId>,
    has_this: bool,
    type_params: &[TypeParam],
    params: &[Param],
    requires: &[Type],
    ret: &Type,
    body: &Body,
    span: Span,
) -> Result<(TypedBody, ParseStats), Diagnostic> {
    let mut ck = Checker::new(comp, file, class, has_this);
    ck.tparams.extend(type_params.iter().cloned());
    ck.well_formed(ret, span)?;
    for p in params {
        ck.well_formed(&p.ty, span)?;
        ck.locals.push(param_local(p));
    }
    for r in requires {
        ck.well_formed(r, span)?;
        ck.asm.push(r.clone());
    }
    ck.ret = ret.clone();
    let body = match body {
        Body::Native(n) => {
            if !is_native(n) {
                return Err(Diagnostic::error(span, format!("unknown native body `{n}`")));
            }
            TypedBodyKind::Native(n.clone())
        }
        Body::Block(b) => TypedBodyKind::Block(ck.check_block(b)?),
    };
    let tb = TypedBody { params: params.iter().map(|p| p.name.clone()).collect(), frames: requires.len(), body };
    Ok((tb, ck.stats))
}

/// Checks every body of a class at its definition site.
pub fn check_class<'c>(comp: &'c Compilation<'c>, id: ClassId) -> Result<TypedClass, Diagnostics> {
    let info = &comp.linked.classes[id.0 as usize];
    let c = &info.decl;
    let mut diags = Diagnostics::new();
    let mut out = TypedClass::default();
    for f in &c.fields {
        if let Err(d) = Checker::new(comp, info.file, Some(id), true).well_formed(&f.ty, c.span) {
            diags.push(d);
        }
    }
    for op in &c.operators {
        let has_this = !op.is_static && !op.is_literal;
        match check_body(
            comp, info.file, Some(id), has_this, &op.type_params, &op.params, &op.requires, &op.return_type, &op.body, op.span,
        ) {
            Ok((b, _)) => out.operators.push(b),
            Err(d) => diags.push(d),
        }
    }
    for m in &c.methods {
        match check_body(
            comp, info.file, Some(id), !m.is_static, &m.type_params, &m.params, &m.requires, &m.return_type, &m.body, m.span,
        ) {
            Ok((b, _)) => out.methods.push(b),
            Err(d) => diags.push(d),
        }
    }
    for k in &c.constructors {
        match check_body(comp, info.file, Some(id), true, &[], &k.params, &[], &Type::VOID, &Body::Block(k.body.clone()), k.span) {
            Ok((b, _)) => out.constructors.push(b),
            Err(d) => diags.push(d),
        }
    }
    if diags.is_empty() {
        Ok(out)
    } else {
        Err(diags)
    }
}

/// Free function of a file.
pub fn check_function<'c>(comp: &'c Compilation<'c>, file: FileId, m: &MethodDecl) -> Result<TypedBody, Diagnostic> {
    check_body(comp, file, None, false, &m.type_params, &m.params, &m.requires, &m.return_type, &m.body, m.span)
        .map(|(b, _)| b)
}

/// Every checked body of a linked program.
#[derive(Debug, Clone)]
pub struct CheckedProgram {
    pub classes: Vec<TypedClass>,
    pub functions: HashMap<FileId, Vec<TypedBody>>,
    pub main: Option<TypedBlock>,
    /// Parse statistics of the entry file's main block.
    pub main_stats: ParseStats,
    /// Time spent parsing and checking the entry file's main block.
    pub main_time: std::time::Duration,
    pub trace: Vec<String>,
}

pub fn check_program(linked: &Linked, options: ParseOptions) -> Result<CheckedProgram, Diagnostics> {
    let comp = Compilation::new(linked, options)?;
    let mut diags = Diagnostics::new();
    let mut classes = Vec::new();
    for i in 0..linked.classes.len() {
        match check_class(&comp, ClassId(i as u32)) {
            Ok(c) => classes.push(c),
            Err(d) => {
                diags.extend(d);
                classes.push(TypedClass::default());
            }
        }
    }
    let mut files: Vec<&FileId> = linked.programs.keys().collect();
    files.sort();
    let mut functions = HashMap::new();
    for &file in files {
        let mut out = Vec::new();
        for m in &linked.programs[&file].functions {
            match check_function(&comp, file, m) {
                Ok(b) => out.push(b),
                Err(d) => diags.push(d),
            }
        }
        functions.insert(file, out);
    }
    let mut main = None;
    let mut main_stats = ParseStats::default();
    let mut trace = Vec::new();
    let mut main_time = std::time::Duration::ZERO;
    if let Some(b) = &linked.entry_program().main {
        let started = std::time::Instant::now();
        let mut ck = Checker::new(&comp, linked.entry, None, false);
        let checked = ck.check_block(b);
        main_time = started.elapsed();
        match checked {
            Ok(tb) => main = Some(tb),
            Err(d) => diags.push(d),
        }
        ck.stats.languages_seen = ck.interner.len();
        main_stats = ck.stats;
        trace = ck.trace;
    }
    if diags.is_empty() {
        Ok(CheckedProgram { classes, functions, main, main_stats, main_time, trace })
    } else {
        Err(diags)
    }
}
