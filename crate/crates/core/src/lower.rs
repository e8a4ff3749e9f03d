//! Lowering of checked programs to a small core language in which every
//! context-sensitive operand is an ordinary one-parameter closure.

use std::collections::HashMap;
use std::fmt;

use crate::loader::Linked;
use crate::syntax::*;
use crate::types::check::{CheckedProgram, TypedBody, TypedBodyKind};

#[derive(Debug, Clone, PartialEq)]
pub enum Lit {
    Int(i64),
    Bool(bool),
    Str(String),
    Unit,
    Null,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CallTarget {
    Operator(OpId),
    Method { class: ClassId, index: usize },
    Function { file: FileId, index: usize },
    Builtin(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Core {
    Lit(Lit),
    Get(String),
    Set(String, Box<Core>),
    Decl(String, Option<Box<Core>>),
    This,
    GetField(Box<Core>, usize),
    SetField(Box<Core>, usize, Box<Core>),
    New(NewTarget, Vec<Core>),
    Call { target: CallTarget, receiver: Option<Box<Core>>, args: Vec<Core> },
    Lam(String, Box<Core>),
    App(Box<Core>, Box<Core>),
    List(Vec<Core>),
    Seq(Vec<Core>),
    If(Box<Core>, Box<Core>, Option<Box<Core>>),
    While(Box<Core>, Box<Core>),
    ForEach(String, Box<Core>, Box<Core>),
    Return(Option<Box<Core>>),
    TryFinally(Box<Core>, Box<Core>),
}

impl Core {
    pub fn str(s: &str) -> Core {
        Core::Lit(Lit::Str(s.to_string()))
    }

    pub fn int(v: i64) -> Core {
        Core::Lit(Lit::Int(v))
    }

    pub fn get(n: &str) -> Core {
        Core::Get(n.to_string())
    }

    pub fn lam(param: &str, body: Core) -> Core {
        Core::Lam(param.to_string(), Box::new(body))
    }

    pub fn app(f: Core, a: Core) -> Core {
        Core::App(Box::new(f), Box::new(a))
    }

    pub fn call(target: CallTarget, receiver: Option<Core>, args: Vec<Core>) -> Core {
        Core::Call { target, receiver: receiver.map(Box::new), args }
    }
}

/// Runtime variable holding the assumption-stack frame at `depth`.
pub fn frame_var(depth: usize) -> String {
    format!("$f{depth}")
}

#[derive(Debug, Clone, PartialEq)]
pub enum CoreBodyKind {
    Block(Core),
    Native(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoreBody {
    /// Used as fault provenance.
    pub name: String,
    /// Declared parameters followed by the frame parameters.
    pub params: Vec<String>,
    pub body: CoreBodyKind,
}

#[derive(Debug, Clone, Default)]
pub struct CoreClass {
    pub name: String,
    /// Field names with their initial values.
    pub fields: Vec<(String, Lit)>,
    pub operators: Vec<CoreBody>,
    pub methods: Vec<CoreBody>,
    pub constructors: Vec<CoreBody>,
}

#[derive(Debug, Clone, Default)]
pub struct CoreProgram {
    pub classes: Vec<CoreClass>,
    /// Operator id to (class, declaration index).
    pub ops: Vec<(ClassId, usize)>,
    pub functions: HashMap<FileId, Vec<CoreBody>>,
    pub main: Option<Core>,
}

impl CoreProgram {
    pub fn op(&self, op: OpId) -> &CoreBody {
        let (c, i) = self.ops[op.0 as usize];
        &self.classes[c.0 as usize].operators[i]
    }
}

fn op_label(decl: &OperatorDecl) -> String {
    decl.syntax
        .iter()
        .map(|e| match e {
            SyntaxElem::NamePart(t) => format!("{t:?}"),
            SyntaxElem::Operand { .. } => "_".to_string(),
            SyntaxElem::NameOperand(n) => n.clone(),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

struct Lowerer {
    depth: usize,
}

impl Lowerer {
    fn expr(&mut self, e: &TypedExpr) -> Core {
        match &e.kind {
            ExprKind::Int(v) => Core::Lit(Lit::Int(*v)),
            ExprKind::Str(s) => Core::Lit(Lit::Str(s.clone())),
            ExprKind::Bool(b) => Core::Lit(Lit::Bool(*b)),
            ExprKind::Null => Core::Lit(Lit::Null),
            ExprKind::Local(n) => Core::Get(n.clone()),
            ExprKind::This => Core::This,
            ExprKind::Field { object, index, .. } => Core::GetField(Box::new(self.expr(object)), *index),
            ExprKind::New { target, args } => Core::New(target.clone(), self.exprs(args)),
            ExprKind::MethodCall { receiver, target, args, frames } => {
                let mut a = self.exprs(args);
                a.extend(frames.iter().map(|d| Core::Get(frame_var(*d))));
                let target = match target {
                    MethodTarget::User { class, index } => CallTarget::Method { class: *class, index: *index },
                    MethodTarget::Function { file, index } => CallTarget::Function { file: *file, index: *index },
                    MethodTarget::Builtin(k) => CallTarget::Builtin(k),
                };
                let receiver = receiver.as_ref().map(|r| Box::new(self.expr(r)));
                Core::Call { target, receiver, args: a }
            }
            ExprKind::ApplyTurnstile { receiver, arg } => Core::app(self.expr(receiver), self.expr(arg)),
            ExprKind::Closure { params, body } => Core::Lam(params[0].0.clone(), Box::new(self.block(body))),
            ExprKind::Assign { target, value } => {
                let v = Box::new(self.expr(value));
                match target {
                    AssignTarget::Local(n) => Core::Set(n.clone(), v),
                    AssignTarget::Field { object, index, .. } => Core::SetField(Box::new(self.expr(object)), *index, v),
                }
            }
            ExprKind::OperatorApp { op, args, frame, req_frames, .. } => {
                let mut a = Vec::new();
                for arg in args {
                    match arg {
                        OpArg::Single(x) => a.push(self.expr(x)),
                        OpArg::Many(xs) => a.push(Core::List(self.exprs(xs))),
                    }
                }
                a.extend(req_frames.iter().map(|d| Core::Get(frame_var(*d))));
                let receiver = frame.map(|d| Box::new(Core::Get(frame_var(d))));
                Core::Call { target: CallTarget::Operator(*op), receiver, args: a }
            }
            ExprKind::ContextOperand { body, .. } => {
                let param = frame_var(self.depth);
                self.depth += 1;
                let b = match body.as_ref() {
                    ContextBody::Expr(x) => self.expr(x),
                    ContextBody::Block(b) => self.block(b),
                };
                self.depth -= 1;
                Core::Lam(param, Box::new(b))
            }
            ExprKind::NameLit(n) => Core::Lit(Lit::Str(erase_name(n, 0).0)),
        }
    }

    fn exprs(&mut self, es: &[ExprRef]) -> Vec<Core> {
        es.iter().map(|e| self.expr(e)).collect()
    }

    fn block(&mut self, b: &TypedBlock) -> Core {
        Core::Seq(b.stmts.iter().map(|s| self.stmt(s)).collect())
    }

    fn stmt(&mut self, s: &TypedStmt) -> Core {
        match s {
            TypedStmt::Local { name, init, .. } => Core::Decl(name.clone(), init.as_ref().map(|e| Box::new(self.expr(e)))),
            TypedStmt::Expr(e) => self.expr(e),
            TypedStmt::If { cond, then, els } => Core::If(
                Box::new(self.expr(cond)),
                Box::new(self.scoped(then)),
                els.as_ref().map(|e| Box::new(self.scoped(e))),
            ),
            TypedStmt::While { cond, body } => Core::While(Box::new(self.expr(cond)), Box::new(self.scoped(body))),
            TypedStmt::ForEach { var, iter, body } => {
                Core::ForEach(var.clone(), Box::new(self.expr(iter)), Box::new(self.scoped(body)))
            }
            TypedStmt::Return(v) => Core::Return(v.as_ref().map(|e| Box::new(self.expr(e)))),
            TypedStmt::TryFinally { body, finalizer } => {
                Core::TryFinally(Box::new(self.block(body)), Box::new(self.block(finalizer)))
            }
            TypedStmt::Block(b) => self.block(b),
        }
    }

    /// Branch and loop bodies get their own scope even when they are a
    /// single statement.
    fn scoped(&mut self, s: &TypedStmt) -> Core {
        match self.stmt(s) {
            c @ Core::Seq(_) => c,
            c => Core::Seq(vec![c]),
        }
    }
}

pub fn lower_expr(e: &TypedExpr, depth: usize) -> Core {
    Lowerer { depth }.expr(e)
}

pub fn lower_block(b: &TypedBlock, depth: usize) -> Core {
    Lowerer { depth }.block(b)
}

fn lower_body(name: String, b: &TypedBody) -> CoreBody {
    let mut params = b.params.clone();
    params.extend((0..b.frames).map(frame_var));
    let body = match &b.body {
        TypedBodyKind::Block(tb) => CoreBodyKind::Block(lower_block(tb, b.frames)),
        TypedBodyKind::Native(n) => CoreBodyKind::Native(n.clone()),
    };
    CoreBody { name, params, body }
}

fn default_value(t: &Type) -> Lit {
    match t {
        Type::Prim(Prim::Int) => Lit::Int(0),
        Type::Prim(Prim::Bool) => Lit::Bool(false),
        _ => Lit::Null,
    }
}

pub fn lower_program(linked: &Linked, checked: &CheckedProgram) -> CoreProgram {
    let mut classes = Vec::new();
    for (info, tc) in linked.classes.iter().zip(&checked.classes) {
        let c = &info.decl;
        let operators = c
            .operators
            .iter()
            .zip(&tc.operators)
            .map(|(d, b)| lower_body(format!("{}.{}", c.name, op_label(d)), b))
            .collect();
        let methods =
            c.methods.iter().zip(&tc.methods).map(|(m, b)| lower_body(format!("{}.{}", c.name, m.name), b)).collect();
        let constructors = tc.constructors.iter().map(|b| lower_body(format!("{}.<init>", c.name), b)).collect();
        classes.push(CoreClass {
            name: c.name.clone(),
            fields: c.fields.iter().map(|f| (f.name.clone(), default_value(&f.ty))).collect(),
            operators,
            methods,
            constructors,
        });
    }
    let ops = linked.ops.iter().map(|o| (o.class, o.index)).collect();
    let mut functions = HashMap::new();
    for (file, bodies) in &checked.functions {
        let decls = &linked.programs[file].functions;
        functions.insert(*file, decls.iter().zip(bodies).map(|(m, b)| lower_body(m.name.clone(), b)).collect());
    }
    let main = checked.main.as_ref().map(|b| lower_block(b, 0));
    CoreProgram { classes, ops, functions, main }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lit::Int(v) => write!(f, "{v}"),
            Lit::Bool(b) => write!(f, "{b}"),
            Lit::Str(s) => write!(f, "{s:?}"),
            Lit::Unit => write!(f, "unit"),
            Lit::Null => write!(f, "null"),
        }
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, head: &str, items: &[Core]) -> fmt::Result {
    write!(f, "({head}")?;
    for i in items {
        write!(f, " {i}")?;
    }
    write!(f, ")")
}

/// S-expression rendering used by `dump-core`.
impl fmt::Display for Core {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Core::Lit(l) => write!(f, "{l}"),
            Core::Get(n) => write!(f, "{n}"),
            Core::Set(n, v) => write!(f, "(set {n} {v})"),
            Core::Decl(n, Some(v)) => write!(f, "(let {n} {v})"),
            Core::Decl(n, None) => write!(f, "(let {n})"),
            Core::This => write!(f, "this"),
            Core::GetField(o, i) => write!(f, "(field {o} {i})"),
            Core::SetField(o, i, v) => write!(f, "(set-field {o} {i} {v})"),
            Core::New(t, args) => {
                let head = match t {
                    NewTarget::User { class, ctor } => format!("new class{}#{}", class.0, ctor),
                    NewTarget::Plain(class) => format!("new class{}", class.0),
                    NewTarget::Builtin(k) => format!("new {k}"),
                };
                write_list(f, &head, args)
            }
            Core::Call { target, receiver, args } => {
                let head = match target {
                    CallTarget::Operator(op) => format!("op{}", op.0),
                    CallTarget::Method { class, index } => format!("method class{}#{index}", class.0),
                    CallTarget::Function { file, index } => format!("fn file{}#{index}", file.0),
                    CallTarget::Builtin(k) => k.to_string(),
                };
                let head = match receiver {
                    Some(r) => format!("call {head} @{r}"),
                    None => format!("call {head}"),
                };
                write_list(f, &head, args)
            }
            Core::Lam(p, b) => write!(f, "(lambda ({p}) {b})"),
            Core::App(g, a) => write!(f, "(apply {g} {a})"),
            Core::List(items) => write_list(f, "list", items),
            Core::Seq(items) => write_list(f, "seq", items),
            Core::If(c, t, Some(e)) => write!(f, "(if {c} {t} {e})"),
            Core::If(c, t, None) => write!(f, "(if {c} {t})"),
            Core::While(c, b) => write!(f, "(while {c} {b})"),
            Core::ForEach(v, i, b) => write!(f, "(for {v} {i} {b})"),
            Core::Return(Some(v)) => write!(f, "(return {v})"),
            Core::Return(None) => write!(f, "(return)"),
            Core::TryFinally(b, fin) => write!(f, "(try {b} (finally {fin}))"),
        }
    }
}
