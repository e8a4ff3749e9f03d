//! Declaration-level and expression-level data shapes shared by every pass.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::rc::Rc;

/// Index of a loaded source file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FileId(pub u32);

/// Global index of a class in a linked program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassId(pub u32);

/// Global index of an operator in a linked program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OpId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Span {
    pub file: FileId,
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(file: FileId, start: usize, end: usize) -> Self {
        Span { file, start, end }
    }
}

pub fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

pub fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// A dotted name such as `MapUtils.p1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QName {
    segments: Vec<String>,
}

impl QName {
    /// Builds a name from segments; `None` if empty or a segment is not an identifier.
    pub fn new<S: Into<String>>(segments: impl IntoIterator<Item = S>) -> Option<QName> {
        let segments: Vec<String> = segments.into_iter().map(Into::into).collect();
        let valid = !segments.is_empty()
            && segments.iter().all(|s| {
                let mut chars = s.chars();
                matches!(chars.next(), Some(c) if is_ident_start(c)) && chars.all(is_ident_char)
            });
        valid.then_some(QName { segments })
    }

    pub fn simple(name: &str) -> QName {
        QName::new([name]).unwrap_or_else(|| panic!("invalid identifier `{name}`"))
    }

    pub fn parse(text: &str) -> Option<QName> {
        QName::new(text.split('.'))
    }

    pub fn qualified(owner: &str, name: &str) -> QName {
        QName { segments: vec![owner.to_string(), name.to_string()] }
    }

    pub fn segments(&self) -> &[String] {
        &self.segments
    }

    pub fn last(&self) -> &str {
        self.segments.last().expect("non-empty")
    }

    pub fn is_simple(&self) -> bool {
        self.segments.len() == 1
    }
}

impl fmt::Display for QName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.segments.join("."))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Prim {
    Int,
    Bool,
    Str,
    Void,
    Unit,
}

impl Prim {
    pub fn keyword(self) -> &'static str {
        match self {
            Prim::Int => "int",
            Prim::Bool => "boolean",
            Prim::Str => "String",
            Prim::Void => "void",
            Prim::Unit => "Unit",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Prim> {
        Some(match word {
            "int" | "Int" | "Integer" => Prim::Int,
            "boolean" | "bool" | "Bool" | "Boolean" => Prim::Bool,
            "String" | "Str" => Prim::Str,
            "void" | "Void" => Prim::Void,
            "Unit" => Prim::Unit,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Type,
    Name,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TyVar {
    pub id: u32,
    pub kind: Kind,
}

impl PartialOrd for Kind {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Kind {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (*self as u8).cmp(&(*other as u8))
    }
}

/// A type expression. `Param` is a declared type parameter seen from inside
/// its declaration (rigid); `Var` is a unification variable; `Name` is a
/// generic-name argument.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Type {
    Prim(Prim),
    Class { name: QName, args: Vec<Type> },
    Turnstile { assumption: Box<Type>, result: Box<Type> },
    Param { name: String, kind: Kind },
    Var(TyVar),
    Name(NameAst),
}

impl Type {
    pub const INT: Type = Type::Prim(Prim::Int);
    pub const BOOL: Type = Type::Prim(Prim::Bool);
    pub const STR: Type = Type::Prim(Prim::Str);
    pub const VOID: Type = Type::Prim(Prim::Void);

    pub fn class(name: &str, args: Vec<Type>) -> Type {
        Type::Class { name: QName::simple(name), args }
    }

    pub fn turnstile(assumption: Type, result: Type) -> Type {
        Type::Turnstile { assumption: Box::new(assumption), result: Box::new(result) }
    }

    pub fn is_void(&self) -> bool {
        matches!(self, Type::Prim(Prim::Void))
    }

    pub fn class_name(&self) -> Option<&str> {
        match self {
            Type::Class { name, .. } => Some(name.last()),
            _ => None,
        }
    }

    pub fn class_args(&self) -> &[Type] {
        match self {
            Type::Class { args, .. } => args,
            _ => &[],
        }
    }

    /// True when a turnstile occurs anywhere other than the outermost position.
    pub fn has_nested_turnstile(&self) -> bool {
        fn inner(t: &Type) -> bool {
            match t {
                Type::Turnstile { .. } => true,
                Type::Class { args, .. } => args.iter().any(inner),
                _ => false,
            }
        }
        match self {
            Type::Turnstile { assumption, result } => inner(assumption) || inner(result),
            Type::Class { args, .. } => args.iter().any(inner),
            _ => false,
        }
    }

    pub fn visit_vars(&self, f: &mut impl FnMut(TyVar)) {
        match self {
            Type::Var(v) => f(*v),
            Type::Class { args, .. } => args.iter().for_each(|a| a.visit_vars(f)),
            Type::Turnstile { assumption, result } => {
                assumption.visit_vars(f);
                result.visit_vars(f);
            }
            _ => {}
        }
    }

    pub fn map_vars(&self, f: &mut impl FnMut(TyVar) -> Type) -> Type {
        match self {
            Type::Var(v) => f(*v),
            Type::Class { name, args } => Type::Class {
                name: name.clone(),
                args: args.iter().map(|a| a.map_vars(f)).collect(),
            },
            Type::Turnstile { assumption, result } => Type::Turnstile {
                assumption: Box::new(assumption.map_vars(f)),
                result: Box::new(result.map_vars(f)),
            },
            other => other.clone(),
        }
    }

    /// Replaces rigid parameters by name.
    pub fn subst_params(&self, f: &impl Fn(&str) -> Option<Type>) -> Type {
        match self {
            Type::Param { name, .. } => f(name).unwrap_or_else(|| self.clone()),
            Type::Class { name, args } => Type::Class {
                name: name.clone(),
                args: args.iter().map(|a| a.subst_params(f)).collect(),
            },
            Type::Turnstile { assumption, result } => Type::Turnstile {
                assumption: Box::new(assumption.subst_params(f)),
                result: Box::new(result.subst_params(f)),
            },
            other => other.clone(),
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Prim(p) => f.write_str(p.keyword()),
            Type::Class { name, args } => {
                write!(f, "{name}")?;
                if !args.is_empty() {
                    f.write_str("<")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            f.write_str(",")?;
                        }
                        write!(f, "{a}")?;
                    }
                    f.write_str(">")?;
                }
                Ok(())
            }
            Type::Turnstile { assumption, result } => write!(f, "{assumption} |- {result}"),
            Type::Param { name, .. } => f.write_str(name),
            Type::Var(v) => match v.kind {
                Kind::Type => write!(f, "?{}", v.id),
                Kind::Name => write!(f, "?n{}", v.id),
            },
            Type::Name(n) => write!(f, "'{}'", n.source),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeParamKind {
    Type { bound: Option<Type> },
    Name { name_type: QName },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeParam {
    pub name: String,
    pub kind: TypeParamKind,
}

impl TypeParam {
    pub fn kind(&self) -> Kind {
        match self.kind {
            TypeParamKind::Type { .. } => Kind::Type,
            TypeParamKind::Name { .. } => Kind::Name,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Repetition {
    One,
    Star,
    Plus,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SyntaxElem {
    NamePart(String),
    Operand { priority: Option<QName>, repetition: Repetition },
    NameOperand(String),
}

impl SyntaxElem {
    pub fn is_operand(&self) -> bool {
        matches!(self, SyntaxElem::Operand { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub ty: Type,
    pub variadic: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    Block(Block),
    Native(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorDecl {
    pub is_static: bool,
    pub is_literal: bool,
    pub priority: Option<QName>,
    pub type_params: Vec<TypeParam>,
    pub return_type: Type,
    pub syntax: Vec<SyntaxElem>,
    pub params: Vec<Param>,
    pub requires: Vec<Type>,
    pub body: Body,
    pub span: Span,
}

impl OperatorDecl {
    /// The first element is a value operand, so matching starts by parsing an
    /// expression at the operator's own position.
    pub fn is_left_recursive(&self) -> bool {
        self.syntax.first().is_some_and(SyntaxElem::is_operand)
    }

    /// Neither end is a value operand: the operator is self-delimiting.
    pub fn is_closed(&self) -> bool {
        !self.syntax.first().is_some_and(SyntaxElem::is_operand)
            && !self.syntax.last().is_some_and(SyntaxElem::is_operand)
    }

    /// Signature equality, ignoring bodies and positions.
    pub fn same_signature(&self, other: &OperatorDecl) -> bool {
        self.is_static == other.is_static
            && self.is_literal == other.is_literal
            && self.priority == other.priority
            && self.type_params == other.type_params
            && self.return_type == other.return_type
            && self.syntax == other.syntax
            && self.params == other.params
            && self.requires == other.requires
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodDecl {
    pub is_static: bool,
    pub name: String,
    pub type_params: Vec<TypeParam>,
    pub params: Vec<Param>,
    pub return_type: Type,
    pub requires: Vec<Type>,
    pub body: Body,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CtorDecl {
    pub params: Vec<Param>,
    pub body: Block,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDecl {
    pub name: String,
    pub ty: Type,
    pub is_private: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriorityDecl {
    pub names: Vec<String>,
    pub constraints: Vec<(QName, QName)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassDecl {
    pub name: String,
    pub is_dsl: bool,
    pub type_params: Vec<TypeParam>,
    pub priorities: Option<PriorityDecl>,
    pub operators: Vec<OperatorDecl>,
    pub methods: Vec<MethodDecl>,
    pub constructors: Vec<CtorDecl>,
    pub fields: Vec<FieldDecl>,
    pub span: Span,
}

impl ClassDecl {
    pub fn field_index(&self, name: &str) -> Option<usize> {
        self.fields.iter().position(|f| f.name == name)
    }

    pub fn self_type(&self) -> Type {
        Type::Class {
            name: QName::simple(&self.name),
            args: self
                .type_params
                .iter()
                .map(|p| Type::Param { name: p.name.clone(), kind: p.kind() })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Import {
    pub dsl: QName,
    pub constraints: Vec<(QName, QName)>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub file: FileId,
    pub imports: Vec<Import>,
    pub classes: Vec<ClassDecl>,
    /// Free-standing methods of the entry file.
    pub functions: Vec<MethodDecl>,
    pub main: Option<Block>,
}

/// Which expected-type rule governs a raw expression region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExprContext {
    LocalInit,
    Condition,
    Iterable,
    Return,
    Statement,
}

/// An expression region whose grammar depends on the operators in scope.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RawExpr {
    pub span: Span,
    pub context: ExprContext,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    Local { ty: Type, name: String, init: Option<RawExpr>, span: Span },
    Expr(RawExpr),
    If { cond: RawExpr, then: Box<Stmt>, els: Option<Box<Stmt>> },
    While { cond: RawExpr, body: Box<Stmt> },
    ForEach { ty: Type, var: String, iter: RawExpr, body: Box<Stmt> },
    Return { value: Option<RawExpr>, span: Span },
    TryFinally { body: Block, finalizer: Block },
    Block(Block),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub stmts: Vec<Stmt>,
    pub span: Span,
}

/// Parsed tree of a generic-name occurrence: the literal-operator
/// application that spelled it. Equality ignores `source`.
#[derive(Debug, Clone, Eq)]
pub struct NameAst {
    pub op: OpId,
    pub children: Vec<NameAst>,
    pub source: String,
}

impl PartialEq for NameAst {
    fn eq(&self, other: &Self) -> bool {
        name_ast_equal(self, other)
    }
}

impl Hash for NameAst {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.op.hash(state);
        self.children.len().hash(state);
        for c in &self.children {
            c.hash(state);
        }
    }
}

pub fn name_ast_equal(a: &NameAst, b: &NameAst) -> bool {
    a.op == b.op
        && a.children.len() == b.children.len()
        && a.children.iter().zip(&b.children).all(|(x, y)| name_ast_equal(x, y))
}

/// Identifier text standing for a generic name after erasure.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UniqueIdent(pub String);

impl fmt::Display for UniqueIdent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Maps a name tree to an identifier. Preorder encoding with an explicit
/// close marker, so distinct trees never collide within a scope.
pub fn erase_name(name: &NameAst, scope: u32) -> UniqueIdent {
    fn encode(n: &NameAst, out: &mut String) {
        out.push('o');
        out.push_str(&n.op.0.to_string());
        for c in &n.children {
            encode(c, out);
        }
        out.push('x');
    }
    let mut out = format!("nm{scope}_");
    encode(name, &mut out);
    UniqueIdent(out)
}

fn render_type_params(params: &[TypeParam]) -> String {
    let items: Vec<String> = params
        .iter()
        .map(|p| match &p.kind {
            TypeParamKind::Type { bound: None } => p.name.clone(),
            TypeParamKind::Type { bound: Some(b) } => format!("{} extends {b}", p.name),
            TypeParamKind::Name { name_type } => format!("{}: {name_type}", p.name),
        })
        .collect();
    format!("<{}>", items.join(", "))
}

fn render_params(params: &[Param]) -> String {
    let items: Vec<String> = params
        .iter()
        .map(|p| {
            if p.variadic {
                format!("{}... {}", p.ty, p.name)
            } else {
                format!("{} {}", p.ty, p.name)
            }
        })
        .collect();
    format!("({})", items.join(", "))
}

/// Human-readable operator signature in the declaration grammar.
pub fn render_operator(sig: &OperatorDecl) -> String {
    let mut parts: Vec<String> = Vec::new();
    if sig.is_static {
        parts.push("static".into());
    }
    if sig.is_literal {
        parts.push("literal".into());
    }
    if !sig.type_params.is_empty() {
        parts.push(render_type_params(&sig.type_params));
    }
    parts.push(sig.return_type.to_string());
    if let Some(p) = &sig.priority {
        parts.push(format!("[{p}]"));
    }
    for elem in &sig.syntax {
        match elem {
            SyntaxElem::NamePart(text) => parts.push(format!("\"{text}\"")),
            SyntaxElem::NameOperand(name) => parts.push(name.clone()),
            SyntaxElem::Operand { priority, repetition } => {
                let mut s = String::from("_");
                match repetition {
                    Repetition::One => {}
                    Repetition::Star => s.push('*'),
                    Repetition::Plus => s.push('+'),
                }
                parts.push(s);
                if let Some(p) = priority {
                    parts.push(format!("[{p}]"));
                }
            }
        }
    }
    parts.push(render_params(&sig.params));
    let mut out = parts.join(" ");
    if !sig.requires.is_empty() {
        let reqs: Vec<String> = sig.requires.iter().map(ToString::to_string).collect();
        out.push_str(&format!(" requires {}", reqs.join(", ")));
    }
    out
}

/// Shared handle to a typed expression; memoized parse results are reused
/// by reference.
pub type ExprRef = Rc<TypedExpr>;

#[derive(Debug, Clone, PartialEq)]
pub enum OpArg {
    Single(ExprRef),
    Many(Vec<ExprRef>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ContextBody {
    Expr(ExprRef),
    Block(TypedBlock),
}

#[derive(Debug, Clone, PartialEq)]
pub enum MethodTarget {
    User { class: ClassId, index: usize },
    Function { file: FileId, index: usize },
    Builtin(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub enum NewTarget {
    User { class: ClassId, ctor: usize },
    /// A user class without constructors.
    Plain(ClassId),
    Builtin(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub enum AssignTarget {
    Local(String),
    Field { object: ExprRef, class: ClassId, index: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Int(i64),
    Str(String),
    Bool(bool),
    Null,
    Local(String),
    This,
    Field { object: ExprRef, class: ClassId, index: usize },
    New { target: NewTarget, args: Vec<ExprRef> },
    MethodCall {
        receiver: Option<ExprRef>,
        target: MethodTarget,
        args: Vec<ExprRef>,
        /// Assumption-stack indices supplying the callee's `requires` frames.
        frames: Vec<usize>,
    },
    ApplyTurnstile { receiver: ExprRef, arg: ExprRef },
    Closure { params: Vec<(String, Type)>, body: TypedBlock },
    Assign { target: AssignTarget, value: ExprRef },
    OperatorApp {
        op: OpId,
        type_args: Vec<Type>,
        args: Vec<OpArg>,
        names: Vec<NameAst>,
        /// Assumption-stack index of the receiver frame for instance operators.
        frame: Option<usize>,
        /// Frames supplying the operator's `requires` clause.
        req_frames: Vec<usize>,
    },
    ContextOperand { assumption: Type, body: Box<ContextBody> },
    NameLit(NameAst),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypedExpr {
    pub kind: ExprKind,
    pub ty: Type,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TypedStmt {
    Local { name: String, ty: Type, init: Option<ExprRef> },
    Expr(ExprRef),
    If { cond: ExprRef, then: Box<TypedStmt>, els: Option<Box<TypedStmt>> },
    While { cond: ExprRef, body: Box<TypedStmt> },
    ForEach { var: String, iter: ExprRef, body: Box<TypedStmt> },
    Return(Option<ExprRef>),
    TryFinally { body: TypedBlock, finalizer: TypedBlock },
    Block(TypedBlock),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TypedBlock {
    pub stmts: Vec<TypedStmt>,
}
