//! The fixed host expression grammar: literals, variables, fields, calls,
//! object creation, closures, parentheses and assignment.

use std::collections::HashMap;

use crate::loader::scan::{ident_at, ident_boundary_before, skip_ws, string_lit_at};
use crate::diag::Diagnostic;
use crate::loader::{read_block_at, read_type_at};
use crate::syntax::*;
use crate::types::builtins::{self, BuiltinSig};
use crate::types::scope::{check_requires, instantiate_generic, KERNEL_RANK};

use super::{mk, Goal, Hit, Session};

fn atom(expr: ExprRef, ty: Type) -> Hit {
    Hit { end: expr.end, expr, ty, prio: 0, closed: true, rank: KERNEL_RANK }
}

impl<'c> Session<'_, 'c> {
    pub(super) fn kernel(&mut self, p: usize, goal: &Goal, expected: &Type) -> Option<Hit> {
        let text = self.text;
        let mut h = self.primary(p, goal, expected)?;
        loop {
            let q = skip_ws(text, h.end);
            if !text[q..].starts_with('.') {
                break;
            }
            let r = skip_ws(text, q + 1);
            let Some(name) = ident_at(text, r) else { break };
            let after = r + name.len();
            let s = skip_ws(text, after);
            let next = if text[s..].starts_with('(') {
                self.method_call(&h, name, s, goal)
            } else {
                self.field_access(&h, name, after)
            };
            match next {
                Some(n) => h = n,
                None => break,
            }
        }
        if let Some(target) = lvalue(&h.expr) {
            let q = skip_ws(text, h.end);
            if text[q..].starts_with('=') && !text[q..].starts_with("==") {
                let g = Goal { expected: h.ty.clone(), asm: goal.asm.clone(), min_rank: 0, literal: false };
                if let Some(v) = self.parse_goal(q + 1, &g) {
                    let e = mk(ExprKind::Assign { target, value: v.expr }, Type::VOID, h.expr.start, v.end);
                    return Some(atom(e, Type::VOID));
                }
            }
        }
        Some(h)
    }

    fn primary(&mut self, p: usize, goal: &Goal, expected: &Type) -> Option<Hit> {
        let text = self.text;
        let c = text[p..].chars().next()?;
        if c.is_ascii_digit() {
            let len = text[p..].find(|c: char| !c.is_ascii_digit()).unwrap_or(text.len() - p);
            if !ident_boundary_before(text, p) {
                return None;
            }
            let v: i64 = text[p..p + len].parse().ok()?;
            return Some(atom(mk(ExprKind::Int(v), Type::INT, p, p + len), Type::INT));
        }
        if c == '"' {
            let (s, end) = string_lit_at(text, p)?;
            return Some(atom(mk(ExprKind::Str(s), Type::STR, p, end), Type::STR));
        }
        if c == '(' {
            let g = Goal { expected: expected.clone(), asm: goal.asm.clone(), min_rank: 0, literal: false };
            let inner = self.parse_goal(p + 1, &g)?;
            let q = skip_ws(text, inner.end);
            if !text[q..].starts_with(')') {
                self.miss(q, "`)`");
                return None;
            }
            let e = mk(inner.expr.kind.clone(), inner.ty.clone(), p, q + 1);
            return Some(atom(e, inner.ty));
        }
        let word = ident_at(text, p)?;
        if !ident_boundary_before(text, p) {
            return None;
        }
        let after = p + word.len();
        match word {
            "true" | "false" => {
                let e = mk(ExprKind::Bool(word == "true"), Type::BOOL, p, after);
                return Some(atom(e, Type::BOOL));
            }
            "null" => {
                let t = self.ck.infer.fresh(Kind::Type);
                return Some(atom(mk(ExprKind::Null, t.clone(), p, after), t));
            }
            "this" => {
                if !self.ck.has_this {
                    return None;
                }
                let t = self.ck.linked().class(self.ck.class?).self_type();
                return Some(atom(mk(ExprKind::This, t.clone(), p, after), t));
            }
            "new" => return self.new_expr(p, after, goal),
            "fun" => return self.closure(p, after, goal),
            _ => {}
        }
        let s = skip_ws(text, after);
        if text[s..].starts_with('(') {
            return self.call(p, word, s, goal);
        }
        if word.starts_with(|c: char| c.is_ascii_uppercase()) && text[s..].starts_with('.') && self.ck.lookup_local(word).is_none() {
            let r = skip_ws(text, s + 1);
            let name = ident_at(text, r)?;
            let q = skip_ws(text, r + name.len());
            if text[q..].starts_with('(') {
                return self.static_call(p, word, name, q, goal);
            }
            return None;
        }
        if let Some(t) = self.ck.lookup_local(word).cloned() {
            return Some(atom(mk(ExprKind::Local(word.to_string()), t.clone(), p, after), t));
        }
        if self.ck.has_this {
            let cid = self.ck.class?;
            let class = self.ck.linked().class(cid);
            let index = class.field_index(word)?;
            let this = mk(ExprKind::This, class.self_type(), p, p);
            let t = class.fields[index].ty.clone();
            return Some(atom(mk(ExprKind::Field { object: this, class: cid, index }, t.clone(), p, after), t));
        }
        None
    }

    /// `( a, b, .. )` at the given parameter types; returns the arguments and
    /// the position after `)`.
    fn args(&mut self, open: usize, params: &[Type], goal: &Goal) -> Option<(Vec<ExprRef>, usize)> {
        let text = self.text;
        let mut pos = open + 1;
        let mut out = Vec::with_capacity(params.len());
        for (i, t) in params.iter().enumerate() {
            if i > 0 {
                let q = skip_ws(text, pos);
                if !text[q..].starts_with(',') {
                    self.miss(q, "`,`");
                    return None;
                }
                pos = q + 1;
            }
            let g = Goal { expected: t.clone(), asm: goal.asm.clone(), min_rank: 0, literal: false };
            let h = self.parse_goal(pos, &g)?;
            out.push(h.expr);
            pos = h.end;
        }
        let q = skip_ws(text, pos);
        if !text[q..].starts_with(')') {
            self.miss(q, "`)`");
            return None;
        }
        Some((out, q + 1))
    }

    fn builtin_call(
        &mut self,
        start: usize,
        sig: &BuiltinSig,
        class_env: HashMap<String, Type>,
        receiver: Option<ExprRef>,
        open: usize,
        goal: &Goal,
    ) -> Option<Hit> {
        let mut env = class_env;
        for tp in sig.type_params {
            let v = self.ck.infer.fresh(Kind::Type);
            env.insert(tp.to_string(), v);
        }
        let subst = |t: &Type| t.subst_params(&|n| env.get(n).cloned());
        let params: Vec<Type> = sig.params.iter().map(subst).collect();
        let (args, end) = self.args(open, &params, goal)?;
        let ret = self.ck.infer.resolve(&subst(&sig.ret));
        let kind = ExprKind::MethodCall { receiver, target: MethodTarget::Builtin(sig.key), args, frames: vec![] };
        Some(atom(mk(kind, ret.clone(), start, end), ret))
    }

    #[allow(clippy::too_many_arguments)]
    fn user_call(
        &mut self,
        start: usize,
        m: &MethodDecl,
        class_params: &[TypeParam],
        class_args: Option<&[Type]>,
        receiver: Option<ExprRef>,
        target: MethodTarget,
        open: usize,
        goal: &Goal,
    ) -> Option<Hit> {
        let frame = class_args.map(|a| Type::Class { name: QName::simple("_"), args: a.to_vec() });
        let (mut env, _, _) = instantiate_generic(&mut self.ck.infer, class_params, frame.as_ref(), &m.type_params);
        if class_args.is_none() {
            for p in class_params {
                env.insert(p.name.clone(), Type::Param { name: p.name.clone(), kind: p.kind() });
            }
        }
        let subst = |t: &Type| t.subst_params(&|n| env.get(n).cloned());
        let params: Vec<Type> = m.params.iter().map(|p| subst(&p.ty)).collect();
        let requires: Vec<Type> = m.requires.iter().map(subst).collect();
        let ret = subst(&m.return_type);
        let Some(frames) = check_requires(&requires, &goal.asm, &mut self.ck.infer) else {
            let needed: Vec<String> = requires.iter().map(|t| format!("`{}`", self.ck.infer.resolve(t))).collect();
            let msg = format!("`{}` requires {} as an assumption here", m.name, needed.join(", "));
            self.nested(Diagnostic::at(self.file, start, msg));
            return None;
        };
        let (args, end) = self.args(open, &params, goal)?;
        let ret = self.ck.infer.resolve(&ret);
        let kind = ExprKind::MethodCall { receiver, target, args, frames };
        Some(atom(mk(kind, ret.clone(), start, end), ret))
    }

    /// `name(args)`: a method of the current class, a free function of this
    /// file, or a built-in function.
    fn call(&mut self, start: usize, name: &str, open: usize, goal: &Goal) -> Option<Hit> {
        let linked = self.ck.linked();
        if let Some(cid) = self.ck.class {
            let class = linked.class(cid);
            for (index, m) in class.methods.iter().enumerate() {
                if m.name == name && (m.is_static || self.ck.has_this) {
                    let snap = self.ck.infer.snapshot();
                    let target = MethodTarget::User { class: cid, index };
                    if let Some(h) = self.user_call(start, m, &class.type_params, None, None, target, open, goal) {
                        return Some(h);
                    }
                    self.ck.infer.rollback(snap);
                }
            }
        }
        if let Some(prog) = linked.programs.get(&self.file) {
            for (index, m) in prog.functions.iter().enumerate() {
                if m.name == name {
                    let snap = self.ck.infer.snapshot();
                    let target = MethodTarget::Function { file: self.file, index };
                    if let Some(h) = self.user_call(start, m, &[], None, None, target, open, goal) {
                        return Some(h);
                    }
                    self.ck.infer.rollback(snap);
                }
            }
        }
        let sig = builtins::function(name)?;
        self.builtin_call(start, &sig, HashMap::new(), None, open, goal)
    }

    /// `Class.name(args)`.
    fn static_call(&mut self, start: usize, class: &str, name: &str, open: usize, goal: &Goal) -> Option<Hit> {
        if let Some(sig) = builtins::static_method(class, name) {
            return self.builtin_call(start, &sig, HashMap::new(), None, open, goal);
        }
        let linked = self.ck.linked();
        let cid = linked.class_named(class)?;
        let decl = linked.class(cid);
        let (index, m) = decl.methods.iter().enumerate().find(|(_, m)| m.is_static && m.name == name)?;
        let args: Vec<Type> = decl.type_params.iter().map(|p| self.ck.infer.fresh(p.kind())).collect();
        let target = MethodTarget::User { class: cid, index };
        self.user_call(start, m, &decl.type_params, Some(&args), None, target, open, goal)
    }

    fn method_call(&mut self, recv: &Hit, name: &str, open: usize, goal: &Goal) -> Option<Hit> {
        let start = recv.expr.start;
        let rt = self.ck.infer.resolve(&recv.ty);
        self.method_on(start, recv, &rt, name, open, goal)
    }

    fn method_on(&mut self, start: usize, recv: &Hit, rt: &Type, name: &str, open: usize, goal: &Goal) -> Option<Hit> {
        match rt {
            Type::Turnstile { assumption, result } if name == "apply" => {
                let (args, end) = self.args(open, &[(**assumption).clone()], goal)?;
                let arg = args.into_iter().next()?;
                let kind = ExprKind::ApplyTurnstile { receiver: recv.expr.clone(), arg };
                Some(atom(mk(kind, (**result).clone(), start, end), (**result).clone()))
            }
            Type::Prim(Prim::Str) => {
                let sig = builtins::method("String", name)?;
                self.builtin_call(start, &sig, HashMap::new(), Some(recv.expr.clone()), open, goal)
            }
            Type::Class { name: cn, args } => {
                let cn = cn.last();
                if builtins::class_arity(cn).is_some() {
                    let sig = builtins::method(cn, name)?;
                    let env = builtins::class_params(cn).iter().map(|s| s.to_string()).zip(args.iter().cloned()).collect();
                    return self.builtin_call(start, &sig, env, Some(recv.expr.clone()), open, goal);
                }
                let linked = self.ck.linked();
                let cid = linked.class_named(cn)?;
                let decl = linked.class(cid);
                for (index, m) in decl.methods.iter().enumerate() {
                    if m.name == name && !m.is_static {
                        let snap = self.ck.infer.snapshot();
                        let target = MethodTarget::User { class: cid, index };
                        let h = self.user_call(start, m, &decl.type_params, Some(args), Some(recv.expr.clone()), target, open, goal);
                        if h.is_some() {
                            return h;
                        }
                        self.ck.infer.rollback(snap);
                    }
                }
                None
            }
            Type::Param { name: pn, .. } => {
                let bound = self.ck.bound_of(pn)?;
                self.method_on(start, recv, &bound, name, open, goal)
            }
            _ => None,
        }
    }

    fn field_access(&mut self, recv: &Hit, name: &str, end: usize) -> Option<Hit> {
        let rt = self.ck.infer.resolve(&recv.ty);
        let Type::Class { name: cn, args } = &rt else { return None };
        let linked = self.ck.linked();
        let cid = linked.class_named(cn.last())?;
        let decl = linked.class(cid);
        let index = decl.field_index(name)?;
        let f = &decl.fields[index];
        if f.is_private && self.ck.class != Some(cid) {
            return None;
        }
        let env: HashMap<&str, Type> = decl.type_params.iter().map(|p| p.name.as_str()).zip(args.iter().cloned()).collect();
        let t = f.ty.subst_params(&|n| env.get(n).cloned());
        let kind = ExprKind::Field { object: recv.expr.clone(), class: cid, index };
        Some(atom(mk(kind, t.clone(), recv.expr.start, end), t))
    }

    /// `new C<..>(args)`.
    fn new_expr(&mut self, start: usize, after: usize, goal: &Goal) -> Option<Hit> {
        let text = self.text;
        let tparams = self.ck.tparams.clone();
        let (ty, q) = read_type_at(text, self.file, after, &tparams)?;
        let Type::Class { name, args } = &ty else { return None };
        let open = skip_ws(text, q);
        if !text[open..].starts_with('(') {
            self.miss(open, "`(`");
            return None;
        }
        let cn = name.last();
        if let Some(arity) = builtins::class_arity(cn) {
            if arity != args.len() {
                return None;
            }
            let sig = builtins::constructor(cn)?;
            let (a, end) = self.args(open, &sig.params, goal)?;
            let kind = ExprKind::New { target: NewTarget::Builtin(sig.key), args: a };
            return Some(atom(mk(kind, ty.clone(), start, end), ty));
        }
        let linked = self.ck.linked();
        let cid = linked.class_named(cn)?;
        let decl = linked.class(cid);
        if decl.type_params.len() != args.len() {
            return None;
        }
        let env: HashMap<&str, Type> = decl.type_params.iter().map(|p| p.name.as_str()).zip(args.iter().cloned()).collect();
        for (ctor, k) in decl.constructors.iter().enumerate() {
            let params: Vec<Type> = k.params.iter().map(|p| p.ty.subst_params(&|n| env.get(n).cloned())).collect();
            let snap = self.ck.infer.snapshot();
            if let Some((a, end)) = self.args(open, &params, goal) {
                let kind = ExprKind::New { target: NewTarget::User { class: cid, ctor }, args: a };
                return Some(atom(mk(kind, ty.clone(), start, end), ty));
            }
            self.ck.infer.rollback(snap);
        }
        if decl.constructors.is_empty() {
            let end = skip_ws(text, open + 1);
            if text[end..].starts_with(')') {
                let kind = ExprKind::New { target: NewTarget::Plain(cid), args: vec![] };
                return Some(atom(mk(kind, ty.clone(), start, end + 1), ty));
            }
        }
        None
    }

    /// `fun (T x) { .. }`: a `Function<T, R>` value.
    fn closure(&mut self, start: usize, after: usize, goal: &Goal) -> Option<Hit> {
        let text = self.text;
        let open = skip_ws(text, after);
        if !text[open..].starts_with('(') {
            return None;
        }
        let tparams = self.ck.tparams.clone();
        let (pty, q) = read_type_at(text, self.file, open + 1, &tparams)?;
        let q = skip_ws(text, q);
        let pname = ident_at(text, q)?.to_string();
        let close = skip_ws(text, q + pname.len());
        if !text[close..].starts_with(')') {
            self.miss(close, "`)`");
            return None;
        }
        let brace = skip_ws(text, close + 1);
        if !text[brace..].starts_with('{') {
            self.miss(brace, "`{`");
            return None;
        }
        let (block, end) = match read_block_at(text, self.file, brace, &tparams) {
            Ok(r) => r,
            Err(d) => {
                self.nested(d);
                return None;
            }
        };
        let saved = std::mem::replace(&mut self.ck.asm, goal.asm.clone());
        let params = vec![(pname, pty.clone())];
        let r = self.ck.check_closure(&params, &block);
        self.ck.asm = saved;
        let (body, ret) = match r {
            Ok(x) => x,
            Err(d) => {
                self.nested(d);
                return None;
            }
        };
        let ty = Type::class("Function", vec![pty, ret]);
        Some(atom(mk(ExprKind::Closure { params, body }, ty.clone(), start, end), ty))
    }
}

fn lvalue(e: &ExprRef) -> Option<AssignTarget> {
    match &e.kind {
        ExprKind::Local(n) => Some(AssignTarget::Local(n.clone())),
        ExprKind::Field { object, class, index } => {
            Some(AssignTarget::Field { object: object.clone(), class: *class, index: *index })
        }
        _ => None,
    }
}
