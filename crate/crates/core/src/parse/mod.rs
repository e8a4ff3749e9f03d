//! Type-directed packrat parsing. A goal is an expected type, the assumption
//! stack, a minimum priority rank and a mode (normal or literal); results are
//! memoized per input position and canonical goal.

mod kernel;
mod names;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::rc::Rc;

use crate::diag::Diagnostic;
use crate::loader::scan::skip_ws;
use crate::syntax::*;
use crate::types::check::Checker;
use crate::types::scope::{bounds_hold, check_requires, instantiate, Instance, OpMeta, SourceRank, KERNEL_RANK};

pub use names::to_name_ast;

/// Upper bound on the number of left-recursive derivations kept per lead
/// position.
const LEAD_CAP: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct Goal {
    pub expected: Type,
    /// Assumption stack, innermost frame last.
    pub asm: Vec<Type>,
    pub min_rank: u32,
    /// Literal mode: only literal operators, no whitespace between parts.
    pub literal: bool,
}

/// Counters for one checking unit.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseStats {
    /// Bytes of expression text handed to the parser.
    pub input_length: usize,
    /// Distinct canonical goals requested.
    pub languages_seen: usize,
    /// Memoized results stored: one per (position, goal) pair, plus one per
    /// derivation kept in a left-recursion closure.
    pub memo_entries: usize,
    /// Goal evaluations that missed the memo table.
    pub evaluations: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct GoalKey {
    lead: bool,
    expected: Option<Type>,
    asm: Vec<Type>,
    min_rank: u32,
    literal: bool,
}

/// Interns canonical goals for one checking unit.
#[derive(Debug, Clone, Default)]
pub struct GoalInterner {
    map: HashMap<GoalKey, u32>,
}

impl GoalInterner {
    fn intern(&mut self, key: GoalKey) -> u32 {
        let n = self.map.len() as u32;
        *self.map.entry(key).or_insert(n)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// A successful parse in the caller's substitution.
#[derive(Debug, Clone)]
pub struct Hit {
    pub expr: ExprRef,
    pub ty: Type,
    pub end: usize,
    pub prio: u32,
    pub closed: bool,
    pub rank: SourceRank,
}

/// A parse result with types renamed relative to the variables of the goal
/// that produced it; `binds[i]` is what the goal's i-th variable became.
#[derive(Debug, Clone)]
struct Outcome {
    expr: ExprRef,
    ty: Type,
    binds: Vec<Option<Type>>,
    end: usize,
    prio: u32,
    closed: bool,
    rank: SourceRank,
    derived: bool,
}

enum Memo {
    InProgress,
    Done(Option<Rc<Outcome>>),
}

enum LeadMemo {
    InProgress,
    Done(Rc<Vec<Outcome>>),
}

#[derive(Default)]
struct MatchAcc {
    args: Vec<OpArg>,
    names: Vec<NameAst>,
}

struct OpCtx<'x> {
    decl: &'x OperatorDecl,
    meta: &'x OpMeta,
    inst: &'x Instance,
    goal: &'x Goal,
}

/// Parser state over one piece of source text.
pub struct Session<'s, 'c> {
    pub(crate) ck: &'s mut Checker<'c>,
    pub(crate) text: &'c str,
    pub(crate) file: FileId,
    memo: HashMap<(usize, u32), Memo>,
    leads: HashMap<(usize, u32), LeadMemo>,
    furthest: usize,
    expected_here: BTreeSet<String>,
    nested_error: Option<Diagnostic>,
}

pub(crate) fn mk(kind: ExprKind, ty: Type, start: usize, end: usize) -> ExprRef {
    Rc::new(TypedExpr { kind, ty, start, end })
}

impl<'s, 'c> Session<'s, 'c> {
    pub fn new(ck: &'s mut Checker<'c>, text: &'c str, file: FileId) -> Self {
        Session {
            ck,
            text,
            file,
            memo: HashMap::new(),
            leads: HashMap::new(),
            furthest: 0,
            expected_here: BTreeSet::new(),
            nested_error: None,
        }
    }

    pub fn stats(&self) -> &ParseStats {
        &self.ck.stats
    }

    /// Entries in this session's memo tables.
    pub fn memo_len(&self) -> usize {
        self.memo.len() + self.leads.len()
    }

    pub(crate) fn miss(&mut self, pos: usize, what: &str) {
        self.miss_with(pos, || what.to_string());
    }

    /// Like `miss`, building the description only when it is kept.
    pub(crate) fn miss_with(&mut self, pos: usize, what: impl FnOnce() -> String) {
        if pos < self.furthest {
            return;
        }
        if pos > self.furthest {
            self.furthest = pos;
            self.expected_here.clear();
        }
        self.expected_here.insert(what());
    }

    pub(crate) fn nested(&mut self, d: Diagnostic) {
        if self.nested_error.as_ref().is_none_or(|e| d.offset >= e.offset) {
            self.nested_error = Some(d);
        }
    }

    pub fn furthest(&self) -> usize {
        self.furthest
    }

    /// Diagnostic for a region that did not parse at `expected`.
    pub fn failure(&self, span: Span, expected: &Type) -> Diagnostic {
        if let Some(d) = &self.nested_error {
            if d.offset >= self.furthest {
                return d.clone();
            }
        }
        let pos = self.furthest.max(span.start);
        let ty = self.ck.infer.resolve(expected);
        let mut msg = format!("cannot parse an expression of type `{ty}`");
        if !self.expected_here.is_empty() {
            let list: Vec<&str> = self.expected_here.iter().take(8).map(String::as_str).collect();
            msg.push_str(&format!("; expected {}", list.join(", ")));
        }
        Diagnostic::at(span.file, pos, msg)
    }

    fn canon(&mut self, goal: &Goal, lead: bool) -> (u32, Vec<TyVar>) {
        let mut vars: Vec<TyVar> = Vec::new();
        let mut map: HashMap<u32, u32> = HashMap::new();
        let infer = &self.ck.infer;
        let mut c = |t: &Type| {
            infer.resolve(t).map_vars(&mut |v| {
                let id = *map.entry(v.id).or_insert_with(|| {
                    vars.push(v);
                    vars.len() as u32 - 1
                });
                Type::Var(TyVar { id, kind: v.kind })
            })
        };
        let asm: Vec<Type> = goal.asm.iter().map(&mut c).collect();
        let expected = (!lead).then(|| c(&goal.expected));
        let key = GoalKey { lead, expected, asm, min_rank: goal.min_rank, literal: goal.literal };
        let id = self.ck.interner.intern(key);
        self.ck.stats.languages_seen = self.ck.interner.len();
        (id, vars)
    }

    fn freeze(&self, h: &Hit, vars: &[TyVar], derived: bool) -> Outcome {
        let infer = &self.ck.infer;
        let mut map: HashMap<u32, u32> = vars.iter().enumerate().map(|(i, v)| (v.id, i as u32)).collect();
        let mut next = vars.len() as u32;
        let mut c = |t: &Type| {
            infer.resolve(t).map_vars(&mut |v| {
                let id = *map.entry(v.id).or_insert_with(|| {
                    next += 1;
                    next - 1
                });
                Type::Var(TyVar { id, kind: v.kind })
            })
        };
        let binds = vars
            .iter()
            .map(|v| match infer.resolve(&Type::Var(*v)) {
                Type::Var(u) if u.id == v.id => None,
                t => Some(c(&t)),
            })
            .collect();
        Outcome {
            expr: h.expr.clone(),
            ty: c(&h.ty),
            binds,
            end: h.end,
            prio: h.prio,
            closed: h.closed,
            rank: h.rank,
            derived,
        }
    }

    fn revive(&mut self, o: &Outcome, vars: &[TyVar]) -> Option<Hit> {
        let mut fresh: HashMap<u32, Type> = HashMap::new();
        let infer = &mut self.ck.infer;
        let mut live = |t: &Type| {
            t.map_vars(&mut |v| match vars.get(v.id as usize) {
                Some(g) => Type::Var(*g),
                None => fresh.entry(v.id).or_insert_with(|| infer.fresh(v.kind)).clone(),
            })
        };
        let ty = live(&o.ty);
        let binds: Vec<(TyVar, Type)> =
            o.binds.iter().zip(vars).filter_map(|(b, v)| b.as_ref().map(|b| (*v, live(b)))).collect();
        for (v, t) in binds {
            self.ck.infer.unify(&Type::Var(v), &t).ok()?;
        }
        Some(Hit { expr: o.expr.clone(), ty, end: o.end, prio: o.prio, closed: o.closed, rank: o.rank })
    }

    fn attempt(&mut self, vars: &[TyVar], out: &mut Vec<Outcome>, derived: bool, f: impl FnOnce(&mut Self) -> Option<Hit>) {
        let snap = self.ck.infer.snapshot();
        if let Some(h) = f(self) {
            out.push(self.freeze(&h, vars, derived));
        }
        self.ck.infer.rollback(snap);
    }

    /// Parses `goal` at `pos`: the longest parse, ties going to the lowest
    /// source rank.
    pub fn parse_goal(&mut self, pos: usize, goal: &Goal) -> Option<Hit> {
        let (id, vars) = self.canon(goal, false);
        match self.memo.get(&(pos, id)) {
            Some(Memo::Done(o)) => {
                let o = o.clone()?;
                return self.revive(&o, &vars);
            }
            Some(Memo::InProgress) => return None,
            None => {}
        }
        if self.ck.comp.options.trace {
            let line = format!("{pos}: {} under [{}]", self.ck.infer.resolve(&goal.expected), self.render_asm(&goal.asm));
            self.ck.trace.push(line);
        }
        self.memo.insert((pos, id), Memo::InProgress);
        self.ck.stats.memo_entries += 1;
        self.ck.stats.evaluations += 1;
        let alts = self.eval_goal(pos, goal, &vars);
        let best = alts.into_iter().reduce(|a, b| if b.end > a.end || (b.end == a.end && b.rank < a.rank) { b } else { a });
        let best = best.map(Rc::new);
        self.memo.insert((pos, id), Memo::Done(best.clone()));
        self.revive(&best?.clone(), &vars)
    }

    fn render_asm(&self, asm: &[Type]) -> String {
        asm.iter().map(|t| self.ck.infer.resolve(t).to_string()).collect::<Vec<_>>().join(", ")
    }

    fn eval_goal(&mut self, pos: usize, goal: &Goal, vars: &[TyVar]) -> Vec<Outcome> {
        let p = if goal.literal { pos } else { skip_ws(self.text, pos) };
        let expected = self.ck.infer.shallow(&goal.expected);
        let mut out = Vec::new();
        if let Type::Turnstile { assumption, result } = &expected {
            self.turnstile_alternatives(p, goal, &expected, assumption, result, vars, &mut out);
            return out;
        }
        if !goal.literal {
            self.attempt(vars, &mut out, false, |s| {
                let h = s.kernel(p, goal, &expected)?;
                s.ck.infer.assignable(&h.ty, &expected).then_some(h)
            });
            if let Some(name) = expected.class_name() {
                if self.ck.scope.has_literal_type(self.ck.linked(), name) {
                    self.attempt(vars, &mut out, false, |s| s.literal_value(p, &expected));
                }
            }
        }
        let linked = self.ck.linked();
        let table = &self.ck.comp.table;
        let next = Some(&self.text[p..]);
        let in_effect = self.ck.scope.in_effect(linked, table, &self.ck.infer, &goal.asm, goal.literal, next);
        let mut any_left = false;
        for &(op, frame, rank) in &in_effect {
            let m = table.get(op);
            if m.left_rec {
                any_left = true;
                continue;
            }
            if !(m.closed || m.prio >= goal.min_rank) || !self.prefilter(p, m.first_part.as_deref(), goal.literal) {
                continue;
            }
            self.attempt(vars, &mut out, false, |s| s.apply_op(op, frame, rank, p, goal, Some(&expected), None));
        }
        if any_left {
            let items = self.lead_closure(p, goal);
            let lead_goal = Goal { expected: Type::VOID, asm: goal.asm.clone(), min_rank: 0, literal: goal.literal };
            let (_, lead_vars) = self.canon(&lead_goal, true);
            for item in items.iter().filter(|o| o.derived && (o.closed || o.prio >= goal.min_rank)) {
                self.attempt(vars, &mut out, false, |s| {
                    let h = s.revive(item, &lead_vars)?;
                    s.ck.infer.assignable(&h.ty, &expected).then_some(h)
                });
            }
        }
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn turnstile_alternatives(
        &mut self,
        p: usize,
        goal: &Goal,
        expected: &Type,
        assumption: &Type,
        result: &Type,
        vars: &[TyVar],
        out: &mut Vec<Outcome>,
    ) {
        // A variable already holding a context-sensitive value passes through.
        self.attempt(vars, out, false, |s| {
            let h = s.kernel(p, goal, expected)?;
            matches!(h.expr.kind, ExprKind::Local(_)).then_some(())?;
            s.ck.infer.unify(&h.ty, expected).ok()?;
            Some(h)
        });
        let mut asm = goal.asm.clone();
        asm.push(assumption.clone());
        let inner = Goal { expected: result.clone(), asm: asm.clone(), min_rank: goal.min_rank, literal: goal.literal };
        self.attempt(vars, out, false, |s| {
            let h = s.parse_goal(p, &inner)?;
            let kind = ExprKind::ContextOperand {
                assumption: s.ck.infer.resolve(assumption),
                body: Box::new(ContextBody::Expr(h.expr.clone())),
            };
            Some(Hit { expr: mk(kind, expected.clone(), p, h.end), ty: expected.clone(), ..h })
        });
        if self.ck.infer.shallow(result).is_void() && self.text[p..].starts_with('{') {
            self.attempt(vars, out, false, |s| {
                let tparams = s.ck.tparams.clone();
                let (block, end) = match crate::loader::read_block_at(s.text, s.file, p, &tparams) {
                    Ok(r) => r,
                    Err(d) => {
                        s.nested(d);
                        return None;
                    }
                };
                let tb = match s.ck.check_operand_block(asm, &block) {
                    Ok(tb) => tb,
                    Err(d) => {
                        s.nested(d);
                        return None;
                    }
                };
                let kind = ExprKind::ContextOperand {
                    assumption: s.ck.infer.resolve(assumption),
                    body: Box::new(ContextBody::Block(tb)),
                };
                Some(Hit { expr: mk(kind, expected.clone(), p, end), ty: expected.clone(), end, prio: 0, closed: true, rank: KERNEL_RANK })
            });
        }
    }

    /// Cheap check that an operator's leading name part is present.
    fn prefilter(&mut self, p: usize, part: Option<&str>, literal: bool) -> bool {
        match part {
            Some(t) => self.name_part(p, t, literal).is_some(),
            None => true,
        }
    }

    /// Every parse starting at `p` that may serve as the leading operand of
    /// a left-recursive operator, grown to a fixpoint. Shared by all goals at
    /// the same position and assumption stack.
    fn lead_closure(&mut self, p: usize, goal: &Goal) -> Rc<Vec<Outcome>> {
        let lead_goal = Goal { expected: Type::VOID, asm: goal.asm.clone(), min_rank: 0, literal: goal.literal };
        let (id, vars) = self.canon(&lead_goal, true);
        match self.leads.get(&(p, id)) {
            Some(LeadMemo::Done(v)) => return v.clone(),
            Some(LeadMemo::InProgress) => return Rc::new(Vec::new()),
            None => {}
        }
        self.leads.insert((p, id), LeadMemo::InProgress);
        self.ck.stats.evaluations += 1;

        let linked = self.ck.linked();
        let table = &self.ck.comp.table;
        let start = if goal.literal { p } else { skip_ws(self.text, p) };
        let next = Some(&self.text[start..]);
        let in_effect = self.ck.scope.in_effect(linked, table, &self.ck.infer, &goal.asm, goal.literal, next);
        let mut items: Vec<Outcome> = Vec::new();
        let any = self.ck.infer.fresh(Kind::Type);
        if !goal.literal {
            self.attempt(&vars, &mut items, false, |s| s.kernel(p, &lead_goal, &any));
        }
        for &(op, frame, rank) in &in_effect {
            let m = table.get(op);
            if m.left_rec || !self.prefilter(p, m.first_part.as_deref(), goal.literal) {
                continue;
            }
            self.attempt(&vars, &mut items, false, |s| s.apply_op(op, frame, rank, p, &lead_goal, Some(&any), None));
        }
        let mut seen: HashSet<(usize, String, u32)> =
            items.iter().map(|o| (o.end, o.ty.to_string(), o.prio)).collect();
        let left: Vec<_> = in_effect.iter().filter(|(op, _, _)| table.get(*op).left_rec).copied().collect();
        let mut i = 0;
        while i < items.len() && items.len() < LEAD_CAP {
            let item = items[i].clone();
            i += 1;
            for &(op, frame, rank) in &left {
                let m = table.get(op);
                if !(item.closed || item.prio >= m.slot_min[0]) {
                    continue;
                }
                let after = if goal.literal { item.end } else { skip_ws(self.text, item.end) };
                if !self.prefilter(after, m.second_part.as_deref(), goal.literal) {
                    continue;
                }
                let mut grown = Vec::new();
                self.attempt(&vars, &mut grown, true, |s| {
                    let h = s.revive(&item, &vars)?;
                    s.apply_op(op, frame, rank, p, &lead_goal, None, Some(h))
                });
                for o in grown {
                    if seen.insert((o.end, o.ty.to_string(), o.prio)) {
                        items.push(o);
                    }
                }
            }
        }
        self.ck.stats.memo_entries += items.len();
        let items = Rc::new(items);
        self.leads.insert((p, id), LeadMemo::Done(items.clone()));
        items
    }

    /// Applies one operator at `p`. With `lead`, the first operand is that
    /// already-parsed expression.
    #[allow(clippy::too_many_arguments)]
    fn apply_op(
        &mut self,
        op: OpId,
        frame: Option<usize>,
        rank: SourceRank,
        p: usize,
        goal: &Goal,
        expected: Option<&Type>,
        lead: Option<Hit>,
    ) -> Option<Hit> {
        let linked = self.ck.linked();
        let decl = linked.op(op);
        let meta = self.ck.comp.table.get(op);
        let inst = instantiate(linked, op, frame.map(|d| &goal.asm[d]), &mut self.ck.infer);
        if let Some(e) = expected {
            if !self.ck.infer.assignable(&inst.ret, e) {
                return None;
            }
        }
        let req_frames = check_requires(&inst.requires, &goal.asm, &mut self.ck.infer)?;
        let cx = OpCtx { decl, meta, inst: &inst, goal };
        let mut acc = MatchAcc::default();
        let start = lead.as_ref().map_or(p, |h| h.expr.start);
        let end = match lead {
            Some(h) => self.match_operand(&cx, 0, h.expr.start, 0, &mut acc, Some(h))?,
            None => self.match_from(&cx, 0, p, 0, &mut acc)?,
        };
        if !bounds_hold(&inst.bounds, &mut self.ck.infer) {
            return None;
        }
        let ty = self.ck.infer.resolve(&inst.ret);
        let kind = ExprKind::OperatorApp {
            op,
            type_args: inst.type_args.iter().map(|t| self.ck.infer.resolve(t)).collect(),
            args: acc.args,
            names: acc.names,
            frame,
            req_frames,
        };
        Some(Hit { expr: mk(kind, ty.clone(), start, end), ty, end, prio: meta.prio, closed: meta.closed, rank })
    }

    fn match_from(&mut self, cx: &OpCtx, idx: usize, pos: usize, k: usize, acc: &mut MatchAcc) -> Option<usize> {
        let Some(elem) = cx.decl.syntax.get(idx) else { return Some(pos) };
        match elem {
            SyntaxElem::NamePart(t) => {
                let e = self.name_part(pos, t, cx.goal.literal)?;
                self.match_from(cx, idx + 1, e, k, acc)
            }
            SyntaxElem::NameOperand(n) => {
                let name_type = name_param_type(cx.decl, self.ck.linked().class(self.ck.linked().op_class(cx.meta.op)), n)?;
                let (ast, e) = self.name_operand(pos, &name_type, cx.goal.literal)?;
                let snap = self.ck.infer.snapshot();
                if self.ck.infer.unify(&cx.inst.env[n], &Type::Name(ast.clone())).is_err() {
                    self.ck.infer.rollback(snap);
                    if let Type::Name(bound) = self.ck.infer.resolve(&cx.inst.env[n]) {
                        let at = if cx.goal.literal { pos } else { skip_ws(self.text, pos) };
                        self.miss_with(at, || format!("`{}`", bound.source));
                    }
                    return None;
                }
                acc.names.push(ast);
                let r = self.match_from(cx, idx + 1, e, k, acc);
                if r.is_none() {
                    acc.names.pop();
                    self.ck.infer.rollback(snap);
                }
                r
            }
            SyntaxElem::Operand { .. } => self.match_operand(cx, idx, pos, k, acc, None),
        }
    }

    /// Matches the operand at syntax element `idx` (the `k`-th operand),
    /// optionally seeded with an already-parsed first item.
    fn match_operand(
        &mut self,
        cx: &OpCtx,
        idx: usize,
        pos: usize,
        k: usize,
        acc: &mut MatchAcc,
        first: Option<Hit>,
    ) -> Option<usize> {
        let SyntaxElem::Operand { repetition, .. } = &cx.decl.syntax[idx] else { return None };
        let ty = cx.inst.params[k].clone();
        let min_rank = cx.meta.slot_min[idx];
        let sub = Goal { expected: ty.clone(), asm: cx.goal.asm.clone(), min_rank, literal: cx.goal.literal };
        let mut items: Vec<Hit> = Vec::new();
        let mut snaps = vec![self.ck.infer.snapshot()];
        let mut cur = pos;
        let seeded = usize::from(first.is_some());
        if let Some(h) = first {
            if !(h.closed || h.prio >= min_rank) || !self.ck.infer.assignable(&h.ty, &ty) {
                return None;
            }
            cur = h.end;
            items.push(h);
            snaps.push(self.ck.infer.snapshot());
        }
        let max = if *repetition == Repetition::One { 1 } else { usize::MAX };
        while items.len() < max {
            match self.parse_goal(cur, &sub) {
                Some(h) if h.end > cur => {
                    cur = h.end;
                    items.push(h);
                    snaps.push(self.ck.infer.snapshot());
                }
                _ => break,
            }
        }
        let min = match repetition {
            Repetition::Star => 0,
            _ => 1,
        };
        let lo = min.max(seeded);
        for n in (lo..=items.len()).rev() {
            self.ck.infer.rollback(snaps[n]);
            let end = if n == 0 { pos } else { items[n - 1].end };
            let arg = if *repetition == Repetition::One {
                OpArg::Single(items[0].expr.clone())
            } else {
                OpArg::Many(items[..n].iter().map(|h| h.expr.clone()).collect())
            };
            acc.args.push(arg);
            if let Some(e) = self.match_from(cx, idx + 1, end, k + 1, acc) {
                return Some(e);
            }
            acc.args.pop();
        }
        None
    }
}

/// Declared name type of a `NAME`-kind type parameter of an operator or its
/// class.
fn name_param_type(decl: &OperatorDecl, class: &ClassDecl, name: &str) -> Option<QName> {
    decl.type_params.iter().chain(&class.type_params).find(|p| p.name == name).and_then(|p| match &p.kind {
        TypeParamKind::Name { name_type } => Some(name_type.clone()),
        _ => None,
    })
}
