//! Which operators are in effect for a goal, and their instantiation.

use std::collections::HashMap;

use crate::loader::Linked;
use crate::priority::{qualify, PriorityOrder};
use crate::syntax::*;

use super::Infer;

/// Source position used to break ties between equally long parses:
/// kernel forms, then instance operators innermost frame first, then static
/// operators by import order and declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceRank(pub u8, pub u32, pub u32);

pub const KERNEL_RANK: SourceRank = SourceRank(0, 0, 0);

/// Per-operator facts that do not depend on the use site.
#[derive(Debug, Clone)]
pub struct OpMeta {
    pub op: OpId,
    pub class: ClassId,
    pub decl_index: u32,
    pub is_instance: bool,
    pub is_literal: bool,
    pub left_rec: bool,
    pub closed: bool,
    /// Rank of the operator's own priority.
    pub prio: u32,
    /// Minimum candidate rank per syntax element (0 for non-operands).
    pub slot_min: Vec<u32>,
    /// Leading name part, used to skip candidates that cannot match.
    pub first_part: Option<String>,
    /// Name part following a leading operand.
    pub second_part: Option<String>,
}

/// Operator metadata for a whole linked program.
#[derive(Debug, Clone)]
pub struct OpTable {
    pub meta: Vec<OpMeta>,
}

impl OpTable {
    pub fn build(linked: &Linked, order: &PriorityOrder) -> Self {
        let mut meta = Vec::with_capacity(linked.ops.len());
        for (i, info) in linked.ops.iter().enumerate() {
            let class = linked.class(info.class);
            let op = &class.operators[info.index];
            let owner = op.priority.as_ref().map(|q| qualify(&class.name, q));
            let slot_min = op
                .syntax
                .iter()
                .map(|e| match e {
                    SyntaxElem::Operand { priority, .. } => {
                        let ann = priority.as_ref().map(|q| qualify(&class.name, q));
                        order.slot_min_rank(owner.as_ref(), ann.as_ref())
                    }
                    _ => 0,
                })
                .collect();
            let part = |e: Option<&SyntaxElem>| match e {
                Some(SyntaxElem::NamePart(t)) => Some(t.clone()),
                _ => None,
            };
            meta.push(OpMeta {
                op: OpId(i as u32),
                class: info.class,
                decl_index: info.index as u32,
                is_instance: !op.is_static && !op.is_literal,
                is_literal: op.is_literal,
                left_rec: op.is_left_recursive(),
                closed: op.is_closed(),
                prio: order.rank_or_bottom(owner.as_ref()),
                slot_min,
                first_part: part(op.syntax.first()),
                second_part: if op.is_left_recursive() { part(op.syntax.get(1)) } else { None },
            });
        }
        OpTable { meta }
    }

    pub fn get(&self, op: OpId) -> &OpMeta {
        &self.meta[op.0 as usize]
    }
}

/// Static and literal operators visible from one file, in source-rank order.
#[derive(Debug, Clone, Default)]
pub struct OperatorScope {
    pub statics: Vec<(OpId, SourceRank)>,
    pub literals: Vec<(OpId, SourceRank)>,
    statics_index: LeadIndex,
    literals_index: LeadIndex,
}

/// Positions in an operator list grouped by how their leading name part
/// starts: a whole identifier word (which must match the input's identifier
/// exactly), otherwise its first byte. Operators that start with an operand
/// are listed in `unled`.
#[derive(Debug, Clone, Default)]
struct LeadIndex {
    by_word: HashMap<String, Vec<usize>>,
    by_byte: HashMap<u8, Vec<usize>>,
    unled: Vec<usize>,
}

impl LeadIndex {
    fn build(table: &OpTable, ops: &[(OpId, SourceRank)], literal: bool) -> Self {
        let mut index = LeadIndex::default();
        for (i, (op, _)) in ops.iter().enumerate() {
            let part = table.get(*op).first_part.as_deref();
            let word = if literal { part } else { part.and_then(|p| p.split_whitespace().next()) };
            match word {
                Some(w) if !literal && w.chars().all(is_ident_char) => {
                    index.by_word.entry(w.to_string()).or_default().push(i)
                }
                Some(w) if !w.is_empty() => index.by_byte.entry(w.as_bytes()[0]).or_default().push(i),
                _ => index.unled.push(i),
            }
        }
        index
    }

    /// Positions that can start at the beginning of `rest`, in list order.
    fn select(&self, rest: &str) -> Vec<usize> {
        let mut out = self.unled.clone();
        if let Some(b) = rest.bytes().next() {
            out.extend(self.by_byte.get(&b).into_iter().flatten());
        }
        let word_len = rest.find(|c: char| !is_ident_char(c)).unwrap_or(rest.len());
        if word_len > 0 {
            out.extend(self.by_word.get(&rest[..word_len]).into_iter().flatten());
        }
        out.sort_unstable();
        out
    }
}

impl OperatorScope {
    pub fn for_file(linked: &Linked, table: &OpTable, file: FileId) -> Self {
        let scope = linked.scope(file);
        let mut statics = Vec::new();
        for (imp_idx, cid) in scope.imports.iter().enumerate() {
            for &op in &linked.classes[cid.0 as usize].op_ids {
                let m = table.get(op);
                if !m.is_instance && !m.is_literal {
                    statics.push((op, SourceRank(2, imp_idx as u32, m.decl_index)));
                }
            }
        }
        let mut literals = Vec::new();
        for cid in &scope.literal_dsls {
            for &op in &linked.classes[cid.0 as usize].op_ids {
                let m = table.get(op);
                if m.is_literal {
                    literals.push((op, SourceRank(2, cid.0, m.decl_index)));
                }
            }
        }
        let statics_index = LeadIndex::build(table, &statics, false);
        let literals_index = LeadIndex::build(table, &literals, true);
        OperatorScope { statics, literals, statics_index, literals_index }
    }

    /// Whether any literal operator produces values of class `name`.
    pub fn has_literal_type(&self, linked: &Linked, name: &str) -> bool {
        self.literals.iter().any(|(op, _)| linked.op(*op).return_type.class_name() == Some(name))
    }

    /// All operators in effect under `asm` (innermost frame last), in
    /// source-rank order, with the frame supplying each instance operator.
    /// With `next` (the input from the expression's first non-blank
    /// character on), static and literal operators whose leading name part
    /// cannot start there are left out.
    pub fn in_effect(
        &self,
        linked: &Linked,
        table: &OpTable,
        infer: &Infer,
        asm: &[Type],
        literal: bool,
        next: Option<&str>,
    ) -> Vec<(OpId, Option<usize>, SourceRank)> {
        let pick = |ops: &[(OpId, SourceRank)], index: &LeadIndex| -> Vec<(OpId, Option<usize>, SourceRank)> {
            match next {
                Some(rest) => index.select(rest).into_iter().map(|i| (ops[i].0, None, ops[i].1)).collect(),
                None => ops.iter().map(|(op, r)| (*op, None, *r)).collect(),
            }
        };
        if literal {
            return pick(&self.literals, &self.literals_index);
        }
        let mut out = Vec::new();
        for (depth, frame) in asm.iter().enumerate().rev() {
            let Some(name) = infer.shallow(frame).class_name().map(str::to_string) else { continue };
            let Some(cid) = linked.class_named(&name) else { continue };
            let inner_distance = (asm.len() - 1 - depth) as u32;
            for &op in &linked.classes[cid.0 as usize].op_ids {
                let m = table.get(op);
                if m.is_instance {
                    out.push((op, Some(depth), SourceRank(1, inner_distance, m.decl_index)));
                }
            }
        }
        out.extend(pick(&self.statics, &self.statics_index));
        out
    }
}

/// A generic signature with its type parameters replaced by fresh
/// variables (or by the frame's type arguments for class parameters).
#[derive(Debug, Clone)]
pub struct Instance {
    pub type_args: Vec<Type>,
    pub env: HashMap<String, Type>,
    pub params: Vec<Type>,
    pub ret: Type,
    pub requires: Vec<Type>,
    pub bounds: Vec<(Type, Type)>,
}

/// Substitution for type parameters, fresh variables for the operator's own
/// parameters, and `(variable, bound)` pairs still to check.
pub type Instantiation = (HashMap<String, Type>, Vec<Type>, Vec<(Type, Type)>);

pub fn instantiate_generic(
    infer: &mut Infer,
    class_params: &[TypeParam],
    frame: Option<&Type>,
    own_params: &[TypeParam],
) -> Instantiation {
    let mut env: HashMap<String, Type> = HashMap::new();
    let mut bounds = Vec::new();
    let frame_args: Vec<Type> = frame.map(|f| infer.resolve(f).class_args().to_vec()).unwrap_or_default();
    for (i, p) in class_params.iter().enumerate() {
        let t = frame_args.get(i).cloned().unwrap_or_else(|| infer.fresh(p.kind()));
        env.insert(p.name.clone(), t);
    }
    let mut type_args = Vec::new();
    for p in own_params {
        let t = infer.fresh(p.kind());
        env.insert(p.name.clone(), t.clone());
        type_args.push(t);
    }
    let subst = |t: &Type| t.subst_params(&|n| env.get(n).cloned());
    for p in class_params.iter().chain(own_params) {
        if let TypeParamKind::Type { bound: Some(b) } = &p.kind {
            bounds.push((env[&p.name].clone(), subst(b)));
        }
    }
    (env, type_args, bounds)
}

pub fn instantiate(linked: &Linked, op: OpId, frame: Option<&Type>, infer: &mut Infer) -> Instance {
    let class = linked.class(linked.op_class(op));
    let decl = linked.op(op);
    let (env, type_args, bounds) = instantiate_generic(infer, &class.type_params, frame, &decl.type_params);
    let subst = |t: &Type| t.subst_params(&|n| env.get(n).cloned());
    Instance {
        params: decl.params.iter().map(|p| subst(&p.ty)).collect(),
        ret: subst(&decl.return_type),
        requires: decl.requires.iter().map(&subst).collect(),
        type_args,
        bounds,
        env,
    }
}

/// For each required class, the innermost frame it unifies with.
pub fn check_requires(required: &[Type], asm: &[Type], infer: &mut Infer) -> Option<Vec<usize>> {
    let mut frames = Vec::with_capacity(required.len());
    for req in required {
        let found = (0..asm.len()).rev().find(|&i| {
            let snap = infer.snapshot();
            let ok = infer.unify(req, &asm[i]).is_ok();
            if !ok {
                infer.rollback(snap);
            }
            ok
        })?;
        frames.push(found);
    }
    Some(frames)
}

/// Bounds hold whenever the bounded variable is already known.
pub fn bounds_hold(bounds: &[(Type, Type)], infer: &mut Infer) -> bool {
    bounds.iter().all(|(t, b)| {
        let t = infer.shallow(t);
        matches!(t, Type::Var(_)) || infer.assignable(&t, b) || matches!(t, Type::Param { .. })
    })
}

/// A candidate operator for a goal, with its instantiated signature.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub op: OpId,
    pub frame: Option<usize>,
    pub rank: SourceRank,
    pub inst: Instance,
    pub req_frames: Vec<usize>,
}

/// Operators in effect whose return type unifies with `expected`, whose
/// priority meets `min_rank` and whose requires clause is satisfied.
/// Each candidate is checked from the same starting substitution.
#[allow(clippy::too_many_arguments)]
pub fn candidates_for(
    linked: &Linked,
    table: &OpTable,
    scope: &OperatorScope,
    infer: &mut Infer,
    expected: &Type,
    asm: &[Type],
    min_rank: u32,
    literal: bool,
) -> Vec<Candidate> {
    let mut out = Vec::new();
    for (op, frame, rank) in scope.in_effect(linked, table, infer, asm, literal, None) {
        let m = table.get(op);
        if !(m.closed || m.prio >= min_rank) {
            continue;
        }
        let snap = infer.snapshot();
        let inst = instantiate(linked, op, frame.map(|d| &asm[d]), infer);
        if infer.assignable(&inst.ret, expected) {
            if let Some(req_frames) = check_requires(&inst.requires, asm, infer) {
                out.push(Candidate { op, frame, rank, inst, req_frames });
            }
        }
        infer.rollback(snap);
    }
    out
}
