//! Unification, operator scopes and body checking.

pub mod builtins;
pub mod check;
pub mod scope;

use std::collections::HashMap;

use thiserror::Error;

use crate::syntax::{name_ast_equal, Kind, Prim, TyVar, Type};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("type mismatch: `{0}` vs `{1}`")]
pub struct UnifyError(pub Type, pub Type);

/// Undo point for `Infer::rollback`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Snapshot(usize);

/// Substitution with an undo trail. Variables of kind `Type` never bind
/// `void` or a name; variables of kind `Name` bind only names.
#[derive(Debug, Clone, Default)]
pub struct Infer {
    binds: Vec<Option<Type>>,
    kinds: Vec<Kind>,
    trail: Vec<u32>,
}

impl Infer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fresh_var(&mut self, kind: Kind) -> TyVar {
        self.binds.push(None);
        self.kinds.push(kind);
        TyVar { id: self.binds.len() as u32 - 1, kind }
    }

    pub fn fresh(&mut self, kind: Kind) -> Type {
        Type::Var(self.fresh_var(kind))
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot(self.trail.len())
    }

    pub fn rollback(&mut self, s: Snapshot) {
        while self.trail.len() > s.0 {
            let v = self.trail.pop().expect("trail entry");
            self.binds[v as usize] = None;
        }
    }

    fn bound(&self, v: TyVar) -> Option<&Type> {
        self.binds.get(v.id as usize).and_then(Option::as_ref)
    }

    /// Follows variable bindings at the root only.
    pub fn shallow(&self, t: &Type) -> Type {
        let mut cur = t;
        while let Type::Var(v) = cur {
            match self.bound(*v) {
                Some(next) => cur = next,
                None => break,
            }
        }
        cur.clone()
    }

    /// Applies the substitution everywhere.
    pub fn resolve(&self, t: &Type) -> Type {
        match self.shallow(t) {
            Type::Class { name, args } => Type::Class { name, args: args.iter().map(|a| self.resolve(a)).collect() },
            Type::Turnstile { assumption, result } => Type::Turnstile {
                assumption: Box::new(self.resolve(&assumption)),
                result: Box::new(self.resolve(&result)),
            },
            other => other,
        }
    }

    pub fn is_unbound_var(&self, t: &Type) -> bool {
        matches!(self.shallow(t), Type::Var(_))
    }

    fn occurs(&self, v: TyVar, t: &Type) -> bool {
        let mut found = false;
        self.resolve(t).visit_vars(&mut |u| found |= u.id == v.id);
        found
    }

    fn bind(&mut self, v: TyVar, t: Type) -> Result<(), UnifyError> {
        let ok = match (v.kind, &t) {
            (Kind::Name, Type::Name(_)) => true,
            (Kind::Name, Type::Var(u)) => u.kind == Kind::Name,
            (Kind::Name, _) => false,
            (Kind::Type, Type::Name(_)) | (Kind::Type, Type::Prim(Prim::Void)) => false,
            (Kind::Type, Type::Var(u)) => u.kind == Kind::Type,
            (Kind::Type, _) => true,
        };
        if !ok || self.occurs(v, &t) {
            return Err(UnifyError(Type::Var(v), t));
        }
        self.binds[v.id as usize] = Some(t);
        self.trail.push(v.id);
        Ok(())
    }

    /// Most general unifier extending the current substitution. Bindings made
    /// before a failure are left in place; callers snapshot and roll back.
    pub fn unify(&mut self, a: &Type, b: &Type) -> Result<(), UnifyError> {
        let a = self.shallow(a);
        let b = self.shallow(b);
        match (&a, &b) {
            (Type::Var(x), Type::Var(y)) if x.id == y.id => Ok(()),
            (Type::Var(x), _) => self.bind(*x, b.clone()),
            (_, Type::Var(y)) => self.bind(*y, a.clone()),
            (Type::Prim(x), Type::Prim(y)) if x == y => Ok(()),
            (Type::Class { name: n1, args: a1 }, Type::Class { name: n2, args: a2 })
                if n1.last() == n2.last() && a1.len() == a2.len() =>
            {
                for (x, y) in a1.iter().zip(a2) {
                    self.unify(x, y).map_err(|_| UnifyError(a.clone(), b.clone()))?;
                }
                Ok(())
            }
            (
                Type::Turnstile { assumption: s1, result: r1 },
                Type::Turnstile { assumption: s2, result: r2 },
            ) => {
                self.unify(s1, s2)?;
                self.unify(r1, r2)
            }
            (Type::Param { name: x, .. }, Type::Param { name: y, .. }) if x == y => Ok(()),
            (Type::Name(x), Type::Name(y)) if name_ast_equal(x, y) => Ok(()),
            _ => Err(UnifyError(a, b)),
        }
    }

    /// `actual` may be used where `expected` is required: unification, or a
    /// built-in subclass relation between ground class types. Leaves no
    /// bindings behind on failure.
    pub fn assignable(&mut self, actual: &Type, expected: &Type) -> bool {
        let snap = self.snapshot();
        if self.unify(actual, expected).is_ok() {
            return true;
        }
        self.rollback(snap);
        let (a, e) = (self.shallow(actual), self.shallow(expected));
        if let (Some(x), Some(y)) = (a.class_name(), e.class_name()) {
            return builtins::is_subclass(x, y) && e.class_args().is_empty();
        }
        false
    }

    /// Current bindings, fully resolved.
    pub fn bindings(&self) -> HashMap<u32, Type> {
        self.binds
            .iter()
            .enumerate()
            .filter_map(|(i, b)| b.as_ref().map(|t| (i as u32, self.resolve(t))))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn map(k: Type, v: Type) -> Type {
        Type::class("Map", vec![k, v])
    }

    #[test]
    fn unify_map_args() {
        let mut inf = Infer::new();
        let k = inf.fresh(Kind::Type);
        let v = inf.fresh(Kind::Type);
        inf.unify(&map(k.clone(), v.clone()), &map(Type::STR, Type::INT)).unwrap();
        assert_eq!(inf.resolve(&k), Type::STR);
        assert_eq!(inf.resolve(&v), Type::INT);
    }

    #[test]
    fn unify_identity_and_mismatch() {
        let mut inf = Infer::new();
        let t = inf.fresh(Kind::Type);
        inf.unify(&t, &t).unwrap();
        assert!(inf.bindings().is_empty());
        assert!(inf.unify(&Type::INT, &Type::STR).is_err());
        assert!(inf.unify(&Type::INT, &Type::class("Map", vec![])).is_err());
    }

    #[test]
    fn type_vars_never_bind_void() {
        let mut inf = Infer::new();
        let t = inf.fresh(Kind::Type);
        assert!(inf.unify(&t, &Type::VOID).is_err());
        let n = inf.fresh(Kind::Name);
        assert!(inf.unify(&n, &Type::INT).is_err());
    }

    #[test]
    fn occurs_check() {
        let mut inf = Infer::new();
        let t = inf.fresh(Kind::Type);
        assert!(inf.unify(&t, &Type::class("List", vec![t.clone()])).is_err());
    }

    #[test]
    fn rollback_restores() {
        let mut inf = Infer::new();
        let t = inf.fresh(Kind::Type);
        let s = inf.snapshot();
        inf.unify(&t, &Type::INT).unwrap();
        inf.rollback(s);
        assert!(inf.is_unbound_var(&t));
    }

    #[test]
    fn reader_is_closeable() {
        let mut inf = Infer::new();
        assert!(inf.assignable(&Type::class("Reader", vec![]), &Type::class("Closeable", vec![])));
        assert!(!inf.assignable(&Type::class("Closeable", vec![]), &Type::class("Reader", vec![])));
    }

    /// Robinson-style reference unifier over a tiny term language, used as
    /// an independent oracle.
    #[derive(Debug, Clone)]
    enum Term {
        V(u32),
        F(&'static str, Vec<Term>),
    }

    fn oracle_unify(a: &Term, b: &Term, s: &mut HashMap<u32, Term>) -> bool {
        fn walk(t: &Term, s: &HashMap<u32, Term>) -> Term {
            match t {
                Term::V(v) => s.get(v).map(|u| walk(u, s)).unwrap_or(Term::V(*v)),
                Term::F(f, xs) => Term::F(f, xs.iter().map(|x| walk(x, s)).collect()),
            }
        }
        fn occurs(v: u32, t: &Term) -> bool {
            match t {
                Term::V(u) => *u == v,
                Term::F(_, xs) => xs.iter().any(|x| occurs(v, x)),
            }
        }
        let (a, b) = (walk(a, s), walk(b, s));
        match (&a, &b) {
            (Term::V(x), Term::V(y)) if x == y => true,
            (Term::V(x), t) | (t, Term::V(x)) => {
                if occurs(*x, t) {
                    return false;
                }
                s.insert(*x, t.clone());
                true
            }
            (Term::F(f, xs), Term::F(g, ys)) => {
                f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| oracle_unify(x, y, s))
            }
        }
    }

    fn to_type(t: &Term, vars: &[Type]) -> Type {
        match t {
            Term::V(v) => vars[*v as usize].clone(),
            Term::F("Int", _) => Type::INT,
            Term::F("Str", _) => Type::STR,
            Term::F(f, xs) => Type::class(f, xs.iter().map(|x| to_type(x, vars)).collect()),
        }
    }

    fn term() -> impl Strategy<Value = Term> {
        let leaf = prop_oneof![
            (0u32..4).prop_map(Term::V),
            Just(Term::F("Int", vec![])),
            Just(Term::F("Str", vec![])),
        ];
        leaf.prop_recursive(3, 12, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::F("Map", vec![a, b])),
                inner.prop_map(|a| Term::F("List", vec![a])),
            ]
        })
    }

    proptest! {
        #[test]
        fn agrees_with_reference_unifier(a in term(), b in term()) {
            let mut inf = Infer::new();
            let vars: Vec<Type> = (0..4).map(|_| inf.fresh(Kind::Type)).collect();
            let ta = to_type(&a, &vars);
            let tb = to_type(&b, &vars);
            let mut s = HashMap::new();
            let expect = oracle_unify(&a, &b, &mut s);
            let got = inf.unify(&ta, &tb).is_ok();
            prop_assert_eq!(got, expect);
            if got {
                prop_assert_eq!(inf.resolve(&ta), inf.resolve(&tb));
                let once = inf.resolve(&ta);
                prop_assert_eq!(inf.resolve(&once), once);
            }
        }
    }
}
