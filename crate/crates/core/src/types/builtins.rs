//! Signatures of the built-in classes, methods and functions.

use crate::syntax::{Kind, Type};

/// Built-in classes and their type parameters.
pub const CLASSES: &[(&str, &[&str])] = &[
    ("Map", &["K", "V"]),
    ("List", &["T"]),
    ("Optional", &["T"]),
    ("Function", &["A", "B"]),
    ("Lazy", &[]),
    ("Closeable", &[]),
    ("Reader", &[]),
];

pub fn is_builtin_class(name: &str) -> bool {
    CLASSES.iter().any(|(n, _)| *n == name) || crate::syntax::Prim::from_keyword(name).is_some()
}

pub fn class_arity(name: &str) -> Option<usize> {
    CLASSES.iter().find(|(n, _)| *n == name).map(|(_, ps)| ps.len())
}

pub fn class_params(name: &str) -> &'static [&'static str] {
    CLASSES.iter().find(|(n, _)| *n == name).map(|(_, ps)| *ps).unwrap_or(&[])
}

/// The fixed built-in subclass relation.
pub fn is_subclass(sub: &str, sup: &str) -> bool {
    sub == sup || matches!((sub, sup), ("Reader", "Closeable"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuiltinSig {
    /// Runtime dispatch key.
    pub key: &'static str,
    /// Generic parameters of the method itself, instantiated fresh per call.
    pub type_params: &'static [&'static str],
    pub params: Vec<Type>,
    pub ret: Type,
}

fn p(name: &str) -> Type {
    Type::Param { name: name.to_string(), kind: Kind::Type }
}

fn sig(key: &'static str, params: Vec<Type>, ret: Type) -> BuiltinSig {
    BuiltinSig { key, type_params: &[], params, ret }
}

/// Instance method of a built-in class; `"String"` names the string type.
/// Types mention the class's own parameters by name.
pub fn method(class: &str, name: &str) -> Option<BuiltinSig> {
    let s = match (class, name) {
        ("Map", "get") => sig("Map.get", vec![p("K")], p("V")),
        ("Map", "put") => sig("Map.put", vec![p("K"), p("V")], Type::VOID),
        ("Map", "contains") | ("Map", "containsKey") => sig("Map.contains", vec![p("K")], Type::BOOL),
        ("Map", "isEmpty") => sig("Map.isEmpty", vec![], Type::BOOL),
        ("Map", "size") => sig("Map.size", vec![], Type::INT),
        ("Map", "keys") => sig("Map.keys", vec![], Type::class("List", vec![p("K")])),
        ("List", "add") => sig("List.add", vec![p("T")], Type::VOID),
        ("List", "get") => sig("List.get", vec![Type::INT], p("T")),
        ("List", "size") => sig("List.size", vec![], Type::INT),
        ("List", "isEmpty") => sig("List.isEmpty", vec![], Type::BOOL),
        ("String", "isEmpty") => sig("String.isEmpty", vec![], Type::BOOL),
        ("String", "startsWith") => sig("String.startsWith", vec![Type::STR], Type::BOOL),
        ("String", "substring") => sig("String.substring", vec![Type::INT], Type::STR),
        ("String", "length") => sig("String.length", vec![], Type::INT),
        ("String", "equals") => sig("String.equals", vec![Type::STR], Type::BOOL),
        ("Optional", "isPresent") => sig("Optional.isPresent", vec![], Type::BOOL),
        ("Optional", "get") => sig("Optional.get", vec![], p("T")),
        ("Function", "apply") => sig("Function.apply", vec![p("A")], p("B")),
        ("Reader", "readLine") => sig("Reader.readLine", vec![], Type::STR),
        ("Reader", "close") | ("Closeable", "close") => sig("Closeable.close", vec![], Type::VOID),
        _ => return None,
    };
    Some(s)
}

/// `Class.name(..)` static methods.
pub fn static_method(class: &str, name: &str) -> Option<BuiltinSig> {
    match (class, name) {
        ("Optional", "of") => Some(BuiltinSig {
            key: "Optional.of",
            type_params: &["T"],
            params: vec![p("T")],
            ret: Type::class("Optional", vec![p("T")]),
        }),
        ("Optional", "empty") => Some(BuiltinSig {
            key: "Optional.empty",
            type_params: &["T"],
            params: vec![],
            ret: Type::class("Optional", vec![p("T")]),
        }),
        _ => None,
    }
}

/// Constructor parameters of a built-in class.
pub fn constructor(class: &str) -> Option<BuiltinSig> {
    let s = match class {
        "Map" => sig("Map.new", vec![], Type::VOID),
        "List" => sig("List.new", vec![], Type::VOID),
        "Lazy" => sig("Lazy.new", vec![], Type::VOID),
        "Reader" => sig("Reader.new", vec![Type::STR], Type::VOID),
        _ => return None,
    };
    Some(s)
}

/// Free functions.
pub fn function(name: &str) -> Option<BuiltinSig> {
    match name {
        "println" => Some(BuiltinSig { key: "println", type_params: &["T"], params: vec![p("T")], ret: Type::VOID }),
        "print" => Some(BuiltinSig { key: "print", type_params: &["T"], params: vec![p("T")], ret: Type::VOID }),
        "fail" => Some(sig("fail", vec![Type::STR], Type::VOID)),
        "str" => Some(BuiltinSig { key: "str", type_params: &["T"], params: vec![p("T")], ret: Type::STR }),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookups() {
        assert!(method("Map", "get").is_some());
        assert!(method("Map", "frobnicate").is_none());
        assert_eq!(class_arity("Function"), Some(2));
        assert!(is_builtin_class("Lazy"));
        assert!(is_subclass("Reader", "Closeable"));
        assert!(!is_subclass("Closeable", "Reader"));
    }
}
