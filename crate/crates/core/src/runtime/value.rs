//! Runtime values.

use std::cell::RefCell;
use std::fmt;
use std::rc::Rc;

use indexmap::IndexMap;

use crate::lower::Core;
use crate::syntax::ClassId;

use super::vfs::Handle;
use super::Env;

pub struct Object {
    pub class: ClassId,
    pub fields: RefCell<Vec<Value>>,
}

pub struct Closure {
    pub param: String,
    pub body: Rc<Core>,
    pub env: Env,
}

/// Hashable identity of a map key: scalars by value, everything else by
/// reference.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Key {
    Int(i64),
    Bool(bool),
    Str(Rc<str>),
    Unit,
    Null,
    Ref(usize),
}

pub type MapCell = RefCell<IndexMap<Key, (Value, Value)>>;

#[derive(Clone)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Str(Rc<str>),
    Unit,
    Null,
    Object(Rc<Object>),
    Closure(Rc<Closure>),
    List(Rc<RefCell<Vec<Value>>>),
    Map(Rc<MapCell>),
    Optional(Option<Rc<Value>>),
    Reader(Rc<RefCell<Handle>>),
    Lazy,
}

impl Value {
    pub fn str(s: &str) -> Value {
        Value::Str(Rc::from(s))
    }

    pub fn key(&self) -> Key {
        fn addr<T: ?Sized>(r: &Rc<T>) -> usize {
            Rc::as_ptr(r) as *const u8 as usize
        }
        match self {
            Value::Int(v) => Key::Int(*v),
            Value::Bool(b) => Key::Bool(*b),
            Value::Str(s) => Key::Str(s.clone()),
            Value::Unit | Value::Lazy => Key::Unit,
            Value::Null => Key::Null,
            Value::Object(o) => Key::Ref(addr(o)),
            Value::Closure(c) => Key::Ref(addr(c)),
            Value::List(l) => Key::Ref(addr(l)),
            Value::Map(m) => Key::Ref(addr(m)),
            Value::Reader(r) => Key::Ref(addr(r)),
            Value::Optional(o) => match o {
                None => Key::Null,
                Some(v) => v.key(),
            },
        }
    }

    pub fn new_list(items: Vec<Value>) -> Value {
        Value::List(Rc::new(RefCell::new(items)))
    }

    pub fn new_map() -> Value {
        Value::Map(Rc::new(RefCell::new(IndexMap::new())))
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }
}

/// Scalars compare by value, optionals structurally, everything else by
/// identity.
impl PartialEq for Value {
    fn eq(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Optional(a), Value::Optional(b)) => match (a, b) {
                (None, None) => true,
                (Some(x), Some(y)) => x == y,
                _ => false,
            },
            _ => std::mem::discriminant(self) == std::mem::discriminant(other) && self.key() == other.key(),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Str(s) => write!(f, "{s}"),
            Value::Unit => write!(f, "()"),
            Value::Null => write!(f, "null"),
            Value::Object(o) => write!(f, "<object class{}>", o.class.0),
            Value::Closure(_) => write!(f, "<function>"),
            Value::List(l) => {
                write!(f, "[")?;
                for (i, v) in l.borrow().iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "]")
            }
            Value::Map(m) => {
                write!(f, "{{")?;
                for (i, (k, v)) in m.borrow().values().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{k}: {v}")?;
                }
                write!(f, "}}")
            }
            Value::Optional(None) => write!(f, "Optional.empty"),
            Value::Optional(Some(v)) => write!(f, "Optional[{v}]"),
            Value::Reader(r) => write!(f, "<reader {}>", r.borrow().path),
            Value::Lazy => write!(f, "<lazy>"),
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Str(s) => write!(f, "{s:?}"),
            other => write!(f, "{other}"),
        }
    }
}
