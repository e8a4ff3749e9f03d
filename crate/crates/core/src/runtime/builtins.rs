//! Native operator bodies and the built-in classes and functions.

use std::cell::RefCell;
use std::rc::Rc;

use super::{Eval, Interp, Value};

/// Names usable in `native "..."` bodies.
pub const NATIVES: &[&str] = &[
    "or", "and", "eq", "ne", "lt", "le", "gt", "ge", "int_add", "str_concat", "int_sub", "int_mul", "int_div",
    "int_rem", "not", "int_neg",
];

pub fn is_native(name: &str) -> bool {
    NATIVES.contains(&name)
}

fn int(it: &Interp, v: &Value) -> Eval<i64> {
    match v {
        Value::Int(i) => Ok(*i),
        other => it.fault(format!("expected an int, got {other}")),
    }
}

fn boolean(it: &Interp, v: &Value) -> Eval<bool> {
    match v {
        Value::Bool(b) => Ok(*b),
        other => it.fault(format!("expected a boolean, got {other}")),
    }
}

pub fn native(it: &mut Interp, name: &str, a: &[Value]) -> Eval {
    let ints = |it: &Interp| -> Eval<(i64, i64)> { Ok((int(it, &a[0])?, int(it, &a[1])?)) };
    let v = match name {
        "or" => Value::Bool(boolean(it, &a[0])? || boolean(it, &a[1])?),
        "and" => Value::Bool(boolean(it, &a[0])? && boolean(it, &a[1])?),
        "eq" => Value::Bool(a[0] == a[1]),
        "ne" => Value::Bool(a[0] != a[1]),
        "lt" => ints(it).map(|(x, y)| Value::Bool(x < y))?,
        "le" => ints(it).map(|(x, y)| Value::Bool(x <= y))?,
        "gt" => ints(it).map(|(x, y)| Value::Bool(x > y))?,
        "ge" => ints(it).map(|(x, y)| Value::Bool(x >= y))?,
        "int_add" => ints(it).map(|(x, y)| Value::Int(x.wrapping_add(y)))?,
        "int_sub" => ints(it).map(|(x, y)| Value::Int(x.wrapping_sub(y)))?,
        "int_mul" => ints(it).map(|(x, y)| Value::Int(x.wrapping_mul(y)))?,
        "int_div" | "int_rem" => {
            let (x, y) = ints(it)?;
            if y == 0 {
                return it.fault("division by zero");
            }
            Value::Int(if name == "int_div" { x.wrapping_div(y) } else { x.wrapping_rem(y) })
        }
        "str_concat" => Value::str(&format!("{}{}", a[0], a[1])),
        "not" => Value::Bool(!boolean(it, &a[0])?),
        "int_neg" => Value::Int(int(it, &a[0])?.wrapping_neg()),
        _ => return it.fault(format!("unknown native {name}")),
    };
    Ok(v)
}

pub fn construct(it: &mut Interp, key: &str, args: Vec<Value>) -> Eval {
    match key {
        "Map.new" => Ok(Value::new_map()),
        "List.new" => Ok(Value::new_list(vec![])),
        "Lazy.new" => Ok(Value::Lazy),
        "Reader.new" => {
            let Value::Str(path) = &args[0] else { return it.fault("null dereference") };
            match it.vfs.open(path) {
                Ok(h) => Ok(Value::Reader(Rc::new(RefCell::new(h)))),
                Err(e) => it.fault(e),
            }
        }
        _ => it.fault(format!("unknown constructor {key}")),
    }
}

/// Built-in functions and methods by dispatch key. Native operator names
/// are callable too, which lets hand-built core terms do arithmetic.
pub fn call(it: &mut Interp, key: &str, recv: Option<Value>, mut a: Vec<Value>) -> Eval {
    if let Some(Value::Null) = recv {
        return it.fault("null dereference");
    }
    if recv.is_none() && is_native(key) {
        return native(it, key, &a);
    }
    let v = match (key, recv) {
        ("println", None) => {
            it.print(&format!("{}\n", a[0]));
            Value::Unit
        }
        ("print", None) => {
            it.print(&a[0].to_string());
            Value::Unit
        }
        ("str", None) => Value::str(&a[0].to_string()),
        ("fail", None) => return it.fault(a[0].to_string()),
        ("Optional.of", None) => Value::Optional(Some(Rc::new(a.remove(0)))),
        ("Optional.empty", None) => Value::Optional(None),
        ("Map.get", Some(Value::Map(m))) => m.borrow().get(&a[0].key()).map(|(_, v)| v.clone()).unwrap_or(Value::Null),
        ("Map.put", Some(Value::Map(m))) => {
            let v = a.pop().unwrap();
            let k = a.pop().unwrap();
            m.borrow_mut().insert(k.key(), (k, v));
            Value::Unit
        }
        ("Map.contains", Some(Value::Map(m))) => Value::Bool(m.borrow().contains_key(&a[0].key())),
        ("Map.isEmpty", Some(Value::Map(m))) => Value::Bool(m.borrow().is_empty()),
        ("Map.size", Some(Value::Map(m))) => Value::Int(m.borrow().len() as i64),
        ("Map.keys", Some(Value::Map(m))) => Value::new_list(m.borrow().values().map(|(k, _)| k.clone()).collect()),
        ("List.add", Some(Value::List(l))) => {
            l.borrow_mut().push(a.remove(0));
            Value::Unit
        }
        ("List.get", Some(Value::List(l))) => {
            let i = int(it, &a[0])?;
            let item = usize::try_from(i).ok().and_then(|i| l.borrow().get(i).cloned());
            match item {
                Some(v) => v,
                None => return it.fault(format!("index {i} out of range")),
            }
        }
        ("List.size", Some(Value::List(l))) => Value::Int(l.borrow().len() as i64),
        ("List.isEmpty", Some(Value::List(l))) => Value::Bool(l.borrow().is_empty()),
        ("String.isEmpty", Some(Value::Str(s))) => Value::Bool(s.is_empty()),
        ("String.startsWith", Some(Value::Str(s))) => match &a[0] {
            Value::Str(p) => Value::Bool(s.starts_with(&**p)),
            _ => return it.fault("null dereference"),
        },
        ("String.substring", Some(Value::Str(s))) => {
            let i = int(it, &a[0])?;
            match usize::try_from(i).ok().and_then(|i| s.get(i..)) {
                Some(t) => Value::str(t),
                None => return it.fault(format!("index {i} out of range")),
            }
        }
        ("String.length", Some(Value::Str(s))) => Value::Int(s.chars().count() as i64),
        ("String.equals", Some(Value::Str(s))) => Value::Bool(matches!(&a[0], Value::Str(t) if *t == s)),
        ("Optional.isPresent", Some(Value::Optional(o))) => Value::Bool(o.is_some()),
        ("Optional.get", Some(Value::Optional(o))) => match o {
            Some(v) => (*v).clone(),
            None => return it.fault("empty optional"),
        },
        ("Function.apply", Some(f)) => return it.apply(&f, a.remove(0)),
        ("Reader.readLine", Some(Value::Reader(r))) => {
            let line = r.borrow_mut().read_line();
            match line {
                Ok(Some(l)) => Value::str(&l),
                Ok(None) => Value::Null,
                Err(e) => return it.fault(e),
            }
        }
        ("Closeable.close", Some(Value::Reader(r))) => {
            it.vfs.close(&mut r.borrow_mut());
            Value::Unit
        }
        ("Closeable.close", Some(_)) => Value::Unit,
        (k, recv) => {
            let on = recv.map(|r| format!(" on {r}")).unwrap_or_default();
            return it.fault(format!("unsupported built-in {k}{on}"));
        }
    };
    Ok(v)
}
