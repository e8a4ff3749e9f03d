//! Tree-walking evaluation of lowered programs.

pub mod builtins;
pub mod value;
pub mod vfs;

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

use crate::lower::{CallTarget, Core, CoreBody, CoreBodyKind, CoreProgram, Lit};
use crate::syntax::NewTarget;

pub use value::{Closure, Key, Object, Value};
pub use vfs::Vfs;

pub const DEFAULT_MAX_DEPTH: usize = 2000;

pub struct Scope {
    vars: RefCell<HashMap<String, Value>>,
    parent: Option<Env>,
    this: Option<Value>,
}

pub type Env = Rc<Scope>;

fn root(this: Option<Value>) -> Env {
    Rc::new(Scope { vars: RefCell::default(), parent: None, this })
}

fn child(env: &Env) -> Env {
    Rc::new(Scope { vars: RefCell::default(), parent: Some(env.clone()), this: None })
}

impl Scope {
    fn lookup(&self, name: &str) -> Option<Value> {
        if let Some(v) = self.vars.borrow().get(name) {
            return Some(v.clone());
        }
        self.parent.as_ref()?.lookup(name)
    }

    fn assign(&self, name: &str, v: Value) -> bool {
        if let Some(slot) = self.vars.borrow_mut().get_mut(name) {
            *slot = v;
            return true;
        }
        self.parent.as_ref().is_some_and(|p| p.assign(name, v))
    }

    fn this(&self) -> Option<Value> {
        match &self.this {
            Some(t) => Some(t.clone()),
            None => self.parent.as_ref()?.this(),
        }
    }

    fn define(&self, name: &str, v: Value) {
        self.vars.borrow_mut().insert(name.to_string(), v);
    }
}

/// A runtime error with the body it was raised in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fault {
    pub message: String,
    pub at: String,
}

impl fmt::Display for Fault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "fault: {} at {}", self.message, self.at)
    }
}

impl std::error::Error for Fault {}

pub enum Flow {
    Return(Value),
    Fault(Fault),
}

pub type Eval<T = Value> = Result<T, Flow>;

pub struct Interp<'p> {
    pub prog: &'p CoreProgram,
    pub vfs: Vfs,
    /// Everything printed so far.
    pub output: String,
    /// Also write output to stdout as it is produced.
    pub echo: bool,
    pub max_depth: usize,
    depth: usize,
    at: Vec<String>,
}

impl<'p> Interp<'p> {
    pub fn new(prog: &'p CoreProgram, vfs: Vfs) -> Self {
        Interp { prog, vfs, output: String::new(), echo: false, max_depth: DEFAULT_MAX_DEPTH, depth: 0, at: vec![] }
    }

    pub fn fault<T>(&self, message: impl Into<String>) -> Eval<T> {
        let at = self.at.last().cloned().unwrap_or_else(|| "main".to_string());
        Err(Flow::Fault(Fault { message: message.into(), at }))
    }

    pub fn print(&mut self, s: &str) {
        if self.echo {
            print!("{s}");
        }
        self.output.push_str(s);
    }

    pub fn run_main(&mut self) -> Result<(), Fault> {
        let Some(main) = &self.prog.main else { return Ok(()) };
        self.run(main).map(|_| ())
    }

    /// Evaluates a closed core term in an empty environment.
    pub fn run(&mut self, c: &Core) -> Result<Value, Fault> {
        match self.eval(c, &root(None)) {
            Ok(v) | Err(Flow::Return(v)) => Ok(v),
            Err(Flow::Fault(f)) => Err(f),
        }
    }

    pub fn eval(&mut self, c: &Core, env: &Env) -> Eval {
        match c {
            Core::Lit(l) => Ok(match l {
                Lit::Int(v) => Value::Int(*v),
                Lit::Bool(b) => Value::Bool(*b),
                Lit::Str(s) => Value::str(s),
                Lit::Unit => Value::Unit,
                Lit::Null => Value::Null,
            }),
            Core::Get(n) => match env.lookup(n) {
                Some(v) => Ok(v),
                None => self.fault(format!("unbound variable {n}")),
            },
            Core::Set(n, v) => {
                let v = self.eval(v, env)?;
                if !env.assign(n, v.clone()) {
                    return self.fault(format!("unbound variable {n}"));
                }
                Ok(v)
            }
            Core::Decl(n, init) => {
                let v = match init {
                    Some(e) => self.eval(e, env)?,
                    None => Value::Null,
                };
                env.define(n, v);
                Ok(Value::Unit)
            }
            Core::This => match env.this() {
                Some(t) => Ok(t),
                None => self.fault("no receiver"),
            },
            Core::GetField(o, i) => {
                let obj = self.object(o, env)?;
                let v = obj.fields.borrow()[*i].clone();
                Ok(v)
            }
            Core::SetField(o, i, v) => {
                let obj = self.object(o, env)?;
                let v = self.eval(v, env)?;
                obj.fields.borrow_mut()[*i] = v.clone();
                Ok(v)
            }
            Core::New(t, args) => {
                let args = self.eval_all(args, env)?;
                self.construct(t, args)
            }
            Core::Call { target, receiver, args } => self.call(target, receiver.as_deref(), args, env),
            Core::Lam(p, b) => Ok(Value::Closure(Rc::new(Closure { param: p.clone(), body: Rc::new((**b).clone()), env: env.clone() }))),
            Core::App(f, a) => {
                let f = self.eval(f, env)?;
                let a = self.eval(a, env)?;
                self.apply(&f, a)
            }
            Core::List(items) => Ok(Value::new_list(self.eval_all(items, env)?)),
            Core::Seq(items) => {
                let inner = child(env);
                let mut last = Value::Unit;
                for i in items {
                    last = self.eval(i, &inner)?;
                }
                Ok(last)
            }
            Core::If(c, t, e) => {
                if self.truth(c, env)? {
                    self.eval(t, env)?;
                } else if let Some(e) = e {
                    self.eval(e, env)?;
                }
                Ok(Value::Unit)
            }
            Core::While(c, b) => {
                while self.truth(c, env)? {
                    self.eval(b, env)?;
                }
                Ok(Value::Unit)
            }
            Core::ForEach(var, it, b) => {
                let items = match self.eval(it, env)? {
                    Value::List(l) => l.borrow().clone(),
                    Value::Null => return self.fault("null dereference"),
                    other => return self.fault(format!("cannot iterate over {other}")),
                };
                for item in items {
                    let scope = child(env);
                    scope.define(var, item);
                    self.eval(b, &scope)?;
                }
                Ok(Value::Unit)
            }
            Core::Return(v) => {
                let v = match v {
                    Some(e) => self.eval(e, env)?,
                    None => Value::Unit,
                };
                Err(Flow::Return(v))
            }
            Core::TryFinally(b, fin) => {
                let r = self.eval(b, env);
                self.eval(fin, env)?;
                r
            }
        }
    }

    fn eval_all(&mut self, cs: &[Core], env: &Env) -> Eval<Vec<Value>> {
        cs.iter().map(|c| self.eval(c, env)).collect()
    }

    fn truth(&mut self, c: &Core, env: &Env) -> Eval<bool> {
        match self.eval(c, env)? {
            Value::Bool(b) => Ok(b),
            other => self.fault(format!("expected a boolean, got {other}")),
        }
    }

    fn object(&mut self, c: &Core, env: &Env) -> Eval<Rc<Object>> {
        match self.eval(c, env)? {
            Value::Object(o) => Ok(o),
            Value::Null => self.fault("null dereference"),
            other => self.fault(format!("not an object: {other}")),
        }
    }

    fn new_object(&self, class: crate::syntax::ClassId) -> Rc<Object> {
        let fields = self.prog.classes[class.0 as usize]
            .fields
            .iter()
            .map(|(_, l)| match l {
                Lit::Int(v) => Value::Int(*v),
                Lit::Bool(b) => Value::Bool(*b),
                _ => Value::Null,
            })
            .collect();
        Rc::new(Object { class, fields: RefCell::new(fields) })
    }

    fn construct(&mut self, t: &NewTarget, args: Vec<Value>) -> Eval {
        match t {
            NewTarget::Plain(class) => Ok(Value::Object(self.new_object(*class))),
            NewTarget::User { class, ctor } => {
                let obj = Value::Object(self.new_object(*class));
                let prog = self.prog;
                self.invoke(&prog.classes[class.0 as usize].constructors[*ctor], Some(obj.clone()), args)?;
                Ok(obj)
            }
            NewTarget::Builtin(k) => builtins::construct(self, k, args),
        }
    }

    /// Applies a closure value to one argument.
    pub fn apply(&mut self, f: &Value, arg: Value) -> Eval {
        let Value::Closure(c) = f else {
            return match f {
                Value::Null => self.fault("null dereference"),
                other => self.fault(format!("not a function: {other}")),
            };
        };
        self.enter()?;
        let scope = child(&c.env);
        scope.define(&c.param, arg);
        let r = self.eval(&c.body, &scope);
        self.depth -= 1;
        match r {
            Ok(v) | Err(Flow::Return(v)) => Ok(v),
            Err(f) => Err(f),
        }
    }

    fn enter(&mut self) -> Eval<()> {
        if self.depth >= self.max_depth {
            return self.fault("call depth limit exceeded");
        }
        self.depth += 1;
        Ok(())
    }

    fn call(&mut self, target: &CallTarget, receiver: Option<&Core>, args: &[Core], env: &Env) -> Eval {
        let prog = self.prog;
        let body = match target {
            CallTarget::Operator(op) => prog.op(*op),
            CallTarget::Method { class, index } => &prog.classes[class.0 as usize].methods[*index],
            CallTarget::Function { file, index } => &prog.functions[file][*index],
            CallTarget::Builtin(k) => {
                let recv = match receiver {
                    Some(r) => Some(self.eval(r, env)?),
                    None => None,
                };
                let args = self.eval_all(args, env)?;
                return builtins::call(self, k, recv, args);
            }
        };
        let this = match receiver {
            Some(r) => match self.eval(r, env)? {
                Value::Null => return self.fault("null dereference"),
                v => Some(v),
            },
            None if matches!(target, CallTarget::Method { .. }) => env.this(),
            None => None,
        };
        if let CoreBodyKind::Native(n) = &body.body {
            if let Some(v) = self.short_circuit(n, args, env)? {
                return Ok(v);
            }
        }
        let args = self.eval_all(args, env)?;
        self.invoke(body, this, args)
    }

    /// `or` and `and` skip their second operand when the first decides.
    fn short_circuit(&mut self, native: &str, args: &[Core], env: &Env) -> Eval<Option<Value>> {
        let stop = match native {
            "or" => true,
            "and" => false,
            _ => return Ok(None),
        };
        if self.truth(&args[0], env)? == stop {
            return Ok(Some(Value::Bool(stop)));
        }
        Ok(Some(Value::Bool(self.truth(&args[1], env)?)))
    }

    pub fn invoke(&mut self, body: &CoreBody, this: Option<Value>, args: Vec<Value>) -> Eval {
        self.enter()?;
        self.at.push(body.name.clone());
        let r = match &body.body {
            CoreBodyKind::Native(n) => builtins::native(self, n, &args),
            CoreBodyKind::Block(b) => {
                let env = root(this);
                for (p, a) in body.params.iter().zip(args) {
                    env.define(p, a);
                }
                self.eval(b, &env)
            }
        };
        let r = match r {
            Ok(_) if matches!(body.body, CoreBodyKind::Block(_)) => Ok(Value::Unit),
            Ok(v) | Err(Flow::Return(v)) => Ok(v),
            Err(f) => Err(f),
        };
        self.at.pop();
        self.depth -= 1;
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lower::CallTarget::Builtin;

    fn eval(c: Core) -> Result<Value, Fault> {
        let prog = CoreProgram::default();
        Interp::new(&prog, Vfs::new()).run(&c)
    }

    fn add(a: Core, b: Core) -> Core {
        Core::call(Builtin("int_add"), None, vec![a, b])
    }

    #[test]
    fn closures_capture_their_scope() {
        let adder = Core::lam("x", Core::lam("y", add(Core::get("x"), Core::get("y"))));
        let c = Core::app(Core::app(adder, Core::int(2)), Core::int(40));
        assert_eq!(eval(c).unwrap(), Value::Int(42));
    }

    #[test]
    fn assignment_reaches_the_declaring_scope() {
        let c = Core::Seq(vec![
            Core::Decl("a".into(), Some(Box::new(Core::int(0)))),
            Core::ForEach(
                "i".into(),
                Box::new(Core::List(vec![Core::int(1), Core::int(2), Core::int(3)])),
                Box::new(Core::Seq(vec![Core::Set("a".into(), Box::new(add(Core::get("a"), Core::get("i"))))])),
            ),
            Core::get("a"),
        ]);
        assert_eq!(eval(c).unwrap(), Value::Int(6));
    }

    #[test]
    fn return_leaves_only_the_closure() {
        let f = Core::lam("x", Core::Seq(vec![Core::Return(Some(Box::new(Core::get("x")))), Core::int(0)]));
        let c = Core::Seq(vec![Core::app(f, Core::int(7)), Core::int(1)]);
        assert_eq!(eval(c).unwrap(), Value::Int(1));
    }

    #[test]
    fn finally_runs_on_fault() {
        let c = Core::Seq(vec![
            Core::Decl("log".into(), Some(Box::new(Core::List(vec![])))),
            Core::TryFinally(
                Box::new(Core::call(Builtin("fail"), None, vec![Core::str("boom")])),
                Box::new(Core::call(Builtin("List.add"), Some(Core::get("log")), vec![Core::int(1)])),
            ),
        ]);
        let err = eval(c).unwrap_err();
        assert_eq!(err.to_string(), "fault: boom at main");
    }

    #[test]
    fn faults_name_their_cause() {
        let div = Core::call(Builtin("int_div"), None, vec![Core::int(1), Core::int(0)]);
        assert_eq!(eval(div).unwrap_err().message, "division by zero");
        let unbound = Core::get("nope");
        assert!(eval(unbound).unwrap_err().message.contains("unbound"));
        let null_call = Core::call(Builtin("List.size"), Some(Core::Lit(Lit::Null)), vec![]);
        assert_eq!(eval(null_call).unwrap_err().message, "null dereference");
    }

    #[test]
    fn recursion_is_bounded() {
        // (let f (lambda x (apply f x))) (apply f 0)
        let c = Core::Seq(vec![
            Core::Decl("f".into(), None),
            Core::Set("f".into(), Box::new(Core::lam("x", Core::app(Core::get("f"), Core::get("x"))))),
            Core::app(Core::get("f"), Core::int(0)),
        ]);
        let prog = CoreProgram::default();
        let mut it = Interp::new(&prog, Vfs::new());
        it.max_depth = 50;
        assert_eq!(it.run(&c).unwrap_err().message, "call depth limit exceeded");
    }

    #[test]
    fn maps_keep_insertion_order_and_compare_keys_by_value() {
        let put = |k: &str, v: i64| Core::call(Builtin("Map.put"), Some(Core::get("m")), vec![Core::str(k), Core::int(v)]);
        let c = Core::Seq(vec![
            Core::Decl("m".into(), Some(Box::new(Core::New(NewTarget::Builtin("Map.new"), vec![])))),
            put("y", 1),
            put("x", 2),
            put("y", 3),
            Core::get("m"),
        ]);
        assert_eq!(eval(c).unwrap().to_string(), "{y: 3, x: 2}");
    }
}
