//! Hand-written transcriptions of corpus programs in which every binding
//! construct is an explicit closure.

use ctxlang_core::lower::{CallTarget::Builtin, Core, CoreProgram, Lit};
use ctxlang_core::runtime::Interp;
use ctxlang_core::syntax::NewTarget;
use ctxlang_core::{Value, Vfs};

fn call(key: &'static str, args: Vec<Core>) -> Core {
    Core::call(Builtin(key), None, args)
}

fn method(key: &'static str, recv: Core, args: Vec<Core>) -> Core {
    Core::call(Builtin(key), Some(recv), args)
}

fn let_(name: &str, v: Core) -> Core {
    Core::Decl(name.into(), Some(Box::new(v)))
}

fn set(name: &str, v: Core) -> Core {
    Core::Set(name.into(), Box::new(v))
}

fn new(key: &'static str) -> Core {
    Core::New(NewTarget::Builtin(key), vec![])
}

fn apps(f: Core, args: Vec<Core>) -> Core {
    args.into_iter().fold(f, Core::app)
}

fn list(items: Vec<Core>) -> Core {
    Core::List(items)
}

fn ret(v: Core) -> Core {
    Core::Return(Some(Box::new(v)))
}

fn if_(c: Core, t: Core, e: Option<Core>) -> Core {
    Core::If(Box::new(c), Box::new(t), e.map(Box::new))
}

/// fold_for(ini, list, (acc, n) -> new acc)
fn fold_for() -> Core {
    Core::lam(
        "ini",
        Core::lam(
            "list",
            Core::lam(
                "f",
                Core::Seq(vec![
                    let_("acc", Core::get("ini")),
                    Core::ForEach(
                        "n".into(),
                        Box::new(Core::get("list")),
                        Box::new(set("acc", apps(Core::get("f"), vec![Core::get("acc"), Core::get("n")]))),
                    ),
                    Core::get("acc"),
                ]),
            ),
        ),
    )
}

/// if_exists(map, key, it -> .., () -> ..)
fn if_exists() -> Core {
    let body = if_(
        method("Map.contains", Core::get("m"), vec![Core::get("k")]),
        Core::app(Core::get("thn"), Core::get("k")),
        Some(Core::app(Core::get("els"), Core::Lit(Lit::Unit))),
    );
    ["m", "k", "thn", "els"].iter().rev().fold(body, |b, p| Core::lam(p, b))
}

pub fn eval(c: &Core) -> Value {
    let prog = CoreProgram::default();
    Interp::new(&prog, Vfs::new()).run(c).unwrap_or_else(|f| panic!("{f}"))
}

/// Corpus program and the transcription of the value its first output line shows.
pub fn transcriptions() -> Vec<(&'static str, Core)> {
    vec![
        ("count_words.ctx", count_words()),
        ("sum_squares.ctx", sum_of_squares()),
        ("lambda.ctx", lambda()),
        ("match.ctx", pattern_match()),
        ("colors.ctx", map_indexing()),
    ]
}

fn count_words() -> Core {
    // it -> it.set(it.get() + 1) and () -> acc.put(n, 1) as in the HOAS form
    // of the fold-for / if-exists snippet.
    let step = Core::lam(
        "acc",
        Core::lam(
            "n",
            Core::Seq(vec![
                apps(
                    if_exists(),
                    vec![
                        Core::get("acc"),
                        Core::get("n"),
                        Core::lam(
                            "it",
                            method(
                                "Map.put",
                                Core::get("acc"),
                                vec![
                                    Core::get("it"),
                                    call("int_add", vec![method("Map.get", Core::get("acc"), vec![Core::get("it")]), Core::int(1)]),
                                ],
                            ),
                        ),
                        Core::lam("_", method("Map.put", Core::get("acc"), vec![Core::get("n"), Core::int(1)])),
                    ],
                ),
                Core::get("acc"),
            ]),
        ),
    );
    let words = list(vec![Core::str("x"), Core::str("y"), Core::str("x")]);
    apps(fold_for(), vec![new("Map.new"), words, step])
}

fn sum_of_squares() -> Core {
    let step = Core::lam(
        "a",
        Core::lam("i", call("int_add", vec![Core::get("a"), call("int_mul", vec![Core::get("i"), Core::get("i")])])),
    );
    let xs = list(vec![Core::int(1), Core::int(2), Core::int(3)]);
    apps(fold_for(), vec![Core::int(0), xs, step])
}

fn lambda() -> Core {
    let f = Core::lam("s", call("str_concat", vec![Core::get("s"), Core::str("!")]));
    Core::app(f, Core::str("hi"))
}

fn pattern_match() -> Core {
    let some = |v: Core| call("Optional.of", vec![v]);
    let none = || call("Optional.empty", vec![]);
    let prefix = Core::lam(
        "t",
        Core::Seq(vec![
            if_(
                method("String.startsWith", Core::get("t"), vec![Core::str("hello")]),
                ret(some(call("str_concat", vec![Core::str("goodbye"), method("String.substring", Core::get("t"), vec![Core::int(5)])]))),
                None,
            ),
            ret(none()),
        ]),
    );
    let empty = Core::lam(
        "t",
        Core::Seq(vec![
            if_(method("String.isEmpty", Core::get("t"), vec![]), ret(some(Core::str("empty string"))), None),
            ret(none()),
        ]),
    );
    let otherwise = Core::lam("t", some(Core::get("t")));
    Core::Seq(vec![
        let_("result", Core::Lit(Lit::Null)),
        let_("done", Core::Lit(Lit::Bool(false))),
        Core::ForEach(
            "c".into(),
            Box::new(list(vec![prefix, empty, otherwise])),
            Box::new(if_(
                call("not", vec![Core::get("done")]),
                Core::Seq(vec![
                    let_("o", Core::app(Core::get("c"), Core::str("hello, world"))),
                    if_(
                        method("Optional.isPresent", Core::get("o"), vec![]),
                        Core::Seq(vec![set("result", method("Optional.get", Core::get("o"), vec![])), set("done", Core::Lit(Lit::Bool(true)))]),
                        None,
                    ),
                ]),
                None,
            )),
        ),
        Core::get("result"),
    ])
}

fn map_indexing() -> Core {
    Core::Seq(vec![
        let_("colors", new("Map.new")),
        method("Map.put", Core::get("colors"), vec![Core::str("red"), Core::str("RED")]),
        method("Map.put", Core::get("colors"), vec![Core::str("green"), Core::str("GREEN")]),
        method("Map.get", Core::get("colors"), vec![Core::str("red")]),
    ])
}
