use std::collections::{HashMap, HashSet, VecDeque};
use std::path::Path;

use crate::diag::{Diagnostic, Diagnostics, SourceMap};
use crate::syntax::*;
use crate::types::builtins::is_builtin_class;

use super::{read_program, SourceProvider, PRELUDE_NAME, PRELUDE_SOURCE};

#[derive(Debug, Clone)]
pub struct ClassInfo {
    pub id: ClassId,
    pub decl: ClassDecl,
    pub file: FileId,
    pub op_ids: Vec<OpId>,
}

#[derive(Debug, Clone, Copy)]
pub struct OpInfo {
    pub class: ClassId,
    pub index: usize,
}

/// Operators visible from one file.
#[derive(Debug, Clone, Default)]
pub struct FileScope {
    /// Imported DSL classes in import order, prelude first, duplicates removed.
    pub imports: Vec<ClassId>,
    /// DSL classes whose literal operators are visible: transitive imports.
    pub literal_dsls: Vec<ClassId>,
}

#[derive(Debug, Clone)]
pub struct Linked {
    pub sources: SourceMap,
    pub classes: Vec<ClassInfo>,
    pub ops: Vec<OpInfo>,
    pub by_name: HashMap<String, ClassId>,
    /// Per-file imports, free functions and main block; class declarations
    /// live in `classes`.
    pub programs: HashMap<FileId, Program>,
    pub scopes: HashMap<FileId, FileScope>,
    pub entry: FileId,
    /// Import-site priority constraints in file load order.
    pub import_constraints: Vec<(QName, QName, Span)>,
}

impl Linked {
    pub fn class(&self, id: ClassId) -> &ClassDecl {
        &self.classes[id.0 as usize].decl
    }

    pub fn class_named(&self, name: &str) -> Option<ClassId> {
        self.by_name.get(name).copied()
    }

    pub fn op(&self, id: OpId) -> &OperatorDecl {
        let info = self.ops[id.0 as usize];
        &self.classes[info.class.0 as usize].decl.operators[info.index]
    }

    pub fn op_class(&self, id: OpId) -> ClassId {
        self.ops[id.0 as usize].class
    }

    pub fn entry_program(&self) -> &Program {
        &self.programs[&self.entry]
    }

    pub fn scope(&self, file: FileId) -> &FileScope {
        &self.scopes[&file]
    }
}

struct Need {
    name: String,
    span: Span,
    is_import: bool,
}

fn collect_type(t: &Type, span: Span, out: &mut Vec<Need>) {
    match t {
        Type::Class { name, args } => {
            out.push(Need { name: name.last().to_string(), span, is_import: false });
            args.iter().for_each(|a| collect_type(a, span, out));
        }
        Type::Turnstile { assumption, result } => {
            collect_type(assumption, span, out);
            collect_type(result, span, out);
        }
        _ => {}
    }
}

fn collect_tparams(ps: &[TypeParam], span: Span, out: &mut Vec<Need>) {
    for p in ps {
        match &p.kind {
            TypeParamKind::Type { bound: Some(b) } => collect_type(b, span, out),
            TypeParamKind::Name { name_type } => {
                out.push(Need { name: name_type.last().to_string(), span, is_import: false })
            }
            _ => {}
        }
    }
}

fn collect_params(ps: &[Param], span: Span, out: &mut Vec<Need>) {
    ps.iter().for_each(|p| collect_type(&p.ty, span, out));
}

fn collect_stmt(s: &Stmt, text: &str, out: &mut Vec<Need>) {
    match s {
        Stmt::Local { ty, init, span, .. } => {
            collect_type(ty, *span, out);
            if let Some(r) = init {
                collect_raw(r, text, out);
            }
        }
        Stmt::Expr(r) => collect_raw(r, text, out),
        Stmt::If { cond, then, els } => {
            collect_raw(cond, text, out);
            collect_stmt(then, text, out);
            if let Some(e) = els {
                collect_stmt(e, text, out);
            }
        }
        Stmt::While { cond, body } => {
            collect_raw(cond, text, out);
            collect_stmt(body, text, out);
        }
        Stmt::ForEach { ty, iter, body, .. } => {
            collect_type(ty, iter.span, out);
            collect_raw(iter, text, out);
            collect_stmt(body, text, out);
        }
        Stmt::Return { value, .. } => {
            if let Some(r) = value {
                collect_raw(r, text, out);
            }
        }
        Stmt::TryFinally { body, finalizer } => {
            collect_block(body, text, out);
            collect_block(finalizer, text, out);
        }
        Stmt::Block(b) => collect_block(b, text, out),
    }
}

fn collect_block(b: &Block, text: &str, out: &mut Vec<Need>) {
    b.stmts.iter().for_each(|s| collect_stmt(s, text, out));
}

/// Classes mentioned by `new C` inside a raw expression.
fn collect_raw(r: &RawExpr, text: &str, out: &mut Vec<Need>) {
    let region = &text[r.span.start..r.span.end];
    let mut from = 0;
    while let Some(i) = region[from..].find("new") {
        let at = from + i;
        from = at + 3;
        let before_ok = super::scan::ident_boundary_before(region, at);
        let after = super::scan::skip_ws(region, at + 3);
        if before_ok && after > at + 3 {
            if let Some(id) = super::scan::ident_at(region, after) {
                if id.starts_with(|c: char| c.is_ascii_uppercase()) {
                    out.push(Need { name: id.to_string(), span: r.span, is_import: false });
                }
            }
        }
    }
}

fn collect_body(b: &Body, text: &str, out: &mut Vec<Need>) {
    if let Body::Block(b) = b {
        collect_block(b, text, out);
    }
}

fn needs_of(p: &Program, text: &str) -> Vec<Need> {
    let mut out = Vec::new();
    for imp in &p.imports {
        out.push(Need { name: imp.dsl.last().to_string(), span: imp.span, is_import: true });
    }
    for c in &p.classes {
        collect_tparams(&c.type_params, c.span, &mut out);
        for f in &c.fields {
            collect_type(&f.ty, c.span, &mut out);
        }
        for o in &c.operators {
            collect_tparams(&o.type_params, o.span, &mut out);
            collect_type(&o.return_type, o.span, &mut out);
            collect_params(&o.params, o.span, &mut out);
            o.requires.iter().for_each(|t| collect_type(t, o.span, &mut out));
            collect_body(&o.body, text, &mut out);
        }
        for m in &c.methods {
            collect_method(m, text, &mut out);
        }
        for k in &c.constructors {
            collect_params(&k.params, k.span, &mut out);
            collect_block(&k.body, text, &mut out);
        }
    }
    for m in &p.functions {
        collect_method(m, text, &mut out);
    }
    if let Some(b) = &p.main {
        collect_block(b, text, &mut out);
    }
    out
}

fn collect_method(m: &MethodDecl, text: &str, out: &mut Vec<Need>) {
    collect_tparams(&m.type_params, m.span, out);
    collect_type(&m.return_type, m.span, out);
    collect_params(&m.params, m.span, out);
    m.requires.iter().for_each(|t| collect_type(t, m.span, out));
    collect_body(&m.body, text, out);
}

/// Loads the entry text and every file it needs by name, then assigns
/// global class and operator ids and builds per-file operator scopes.
pub fn link(
    mut sources: SourceMap,
    entry_path: &Path,
    entry_text: String,
    provider: &dyn SourceProvider,
) -> Result<Linked, (SourceMap, Diagnostics)> {
    let mut diags = Diagnostics::new();
    let mut programs: Vec<Program> = Vec::new();
    let mut defined: HashMap<String, (FileId, usize)> = HashMap::new();
    let mut queue: VecDeque<(FileId, Need)> = VecDeque::new();

    let add_file = |sources: &mut SourceMap,
                        programs: &mut Vec<Program>,
                        defined: &mut HashMap<String, (FileId, usize)>,
                        queue: &mut VecDeque<(FileId, Need)>,
                        diags: &mut Diagnostics,
                        path: &Path,
                        text: String,
                        is_entry: bool| {
        let file = sources.add(path, text);
        let text = sources.text(file).to_string();
        match read_program(&text, file) {
            Ok(p) => {
                if !is_entry {
                    if let Some(b) = &p.main {
                        diags.push(Diagnostic::error(b.span, "a main block is only allowed in the entry file"));
                    }
                }
                for (i, c) in p.classes.iter().enumerate() {
                    if let Some((other, _)) = defined.get(&c.name) {
                        if *other != file {
                            diags.push(Diagnostic::error(
                                c.span,
                                format!("class `{}` is defined in more than one file", c.name),
                            ));
                        }
                        continue;
                    }
                    if is_builtin_class(&c.name) {
                        diags.push(Diagnostic::error(c.span, format!("`{}` is a built-in class", c.name)));
                        continue;
                    }
                    defined.insert(c.name.clone(), (file, i));
                }
                for n in needs_of(&p, &text) {
                    queue.push_back((file, n));
                }
                programs.push(p);
            }
            Err(d) => {
                diags.extend(d);
                programs.push(Program { file, imports: vec![], classes: vec![], functions: vec![], main: None });
            }
        }
        file
    };

    let entry = add_file(&mut sources, &mut programs, &mut defined, &mut queue, &mut diags, entry_path, entry_text, true);
    if !defined.contains_key(PRELUDE_NAME) {
        add_file(
            &mut sources,
            &mut programs,
            &mut defined,
            &mut queue,
            &mut diags,
            Path::new("<prelude>/PredefOperators.ctx"),
            PRELUDE_SOURCE.to_string(),
            false,
        );
    }
    let mut missing: HashSet<String> = HashSet::new();
    while let Some((from, need)) = queue.pop_front() {
        if defined.contains_key(&need.name) || is_builtin_class(&need.name) {
            continue;
        }
        if !missing.contains(&need.name) {
            if let Some((path, text)) = provider.find(&need.name) {
                if sources.find(&path).is_none() {
                    add_file(&mut sources, &mut programs, &mut defined, &mut queue, &mut diags, &path, text, false);
                    if defined.contains_key(&need.name) {
                        continue;
                    }
                }
            }
            missing.insert(need.name.clone());
        }
        let _ = from;
        let msg = if need.is_import {
            format!("unresolved dsl import `{}`", need.name)
        } else {
            format!("unknown class `{}`", need.name)
        };
        diags.push(Diagnostic::error(need.span, msg));
    }

    // Global ids in load order.
    let mut classes = Vec::new();
    let mut ops = Vec::new();
    let mut by_name = HashMap::new();
    let mut program_map = HashMap::new();
    for p in &mut programs {
        let decls = std::mem::take(&mut p.classes);
        for c in decls {
            if defined.get(&c.name).is_some_and(|(f, _)| *f == p.file) && !by_name.contains_key(&c.name) {
                let id = ClassId(classes.len() as u32);
                let op_ids = (0..c.operators.len())
                    .map(|i| {
                        ops.push(OpInfo { class: id, index: i });
                        OpId(ops.len() as u32 - 1)
                    })
                    .collect();
                by_name.insert(c.name.clone(), id);
                classes.push(ClassInfo { id, decl: c, file: p.file, op_ids });
            }
        }
    }
    for p in programs {
        program_map.insert(p.file, p);
    }

    let prelude = by_name.get(PRELUDE_NAME).copied();
    let mut direct: HashMap<FileId, Vec<ClassId>> = HashMap::new();
    let mut import_constraints = Vec::new();
    let mut file_ids: Vec<FileId> = program_map.keys().copied().collect();
    file_ids.sort();
    for f in &file_ids {
        let p = &program_map[f];
        let mut list: Vec<ClassId> = prelude.into_iter().collect();
        for imp in &p.imports {
            let Some(&id) = by_name.get(imp.dsl.last()) else { continue };
            if !classes[id.0 as usize].decl.is_dsl {
                diags.push(Diagnostic::error(imp.span, format!("`{}` is not a dsl class", imp.dsl)));
                continue;
            }
            if !list.contains(&id) {
                list.push(id);
            }
            for (lo, hi) in &imp.constraints {
                import_constraints.push((lo.clone(), hi.clone(), imp.span));
            }
        }
        direct.insert(*f, list);
    }
    let mut scopes = HashMap::new();
    for f in &file_ids {
        let imports = direct[f].clone();
        let mut literal_dsls = Vec::new();
        let mut stack: Vec<ClassId> = imports.clone();
        let mut seen_files = HashSet::new();
        while let Some(id) = stack.pop() {
            if literal_dsls.contains(&id) {
                continue;
            }
            literal_dsls.push(id);
            let file = classes[id.0 as usize].file;
            if seen_files.insert(file) {
                stack.extend(direct.get(&file).into_iter().flatten().copied());
                // DSL classes defined alongside an imported one come with it.
                stack.extend(classes.iter().filter(|c| c.file == file && c.decl.is_dsl).map(|c| c.id));
            }
        }
        literal_dsls.sort();
        scopes.insert(*f, FileScope { imports, literal_dsls });
    }

    let linked = Linked {
        sources,
        classes,
        ops,
        by_name,
        programs: program_map,
        scopes,
        entry,
        import_constraints,
    };
    if diags.has_errors() {
        Err((linked.sources, diags))
    } else {
        Ok(linked)
    }
}
