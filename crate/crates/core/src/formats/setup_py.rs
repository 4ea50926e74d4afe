//! Static reading of `setup.py`: dependency lists handed to `setup(...)`.
//!
//! String literals in `install_requires` / `extras_require` are extracted,
//! following module-level names bound to literals. Anything computed (file
//! reads, calls, comprehensions) marks the file as dynamic.

use std::collections::HashMap;
use std::ops::Range;
use std::path::Path;

use rustpython_parser::ast::{self, Expr, Stmt};

use crate::error::Result;
use crate::model::{parse_requirement_line, PackageName, Requirement};
use crate::python::{all_calls, dotted_name, parse_module, span, str_constant};
use crate::text::{apply_splices, excise_list_item, LineIndex};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetupPyEntry {
    pub requirement: Requirement,
    pub line: usize,
    /// `install_requires` or `extras_require.<group>`.
    pub detail: String,
    element: Range<usize>,
    list_len: usize,
    /// `"group": [...]` span of an extras entry, removed when emptied.
    owner: Option<Range<usize>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SetupPyAnalysis {
    pub entries: Vec<SetupPyEntry>,
    pub dynamic: bool,
    /// Lines of dependency expressions that are not literals.
    pub dynamic_lines: Vec<usize>,
    /// Literal paths passed to `open(...)`-like calls or otherwise mentioned
    /// as requirement files.
    pub referenced_files: Vec<String>,
    pub project_name: Option<String>,
}

struct Analyzer<'a> {
    lines: LineIndex,
    bindings: HashMap<String, Vec<&'a Expr>>,
    mutated: Vec<String>,
    out: SetupPyAnalysis,
}

fn collect_bindings<'a>(body: &'a [Stmt], bindings: &mut HashMap<String, Vec<&'a Expr>>) {
    for stmt in body {
        match stmt {
            Stmt::Assign(a) => {
                for target in &a.targets {
                    if let Expr::Name(n) = target {
                        bindings.entry(n.id.to_string()).or_default().push(&a.value);
                    }
                }
            }
            Stmt::AnnAssign(a) => {
                if let (Expr::Name(n), Some(value)) = (a.target.as_ref(), &a.value) {
                    bindings.entry(n.id.to_string()).or_default().push(value);
                }
            }
            Stmt::AugAssign(a) => {
                if let Expr::Name(n) = a.target.as_ref() {
                    bindings.entry(n.id.to_string()).or_default().push(&a.value);
                }
            }
            Stmt::If(s) => {
                collect_bindings(&s.body, bindings);
                collect_bindings(&s.orelse, bindings);
            }
            Stmt::With(s) => collect_bindings(&s.body, bindings),
            Stmt::Try(s) => {
                collect_bindings(&s.body, bindings);
                for ast::ExceptHandler::ExceptHandler(h) in &s.handlers {
                    collect_bindings(&h.body, bindings);
                }
                collect_bindings(&s.orelse, bindings);
                collect_bindings(&s.finalbody, bindings);
            }
            _ => {}
        }
    }
}

impl<'a> Analyzer<'a> {
    fn mark_dynamic(&mut self, expr: &Expr) {
        self.out.dynamic = true;
        let line = self.lines.line_of(span(expr).start);
        if !self.out.dynamic_lines.contains(&line) {
            self.out.dynamic_lines.push(line);
        }
    }

    fn list(&mut self, elts: &[Expr], detail: &str, owner: Option<Range<usize>>) {
        for elt in elts {
            let Some(value) = str_constant(elt) else {
                self.mark_dynamic(elt);
                continue;
            };
            let element = span(elt);
            match parse_requirement_line(value) {
                Ok(Some(requirement)) => self.out.entries.push(SetupPyEntry {
                    requirement,
                    line: self.lines.line_of(element.start),
                    detail: detail.to_string(),
                    element,
                    list_len: elts.len(),
                    owner: owner.clone(),
                }),
                Ok(None) => {}
                Err(e) => log::warn!("setup.py: skipping `{value}`: {e}"),
            }
        }
    }

    fn requirements(&mut self, expr: &'a Expr, detail: &str, owner: Option<Range<usize>>, depth: usize) {
        match expr {
            Expr::List(l) => self.list(&l.elts, detail, owner),
            Expr::Tuple(t) => self.list(&t.elts, detail, owner),
            Expr::Constant(_) if str_constant(expr).is_some() => {
                // A lone string is a single requirement.
                self.list(std::slice::from_ref(expr), detail, None)
            }
            Expr::BinOp(b) if matches!(b.op, ast::Operator::Add) => {
                self.requirements(&b.left, detail, None, depth);
                self.requirements(&b.right, detail, None, depth);
            }
            Expr::Name(n) if depth < 8 => {
                let name = n.id.to_string();
                let bound = self.bindings.get(&name).cloned().unwrap_or_default();
                if bound.is_empty() || self.mutated.contains(&name) {
                    self.mark_dynamic(expr);
                }
                for value in bound {
                    self.requirements(value, detail, owner.clone(), depth + 1);
                }
            }
            _ => self.mark_dynamic(expr),
        }
    }

    fn extras(&mut self, expr: &'a Expr, depth: usize) {
        match expr {
            Expr::Dict(d) => {
                for (key, value) in d.keys.iter().zip(&d.values) {
                    let Some(group) = key.as_ref().and_then(str_constant) else {
                        self.mark_dynamic(value);
                        continue;
                    };
                    let detail = format!("extras_require.{group}");
                    let owner = key.as_ref().map(|k| span(k).start..span(value).end);
                    match value {
                        Expr::List(_) | Expr::Tuple(_) => {
                            self.requirements(value, &detail, owner, depth)
                        }
                        _ => self.requirements(value, &detail, None, depth),
                    }
                }
            }
            Expr::Name(n) if depth < 8 => {
                let bound = self.bindings.get(n.id.as_str()).cloned().unwrap_or_default();
                if bound.is_empty() {
                    self.mark_dynamic(expr);
                }
                for value in bound {
                    self.extras(value, depth + 1);
                }
            }
            _ => self.mark_dynamic(expr),
        }
    }
}

fn is_setup_call(call: &ast::ExprCall) -> bool {
    dotted_name(&call.func).is_some_and(|n| n == "setup" || n.ends_with(".setup"))
}

fn looks_like_requirements_path(path: &str) -> bool {
    let lower = path.to_ascii_lowercase();
    (lower.ends_with(".txt") || lower.ends_with(".in"))
        && lower.contains("req")
        && !lower.rsplit('/').next().unwrap_or("").starts_with("readme")
}

/// Statically reads the dependency declarations of a `setup.py`.
pub fn analyze(text: &str, path: &Path) -> Result<SetupPyAnalysis> {
    let suite = parse_module(text, path)?;
    let mut bindings = HashMap::new();
    collect_bindings(&suite, &mut bindings);
    let calls = all_calls(&suite);

    let mutated = calls
        .iter()
        .filter_map(|c| match c.func.as_ref() {
            Expr::Attribute(a) if matches!(a.attr.as_str(), "append" | "extend" | "insert") => {
                match a.value.as_ref() {
                    Expr::Name(n) => Some(n.id.to_string()),
                    _ => None,
                }
            }
            _ => None,
        })
        .collect();

    let mut analyzer = Analyzer {
        lines: LineIndex::new(text),
        bindings,
        mutated,
        out: SetupPyAnalysis::default(),
    };

    for call in calls.iter().filter(|c| is_setup_call(c)) {
        for kw in &call.keywords {
            let Some(arg) = kw.arg.as_ref().map(|a| a.as_str()) else {
                // `setup(**kwargs)`
                analyzer.mark_dynamic(&kw.value);
                continue;
            };
            match arg {
                "install_requires" => analyzer.requirements(&kw.value, "install_requires", None, 0),
                "extras_require" => analyzer.extras(&kw.value, 0),
                "name" => {
                    if let Some(name) = str_constant(&kw.value) {
                        analyzer.out.project_name = Some(name.to_string());
                    }
                }
                _ => {}
            }
        }
    }

    let mut referenced = Vec::new();
    for call in &calls {
        for arg in &call.args {
            if let Some(s) = str_constant(arg) {
                if looks_like_requirements_path(s) && !referenced.iter().any(|r| r == s) {
                    referenced.push(s.to_string());
                }
            }
        }
    }
    analyzer.out.referenced_files = referenced;
    Ok(analyzer.out)
}

/// Removes every literal declaration of `pkg`. Computed dependency
/// expressions are left alone.
pub fn remove(text: &str, pkg: &PackageName, path: &Path) -> Result<String> {
    let mut current = text.to_string();
    for _ in 0..=text.len() {
        let analysis = analyze(&current, path)?;
        let Some(entry) = analysis
            .entries
            .into_iter()
            .find(|e| &e.requirement.name == pkg)
        else {
            return Ok(current);
        };
        let target = match (&entry.owner, entry.list_len) {
            (Some(owner), 1) => owner.clone(),
            _ => entry.element.clone(),
        };
        let splice = excise_list_item(&current, target.start, target.end);
        current = apply_splices(&current, vec![splice]);
    }
    Ok(current)
}
