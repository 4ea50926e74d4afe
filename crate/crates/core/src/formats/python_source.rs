//! Import sites in Python source, and their removal.

use std::collections::BTreeSet;
use std::path::Path;

use rustpython_parser::ast::{self, Stmt};

use crate::error::Result;
use crate::model::{FileKind, ImportBinding, ImportKind, SourceLocation};
use crate::python::{collect, dotted_name, parse_module, span, str_constant};
use crate::text::{apply_splices, line_end, line_start, whole_lines_span, LineIndex, Splice};

fn is_relative(level: &Option<ast::Int>) -> bool {
    level.is_some_and(|l| l.to_u32() > 0)
}

/// Collects every absolute import site in `text`, in source order.
pub fn scan(text: &str, path: &Path, kind: FileKind) -> Result<Vec<ImportBinding>> {
    let suite = parse_module(text, path)?;
    let collected = collect(&suite);
    let lines = LineIndex::new(text);
    let location = |offset: usize| SourceLocation::new(path, lines.line_of(offset), kind);
    let mut sites: Vec<(usize, ImportBinding)> = Vec::new();

    for node in &collected.imports {
        let start = span(node).start;
        for alias in &node.names {
            sites.push((
                start,
                ImportBinding::new(
                    alias.name.as_str(),
                    ImportKind::Plain,
                    location(start),
                    vec![(alias.name.to_string(), alias.asname.as_ref().map(|a| a.to_string()))],
                ),
            ));
        }
    }
    for node in &collected.import_froms {
        let Some(module) = node.module.as_ref().filter(|_| !is_relative(&node.level)) else {
            continue;
        };
        let names = node
            .names
            .iter()
            .map(|a| (a.name.to_string(), a.asname.as_ref().map(|n| n.to_string())))
            .collect();
        let start = span(node).start;
        sites.push((
            start,
            ImportBinding::new(module.as_str(), ImportKind::FromImport, location(start), names),
        ));
    }
    for call in &collected.calls {
        let kind = match dotted_name(&call.func).as_deref() {
            Some("importlib.import_module" | "import_module") => ImportKind::DynamicLiteral,
            Some("__import__") => ImportKind::DunderImport,
            _ => continue,
        };
        let Some(target) = call.args.first().and_then(str_constant) else { continue };
        if target.is_empty() || target.starts_with('.') {
            continue;
        }
        let start = span(call).start;
        sites.push((start, ImportBinding::new(target, kind, location(start), Vec::new())));
    }
    sites.sort_by_key(|(start, _)| *start);
    Ok(sites.into_iter().map(|(_, b)| b).collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceRemoval {
    pub text: String,
    /// Lines of dynamic imports that were left in place.
    pub flagged_lines: Vec<usize>,
}

struct Remover<'a> {
    text: &'a str,
    names: &'a BTreeSet<String>,
    splices: Vec<Splice>,
    /// Byte spans of statements deleted together with their lines.
    line_deletions: Vec<(usize, usize)>,
}

fn top_level(module: &str) -> &str {
    module.split('.').next().unwrap_or(module)
}

impl Remover<'_> {
    fn matches(&self, module: &str) -> bool {
        self.names.contains(top_level(module))
    }

    fn owns_lines(&self, start: usize, end: usize) -> bool {
        let ls = line_start(self.text, start);
        let le = line_end(self.text, end);
        let after = self.text[end..le].trim();
        self.text[ls..start].trim().is_empty() && (after.is_empty() || after.starts_with('#'))
    }

    fn delete_statement(&mut self, start: usize, end: usize) {
        if self.owns_lines(start, end) {
            self.line_deletions.push((start, end));
            return;
        }
        let bytes = self.text.as_bytes();
        let mut after = end;
        while after < bytes.len() && matches!(bytes[after], b' ' | b'\t') {
            after += 1;
        }
        if after < bytes.len() && bytes[after] == b';' {
            after += 1;
            while after < bytes.len() && matches!(bytes[after], b' ' | b'\t') {
                after += 1;
            }
            self.splices.push(Splice::delete(start, after));
            return;
        }
        let mut before = start;
        while before > 0 && matches!(bytes[before - 1], b' ' | b'\t') {
            before -= 1;
        }
        if before > 0 && bytes[before - 1] == b';' {
            self.splices.push(Splice::delete(before - 1, end));
        } else {
            self.splices.push(Splice::delete(start, end));
        }
    }

    fn body(&mut self, body: &[Stmt], needs_placeholder: bool) {
        let mut doomed = Vec::new();
        for stmt in body {
            match stmt {
                Stmt::Import(imp) => {
                    let keep: Vec<&ast::Alias> =
                        imp.names.iter().filter(|a| !self.matches(a.name.as_str())).collect();
                    if keep.is_empty() {
                        doomed.push(stmt);
                    } else if keep.len() < imp.names.len() {
                        let rendered: Vec<String> = keep
                            .iter()
                            .map(|a| match &a.asname {
                                Some(alias) => format!("{} as {alias}", a.name),
                                None => a.name.to_string(),
                            })
                            .collect();
                        let s = span(stmt);
                        self.splices.push(Splice {
                            start: s.start,
                            end: s.end,
                            replacement: format!("import {}", rendered.join(", ")),
                        });
                    }
                }
                Stmt::ImportFrom(f) if !is_relative(&f.level) => {
                    if f.module.as_ref().is_some_and(|m| self.matches(m.as_str())) {
                        doomed.push(stmt);
                    }
                }
                _ => self.compound(stmt),
            }
        }

        let emptied = needs_placeholder && doomed.len() == body.len();
        for (i, stmt) in doomed.into_iter().enumerate() {
            let s = span(stmt);
            if emptied && i == 0 {
                self.splices.push(Splice {
                    start: s.start,
                    end: s.end,
                    replacement: "pass".to_string(),
                });
            } else {
                self.delete_statement(s.start, s.end);
            }
        }
    }

    fn compound(&mut self, stmt: &Stmt) {
        match stmt {
            Stmt::FunctionDef(s) => self.body(&s.body, true),
            Stmt::AsyncFunctionDef(s) => self.body(&s.body, true),
            Stmt::ClassDef(s) => self.body(&s.body, true),
            Stmt::For(s) => {
                self.body(&s.body, true);
                self.body(&s.orelse, true);
            }
            Stmt::AsyncFor(s) => {
                self.body(&s.body, true);
                self.body(&s.orelse, true);
            }
            Stmt::While(s) => {
                self.body(&s.body, true);
                self.body(&s.orelse, true);
            }
            Stmt::If(s) => {
                self.body(&s.body, true);
                self.body(&s.orelse, true);
            }
            Stmt::With(s) => self.body(&s.body, true),
            Stmt::AsyncWith(s) => self.body(&s.body, true),
            Stmt::Match(s) => {
                for case in &s.cases {
                    self.body(&case.body, true);
                }
            }
            Stmt::Try(s) => self.try_bodies(&s.body, &s.handlers, &s.orelse, &s.finalbody),
            Stmt::TryStar(s) => self.try_bodies(&s.body, &s.handlers, &s.orelse, &s.finalbody),
            _ => {}
        }
    }

    fn try_bodies(
        &mut self,
        body: &[Stmt],
        handlers: &[ast::ExceptHandler],
        orelse: &[Stmt],
        finalbody: &[Stmt],
    ) {
        self.body(body, true);
        for ast::ExceptHandler::ExceptHandler(h) in handlers {
            self.body(&h.body, true);
        }
        self.body(orelse, true);
        self.body(finalbody, true);
    }

    fn finish(self) -> String {
        let lines = LineIndex::new(self.text);
        let mut deletions = self.line_deletions;
        deletions.sort();
        // Merge runs of adjacent deleted lines so their spans never overlap.
        let mut merged: Vec<(usize, usize)> = Vec::new();
        for (start, end) in deletions {
            if let Some(last) = merged.last_mut() {
                if lines.line_of(start) <= lines.line_of(last.1) + 1 {
                    last.1 = last.1.max(end);
                    continue;
                }
            }
            merged.push((start, end));
        }
        let mut splices = self.splices;
        splices.extend(merged.into_iter().map(|(s, e)| whole_lines_span(self.text, s, e)));
        apply_splices(self.text, splices)
    }
}

/// Removes `import` / `from ... import` statements whose top-level module is
/// in `import_names`. Dynamic imports are reported, not edited. The result is
/// checked to still parse.
pub fn remove_imports(text: &str, import_names: &BTreeSet<String>, path: &Path) -> Result<SourceRemoval> {
    let suite = parse_module(text, path)?;
    let mut remover = Remover {
        text,
        names: import_names,
        splices: Vec::new(),
        line_deletions: Vec::new(),
    };
    remover.body(&suite, false);
    let new_text = remover.finish();
    parse_module(&new_text, path)?;

    let flagged_lines = scan(text, path, FileKind::PythonSource)?
        .into_iter()
        .filter(|b| {
            matches!(b.kind, ImportKind::DynamicLiteral | ImportKind::DunderImport)
                && import_names.contains(&b.top_level)
        })
        .map(|b| b.location.line)
        .collect();
    Ok(SourceRemoval {
        text: new_text,
        flagged_lines,
    })
}
