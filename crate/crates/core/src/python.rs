//! Thin helpers over `rustpython-parser`.

use std::ops::Range;
use std::path::Path;

use rustpython_ast::Visitor;
use rustpython_parser::ast::{self, Ranged};
use rustpython_parser::Parse;

use crate::error::{Error, Result};

pub fn parse_module(text: &str, path: &Path) -> Result<ast::Suite> {
    ast::Suite::parse(text, &path.to_string_lossy()).map_err(|e| Error::PySyntax {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn span<T: Ranged>(node: &T) -> Range<usize> {
    let r = node.range();
    r.start().to_usize()..r.end().to_usize()
}

pub fn str_constant(expr: &ast::Expr) -> Option<&str> {
    match expr {
        ast::Expr::Constant(c) => match &c.value {
            ast::Constant::Str(s) => Some(s.as_str()),
            _ => None,
        },
        _ => None,
    }
}

/// Dotted name of a `Name` / `Attribute` chain, e.g. `importlib.import_module`.
pub fn dotted_name(expr: &ast::Expr) -> Option<String> {
    match expr {
        ast::Expr::Name(n) => Some(n.id.to_string()),
        ast::Expr::Attribute(a) => Some(format!("{}.{}", dotted_name(&a.value)?, a.attr)),
        _ => None,
    }
}

/// Call expressions and import statements gathered from a whole module.
#[derive(Debug, Default)]
pub struct Collected {
    pub calls: Vec<ast::ExprCall>,
    pub imports: Vec<ast::StmtImport>,
    pub import_froms: Vec<ast::StmtImportFrom>,
}

// The stock visitor stops at keywords, `with` items, comprehensions, match
// cases and argument defaults; those are walked by hand here.
impl Visitor for Collected {
    fn visit_expr_call(&mut self, node: ast::ExprCall) {
        self.calls.push(node.clone());
        self.generic_visit_expr_call(node);
    }

    fn visit_stmt_import(&mut self, node: ast::StmtImport) {
        self.imports.push(node);
    }

    fn visit_stmt_import_from(&mut self, node: ast::StmtImportFrom) {
        self.import_froms.push(node);
    }

    fn visit_keyword(&mut self, node: ast::Keyword) {
        self.visit_expr(node.value);
    }

    fn visit_withitem(&mut self, node: ast::WithItem) {
        self.visit_expr(node.context_expr);
    }

    fn visit_comprehension(&mut self, node: ast::Comprehension) {
        self.visit_expr(node.iter);
        for cond in node.ifs {
            self.visit_expr(cond);
        }
    }

    fn visit_match_case(&mut self, node: ast::MatchCase) {
        if let Some(guard) = node.guard {
            self.visit_expr(*guard);
        }
        for stmt in node.body {
            self.visit_stmt(stmt);
        }
    }

    fn visit_arguments(&mut self, node: ast::Arguments) {
        let all = node.posonlyargs.into_iter().chain(node.args).chain(node.kwonlyargs);
        for default in all.filter_map(|a| a.default) {
            self.visit_expr(*default);
        }
    }
}

pub fn collect(suite: &ast::Suite) -> Collected {
    let mut collected = Collected::default();
    for stmt in suite.iter().cloned() {
        collected.visit_stmt(stmt);
    }
    collected
}

/// Every call expression in the module, outermost first.
pub fn all_calls(suite: &ast::Suite) -> Vec<ast::ExprCall> {
    collect(suite).calls
}
