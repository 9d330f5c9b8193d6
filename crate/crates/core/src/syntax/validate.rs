use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::ast::*;
use crate::model::{is_logic_name, SymbolId, SymbolInfo, Vocabulary};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Code {
    SyntaxError,
    DuplicateSymbol,
    ExternalRelational,
    BadTemplate,
    UnknownSymbol,
    ArityMismatch,
    UpdateToStatic,
    UpdateToExternal,
    UpdateTarget,
    RelationalNonBoolean,
    IssueNonExternal,
    GuardNotBoolean,
    DuplicateBinding,
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: Code,
    pub message: String,
    pub line: usize,
    pub col: usize,
}

impl Diagnostic {
    pub fn error(code: Code, span: Span, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code,
            message: message.into(),
            line: span.line,
            col: span.col,
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}: {}", self.line, self.col, self.code, self.message)
    }
}

/// What a symbol name with a given arity refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Sym {
    Internal(SymbolInfo),
    External,
}

struct Checker {
    symbols: BTreeMap<SymbolId, Sym>,
    diags: Vec<Diagnostic>,
}

impl Checker {
    fn err(&mut self, code: Code, span: Span, msg: String) {
        self.diags.push(Diagnostic::error(code, span, msg));
    }

    fn resolve(&mut self, name: &str, arity: usize, span: Span) -> Option<Sym> {
        let id = SymbolId::new(name, arity);
        if let Some(s) = self.symbols.get(&id) {
            return Some(*s);
        }
        let others: Vec<usize> = self
            .symbols
            .keys()
            .filter(|k| k.name == name)
            .map(|k| k.arity)
            .collect();
        if others.is_empty() {
            self.err(Code::UnknownSymbol, span, format!("unknown symbol `{name}`"));
        } else {
            let list: Vec<String> = others.iter().map(|a| a.to_string()).collect();
            self.err(
                Code::ArityMismatch,
                span,
                format!("`{name}` applied to {arity} arguments, declared with arity {}", list.join(" or ")),
            );
        }
        None
    }

    /// Checks a term, returning whether it is Boolean.
    fn term(&mut self, t: &STerm, env: &BTreeMap<String, bool>) -> bool {
        match t {
            STerm::Var(v, _) => env.get(v).copied().unwrap_or(false),
            STerm::Bang(inner) => {
                self.term(inner, env);
                true
            }
            STerm::App(f, args, span) => {
                for a in args {
                    self.term(a, env);
                }
                matches!(
                    self.resolve(f, args.len(), *span),
                    Some(Sym::Internal(SymbolInfo {
                        relational: true,
                        ..
                    }))
                )
            }
        }
    }

    fn guard(&mut self, g: &SGuard, env: &BTreeMap<String, bool>) {
        match g {
            SGuard::Bool(t) => {
                if !self.term(t, env) {
                    let shown = super::printer::sugar_term(t);
                    self.err(
                        Code::GuardNotBoolean,
                        t.span(),
                        format!("`{shown}` is not a Boolean term"),
                    );
                }
            }
            SGuard::Timing(_, s, t) => {
                self.term(s, env);
                self.term(t, env);
            }
            SGuard::KAnd(a, b) | SGuard::KOr(a, b) => {
                self.guard(a, env);
                self.guard(b, env);
            }
            SGuard::KNot(a) => self.guard(a, env),
        }
    }

    fn bindings(&mut self, bs: &[Binding], env: &BTreeMap<String, bool>) -> BTreeMap<String, bool> {
        let mut inner = env.clone();
        let mut seen = BTreeSet::new();
        for b in bs {
            if !seen.insert(b.var.as_str()) {
                self.err(
                    Code::DuplicateBinding,
                    b.span,
                    format!("variable `{}` bound twice", b.var),
                );
            }
            let boolean = self.term(&b.term, env);
            inner.insert(b.var.clone(), boolean);
        }
        inner
    }

    fn rule(&mut self, r: &SugarRule, env: &BTreeMap<String, bool>) {
        match r {
            SugarRule::Update {
                target,
                value,
                span,
            } => {
                let rhs_bool = self.term(value, env);
                let STerm::App(f, args, tspan) = target else {
                    self.err(
                        Code::UpdateTarget,
                        *span,
                        "the left side of `:=` must be a function application".into(),
                    );
                    return;
                };
                for a in args {
                    self.term(a, env);
                }
                match self.resolve(f, args.len(), *tspan) {
                    Some(Sym::External) => self.err(
                        Code::UpdateToExternal,
                        *tspan,
                        format!("cannot update external symbol `{f}/{}`", args.len()),
                    ),
                    Some(Sym::Internal(info)) if info.is_static => self.err(
                        Code::UpdateToStatic,
                        *tspan,
                        format!("cannot update static symbol `{f}/{}`", args.len()),
                    ),
                    Some(Sym::Internal(info)) if info.relational && !rhs_bool => self.err(
                        Code::RelationalNonBoolean,
                        value.span(),
                        format!("relational symbol `{f}/{}` needs a Boolean right side", args.len()),
                    ),
                    _ => {}
                }
            }
            SugarRule::Issue { term, span } => {
                let STerm::App(f, args, tspan) = term else {
                    self.err(
                        Code::IssueNonExternal,
                        *span,
                        "`issue` needs an external function application".into(),
                    );
                    return;
                };
                for a in args {
                    self.term(a, env);
                }
                if let Some(Sym::Internal(_)) = self.resolve(f, args.len(), *tspan) {
                    self.err(
                        Code::IssueNonExternal,
                        *tspan,
                        format!("`{f}/{}` is not an external symbol", args.len()),
                    );
                }
            }
            SugarRule::Fail | SugarRule::Skip => {}
            SugarRule::Cond(g, a, b) => {
                self.guard(g, env);
                self.rule(a, env);
                self.rule(b, env);
            }
            SugarRule::IfNoElse(g, a) => {
                self.guard(g, env);
                self.rule(a, env);
            }
            SugarRule::Par(rs) => rs.iter().for_each(|c| self.rule(c, env)),
            SugarRule::InfixPar(a, b) => {
                self.rule(a, env);
                self.rule(b, env);
            }
            SugarRule::NLet(bs, body) | SugarRule::VLet(bs, body) => {
                let inner = self.bindings(bs, env);
                self.rule(body, &inner);
            }
        }
    }
}

/// Checks declarations, arities, update and issue heads, and guard
/// Booleanness. Returns no diagnostics for a well-formed program.
pub fn validate(p: &SugarProgram) -> Vec<Diagnostic> {
    let mut c = Checker {
        symbols: BTreeMap::new(),
        diags: Vec::new(),
    };
    for (id, info) in Vocabulary::new().iter() {
        c.symbols.insert(id.clone(), Sym::Internal(*info));
    }
    for d in &p.decls {
        let id = SymbolId::new(&d.name, d.arity);
        if is_logic_name(&id) || c.symbols.contains_key(&id) {
            c.err(Code::DuplicateSymbol, d.span, format!("symbol `{id}` is already declared"));
            continue;
        }
        let sym = match d.kind {
            DeclKind::Static | DeclKind::Dynamic => Sym::Internal(SymbolInfo {
                is_static: d.kind == DeclKind::Static,
                relational: d.relational,
            }),
            DeclKind::External => {
                if d.relational {
                    c.err(
                        Code::ExternalRelational,
                        d.span,
                        format!("external symbol `{id}` cannot be relational"),
                    );
                }
                if let Some(items) = &d.template {
                    if let Err(msg) = check_template(items, d.arity) {
                        c.err(Code::BadTemplate, d.span, format!("template of `{id}`: {msg}"));
                    }
                }
                Sym::External
            }
        };
        c.symbols.insert(id, sym);
    }
    c.rule(&p.rule, &BTreeMap::new());
    c.diags
}

pub(crate) fn check_template(items: &[RawTemplateItem], arity: usize) -> Result<(), String> {
    if items.is_empty() {
        return Err("queries must be nonempty, so the template cannot be empty".into());
    }
    let mut seen: Vec<usize> = items
        .iter()
        .filter_map(|i| match i {
            RawTemplateItem::Placeholder(n) => Some(*n),
            RawTemplateItem::Label(_) => None,
        })
        .collect();
    seen.sort_unstable();
    if seen.iter().copied().ne(1..=arity) {
        return Err(format!("placeholders must be #1..#{arity}, each exactly once"));
    }
    Ok(())
}
