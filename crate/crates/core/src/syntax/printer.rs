//! Pretty printing in the concrete grammar. Output re-parses to the same tree.

use std::fmt::Write;

use super::ast::*;
use crate::model::TemplateItem;

pub fn term(t: &Term) -> String {
    let mut s = String::new();
    write_term(&mut s, t);
    s
}

/// Like [`term`] but without `()` after constants. Used for display where
/// variables are not in play or are known by name.
pub fn term_compact(t: &Term) -> String {
    match t {
        Term::App(f, args) if args.is_empty() => f.clone(),
        Term::App(f, args) => {
            let parts: Vec<String> = args.iter().map(term_compact).collect();
            format!("{f}({})", parts.join(", "))
        }
        Term::Var(v) => v.clone(),
    }
}

fn write_term(out: &mut String, t: &Term) {
    match t {
        Term::Var(v) => out.push_str(v),
        Term::App(f, args) => {
            out.push_str(f);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_term(out, a);
            }
            out.push(')');
        }
    }
}

/// Precedence: 1 for `kor`, 2 for `kand`, 3 for everything tighter.
fn guard_prec(g: &Guard) -> u8 {
    match g {
        Guard::KOr(..) => 1,
        Guard::KAnd(..) => 2,
        _ => 3,
    }
}

pub fn guard(g: &Guard) -> String {
    let mut s = String::new();
    write_guard(&mut s, g);
    s
}

fn write_guard_at(out: &mut String, g: &Guard, min: u8) {
    if guard_prec(g) < min {
        out.push('(');
        write_guard(out, g);
        out.push(')');
    } else {
        write_guard(out, g);
    }
}

fn write_guard(out: &mut String, g: &Guard) {
    match g {
        Guard::Bool(t) => write_term(out, t),
        Guard::Timing(s, t) => {
            write_term(out, s);
            out.push_str(" preceq ");
            write_term(out, t);
        }
        Guard::KAnd(a, b) => {
            write_guard_at(out, a, 2);
            out.push_str(" kand ");
            write_guard_at(out, b, 3);
        }
        Guard::KOr(a, b) => {
            write_guard_at(out, a, 1);
            out.push_str(" kor ");
            write_guard_at(out, b, 2);
        }
        Guard::KNot(a) => {
            out.push_str("knot ");
            match **a {
                Guard::KNot(_) | Guard::Bool(_) => write_guard(out, a),
                _ => {
                    out.push('(');
                    write_guard(out, a);
                    out.push(')');
                }
            }
        }
    }
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

pub fn rule(r: &Rule) -> String {
    let mut s = String::new();
    write_rule(&mut s, r, 0);
    s
}

fn write_rule(out: &mut String, r: &Rule, depth: usize) {
    match r {
        Rule::Update {
            symbol,
            args,
            value,
        } => {
            write_term(out, &Term::App(symbol.clone(), args.clone()));
            out.push_str(" := ");
            write_term(out, value);
        }
        Rule::Issue { symbol, args } => {
            out.push_str("issue ");
            write_term(out, &Term::App(symbol.clone(), args.clone()));
        }
        Rule::Fail => out.push_str("fail"),
        Rule::Cond(g, a, b) => {
            out.push_str("if ");
            write_guard(out, g);
            out.push_str(" then\n");
            indent(out, depth + 1);
            write_rule(out, a, depth + 1);
            out.push('\n');
            indent(out, depth);
            out.push_str("else\n");
            indent(out, depth + 1);
            write_rule(out, b, depth + 1);
            out.push('\n');
            indent(out, depth);
            out.push_str("endif");
        }
        Rule::Par(rs) if rs.is_empty() => out.push_str("skip"),
        Rule::Par(rs) => {
            out.push_str("par {\n");
            for (i, c) in rs.iter().enumerate() {
                indent(out, depth + 1);
                write_rule(out, c, depth + 1);
                if i + 1 < rs.len() {
                    out.push_str(" ;");
                }
                out.push('\n');
            }
            indent(out, depth);
            out.push('}');
        }
    }
}

fn write_template(out: &mut String, items: &[TemplateItem]) {
    out.push('[');
    for (i, it) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        match it {
            TemplateItem::Label(l) => out.push_str(&l.0),
            TemplateItem::Placeholder(n) => {
                let _ = write!(out, "#{n}");
            }
        }
    }
    out.push(']');
}

/// A core program as source text.
pub fn program(p: &Program) -> String {
    let mut out = String::new();
    for (id, info) in p.vocab.user_symbols() {
        let kind = if info.is_static { "static" } else { "dynamic" };
        let rel = if info.relational { " relational" } else { "" };
        let _ = writeln!(out, "{kind}{rel} {id};");
    }
    if !p.labels.is_empty() {
        let names: Vec<&str> = p.labels.iter().map(|l| l.0.as_str()).collect();
        let _ = writeln!(out, "labels {};", names.join(", "));
    }
    for (id, t) in p.external.iter() {
        let _ = write!(out, "external {id} = ");
        write_template(&mut out, t.items());
        out.push_str(";\n");
    }
    out.push_str("rule ");
    write_rule(&mut out, &p.rule, 0);
    out.push('\n');
    out
}

fn write_sterm(out: &mut String, t: &STerm) {
    match t {
        STerm::Var(v, _) => out.push_str(v),
        STerm::Bang(t) => {
            write_sterm(out, t);
            out.push('!');
        }
        STerm::App(f, args, _) => {
            out.push_str(f);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_sterm(out, a);
            }
            out.push(')');
        }
    }
}

fn sguard_prec(g: &SGuard) -> u8 {
    match g {
        SGuard::KOr(..) => 1,
        SGuard::KAnd(..) => 2,
        _ => 3,
    }
}

fn write_sguard_at(out: &mut String, g: &SGuard, min: u8) {
    if sguard_prec(g) < min {
        out.push('(');
        write_sguard(out, g);
        out.push(')');
    } else {
        write_sguard(out, g);
    }
}

fn write_sguard(out: &mut String, g: &SGuard) {
    match g {
        SGuard::Bool(t) => write_sterm(out, t),
        SGuard::Timing(op, s, t) => {
            write_sterm(out, s);
            let _ = write!(out, " {} ", op.keyword());
            write_sterm(out, t);
        }
        SGuard::KAnd(a, b) => {
            write_sguard_at(out, a, 2);
            out.push_str(" kand ");
            write_sguard_at(out, b, 3);
        }
        SGuard::KOr(a, b) => {
            write_sguard_at(out, a, 1);
            out.push_str(" kor ");
            write_sguard_at(out, b, 2);
        }
        SGuard::KNot(a) => {
            out.push_str("knot ");
            match **a {
                SGuard::KNot(_) | SGuard::Bool(_) => write_sguard(out, a),
                _ => {
                    out.push('(');
                    write_sguard(out, a);
                    out.push(')');
                }
            }
        }
    }
}

fn is_let(r: &SugarRule) -> bool {
    matches!(r, SugarRule::NLet(..) | SugarRule::VLet(..))
}

fn write_srule(out: &mut String, r: &SugarRule, depth: usize) {
    match r {
        SugarRule::Update { target, value, .. } => {
            write_sterm(out, target);
            out.push_str(" := ");
            write_sterm(out, value);
        }
        SugarRule::Issue { term, .. } => {
            out.push_str("issue ");
            write_sterm(out, term);
        }
        SugarRule::Fail => out.push_str("fail"),
        SugarRule::Skip => out.push_str("skip"),
        SugarRule::Cond(g, a, b) => {
            out.push_str("if ");
            write_sguard(out, g);
            out.push_str(" then ");
            write_srule(out, a, depth + 1);
            out.push_str(" else ");
            write_srule(out, b, depth + 1);
            out.push_str(" endif");
        }
        SugarRule::IfNoElse(g, a) => {
            out.push_str("if ");
            write_sguard(out, g);
            out.push_str(" then ");
            write_srule(out, a, depth + 1);
            out.push_str(" endif");
        }
        SugarRule::Par(rs) => {
            out.push_str("par { ");
            for (i, c) in rs.iter().enumerate() {
                if i > 0 {
                    out.push_str(" ; ");
                }
                write_srule(out, c, depth + 1);
            }
            out.push_str(" }");
        }
        SugarRule::InfixPar(a, b) => {
            let wrap_left = is_let(a);
            let wrap_right = is_let(b) || matches!(**b, SugarRule::InfixPar(..));
            wrap(out, a, depth, wrap_left);
            out.push_str(" par ");
            wrap(out, b, depth, wrap_right);
        }
        SugarRule::NLet(bs, body) | SugarRule::VLet(bs, body) => {
            out.push_str(if matches!(r, SugarRule::NLet(..)) {
                "nlet "
            } else {
                "vlet "
            });
            for (i, b) in bs.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(&b.var);
                out.push_str(" = ");
                write_sterm(out, &b.term);
            }
            out.push_str(" in ");
            write_srule(out, body, depth + 1);
        }
    }
}

fn wrap(out: &mut String, r: &SugarRule, depth: usize, parens: bool) {
    if parens {
        out.push('(');
    }
    write_srule(out, r, depth);
    if parens {
        out.push(')');
    }
}

pub fn sugar_rule(r: &SugarRule) -> String {
    let mut s = String::new();
    write_srule(&mut s, r, 0);
    s
}

pub fn sugar_guard(g: &SGuard) -> String {
    let mut s = String::new();
    write_sguard(&mut s, g);
    s
}

pub fn sugar_term(t: &STerm) -> String {
    let mut s = String::new();
    write_sterm(&mut s, t);
    s
}

/// A parsed program as source text, one declaration per statement.
pub fn sugar_program(p: &SugarProgram) -> String {
    let mut out = String::new();
    for d in &p.decls {
        let kind = match d.kind {
            DeclKind::Static => "static",
            DeclKind::Dynamic => "dynamic",
            DeclKind::External => "external",
        };
        let rel = if d.relational { " relational" } else { "" };
        let _ = write!(out, "{kind}{rel} {}/{}", d.name, d.arity);
        if let Some(items) = &d.template {
            out.push_str(" = [");
            for (i, it) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                match it {
                    RawTemplateItem::Label(l) => out.push_str(l),
                    RawTemplateItem::Placeholder(n) => {
                        let _ = write!(out, "#{n}");
                    }
                }
            }
            out.push(']');
        }
        out.push_str(";\n");
    }
    for (l, _) in &p.labels {
        let _ = writeln!(out, "labels {l};");
    }
    out.push_str("rule ");
    write_srule(&mut out, &p.rule, 0);
    out.push('\n');
    out
}
