use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::ast::*;
use super::validate::check_template;
use crate::model::{
    ExternalVocabulary, Label, SymbolId, SymbolInfo, Template, TemplateItem, Vocabulary,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DesugarError {
    #[error("{span}: unbound variable `{name}`")]
    UnboundVariable { name: String, span: Span },
    #[error("{0}: the left side of `:=` must be a function application")]
    UpdateTarget(Span),
    #[error("{0}: `issue` needs a function application")]
    IssueTarget(Span),
    #[error("{span}: bad declaration: {msg}")]
    BadDeclaration { span: Span, msg: String },
}

type Env = BTreeMap<String, Term>;

fn term(t: &STerm, env: &Env) -> Result<Term, DesugarError> {
    match t {
        STerm::Var(v, span) => env.get(v).cloned().ok_or(DesugarError::UnboundVariable {
            name: v.clone(),
            span: *span,
        }),
        STerm::Bang(inner) => {
            let c = term(inner, env)?;
            Ok(Term::equal(c.clone(), c))
        }
        STerm::App(f, args, _) => Ok(Term::App(
            f.clone(),
            args.iter().map(|a| term(a, env)).collect::<Result<_, _>>()?,
        )),
    }
}

fn guard(g: &SGuard, env: &Env) -> Result<Guard, DesugarError> {
    Ok(match g {
        SGuard::Bool(t) => Guard::Bool(term(t, env)?),
        SGuard::Timing(op, s, t) => {
            let (s, t) = (term(s, env)?, term(t, env)?);
            match op {
                TimingOp::Preceq => Guard::Timing(s, t),
                TimingOp::Succeq => Guard::Timing(t, s),
                TimingOp::Prec => Guard::not(Guard::Timing(t, s)),
                TimingOp::Succ => Guard::not(Guard::Timing(s, t)),
                TimingOp::Approx => Guard::and(Guard::Timing(s.clone(), t.clone()), Guard::Timing(t, s)),
            }
        }
        SGuard::KAnd(a, b) => Guard::and(guard(a, env)?, guard(b, env)?),
        SGuard::KOr(a, b) => Guard::or(guard(a, env)?, guard(b, env)?),
        SGuard::KNot(a) => Guard::not(guard(a, env)?),
    })
}

fn bind(bs: &[Binding], env: &Env) -> Result<(Env, Vec<Term>), DesugarError> {
    let mut inner = env.clone();
    let mut values = Vec::new();
    for b in bs {
        let t = term(&b.term, env)?;
        values.push(t.clone());
        inner.insert(b.var.clone(), t);
    }
    Ok((inner, values))
}

fn rule(r: &SugarRule, env: &Env) -> Result<Rule, DesugarError> {
    Ok(match r {
        SugarRule::Update {
            target,
            value,
            span,
        } => match term(target, env)? {
            Term::App(symbol, args) if !matches!(target, STerm::Bang(_)) => Rule::Update {
                symbol,
                args,
                value: term(value, env)?,
            },
            _ => return Err(DesugarError::UpdateTarget(*span)),
        },
        SugarRule::Issue { term: t, span } => match term(t, env)? {
            Term::App(symbol, args) if !matches!(t, STerm::Bang(_)) => Rule::Issue { symbol, args },
            _ => return Err(DesugarError::IssueTarget(*span)),
        },
        SugarRule::Fail => Rule::Fail,
        SugarRule::Skip => Rule::skip(),
        SugarRule::Cond(g, a, b) => Rule::cond(guard(g, env)?, rule(a, env)?, rule(b, env)?),
        SugarRule::IfNoElse(g, a) => Rule::cond(guard(g, env)?, rule(a, env)?, Rule::skip()),
        SugarRule::Par(rs) => Rule::Par(rs.iter().map(|c| rule(c, env)).collect::<Result<_, _>>()?),
        SugarRule::InfixPar(a, b) => Rule::Par(vec![rule(a, env)?, rule(b, env)?]),
        SugarRule::NLet(bs, body) => {
            let (inner, _) = bind(bs, env)?;
            rule(body, &inner)?
        }
        SugarRule::VLet(bs, body) => {
            let (inner, values) = bind(bs, env)?;
            let test = values
                .into_iter()
                .map(|t| Term::equal(t.clone(), t))
                .reduce(|a, b| Term::app("And", vec![a, b]))
                .expect("let has at least one binding");
            Rule::cond(Guard::Bool(test), rule(body, &inner)?, Rule::skip())
        }
    })
}

/// Removes all sugar from a rule.
pub fn desugar_rule(r: &SugarRule) -> Result<Rule, DesugarError> {
    rule(r, &Env::new())
}

pub fn desugar_guard(g: &SGuard) -> Result<Guard, DesugarError> {
    guard(g, &Env::new())
}

pub fn desugar_term(t: &STerm) -> Result<Term, DesugarError> {
    term(t, &Env::new())
}

/// Embeds a core rule into the sugar tree unchanged.
pub fn lift(r: &Rule) -> SugarRule {
    match r {
        Rule::Update {
            symbol,
            args,
            value,
        } => SugarRule::Update {
            target: lift_term(&Term::App(symbol.clone(), args.clone())),
            value: lift_term(value),
            span: Span::default(),
        },
        Rule::Issue { symbol, args } => SugarRule::Issue {
            term: lift_term(&Term::App(symbol.clone(), args.clone())),
            span: Span::default(),
        },
        Rule::Fail => SugarRule::Fail,
        Rule::Cond(g, a, b) => SugarRule::Cond(lift_guard(g), Box::new(lift(a)), Box::new(lift(b))),
        Rule::Par(rs) => SugarRule::Par(rs.iter().map(lift).collect()),
    }
}

pub fn lift_term(t: &Term) -> STerm {
    match t {
        Term::Var(v) => STerm::Var(v.clone(), Span::default()),
        Term::App(f, args) => STerm::App(f.clone(), args.iter().map(lift_term).collect(), Span::default()),
    }
}

pub fn lift_guard(g: &Guard) -> SGuard {
    match g {
        Guard::Bool(t) => SGuard::Bool(lift_term(t)),
        Guard::Timing(s, t) => SGuard::Timing(TimingOp::Preceq, lift_term(s), lift_term(t)),
        Guard::KAnd(a, b) => SGuard::KAnd(Box::new(lift_guard(a)), Box::new(lift_guard(b))),
        Guard::KOr(a, b) => SGuard::KOr(Box::new(lift_guard(a)), Box::new(lift_guard(b))),
        Guard::KNot(a) => SGuard::KNot(Box::new(lift_guard(a))),
    }
}

/// Builds the vocabularies and desugars the rule. Assumes `validate` passed;
/// declaration problems it would report are returned as errors here.
pub fn desugar(p: &SugarProgram) -> Result<Program, DesugarError> {
    let mut vocab = Vocabulary::new();
    let mut external = ExternalVocabulary::new();
    let mut labels: BTreeSet<Label> = p.labels.iter().map(|(l, _)| Label::new(l)).collect();
    let bad = |span: Span, msg: String| DesugarError::BadDeclaration { span, msg };
    for d in &p.decls {
        match d.kind {
            DeclKind::Static | DeclKind::Dynamic => {
                let info = SymbolInfo {
                    is_static: d.kind == DeclKind::Static,
                    relational: d.relational,
                };
                vocab
                    .declare(SymbolId::new(&d.name, d.arity), info)
                    .map_err(|e| bad(d.span, e.to_string()))?;
            }
            DeclKind::External => {
                let template = match &d.template {
                    None => Template::labelled(&d.name, d.arity),
                    Some(items) => {
                        check_template(items, d.arity).map_err(|m| bad(d.span, m))?;
                        Template::new(
                            items
                                .iter()
                                .map(|i| match i {
                                    RawTemplateItem::Label(l) => TemplateItem::Label(Label::new(l)),
                                    RawTemplateItem::Placeholder(n) => TemplateItem::Placeholder(*n),
                                })
                                .collect(),
                        )
                        .map_err(|e| bad(d.span, e.to_string()))?
                    }
                };
                labels.extend(template.labels().cloned());
                external
                    .declare(d.name.clone(), template)
                    .map_err(|e| bad(d.span, e.to_string()))?;
            }
        }
    }
    Ok(Program {
        vocab,
        labels,
        external,
        rule: desugar_rule(&p.rule)?,
    })
}
