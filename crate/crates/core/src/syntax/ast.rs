use std::collections::BTreeSet;
use std::fmt;

use crate::model::{ExternalVocabulary, Label, Vocabulary};

/// Source position, 1-based. Positions never take part in equality so that
/// parsed and constructed trees compare structurally.
#[derive(Clone, Copy, Debug, Default)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl Span {
    pub fn new(line: usize, col: usize) -> Self {
        Span { line, col }
    }
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Span {}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Terms over `Υ ∪ E`. Program terms are variable-free; variables occur in
/// witness terms and, before desugaring, in let bodies.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    App(String, Vec<Term>),
    Var(String),
}

impl Term {
    pub fn app(name: &str, args: Vec<Term>) -> Term {
        Term::App(name.to_string(), args)
    }

    pub fn constant(name: &str) -> Term {
        Term::App(name.to_string(), Vec::new())
    }

    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn equal(a: Term, b: Term) -> Term {
        Term::App("Equal".into(), vec![a, b])
    }

    pub fn is_closed(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_closed),
        }
    }

    /// All subterms including the term itself, in pre-order.
    pub fn subterms(&self) -> Vec<&Term> {
        let mut out = vec![self];
        if let Term::App(_, args) = self {
            for a in args {
                out.extend(a.subterms());
            }
        }
        out
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn substitute(&self, sub: &dyn Fn(&str) -> Option<Term>) -> Term {
        match self {
            Term::Var(v) => sub(v).unwrap_or_else(|| self.clone()),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.substitute(sub)).collect()),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Guard {
    /// A Boolean term used as a guard.
    Bool(Term),
    /// `(s ⪯ t)`.
    Timing(Term, Term),
    KAnd(Box<Guard>, Box<Guard>),
    KOr(Box<Guard>, Box<Guard>),
    KNot(Box<Guard>),
}

impl Guard {
    pub fn and(a: Guard, b: Guard) -> Guard {
        Guard::KAnd(Box::new(a), Box::new(b))
    }

    pub fn or(a: Guard, b: Guard) -> Guard {
        Guard::KOr(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Guard) -> Guard {
        Guard::KNot(Box::new(a))
    }

    /// Left-nested Kleene conjunction; `None` for an empty list.
    pub fn conjunction(parts: impl IntoIterator<Item = Guard>) -> Option<Guard> {
        parts.into_iter().reduce(Guard::and)
    }

    pub fn terms(&self) -> Vec<&Term> {
        match self {
            Guard::Bool(t) => vec![t],
            Guard::Timing(s, t) => vec![s, t],
            Guard::KAnd(a, b) | Guard::KOr(a, b) => {
                let mut v = a.terms();
                v.extend(b.terms());
                v
            }
            Guard::KNot(a) => a.terms(),
        }
    }
}

/// Core rules.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    Update {
        symbol: String,
        args: Vec<Term>,
        value: Term,
    },
    Issue {
        symbol: String,
        args: Vec<Term>,
    },
    Fail,
    Cond(Guard, Box<Rule>, Box<Rule>),
    Par(Vec<Rule>),
}

impl Rule {
    pub fn skip() -> Rule {
        Rule::Par(Vec::new())
    }

    pub fn cond(g: Guard, then: Rule, els: Rule) -> Rule {
        Rule::Cond(g, Box::new(then), Box::new(els))
    }

    /// Number of rule nodes.
    pub fn size(&self) -> usize {
        match self {
            Rule::Update { .. } | Rule::Issue { .. } | Rule::Fail => 1,
            Rule::Cond(_, a, b) => 1 + a.size() + b.size(),
            Rule::Par(rs) => 1 + rs.iter().map(Rule::size).sum::<usize>(),
        }
    }
}

/// A desugared, validated program.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub vocab: Vocabulary,
    pub labels: BTreeSet<Label>,
    pub external: ExternalVocabulary,
    pub rule: Rule,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TimingOp {
    Preceq,
    Prec,
    Approx,
    Succeq,
    Succ,
}

impl TimingOp {
    pub fn keyword(self) -> &'static str {
        match self {
            TimingOp::Preceq => "preceq",
            TimingOp::Prec => "prec",
            TimingOp::Approx => "approx",
            TimingOp::Succeq => "succeq",
            TimingOp::Succ => "succ",
        }
    }
}

/// Surface terms: applications, let-bound variables and `t!`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum STerm {
    App(String, Vec<STerm>, Span),
    Var(String, Span),
    Bang(Box<STerm>),
}

impl STerm {
    pub fn span(&self) -> Span {
        match self {
            STerm::App(_, _, s) | STerm::Var(_, s) => *s,
            STerm::Bang(t) => t.span(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SGuard {
    Bool(STerm),
    Timing(TimingOp, STerm, STerm),
    KAnd(Box<SGuard>, Box<SGuard>),
    KOr(Box<SGuard>, Box<SGuard>),
    KNot(Box<SGuard>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Binding {
    pub var: String,
    pub term: STerm,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SugarRule {
    Update {
        target: STerm,
        value: STerm,
        span: Span,
    },
    Issue {
        term: STerm,
        span: Span,
    },
    Fail,
    Skip,
    Cond(SGuard, Box<SugarRule>, Box<SugarRule>),
    IfNoElse(SGuard, Box<SugarRule>),
    Par(Vec<SugarRule>),
    InfixPar(Box<SugarRule>, Box<SugarRule>),
    NLet(Vec<Binding>, Box<SugarRule>),
    VLet(Vec<Binding>, Box<SugarRule>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeclKind {
    Static,
    Dynamic,
    External,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decl {
    pub kind: DeclKind,
    pub relational: bool,
    pub name: String,
    pub arity: usize,
    /// Written template for externals, as raw items.
    pub template: Option<Vec<RawTemplateItem>>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RawTemplateItem {
    Label(String),
    Placeholder(usize),
}

/// A parsed program, before validation and desugaring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SugarProgram {
    pub decls: Vec<Decl>,
    pub labels: Vec<(String, Span)>,
    pub rule: SugarRule,
}
