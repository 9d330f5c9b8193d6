use std::collections::BTreeSet;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::model::{ExternalVocabulary, SymbolId};
use crate::syntax::{printer, Guard, Rule, Term};

/// A shadow `t̃` of a term together with the substitution that undoes it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Shadow {
    pub term: Term,
    pub subst: Vec<(String, Term)>,
}

impl Shadow {
    /// Substitute the replaced subterms back.
    pub fn restore(&self) -> Term {
        self.term.substitute(&|v| {
            self.subst
                .iter()
                .find(|(name, _)| name == v)
                .map(|(_, t)| t.clone())
        })
    }
}

fn is_external(t: &Term, ext: &ExternalVocabulary) -> bool {
    matches!(t, Term::App(f, args) if ext.contains(&SymbolId::new(f.as_str(), args.len())))
}

/// Replace every outermost external-headed subterm occurrence by a fresh
/// variable, numbering them `v1, v2, …` from left to right.
pub fn shadow(t: &Term, ext: &ExternalVocabulary) -> Shadow {
    fn walk(t: &Term, ext: &ExternalVocabulary, subst: &mut Vec<(String, Term)>) -> Term {
        if is_external(t, ext) {
            let v = format!("v{}", subst.len() + 1);
            subst.push((v.clone(), t.clone()));
            return Term::Var(v);
        }
        match t {
            Term::Var(_) => t.clone(),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| walk(a, ext, subst)).collect()),
        }
    }
    let mut subst = Vec::new();
    let term = walk(t, ext, &mut subst);
    Shadow { term, subst }
}

/// A finite set of Υ-terms, possibly with variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Witness(BTreeSet<Term>);

/// The variable added by normalization.
pub const WITNESS_VAR: &str = "v";

impl Witness {
    pub fn new(terms: impl IntoIterator<Item = Term>) -> Self {
        Witness(terms.into_iter().collect())
    }

    pub fn terms(&self) -> &BTreeSet<Term> {
        &self.0
    }

    pub fn contains(&self, t: &Term) -> bool {
        self.0.contains(t)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn union(&mut self, other: Witness) {
        self.0.extend(other.0);
    }

    fn add_booleans(&mut self) {
        self.0.insert(Term::constant("true"));
        self.0.insert(Term::constant("false"));
    }

    /// Close under subterms and add `true`, `false` and a variable.
    pub fn normalized(&self) -> Witness {
        let mut out: BTreeSet<Term> = BTreeSet::new();
        for t in &self.0 {
            out.extend(t.subterms().into_iter().cloned());
        }
        out.insert(Term::constant("true"));
        out.insert(Term::constant("false"));
        out.insert(Term::var(WITNESS_VAR));
        Witness(out)
    }

    pub fn is_normalized(&self) -> bool {
        let closed = self
            .0
            .iter()
            .all(|t| t.subterms().into_iter().all(|s| self.0.contains(s)));
        closed
            && self.0.contains(&Term::constant("true"))
            && self.0.contains(&Term::constant("false"))
            && self.0.iter().any(|t| matches!(t, Term::Var(_)))
    }

    pub fn vars(&self) -> BTreeSet<String> {
        self.0.iter().flat_map(|t| t.vars()).collect()
    }

    /// Closed terms, the level-0 critical terms.
    pub fn closed_terms(&self) -> impl Iterator<Item = &Term> {
        self.0.iter().filter(|t| t.is_closed())
    }

    /// Printed terms: `true` and `false` first, then by size and text.
    pub fn printed(&self) -> Vec<String> {
        let rank = |t: &Term| match t {
            Term::App(f, a) if a.is_empty() && f == "true" => 0,
            Term::App(f, a) if a.is_empty() && f == "false" => 1,
            _ => 2,
        };
        let mut ts: Vec<&Term> = self.0.iter().collect();
        ts.sort_by_key(|t| (rank(t), t.size(), printer::term_compact(t)));
        ts.into_iter().map(printer::term_compact).collect()
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.printed().join(", "))
    }
}

impl Serialize for Witness {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.printed().serialize(s)
    }
}

/// `W(t)` before normalization.
pub fn witness_term(t: &Term, ext: &ExternalVocabulary) -> Witness {
    let mut w = Witness::default();
    collect_term(t, ext, &mut w);
    w
}

fn collect_term(t: &Term, ext: &ExternalVocabulary, w: &mut Witness) {
    if let Term::App(_, args) = t {
        w.0.insert(shadow(t, ext).term);
        for a in args {
            collect_term(a, ext, w);
        }
    }
}

pub fn witness_guard(g: &Guard, ext: &ExternalVocabulary) -> Witness {
    let mut w = Witness::default();
    match g {
        Guard::Bool(t) => collect_term(t, ext, &mut w),
        Guard::Timing(s, t) => {
            collect_term(s, ext, &mut w);
            collect_term(t, ext, &mut w);
            w.add_booleans();
        }
        Guard::KAnd(a, b) | Guard::KOr(a, b) => {
            w.union(witness_guard(a, ext));
            w.union(witness_guard(b, ext));
            w.add_booleans();
        }
        Guard::KNot(a) => {
            w.union(witness_guard(a, ext));
            w.add_booleans();
        }
    }
    w
}

pub fn witness_rule(r: &Rule, ext: &ExternalVocabulary) -> Witness {
    let mut w = Witness::default();
    match r {
        Rule::Update { args, value, .. } => {
            for t in args.iter().chain([value]) {
                collect_term(t, ext, &mut w);
            }
        }
        Rule::Issue { args, .. } => {
            for t in args {
                collect_term(t, ext, &mut w);
            }
        }
        Rule::Fail => {}
        Rule::Cond(g, a, b) => {
            w.union(witness_guard(g, ext));
            w.union(witness_rule(a, ext));
            w.union(witness_rule(b, ext));
            w.add_booleans();
        }
        Rule::Par(rs) => {
            for c in rs {
                w.union(witness_rule(c, ext));
            }
        }
    }
    w
}
