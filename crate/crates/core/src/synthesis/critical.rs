use std::collections::BTreeMap;

use serde::Serialize;

use super::SynthError;
use crate::analysis::Witness;
use crate::model::ExternalVocabulary;
use crate::syntax::{printer, Term};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct CriticalTerm {
    #[serde(serialize_with = "compact")]
    pub term: Term,
    pub level: usize,
    /// Headed by an external symbol.
    pub is_q: bool,
}

fn compact<S: serde::Serializer>(t: &Term, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&printer::term_compact(t))
}

/// Critical terms up to some level, each with its least level.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CriticalTerms {
    pub max_level: usize,
    pub terms: Vec<CriticalTerm>,
}

impl CriticalTerms {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn upto(&self, level: usize) -> impl Iterator<Item = &CriticalTerm> {
        self.terms.iter().filter(move |c| c.level <= level)
    }

    pub fn q_upto(&self, level: usize) -> impl Iterator<Item = &CriticalTerm> {
        self.upto(level).filter(|c| c.is_q)
    }
}

/// Level 0: the closed terms of `w`. Level n+1: external symbols applied to
/// critical terms of level at most n, and terms of `w` whose variables are
/// replaced by critical q-terms of level at most n+1.
pub fn critical_terms(
    w: &Witness,
    ext: &ExternalVocabulary,
    max_level: usize,
    cap: usize,
) -> Result<CriticalTerms, SynthError> {
    let mut level: BTreeMap<Term, usize> = BTreeMap::new();
    for t in w.terms().iter().filter(|t| t.is_closed()) {
        level.insert(t.clone(), 0);
    }
    let open: Vec<(&Term, Vec<String>)> = w
        .terms()
        .iter()
        .filter(|t| !t.is_closed())
        .map(|t| (t, t.vars().into_iter().collect()))
        .collect();
    let explosion = || SynthError::Explosion {
        what: "critical terms",
        cap,
    };
    for n in 0..max_level {
        let below: Vec<Term> = level.keys().cloned().collect();
        let mut fresh: Vec<Term> = Vec::new();
        for (id, _) in ext.iter() {
            for args in tuples(&below, id.arity, cap).ok_or_else(explosion)? {
                fresh.push(Term::App(id.name.clone(), args));
            }
        }
        for t in fresh {
            level.entry(t).or_insert(n + 1);
            if level.len() > cap {
                return Err(explosion());
            }
        }
        let qs: Vec<Term> = level
            .keys()
            .filter(|t| is_q(t, ext))
            .cloned()
            .collect();
        for (t, vars) in &open {
            for choice in tuples(&qs, vars.len(), cap).ok_or_else(explosion)? {
                let s = t.substitute(&|v| vars.iter().position(|x| x == v).map(|i| choice[i].clone()));
                level.entry(s).or_insert(n + 1);
                if level.len() > cap {
                    return Err(explosion());
                }
            }
        }
    }
    let mut terms: Vec<CriticalTerm> = level
        .into_iter()
        .map(|(term, level)| CriticalTerm {
            is_q: is_q(&term, ext),
            term,
            level,
        })
        .collect();
    terms.sort_by(|a, b| {
        (a.level, a.term.size(), printer::term(&a.term)).cmp(&(b.level, b.term.size(), printer::term(&b.term)))
    });
    Ok(CriticalTerms { max_level, terms })
}

fn is_q(t: &Term, ext: &ExternalVocabulary) -> bool {
    match t {
        Term::App(f, args) => ext.contains(&crate::model::SymbolId::new(f.as_str(), args.len())),
        Term::Var(_) => false,
    }
}

/// All `k`-tuples over `pool`, or `None` past `cap`.
fn tuples(pool: &[Term], k: usize, cap: usize) -> Option<Vec<Vec<Term>>> {
    if (pool.len() as f64).powi(k as i32) > cap as f64 {
        return None;
    }
    let mut out: Vec<Vec<Term>> = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                pool.iter().map(move |t| {
                    let mut p = prefix.clone();
                    p.push(t.clone());
                    p
                })
            })
            .collect();
    }
    Some(out)
}
