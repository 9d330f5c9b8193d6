use std::collections::BTreeSet;

use serde::{Serialize, Serializer};

use super::critical::CriticalTerms;
use super::oracle::{oracle_issued, AlgorithmOracle, Behavior};
use super::{history_text, SynthError};
use crate::engine::ReplyUniverse;
use crate::eval::Evaluator;
use crate::model::{Elem, ExternalVocabulary, History, Query, Round, Structure};
use crate::syntax::{printer, Guard, Term};

/// A probe index and a history.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Pair {
    pub state: usize,
    pub history: History,
}

/// One conjunct of a description.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Conjunct {
    Equal(Term, Term),
    NotEqual(Term, Term),
    /// `(u ⪯ v)`.
    Preceq(Term, Term),
    /// `(u ≺ v)`, that is `¬(v ⪯ u)`.
    Prec(Term, Term),
}

impl Conjunct {
    fn kind(&self) -> u8 {
        match self {
            Conjunct::Equal(..) => 0,
            Conjunct::NotEqual(..) => 1,
            Conjunct::Preceq(..) => 2,
            Conjunct::Prec(..) => 3,
        }
    }

    pub fn guard(&self) -> Guard {
        match self {
            Conjunct::Equal(s, t) => Guard::Bool(Term::equal(s.clone(), t.clone())),
            Conjunct::NotEqual(s, t) => Guard::not(Guard::Bool(Term::equal(s.clone(), t.clone()))),
            Conjunct::Preceq(u, v) => Guard::Timing(u.clone(), v.clone()),
            Conjunct::Prec(u, v) => Guard::not(Guard::Timing(v.clone(), u.clone())),
        }
    }

    fn is_timing(&self) -> bool {
        self.kind() >= 2
    }
}

/// The Kleene conjunction describing an attainable pair, conjuncts sorted
/// by kind and printed form.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Description {
    pub depth: usize,
    pub conjuncts: Vec<Conjunct>,
}

impl Description {
    fn new(depth: usize, mut conjuncts: Vec<Conjunct>) -> Self {
        let mut keyed: Vec<((u8, String), Conjunct)> = conjuncts
            .drain(..)
            .map(|c| ((c.kind(), printer::guard(&c.guard())), c))
            .collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        keyed.dedup_by(|a, b| a.0 == b.0);
        Description {
            depth,
            conjuncts: keyed.into_iter().map(|(_, c)| c).collect(),
        }
    }

    pub fn guard(&self) -> Guard {
        Guard::conjunction(self.conjuncts.iter().map(Conjunct::guard))
            .unwrap_or_else(|| Guard::Bool(Term::constant("true")))
    }

    pub fn printed(&self) -> String {
        printer::guard(&self.guard())
    }

    pub fn timing_conjuncts(&self) -> usize {
        self.conjuncts.iter().filter(|c| c.is_timing()).count()
    }
}

impl Serialize for Description {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct D<'a> {
            depth: usize,
            conjuncts: usize,
            guard: &'a str,
        }
        D {
            depth: self.depth,
            conjuncts: self.conjuncts.len(),
            guard: &self.printed(),
        }
        .serialize(s)
    }
}

/// `δ(X, ξ)`, given `Issued_X(ξ−)` for nonempty `ξ`.
pub(crate) fn describe_with(
    x: &Structure,
    h: &History,
    ext: &ExternalVocabulary,
    crit: &CriticalTerms,
    issued_before: &BTreeSet<Query>,
) -> Result<Description, SynthError> {
    let n = h.len();
    let ev = Evaluator::new(x, h, ext);
    let terms: Vec<&Term> = crit.upto(n).map(|c| &c.term).collect();
    let mut values: Vec<Option<Elem>> = Vec::with_capacity(terms.len());
    for t in &terms {
        values.push(ev.term(t)?.value);
    }
    let mut conjuncts = Vec::new();
    for i in 0..terms.len() {
        let Some(a) = &values[i] else { continue };
        for j in i..terms.len() {
            let Some(b) = &values[j] else { continue };
            let (s, t) = (terms[i].clone(), terms[j].clone());
            conjuncts.push(if a == b {
                Conjunct::Equal(s, t)
            } else {
                Conjunct::NotEqual(s, t)
            });
        }
    }
    if n > 0 {
        let qs: Vec<&Term> = crit.q_upto(n).map(|c| &c.term).collect();
        for v in &qs {
            let issued = ev.term(v)?.qvalue.is_some_and(|q| issued_before.contains(&q));
            if !issued {
                continue;
            }
            for u in &qs {
                for c in [
                    Conjunct::Preceq((*u).clone(), (*v).clone()),
                    Conjunct::Prec((*u).clone(), (*v).clone()),
                ] {
                    if ev.guard(&c.guard())?.truth == Some(true) {
                        conjuncts.push(c);
                    }
                }
            }
        }
    }
    Ok(Description::new(n, conjuncts))
}

/// `δ(X, ξ)` for probe `state`; the pair must be attainable.
pub fn describe(
    oracle: &dyn AlgorithmOracle,
    ext: &ExternalVocabulary,
    crit: &CriticalTerms,
    state: usize,
    h: &History,
) -> Result<Description, SynthError> {
    let x = oracle.probes().get(state).ok_or_else(|| SynthError::NotAttainable {
        state,
        history: history_text(h),
    })?;
    let mut seen = BTreeSet::new();
    for (j, round) in h.rounds().iter().enumerate() {
        let prefix = h.prefix(j)?;
        let b = oracle.behavior(x, &prefix)?;
        seen.extend(b.causes);
        if b.is_final || !round.keys().all(|q| seen.contains(q)) {
            return Err(SynthError::NotAttainable {
                state,
                history: history_text(h),
            });
        }
    }
    let before = match h.truncation() {
        Some(prev) => oracle_issued(oracle, x, &prev)?,
        None => BTreeSet::new(),
    };
    describe_with(x, h, ext, crit, &before)
}

/// An attainable pair with what the oracle does there.
#[derive(Clone, Debug)]
pub(crate) struct Visited {
    pub pair: Pair,
    pub behavior: Behavior,
    /// Index of the pair for the truncated history.
    pub parent: Option<usize>,
    /// `Issued_X(ξ−)`; empty for the empty history.
    pub issued_before: BTreeSet<Query>,
    pub issued: BTreeSet<Query>,
}

const MAX_PENDING: usize = 12;

/// Every nonempty round over `pending` with replies from `universe`.
pub(crate) fn all_rounds(pending: &[Query], universe: &ReplyUniverse, x: &Structure) -> Vec<Round> {
    let mut out = Vec::new();
    for mask in 1u32..(1 << pending.len()) {
        let mut rounds = vec![Round::new()];
        for (i, q) in pending.iter().enumerate() {
            if mask >> i & 1 == 0 {
                continue;
            }
            let replies: Vec<Elem> = universe
                .replies_for(q, x)
                .into_iter()
                .filter(|a| x.contains(a))
                .collect();
            rounds = rounds
                .into_iter()
                .flat_map(|r| {
                    replies.iter().map(move |a| {
                        let mut r = r.clone();
                        r.insert(q.clone(), a.clone());
                        r
                    })
                })
                .collect();
        }
        out.extend(rounds);
    }
    out
}

fn check_behavior(
    oracle: &dyn AlgorithmOracle,
    state: usize,
    h: &History,
    b: &Behavior,
) -> Result<(), SynthError> {
    let bad = |detail: String| SynthError::BadOracle {
        state,
        history: history_text(h),
        detail,
    };
    if let Some(q) = b.causes.iter().find(|q| h.contains(q)) {
        return Err(bad(format!("causes the answered query {q}")));
    }
    if let Some(q) = b.causes.iter().find(|q| q.len() > oracle.bound()) {
        return Err(bad(format!("query {q} is longer than the bound {}", oracle.bound())));
    }
    Ok(())
}

/// Breadth-first walk over attainable pairs of at most `max_len` rounds.
pub(crate) fn explore(
    oracle: &dyn AlgorithmOracle,
    max_len: usize,
    cap: usize,
) -> Result<Vec<Visited>, SynthError> {
    let mut out: Vec<Visited> = Vec::new();
    for (i, x) in oracle.probes().iter().enumerate() {
        let h = History::empty();
        let b = oracle.behavior(x, &h)?;
        check_behavior(oracle, i, &h, &b)?;
        out.push(Visited {
            pair: Pair { state: i, history: h },
            issued: b.causes.clone(),
            behavior: b,
            parent: None,
            issued_before: BTreeSet::new(),
        });
    }
    let mut k = 0;
    while k < out.len() {
        let v = out[k].clone();
        k += 1;
        if v.behavior.is_final || v.pair.history.len() >= max_len {
            continue;
        }
        let x = &oracle.probes()[v.pair.state];
        let pending: Vec<Query> = v
            .issued
            .iter()
            .filter(|q| !v.pair.history.contains(q))
            .cloned()
            .collect();
        if pending.len() > MAX_PENDING {
            return Err(SynthError::Explosion {
                what: "pending queries",
                cap: MAX_PENDING,
            });
        }
        for round in all_rounds(&pending, oracle.reply_universe(), x) {
            let h = v.pair.history.extend(round)?;
            let b = oracle.behavior(x, &h)?;
            check_behavior(oracle, v.pair.state, &h, &b)?;
            let mut issued = v.issued.clone();
            issued.extend(b.causes.iter().cloned());
            out.push(Visited {
                pair: Pair {
                    state: v.pair.state,
                    history: h,
                },
                behavior: b,
                parent: Some(k - 1),
                issued_before: v.issued.clone(),
                issued,
            });
            if out.len() > cap {
                return Err(SynthError::Explosion {
                    what: "attainable pairs",
                    cap,
                });
            }
        }
    }
    Ok(out)
}

/// Attainable pairs reached from the empty history of each probe, extending
/// non-final pairs by every nonempty round of pending queries.
pub fn enumerate_attainable(
    oracle: &dyn AlgorithmOracle,
    max_len: usize,
    cap: usize,
) -> Result<Vec<Pair>, SynthError> {
    Ok(explore(oracle, max_len, cap)?.into_iter().map(|v| v.pair).collect())
}
