//! Values of terms, truth of guards and outcomes of rules for a fixed state
//! and history.
//!
//! Evaluation against an initial segment `ξ↾k` is expressed by a horizon:
//! only answers in the first `k` rounds are visible. One [`Evaluator`] can
//! therefore serve every initial segment of its history, and results are
//! memoized per (node, horizon).

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    Elem, ExternalVocabulary, History, ModelError, Query, Structure, SymbolId, Update, UpdateSet,
};
use crate::syntax::{Guard, Program, Rule, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unknown symbol {0}")]
    UnknownSymbol(String),
    #[error("{symbol} expects {expected} arguments, got {got}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        got: usize,
    },
    #[error("unbound variable `{0}` during evaluation")]
    UnboundVariable(String),
    #[error(transparent)]
    Model(ModelError),
}

impl From<ModelError> for EvalError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::UnknownSymbol(s) => EvalError::UnknownSymbol(s),
            ModelError::ArityMismatch {
                symbol,
                expected,
                got,
            } => EvalError::ArityMismatch {
                symbol,
                expected,
                got,
            },
            other => EvalError::Model(other),
        }
    }
}

/// Deliberate semantic defects, used to confirm that the property harness
/// notices when the evaluator is wrong. Never enabled outside tests.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mutant {
    /// An application with an unvalued argument reports no queries.
    DropArgQueries,
    /// `issue` reports its query even when it is already answered.
    IssueIgnoresAnswered,
    /// A timing guard with neither side valued is false instead of undefined.
    TimingUnvaluedFalse,
    /// A parallel block succeeds even if its update set clashes.
    ClashIgnored,
    /// `Equal` compares element names by order instead of identity.
    OrderedEqual,
    /// A parallel block takes its verdict from its first component.
    ParFirstWins,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TermResult {
    pub value: Option<Elem>,
    pub qvalue: Option<Query>,
    pub caused: BTreeSet<Query>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GuardResult {
    pub truth: Option<bool>,
    pub caused: BTreeSet<Query>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Success,
    Fail,
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RuleOutcome {
    pub caused: BTreeSet<Query>,
    #[serde(rename = "final")]
    pub is_final: bool,
    pub verdict: Verdict,
    pub updates: UpdateSet,
    pub clash: bool,
}

impl RuleOutcome {
    fn undecided(caused: BTreeSet<Query>) -> Self {
        RuleOutcome {
            caused,
            is_final: false,
            verdict: Verdict::Undecided,
            updates: UpdateSet::new(),
            clash: false,
        }
    }

    fn decided(verdict: Verdict, caused: BTreeSet<Query>, updates: UpdateSet) -> Self {
        RuleOutcome {
            caused,
            is_final: true,
            verdict,
            updates,
            clash: false,
        }
    }

    pub fn succeeds(&self) -> bool {
        self.verdict == Verdict::Success
    }

    pub fn fails(&self) -> bool {
        self.verdict == Verdict::Fail
    }
}

/// Evaluation context for one state and one history.
pub struct Evaluator<'a> {
    x: &'a Structure,
    h: &'a History,
    ext: &'a ExternalVocabulary,
    mutant: Option<Mutant>,
    memo: RefCell<HashMap<usize, HashMap<Term, TermResult>>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(x: &'a Structure, h: &'a History, ext: &'a ExternalVocabulary) -> Self {
        Evaluator {
            x,
            h,
            ext,
            mutant: None,
            memo: RefCell::new(HashMap::new()),
        }
    }

    pub fn with_mutant(mut self, mutant: Option<Mutant>) -> Self {
        self.mutant = mutant;
        self
    }

    pub fn history(&self) -> &History {
        self.h
    }

    fn is(&self, m: Mutant) -> bool {
        self.mutant == Some(m)
    }

    /// `⟦t⟧` under the full history.
    pub fn term(&self, t: &Term) -> Result<TermResult, EvalError> {
        self.term_at(t, self.h.len())
    }

    /// `⟦t⟧` under `ξ↾horizon`.
    pub fn term_at(&self, t: &Term, horizon: usize) -> Result<TermResult, EvalError> {
        if let Some(r) = self.memo.borrow().get(&horizon).and_then(|m| m.get(t)) {
            return Ok(r.clone());
        }
        let r = self.term_uncached(t, horizon)?;
        self.memo
            .borrow_mut()
            .entry(horizon)
            .or_default()
            .insert(t.clone(), r.clone());
        Ok(r)
    }

    fn term_uncached(&self, t: &Term, horizon: usize) -> Result<TermResult, EvalError> {
        let (f, args) = match t {
            Term::Var(v) => return Err(EvalError::UnboundVariable(v.clone())),
            Term::App(f, args) => (f, args),
        };
        let mut values = Vec::with_capacity(args.len());
        let mut caused = BTreeSet::new();
        let mut complete = true;
        for a in args {
            let r = self.term_at(a, horizon)?;
            match r.value {
                Some(v) => values.push(v),
                None => {
                    complete = false;
                    caused.extend(r.caused);
                }
            }
        }
        let id = SymbolId::new(f.as_str(), args.len());
        let external = self.ext.template(&id);
        if !complete {
            if self.is(Mutant::DropArgQueries) {
                caused.clear();
            }
            if external.is_none() && self.x.symbol_info(&id).is_none() {
                return Err(EvalError::UnknownSymbol(id.to_string()));
            }
            return Ok(TermResult {
                value: None,
                qvalue: None,
                caused,
            });
        }
        match external {
            Some(template) => {
                let q = template.instantiate(&values)?;
                match self.h.answer_within(&q, horizon) {
                    Some(a) => Ok(TermResult {
                        value: Some(a.clone()),
                        qvalue: Some(q),
                        caused: BTreeSet::new(),
                    }),
                    None => Ok(TermResult {
                        value: None,
                        qvalue: Some(q.clone()),
                        caused: BTreeSet::from([q]),
                    }),
                }
            }
            None => {
                let value = if self.is(Mutant::OrderedEqual) && f == "Equal" && values.len() == 2 {
                    self.x.boolean(values[0] <= values[1]).clone()
                } else {
                    self.x.lookup(f, &values)?
                };
                Ok(TermResult {
                    value: Some(value),
                    qvalue: None,
                    caused: BTreeSet::new(),
                })
            }
        }
    }

    /// Least horizon at which `t` has a value, if it has one at `horizon`.
    fn settle(&self, t: &Term, horizon: usize) -> Result<Option<usize>, EvalError> {
        if self.term_at(t, horizon)?.value.is_none() {
            return Ok(None);
        }
        for k in 0..horizon {
            if self.term_at(t, k)?.value.is_some() {
                return Ok(Some(k));
            }
        }
        Ok(Some(horizon))
    }

    pub fn guard(&self, g: &Guard) -> Result<GuardResult, EvalError> {
        self.guard_at(g, self.h.len())
    }

    pub fn guard_at(&self, g: &Guard, horizon: usize) -> Result<GuardResult, EvalError> {
        let known = |b: bool| GuardResult {
            truth: Some(b),
            caused: BTreeSet::new(),
        };
        Ok(match g {
            Guard::Bool(t) => {
                let r = self.term_at(t, horizon)?;
                GuardResult {
                    truth: r.value.map(|v| v == *self.x.true_elem()),
                    caused: r.caused,
                }
            }
            Guard::Timing(s, t) => match (self.settle(s, horizon)?, self.settle(t, horizon)?) {
                (Some(ms), Some(mt)) => known(ms <= mt),
                (Some(_), None) => known(true),
                (None, Some(_)) => known(false),
                (None, None) => {
                    if self.is(Mutant::TimingUnvaluedFalse) {
                        known(false)
                    } else {
                        let mut caused = self.term_at(s, horizon)?.caused;
                        caused.extend(self.term_at(t, horizon)?.caused);
                        GuardResult {
                            truth: None,
                            caused,
                        }
                    }
                }
            },
            Guard::KAnd(a, b) => {
                let (ra, rb) = (self.guard_at(a, horizon)?, self.guard_at(b, horizon)?);
                match (ra.truth, rb.truth) {
                    (Some(false), _) | (_, Some(false)) => known(false),
                    (Some(true), Some(true)) => known(true),
                    _ => merge_undefined(ra, rb),
                }
            }
            Guard::KOr(a, b) => {
                let (ra, rb) = (self.guard_at(a, horizon)?, self.guard_at(b, horizon)?);
                match (ra.truth, rb.truth) {
                    (Some(true), _) | (_, Some(true)) => known(true),
                    (Some(false), Some(false)) => known(false),
                    _ => merge_undefined(ra, rb),
                }
            }
            Guard::KNot(a) => {
                let r = self.guard_at(a, horizon)?;
                GuardResult {
                    truth: r.truth.map(|b| !b),
                    caused: r.caused,
                }
            }
        })
    }

    pub fn rule(&self, r: &Rule) -> Result<RuleOutcome, EvalError> {
        self.rule_at(r, self.h.len())
    }

    pub fn rule_at(&self, r: &Rule, horizon: usize) -> Result<RuleOutcome, EvalError> {
        match r {
            Rule::Update {
                symbol,
                args,
                value,
            } => {
                let mut vals = Vec::with_capacity(args.len());
                let mut caused = BTreeSet::new();
                for t in args.iter().chain(std::iter::once(value)) {
                    let res = self.term_at(t, horizon)?;
                    match res.value {
                        Some(v) => vals.push(v),
                        None => caused.extend(res.caused),
                    }
                }
                if vals.len() < args.len() + 1 {
                    return Ok(RuleOutcome::undecided(caused));
                }
                let a0 = vals.pop().expect("value present");
                let u = Update {
                    symbol: SymbolId::new(symbol.as_str(), args.len()),
                    args: vals,
                    value: a0,
                };
                Ok(RuleOutcome::decided(
                    Verdict::Success,
                    BTreeSet::new(),
                    UpdateSet::single(u),
                ))
            }
            Rule::Issue { symbol, args } => {
                let id = SymbolId::new(symbol.as_str(), args.len());
                let template = self
                    .ext
                    .template(&id)
                    .ok_or_else(|| EvalError::UnknownSymbol(format!("external {id}")))?;
                let mut vals = Vec::with_capacity(args.len());
                let mut caused = BTreeSet::new();
                for t in args {
                    let res = self.term_at(t, horizon)?;
                    match res.value {
                        Some(v) => vals.push(v),
                        None => caused.extend(res.caused),
                    }
                }
                if vals.len() < args.len() {
                    return Ok(RuleOutcome::undecided(caused));
                }
                let q = template.instantiate(&vals)?;
                let answered = self.h.answer_within(&q, horizon).is_some();
                if !answered || self.is(Mutant::IssueIgnoresAnswered) {
                    caused.insert(q);
                }
                Ok(RuleOutcome::decided(Verdict::Success, caused, UpdateSet::new()))
            }
            Rule::Fail => Ok(RuleOutcome::decided(
                Verdict::Fail,
                BTreeSet::new(),
                UpdateSet::new(),
            )),
            Rule::Cond(g, a, b) => {
                let res = self.guard_at(g, horizon)?;
                match res.truth {
                    Some(true) => self.rule_at(a, horizon),
                    Some(false) => self.rule_at(b, horizon),
                    None => Ok(RuleOutcome::undecided(res.caused)),
                }
            }
            Rule::Par(rs) => {
                let mut caused = BTreeSet::new();
                let mut updates = UpdateSet::new();
                let (mut all_final, mut all_succeed, mut some_fail) = (true, true, false);
                let mut first = None;
                for c in rs {
                    let o = self.rule_at(c, horizon)?;
                    caused.extend(o.caused);
                    updates.extend(&o.updates);
                    all_final &= o.is_final;
                    all_succeed &= o.verdict == Verdict::Success;
                    some_fail |= o.verdict == Verdict::Fail;
                    first.get_or_insert(o.verdict);
                }
                let clash = updates.has_clash();
                let verdict = if self.is(Mutant::ParFirstWins) && all_final {
                    first.unwrap_or(Verdict::Success)
                } else if all_succeed && (!clash || self.is(Mutant::ClashIgnored)) {
                    Verdict::Success
                } else if all_final && (some_fail || clash) {
                    Verdict::Fail
                } else {
                    Verdict::Undecided
                };
                Ok(RuleOutcome {
                    caused,
                    is_final: all_final,
                    verdict,
                    updates,
                    clash,
                })
            }
        }
    }
}

fn merge_undefined(a: GuardResult, b: GuardResult) -> GuardResult {
    let mut caused = BTreeSet::new();
    if a.truth.is_none() {
        caused.extend(a.caused);
    }
    if b.truth.is_none() {
        caused.extend(b.caused);
    }
    GuardResult {
        truth: None,
        caused,
    }
}

pub fn eval_term(
    x: &Structure,
    h: &History,
    ext: &ExternalVocabulary,
    t: &Term,
) -> Result<TermResult, EvalError> {
    Evaluator::new(x, h, ext).term(t)
}

pub fn eval_guard(
    x: &Structure,
    h: &History,
    ext: &ExternalVocabulary,
    g: &Guard,
) -> Result<GuardResult, EvalError> {
    Evaluator::new(x, h, ext).guard(g)
}

pub fn eval_rule(
    x: &Structure,
    h: &History,
    ext: &ExternalVocabulary,
    r: &Rule,
) -> Result<RuleOutcome, EvalError> {
    Evaluator::new(x, h, ext).rule(r)
}

impl Program {
    /// Outcome of this program's rule in state `x` under history `h`.
    pub fn eval(&self, x: &Structure, h: &History) -> Result<RuleOutcome, EvalError> {
        eval_rule(x, h, &self.external, &self.rule)
    }
}
