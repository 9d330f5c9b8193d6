//! Step dynamics: issued and pending queries, coherence, and the loop that
//! grows a history round by round until the step is final.

mod env;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use env::{
    entries_to_round, round_to_entries, ChannelEnv, Environment, RandomEnv, ReplyEntry,
    ReplyUniverse, ScriptedEnv, StepView,
};

use crate::eval::{EvalError, Evaluator, Mutant, RuleOutcome, Verdict};
use crate::model::{
    apply_updates, ExternalVocabulary, History, ModelError, Query, Round, Structure, UpdateSet,
};
use crate::syntax::{Program, Rule};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("environment replied to {0}, which is not pending")]
    NotPending(Query),
    #[error("environment returned an empty round")]
    EmptyRound,
    #[error("the step is already final")]
    AlreadyFinal,
}

/// `Issued^R_X(ξ)`: queries caused by some initial segment of `ξ`.
pub fn issued(
    x: &Structure,
    h: &History,
    ext: &ExternalVocabulary,
    r: &Rule,
) -> Result<BTreeSet<Query>, EvalError> {
    issued_with(x, h, ext, r, None)
}

pub fn issued_with(
    x: &Structure,
    h: &History,
    ext: &ExternalVocabulary,
    r: &Rule,
    mutant: Option<Mutant>,
) -> Result<BTreeSet<Query>, EvalError> {
    let ev = Evaluator::new(x, h, ext).with_mutant(mutant);
    let mut out = BTreeSet::new();
    for m in 0..=h.len() {
        out.extend(ev.rule_at(r, m)?.caused);
    }
    Ok(out)
}

/// Issued queries not yet answered.
pub fn pending(
    x: &Structure,
    h: &History,
    ext: &ExternalVocabulary,
    r: &Rule,
) -> Result<BTreeSet<Query>, EvalError> {
    let mut out = issued(x, h, ext, r)?;
    out.retain(|q| !h.contains(q));
    Ok(out)
}

/// Every query answered in round `j` was issued by `ξ↾(j-1)`.
pub fn is_coherent(
    x: &Structure,
    h: &History,
    ext: &ExternalVocabulary,
    r: &Rule,
) -> Result<bool, EvalError> {
    let ev = Evaluator::new(x, h, ext);
    let mut seen = BTreeSet::new();
    for (j, round) in h.rounds().iter().enumerate() {
        seen.extend(ev.rule_at(r, j)?.caused);
        if !round.keys().all(|q| seen.contains(q)) {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn is_complete(
    x: &Structure,
    h: &History,
    ext: &ExternalVocabulary,
    r: &Rule,
) -> Result<bool, EvalError> {
    Ok(pending(x, h, ext, r)?.is_empty())
}

/// Coherent, and no proper initial segment is final.
pub fn is_attainable(
    x: &Structure,
    h: &History,
    ext: &ExternalVocabulary,
    r: &Rule,
) -> Result<bool, EvalError> {
    let ev = Evaluator::new(x, h, ext);
    for m in 0..h.len() {
        if ev.rule_at(r, m)?.is_final {
            return Ok(false);
        }
    }
    is_coherent(x, h, ext, r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepVerdict {
    Success,
    Fail,
    Stalled,
}

/// The machine's view after each round.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceEntry {
    pub pending: BTreeSet<Query>,
    /// The round appended next; absent for the last entry.
    pub round: Option<Vec<ReplyEntry>>,
    #[serde(rename = "final")]
    pub is_final: bool,
    pub verdict: Verdict,
    pub updates: UpdateSet,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StepResult {
    pub final_history: History,
    pub verdict: StepVerdict,
    pub updates: UpdateSet,
    pub next_state: Option<Structure>,
    pub trace: Vec<TraceEntry>,
}

/// One step, advanced a round at a time by the caller.
#[derive(Clone, Debug)]
pub struct StepMachine<'p> {
    program: &'p Program,
    state: Structure,
    history: History,
    issued: BTreeSet<Query>,
    outcome: RuleOutcome,
    trace: Vec<TraceEntry>,
}

impl<'p> StepMachine<'p> {
    pub fn new(program: &'p Program, state: &Structure) -> Result<Self, EngineError> {
        let state = state.conform(&program.vocab)?;
        let history = History::empty();
        let outcome = Evaluator::new(&state, &history, &program.external).rule(&program.rule)?;
        let mut m = StepMachine {
            program,
            state,
            history,
            issued: outcome.caused.clone(),
            outcome,
            trace: Vec::new(),
        };
        m.snapshot();
        Ok(m)
    }

    fn snapshot(&mut self) {
        let entry = TraceEntry {
            pending: self.pending(),
            round: None,
            is_final: self.outcome.is_final,
            verdict: self.outcome.verdict,
            updates: self.outcome.updates.clone(),
        };
        self.trace.push(entry);
    }

    pub fn state(&self) -> &Structure {
        &self.state
    }

    pub fn history(&self) -> &History {
        &self.history
    }

    pub fn outcome(&self) -> &RuleOutcome {
        &self.outcome
    }

    pub fn is_final(&self) -> bool {
        self.outcome.is_final
    }

    pub fn issued(&self) -> &BTreeSet<Query> {
        &self.issued
    }

    pub fn pending(&self) -> BTreeSet<Query> {
        self.issued
            .iter()
            .filter(|q| !self.history.contains(q))
            .cloned()
            .collect()
    }

    /// Append one round of simultaneous replies and re-evaluate.
    pub fn submit(&mut self, round: Round) -> Result<&RuleOutcome, EngineError> {
        if self.outcome.is_final {
            return Err(EngineError::AlreadyFinal);
        }
        if round.is_empty() {
            return Err(EngineError::EmptyRound);
        }
        let pending = self.pending();
        if let Some(q) = round.keys().find(|q| !pending.contains(q)) {
            return Err(EngineError::NotPending(q.clone()));
        }
        for a in round.values() {
            if !self.state.contains(a) {
                return Err(ModelError::ForeignElement(a.clone()).into());
            }
        }
        if let Some(last) = self.trace.last_mut() {
            last.round = Some(round_to_entries(&round));
        }
        self.history = self.history.extend(round)?;
        self.outcome = Evaluator::new(&self.state, &self.history, &self.program.external)
            .rule(&self.program.rule)?;
        self.issued.extend(self.outcome.caused.iter().cloned());
        self.snapshot();
        Ok(&self.outcome)
    }

    /// Close the step. A step that is not final is reported as stalled.
    pub fn finish(self) -> Result<StepResult, EngineError> {
        let verdict = match (self.outcome.is_final, self.outcome.verdict) {
            (true, Verdict::Success) => StepVerdict::Success,
            (true, _) => StepVerdict::Fail,
            (false, _) => StepVerdict::Stalled,
        };
        let next_state = match verdict {
            StepVerdict::Success => Some(apply_updates(&self.state, &self.outcome.updates)?),
            _ => None,
        };
        Ok(StepResult {
            final_history: self.history,
            verdict,
            updates: self.outcome.updates,
            next_state,
            trace: self.trace,
        })
    }
}

/// Run one step from the empty history, asking `env` for rounds until the
/// rule is final or the environment stops.
pub fn step(
    x: &Structure,
    program: &Program,
    env: &mut dyn Environment,
    step_index: usize,
) -> Result<StepResult, EngineError> {
    let mut m = StepMachine::new(program, x)?;
    while !m.is_final() {
        let pending = m.pending();
        let view = StepView {
            state: m.state(),
            history: m.history(),
            step_index,
        };
        match env.next_round(&pending, &view) {
            Some(round) => {
                m.submit(round)?;
            }
            None => break,
        }
    }
    m.finish()
}

/// Successive steps, threading the next state, until a step fails or
/// stalls or `max_steps` is reached.
pub fn run(
    program: &Program,
    x0: &Structure,
    env: &mut dyn Environment,
    max_steps: usize,
) -> Result<Vec<StepResult>, EngineError> {
    let mut out = Vec::new();
    let mut x = x0.clone();
    for i in 0..max_steps.max(1) {
        let r = step(&x, program, env, i)?;
        let next = r.next_state.clone();
        out.push(r);
        match next {
            Some(y) => x = y,
            None => break,
        }
    }
    Ok(out)
}
