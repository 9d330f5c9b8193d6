use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use serde_json::{json, Value};

use super::describe::{all_rounds, explore, Pair};
use super::oracle::{AlgorithmOracle, Behavior};
use super::{history_text, SynthError};
use crate::eval::Verdict;
use crate::model::{apply_iso, Bijection, Elem, History, Query};
use crate::syntax::Program;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum ViolationKind {
    IssuedMismatch,
    FinalityMismatch,
    VerdictMismatch,
    UpdateMismatch,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    #[serde(flatten)]
    pub pair: Pair,
    pub expected: Value,
    pub got: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub pairs: usize,
    pub violations: Vec<Violation>,
}

impl EquivalenceReport {
    pub fn is_equivalent(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }
}

struct Node {
    pair: Pair,
    oracle_issued: BTreeSet<Query>,
    program_issued: BTreeSet<Query>,
}

fn compare(pair: &Pair, a: &Behavior, b: &Behavior, ai: &BTreeSet<Query>, bi: &BTreeSet<Query>, out: &mut Vec<Violation>) {
    let mut report = |kind, expected: Value, got: Value| {
        out.push(Violation {
            kind,
            pair: pair.clone(),
            expected,
            got,
        })
    };
    if ai != bi {
        report(ViolationKind::IssuedMismatch, json!(ai), json!(bi));
    }
    if a.is_final != b.is_final {
        report(ViolationKind::FinalityMismatch, json!(a.is_final), json!(b.is_final));
        return;
    }
    if !a.is_final {
        return;
    }
    if a.verdict != b.verdict {
        report(ViolationKind::VerdictMismatch, json!(a.verdict), json!(b.verdict));
        return;
    }
    if a.verdict == Verdict::Success && a.updates != b.updates {
        report(ViolationKind::UpdateMismatch, json!(a.updates), json!(b.updates));
    }
}

/// Compare `oracle` and `program` on every pair attainable for both, of at
/// most the oracle's bound in length: issued sets, finality and verdict, and
/// updates on success.
pub fn check_equivalence(
    oracle: &dyn AlgorithmOracle,
    program: &Program,
    cap: usize,
) -> Result<EquivalenceReport, SynthError> {
    let max_len = oracle.bound();
    let mut violations = Vec::new();
    let mut queue: Vec<Node> = (0..oracle.probes().len())
        .map(|state| Node {
            pair: Pair {
                state,
                history: History::empty(),
            },
            oracle_issued: BTreeSet::new(),
            program_issued: BTreeSet::new(),
        })
        .collect();
    let mut k = 0;
    while k < queue.len() {
        let pair = queue[k].pair.clone();
        let x = &oracle.probes()[pair.state];
        let a = oracle.behavior(x, &pair.history)?;
        let out = program.eval(x, &pair.history)?;
        let b = Behavior {
            causes: out.caused,
            is_final: out.is_final,
            verdict: out.verdict,
            updates: out.updates,
        };
        let mut ai = std::mem::take(&mut queue[k].oracle_issued);
        let mut bi = std::mem::take(&mut queue[k].program_issued);
        ai.extend(a.causes.iter().cloned());
        bi.extend(b.causes.iter().cloned());
        k += 1;
        compare(&pair, &a, &b, &ai, &bi, &mut violations);
        if a.is_final || b.is_final || pair.history.len() >= max_len {
            continue;
        }
        let pending: Vec<Query> = ai
            .intersection(&bi)
            .filter(|q| !pair.history.contains(q))
            .cloned()
            .collect();
        for round in all_rounds(&pending, oracle.reply_universe(), x) {
            queue.push(Node {
                pair: Pair {
                    state: pair.state,
                    history: pair.history.extend(round)?,
                },
                oracle_issued: ai.clone(),
                program_issued: bi.clone(),
            });
        }
        if queue.len() > cap {
            return Err(SynthError::Explosion {
                what: "jointly attainable pairs",
                cap,
            });
        }
    }
    Ok(EquivalenceReport {
        pairs: queue.len(),
        violations,
    })
}

/// Check that renaming the elements of a probe renames the behavior along
/// with it, on every attainable pair. Oracles that cannot answer for the
/// renamed probe are skipped. Returns the number of pairs checked.
pub fn check_equivariance(oracle: &dyn AlgorithmOracle, cap: usize) -> Result<usize, SynthError> {
    let mut checked = 0;
    for v in explore(oracle, oracle.bound(), cap)? {
        let x = &oracle.probes()[v.pair.state];
        let map: BTreeMap<Elem, Elem> = x
            .elements()
            .iter()
            .map(|e| (e.clone(), Elem::new(format!("{}'", e.as_str()))))
            .collect();
        let iso = Bijection::new(map)?;
        let y = apply_iso(x, &iso)?;
        let h = apply_iso(&v.pair.history, &iso)?;
        let got = match oracle.behavior(&y, &h) {
            Ok(b) => b,
            Err(SynthError::MissingBehavior { .. }) => continue,
            Err(e) => return Err(e),
        };
        let want = Behavior {
            causes: apply_iso(&v.behavior.causes, &iso)?,
            updates: apply_iso(&v.behavior.updates, &iso)?,
            ..v.behavior.clone()
        };
        if got != want {
            return Err(SynthError::BadOracle {
                state: v.pair.state,
                history: history_text(&v.pair.history),
                detail: "behavior is not preserved by renaming the elements".into(),
            });
        }
        checked += 1;
    }
    Ok(checked)
}
