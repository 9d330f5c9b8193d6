//! Randomized checks of the semantic lemmas over generated cases.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::agreement::{agree_on, agreeing_variant};
use super::generate::{arbitrary_history, coherent_history, random_program, random_structure};
use super::{bound_rule, witness_rule};
use crate::engine::issued_with;
use crate::eval::{EvalError, Evaluator, Mutant, RuleOutcome};
use crate::model::{apply_iso, Bijection, Elem, History, Structure};
use crate::syntax::{printer, Guard, Program, Rule, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    ValueIffNoQuery,
    NoRepeat,
    Monotonicity,
    NoClash,
    Isomorphism,
    ParPermutation,
    BoundedWork,
    WitnessAgreement,
}

impl Check {
    pub const ALL: [Check; 8] = [
        Check::ValueIffNoQuery,
        Check::NoRepeat,
        Check::Monotonicity,
        Check::NoClash,
        Check::Isomorphism,
        Check::ParPermutation,
        Check::BoundedWork,
        Check::WitnessAgreement,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::ValueIffNoQuery => "value-iff-no-query",
            Check::NoRepeat => "no-repeat",
            Check::Monotonicity => "monotonicity",
            Check::NoClash => "no-clash",
            Check::Isomorphism => "isomorphism",
            Check::ParPermutation => "par-permutation",
            Check::BoundedWork => "bounded-work",
            Check::WitnessAgreement => "witness-agreement",
        }
    }
}

/// The check designed to expose each seeded evaluator defect.
pub fn catching_check(m: Mutant) -> Check {
    match m {
        Mutant::DropArgQueries => Check::ValueIffNoQuery,
        Mutant::IssueIgnoresAnswered => Check::NoRepeat,
        Mutant::TimingUnvaluedFalse => Check::Monotonicity,
        Mutant::ClashIgnored => Check::NoClash,
        Mutant::OrderedEqual => Check::Isomorphism,
        Mutant::ParFirstWins => Check::ParPermutation,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarnessConfig {
    pub seed: u64,
    pub cases: usize,
    /// Replies used when growing histories; two random elements per case
    /// when empty.
    #[serde(default)]
    pub replies: Vec<Elem>,
    pub max_len: usize,
    /// Elements beside the logic elements in generated states.
    pub elements: usize,
    #[serde(skip)]
    pub mutant: Option<Mutant>,
    /// Checks to run; all of them when empty.
    #[serde(default)]
    pub checks: Vec<Check>,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            seed: 0,
            cases: 500,
            replies: Vec::new(),
            max_len: 3,
            elements: 3,
            mutant: None,
            checks: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Failure {
    pub seed: u64,
    pub shrunk_input: serde_json::Value,
    pub expected: String,
    pub got: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub check: Check,
    pub cases: usize,
    /// Cases where the property was not vacuous.
    pub nontrivial: usize,
    /// Number of failing cases; at most [`MAX_REPORTED`] are listed.
    pub failed: usize,
    pub failures: Vec<Failure>,
}

pub const MAX_REPORTED: usize = 5;

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Report {
    pub checks: Vec<CheckReport>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.failed == 0)
    }

    pub fn check(&self, c: Check) -> Option<&CheckReport> {
        self.checks.iter().find(|r| r.check == c)
    }

    /// Add another report's counts check by check.
    pub fn merge(&mut self, other: Report) {
        for o in other.checks {
            match self.checks.iter_mut().find(|c| c.check == o.check) {
                Some(c) => {
                    c.cases += o.cases;
                    c.nontrivial += o.nontrivial;
                    c.failed += o.failed;
                    let room = MAX_REPORTED.saturating_sub(c.failures.len());
                    c.failures.extend(o.failures.into_iter().take(room));
                }
                None => self.checks.push(o),
            }
        }
    }
}

/// A property violation: what the lemma demands and what was observed.
#[derive(Clone, Debug)]
struct Mismatch {
    expected: String,
    got: String,
}

fn mismatch(expected: impl std::fmt::Debug, got: impl std::fmt::Debug) -> Mismatch {
    Mismatch {
        expected: format!("{expected:?}"),
        got: format!("{got:?}"),
    }
}

impl From<EvalError> for Mismatch {
    fn from(e: EvalError) -> Self {
        Mismatch {
            expected: "evaluation succeeds".into(),
            got: e.to_string(),
        }
    }
}

impl From<crate::model::ModelError> for Mismatch {
    fn from(e: crate::model::ModelError) -> Self {
        EvalError::from(e).into()
    }
}

/// `Ok(true)` when the property held non-vacuously.
type Outcome = Result<bool, Mismatch>;

struct Case<'a> {
    program: &'a Program,
    mutant: Option<Mutant>,
    seed: u64,
}

fn all_terms(r: &Rule) -> BTreeSet<Term> {
    let mut out = BTreeSet::new();
    let mut add = |t: &Term| out.extend(t.subterms().into_iter().cloned());
    for_each_rule(r, &mut |r| match r {
        Rule::Update { symbol, args, value } => {
            for t in args.iter().chain([value]) {
                add(t);
            }
            let _ = symbol;
        }
        Rule::Issue { args, .. } => args.iter().for_each(&mut add),
        Rule::Cond(g, _, _) => g.terms().into_iter().for_each(&mut add),
        _ => {}
    });
    out
}

fn for_each_rule(r: &Rule, f: &mut dyn FnMut(&Rule)) {
    f(r);
    match r {
        Rule::Cond(_, a, b) => {
            for_each_rule(a, f);
            for_each_rule(b, f);
        }
        Rule::Par(rs) => rs.iter().for_each(|c| for_each_rule(c, f)),
        _ => {}
    }
}

fn all_rules(r: &Rule) -> Vec<Rule> {
    let mut out = Vec::new();
    for_each_rule(r, &mut |r| out.push(r.clone()));
    out
}

fn subguards(g: &Guard, out: &mut Vec<Guard>) {
    out.push(g.clone());
    match g {
        Guard::KAnd(a, b) | Guard::KOr(a, b) => {
            subguards(a, out);
            subguards(b, out);
        }
        Guard::KNot(a) => subguards(a, out),
        _ => {}
    }
}

fn all_guards(r: &Rule) -> Vec<Guard> {
    let mut out = Vec::new();
    for_each_rule(r, &mut |r| {
        if let Rule::Cond(g, _, _) = r {
            subguards(g, &mut out);
        }
    });
    out
}

impl Case<'_> {
    fn ev<'a>(&self, x: &'a Structure, h: &'a History) -> Evaluator<'a>
    where
        Self: 'a,
    {
        Evaluator::new(x, h, &self.program.external).with_mutant(self.mutant)
    }

    fn run(&self, check: Check, r: &Rule, x: &Structure, h: &History) -> Outcome {
        match check {
            Check::ValueIffNoQuery => self.value_iff_no_query(r, x, h),
            Check::NoRepeat => self.no_repeat(r, x, h),
            Check::Monotonicity => self.monotonicity(r, x, h),
            Check::NoClash => self.no_clash(r, x, h),
            Check::Isomorphism => self.isomorphism(r, x, h),
            Check::ParPermutation => self.par_permutation(r, x, h),
            Check::BoundedWork => self.bounded_work(r, x, h),
            Check::WitnessAgreement => self.witness_agreement(r, x, h),
        }
    }

    fn value_iff_no_query(&self, r: &Rule, x: &Structure, h: &History) -> Outcome {
        let ev = self.ev(x, h);
        for t in all_terms(r) {
            let res = ev.term(&t)?;
            if res.value.is_some() != res.caused.is_empty() {
                return Err(mismatch(format!("{}: value iff no query", printer::term(&t)), res));
            }
        }
        for g in all_guards(r) {
            let res = ev.guard(&g)?;
            if res.truth.is_some() != res.caused.is_empty() {
                return Err(mismatch(format!("{}: truth iff no query", printer::guard(&g)), res));
            }
        }
        Ok(true)
    }

    fn no_repeat(&self, r: &Rule, x: &Structure, h: &History) -> Outcome {
        let ev = self.ev(x, h);
        let answered = |c: &BTreeSet<crate::model::Query>| c.iter().find(|q| h.contains(q)).cloned();
        for t in all_terms(r) {
            if let Some(q) = answered(&ev.term(&t)?.caused) {
                return Err(mismatch(format!("{} causes no answered query", printer::term(&t)), q));
            }
        }
        for g in all_guards(r) {
            if let Some(q) = answered(&ev.guard(&g)?.caused) {
                return Err(mismatch(format!("{} causes no answered query", printer::guard(&g)), q));
            }
        }
        for sub in all_rules(r) {
            if let Some(q) = answered(&ev.rule(&sub)?.caused) {
                return Err(mismatch(format!("{} causes no answered query", printer::rule(&sub)), q));
            }
        }
        Ok(!h.is_empty())
    }

    fn monotonicity(&self, r: &Rule, x: &Structure, h: &History) -> Outcome {
        let full = self.ev(x, h);
        let terms = all_terms(r);
        let guards = all_guards(r);
        let rules = all_rules(r);
        for m in 0..h.len() {
            let eta = h.prefix(m)?;
            let part = self.ev(x, &eta);
            for t in &terms {
                let (a, b) = (part.term(t)?, full.term(t)?);
                if a.value.is_some() && a.value != b.value || a.qvalue.is_some() && a.qvalue != b.qvalue {
                    return Err(mismatch((m, printer::term(t), a), b));
                }
            }
            for g in &guards {
                let (a, b) = (part.guard(g)?, full.guard(g)?);
                if a.truth.is_some() && a.truth != b.truth {
                    return Err(mismatch((m, printer::guard(g), a), b));
                }
            }
            for sub in &rules {
                let (a, b) = (part.rule(sub)?, full.rule(sub)?);
                let persists = !a.is_final || (b.is_final && a.verdict == b.verdict);
                if !persists || !a.updates.is_subset(&b.updates) {
                    return Err(mismatch((m, printer::rule(sub), a), b));
                }
            }
        }
        Ok(!h.is_empty())
    }

    fn no_clash(&self, r: &Rule, x: &Structure, h: &History) -> Outcome {
        let ev = self.ev(x, h);
        let mut nontrivial = false;
        for sub in all_rules(r) {
            let o = ev.rule(&sub)?;
            if o.succeeds() && (o.clash || o.updates.has_clash()) {
                return Err(mismatch(format!("{}: success without clash", printer::rule(&sub)), o));
            }
            nontrivial |= o.clash;
        }
        Ok(nontrivial || ev.rule(r)?.succeeds())
    }

    fn isomorphism(&self, r: &Rule, x: &Structure, h: &History) -> Outcome {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x15);
        let elems: Vec<Elem> = x.elements().iter().cloned().collect();
        let mut image = elems.clone();
        image.shuffle(&mut rng);
        let iso = Bijection::new(elems.into_iter().zip(image).collect())?;
        let (y, hy) = (apply_iso(x, &iso)?, apply_iso(h, &iso)?);
        let (ex, ey) = (self.ev(x, h), self.ev(&y, &hy));
        for t in all_terms(r) {
            let (a, b) = (ex.term(&t)?, ey.term(&t)?);
            let moved = (apply_iso(&a.value, &iso)?, apply_iso(&a.qvalue, &iso)?, apply_iso(&a.caused, &iso)?);
            if moved != (b.value.clone(), b.qvalue.clone(), b.caused.clone()) {
                return Err(mismatch((printer::term(&t), moved), b));
            }
        }
        for g in all_guards(r) {
            let (a, b) = (ex.guard(&g)?, ey.guard(&g)?);
            if a.truth != b.truth || apply_iso(&a.caused, &iso)? != b.caused {
                return Err(mismatch((printer::guard(&g), a), b));
            }
        }
        let (a, b) = (ex.rule(r)?, ey.rule(r)?);
        let moved = RuleOutcome {
            caused: apply_iso(&a.caused, &iso)?,
            updates: apply_iso(&a.updates, &iso)?,
            ..a
        };
        if moved != b {
            return Err(mismatch(moved, b));
        }
        Ok(true)
    }

    fn par_permutation(&self, r: &Rule, x: &Structure, h: &History) -> Outcome {
        fn permute(r: &Rule, rng: &mut ChaCha8Rng, touched: &mut bool) -> Rule {
            match r {
                Rule::Cond(g, a, b) => Rule::cond(g.clone(), permute(a, rng, touched), permute(b, rng, touched)),
                Rule::Par(rs) => {
                    let mut cs: Vec<Rule> = rs.iter().map(|c| permute(c, rng, touched)).collect();
                    *touched |= cs.len() > 1;
                    cs.shuffle(rng);
                    if cs.len() > 1 && cs.iter().zip(rs).all(|(a, b)| a == b) {
                        cs.rotate_left(1);
                    }
                    Rule::Par(cs)
                }
                _ => r.clone(),
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x9a);
        let mut touched = false;
        let p = permute(r, &mut rng, &mut touched);
        let ev = self.ev(x, h);
        let (a, b) = (ev.rule(r)?, ev.rule(&p)?);
        if a != b {
            return Err(mismatch(a, (printer::rule(&p), b)));
        }
        Ok(touched)
    }

    fn bounded_work(&self, r: &Rule, x: &Structure, h: &History) -> Outcome {
        let issued = issued_with(x, h, &self.program.external, r, self.mutant)?;
        let b = bound_rule(r);
        if issued.len() > b {
            return Err(mismatch(format!("at most {b} issued"), issued));
        }
        Ok(!issued.is_empty())
    }

    fn witness_agreement(&self, r: &Rule, x: &Structure, h: &History) -> Outcome {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x3c);
        let w = witness_rule(r, &self.program.external).normalized();
        let y = agreeing_variant(&mut rng, &w, x, h)?;
        if !agree_on(&w, x, &y, h)? {
            return Err(mismatch("constructed states agree on the witness", "they disagree"));
        }
        let (ex, ey) = (self.ev(x, h), self.ev(&y, h));
        for t in all_terms(r) {
            let (a, b) = (ex.term(&t)?, ey.term(&t)?);
            if a != b {
                return Err(mismatch((printer::term(&t), a), b));
            }
        }
        for g in all_guards(r) {
            let (a, b) = (ex.guard(&g)?, ey.guard(&g)?);
            if a != b {
                return Err(mismatch((printer::guard(&g), a), b));
            }
        }
        let (a, b) = (ex.rule(r)?, ey.rule(r)?);
        if a != b {
            return Err(mismatch(a, b));
        }
        Ok(differs(x, &y))
    }
}

/// Some location of a user symbol has different values in `x` and `y`.
pub fn differs(x: &Structure, y: &Structure) -> bool {
    x.vocabulary().user_symbols().any(|(id, _)| {
        x.tuples(id.arity)
            .iter()
            .any(|args| x.lookup(&id.name, args).ok() != y.lookup(&id.name, args).ok())
    })
}

fn remove_round(h: &History, i: usize) -> History {
    let rounds = h
        .rounds()
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(_, r)| r.iter().map(|(q, a)| (q.clone(), a.clone())).collect())
        .collect();
    History::new(rounds).expect("subset of a history")
}

fn smaller_rules(r: &Rule) -> Vec<Rule> {
    match r {
        Rule::Cond(g, a, b) => {
            let mut out = vec![(**a).clone(), (**b).clone()];
            out.extend(smaller_rules(a).into_iter().map(|a2| Rule::cond(g.clone(), a2, (**b).clone())));
            out.extend(smaller_rules(b).into_iter().map(|b2| Rule::cond(g.clone(), (**a).clone(), b2)));
            out
        }
        Rule::Par(rs) => {
            let mut out: Vec<Rule> = rs.clone();
            for i in 0..rs.len() {
                let mut less = rs.clone();
                less.remove(i);
                out.push(Rule::Par(less));
            }
            out
        }
        _ => Vec::new(),
    }
}

fn shrink(case: &Case<'_>, check: Check, mut r: Rule, x: &Structure, mut h: History, mut m: Mismatch) -> (Rule, History, Mismatch) {
    for _ in 0..200 {
        let mut candidates: Vec<(Rule, History)> = Vec::new();
        for i in 0..h.len() {
            candidates.push((r.clone(), remove_round(&h, i)));
        }
        for q in h.domain() {
            candidates.push((r.clone(), h.without(q)));
        }
        for r2 in smaller_rules(&r) {
            candidates.push((r2, h.clone()));
        }
        let next = candidates
            .into_iter()
            .find_map(|(r2, h2)| case.run(check, &r2, x, &h2).err().map(|m2| (r2, h2, m2)));
        match next {
            Some((r2, h2, m2)) => {
                r = r2;
                h = h2;
                m = m2;
            }
            None => break,
        }
    }
    (r, h, m)
}

/// Deterministic per-case seed.
pub fn case_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i as u64)
}

/// The state and history of one case.
pub fn case_input(program: &Program, config: &HarnessConfig, seed: u64) -> (Structure, History) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = random_structure(&mut rng, &program.vocab, config.elements, &config.replies);
    let replies: Vec<Elem> = if config.replies.is_empty() {
        let elems: Vec<Elem> = x.elements().iter().cloned().collect();
        elems.choose_multiple(&mut rng, 2).cloned().collect()
    } else {
        config.replies.clone()
    };
    let h = if rng.gen_bool(0.6) {
        coherent_history(&mut rng, program, &x, &replies, config.max_len)
    } else {
        arbitrary_history(&mut rng, program, &x, &replies, config.max_len)
    };
    (x, h)
}

struct CaseResult {
    check: Check,
    nontrivial: bool,
    failure: Option<Failure>,
}

/// Run every configured check on `config.cases` random cases for `program`.
pub fn check_lemmas(program: &Program, config: &HarnessConfig) -> Report {
    let checks: Vec<Check> = if config.checks.is_empty() {
        Check::ALL.to_vec()
    } else {
        config.checks.clone()
    };
    let results: Vec<Vec<CaseResult>> = (0..config.cases)
        .into_par_iter()
        .map(|i| {
            let seed = case_seed(config.seed, i);
            let (x, h) = case_input(program, config, seed);
            let case = Case {
                program,
                mutant: config.mutant,
                seed,
            };
            checks
                .iter()
                .map(|&check| match case.run(check, &program.rule, &x, &h) {
                    Ok(nontrivial) => CaseResult {
                        check,
                        nontrivial,
                        failure: None,
                    },
                    Err(m) => {
                        let (r, h2, m) = shrink(&case, check, program.rule.clone(), &x, h.clone(), m);
                        CaseResult {
                            check,
                            nontrivial: true,
                            failure: Some(Failure {
                                seed,
                                shrunk_input: json!({
                                    "rule": printer::rule(&r),
                                    "state": &x,
                                    "history": &h2,
                                }),
                                expected: m.expected,
                                got: m.got,
                            }),
                        }
                    }
                })
                .collect()
        })
        .collect();
    let mut report = Report::default();
    for check in checks {
        let mut c = CheckReport {
            check,
            cases: config.cases,
            nontrivial: 0,
            failed: 0,
            failures: Vec::new(),
        };
        for r in results.iter().flatten().filter(|r| r.check == check) {
            c.nontrivial += r.nontrivial as usize;
            if let Some(f) = &r.failure {
                c.failed += 1;
                if c.failures.len() < MAX_REPORTED {
                    c.failures.push(f.clone());
                }
            }
        }
        report.checks.push(c);
    }
    report
}

/// [`check_lemmas`] over `programs` generated programs, merged.
pub fn check_generated(config: &HarnessConfig, programs: usize, depth: u32) -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5eed);
    let mut report = Report::default();
    for k in 0..programs {
        let p = random_program(&mut rng, depth);
        let cfg = HarnessConfig {
            seed: case_seed(config.seed, k + 1_000_003),
            ..config.clone()
        };
        report.merge(check_lemmas(&p, &cfg));
    }
    report
}
