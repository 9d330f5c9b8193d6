use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::SynthError;
use crate::analysis::{bound_rule, witness_rule, Witness};
use crate::engine::ReplyUniverse;
use crate::eval::Verdict;
use crate::model::{
    is_logic_name, Elem, History, Label, Query, Structure, SymbolId, SymbolInfo, Update, UpdateSet,
    Vocabulary,
};
use crate::syntax::{parse_term, Program, STerm, Term};

/// What an algorithm does at one state and history.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Behavior {
    #[serde(default)]
    pub causes: BTreeSet<Query>,
    #[serde(rename = "final", default)]
    pub is_final: bool,
    #[serde(default = "undecided")]
    pub verdict: Verdict,
    #[serde(default)]
    pub updates: UpdateSet,
}

fn undecided() -> Verdict {
    Verdict::Undecided
}

impl Behavior {
    pub fn pending(causes: impl IntoIterator<Item = Query>) -> Self {
        Behavior {
            causes: causes.into_iter().collect(),
            is_final: false,
            verdict: Verdict::Undecided,
            updates: UpdateSet::new(),
        }
    }

    pub fn success(updates: UpdateSet) -> Self {
        Behavior {
            causes: BTreeSet::new(),
            is_final: true,
            verdict: Verdict::Success,
            updates,
        }
    }

    pub fn fail() -> Self {
        Behavior {
            causes: BTreeSet::new(),
            is_final: true,
            verdict: Verdict::Fail,
            updates: UpdateSet::new(),
        }
    }
}

/// A black-box interactive small-step algorithm over finitely many probes.
pub trait AlgorithmOracle: Sync {
    fn name(&self) -> &str;
    fn vocabulary(&self) -> &Vocabulary;
    fn labels(&self) -> &BTreeSet<Label>;
    fn bound(&self) -> usize;
    fn witness(&self) -> &Witness;
    fn probes(&self) -> &[Structure];
    fn reply_universe(&self) -> &ReplyUniverse;
    fn behavior(&self, x: &Structure, h: &History) -> Result<Behavior, SynthError>;

    fn causes(&self, x: &Structure, h: &History) -> Result<BTreeSet<Query>, SynthError> {
        Ok(self.behavior(x, h)?.causes)
    }

    fn is_final(&self, x: &Structure, h: &History) -> Result<bool, SynthError> {
        Ok(self.behavior(x, h)?.is_final)
    }
}

/// Queries caused by some initial segment of `h`.
pub fn oracle_issued(
    oracle: &dyn AlgorithmOracle,
    x: &Structure,
    h: &History,
) -> Result<BTreeSet<Query>, SynthError> {
    let mut out = BTreeSet::new();
    for m in 0..=h.len() {
        out.extend(oracle.causes(x, &h.prefix(m)?)?);
    }
    Ok(out)
}

/// An interpreted program seen only through its behavior.
pub struct ProgramOracle {
    name: String,
    program: Program,
    bound: usize,
    witness: Witness,
    probes: Vec<Structure>,
    universe: ReplyUniverse,
}

impl ProgramOracle {
    /// Witness and bound default to the program's own.
    pub fn new(name: &str, program: Program, probes: Vec<Structure>, universe: ReplyUniverse) -> Self {
        let witness = witness_rule(&program.rule, &program.external).normalized();
        let bound = bound_rule(&program.rule);
        ProgramOracle {
            name: name.to_string(),
            program,
            bound,
            witness,
            probes,
            universe,
        }
    }

    pub fn with_bound(mut self, bound: usize) -> Self {
        self.bound = bound;
        self
    }

    pub fn with_witness(mut self, witness: Witness) -> Self {
        self.witness = witness;
        self
    }

    pub fn program(&self) -> &Program {
        &self.program
    }
}

impl AlgorithmOracle for ProgramOracle {
    fn name(&self) -> &str {
        &self.name
    }
    fn vocabulary(&self) -> &Vocabulary {
        &self.program.vocab
    }
    fn labels(&self) -> &BTreeSet<Label> {
        &self.program.labels
    }
    fn bound(&self) -> usize {
        self.bound
    }
    fn witness(&self) -> &Witness {
        &self.witness
    }
    fn probes(&self) -> &[Structure] {
        &self.probes
    }
    fn reply_universe(&self) -> &ReplyUniverse {
        &self.universe
    }
    fn behavior(&self, x: &Structure, h: &History) -> Result<Behavior, SynthError> {
        let out = self.program.eval(x, h)?;
        Ok(Behavior {
            causes: out.caused,
            is_final: out.is_final,
            verdict: out.verdict,
            updates: out.updates,
        })
    }
}

type BehaviorFn = dyn Fn(&Structure, &History) -> Behavior + Send + Sync;

/// An algorithm given by a native function.
pub struct FnOracle {
    name: String,
    vocab: Vocabulary,
    labels: BTreeSet<Label>,
    bound: usize,
    witness: Witness,
    probes: Vec<Structure>,
    universe: ReplyUniverse,
    f: Box<BehaviorFn>,
}

impl AlgorithmOracle for FnOracle {
    fn name(&self) -> &str {
        &self.name
    }
    fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }
    fn labels(&self) -> &BTreeSet<Label> {
        &self.labels
    }
    fn bound(&self) -> usize {
        self.bound
    }
    fn witness(&self) -> &Witness {
        &self.witness
    }
    fn probes(&self) -> &[Structure] {
        &self.probes
    }
    fn reply_universe(&self) -> &ReplyUniverse {
        &self.universe
    }
    fn behavior(&self, x: &Structure, h: &History) -> Result<Behavior, SynthError> {
        Ok((self.f)(x, h))
    }
}

impl FnOracle {
    /// No labels, bound 1, witness `{true, false, v}`, no configured replies.
    pub fn new(
        name: &str,
        vocab: Vocabulary,
        probes: Vec<Structure>,
        f: impl Fn(&Structure, &History) -> Behavior + Send + Sync + 'static,
    ) -> Self {
        FnOracle {
            name: name.into(),
            vocab,
            labels: BTreeSet::new(),
            bound: 1,
            witness: Witness::new([]).normalized(),
            probes,
            universe: ReplyUniverse::default(),
            f: Box::new(f),
        }
    }

    pub fn with_labels(mut self, labels: &[&str]) -> Self {
        self.labels = labels.iter().map(|l| Label::new(*l)).collect();
        self
    }

    pub fn with_bound(mut self, bound: usize) -> Self {
        self.bound = bound;
        self
    }

    pub fn with_witness(mut self, witness: Witness) -> Self {
        self.witness = witness;
        self
    }

    pub fn with_universe(mut self, universe: ReplyUniverse) -> Self {
        self.universe = universe;
        self
    }
}

pub fn builtin_names() -> &'static [&'static str] {
    &["constant-update", "immediate-fail", "one-query-then-update"]
}

/// The toy algorithms used for round trips.
pub fn builtin(name: &str) -> Option<FnOracle> {
    match name {
        "constant-update" => {
            let vocab = Vocabulary::new().with("f", 0, SymbolInfo::dynamic().relational());
            let f = SymbolId::new("f", 0);
            let mut other = Structure::standard(&vocab, &[]);
            other.set_default(&f, Elem::new("true")).ok()?;
            let probes = vec![Structure::standard(&vocab, &[]), other];
            Some(FnOracle::new(name, vocab, probes, move |x, _| {
                Behavior::success(UpdateSet::single(Update {
                    symbol: f.clone(),
                    args: vec![],
                    value: x.true_elem().clone(),
                }))
            }))
        }
        "immediate-fail" => {
            let vocab = Vocabulary::new().with("k", 0, SymbolInfo::fixed());
            let probes = vec![Structure::standard(&vocab, &["a"])];
            Some(FnOracle::new(name, vocab, probes, |_, _| Behavior::fail()))
        }
        "one-query-then-update" => {
            let vocab = Vocabulary::new().with("d", 0, SymbolInfo::dynamic());
            let d = SymbolId::new("d", 0);
            let ask = Query::labels(&["ask"]);
            let probes = vec![Structure::standard(&vocab, &["yes", "no"])];
            let oracle = FnOracle::new(name, vocab, probes, move |_, h| match h.answer(&ask) {
                None => Behavior::pending([ask.clone()]),
                Some(a) => Behavior::success(UpdateSet::single(Update {
                    symbol: d.clone(),
                    args: vec![],
                    value: a.clone(),
                })),
            });
            Some(
                oracle
                    .with_labels(&["ask"])
                    .with_universe(ReplyUniverse::uniform(&["yes", "no"])),
            )
        }
        _ => None,
    }
}

#[derive(Serialize, Deserialize)]
struct ProbeJson {
    id: String,
    state: Structure,
}

#[derive(Serialize, Deserialize)]
struct EntryJson {
    state: String,
    #[serde(default)]
    history: History,
    #[serde(flatten)]
    behavior: Behavior,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct TableJson {
    #[serde(default)]
    name: Option<String>,
    probes: Vec<ProbeJson>,
    #[serde(default)]
    labels: Vec<Label>,
    #[serde(default)]
    reply_universe: ReplyUniverse,
    #[serde(rename = "B")]
    bound: usize,
    #[serde(rename = "W")]
    witness: Vec<String>,
    behavior: Vec<EntryJson>,
}

/// An algorithm given by a finite table keyed by probe id and history.
pub struct TableOracle {
    name: String,
    vocab: Vocabulary,
    labels: BTreeSet<Label>,
    bound: usize,
    witness: Witness,
    ids: Vec<String>,
    probes: Vec<Structure>,
    universe: ReplyUniverse,
    table: BTreeMap<(usize, History), Behavior>,
}

impl TableOracle {
    pub fn from_json(text: &str) -> Result<Self, SynthError> {
        let j: TableJson = serde_json::from_str(text).map_err(|e| SynthError::Oracle(e.to_string()))?;
        let first = j
            .probes
            .first()
            .ok_or_else(|| SynthError::Oracle("at least one probe is required".into()))?;
        let vocab = first.state.vocabulary();
        if j.probes.iter().any(|p| p.state.vocabulary() != vocab) {
            return Err(SynthError::Oracle("probes must share one vocabulary".into()));
        }
        let ids: Vec<String> = j.probes.iter().map(|p| p.id.clone()).collect();
        let mut table = BTreeMap::new();
        for entry in j.behavior {
            let i = ids
                .iter()
                .position(|id| *id == entry.state)
                .ok_or_else(|| SynthError::Oracle(format!("unknown probe {}", entry.state)))?;
            if table.insert((i, entry.history), entry.behavior).is_some() {
                return Err(SynthError::Oracle(format!("duplicate entry for probe {}", entry.state)));
            }
        }
        let mut labels: BTreeSet<Label> = j.labels.into_iter().collect();
        for b in table.values() {
            for q in &b.causes {
                labels.extend(q.tokens().iter().filter_map(|t| match t {
                    crate::model::Token::Label(l) => Some(l.clone()),
                    crate::model::Token::Elem(_) => None,
                }));
            }
        }
        let witness = parse_witness(&j.witness, &vocab)?;
        Ok(TableOracle {
            name: j.name.unwrap_or_else(|| "table".into()),
            vocab,
            labels,
            bound: j.bound,
            witness,
            ids,
            probes: j.probes.into_iter().map(|p| p.state).collect(),
            universe: j.reply_universe,
            table,
        })
    }
}

/// Parse witness terms; identifiers that name no symbol are variables.
pub(crate) fn parse_witness(items: &[String], vocab: &Vocabulary) -> Result<Witness, SynthError> {
    let mut terms = Vec::new();
    for src in items {
        let words: BTreeSet<String> = src
            .split(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .filter(|w| w.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_'))
            .map(str::to_string)
            .collect();
        let vars: Vec<&str> = words
            .iter()
            .filter(|w| {
                vocab.arities(w).is_empty()
                    && !crate::model::LOGIC_NAMES.iter().any(|(n, _, _)| n == w)
            })
            .map(String::as_str)
            .collect();
        let t = parse_term(src, &vars).map_err(|e| SynthError::Oracle(format!("witness term {src}: {e}")))?;
        let t = plain_term(&t).ok_or_else(|| SynthError::Oracle(format!("witness term {src} uses `!`")))?;
        for s in t.subterms() {
            if let Term::App(f, args) = s {
                let id = SymbolId::new(f.as_str(), args.len());
                if !vocab.contains(&id) && !is_logic_name(&id) {
                    return Err(SynthError::Oracle(format!("witness term {src} uses unknown {id}")));
                }
            }
        }
        terms.push(t);
    }
    Ok(Witness::new(terms))
}

fn plain_term(t: &STerm) -> Option<Term> {
    match t {
        STerm::Var(v, _) => Some(Term::var(v)),
        STerm::App(f, args, _) => Some(Term::App(f.clone(), args.iter().map(plain_term).collect::<Option<_>>()?)),
        STerm::Bang(_) => None,
    }
}

impl AlgorithmOracle for TableOracle {
    fn name(&self) -> &str {
        &self.name
    }
    fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }
    fn labels(&self) -> &BTreeSet<Label> {
        &self.labels
    }
    fn bound(&self) -> usize {
        self.bound
    }
    fn witness(&self) -> &Witness {
        &self.witness
    }
    fn probes(&self) -> &[Structure] {
        &self.probes
    }
    fn reply_universe(&self) -> &ReplyUniverse {
        &self.universe
    }
    fn behavior(&self, x: &Structure, h: &History) -> Result<Behavior, SynthError> {
        let missing = || SynthError::MissingBehavior {
            state: "an unlisted state".into(),
            history: super::history_text(h),
        };
        let i = self.probes.iter().position(|p| p == x).ok_or_else(missing)?;
        self.table.get(&(i, h.clone())).cloned().ok_or_else(|| SynthError::MissingBehavior {
            state: self.ids[i].clone(),
            history: super::history_text(h),
        })
    }
}
