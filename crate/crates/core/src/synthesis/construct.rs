use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use super::critical::{critical_terms, CriticalTerms};
use super::describe::{describe_with, explore, Description, Visited};
use super::oracle::AlgorithmOracle;
use super::templates::standard_external;
use super::{history_text, SynthConfig, SynthError};
use crate::eval::{Evaluator, Verdict};
use crate::model::{Elem, ExternalVocabulary, SymbolId};
use crate::syntax::{Program, Rule, Term};

/// A synthesized program with the sizes of the intermediate objects.
#[derive(Clone, Debug)]
pub struct Synthesis {
    pub program: Program,
    pub stats: Stats,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Stats {
    pub pairs: usize,
    pub descriptions: usize,
    pub critical_terms: usize,
    pub external_symbols: usize,
}

#[derive(Default)]
struct Node {
    successors: BTreeSet<Description>,
    /// The body of a final description, with the pair it came from.
    body: Option<(Rule, usize)>,
    non_final: Option<usize>,
}

fn par(mut rules: Vec<Rule>) -> Rule {
    rules.sort();
    rules.dedup();
    if rules.len() == 1 {
        rules.pop().expect("one rule")
    } else {
        Rule::Par(rules)
    }
}

/// The standard external symbols needed for the queries the oracle issues.
fn used_external(oracle: &dyn AlgorithmOracle, visited: &[Visited]) -> ExternalVocabulary {
    let full = standard_external(oracle.labels(), oracle.bound(), oracle.vocabulary());
    let queries: BTreeSet<_> = visited.iter().flat_map(|v| v.issued.iter()).collect();
    let mut ext = full.clone();
    ext.retain(|id| {
        let t = full.template(id).expect("standard symbol");
        queries.iter().any(|q| t.match_query(q).is_some())
    });
    ext
}

/// Body of a final description at pair `v`.
fn final_body(
    oracle: &dyn AlgorithmOracle,
    ext: &ExternalVocabulary,
    crit: &CriticalTerms,
    v: &Visited,
) -> Result<Rule, SynthError> {
    let x = &oracle.probes()[v.pair.state];
    let h = &v.pair.history;
    let n = h.len();
    let ev = Evaluator::new(x, h, ext);
    let weak = |detail: String| SynthError::WitnessTooWeak {
        state: v.pair.state,
        history: history_text(h),
        detail,
    };
    let mut parts = Vec::new();
    if v.behavior.verdict == Verdict::Fail {
        parts.push(Rule::Fail);
    }
    for q in &v.behavior.causes {
        let mut found = false;
        for c in crit.q_upto(n + 1) {
            if ev.term(&c.term)?.qvalue.as_ref() == Some(q) {
                if let Term::App(f, args) = &c.term {
                    parts.push(Rule::Issue {
                        symbol: f.clone(),
                        args: args.clone(),
                    });
                    found = true;
                }
            }
        }
        if !found {
            return Err(weak(format!("no critical q-term of level at most {} denotes {q}", n + 1)));
        }
    }
    if v.behavior.verdict == Verdict::Success {
        let mut by_value: BTreeMap<Elem, Vec<Term>> = BTreeMap::new();
        for c in crit.upto(n) {
            if let Some(a) = ev.term(&c.term)?.value {
                by_value.entry(a).or_default().push(c.term.clone());
            }
        }
        for u in v.behavior.updates.iter() {
            let mut choices: Vec<Vec<Term>> = vec![Vec::new()];
            for a in u.args.iter().chain(std::iter::once(&u.value)) {
                let names = by_value
                    .get(a)
                    .ok_or_else(|| weak(format!("no critical term of level at most {n} denotes {a}")))?;
                choices = choices
                    .into_iter()
                    .flat_map(|p| {
                        names.iter().map(move |t| {
                            let mut p = p.clone();
                            p.push(t.clone());
                            p
                        })
                    })
                    .collect();
            }
            for mut c in choices {
                let value = c.pop().expect("value term");
                parts.push(Rule::Update {
                    symbol: u.symbol.name.clone(),
                    args: c,
                    value,
                });
            }
        }
    }
    Ok(par(parts))
}

fn component(nodes: &BTreeMap<Description, Node>, d: &Description) -> Rule {
    let node = &nodes[d];
    let body = match &node.body {
        Some((r, _)) => r.clone(),
        None => par(node.successors.iter().map(|s| component(nodes, s)).collect()),
    };
    Rule::cond(d.guard(), body, Rule::skip())
}

/// Build a program equivalent to `oracle` on its probes.
pub fn synthesize(oracle: &dyn AlgorithmOracle, config: &SynthConfig) -> Result<Synthesis, SynthError> {
    let bound = oracle.bound();
    let visited = explore(oracle, bound, config.max_pairs)?;
    let ext = used_external(oracle, &visited);
    let longest = visited.iter().map(|v| v.pair.history.len()).max().unwrap_or(0);
    let crit = critical_terms(oracle.witness(), &ext, longest + 1, config.max_critical_terms)?;

    let descriptions: Vec<Description> = visited
        .par_iter()
        .map(|v| {
            let x = &oracle.probes()[v.pair.state];
            describe_with(x, &v.pair.history, &ext, &crit, &v.issued_before)
        })
        .collect::<Result<_, _>>()?;
    let bodies: Vec<Option<Rule>> = visited
        .par_iter()
        .map(|v| {
            if v.behavior.is_final {
                final_body(oracle, &ext, &crit, v).map(Some)
            } else {
                Ok(None)
            }
        })
        .collect::<Result<_, _>>()?;

    let mut nodes: BTreeMap<Description, Node> = BTreeMap::new();
    let conflict = |i: usize, j: usize| SynthError::Conflict {
        state: visited[i].pair.state,
        history: history_text(&visited[i].pair.history),
        other: format!("probe {} at {}", visited[j].pair.state, history_text(&visited[j].pair.history)),
    };
    for (i, v) in visited.iter().enumerate() {
        let node = nodes.entry(descriptions[i].clone()).or_default();
        match &bodies[i] {
            Some(body) => {
                if let Some(j) = node.non_final {
                    return Err(conflict(i, j));
                }
                match &node.body {
                    Some((other, j)) if other != body => return Err(conflict(i, *j)),
                    Some(_) => {}
                    None => node.body = Some((body.clone(), i)),
                }
            }
            None => {
                if let Some((_, j)) = node.body {
                    return Err(conflict(i, j));
                }
                node.non_final = Some(i);
                let h = &v.pair.history;
                if h.len() >= bound {
                    return Err(SynthError::NotFinalWithinBound {
                        state: v.pair.state,
                        history: history_text(h),
                        bound,
                    });
                }
            }
        }
        if let Some(p) = v.parent {
            nodes
                .entry(descriptions[p].clone())
                .or_default()
                .successors
                .insert(descriptions[i].clone());
        }
    }
    for (d, node) in &nodes {
        if node.body.is_none() && node.successors.is_empty() {
            let i = node.non_final.expect("visited");
            debug_assert_eq!(descriptions[i], *d);
            return Err(SynthError::DeadEnd {
                state: visited[i].pair.state,
                history: history_text(&visited[i].pair.history),
            });
        }
    }

    let roots: Vec<Rule> = nodes
        .keys()
        .filter(|d| d.depth == 0)
        .map(|d| component(&nodes, d))
        .collect();
    let rule = par(roots);
    let mut external = ext;
    let used = symbols_in(&rule);
    external.retain(|id| used.contains(id));
    let program = Program {
        vocab: oracle.vocabulary().clone(),
        labels: oracle.labels().clone(),
        external,
        rule,
    };
    Ok(Synthesis {
        stats: Stats {
            pairs: visited.len(),
            descriptions: nodes.len(),
            critical_terms: crit.len(),
            external_symbols: program.external.len(),
        },
        program,
    })
}

fn symbols_in(r: &Rule) -> BTreeSet<SymbolId> {
    fn term(t: &Term, out: &mut BTreeSet<SymbolId>) {
        if let Term::App(f, args) = t {
            out.insert(SymbolId::new(f.as_str(), args.len()));
            for a in args {
                term(a, out);
            }
        }
    }
    fn walk(r: &Rule, out: &mut BTreeSet<SymbolId>) {
        match r {
            Rule::Update { symbol, args, value } => {
                out.insert(SymbolId::new(symbol.as_str(), args.len()));
                args.iter().for_each(|a| term(a, out));
                term(value, out);
            }
            Rule::Issue { symbol, args } => {
                out.insert(SymbolId::new(symbol.as_str(), args.len()));
                args.iter().for_each(|a| term(a, out));
            }
            Rule::Fail => {}
            Rule::Cond(g, a, b) => {
                g.terms().into_iter().for_each(|t| term(t, out));
                walk(a, out);
                walk(b, out);
            }
            Rule::Par(rs) => rs.iter().for_each(|r| walk(r, out)),
        }
    }
    let mut out = BTreeSet::new();
    walk(r, &mut out);
    out
}
