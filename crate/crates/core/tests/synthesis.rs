mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::*;
use iasm_core::analysis::Witness;
use iasm_core::engine::{pending, ReplyUniverse};
use iasm_core::eval::Evaluator;
use iasm_core::model::*;
use iasm_core::synthesis::*;
use iasm_core::syntax::{Guard, Program, Rule, Term};

fn cfg() -> SynthConfig {
    SynthConfig::default()
}

fn labels(names: &[&str]) -> BTreeSet<Label> {
    names.iter().map(|n| Label::new(*n)).collect()
}

/// Generate every item sequence of length at most `bound` over the labels
/// and placeholders `#1..#bound`, keep those whose placeholders read
/// `#1, #2, ..` left to right, and dedupe.
fn brute_force_templates(ls: &[&str], bound: usize) -> BTreeSet<Vec<String>> {
    let mut alphabet: Vec<String> = ls.iter().map(|l| l.to_string()).collect();
    alphabet.extend((1..=bound).map(|i| format!("#{i}")));
    let mut all: Vec<Vec<String>> = vec![vec![]];
    let mut layer: Vec<Vec<String>> = vec![vec![]];
    for _ in 0..bound {
        layer = layer
            .iter()
            .flat_map(|p| {
                alphabet.iter().map(move |a| {
                    let mut p = p.clone();
                    p.push(a.clone());
                    p
                })
            })
            .collect();
        all.extend(layer.clone());
    }
    all.into_iter()
        .filter(|seq| {
            let ph: Vec<&String> = seq.iter().filter(|s| s.starts_with('#')).collect();
            ph.iter().enumerate().all(|(i, p)| **p == format!("#{}", i + 1))
        })
        .collect()
}

fn as_items(t: &Template) -> Vec<String> {
    t.items()
        .iter()
        .map(|it| match it {
            TemplateItem::Label(l) => l.0.clone(),
            TemplateItem::Placeholder(i) => format!("#{i}"),
        })
        .collect()
}

#[test]
fn standard_template_count() {
    let got = standard_templates(&labels(&["l"]), 2);
    assert_eq!(got.len(), 7);
    let got: BTreeSet<Vec<String>> = got.iter().map(as_items).collect();
    assert_eq!(got, brute_force_templates(&["l"], 2));
    assert_eq!(standard_templates(&BTreeSet::new(), 1).len(), 2);
    let two: BTreeSet<Vec<String>> = standard_templates(&labels(&["a", "b"]), 3).iter().map(as_items).collect();
    assert_eq!(two, brute_force_templates(&["a", "b"], 3));
}

#[test]
fn every_short_query_has_exactly_one_standard_template() {
    let ls = labels(&["l", "m"]);
    let ext = standard_external(&ls, 2, &Vocabulary::new());
    let tokens = ["l:l", "l:m", "e:a", "e:b"];
    let mut queries = Vec::new();
    for a in tokens {
        queries.push(q(&[a]));
        for b in tokens {
            queries.push(q(&[a, b]));
        }
    }
    for query in &queries {
        let n = ext.iter().filter(|(_, t)| t.match_query(query).is_some()).count();
        assert_eq!(n, 1, "{query}");
    }
    let la = q(&["l:l", "e:a"]);
    let (id, _) = ext.iter().find(|(_, t)| t.match_query(&la).is_some()).unwrap();
    assert_eq!(id.name, "q_l_1");
}

#[test]
fn critical_terms_two_levels_by_hand() {
    let w = Witness::new([]).normalized();
    let ext = ExternalVocabulary::new()
        .with("a", Template::labelled("a", 0))
        .with("g", Template::labelled("g", 1));
    let crit = critical_terms(&w, &ext, 2, 1000).unwrap();
    let t = Term::constant;
    let g = |x: Term| Term::app("g", vec![x]);
    // Level 0: the closed witness terms. Level 1: a(), g(true), g(false).
    // Level 2: g applied to each level-1 term.
    let want: BTreeMap<Term, usize> = [
        (t("true"), 0),
        (t("false"), 0),
        (t("a"), 1),
        (g(t("true")), 1),
        (g(t("false")), 1),
        (g(t("a")), 2),
        (g(g(t("true"))), 2),
        (g(g(t("false"))), 2),
    ]
    .into_iter()
    .collect();
    let got: BTreeMap<Term, usize> = crit.terms.iter().map(|c| (c.term.clone(), c.level)).collect();
    assert_eq!(got, want);
    assert_eq!(crit.q_upto(1).count(), 3);
    assert!(matches!(
        critical_terms(&w, &ext, 2, 5),
        Err(SynthError::Explosion { .. })
    ));
}

#[test]
fn witness_terms_with_variables_take_q_terms() {
    let vocab = Vocabulary::new().with("h", 1, SymbolInfo::fixed());
    let w = Witness::new([Term::app("h", vec![Term::var("v")])]).normalized();
    let ext = ExternalVocabulary::new().with("a", Template::labelled("a", 0));
    let crit = critical_terms(&w, &ext, 1, 100).unwrap();
    let names: Vec<String> = crit.terms.iter().map(|c| iasm_core::syntax::printer::term_compact(&c.term)).collect();
    assert_eq!(names, vec!["false", "true", "a", "h(a)"]);
    assert!(vocab.contains(&SymbolId::new("h", 1)));
}

fn compact_broker() -> ProgramOracle {
    let p = program("compact_broker.asm");
    let x = state("compact_broker_state.json");
    let mut same = x.clone();
    same.set_default(&SymbolId::new("c1", 0), e("zero")).unwrap();
    ProgramOracle::new("compact-broker", p, vec![x, same], ReplyUniverse::uniform(&["yes"])).with_bound(2)
}

fn broker_oracle() -> ProgramOracle {
    ProgramOracle::new(
        "broker",
        program("broker.asm"),
        vec![state("broker_state.json")],
        ReplyUniverse::uniform(&["yes"]),
    )
}

/// Attainable histories of a program, found by recursion on pending sets.
fn count_attainable(p: &Program, x: &Structure, h: History, max_len: usize) -> usize {
    let mut n = 1;
    if p.eval(x, &h).unwrap().is_final || h.len() == max_len {
        return n;
    }
    let pend: Vec<Query> = pending(x, &h, &p.external, &p.rule).unwrap().into_iter().collect();
    for mask in 1..(1u32 << pend.len()) {
        let round: Round = (0..pend.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| (pend[i].clone(), e("yes")))
            .collect();
        n += count_attainable(p, x, h.extend(round).unwrap(), max_len);
    }
    n
}

#[test]
fn enumeration_counts() {
    let c = builtin("constant-update").unwrap();
    assert_eq!(enumerate_attainable(&c, 3, 100).unwrap().len(), c.probes().len());
    let ask = builtin("one-query-then-update").unwrap();
    assert_eq!(enumerate_attainable(&ask, 1, 100).unwrap().len(), 3);

    let broker = broker_oracle();
    let pairs = enumerate_attainable(&broker, 2, 10_000).unwrap();
    let want = count_attainable(broker.program(), &broker.probes()[0], History::empty(), 2);
    assert_eq!(pairs.len(), want);
    // Every nonempty round of the three offers and timeout is final.
    assert_eq!(want, 8);
}

fn crit_for(oracle: &dyn AlgorithmOracle, ext: &ExternalVocabulary, level: usize) -> CriticalTerms {
    critical_terms(oracle.witness(), ext, level, 4000).unwrap()
}

fn broker_ext(o: &dyn AlgorithmOracle) -> ExternalVocabulary {
    let mut ext = standard_external(o.labels(), o.bound(), o.vocabulary());
    ext.retain(|id| id.name == "q_offer_1" || id.name == "q_timeout");
    ext
}

#[test]
fn description_properties_on_the_compact_broker() {
    let o = compact_broker();
    let ext = broker_ext(&o);
    assert_eq!(ext.len(), 2);
    let crit = crit_for(&o, &ext, 2);
    let pairs = enumerate_attainable(&o, 2, 1000).unwrap();
    let descs: Vec<Description> = pairs
        .iter()
        .map(|p| describe(&o, &ext, &crit, p.state, &p.history).unwrap())
        .collect();
    let mut by_depth: BTreeMap<usize, BTreeSet<&Description>> = BTreeMap::new();
    for d in &descs {
        by_depth.entry(d.depth).or_default().insert(d);
    }
    // The two probes differ in whether c0 = c1.
    assert_eq!(by_depth[&0].len(), 2);
    for (p, d) in pairs.iter().zip(&descs) {
        let x = &o.probes()[p.state];
        let ev = Evaluator::new(x, &p.history, &ext);
        assert_eq!(ev.guard(&d.guard()).unwrap().truth, Some(true), "{}", d.printed());
        if p.history.is_empty() {
            assert_eq!(d.timing_conjuncts(), 0);
        } else {
            assert!(d.timing_conjuncts() > 0);
        }
        // Exactly one description of each depth up to the length holds.
        for m in 0..=p.history.len() {
            let own = describe(&o, &ext, &crit, p.state, &p.history.prefix(m).unwrap()).unwrap();
            for other in &by_depth[&m] {
                let truth = ev.guard(&other.guard()).unwrap().truth;
                assert_eq!(truth == Some(true), **other == own);
            }
        }
        // Dom and causes are named by critical q-terms of bounded level.
        let n = p.history.len();
        let qvals = |level: usize| -> BTreeSet<Query> {
            crit.q_upto(level).filter_map(|c| ev.term(&c.term).unwrap().qvalue).collect()
        };
        assert!(p.history.domain().all(|query| qvals(n).contains(query)));
        let caused = o.causes(x, &p.history).unwrap();
        assert!(caused.iter().all(|query| qvals(n + 1).contains(query)));
    }
    // Similar pairs have similar truncations.
    let mut pred: BTreeMap<&Description, Description> = BTreeMap::new();
    for (p, d) in pairs.iter().zip(&descs) {
        if let Some(t) = p.history.truncation() {
            let dt = describe(&o, &ext, &crit, p.state, &t).unwrap();
            if let Some(prev) = pred.insert(d, dt.clone()) {
                assert_eq!(prev, dt);
            }
        }
    }
}

#[test]
fn isomorphic_pairs_have_equal_descriptions() {
    let base = compact_broker();
    let x = base.probes()[0].clone();
    let map: BTreeMap<Elem, Elem> = x.elements().iter().map(|a| (a.clone(), e(&format!("r_{}", a.as_str())))).collect();
    let iso = Bijection::new(map).unwrap();
    let y = apply_iso(&x, &iso).unwrap();
    let o = ProgramOracle::new(
        "pair",
        base.program().clone(),
        vec![x, y],
        ReplyUniverse {
            by_shape: BTreeMap::new(),
            default: vec![],
        },
    )
    .with_bound(2);
    let ext = broker_ext(&o);
    let crit = crit_for(&o, &ext, 2);
    let h = hist(&[&[(q(&["l:offer", "e:one"]), "yes"), (q(&["l:timeout"]), "yes")]]);
    let hy = apply_iso(&h, &iso).unwrap();
    let a = describe(&o, &ext, &crit, 0, &h).unwrap();
    let b = describe(&o, &ext, &crit, 1, &hy).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.depth, 1);
}

#[test]
fn describe_rejects_unattainable_histories() {
    let o = builtin("one-query-then-update").unwrap();
    let ext = standard_external(o.labels(), 1, o.vocabulary());
    let crit = crit_for(&o, &ext, 1);
    let stray = hist(&[&[(q(&["l:other"]), "yes")]]);
    assert!(matches!(
        describe(&o, &ext, &crit, 0, &stray),
        Err(SynthError::NotAttainable { .. })
    ));
}

fn round_trip(o: &dyn AlgorithmOracle) -> (Synthesis, EquivalenceReport) {
    let s = synthesize(o, &cfg()).unwrap_or_else(|e| panic!("{}: {e}", o.name()));
    let src = s.program.to_source();
    let back = Program::parse(&src).unwrap_or_else(|e| panic!("{}: {e}\n{src}", o.name()));
    assert_eq!(back.rule, s.program.rule);
    let r = check_equivalence(o, &s.program, 100_000).unwrap();
    (s, r)
}

#[test]
fn constant_update_round_trip_matches_hand_construction() {
    let o = builtin("constant-update").unwrap();
    let (s, r) = round_trip(&o);
    assert!(r.is_equivalent(), "{:?}", r.violations);
    assert_eq!(r.pairs, 2);
    // One depth-0 description over the critical terms false, true.
    let t = Term::constant;
    let delta = [
        Guard::Bool(Term::equal(t("false"), t("false"))),
        Guard::Bool(Term::equal(t("true"), t("true"))),
        Guard::not(Guard::Bool(Term::equal(t("false"), t("true")))),
    ]
    .into_iter()
    .reduce(Guard::and)
    .unwrap();
    let body = Rule::Update {
        symbol: "f".into(),
        args: vec![],
        value: t("true"),
    };
    assert_eq!(s.program.rule, Rule::cond(delta, body, Rule::skip()));
    assert!(s.program.external.is_empty());
}

#[test]
fn immediate_fail_round_trip() {
    let o = builtin("immediate-fail").unwrap();
    let (s, r) = round_trip(&o);
    assert!(r.is_equivalent(), "{:?}", r.violations);
    match &s.program.rule {
        Rule::Cond(_, body, _) => assert_eq!(**body, Rule::Fail),
        other => panic!("{other:?}"),
    }
}

fn has_issue(r: &Rule) -> bool {
    match r {
        Rule::Issue { .. } => true,
        Rule::Cond(_, a, b) => has_issue(a) || has_issue(b),
        Rule::Par(rs) => rs.iter().any(has_issue),
        _ => false,
    }
}

#[test]
fn one_query_round_trip_issues_through_guards() {
    let o = builtin("one-query-then-update").unwrap();
    let (s, r) = round_trip(&o);
    assert!(r.is_equivalent(), "{:?}", r.violations);
    assert_eq!(r.pairs, 3);
    assert!(!has_issue(&s.program.rule));
    let x = &o.probes()[0];
    let out = s.program.eval(x, &History::empty()).unwrap();
    assert_eq!(out.caused, BTreeSet::from([q(&["l:ask"])]));
    let Rule::Cond(_, inner, _) = &s.program.rule else { panic!() };
    let Rule::Cond(d1, last, _) = &**inner else { panic!("{inner:?}") };
    assert!(matches!(d1, Guard::KAnd(..)));
    assert_eq!(
        **last,
        Rule::Update {
            symbol: "d".into(),
            args: vec![],
            value: Term::constant("q_ask")
        }
    );
}

#[test]
fn compact_broker_round_trip() {
    let o = compact_broker();
    let (s, r) = round_trip(&o);
    assert!(r.is_equivalent(), "{}", serde_json::to_string_pretty(&r).unwrap());
    // Seven first rounds on one probe; on the other the offers coincide.
    assert_eq!(r.pairs, 8 + 4);
    assert_eq!(s.stats.pairs, r.pairs);
    let names: Vec<String> = s.program.external.iter().map(|(id, _)| id.name.clone()).collect();
    assert_eq!(names, vec!["q_offer_1", "q_timeout"]);
}

fn flip_first_update(r: &Rule) -> Rule {
    match r {
        Rule::Update { symbol, args, .. } => Rule::Update {
            symbol: symbol.clone(),
            args: args.clone(),
            value: Term::constant("false"),
        },
        Rule::Cond(g, a, b) => Rule::cond(g.clone(), flip_first_update(a), (**b).clone()),
        Rule::Par(rs) => Rule::Par(rs.iter().map(flip_first_update).collect()),
        other => other.clone(),
    }
}

#[test]
fn flipped_update_is_an_update_mismatch() {
    let o = builtin("constant-update").unwrap();
    let mut p = synthesize(&o, &cfg()).unwrap().program;
    p.rule = flip_first_update(&p.rule);
    let r = check_equivalence(&o, &p, 1000).unwrap();
    assert_eq!(r.count(ViolationKind::UpdateMismatch), 2);
    let j = serde_json::to_value(&r.violations[0]).unwrap();
    assert_eq!(j["kind"], "UpdateMismatch");
    assert_eq!(j["state"], 0);

    let fail = builtin("immediate-fail").unwrap();
    let skip = Program {
        rule: Rule::skip(),
        ..synthesize(&fail, &cfg()).unwrap().program
    };
    let r = check_equivalence(&fail, &skip, 1000).unwrap();
    assert_eq!(r.count(ViolationKind::VerdictMismatch), 1);
}

#[test]
fn table_oracles() {
    let c = TableOracle::from_json(&fixture("oracle_constant.json")).unwrap();
    let (s, r) = round_trip(&c);
    assert!(r.is_equivalent());
    assert!(s.program.to_source().contains("f() := true()"));

    let ask = TableOracle::from_json(&fixture("oracle_ask.json")).unwrap();
    let (_, r) = round_trip(&ask);
    assert!(r.is_equivalent(), "{:?}", r.violations);
    assert_eq!(r.pairs, 3);
    // Tables cannot answer for renamed probes, so nothing is checked.
    assert_eq!(check_equivariance(&ask, 100).unwrap(), 0);

    let mut j: serde_json::Value = serde_json::from_str(&fixture("oracle_ask.json")).unwrap();
    j["behavior"].as_array_mut().unwrap().pop();
    let partial = TableOracle::from_json(&j.to_string()).unwrap();
    assert!(matches!(
        synthesize(&partial, &cfg()),
        Err(SynthError::MissingBehavior { .. })
    ));
}

#[test]
fn equivariance_is_checked() {
    for name in builtin_names() {
        let o = builtin(name).unwrap();
        assert!(check_equivariance(&o, 100).unwrap() > 0, "{name}");
    }
    assert!(check_equivariance(&compact_broker(), 1000).unwrap() > 10);
    // Updating to a fixed element name is not invariant under renaming.
    let vocab = Vocabulary::new().with("d", 0, SymbolInfo::dynamic());
    let x = Structure::standard(&vocab, &["a"]);
    let odd = FnOracle::new("odd", vocab, vec![x], |x, _| {
        let value = if x.contains(&Elem::new("a")) { Elem::new("a") } else { x.undef_elem().clone() };
        Behavior::success(UpdateSet::single(Update {
            symbol: SymbolId::new("d", 0),
            args: vec![],
            value,
        }))
    });
    assert!(matches!(check_equivariance(&odd, 10), Err(SynthError::BadOracle { .. })));
}

#[test]
fn weak_witness_is_reported() {
    // An update to an element that no critical term names.
    let vocab = Vocabulary::new().with("d", 0, SymbolInfo::dynamic());
    let x = Structure::standard(&vocab, &["a"]);
    let o = FnOracle::new("unnamed", vocab, vec![x], |_, _| {
        Behavior::success(UpdateSet::single(Update {
            symbol: SymbolId::new("d", 0),
            args: vec![],
            value: Elem::new("a"),
        }))
    });
    assert!(matches!(
        synthesize(&o, &cfg()),
        Err(SynthError::WitnessTooWeak { .. })
    ));
}

#[test]
fn bounds_are_enforced() {
    // Still asking after the bound is exhausted.
    let vocab = Vocabulary::new();
    let x = Structure::standard(&vocab, &["yes"]);
    let o = FnOracle::new("chatty", vocab, vec![x], |_, h| {
        Behavior::pending([Query::labels(&[if h.is_empty() { "a" } else { "b" }])])
    })
    .with_labels(&["a", "b"])
    .with_universe(ReplyUniverse::uniform(&["yes"]));
    assert!(matches!(
        synthesize(&o, &cfg()),
        Err(SynthError::NotFinalWithinBound { .. })
    ));
    let long = FnOracle::new("long", Vocabulary::new(), vec![Structure::standard(&Vocabulary::new(), &[])], |_, _| {
        Behavior::pending([Query::labels(&["a", "b"])])
    });
    assert!(matches!(
        enumerate_attainable(&long, 1, 10),
        Err(SynthError::BadOracle { .. })
    ));
}
