mod common;

use std::collections::BTreeSet;

use common::*;
use iasm_core::eval::*;
use iasm_core::model::*;
use iasm_core::syntax::*;

fn ext_q0() -> ExternalVocabulary {
    ExternalVocabulary::new().with("q0", Template::labelled("q0", 0))
}

fn plain_state() -> Structure {
    Structure::standard(&Vocabulary::new(), &["yes", "no"])
}

fn g(src: &str) -> Guard {
    desugar_guard(&parse_guard(src).unwrap()).unwrap()
}

#[test]
fn closed_logic_term() {
    let x = plain_state();
    let r = eval_term(&x, &History::empty(), &ext_q0(), &Term::constant("true")).unwrap();
    assert_eq!(r.value, Some(x.true_elem().clone()));
    assert!(r.caused.is_empty());
    assert_eq!(r.qvalue, None);
}

#[test]
fn answered_and_unanswered_q_term() {
    let x = plain_state();
    let ext = ext_q0();
    let t = Term::constant("q0");
    let h = hist(&[&[(q(&["l:q0"]), "yes")]]);
    let r = eval_term(&x, &h, &ext, &t).unwrap();
    assert_eq!(r.value, Some(e("yes")));
    assert_eq!(r.qvalue, Some(q(&["l:q0"])));
    assert!(r.caused.is_empty());

    let r = eval_term(&x, &History::empty(), &ext, &t).unwrap();
    assert_eq!(r.value, None);
    assert_eq!(r.caused, BTreeSet::from([q(&["l:q0"])]));
}

#[test]
fn unvalued_argument_propagates_its_queries() {
    let x = plain_state();
    let ext = ExternalVocabulary::new()
        .with("q0", Template::labelled("q0", 0))
        .with("ask", Template::labelled("ask", 1));
    let t = Term::app("ask", vec![Term::constant("q0")]);
    let r = eval_term(&x, &History::empty(), &ext, &t).unwrap();
    assert_eq!(r.value, None);
    assert_eq!(r.qvalue, None);
    assert_eq!(r.caused, BTreeSet::from([q(&["l:q0"])]));

    let h = hist(&[&[(q(&["l:q0"]), "yes")]]);
    let r = eval_term(&x, &h, &ext, &t).unwrap();
    assert_eq!(r.qvalue, Some(q(&["l:ask", "e:yes"])));
    assert_eq!(r.caused, BTreeSet::from([q(&["l:ask", "e:yes"])]));
}

#[test]
fn unknown_symbol_and_arity_errors() {
    let x = plain_state();
    let h = History::empty();
    assert!(matches!(
        eval_term(&x, &h, &ext_q0(), &Term::constant("nope")),
        Err(EvalError::UnknownSymbol(_))
    ));
    assert!(eval_term(&x, &h, &ext_q0(), &Term::app("q0", vec![Term::constant("true")])).is_err());
}

#[test]
fn timing_example() {
    let p = program("timing.asm");
    let mut x = Structure::standard(&p.vocab, &["0"]);
    x.set_default(&SymbolId::new("zero", 0), e("0")).unwrap();
    let h = hist(&[
        &[(q(&["l:p", "e:0"]), "true")],
        &[(q(&["l:q"]), "true")],
        &[(q(&["l:r"]), "0")],
    ]);
    let ev = Evaluator::new(&x, &h, &p.external);
    let first = ev.guard(&g("p(zero) prec q")).unwrap();
    let second = ev.guard(&g("q prec p(r)")).unwrap();
    assert_eq!(first.truth, Some(true));
    assert_eq!(second.truth, Some(true));
    assert!(first.caused.is_empty() && second.caused.is_empty());
    let out = p.eval(&x, &h).unwrap();
    assert!(out.succeeds());
    assert_eq!(out.updates, updates(&[upd("seen", &[], "true")]));

    // Swapping the first two rounds flips the first guard only.
    let swapped = hist(&[
        &[(q(&["l:q"]), "true")],
        &[(q(&["l:p", "e:0"]), "true")],
        &[(q(&["l:r"]), "0")],
    ]);
    let ev = Evaluator::new(&x, &swapped, &p.external);
    assert_eq!(ev.guard(&g("p(zero) prec q")).unwrap().truth, Some(false));
    assert_eq!(ev.guard(&g("q prec p(r)")).unwrap().truth, Some(true));
}

#[test]
fn timing_clauses() {
    let x = plain_state();
    let ext = ExternalVocabulary::new()
        .with("a", Template::labelled("a", 0))
        .with("b", Template::labelled("b", 0));
    let qa = q(&["l:a"]);
    let qb = q(&["l:b"]);
    let t = g("a preceq b");
    let truth = |h: &History| eval_guard(&x, h, &ext, &t).unwrap();

    let none = truth(&History::empty());
    assert_eq!(none.truth, None);
    assert_eq!(none.caused, BTreeSet::from([qa.clone(), qb.clone()]));
    assert_eq!(truth(&hist(&[&[(qa.clone(), "yes")]])).truth, Some(true));
    assert_eq!(truth(&hist(&[&[(qb.clone(), "yes")]])).truth, Some(false));
    assert_eq!(truth(&hist(&[&[(qa.clone(), "yes"), (qb.clone(), "no")]])).truth, Some(true));
    assert_eq!(truth(&hist(&[&[(qb.clone(), "no")], &[(qa.clone(), "yes")]])).truth, Some(false));
    assert_eq!(truth(&hist(&[&[(qa.clone(), "no")], &[(qb, "yes")]])).truth, Some(true));
}

#[test]
fn kleene_dominance() {
    let x = plain_state();
    let ext = ext_q0();
    let h = History::empty();
    let ev = Evaluator::new(&x, &h, &ext);
    let r = ev.guard(&g("false kand q0!")).unwrap();
    assert_eq!(r.truth, Some(false));
    assert!(r.caused.is_empty());
    let r = ev.guard(&g("true kor q0!")).unwrap();
    assert_eq!(r.truth, Some(true));
    let r = ev.guard(&g("true kand q0!")).unwrap();
    assert_eq!(r.truth, None);
    assert_eq!(r.caused, BTreeSet::from([q(&["l:q0"])]));
    let r = ev.guard(&g("knot q0!")).unwrap();
    assert_eq!(r.caused, BTreeSet::from([q(&["l:q0"])]));
}

/// Strong Kleene tables written out independently of the evaluator.
fn kleene_and(a: Option<bool>, b: Option<bool>) -> Option<bool> {
    match (a, b) {
        (Some(false), _) | (_, Some(false)) => Some(false),
        (Some(true), Some(true)) => Some(true),
        _ => None,
    }
}

fn kleene_or(a: Option<bool>, b: Option<bool>) -> Option<bool> {
    kleene_and(a.map(|v| !v), b.map(|v| !v)).map(|v| !v)
}

#[test]
fn kleene_truth_tables_exhaustive() {
    let x = plain_state();
    let ext = ext_q0();
    let h = History::empty();
    let ev = Evaluator::new(&x, &h, &ext);
    let leaves = [("true", Some(true)), ("false", Some(false)), ("q0!", None)];
    for (sa, va) in leaves {
        for (sb, vb) in leaves {
            let and = ev.guard(&g(&format!("{sa} kand {sb}"))).unwrap().truth;
            let or = ev.guard(&g(&format!("{sa} kor {sb}"))).unwrap().truth;
            assert_eq!(and, kleene_and(va, vb), "{sa} kand {sb}");
            assert_eq!(or, kleene_or(va, vb), "{sa} kor {sb}");
        }
        let not = ev.guard(&g(&format!("knot {sa}"))).unwrap().truth;
        assert_eq!(not, va.map(|v| !v));
    }
}

#[test]
fn bool_guard_is_true_only_on_true() {
    let p = Program::parse("static k/0; rule skip").unwrap();
    let x = Structure::standard(&p.vocab, &["k"]);
    let h = History::empty();
    let ev = Evaluator::new(&x, &h, &p.external);
    assert_eq!(ev.guard(&Guard::Bool(Term::constant("undef"))).unwrap().truth, Some(false));
    assert_eq!(ev.guard(&Guard::Bool(Term::constant("k"))).unwrap().truth, Some(false));
}

#[test]
fn rule_fail() {
    let x = plain_state();
    let out = eval_rule(&x, &History::empty(), &ext_q0(), &Rule::Fail).unwrap();
    assert!(out.is_final && out.fails());
    assert!(out.caused.is_empty() && out.updates.is_empty() && !out.clash);
}

#[test]
fn rule_clash() {
    let p = Program::parse("dynamic relational f/0; rule par { f := true ; f := false }").unwrap();
    let x = Structure::standard(&p.vocab, &[]);
    let out = p.eval(&x, &History::empty()).unwrap();
    assert!(out.is_final && out.fails() && out.clash);
    assert_eq!(out.updates, updates(&[upd("f", &[], "true"), upd("f", &[], "false")]));
}

#[test]
fn issue_respects_answered_queries() {
    let p = Program::parse("external q0/0; rule issue q0").unwrap();
    let x = plain_state();
    let out = p.eval(&x, &History::empty()).unwrap();
    assert!(out.is_final && out.succeeds());
    assert_eq!(out.caused, BTreeSet::from([q(&["l:q0"])]));
    let out = p.eval(&x, &hist(&[&[(q(&["l:q0"]), "yes")]])).unwrap();
    assert!(out.succeeds() && out.caused.is_empty());
}

#[test]
fn broker_evaluation_by_history() {
    let p = program("broker.asm");
    let x = state("broker_state.json");
    let ev = |h: &History| p.eval(&x, h).unwrap();

    let start = ev(&History::empty());
    assert!(!start.is_final);
    assert_eq!(start.caused, BTreeSet::from([broker_q0(), broker_q1(), broker_t()]));

    let out = ev(&hist(&[&[(broker_q0(), "yes")], &[(broker_t(), "ok")]]));
    assert!(out.succeeds());
    assert_eq!(out.updates, sell_to_0());

    let out = ev(&hist(&[&[(broker_q0(), "yes"), (broker_q1(), "yes")]]));
    assert_eq!(out.updates, sell_to_0());

    let out = ev(&hist(&[&[(broker_q1(), "yes")]]));
    assert!(out.succeeds());
    assert_eq!(out.updates, sell_to_1());

    let out = ev(&hist(&[&[(broker_t(), "ok")]]));
    assert!(out.succeeds());
    assert_eq!(out.updates, cancel());

    // A reply that arrives together with the timeout still counts.
    let out = ev(&hist(&[&[(broker_t(), "ok"), (broker_q1(), "yes")]]));
    assert_eq!(out.updates, sell_to_1());
}

#[test]
fn memoized_horizons_agree_with_prefixes() {
    let p = program("broker.asm");
    let x = state("broker_state.json");
    let h = hist(&[&[(broker_t(), "ok")], &[(broker_q0(), "yes")]]);
    let ev = Evaluator::new(&x, &h, &p.external);
    for m in 0..=h.len() {
        let pre = h.prefix(m).unwrap();
        assert_eq!(ev.rule_at(&p.rule, m).unwrap(), p.eval(&x, &pre).unwrap(), "m = {m}");
    }
}

#[test]
fn outcome_json_shape() {
    let p = program("counter.asm");
    let x = Structure::standard(&p.vocab, &[]);
    let j = serde_json::to_value(p.eval(&x, &History::empty()).unwrap()).unwrap();
    assert_eq!(j["final"], true);
    assert_eq!(j["verdict"], "Success");
    assert_eq!(j["clash"], false);
    assert!(j["caused"].as_array().unwrap().is_empty());
}
