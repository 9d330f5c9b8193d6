//! One line per acceptance criterion, then a nonzero exit if any failed.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use common::*;
use iasm_core::analysis::agreement::{agree_on, agreeing_variant};
use iasm_core::analysis::exhaustive::max_issued;
use iasm_core::analysis::generate::{coherent_history, random_program, random_structure};
use iasm_core::analysis::*;
use iasm_core::engine::{step, ReplyUniverse, ScriptedEnv, StepVerdict};
use iasm_core::eval::{Evaluator, Mutant};
use iasm_core::model::*;
use iasm_core::syntax::{desugar_guard, parse_guard, Program};
use iasm_core::synthesis::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:?}, limit {limit:?}"))
}

fn broker_golden() -> Outcome {
    let start = Instant::now();
    let p = program("broker.asm");
    let x = state("broker_state.json");
    let scripts = [
        ("broker_env_q0.json", sell_to_0(), "q0 first"),
        ("broker_env_tie.json", sell_to_0(), "q0 and q1 together"),
        ("broker_env_timeout.json", cancel(), "timeout only"),
    ];
    for (file, want, what) in &scripts {
        let mut env = ScriptedEnv::from_json(&fixture(file)).map_err(|e| e.to_string())?;
        let r = step(&x, &p, &mut env, 0).map_err(|e| e.to_string())?;
        ensure(r.verdict == StepVerdict::Success, || format!("{what}: verdict {:?}", r.verdict))?;
        ensure(&r.updates == want, || format!("{what}: updates {:?}", r.updates))?;
    }
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok("3 scripts, exact update sets".into())
}

fn timing_example() -> Outcome {
    let p = program("timing.asm");
    let mut x = Structure::standard(&p.vocab, &["0"]);
    x.set_default(&SymbolId::new("zero", 0), e("0")).map_err(|e| e.to_string())?;
    let h = hist(&[
        &[(q(&["l:p", "e:0"]), "true")],
        &[(q(&["l:q"]), "true")],
        &[(q(&["l:r"]), "0")],
    ]);
    let ev = Evaluator::new(&x, &h, &p.external);
    for src in ["p(zero) prec q", "q prec p(r)"] {
        let g = parse_guard(src).map_err(|e| e.to_string())?;
        let g = desugar_guard(&g).map_err(|e| e.to_string())?;
        let v = ev.guard(&g).map_err(|e| e.to_string())?;
        ensure(v.truth == Some(true), || format!("{src} is {:?}", v.truth))?;
    }
    Ok("both guards true".into())
}

const SUITES: [Check; 6] = [
    Check::ValueIffNoQuery,
    Check::NoRepeat,
    Check::Monotonicity,
    Check::NoClash,
    Check::Isomorphism,
    Check::ParPermutation,
];

const MUTANTS: [Mutant; 6] = [
    Mutant::DropArgQueries,
    Mutant::IssueIgnoresAnswered,
    Mutant::TimingUnvaluedFalse,
    Mutant::ClashIgnored,
    Mutant::OrderedEqual,
    Mutant::ParFirstWins,
];

fn lemma_suites() -> Outcome {
    let start = Instant::now();
    let programs = 5;
    let cfg = HarnessConfig {
        seed: 2024,
        cases: 500,
        checks: SUITES.to_vec(),
        ..Default::default()
    };
    let r = check_generated(&cfg, programs, 3);
    for c in SUITES {
        let rep = r.check(c).ok_or_else(|| format!("{} missing", c.name()))?;
        ensure(rep.cases >= 500 * programs, || format!("{}: {} cases", c.name(), rep.cases))?;
        ensure(rep.failed == 0, || format!("{}: {} failures", c.name(), rep.failed))?;
        ensure(rep.nontrivial > 0, || format!("{}: vacuous", c.name()))?;
    }
    for m in MUTANTS {
        let check = catching_check(m);
        let cfg = HarnessConfig {
            seed: 9,
            cases: 100,
            mutant: Some(m),
            checks: vec![check],
            ..Default::default()
        };
        let r = check_generated(&cfg, programs, 3);
        let failed = r.check(check).map_or(0, |c| c.failed);
        ensure(failed > 0, || format!("mutant {m:?} escaped {}", check.name()))?;
    }
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!("6 suites x {} cases over {programs} programs, 6/6 mutants caught", 500 * programs))
}

const DECLS: &str = "static k/0, h/1, m/2; dynamic f/0, g/1; dynamic relational r/0; \
                     external q0/0, q1/0, ask/1;";

fn bounded_work() -> Outcome {
    // Worked out by hand from the recursions.
    let hand: [(&str, usize); 10] = [
        ("rule fail", 0),
        ("rule skip", 0),
        ("rule issue q0", 1),
        ("rule f := k", 1),
        ("rule if (q0 preceq q1) then fail else fail endif", 2),
        ("rule g(h(k)) := q0", 3),
        ("rule issue ask(ask(q0))", 3),
        ("rule if r then issue q0 else par { issue q1 ; fail } endif", 3),
        ("rule if q0 approx q1 then skip endif", 4),
        ("rule if knot q0! kor (q0 preceq ask(k)) then f := m(k, q1) endif", 9),
    ];
    for (src, want) in hand {
        let p = Program::parse(&format!("{DECLS} {src}")).map_err(|e| e.to_string())?;
        let got = bound_rule(&p.rule);
        ensure(got == want, || format!("B({src}) = {got}, expected {want}"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let generated = 40;
    for _ in 0..generated {
        let p = random_program(&mut rng, 2);
        let x = random_structure(&mut rng, &p.vocab, 1, &[]);
        let replies = [e("e0"), e("true")];
        let most = max_issued(&p, &x, &replies, 2, 0).map_err(|e| e.to_string())?;
        let b = bound_rule(&p.rule);
        ensure(most <= b, || format!("{most} issued > B = {b}: {}", p.to_source()))?;
    }
    Ok(format!("10 hand fixtures, {generated} programs exhaustively"))
}

fn witness_agreement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut programs = vec![program("broker.asm")];
    programs.extend((0..6).map(|_| random_program(&mut rng, 3)));
    let mut pairs = 0;
    for (i, p) in programs.iter().enumerate() {
        let w = witness_rule(&p.rule, &p.external).normalized();
        for _ in 0..30 {
            let x = if i == 0 {
                state("broker_state.json").conform(&p.vocab).map_err(|e| e.to_string())?
            } else {
                random_structure(&mut rng, &p.vocab, 3, &[])
            };
            let replies: Vec<Elem> = x.elements().iter().take(2).cloned().collect();
            let h = coherent_history(&mut rng, p, &x, &replies, 2);
            let y = agreeing_variant(&mut rng, &w, &x, &h).map_err(|e| e.to_string())?;
            if !differs(&x, &y) {
                continue;
            }
            ensure(agree_on(&w, &x, &y, &h).map_err(|e| e.to_string())?, || "variant disagrees on W".into())?;
            let a = p.eval(&x, &h).map_err(|e| e.to_string())?;
            let b = p.eval(&y, &h).map_err(|e| e.to_string())?;
            ensure(a == b, || format!("outcomes differ for {}: {a:?} vs {b:?}", p.to_source()))?;
            pairs += 1;
        }
    }
    ensure(pairs >= 50, || format!("only {pairs} agreeing pairs"))?;
    Ok(format!("{pairs} agreeing pairs, identical outcomes"))
}

fn compact_broker() -> ProgramOracle {
    let p = program("compact_broker.asm");
    let x = state("compact_broker_state.json");
    let twin = state("compact_broker_twin.json");
    ProgramOracle::new("compact-broker", p, vec![x, twin], ReplyUniverse::uniform(&["yes"])).with_bound(2)
}

fn synthesis_round_trip() -> Outcome {
    let start = Instant::now();
    let mut oracles: Vec<Box<dyn AlgorithmOracle>> = ["constant-update", "immediate-fail", "one-query-then-update"]
        .iter()
        .map(|n| Box::new(builtin(n).expect("builtin")) as Box<dyn AlgorithmOracle>)
        .collect();
    oracles.push(Box::new(compact_broker()));
    let mut pairs = 0;
    for o in &oracles {
        ensure(o.bound() <= 2, || format!("{}: B = {}", o.name(), o.bound()))?;
        for x in o.probes() {
            for qq in oracle_issued(o.as_ref(), x, &History::empty()).map_err(|e| e.to_string())? {
                let n = o.reply_universe().replies_for(&qq, x).len();
                ensure(n <= 2, || format!("{}: {n} replies", o.name()))?;
            }
        }
        let s = synthesize(o.as_ref(), &SynthConfig::default()).map_err(|e| format!("{}: {e}", o.name()))?;
        let r = check_equivalence(o.as_ref(), &s.program, 100_000).map_err(|e| e.to_string())?;
        ensure(r.is_equivalent(), || format!("{}: {} violations", o.name(), r.violations.len()))?;
        ensure(r.pairs > 0, || format!("{}: no pairs compared", o.name()))?;
        pairs += r.pairs;
    }
    within(start.elapsed(), Duration::from_secs(300))?;
    Ok(format!("{} oracles, {pairs} jointly attainable pairs, 0 violations", oracles.len()))
}

/// Tuples of length at most `bound` over labels and `#1..#bound` whose
/// placeholders read `#1, #2, ..` left to right.
fn brute_force_templates(labels: &[&str], bound: usize) -> BTreeSet<Vec<String>> {
    let mut alphabet: Vec<String> = labels.iter().map(|l| l.to_string()).collect();
    alphabet.extend((1..=bound).map(|i| format!("#{i}")));
    let mut out = BTreeSet::new();
    let mut layer = vec![Vec::<String>::new()];
    for _ in 0..=bound {
        out.extend(layer.iter().cloned());
        layer = layer
            .iter()
            .flat_map(|p| alphabet.iter().map(move |a| [p.clone(), vec![a.clone()]].concat()))
            .collect();
    }
    out.retain(|seq| {
        seq.iter()
            .filter(|s| s.starts_with('#'))
            .enumerate()
            .all(|(i, p)| *p == format!("#{}", i + 1))
    });
    out
}

/// Sum over lengths n and placeholder counts k of C(n, k) * |labels|^(n-k).
fn closed_form_count(labels: usize, bound: usize) -> usize {
    let choose = |n: usize, k: usize| (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1));
    (0..=bound)
        .map(|n| (0..=n).map(|k| choose(n, k) * labels.pow((n - k) as u32)).sum::<usize>())
        .sum()
}

fn template_count() -> Outcome {
    let labels = BTreeSet::from([Label::new("l")]);
    let got = standard_templates(&labels, 2);
    let brute = brute_force_templates(&["l"], 2);
    let printed: BTreeSet<Vec<String>> = got
        .iter()
        .map(|t| {
            t.items()
                .iter()
                .map(|it| match it {
                    TemplateItem::Label(l) => l.0.clone(),
                    TemplateItem::Placeholder(i) => format!("#{i}"),
                })
                .collect()
        })
        .collect();
    ensure(got.len() == 7, || format!("{} templates", got.len()))?;
    ensure(printed == brute, || format!("{printed:?} != {brute:?}"))?;
    ensure(closed_form_count(1, 2) == 7, || "closed form disagrees".into())?;
    Ok("7 templates, equal to brute force".into())
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("broker golden suite", broker_golden),
        ("timing example", timing_example),
        ("lemma property suites", lemma_suites),
        ("bounded work", bounded_work),
        ("witness agreement", witness_agreement),
        ("synthesis round trip", synthesis_round_trip),
        ("standard template count", template_count),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let r = run();
        let ms = start.elapsed().as_secs_f64() * 1e3;
        match r {
            Ok(detail) => println!("PASS  {name}: {detail} ({ms:.0} ms)"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why} ({ms:.0} ms)");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
