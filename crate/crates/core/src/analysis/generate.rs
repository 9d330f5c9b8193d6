//! Seeded random programs, structures and histories for the lemma harness.

use std::collections::BTreeSet;

use rand::seq::{IteratorRandom, SliceRandom};
use rand::Rng;

use crate::engine::pending;
use crate::model::{
    Elem, ExternalVocabulary, History, Query, Round, Structure, SymbolId, SymbolInfo, Template,
    Vocabulary, LOGIC_NAMES,
};
use crate::syntax::{Guard, Program, Rule, Term};

/// Vocabulary shared by all generated programs.
pub fn generated_vocabulary() -> (Vocabulary, ExternalVocabulary) {
    let v = Vocabulary::new()
        .with("c0", 0, SymbolInfo::fixed())
        .with("c1", 0, SymbolInfo::fixed())
        .with("f", 1, SymbolInfo::fixed())
        .with("d", 0, SymbolInfo::dynamic())
        .with("g", 1, SymbolInfo::dynamic())
        .with("r", 0, SymbolInfo::dynamic().relational())
        .with("s", 1, SymbolInfo::dynamic().relational());
    let e = ExternalVocabulary::new()
        .with("p", Template::labelled("p", 0))
        .with("q", Template::labelled("q", 1))
        .with("w", Template::labelled("w", 2));
    (v, e)
}

struct Gen<'r, R: Rng> {
    rng: &'r mut R,
    vocab: Vocabulary,
    ext: ExternalVocabulary,
}

impl<R: Rng> Gen<'_, R> {
    fn symbols(&self, relational: bool) -> Vec<(String, usize)> {
        let mut out: Vec<(String, usize)> = self
            .vocab
            .user_symbols()
            .filter(|(_, i)| !relational || i.relational)
            .map(|(id, _)| (id.name.clone(), id.arity))
            .collect();
        out.extend(
            LOGIC_NAMES
                .iter()
                .filter(|(_, _, rel)| !relational || *rel)
                .map(|(n, a, _)| (n.to_string(), *a)),
        );
        out
    }

    fn externals(&self) -> Vec<(String, usize)> {
        self.ext.iter().map(|(id, _)| (id.name.clone(), id.arity)).collect()
    }

    fn term(&mut self, depth: u32) -> Term {
        let leaf = depth == 0 || self.rng.gen_bool(0.3);
        let r: f64 = self.rng.gen();
        let pool = if r < 0.4 { self.externals() } else { self.symbols(false) };
        let choices: Vec<_> = pool
            .into_iter()
            .filter(|(_, a)| !leaf || *a == 0)
            .collect();
        let (f, n) = choices.choose(self.rng).expect("nullary symbols exist").clone();
        Term::App(f, (0..n).map(|_| self.term(depth.saturating_sub(1))).collect())
    }

    fn bool_term(&mut self, depth: u32) -> Term {
        let choices: Vec<_> = self
            .symbols(true)
            .into_iter()
            .filter(|(_, a)| depth > 0 || *a == 0)
            .collect();
        let (f, n) = if self.rng.gen_bool(0.35) {
            ("Equal".to_string(), 2)
        } else {
            choices.choose(self.rng).expect("relational symbols exist").clone()
        };
        Term::App(f, (0..n).map(|_| self.term(depth.saturating_sub(1))).collect())
    }

    fn q_term(&mut self, depth: u32) -> Term {
        let (f, n) = self.externals().choose(self.rng).expect("externals exist").clone();
        Term::App(f, (0..n).map(|_| self.term(depth.saturating_sub(1))).collect())
    }

    fn guard(&mut self, depth: u32) -> Guard {
        let k = if depth == 0 { self.rng.gen_range(0..2) } else { self.rng.gen_range(0..5) };
        match k {
            0 => Guard::Bool(self.bool_term(2)),
            1 => {
                let s = if self.rng.gen_bool(0.8) { self.q_term(1) } else { self.term(1) };
                let t = if self.rng.gen_bool(0.8) { self.q_term(1) } else { self.term(1) };
                Guard::Timing(s, t)
            }
            2 => Guard::and(self.guard(depth - 1), self.guard(depth - 1)),
            3 => Guard::or(self.guard(depth - 1), self.guard(depth - 1)),
            _ => Guard::not(self.guard(depth - 1)),
        }
    }

    fn rule(&mut self, depth: u32) -> Rule {
        let k = if depth == 0 { self.rng.gen_range(0..3) } else { self.rng.gen_range(0..6) };
        match k {
            0 => self.rule_update(),
            1 => match self.q_term(1) {
                Term::App(symbol, args) => Rule::Issue { symbol, args },
                Term::Var(_) => unreachable!(),
            },
            2 => {
                if self.rng.gen_bool(0.5) {
                    Rule::Fail
                } else {
                    self.rule(0)
                }
            }
            3 | 4 => Rule::cond(self.guard(2), self.rule(depth - 1), self.rule(depth - 1)),
            _ => {
                let n = self.rng.gen_range(0..4);
                let mut rs: Vec<Rule> = (0..n).map(|_| self.rule(depth - 1)).collect();
                if self.rng.gen_bool(0.3) {
                    rs.push(Rule::Par(self.rival_updates().to_vec()));
                }
                Rule::Par(rs)
            }
        }
    }

    /// Two updates of one location, which clash when their values differ.
    fn rival_updates(&mut self) -> [Rule; 2] {
        let Rule::Update { symbol, args, .. } = self.rule_update() else {
            unreachable!()
        };
        let relational = self
            .vocab
            .info(&SymbolId::new(symbol.as_str(), args.len()))
            .is_some_and(|i| i.relational);
        let mut value = || if relational { self.bool_term(1) } else { self.term(1) };
        let (v0, v1) = (value(), value());
        [
            Rule::Update {
                symbol: symbol.clone(),
                args: args.clone(),
                value: v0,
            },
            Rule::Update {
                symbol,
                args,
                value: v1,
            },
        ]
    }

    fn rule_update(&mut self) -> Rule {
        let dynamic: Vec<(SymbolId, SymbolInfo)> = self
            .vocab
            .user_symbols()
            .filter(|(_, i)| !i.is_static)
            .map(|(id, i)| (id.clone(), *i))
            .collect();
        let (id, info) = dynamic.choose(self.rng).expect("dynamic symbols exist").clone();
        let args = (0..id.arity).map(|_| self.term(1)).collect();
        let value = if info.relational { self.bool_term(1) } else { self.term(2) };
        Rule::Update {
            symbol: id.name,
            args,
            value,
        }
    }
}

pub fn random_term<R: Rng>(rng: &mut R, depth: u32) -> Term {
    let (vocab, ext) = generated_vocabulary();
    Gen { rng, vocab, ext }.term(depth)
}

pub fn random_guard<R: Rng>(rng: &mut R, depth: u32) -> Guard {
    let (vocab, ext) = generated_vocabulary();
    Gen { rng, vocab, ext }.guard(depth)
}

/// A random well-formed program over [`generated_vocabulary`].
pub fn random_program<R: Rng>(rng: &mut R, depth: u32) -> Program {
    let (vocab, ext) = generated_vocabulary();
    let mut g = Gen {
        rng,
        vocab: vocab.clone(),
        ext: ext.clone(),
    };
    let rule = match g.rng.gen_range(0..3) {
        0 => g.rule(depth),
        _ => {
            let n = g.rng.gen_range(2..4);
            Rule::Par((0..n).map(|_| g.rule(depth.saturating_sub(1))).collect())
        }
    };
    let labels = ext.iter().flat_map(|(_, t)| t.labels().cloned()).collect();
    Program {
        vocab,
        labels,
        external: ext,
        rule,
    }
}

/// A random structure for `vocab`, with elements `e0..e{n-1}` beside the
/// three logic elements and every element of `extra`.
pub fn random_structure<R: Rng>(rng: &mut R, vocab: &Vocabulary, n: usize, extra: &[Elem]) -> Structure {
    let names: Vec<String> = (0..n).map(|i| format!("e{i}")).collect();
    let mut all: Vec<&str> = names.iter().map(String::as_str).collect();
    all.extend(extra.iter().map(|e| e.as_str()));
    let mut x = Structure::standard(vocab, &all);
    let elems: Vec<Elem> = x.elements().iter().cloned().collect();
    let pick = |rng: &mut R, relational: bool, x: &Structure| -> Elem {
        if relational {
            x.boolean(rng.gen()).clone()
        } else {
            elems.choose(rng).expect("nonempty").clone()
        }
    };
    for (id, info) in vocab.user_symbols() {
        let d = pick(rng, info.relational, &x);
        x.set_default(id, d).expect("declared symbol");
        if id.arity > 0 {
            for args in x.tuples(id.arity) {
                if rng.gen_bool(0.5) {
                    let v = pick(rng, info.relational, &x);
                    x.set(id, args, v).expect("valid entry");
                }
            }
        }
    }
    x
}

/// A nonempty random round answering some of `queries`.
fn random_round<R: Rng>(rng: &mut R, queries: &[Query], replies: &[Elem]) -> Round {
    let k = rng.gen_range(1..=queries.len());
    queries
        .choose_multiple(rng, k)
        .map(|q| (q.clone(), replies.choose(rng).expect("replies").clone()))
        .collect()
}

/// Grow a history by answering pending queries of `program`, possibly
/// continuing past finality. The result is coherent.
pub fn coherent_history<R: Rng>(
    rng: &mut R,
    program: &Program,
    x: &Structure,
    replies: &[Elem],
    max_len: usize,
) -> History {
    let len = rng.gen_range(0..=max_len);
    let mut h = History::empty();
    for _ in 0..len {
        let pend: Vec<Query> = match pending(x, &h, &program.external, &program.rule) {
            Ok(p) => p.into_iter().collect(),
            Err(_) => break,
        };
        if pend.is_empty() {
            break;
        }
        h = h.extend(random_round(rng, &pend, replies)).expect("fresh queries");
    }
    h
}

/// Every query an external symbol can form from the given elements, for
/// arities up to 2.
pub fn potential_queries(ext: &ExternalVocabulary, elems: &[Elem]) -> Vec<Query> {
    let mut out = Vec::new();
    for (id, tpl) in ext.iter() {
        let mut tuples: Vec<Vec<Elem>> = vec![Vec::new()];
        for _ in 0..id.arity {
            tuples = tuples
                .into_iter()
                .flat_map(|t| {
                    elems.iter().map(move |e| {
                        let mut t = t.clone();
                        t.push(e.clone());
                        t
                    })
                })
                .collect();
        }
        for t in tuples {
            if let Ok(q) = tpl.instantiate(&t) {
                out.push(q);
            }
        }
    }
    out
}

/// A history that mixes pending queries with arbitrary potential queries.
pub fn arbitrary_history<R: Rng>(
    rng: &mut R,
    program: &Program,
    x: &Structure,
    replies: &[Elem],
    max_len: usize,
) -> History {
    let elems: Vec<Elem> = x.elements().iter().cloned().collect();
    let noise = potential_queries(&program.external, &elems);
    let len = rng.gen_range(0..=max_len);
    let mut h = History::empty();
    for _ in 0..len {
        let mut pool: BTreeSet<Query> =
            pending(x, &h, &program.external, &program.rule).unwrap_or_default();
        pool.extend(noise.iter().filter(|q| !h.contains(q)).cloned().choose_multiple(rng, 3));
        let pool: Vec<Query> = pool.into_iter().collect();
        if pool.is_empty() {
            break;
        }
        h = h.extend(random_round(rng, &pool, replies)).expect("fresh queries");
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::validate;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_programs_are_well_formed() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let p = random_program(&mut rng, 3);
            let src = p.to_source();
            let sugar = crate::syntax::parse_program(&src).unwrap_or_else(|e| panic!("{e}\n{src}"));
            let diags = validate(&sugar);
            assert!(diags.is_empty(), "{diags:?}\n{src}");
            assert_eq!(Program::parse(&src).unwrap(), p);
        }
    }

    #[test]
    fn coherent_histories_are_coherent() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let p = random_program(&mut rng, 3);
            let x = random_structure(&mut rng, &p.vocab, 2, &[]);
            let replies: Vec<Elem> = x.elements().iter().take(2).cloned().collect();
            let h = coherent_history(&mut rng, &p, &x, &replies, 3);
            assert!(crate::engine::is_coherent(&x, &h, &p.external, &p.rule).unwrap());
        }
    }
}
