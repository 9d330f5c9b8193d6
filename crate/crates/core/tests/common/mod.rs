#![allow(dead_code)]

use std::path::PathBuf;

use iasm_core::model::{Elem, History, Query, Structure, Token};
use iasm_core::syntax::Program;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn program(name: &str) -> Program {
    Program::parse(&fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn state(name: &str) -> Structure {
    serde_json::from_str(&fixture(name)).unwrap()
}

pub fn e(s: &str) -> Elem {
    Elem::new(s)
}

/// Query from `l:`/`e:` tokens.
pub fn q(tokens: &[&str]) -> Query {
    Query::new(tokens.iter().map(|t| t.parse::<Token>().unwrap()).collect()).unwrap()
}

pub fn hist(rounds: &[&[(Query, &str)]]) -> History {
    History::new(
        rounds
            .iter()
            .map(|r| r.iter().map(|(q, a)| (q.clone(), e(a))).collect())
            .collect(),
    )
    .unwrap()
}

pub fn broker_q0() -> Query {
    q(&["l:q0", "e:stock", "e:price", "e:amount"])
}

pub fn broker_q1() -> Query {
    q(&["l:q1", "e:stock", "e:price", "e:amount"])
}

pub fn broker_t() -> Query {
    q(&["l:t"])
}

pub fn upd(symbol: &str, args: &[&str], value: &str) -> iasm_core::model::Update {
    iasm_core::model::Update {
        symbol: iasm_core::model::SymbolId::new(symbol, args.len()),
        args: args.iter().map(|a| e(a)).collect(),
        value: e(value),
    }
}

pub fn updates(items: &[iasm_core::model::Update]) -> iasm_core::model::UpdateSet {
    let mut s = iasm_core::model::UpdateSet::new();
    for u in items {
        s.insert(u.clone());
    }
    s
}

pub fn sell_to_0() -> iasm_core::model::UpdateSet {
    updates(&[upd("buyer", &[], "client0"), upd("sold", &[], "true")])
}

pub fn sell_to_1() -> iasm_core::model::UpdateSet {
    updates(&[upd("buyer", &[], "client1"), upd("sold", &[], "true")])
}

pub fn cancel() -> iasm_core::model::UpdateSet {
    updates(&[upd("cancelled", &[], "true")])
}
