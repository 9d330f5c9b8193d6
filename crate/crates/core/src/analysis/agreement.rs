//! Agreement of two states on a witness, and construction of agreeing pairs.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;

use super::Witness;
use crate::model::{Elem, History, ModelError, Structure, SymbolId};
use crate::syntax::Term;

pub type Location = (SymbolId, Vec<Elem>);
pub type Assignment = BTreeMap<String, Elem>;

/// Value of an Υ-term with variables, recording the non-logic locations read.
pub fn eval_open(
    x: &Structure,
    t: &Term,
    env: &Assignment,
    touched: &mut BTreeSet<Location>,
) -> Result<Elem, ModelError> {
    match t {
        Term::Var(v) => env
            .get(v)
            .cloned()
            .ok_or_else(|| ModelError::UnknownSymbol(format!("variable {v}"))),
        Term::App(f, args) => {
            let vals = args
                .iter()
                .map(|a| eval_open(x, a, env, touched))
                .collect::<Result<Vec<_>, _>>()?;
            let id = SymbolId::new(f.as_str(), vals.len());
            if !crate::model::is_logic_name(&id) {
                touched.insert((id, vals.clone()));
            }
            x.lookup(f, &vals)
        }
    }
}

/// All maps from `vars` into `range`.
pub fn assignments(vars: &BTreeSet<String>, range: &[Elem]) -> Vec<Assignment> {
    let mut out = vec![Assignment::new()];
    for v in vars {
        out = out
            .into_iter()
            .flat_map(|a| {
                range.iter().map(move |e| {
                    let mut a = a.clone();
                    a.insert(v.clone(), e.clone());
                    a
                })
            })
            .collect();
    }
    out
}

/// Every witness term has the same value in `x` and `y` under every
/// assignment of its variables into the range of `h`.
pub fn agree_on(w: &Witness, x: &Structure, y: &Structure, h: &History) -> Result<bool, ModelError> {
    let range: Vec<Elem> = h.range().into_iter().collect();
    for t in w.terms() {
        for env in assignments(&t.vars(), &range) {
            let mut scratch = BTreeSet::new();
            if eval_open(x, t, &env, &mut scratch)? != eval_open(y, t, &env, &mut scratch)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Locations read while evaluating the witness in `x` under all assignments.
pub fn reachable_locations(w: &Witness, x: &Structure, h: &History) -> Result<BTreeSet<Location>, ModelError> {
    let range: Vec<Elem> = h.range().into_iter().collect();
    let mut touched = BTreeSet::new();
    for t in w.terms() {
        for env in assignments(&t.vars(), &range) {
            eval_open(x, t, &env, &mut touched)?;
        }
    }
    Ok(touched)
}

/// A state over the same elements that differs from `x` only at locations
/// the witness cannot reach. Relational symbols keep Boolean values.
pub fn agreeing_variant<R: Rng>(
    rng: &mut R,
    w: &Witness,
    x: &Structure,
    h: &History,
) -> Result<Structure, ModelError> {
    let reach = reachable_locations(w, x, h)?;
    let elems: Vec<Elem> = x.elements().iter().cloned().collect();
    let mut y = x.clone();
    let symbols: Vec<(SymbolId, bool)> = x
        .vocabulary()
        .user_symbols()
        .map(|(id, info)| (id.clone(), info.relational))
        .collect();
    for (id, relational) in symbols {
        for args in x.tuples(id.arity) {
            if reach.contains(&(id.clone(), args.clone())) || !rng.gen_bool(0.6) {
                continue;
            }
            let v = if relational {
                x.boolean(rng.gen()).clone()
            } else {
                elems.choose(rng).expect("nonempty").clone()
            };
            y.set(&id, args, v)?;
        }
    }
    Ok(y)
}
