//! Exhaustive enumeration of short histories on tiny instances.

use std::collections::BTreeSet;

use super::generate::potential_queries;
use crate::engine::{issued, pending};
use crate::eval::EvalError;
use crate::model::{Elem, History, Query, Round, Structure};
use crate::syntax::Program;

/// Every history of at most `max_len` rounds whose rounds answer nonempty
/// sets of queries with replies from `replies`. Each round draws from the
/// pending queries plus up to `noise` never-issued potential queries, so the
/// histories need not be coherent.
pub fn enumerate_histories(
    program: &Program,
    x: &Structure,
    replies: &[Elem],
    max_len: usize,
    noise: usize,
) -> Result<Vec<History>, EvalError> {
    let elems: Vec<Elem> = x.elements().iter().cloned().collect();
    let extra = potential_queries(&program.external, &elems);
    let mut out = Vec::new();
    let mut frontier = vec![History::empty()];
    for _ in 0..=max_len {
        let mut next = Vec::new();
        for h in frontier {
            if h.len() < max_len {
                let mut pool: BTreeSet<Query> = pending(x, &h, &program.external, &program.rule)?;
                let fresh: Vec<Query> = extra
                    .iter()
                    .filter(|q| !h.contains(q) && !pool.contains(q))
                    .take(noise)
                    .cloned()
                    .collect();
                pool.extend(fresh);
                for round in rounds(&pool.into_iter().collect::<Vec<_>>(), replies) {
                    next.push(h.extend(round).expect("fresh queries"));
                }
            }
            out.push(h);
        }
        frontier = next;
    }
    Ok(out)
}

/// All nonempty answer maps over subsets of `pool`.
pub fn rounds(pool: &[Query], replies: &[Elem]) -> Vec<Round> {
    let mut out = vec![Round::new()];
    for q in pool {
        let mut grown = Vec::with_capacity(out.len() * (replies.len() + 1));
        for r in &out {
            grown.push(r.clone());
            for a in replies {
                let mut r = r.clone();
                r.insert(q.clone(), a.clone());
                grown.push(r);
            }
        }
        out = grown;
    }
    out.retain(|r| !r.is_empty());
    out
}

/// Largest issued set over [`enumerate_histories`].
pub fn max_issued(
    program: &Program,
    x: &Structure,
    replies: &[Elem],
    max_len: usize,
    noise: usize,
) -> Result<usize, EvalError> {
    let mut best = 0;
    for h in enumerate_histories(program, x, replies, max_len, noise)? {
        best = best.max(issued(x, &h, &program.external, &program.rule)?.len());
    }
    Ok(best)
}
