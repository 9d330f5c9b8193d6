use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Elem, ModelError, Query, Structure};

/// One equivalence class of a history: queries answered simultaneously.
pub type Round = BTreeMap<Query, Elem>;

/// A finite history: an answer function together with a linear pre-order of
/// its domain, stored as the ordered list of its equivalence classes.
#[derive(Clone, Debug, Default)]
pub struct History {
    rounds: Vec<Round>,
    index: BTreeMap<Query, usize>,
}

impl PartialEq for History {
    fn eq(&self, other: &Self) -> bool {
        self.rounds == other.rounds
    }
}

impl Eq for History {}

impl Hash for History {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rounds.hash(state);
    }
}

impl PartialOrd for History {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for History {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rounds
            .len()
            .cmp(&other.rounds.len())
            .then_with(|| self.rounds.cmp(&other.rounds))
    }
}

impl History {
    pub fn empty() -> Self {
        History::default()
    }

    /// Validate a list of rounds into a history.
    pub fn new(rounds: Vec<Vec<(Query, Elem)>>) -> Result<Self, ModelError> {
        let mut h = History::empty();
        for round in rounds {
            let mut r = Round::new();
            for (q, a) in round {
                if r.insert(q.clone(), a).is_some() {
                    return Err(ModelError::DuplicateQuery(q));
                }
            }
            h = h.extend(r)?;
        }
        Ok(h)
    }

    /// Append one equivalence class at the end.
    pub fn extend(&self, round: Round) -> Result<History, ModelError> {
        if round.is_empty() {
            return Err(ModelError::EmptyRound);
        }
        let mut h = self.clone();
        let k = h.rounds.len();
        for q in round.keys() {
            if h.index.insert(q.clone(), k).is_some() {
                return Err(ModelError::DuplicateQuery(q.clone()));
            }
        }
        h.rounds.push(round);
        Ok(h)
    }

    /// Number of equivalence classes.
    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn rounds(&self) -> &[Round] {
        &self.rounds
    }

    /// The initial segment made of the first `m` rounds.
    pub fn prefix(&self, m: usize) -> Result<History, ModelError> {
        if m > self.rounds.len() {
            return Err(ModelError::OutOfRange {
                requested: m,
                length: self.rounds.len(),
            });
        }
        let rounds = self.rounds[..m].to_vec();
        let index = self
            .index
            .iter()
            .filter(|(_, &r)| r < m)
            .map(|(q, &r)| (q.clone(), r))
            .collect();
        Ok(History { rounds, index })
    }

    /// The truncation: all rounds but the last. `None` for the empty history.
    pub fn truncation(&self) -> Option<History> {
        self.len().checked_sub(1).map(|m| self.prefix(m).expect("in range"))
    }

    /// `ξ̇(q)`.
    pub fn answer(&self, q: &Query) -> Option<&Elem> {
        self.index.get(q).map(|&r| &self.rounds[r][q])
    }

    /// Answer as seen by the initial segment of length `horizon`.
    pub fn answer_within(&self, q: &Query, horizon: usize) -> Option<&Elem> {
        match self.index.get(q) {
            Some(&r) if r < horizon => Some(&self.rounds[r][q]),
            _ => None,
        }
    }

    /// 0-based index of the round containing `q`.
    pub fn round_of(&self, q: &Query) -> Option<usize> {
        self.index.get(q).copied()
    }

    /// `q ≤ξ q'`; `None` when either query is outside the domain.
    pub fn precedes_or_equals(&self, q: &Query, q2: &Query) -> Option<bool> {
        Some(self.round_of(q)? <= self.round_of(q2)?)
    }

    pub fn contains(&self, q: &Query) -> bool {
        self.index.contains_key(q)
    }

    pub fn domain(&self) -> impl Iterator<Item = &Query> {
        self.index.keys()
    }

    pub fn range(&self) -> BTreeSet<Elem> {
        self.rounds
            .iter()
            .flat_map(|r| r.values().cloned())
            .collect()
    }

    /// Total number of answered queries.
    pub fn size(&self) -> usize {
        self.index.len()
    }

    /// Check that every element mentioned lies in `x`.
    pub fn check_against(&self, x: &Structure) -> Result<(), ModelError> {
        for r in &self.rounds {
            for (q, a) in r {
                for e in q.elements().chain(std::iter::once(a)) {
                    if !x.contains(e) {
                        return Err(ModelError::ForeignElement(e.clone()));
                    }
                }
            }
        }
        Ok(())
    }

    /// Remove one query; drops its round if it becomes empty.
    pub fn without(&self, q: &Query) -> History {
        let rounds: Vec<Vec<(Query, Elem)>> = self
            .rounds
            .iter()
            .map(|r| {
                r.iter()
                    .filter(|(k, _)| *k != q)
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .collect::<Vec<_>>()
            })
            .filter(|r| !r.is_empty())
            .collect();
        History::new(rounds).expect("sub-history of a valid history")
    }

    pub(crate) fn map_elems(
        &self,
        mut rename: impl FnMut(&Elem) -> Result<Elem, ModelError>,
    ) -> Result<History, ModelError> {
        let mut rounds = Vec::with_capacity(self.rounds.len());
        for r in &self.rounds {
            let mut out = Vec::with_capacity(r.len());
            for (q, a) in r {
                out.push((q.map_elems(&mut rename)?, rename(a)?));
            }
            rounds.push(out);
        }
        History::new(rounds)
    }
}

#[derive(Serialize, Deserialize)]
struct EntryJson {
    query: Query,
    reply: String,
}

#[derive(Serialize, Deserialize)]
struct HistoryJson {
    rounds: Vec<Vec<EntryJson>>,
}

impl Serialize for History {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        HistoryJson {
            rounds: self
                .rounds
                .iter()
                .map(|r| {
                    r.iter()
                        .map(|(q, a)| EntryJson {
                            query: q.clone(),
                            reply: a.encoded(),
                        })
                        .collect()
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for History {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = HistoryJson::deserialize(d)?;
        let rounds = j
            .rounds
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|e| (e.query, Elem::decode(&e.reply)))
                    .collect()
            })
            .collect();
        History::new(rounds).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(l: &str) -> Query {
        Query::labels(&[l])
    }

    fn e(s: &str) -> Elem {
        Elem::new(s)
    }

    #[test]
    fn empty_history_has_length_zero() {
        assert_eq!(History::new(vec![]).unwrap().len(), 0);
    }

    #[test]
    fn rounds_encode_the_preorder() {
        let h = History::new(vec![
            vec![(q("q1"), e("a"))],
            vec![(q("q2"), e("b")), (q("q3"), e("b"))],
        ])
        .unwrap();
        assert_eq!(h.len(), 2);
        assert_eq!(h.precedes_or_equals(&q("q2"), &q("q3")), Some(true));
        assert_eq!(h.precedes_or_equals(&q("q3"), &q("q2")), Some(true));
        assert_eq!(h.precedes_or_equals(&q("q1"), &q("q2")), Some(true));
        assert_eq!(h.precedes_or_equals(&q("q2"), &q("q1")), Some(false));
    }

    #[test]
    fn duplicate_and_empty_rounds_rejected() {
        assert!(matches!(
            History::new(vec![vec![(q("q1"), e("a"))], vec![(q("q1"), e("b"))]]),
            Err(ModelError::DuplicateQuery(_))
        ));
        assert!(matches!(
            History::new(vec![vec![]]),
            Err(ModelError::EmptyRound)
        ));
    }

    #[test]
    fn prefixes() {
        let h = History::new(vec![vec![(q("q1"), e("a"))], vec![(q("q2"), e("b"))]]).unwrap();
        assert_eq!(h.prefix(0).unwrap(), History::empty());
        assert_eq!(h.prefix(2).unwrap(), h);
        assert_eq!(
            h.prefix(1).unwrap(),
            History::new(vec![vec![(q("q1"), e("a"))]]).unwrap()
        );
        assert!(matches!(h.prefix(3), Err(ModelError::OutOfRange { .. })));
        assert_eq!(h.prefix(1).unwrap().answer(&q("q2")), None);
        assert_eq!(h.answer_within(&q("q2"), 1), None);
        assert_eq!(h.answer_within(&q("q2"), 2), Some(&e("b")));
    }

    #[test]
    fn json_shape() {
        let h = History::new(vec![vec![(q("q0"), e("yes"))]]).unwrap();
        let s = serde_json::to_string(&h).unwrap();
        assert_eq!(s, r#"{"rounds":[[{"query":["l:q0"],"reply":"e:yes"}]]}"#);
        let back: History = serde_json::from_str(&s).unwrap();
        assert_eq!(back, h);
    }
}
