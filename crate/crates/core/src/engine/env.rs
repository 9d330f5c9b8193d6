use std::collections::{BTreeMap, BTreeSet};
use std::sync::mpsc::{Receiver, Sender};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{Elem, History, Query, Round, Structure};

/// What an environment may look at when choosing the next round.
pub struct StepView<'a> {
    pub state: &'a Structure,
    pub history: &'a History,
    pub step_index: usize,
}

pub trait Environment {
    /// The next batch of simultaneous replies, or `None` to stop replying.
    /// Every query in the round must be pending.
    fn next_round(&mut self, pending: &BTreeSet<Query>, view: &StepView<'_>) -> Option<Round>;
}

/// One reply on the wire.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplyEntry {
    pub query: Query,
    pub reply: String,
}

impl ReplyEntry {
    pub fn new(query: Query, reply: &Elem) -> Self {
        ReplyEntry {
            query,
            reply: reply.encoded(),
        }
    }
}

pub fn round_to_entries(r: &Round) -> Vec<ReplyEntry> {
    r.iter().map(|(q, a)| ReplyEntry::new(q.clone(), a)).collect()
}

pub fn entries_to_round(entries: &[ReplyEntry]) -> Round {
    entries
        .iter()
        .map(|e| (e.query.clone(), Elem::decode(&e.reply)))
        .collect()
}

/// Hands out a fixed list of rounds in order, across steps.
#[derive(Clone, Debug, Default)]
pub struct ScriptedEnv {
    rounds: Vec<Round>,
    next: usize,
}

#[derive(Serialize, Deserialize)]
struct ScriptJson {
    rounds: Vec<Vec<ReplyEntry>>,
}

impl ScriptedEnv {
    pub fn new(rounds: Vec<Round>) -> Self {
        ScriptedEnv { rounds, next: 0 }
    }

    /// Reads `{"rounds": [[{"query": [...], "reply": "e:x"}, ...], ...]}`.
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        let j: ScriptJson = serde_json::from_str(text)?;
        Ok(ScriptedEnv::new(j.rounds.iter().map(|r| entries_to_round(r)).collect()))
    }

    pub fn remaining(&self) -> usize {
        self.rounds.len() - self.next
    }
}

impl Environment for ScriptedEnv {
    fn next_round(&mut self, _pending: &BTreeSet<Query>, _view: &StepView<'_>) -> Option<Round> {
        let r = self.rounds.get(self.next).cloned()?;
        self.next += 1;
        Some(r)
    }
}

/// Replies drawn from a finite universe with a seeded generator. Each round
/// answers a random nonempty subset of the pending queries.
#[derive(Clone, Debug)]
pub struct RandomEnv {
    rng: ChaCha8Rng,
    universe: ReplyUniverse,
}

/// Possible replies: per query shape (see [`Query::shape`]), with a fallback.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplyUniverse {
    #[serde(default)]
    pub by_shape: BTreeMap<String, Vec<Elem>>,
    #[serde(default)]
    pub default: Vec<Elem>,
}

impl ReplyUniverse {
    pub fn uniform(replies: &[&str]) -> Self {
        ReplyUniverse {
            by_shape: BTreeMap::new(),
            default: replies.iter().map(|r| Elem::new(*r)).collect(),
        }
    }

    /// Replies for `q`; the state's elements when nothing is configured.
    pub fn replies_for(&self, q: &Query, x: &Structure) -> Vec<Elem> {
        if let Some(r) = self.by_shape.get(&q.shape()) {
            return r.clone();
        }
        if !self.default.is_empty() {
            return self.default.clone();
        }
        x.elements().iter().cloned().collect()
    }
}

impl RandomEnv {
    pub fn new(seed: u64, universe: ReplyUniverse) -> Self {
        RandomEnv {
            rng: ChaCha8Rng::seed_from_u64(seed),
            universe,
        }
    }
}

impl Environment for RandomEnv {
    fn next_round(&mut self, pending: &BTreeSet<Query>, view: &StepView<'_>) -> Option<Round> {
        if pending.is_empty() {
            return None;
        }
        let qs: Vec<&Query> = pending.iter().collect();
        let k = self.rng.gen_range(1..=qs.len());
        let chosen: Vec<&&Query> = qs.choose_multiple(&mut self.rng, k).collect();
        let mut round = Round::new();
        for q in chosen {
            let replies = self.universe.replies_for(q, view.state);
            let a = replies.choose(&mut self.rng)?.clone();
            round.insert((*q).clone(), a);
        }
        Some(round)
    }
}

/// Forwards pending sets over a channel and blocks for the reply.
pub struct ChannelEnv {
    pub pending_tx: Sender<BTreeSet<Query>>,
    pub round_rx: Receiver<Option<Round>>,
}

impl Environment for ChannelEnv {
    fn next_round(&mut self, pending: &BTreeSet<Query>, _view: &StepView<'_>) -> Option<Round> {
        self.pending_tx.send(pending.clone()).ok()?;
        self.round_rx.recv().ok().flatten()
    }
}
