//! Extraction of an equivalent program from a black-box algorithm, and a
//! brute-force equivalence check over the enumerable attainable pairs.

mod construct;
mod critical;
mod describe;
mod equivalence;
mod oracle;
mod templates;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use construct::{synthesize, Synthesis};
pub use critical::{critical_terms, CriticalTerm, CriticalTerms};
pub use describe::{describe, enumerate_attainable, Conjunct, Description, Pair};
pub use equivalence::{check_equivalence, check_equivariance, EquivalenceReport, Violation, ViolationKind};
pub use oracle::{
    builtin, builtin_names, oracle_issued, AlgorithmOracle, Behavior, FnOracle, ProgramOracle,
    TableOracle,
};
pub use templates::{standard_external, standard_name, standard_templates};

use crate::eval::EvalError;
use crate::model::ModelError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{what} exceeded the cap of {cap}")]
    Explosion { what: &'static str, cap: usize },
    #[error("history {history} is not attainable in probe {state}")]
    NotAttainable { state: usize, history: String },
    #[error("witness too weak in probe {state} at {history}: {detail}")]
    WitnessTooWeak {
        state: usize,
        history: String,
        detail: String,
    },
    #[error("similar pairs behave differently: probe {state} at {history} versus {other}")]
    Conflict {
        state: usize,
        history: String,
        other: String,
    },
    #[error("probe {state} at {history} is not final within {bound} rounds")]
    NotFinalWithinBound {
        state: usize,
        history: String,
        bound: usize,
    },
    #[error("probe {state} at {history} is not final but cannot be extended")]
    DeadEnd { state: usize, history: String },
    #[error("oracle misbehaves in probe {state} at {history}: {detail}")]
    BadOracle {
        state: usize,
        history: String,
        detail: String,
    },
    #[error("no behavior recorded for {state} at {history}")]
    MissingBehavior { state: String, history: String },
    #[error("oracle description: {0}")]
    Oracle(String),
}

/// Size limits for the exponential parts of the construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub max_critical_terms: usize,
    pub max_pairs: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            max_critical_terms: 4000,
            max_pairs: 20000,
        }
    }
}

pub(crate) fn history_text(h: &crate::model::History) -> String {
    serde_json::to_string(h).unwrap_or_default()
}
