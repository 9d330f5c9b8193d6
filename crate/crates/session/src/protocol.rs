//! Messages exchanged with a client that plays the environment.

use std::collections::BTreeSet;

use iasm_core::engine::{ReplyEntry, StepVerdict};
use iasm_core::model::{Elem, History, Query, Structure, UpdateSet};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum ClientMessage {
    /// `stateJson` may be a structure object or a string holding one.
    LoadProgram {
        asm_text: String,
        state_json: serde_json::Value,
    },
    /// All replies in one message form one round.
    SubmitRound { replies: Vec<ReplyEntry> },
    Reset {},
    /// Finish the current step with seeded random replies.
    AutoStep {
        seed: u64,
        #[serde(default)]
        replies: Vec<Elem>,
    },
    /// Start the next step from the state the last step produced.
    NextStep {},
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ErrorCode {
    BadMessage,
    NoProgram,
    CompileError,
    BadState,
    NotPending,
    EmptyRound,
    ForeignElement,
    AlreadyFinal,
    StepInProgress,
    NoNextState,
    Internal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum ServerMessage {
    Hello {
        program: String,
        state: Structure,
    },
    Pending {
        queries: BTreeSet<Query>,
        step_index: usize,
    },
    RoundAccepted {
        history: History,
        step_index: usize,
    },
    StepDone {
        verdict: StepVerdict,
        updates: UpdateSet,
        next_state: Option<Structure>,
        step_index: usize,
    },
    Error {
        code: ErrorCode,
        msg: String,
    },
}

impl ServerMessage {
    pub fn error(code: ErrorCode, msg: impl Into<String>) -> Self {
        ServerMessage::Error {
            code,
            msg: msg.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        matches!(self, ServerMessage::Error { .. })
    }
}
