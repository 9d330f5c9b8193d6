use iasm_core::engine::{
    entries_to_round, EngineError, Environment, RandomEnv, ReplyUniverse, StepMachine, StepVerdict,
    StepView,
};
use iasm_core::model::{ModelError, Round, Structure};
use iasm_core::syntax::Program;
use serde::Serialize;

use crate::protocol::{ClientMessage, ErrorCode, ServerMessage};

#[derive(Clone, Debug)]
struct Finished {
    verdict: StepVerdict,
    next_state: Option<Structure>,
}

#[derive(Clone, Debug)]
struct Loaded {
    program: Program,
    initial: Structure,
    state: Structure,
    step_index: usize,
    rounds: Vec<Round>,
    finished: Option<Finished>,
}

/// The current step as a client would display it.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Snapshot {
    pub program: Option<String>,
    pub state: Option<Structure>,
    pub step_index: usize,
    pub history: Option<iasm_core::model::History>,
    pub pending: Vec<iasm_core::model::Query>,
    pub finished: Option<StepVerdict>,
}

/// One engine step driven by protocol messages. The step is replayed from
/// the accepted rounds on every message, so the engine's checks apply.
#[derive(Clone, Debug, Default)]
pub struct Session {
    loaded: Option<Loaded>,
}

fn engine_error(e: EngineError) -> ServerMessage {
    let code = match &e {
        EngineError::NotPending(_) => ErrorCode::NotPending,
        EngineError::EmptyRound => ErrorCode::EmptyRound,
        EngineError::AlreadyFinal => ErrorCode::AlreadyFinal,
        EngineError::Model(ModelError::ForeignElement(_)) => ErrorCode::ForeignElement,
        _ => ErrorCode::Internal,
    };
    ServerMessage::error(code, e.to_string())
}

fn parse_state(v: &serde_json::Value) -> Result<Structure, String> {
    let r = match v {
        serde_json::Value::String(s) => serde_json::from_str(s),
        other => serde_json::from_value(other.clone()),
    };
    r.map_err(|e| e.to_string())
}

impl Session {
    pub fn new() -> Self {
        Session::default()
    }

    /// Decode one JSON message and handle it.
    pub fn handle_text(&mut self, text: &str) -> Vec<ServerMessage> {
        match serde_json::from_str::<ClientMessage>(text) {
            Ok(m) => self.handle(m),
            Err(e) => vec![ServerMessage::error(ErrorCode::BadMessage, e.to_string())],
        }
    }

    pub fn handle(&mut self, msg: ClientMessage) -> Vec<ServerMessage> {
        match msg {
            ClientMessage::LoadProgram { asm_text, state_json } => self.load(&asm_text, &state_json),
            ClientMessage::SubmitRound { replies } => self.submit(entries_to_round(&replies)),
            ClientMessage::Reset {} => self.reset(),
            ClientMessage::AutoStep { seed, replies } => self.auto_step(seed, replies),
            ClientMessage::NextStep {} => self.next_step(),
        }
    }

    pub fn snapshot(&self) -> Snapshot {
        let Some(l) = &self.loaded else {
            return Snapshot {
                program: None,
                state: None,
                step_index: 0,
                history: None,
                pending: Vec::new(),
                finished: None,
            };
        };
        let m = self.machine().ok();
        let pending = match (&l.finished, &m) {
            (None, Some(m)) => m.pending().into_iter().collect(),
            _ => Vec::new(),
        };
        Snapshot {
            program: Some(l.program.to_source()),
            state: Some(l.state.clone()),
            step_index: l.step_index,
            history: m.map(|m| m.history().clone()),
            pending,
            finished: l.finished.as_ref().map(|f| f.verdict),
        }
    }

    fn load(&mut self, asm: &str, state: &serde_json::Value) -> Vec<ServerMessage> {
        let program = match Program::parse(asm) {
            Ok(p) => p,
            Err(e) => return vec![ServerMessage::error(ErrorCode::CompileError, e.to_string())],
        };
        let state = match parse_state(state).and_then(|s| s.conform(&program.vocab).map_err(|e| e.to_string())) {
            Ok(s) => s,
            Err(e) => return vec![ServerMessage::error(ErrorCode::BadState, e)],
        };
        self.loaded = Some(Loaded {
            program,
            initial: state.clone(),
            state,
            step_index: 0,
            rounds: Vec::new(),
            finished: None,
        });
        self.greet()
    }

    fn greet(&mut self) -> Vec<ServerMessage> {
        let l = self.loaded.as_ref().expect("loaded");
        let mut out = vec![ServerMessage::Hello {
            program: l.program.to_source(),
            state: l.state.clone(),
        }];
        out.extend(self.report());
        out
    }

    fn machine(&self) -> Result<StepMachine<'_>, EngineError> {
        let l = self.loaded.as_ref().expect("loaded");
        let mut m = StepMachine::new(&l.program, &l.state)?;
        for r in &l.rounds {
            m.submit(r.clone())?;
        }
        Ok(m)
    }

    /// Pending queries, or the step's result once it is over.
    fn report(&mut self) -> Vec<ServerMessage> {
        let m = match self.machine() {
            Ok(m) => m,
            Err(e) => return vec![engine_error(e)],
        };
        let step_index = self.loaded.as_ref().expect("loaded").step_index;
        let pending = m.pending();
        if !m.is_final() && !pending.is_empty() {
            return vec![ServerMessage::Pending {
                queries: pending,
                step_index,
            }];
        }
        let r = match m.finish() {
            Ok(r) => r,
            Err(e) => return vec![engine_error(e)],
        };
        let l = self.loaded.as_mut().expect("loaded");
        l.finished = Some(Finished {
            verdict: r.verdict,
            next_state: r.next_state.clone(),
        });
        vec![ServerMessage::StepDone {
            verdict: r.verdict,
            updates: r.updates,
            next_state: r.next_state,
            step_index,
        }]
    }

    fn no_program() -> Vec<ServerMessage> {
        vec![ServerMessage::error(ErrorCode::NoProgram, "load a program first")]
    }

    /// Append one round, or report why it was refused.
    fn accept(&mut self, round: Round) -> Result<ServerMessage, Box<ServerMessage>> {
        let l = self.loaded.as_ref().expect("loaded");
        if l.finished.is_some() {
            return Err(Box::new(engine_error(EngineError::AlreadyFinal)));
        }
        let refused = |e| Box::new(engine_error(e));
        let mut m = self.machine().map_err(refused)?;
        m.submit(round.clone()).map_err(refused)?;
        let history = m.history().clone();
        let l = self.loaded.as_mut().expect("loaded");
        l.rounds.push(round);
        Ok(ServerMessage::RoundAccepted {
            history,
            step_index: l.step_index,
        })
    }

    fn submit(&mut self, round: Round) -> Vec<ServerMessage> {
        if self.loaded.is_none() {
            return Self::no_program();
        }
        match self.accept(round) {
            Ok(msg) => {
                let mut out = vec![msg];
                out.extend(self.report());
                out
            }
            Err(e) => vec![*e],
        }
    }

    fn reset(&mut self) -> Vec<ServerMessage> {
        let Some(l) = self.loaded.as_mut() else {
            return Self::no_program();
        };
        l.state = l.initial.clone();
        l.step_index = 0;
        l.rounds.clear();
        l.finished = None;
        self.greet()
    }

    fn auto_step(&mut self, seed: u64, replies: Vec<iasm_core::model::Elem>) -> Vec<ServerMessage> {
        let Some(l) = self.loaded.as_ref() else {
            return Self::no_program();
        };
        if l.finished.is_some() {
            return vec![engine_error(EngineError::AlreadyFinal)];
        }
        let universe = ReplyUniverse {
            default: replies,
            ..Default::default()
        };
        let mut env = RandomEnv::new(seed, universe);
        let mut out = Vec::new();
        loop {
            let m = match self.machine() {
                Ok(m) => m,
                Err(e) => return vec![engine_error(e)],
            };
            let pending = m.pending();
            if m.is_final() || pending.is_empty() {
                break;
            }
            let view = StepView {
                state: m.state(),
                history: m.history(),
                step_index: self.loaded.as_ref().expect("loaded").step_index,
            };
            let Some(round) = env.next_round(&pending, &view) else { break };
            drop(m);
            match self.accept(round) {
                Ok(msg) => out.push(msg),
                Err(e) => {
                    out.push(*e);
                    return out;
                }
            }
        }
        out.extend(self.report());
        out
    }

    fn next_step(&mut self) -> Vec<ServerMessage> {
        let Some(l) = self.loaded.as_mut() else {
            return Self::no_program();
        };
        let Some(f) = &l.finished else {
            return vec![ServerMessage::error(ErrorCode::StepInProgress, "the current step is not over")];
        };
        let Some(next) = f.next_state.clone() else {
            return vec![ServerMessage::error(ErrorCode::NoNextState, "the last step did not succeed")];
        };
        l.state = next;
        l.step_index += 1;
        l.rounds.clear();
        l.finished = None;
        self.report()
    }
}
