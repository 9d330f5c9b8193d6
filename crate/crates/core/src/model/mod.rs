//! Vocabularies, structures, queries, histories and update sets.

mod history;
mod iso;
mod json;
mod query;
mod structure;
mod update;
pub mod vocab;

use thiserror::Error;

pub use history::{History, Round};
pub use iso::{apply_iso, Bijection, Rename};
pub use json::{FunctionJson, StructureJson};
pub use query::{Elem, ExternalVocabulary, Label, Query, Template, TemplateItem, Token};
pub use structure::{Interp, Structure};
pub use update::{apply_updates, Update, UpdateSet};
pub use vocab::{is_logic_name, SymbolId, SymbolInfo, Vocabulary, LOGIC_NAMES};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("query {0} occurs twice in the history")]
    DuplicateQuery(Query),
    #[error("history rounds must be nonempty")]
    EmptyRound,
    #[error("queries must be nonempty")]
    EmptyQuery,
    #[error("prefix length {requested} exceeds history length {length}")]
    OutOfRange { requested: usize, length: usize },
    #[error("{symbol} expects {expected} arguments, got {got}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        got: usize,
    },
    #[error("unknown symbol {0}")]
    UnknownSymbol(String),
    #[error("element {0} is not in the structure")]
    ForeignElement(Elem),
    #[error("not a bijection: {0}")]
    NotABijection(String),
    #[error("symbol {0} declared twice")]
    DuplicateSymbol(SymbolId),
    #[error("bad template: {0}")]
    BadTemplate(String),
    #[error("bad symbol reference {0:?}, expected name/arity")]
    BadSymbolRef(String),
    #[error("bad query token {0:?}, expected l:<label> or e:<element>")]
    BadToken(String),
    #[error("invalid structure: {0}")]
    InvalidStructure(String),
    #[error("relational symbol {0} given a non-Boolean value")]
    NonBooleanRelational(SymbolId),
    #[error("logic name {0} cannot be given a table")]
    LogicNameTable(SymbolId),
    #[error("symbol {0} has conflicting static/relational markings")]
    MarkingMismatch(SymbolId),
    #[error("update of static symbol {0}")]
    StaticUpdate(SymbolId),
    #[error("update set contains a clash")]
    Clash,
}
