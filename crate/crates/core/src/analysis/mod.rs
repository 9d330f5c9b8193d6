//! Bounded-work bounds, shadows, bounded-exploration witnesses, and the
//! randomized lemma harness.

pub mod agreement;
mod bounds;
pub mod exhaustive;
pub mod generate;
mod harness;
mod witness;

pub use bounds::{bound_guard, bound_rule, bound_rule_with, bound_term, BoundMode};
pub use harness::{
    case_input, case_seed, catching_check, check_generated, check_lemmas, differs, Check,
    CheckReport, Failure, HarnessConfig, Report, MAX_REPORTED,
};
pub use witness::{shadow, witness_guard, witness_rule, witness_term, Shadow, Witness, WITNESS_VAR};
