//! Engine sessions driven over a JSON message protocol, so that an external
//! client can play the environment of a running step.

pub mod protocol;
pub mod server;
mod session;

pub use protocol::{ClientMessage, ErrorCode, ServerMessage};
pub use server::{router, router_with, serve, serve_with, Sessions};
pub use session::{Session, Snapshot};
