pub mod analysis;
pub mod engine;
pub mod eval;
pub mod model;
pub mod synthesis;
pub mod syntax;
