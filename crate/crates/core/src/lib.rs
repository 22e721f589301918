//! Forensic Lucid: an intensional dataflow language for evidence and event
//! reconstruction.

pub mod ast;
pub mod cli;
pub mod context;
pub mod eval;
pub mod error;
pub mod evidence;
pub mod forensic;
pub mod lexer;
pub mod parser;
pub mod reconstruction;
pub mod stream;
pub mod stream_ops;
pub mod value;

pub use context::Context;
pub use error::{Error, Result};
pub use value::Value;
