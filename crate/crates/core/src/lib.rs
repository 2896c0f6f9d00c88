//! Proves external-iteration loops over integer lists equivalent to stream
//! pipelines and rewrites them.

pub mod cegis;
pub mod codegen;
pub mod frontend;
pub mod heap;
pub mod jst;
pub mod par;
pub mod vcgen;
