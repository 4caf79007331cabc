//! File formats, JSON documents and the command-line front end for
//! `tracerace-core`.

pub mod bench;
pub mod cli;
pub mod detect;
pub mod format;
pub mod instance;
pub mod json;
