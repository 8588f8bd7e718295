//! Driver for the `vhj` binary: argument types, run configs, artifact
//! writing, and the acceptance suite behind `vhj reproduce acceptance`.

pub mod acceptance;
pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
