//! The `tubepulse` command line: dataset validation, EDA artifacts, model
//! training and evaluation, single-video prediction, draft ranking, and the
//! HTTP service used by the creator console.

pub mod args;
pub mod commands;
pub mod config;
pub mod failure;
pub mod server;
pub mod service;

pub use commands::{run, Io};
pub use failure::Failure;
