//! Reasoning pipeline, LLM backends, benchmark harness and CLI on top of
//! `logicagent-core`.

pub mod agent;
pub mod backend;
pub mod bench;
pub mod cli;
pub mod config;
pub mod extract;
pub mod prompts;

pub use logicagent_core as core;
