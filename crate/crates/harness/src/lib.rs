//! Scenario harness: a line-oriented scenario language, a runner that drives
//! every payment pattern through it, and deterministic transcripts.

pub mod cli;
pub mod runner;
pub mod script;
pub mod transcript;
pub mod verbs;

pub use runner::{run_scenario, RunError, Runner};
pub use script::{parse, ParseError, Script, Step, StepKind};
pub use transcript::{Header, StepRecord, Transcript};
