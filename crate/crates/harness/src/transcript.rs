//! Run transcripts and their JSON and text renderings.

use std::fmt::Write as _;

use paysim_core::crypto::sha256;
use paysim_core::Event;
use serde::{Deserialize, Serialize};

use crate::runner::RunError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Header {
    pub description: String,
    pub seed: u64,
    /// The scenario source, verbatim. Lets `digest` replay the run.
    pub script: String,
    pub script_digest: String,
}

impl Header {
    pub fn new(description: &str, seed: u64, script: &str) -> Header {
        Header {
            description: description.to_string(),
            seed,
            script: script.to_string(),
            script_digest: sha256(script.as_bytes()).to_hex(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub index: usize,
    pub line: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub actor: Option<String>,
    pub verb: String,
    /// Height after the step.
    pub height: u64,
    /// `ok`, `rejected`, `offchain`, `mined` or `passed`.
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reason: Option<String>,
    pub events: Vec<Event>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub header: Header,
    pub steps: Vec<StepRecord>,
    /// Lowercase hex digest of the final chain state.
    pub final_digest: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub failure: Option<RunError>,
}

impl Transcript {
    pub fn result(&self) -> Result<(), RunError> {
        self.failure.clone().map_or(Ok(()), Err)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("transcripts always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Transcript> {
        serde_json::from_str(text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if !self.header.description.is_empty() {
            let _ = writeln!(out, "# {}", self.header.description);
        }
        let _ = writeln!(out, "seed={} script={}", self.header.seed, self.header.script_digest);
        for s in &self.steps {
            let who = s.actor.as_deref().map_or(String::new(), |a| format!("{a}."));
            let _ = write!(out, "{:>4} line {:>3} h={:<4} {who}{} {}", s.index, s.line, s.height, s.verb, s.status);
            if let Some(r) = &s.reason {
                let _ = write!(out, " ({r})");
            }
            if !s.events.is_empty() {
                let names: Vec<_> = s.events.iter().map(|e| e.kind.name()).collect();
                let _ = write!(out, " [{}]", names.join(", "));
            }
            out.push('\n');
        }
        if let Some(f) = &self.failure {
            let _ = writeln!(out, "FAILED {f}");
        }
        let _ = writeln!(out, "final_digest={}", self.final_digest);
        out
    }
}
