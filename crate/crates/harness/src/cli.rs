//! `paysim` command line.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::runner::run_scenario;
use crate::script::parse;
use crate::transcript::Transcript;

pub const EXIT_OK: i32 = 0;
pub const EXIT_EXPECTATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "paysim", version, about = "Deterministic payment-pattern ledger simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run a scenario and write its transcript.
    Run {
        file: PathBuf,
        /// Overrides the scenario's `seed=` line.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the transcript here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Parse a scenario without running it.
    Check { file: PathBuf },
    /// Replay a JSON transcript's scenario and compare the result byte for byte.
    Digest { transcript: PathBuf },
}

/// Runs the CLI and returns the process exit code. Messages go to `out` and `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_USAGE;
            }
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
    };
    match cli.command {
        Command::Run { file, seed, out: path, format } => {
            let source = match fs::read_to_string(&file) {
                Ok(s) => s,
                Err(e) => {
                    let _ = writeln!(err, "{}: {e}", file.display());
                    return EXIT_USAGE;
                }
            };
            let script = match parse(&source) {
                Ok(s) => s,
                Err(e) => {
                    let _ = writeln!(err, "{}:{e}", file.display());
                    return EXIT_USAGE;
                }
            };
            let transcript = run_scenario(&script, &source, seed);
            let rendered = match format {
                Format::Json => transcript.to_json(),
                Format::Text => transcript.to_text(),
            };
            let written = match &path {
                Some(p) => fs::write(p, &rendered),
                None => out.write_all(rendered.as_bytes()),
            };
            if let Err(e) = written {
                let _ = writeln!(err, "cannot write transcript: {e}");
                return EXIT_USAGE;
            }
            match transcript.result() {
                Ok(()) => EXIT_OK,
                Err(e) => {
                    let _ = writeln!(err, "{}:{e}", file.display());
                    EXIT_EXPECTATION
                }
            }
        }
        Command::Check { file } => {
            let source = match fs::read_to_string(&file) {
                Ok(s) => s,
                Err(e) => {
                    let _ = writeln!(err, "{}: {e}", file.display());
                    return EXIT_USAGE;
                }
            };
            match parse(&source) {
                Ok(s) => {
                    let _ =
                        writeln!(out, "{}: ok ({} actors, {} steps)", file.display(), s.actors.len(), s.steps.len());
                    EXIT_OK
                }
                Err(e) => {
                    let _ = writeln!(err, "{}:{e}", file.display());
                    EXIT_USAGE
                }
            }
        }
        Command::Digest { transcript } => {
            let bytes = match fs::read(&transcript) {
                Ok(b) => b,
                Err(e) => {
                    let _ = writeln!(err, "{}: {e}", transcript.display());
                    return EXIT_USAGE;
                }
            };
            match verify_transcript(&bytes) {
                Ok(digest) => {
                    let _ = writeln!(out, "ok {digest}");
                    EXIT_OK
                }
                Err(why) => {
                    let _ = writeln!(err, "mismatch: {why}");
                    EXIT_EXPECTATION
                }
            }
        }
    }
}

/// Replays the scenario recorded in a JSON transcript and checks that the
/// recorded bytes are exactly what the replay produces. Returns the final
/// digest on success.
pub fn verify_transcript(bytes: &[u8]) -> Result<String, String> {
    let text = std::str::from_utf8(bytes).map_err(|_| "transcript is not UTF-8".to_string())?;
    let recorded = Transcript::from_json(text).map_err(|e| format!("transcript does not decode: {e}"))?;
    let script = parse(&recorded.header.script).map_err(|e| format!("recorded script does not parse: {e}"))?;
    let replay = run_scenario(&script, &recorded.header.script, Some(recorded.header.seed));
    if replay.final_digest != recorded.final_digest {
        return Err(format!("final digest recorded {} recomputed {}", recorded.final_digest, replay.final_digest));
    }
    if replay.to_json().as_bytes() != bytes {
        return Err("transcript body differs from the replay".into());
    }
    Ok(replay.final_digest)
}
