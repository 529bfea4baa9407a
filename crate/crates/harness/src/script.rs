//! Scenario file format.
//!
//! ```text
//! # comment
//! description=Escrow refunded after the deadline
//! seed=7
//! actor alice
//! actor bob
//! alice.spawn name=Dollar symbol=USD supply=100 as=usd
//! mine 5
//! expect balance class=usd of=alice value=100
//! ```
//!
//! One step per line. Steps are `actor.verb key=value ...`, `mine [k]` or
//! `expect <check> key=value ...`. Values never contain whitespace.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::verbs::{self, ArgKind, Bind, EXPECTS};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}: syntax error: {msg}")]
    SyntaxError { line: usize, msg: String },
    #[error("line {line}: unknown verb `{verb}`")]
    UnknownVerb { line: usize, verb: String },
    #[error("line {line}: actor `{actor}` is not declared")]
    UndeclaredActor { line: usize, actor: String },
}

impl ParseError {
    pub fn line(&self) -> usize {
        match self {
            ParseError::SyntaxError { line, .. }
            | ParseError::UnknownVerb { line, .. }
            | ParseError::UndeclaredActor { line, .. } => *line,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepKind {
    /// `actor.verb args`
    Call { actor: String, verb: String },
    /// `mine k`
    Mine(u64),
    /// `expect check args`
    Expect(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    /// 1-based source line; 0 for scripts built in code.
    pub line: usize,
    pub kind: StepKind,
    pub args: BTreeMap<String, String>,
}

impl Step {
    pub fn arg(&self, key: &str) -> Option<&str> {
        self.args.get(key).map(String::as_str)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Script {
    pub description: String,
    pub seed: u64,
    pub actors: Vec<String>,
    pub steps: Vec<Step>,
}

fn valid_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') && !s.starts_with('#')
}

fn parse_args<'a>(line: usize, tokens: impl Iterator<Item = &'a str>) -> Result<BTreeMap<String, String>, ParseError> {
    let mut args = BTreeMap::new();
    for tok in tokens {
        let Some((k, v)) = tok.split_once('=') else {
            return Err(ParseError::SyntaxError { line, msg: format!("expected key=value, got `{tok}`") });
        };
        if k.is_empty() || v.is_empty() {
            return Err(ParseError::SyntaxError { line, msg: format!("empty key or value in `{tok}`") });
        }
        if args.insert(k.to_string(), v.to_string()).is_some() {
            return Err(ParseError::SyntaxError { line, msg: format!("duplicate argument `{k}`") });
        }
    }
    Ok(args)
}

fn check_schema(
    line: usize,
    schema: &[(&str, ArgKind, bool)],
    args: &BTreeMap<String, String>,
    actors: &BTreeSet<String>,
) -> Result<(), ParseError> {
    for key in args.keys() {
        if !schema.iter().any(|(k, _, _)| k == key) {
            return Err(ParseError::SyntaxError { line, msg: format!("unexpected argument `{key}`") });
        }
    }
    for (key, kind, required) in schema {
        let Some(value) = args.get(*key) else {
            if *required {
                return Err(ParseError::SyntaxError { line, msg: format!("missing argument `{key}`") });
            }
            continue;
        };
        let bad = |what: &str| ParseError::SyntaxError { line, msg: format!("`{key}` must be {what}") };
        match kind {
            ArgKind::Int => {
                value.parse::<u64>().map_err(|_| bad("a non-negative integer"))?;
            }
            ArgKind::SignedInt => {
                value.parse::<i64>().map_err(|_| bad("an integer"))?;
            }
            ArgKind::Bool => {
                if value != "true" && value != "false" {
                    return Err(bad("true or false"));
                }
            }
            ArgKind::Ints => {
                for v in value.split(',') {
                    v.parse::<u64>().map_err(|_| bad("a comma-separated list of integers"))?;
                }
            }
            ArgKind::Actor => {
                if !actors.contains(value) {
                    return Err(ParseError::UndeclaredActor { line, actor: value.clone() });
                }
            }
            ArgKind::Actors => {
                for v in value.split(',') {
                    if !actors.contains(v) {
                        return Err(ParseError::UndeclaredActor { line, actor: v.to_string() });
                    }
                }
            }
            ArgKind::Choice(options) => {
                if !options.contains(&value.as_str()) {
                    return Err(bad(&format!("one of {}", options.join("|"))));
                }
            }
            ArgKind::Name => {
                if !valid_name(value) {
                    return Err(bad("a name"));
                }
            }
            ArgKind::Party | ArgKind::Ref | ArgKind::Text => {}
        }
    }
    Ok(())
}

pub fn parse(text: &str) -> Result<Script, ParseError> {
    let mut script = Script::default();
    let mut declared = BTreeSet::new();
    let mut seen_seed = false;
    let mut seen_description = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if let Some(desc) = trimmed.strip_prefix("description=") {
            if seen_description {
                return Err(ParseError::SyntaxError { line, msg: "description given twice".into() });
            }
            seen_description = true;
            script.description = desc.trim().to_string();
            continue;
        }
        if let Some(seed) = trimmed.strip_prefix("seed=") {
            if seen_seed {
                return Err(ParseError::SyntaxError { line, msg: "seed given twice".into() });
            }
            seen_seed = true;
            script.seed =
                seed.trim().parse().map_err(|_| ParseError::SyntaxError { line, msg: format!("bad seed `{seed}`") })?;
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let head = tokens.next().expect("non-empty line");
        match head {
            "actor" => {
                let name =
                    tokens.next().ok_or_else(|| ParseError::SyntaxError { line, msg: "actor needs a name".into() })?;
                if tokens.next().is_some() || !valid_name(name) || name.contains('-') {
                    return Err(ParseError::SyntaxError { line, msg: format!("bad actor declaration `{trimmed}`") });
                }
                if !declared.insert(name.to_string()) {
                    return Err(ParseError::SyntaxError { line, msg: format!("actor `{name}` declared twice") });
                }
                script.actors.push(name.to_string());
            }
            "mine" => {
                let k = match tokens.next() {
                    None => 1,
                    Some(t) => t
                        .parse()
                        .map_err(|_| ParseError::SyntaxError { line, msg: format!("bad block count `{t}`") })?,
                };
                if tokens.next().is_some() {
                    return Err(ParseError::SyntaxError { line, msg: "mine takes one count".into() });
                }
                script.steps.push(Step { line, kind: StepKind::Mine(k), args: BTreeMap::new() });
            }
            "expect" => {
                let check = tokens
                    .next()
                    .ok_or_else(|| ParseError::SyntaxError { line, msg: "expect needs a check".into() })?;
                let args = parse_args(line, tokens)?;
                let Some(spec) = EXPECTS.iter().find(|e| e.name == check) else {
                    return Err(ParseError::UnknownVerb { line, verb: format!("expect {check}") });
                };
                check_schema(line, spec.args, &args, &declared)?;
                script.steps.push(Step { line, kind: StepKind::Expect(check.to_string()), args });
            }
            _ => {
                let Some((actor, verb)) = head.split_once('.') else {
                    return Err(ParseError::SyntaxError { line, msg: format!("expected actor.verb, got `{head}`") });
                };
                let Some(spec) = verbs::lookup(verb) else {
                    return Err(ParseError::UnknownVerb { line, verb: verb.to_string() });
                };
                if !declared.contains(actor) {
                    return Err(ParseError::UndeclaredActor { line, actor: actor.to_string() });
                }
                let args = parse_args(line, tokens)?;
                check_schema(line, spec.args, &args, &declared)?;
                if spec.bind == Bind::Actor {
                    let name = args.get("as").expect("schema requires as");
                    if name.contains('-') || !declared.insert(name.clone()) {
                        return Err(ParseError::SyntaxError { line, msg: format!("actor `{name}` declared twice") });
                    }
                    script.actors.push(name.clone());
                }
                script.steps.push(Step {
                    line,
                    kind: StepKind::Call { actor: actor.to_string(), verb: verb.to_string() },
                    args,
                });
            }
        }
    }
    Ok(script)
}

impl Script {
    /// Actors declared with `actor`, excluding those introduced by steps.
    pub fn declared_actors(&self) -> Vec<&str> {
        let introduced: BTreeSet<&str> = self
            .steps
            .iter()
            .filter_map(|s| match &s.kind {
                StepKind::Call { verb, .. } if verbs::lookup(verb).is_some_and(|v| v.bind == Bind::Actor) => {
                    s.arg("as")
                }
                _ => None,
            })
            .collect();
        self.actors.iter().map(String::as_str).filter(|a| !introduced.contains(a)).collect()
    }
}

fn write_args(f: &mut fmt::Formatter<'_>, args: &BTreeMap<String, String>) -> fmt::Result {
    for (k, v) in args {
        write!(f, " {k}={v}")?;
    }
    Ok(())
}

/// Canonical text form; parsing it yields an equal script (line numbers aside).
impl fmt::Display for Script {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.description.is_empty() {
            writeln!(f, "description={}", self.description)?;
        }
        writeln!(f, "seed={}", self.seed)?;
        for a in self.declared_actors() {
            writeln!(f, "actor {a}")?;
        }
        for step in &self.steps {
            match &step.kind {
                StepKind::Call { actor, verb } => write!(f, "{actor}.{verb}")?,
                StepKind::Mine(k) => write!(f, "mine {k}")?,
                StepKind::Expect(check) => write!(f, "expect {check}")?,
            }
            write_args(f, &step.args)?;
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_an_empty_script() {
        let s = parse("").unwrap();
        assert!(s.steps.is_empty() && s.actors.is_empty());
    }

    #[test]
    fn misspelled_verb_reports_its_line() {
        let err = parse("actor alice\n\nalice.mnit class=x to=alice amount=1\n").unwrap_err();
        assert_eq!(err, ParseError::UnknownVerb { line: 3, verb: "mnit".into() });
    }

    #[test]
    fn undeclared_actor() {
        let err = parse("actor alice\nbob.deploy_sink\n").unwrap_err();
        assert_eq!(err, ParseError::UndeclaredActor { line: 2, actor: "bob".into() });
        let err = parse("actor alice\nalice.issue_credential subject=carol attrs=k:v\n").unwrap_err();
        assert_eq!(err, ParseError::UndeclaredActor { line: 2, actor: "carol".into() });
    }

    #[test]
    fn syntax_errors() {
        assert!(matches!(
            parse("actor a\na.mint class=x to=a amount=-1"),
            Err(ParseError::SyntaxError { line: 2, .. })
        ));
        assert!(matches!(parse("seed=x"), Err(ParseError::SyntaxError { line: 1, .. })));
        assert!(matches!(parse("actor a\na.deploy_sink junk"), Err(ParseError::SyntaxError { line: 2, .. })));
    }

    #[test]
    fn display_round_trips() {
        let text = "# demo\ndescription=round trip\nseed=9\nactor alice\nactor bob\n\
                    alice.spawn name=D symbol=D supply=5 as=d\nmine 2\n\
                    alice.adopt_stealth secret=00 index=0 as=alice0\n\
                    expect balance class=d of=alice0 value=0\n";
        let s = parse(text).unwrap();
        let again = parse(&s.to_string()).unwrap();
        let strip = |s: &Script| s.steps.iter().map(|x| (x.kind.clone(), x.args.clone())).collect::<Vec<_>>();
        assert_eq!(strip(&s), strip(&again));
        assert_eq!((s.seed, &s.description, &s.actors), (again.seed, &again.description, &again.actors));
    }
}
