use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{ContractError, Result};
use crate::ledger::{Address, ChainState, Contracts, EventKind, Exec, Instance, InstanceId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedMode {
    /// Attestors push values on their own initiative.
    Push,
    /// Consumers request a key; attestors respond.
    Pull,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Trust {
    Centralized(Address),
    /// A value is published once `quorum` distinct attestors report the same bytes.
    Decentralized {
        attestors: Vec<Address>,
        quorum: u64,
    },
}

impl Trust {
    fn attestors(&self) -> &[Address] {
        match self {
            Trust::Centralized(a) => std::slice::from_ref(a),
            Trust::Decentralized { attestors, .. } => attestors,
        }
    }

    fn quorum(&self) -> u64 {
        match self {
            Trust::Centralized(_) => 1,
            Trust::Decentralized { quorum, .. } => *quorum,
        }
    }
}

/// Quorum-backed value of a key.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Record {
    pub value: String,
    pub height: u64,
    pub attestors: BTreeSet<Address>,
}

/// Latest value each attestor reported for a key.
pub type Attestation = BTreeMap<Address, String>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Delivery {
    pub feed: InstanceId,
    pub key: String,
    pub value: String,
    pub height: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleFeed {
    pub owner: Address,
    pub mode: FeedMode,
    pub trust: Trust,
    pub records: BTreeMap<String, Record>,
    pub attestations: BTreeMap<String, Attestation>,
    pub pending: BTreeMap<String, Vec<Address>>,
    pub subscribers: BTreeMap<String, BTreeSet<Address>>,
}

impl OracleFeed {
    pub fn read(&self, key: &str) -> Option<(&str, u64)> {
        self.records.get(key).map(|r| (r.value.as_str(), r.height))
    }

    fn is_attestor(&self, who: &Address) -> bool {
        self.trust.attestors().contains(who)
    }

    /// Records one attestation and returns the value if it just reached quorum.
    fn attest(&mut self, key: &str, attestor: Address, value: &str, height: u64) -> Option<String> {
        let votes = self.attestations.entry(key.to_string()).or_default();
        votes.insert(attestor, value.to_string());
        let backers: BTreeSet<Address> = votes.iter().filter(|(_, v)| v.as_str() == value).map(|(a, _)| *a).collect();
        if (backers.len() as u64) < self.trust.quorum() {
            return None;
        }
        self.records.insert(key.to_string(), Record { value: value.to_string(), height, attestors: backers });
        Some(value.to_string())
    }
}

impl Contracts {
    /// Latest quorum-backed value of `key`, or `None` while not available.
    pub fn oracle_read(&self, feed: InstanceId, key: &str) -> Result<Option<(String, u64)>> {
        Ok(self.oracle(feed)?.read(key).map(|(v, h)| (v.to_string(), h)))
    }
}

impl ChainState {
    pub fn oracle_read(&self, feed: InstanceId, key: &str) -> Result<Option<(String, u64)>> {
        self.contracts().oracle_read(feed, key)
    }
}

pub(crate) fn create_oracle(cx: &mut Exec<'_>, mode: FeedMode, trust: Trust) -> Result<InstanceId> {
    if let Trust::Decentralized { attestors, quorum } = &trust {
        let distinct: BTreeSet<_> = attestors.iter().collect();
        let n = distinct.len() as u64;
        if distinct.len() != attestors.len() || *quorum == 0 || *quorum > n {
            return Err(ContractError::InvalidThreshold { threshold: *quorum, signers: n });
        }
    }
    let owner = cx.sender;
    let feed = cx.contracts.deploy(Instance::Oracle(OracleFeed {
        owner,
        mode,
        trust,
        records: BTreeMap::new(),
        attestations: BTreeMap::new(),
        pending: BTreeMap::new(),
        subscribers: BTreeMap::new(),
    }));
    cx.emit(feed.address(), EventKind::OracleCreated { feed });
    Ok(feed)
}

/// Shared path of push and respond: attest, and on publication deliver to
/// pending requesters (once) and subscribers (every time).
fn submit(cx: &mut Exec<'_>, feed: InstanceId, key: &str, value: &str) -> Result<()> {
    let attestor = cx.sender;
    let height = cx.height;
    let f = cx.contracts.oracle_mut(feed)?;
    if !f.is_attestor(&attestor) {
        return Err(ContractError::NotAttestor);
    }
    let published = f.attest(key, attestor, value, height);
    let mut recipients = Vec::new();
    if published.is_some() {
        let mut seen = BTreeSet::new();
        for r in f.pending.remove(key).unwrap_or_default() {
            if seen.insert(r) {
                recipients.push(r);
            }
        }
        for r in f.subscribers.get(key).into_iter().flatten() {
            if seen.insert(*r) {
                recipients.push(*r);
            }
        }
    }
    let emitter = feed.address();
    cx.emit(emitter, EventKind::AttestationRecorded { feed, key: key.to_string(), attestor, value: value.to_string() });
    if let Some(value) = published {
        cx.emit(emitter, EventKind::DataPublished { feed, key: key.to_string(), value: value.clone() });
        for requester in recipients {
            cx.contracts.inbox.entry(requester).or_default().push(Delivery {
                feed,
                key: key.to_string(),
                value: value.clone(),
                height,
            });
            cx.emit(emitter, EventKind::DataDelivered { feed, key: key.to_string(), requester, value: value.clone() });
        }
    }
    Ok(())
}

pub(crate) fn oracle_push(cx: &mut Exec<'_>, feed: InstanceId, key: &str, value: &str) -> Result<()> {
    if cx.contracts.oracle(feed)?.mode != FeedMode::Push {
        return Err(ContractError::WrongMode("push".into()));
    }
    submit(cx, feed, key, value)
}

/// Pull feeds queue a one-shot request; either mode accepts subscriptions.
pub(crate) fn oracle_request(cx: &mut Exec<'_>, feed: InstanceId, key: &str, subscribe: bool) -> Result<()> {
    let requester = cx.sender;
    let f = cx.contracts.oracle_mut(feed)?;
    match (f.mode, subscribe) {
        (FeedMode::Push, false) => return Err(ContractError::WrongMode("pull".into())),
        (FeedMode::Pull, _) => f.pending.entry(key.to_string()).or_default().push(requester),
        (FeedMode::Push, true) => {}
    }
    if subscribe {
        f.subscribers.entry(key.to_string()).or_default().insert(requester);
    }
    cx.emit(feed.address(), EventKind::DataRequested { feed, key: key.to_string(), requester });
    Ok(())
}

pub(crate) fn oracle_respond(cx: &mut Exec<'_>, feed: InstanceId, key: &str, value: &str) -> Result<()> {
    let f = cx.contracts.oracle(feed)?;
    if f.mode != FeedMode::Pull {
        return Err(ContractError::WrongMode("pull".into()));
    }
    if !f.is_attestor(&cx.sender) {
        return Err(ContractError::NotAttestor);
    }
    let waiting =
        f.pending.get(key).is_some_and(|p| !p.is_empty()) || f.subscribers.get(key).is_some_and(|s| !s.is_empty());
    if !waiting {
        return Err(ContractError::NoPendingRequest);
    }
    submit(cx, feed, key, value)
}
