//! Executes a parsed scenario against a fresh chain.
//!
//! On-chain verbs become signed transactions. Off-chain verbs (channel
//! payments, secret sharing, credential presentation, stealth derivation)
//! only touch the acting actors' local stores and never reach the event log.

use std::collections::{BTreeMap, BTreeSet};

use paysim_core::channels::{
    chain_propagate, find_preimage, hash_lock, sign_open_consent, ChannelSession, ChannelStatus, ChannelUpdate,
    LegSpec, DEFAULT_CHALLENGE_WINDOW,
};
use paysim_core::crypto::{hash_parts, sha256};
use paysim_core::governance::{
    self, sign_credential, AttrValue, Credential, CredentialId, PolicyTarget, Rule, RuleKind,
};
use paysim_core::ledger::Output;
use paysim_core::privacy::{derive_stealth_address, derive_stealth_keypair, next_seed, scan_for_payments};
use paysim_core::settlement::{escrow_release_payload, sign_multisig, Condition, FeedMode, Trust};
use paysim_core::token::{Asset, BurnMethod, Fungibility, TokenClassSpec, TokenId, TransferId};
use paysim_core::{Address, Call, ChainState, Event, EventFilter, Hash32, InstanceId, KeyPair, Receipt};

use crate::script::{Script, Step, StepKind};
use crate::transcript::{Header, StepRecord, Transcript};
use crate::verbs;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error, serde::Serialize, serde::Deserialize)]
pub enum RunError {
    #[error("step {step} (line {line}): expected {expected}, got {actual}")]
    ExpectationFailed { step: usize, line: usize, expected: String, actual: String },
}

/// Why a step did not go through. `kind` is a library error variant name or
/// `Unresolved` for arguments the runner could not resolve.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Failure {
    kind: String,
    reason: String,
}

impl Failure {
    fn unresolved(reason: impl Into<String>) -> Failure {
        Failure { kind: "Unresolved".into(), reason: reason.into() }
    }
}

impl From<paysim_core::ContractError> for Failure {
    fn from(e: paysim_core::ContractError) -> Failure {
        Failure { kind: e.kind().to_string(), reason: e.to_string() }
    }
}

type Outcome = Result<Vec<Event>, Failure>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Binding {
    Instance(InstanceId),
    Transfer(TransferId),
    Credential(CredentialId),
}

/// Off-chain knowledge of one actor.
#[derive(Clone, Debug, Default)]
struct Store {
    secrets: BTreeMap<String, Hash32>,
    credentials: BTreeMap<String, Credential>,
    sessions: BTreeMap<InstanceId, ChannelSession>,
    updates: BTreeMap<String, ChannelUpdate>,
    addresses: BTreeMap<String, Address>,
}

pub struct Runner {
    chain: ChainState,
    seed: u64,
    keys: BTreeMap<String, KeyPair>,
    stores: BTreeMap<String, Store>,
    labels: BTreeMap<String, Binding>,
    last: Option<Result<(), Failure>>,
}

fn actor_seed(seed: u64, name: &str) -> [u8; 32] {
    hash_parts(&[b"paysim/actor", &seed.to_be_bytes(), name.as_bytes()]).0
}

fn num(step: &Step, key: &str) -> Option<u64> {
    step.arg(key).map(|v| v.parse().expect("validated by the parser"))
}

fn flag(step: &Step, key: &str) -> Option<bool> {
    step.arg(key).map(|v| v == "true")
}

fn ints(v: &str) -> Vec<u64> {
    v.split(',').map(|x| x.parse().expect("validated by the parser")).collect()
}

fn asset(step: &Step, amount: &str, tokens: &str) -> Result<Asset, Failure> {
    match (step.arg(tokens), num(step, amount)) {
        (Some(t), None) => Ok(Asset::tokens(ints(t))),
        (None, Some(a)) => Ok(Asset::Amount(a)),
        _ => Err(Failure::unresolved(format!("give exactly one of `{amount}` and `{tokens}`"))),
    }
}

fn rule_kind(name: &str) -> Option<RuleKind> {
    Some(match name {
        "eligible_sellers" => RuleKind::EligibleSellers,
        "max_tokens_per_tx" => RuleKind::MaxTokensPerTx,
        "product_category" => RuleKind::ProductCategory,
        "expiry_height" => RuleKind::ExpiryHeight,
        "require_credential" => RuleKind::RequireCredential,
        _ => return None,
    })
}

fn attributes(text: &str) -> Result<BTreeMap<String, AttrValue>, Failure> {
    text.split(',')
        .map(|kv| {
            kv.split_once(':')
                .map(|(k, v)| (k.to_string(), AttrValue::parse(v)))
                .ok_or_else(|| Failure::unresolved(format!("attribute `{kv}` is not key:value")))
        })
        .collect()
}

fn lower<T: std::fmt::Debug>(x: &T) -> String {
    format!("{x:?}").to_lowercase()
}

impl Runner {
    pub fn new(script: &Script, seed: u64) -> Runner {
        let mut r = Runner {
            chain: ChainState::new(),
            seed,
            keys: BTreeMap::new(),
            stores: BTreeMap::new(),
            labels: BTreeMap::new(),
            last: None,
        };
        for name in script.declared_actors() {
            let key = r.chain.create_account(actor_seed(seed, name));
            r.keys.insert(name.to_string(), key);
            r.stores.insert(name.to_string(), Store::default());
        }
        r
    }

    pub fn chain(&self) -> &ChainState {
        &self.chain
    }

    pub fn address_of(&self, actor: &str) -> Option<Address> {
        self.keys.get(actor).map(|k| k.address())
    }

    fn key(&self, actor: &str) -> Result<&KeyPair, Failure> {
        self.keys.get(actor).ok_or_else(|| Failure::unresolved(format!("no key for `{actor}`")))
    }

    fn store(&mut self, actor: &str) -> &mut Store {
        self.stores.entry(actor.to_string()).or_default()
    }

    fn name_of(&self, address: &Address) -> Option<&str> {
        self.keys.iter().find(|(_, k)| k.address() == *address).map(|(n, _)| n.as_str())
    }

    fn party(&self, actor: &str, v: &str) -> Result<Address, Failure> {
        if let Some(k) = self.keys.get(v) {
            return Ok(k.address());
        }
        if let Some(a) = self.stores.get(actor).and_then(|s| s.addresses.get(v)) {
            return Ok(*a);
        }
        // Expectations are not tied to an actor and may name any derived address.
        if let Some(a) = self.stores.values().find_map(|s| s.addresses.get(v)) {
            return Ok(*a);
        }
        if v == "burn" {
            return Ok(Address::BURN);
        }
        if let Ok(id) = self.instance(v) {
            return Ok(id.address());
        }
        Address::from_hex(v).ok_or_else(|| Failure::unresolved(format!("`{v}` is not an address")))
    }

    fn instance(&self, v: &str) -> Result<InstanceId, Failure> {
        if let Some(n) = v.strip_prefix('#') {
            return n.parse().map(InstanceId).map_err(|_| Failure::unresolved(format!("bad instance `{v}`")));
        }
        match self.labels.get(v) {
            Some(Binding::Instance(id)) => Ok(*id),
            _ => Err(Failure::unresolved(format!("`{v}` is not bound to an instance"))),
        }
    }

    fn arg_instance(&self, step: &Step, key: &str) -> Result<InstanceId, Failure> {
        self.instance(step.arg(key).expect("required by schema"))
    }

    fn arg_party(&self, actor: &str, step: &Step, key: &str) -> Result<Address, Failure> {
        self.party(actor, step.arg(key).expect("required by schema"))
    }

    fn secret(&self, actor: &str, v: &str) -> Result<Hash32, Failure> {
        if let Some(s) = self.stores.get(actor).and_then(|s| s.secrets.get(v)) {
            return Ok(*s);
        }
        Hash32::from_hex(v).ok_or_else(|| Failure::unresolved(format!("`{actor}` does not know secret `{v}`")))
    }

    fn bind(&mut self, step: &Step, actor: &str, output: &Output) {
        let Some(label) = step.arg("as") else { return };
        match output {
            Output::None => {}
            Output::Instance(id) => {
                self.labels.insert(label.to_string(), Binding::Instance(*id));
            }
            Output::Transfer(t) => {
                self.labels.insert(label.to_string(), Binding::Transfer(*t));
            }
            Output::Credential(c) => {
                self.labels.insert(label.to_string(), Binding::Credential(c.id));
                let subject = self.name_of(&c.subject).unwrap_or(actor).to_string();
                self.store(&subject).credentials.insert(label.to_string(), c.clone());
            }
            Output::Chain { chain, hops } => {
                self.labels.insert(label.to_string(), Binding::Instance(*chain));
                for (i, h) in hops.iter().enumerate() {
                    self.labels.insert(format!("{label}.{i}"), Binding::Instance(*h));
                }
            }
        }
    }

    fn submit(&mut self, actor: &str, call: Call) -> Result<Receipt, Failure> {
        let key = self.key(actor)?.clone();
        Ok(self.chain.execute(&key, call))
    }

    fn build_call(&self, actor: &str, verb: &str, step: &Step) -> Result<Call, Failure> {
        let class = || self.arg_instance(step, "class");
        let to = || self.arg_party(actor, step, "to");
        Ok(match verb {
            "spawn" => Call::SpawnTokenClass {
                spec: TokenClassSpec {
                    name: step.arg("name").unwrap().to_string(),
                    symbol: step.arg("symbol").unwrap().to_string(),
                    decimals: num(step, "decimals").unwrap_or(0).min(255) as u8,
                    total_supply: num(step, "supply").unwrap_or(0),
                    fungibility: match step.arg("fungibility") {
                        Some("voucher") => Fungibility::Voucher,
                        _ => Fungibility::Cash,
                    },
                    mintable: flag(step, "mintable").unwrap_or(true),
                    burnable: flag(step, "burnable").unwrap_or(true),
                },
            },
            "mint" => Call::Mint { class: class()?, to: to()?, asset: asset(step, "amount", "tokens")? },
            "request_transfer" => Call::RequestTransfer {
                class: class()?,
                to: to()?,
                asset: asset(step, "amount", "tokens")?,
                category: step.arg("category").map(str::to_string),
            },
            "confirm_transfer" | "reject_transfer" => {
                let label = step.arg("transfer").unwrap();
                let transfer = match self.labels.get(label) {
                    Some(Binding::Transfer(t)) => *t,
                    _ => match label.strip_prefix('#').and_then(|n| n.parse().ok()) {
                        Some(n) => TransferId(n),
                        None => return Err(Failure::unresolved(format!("`{label}` is not a transfer"))),
                    },
                };
                if verb == "confirm_transfer" {
                    Call::ConfirmTransfer { class: class()?, transfer }
                } else {
                    Call::RejectTransfer { class: class()?, transfer }
                }
            }
            "forced_transfer" => Call::ForcedTransfer {
                class: class()?,
                from: self.arg_party(actor, step, "from")?,
                to: to()?,
                asset: asset(step, "amount", "tokens")?,
            },
            "burn" => Call::Burn {
                class: class()?,
                asset: asset(step, "amount", "tokens")?,
                method: match step.arg("method").unwrap() {
                    "burn_address" => BurnMethod::BurnAddress,
                    "registry_delete" => BurnMethod::RegistryDelete,
                    _ => BurnMethod::SelfDestructSink(step.arg("sink").map(|s| self.instance(s)).transpose()?),
                },
                archive: flag(step, "archive").unwrap_or(false),
            },
            "redeem" => Call::Redeem { class: class()?, asset: asset(step, "amount", "tokens")? },
            "set_frozen" => Call::SetFrozen { class: class()?, frozen: flag(step, "frozen").unwrap() },
            "deploy_sink" => Call::DeploySink,
            "deploy_seller_registry" => Call::DeploySellerRegistry,
            "register_seller" => Call::RegisterSeller {
                registry: self.arg_instance(step, "registry")?,
                seller: self.arg_party(actor, step, "seller")?,
            },
            "remove_seller" => Call::RemoveSeller {
                registry: self.arg_instance(step, "registry")?,
                seller: self.arg_party(actor, step, "seller")?,
            },
            "deploy_policy" => {
                let mut rules = Vec::new();
                if let Some(r) = step.arg("eligible") {
                    rules.push(Rule::EligibleSellers(self.instance(r)?));
                }
                if let Some(m) = step.arg("max") {
                    rules.push(Rule::MaxTokensPerTx(m.parse().expect("validated by the parser")));
                }
                if let Some(c) = step.arg("categories") {
                    rules.push(Rule::ProductCategory(c.split(',').map(str::to_string).collect()));
                }
                if let Some(h) = num(step, "expiry") {
                    rules.push(Rule::ExpiryHeight(h));
                }
                if let Some(c) = step.arg("credential") {
                    let (key, value) =
                        c.split_once(':').ok_or_else(|| Failure::unresolved("credential rule is key:value"))?;
                    let party = match step.arg("party") {
                        Some("sender") => governance::Party::Sender,
                        _ => governance::Party::Recipient,
                    };
                    rules.push(Rule::RequireCredential { key: key.into(), value: AttrValue::parse(value), party });
                }
                Call::DeployPolicy { rules }
            }
            "attach_policy" | "detach_policy" => {
                let target = match num(step, "token") {
                    Some(t) => PolicyTarget::Token(TokenId(t)),
                    None => PolicyTarget::Class,
                };
                let policy = self.arg_instance(step, "policy")?;
                if verb == "detach_policy" {
                    Call::DetachPolicy { class: class()?, target, policy }
                } else {
                    let functions = match step.arg("functions") {
                        None => Vec::new(),
                        Some(f) => f
                            .split(',')
                            .map(|n| {
                                rule_kind(n).ok_or_else(|| Failure::unresolved(format!("unknown rule kind `{n}`")))
                            })
                            .collect::<Result<_, _>>()?,
                    };
                    Call::AttachPolicy { class: class()?, target, policy, functions }
                }
            }
            "issue_credential" => {
                let subject = self.arg_party(actor, step, "subject")?;
                let attributes = attributes(step.arg("attrs").unwrap())?;
                let signature = sign_credential(self.key(actor)?, &subject, &attributes);
                Call::IssueCredential { subject, attributes, signature }
            }
            "revoke_credential" => {
                let label = step.arg("cred").unwrap();
                match self.labels.get(label) {
                    Some(Binding::Credential(id)) => Call::RevokeCredential { credential: *id },
                    _ => return Err(Failure::unresolved(format!("`{label}` is not a credential"))),
                }
            }
            "approve" => Call::Approve {
                class: class()?,
                spender: self.arg_party(actor, step, "spender")?,
                amount: num(step, "amount").unwrap(),
            },
            "transfer_from" => Call::TransferFrom {
                class: class()?,
                owner: self.arg_party(actor, step, "owner")?,
                to: to()?,
                asset: asset(step, "amount", "tokens")?,
                category: step.arg("category").map(str::to_string),
            },
            "open_escrow" => {
                let condition = match (step.arg("oracle"), step.arg("multisig")) {
                    (Some(feed), None) => Condition::OracleConfirms {
                        feed: self.instance(feed)?,
                        key: step.arg("key").ok_or_else(|| Failure::unresolved("oracle condition needs key"))?.into(),
                        expected: step
                            .arg("expected")
                            .ok_or_else(|| Failure::unresolved("oracle condition needs expected"))?
                            .into(),
                    },
                    (None, Some(m)) => Condition::MultisigApproves(self.instance(m)?),
                    _ => return Err(Failure::unresolved("give exactly one of `oracle` and `multisig`")),
                };
                Call::OpenEscrow {
                    buyer: self.arg_party(actor, step, "buyer")?,
                    seller: self.arg_party(actor, step, "seller")?,
                    class: class()?,
                    asset: asset(step, "amount", "tokens")?,
                    condition,
                    deadline: num(step, "deadline").unwrap(),
                }
            }
            "fund_escrow" => Call::FundEscrow { escrow: self.arg_instance(step, "escrow")? },
            "claim_escrow" => Call::ClaimEscrow { escrow: self.arg_instance(step, "escrow")? },
            "create_multisig" | "multisig_update_pool" => {
                let signers = step
                    .arg("signers")
                    .unwrap()
                    .split(',')
                    .map(|s| self.party(actor, s))
                    .collect::<Result<Vec<_>, _>>()?;
                let threshold = num(step, "threshold").unwrap();
                if verb == "create_multisig" {
                    Call::CreateMultisig { signers, threshold }
                } else {
                    Call::MultisigUpdatePool { multisig: self.arg_instance(step, "multisig")?, signers, threshold }
                }
            }
            "multisig_sign" => {
                let multisig = self.arg_instance(step, "multisig")?;
                let payload = self.payload(step)?;
                let signature = sign_multisig(self.key(actor)?, multisig, &payload);
                Call::MultisigSign { multisig, payload, signature }
            }
            "create_oracle" => {
                let attestors = step
                    .arg("attestors")
                    .unwrap()
                    .split(',')
                    .map(|s| self.party(actor, s))
                    .collect::<Result<Vec<_>, _>>()?;
                let trust = match num(step, "quorum") {
                    None if attestors.len() == 1 => Trust::Centralized(attestors[0]),
                    q => Trust::Decentralized { quorum: q.unwrap_or(attestors.len() as u64), attestors },
                };
                let mode = if step.arg("mode") == Some("push") { FeedMode::Push } else { FeedMode::Pull };
                Call::CreateOracle { mode, trust }
            }
            "oracle_push" | "oracle_respond" => {
                let feed = self.arg_instance(step, "feed")?;
                let key = step.arg("key").unwrap().to_string();
                let value = step.arg("value").unwrap().to_string();
                if verb == "oracle_push" {
                    Call::OraclePush { feed, key, value }
                } else {
                    Call::OracleRespond { feed, key, value }
                }
            }
            "oracle_request" => Call::OracleRequest {
                feed: self.arg_instance(step, "feed")?,
                key: step.arg("key").unwrap().to_string(),
                subscribe: flag(step, "subscribe").unwrap_or(false),
            },
            "open_channel" => {
                let a = self.key(actor)?;
                let b = self.key(step.arg("with").unwrap())?;
                let class = class()?;
                let deposit_a = num(step, "deposit_a").unwrap();
                let deposit_b = num(step, "deposit_b").unwrap_or(0);
                let window = num(step, "window").unwrap_or(DEFAULT_CHALLENGE_WINDOW);
                let consent_b = (deposit_b > 0).then(|| {
                    let nonce = self.chain.nonce_of(&a.address());
                    sign_open_consent(b, &a.address(), class, deposit_a, deposit_b, window, nonce)
                });
                Call::OpenChannel {
                    party_b: b.address(),
                    class,
                    deposit_a,
                    deposit_b,
                    challenge_window: window,
                    consent_b,
                }
            }
            "cooperative_settle" | "dispute_settle" | "challenge" => {
                let channel = self.arg_instance(step, "channel")?;
                let store = self.stores.get(actor);
                let update = match step.arg("update") {
                    Some(l) => store.and_then(|s| s.updates.get(l)).cloned(),
                    None => store.and_then(|s| s.sessions.get(&channel)).map(|s| s.latest.clone()),
                }
                .ok_or_else(|| Failure::unresolved(format!("`{actor}` holds no such channel update")))?;
                match verb {
                    "cooperative_settle" => Call::CooperativeSettle { channel, update },
                    "dispute_settle" => Call::DisputeSettle { channel, update },
                    _ => Call::Challenge { channel, update },
                }
            }
            "finalize" => Call::Finalize { channel: self.arg_instance(step, "channel")? },
            "htlc_open" => {
                let lock = self.hash_lock_arg(actor, step.arg("hashlock").unwrap())?;
                let from = self.arg_party(actor, step, "from")?;
                let to = to()?;
                let mut legs = vec![LegSpec { from, to, class: class()?, asset: asset(step, "amount", "tokens")? }];
                if let Some(back) = step.arg("back_class") {
                    legs.push(LegSpec {
                        from: to,
                        to: from,
                        class: self.instance(back)?,
                        asset: asset(step, "back_amount", "back_tokens")?,
                    });
                }
                Call::HtlcOpen { hash_lock: lock, timeout: num(step, "timeout").unwrap(), legs }
            }
            "htlc_fund" => {
                Call::HtlcFund { htlc: self.arg_instance(step, "htlc")?, leg: num(step, "leg").unwrap().min(255) as u8 }
            }
            "htlc_claim" => {
                let htlc = self.arg_instance(step, "htlc")?;
                let preimage = match step.arg("secret") {
                    Some(s) => self.secret(actor, s)?,
                    None => self.known_preimage(actor, htlc),
                };
                Call::HtlcClaim { htlc, preimage }
            }
            "htlc_refund" => Call::HtlcRefund { htlc: self.arg_instance(step, "htlc")? },
            "chain_open" => {
                let path: Vec<Address> =
                    step.arg("path").unwrap().split(',').map(|s| self.party(actor, s)).collect::<Result<_, _>>()?;
                let class = class()?;
                let amount = num(step, "amount").unwrap();
                let hops = path
                    .windows(2)
                    .map(|w| LegSpec { from: w[0], to: w[1], class, asset: Asset::Amount(amount) })
                    .collect();
                Call::ChainOpen {
                    hash_lock: self.hash_lock_arg(actor, step.arg("hashlock").unwrap())?,
                    hops,
                    base_timeout: num(step, "base").unwrap(),
                    decrement: num(step, "decrement").unwrap(),
                }
            }
            other => unreachable!("`{other}` is not an on-chain verb"),
        })
    }

    fn payload(&self, step: &Step) -> Result<Hash32, Failure> {
        match (step.arg("escrow"), step.arg("payload")) {
            (Some(e), None) => Ok(escrow_release_payload(self.instance(e)?)),
            (None, Some(p)) => Ok(sha256(p.as_bytes())),
            _ => Err(Failure::unresolved("give exactly one of `escrow` and `payload`")),
        }
    }

    /// A secret the actor knows is hashed; otherwise the value must be the
    /// hash lock itself in hex.
    fn hash_lock_arg(&self, actor: &str, v: &str) -> Result<Hash32, Failure> {
        if let Some(s) = self.stores.get(actor).and_then(|s| s.secrets.get(v)) {
            return Ok(hash_lock(s));
        }
        Hash32::from_hex(v).ok_or_else(|| Failure::unresolved(format!("`{v}` is neither a known secret nor a hash")))
    }

    /// Preimage from the actor's own secrets, else one published on chain.
    fn known_preimage(&self, actor: &str, htlc: InstanceId) -> Hash32 {
        let Ok(h) = self.chain.contracts().htlc(htlc) else {
            return Hash32([0; 32]);
        };
        let own =
            self.stores.get(actor).and_then(|s| s.secrets.values().find(|s| hash_lock(s) == h.hash_lock).copied());
        own.or_else(|| find_preimage(&self.chain, &h.hash_lock)).unwrap_or(Hash32([0; 32]))
    }

    fn onchain(&mut self, actor: &str, verb: &str, step: &Step) -> Outcome {
        if verb == "chain_propagate" {
            return self.propagate(actor, step);
        }
        let call = self.build_call(actor, verb, step)?;
        let receipt = self.submit(actor, call)?;
        if let Some(e) = receipt.error() {
            return Err(e.clone().into());
        }
        self.bind(step, actor, &receipt.output);
        if verb == "open_channel" {
            self.start_session(actor, step, &receipt)?;
        }
        Ok(receipt.events)
    }

    fn start_session(&mut self, actor: &str, step: &Step, receipt: &Receipt) -> Result<(), Failure> {
        let id = receipt.instance().expect("open_channel deploys a channel");
        let other = step.arg("with").unwrap().to_string();
        let session = ChannelSession::new(
            id,
            num(step, "deposit_a").unwrap(),
            num(step, "deposit_b").unwrap_or(0),
            self.key(actor)?,
            self.key(&other)?,
        );
        self.store(actor).sessions.insert(id, session.clone());
        self.store(&other).sessions.insert(id, session);
        Ok(())
    }

    fn propagate(&mut self, actor: &str, step: &Step) -> Outcome {
        let chain_id = self.arg_instance(step, "chain")?;
        let withholding: BTreeSet<Address> = match step.arg("withhold") {
            None => BTreeSet::new(),
            Some(w) => w.split(',').map(|s| self.party(actor, s)).collect::<Result<_, _>>()?,
        };
        let keys: BTreeMap<Address, KeyPair> = self.keys.values().map(|k| (k.address(), k.clone())).collect();
        let receipts = chain_propagate(&mut self.chain, chain_id, &keys, &withholding)?;
        if let Some(e) = receipts.iter().find_map(|r| r.error()) {
            return Err(e.clone().into());
        }
        Ok(receipts.into_iter().flat_map(|r| r.events).collect())
    }

    fn offchain(&mut self, actor: &str, verb: &str, step: &Step) -> Result<(), Failure> {
        match verb {
            "make_secret" => {
                let label = step.arg("as").unwrap();
                let s = hash_parts(&[b"paysim/secret", &self.seed.to_be_bytes(), actor.as_bytes(), label.as_bytes()]);
                self.store(actor).secrets.insert(label.to_string(), s);
            }
            "share_secret" => {
                let label = step.arg("secret").unwrap();
                let s = self.secret(actor, label)?;
                self.store(step.arg("with").unwrap()).secrets.insert(label.to_string(), s);
            }
            "next_seed" => {
                let s = self.secret(actor, step.arg("secret").unwrap())?;
                self.store(actor).secrets.insert(step.arg("as").unwrap().to_string(), next_seed(&s));
            }
            "derive_stealth" => {
                let root = self.key(step.arg("recipient").unwrap())?.public();
                let s = self.secret(actor, step.arg("secret").unwrap())?;
                let address = derive_stealth_address(&s, &root, num(step, "index").unwrap());
                self.store(actor).addresses.insert(step.arg("as").unwrap().to_string(), address);
            }
            "adopt_stealth" => {
                let s = self.secret(actor, step.arg("secret").unwrap())?;
                let key = derive_stealth_keypair(self.key(actor)?, &s, num(step, "index").unwrap());
                self.chain.register_key(&key);
                let name = step.arg("as").unwrap().to_string();
                self.keys.insert(name.clone(), key);
                self.stores.insert(name, Store::default());
            }
            "present_credential" => {
                let label = step.arg("cred").unwrap();
                let mut c = self
                    .stores
                    .get(actor)
                    .and_then(|s| s.credentials.get(label))
                    .cloned()
                    .ok_or_else(|| Failure::unresolved(format!("`{actor}` holds no credential `{label}`")))?;
                match step.arg("tamper") {
                    None => {}
                    Some("signature") => c.signature.0[10] ^= 1,
                    Some(attr) => {
                        let v = c.attributes.get(attr).map_or("x".to_string(), |v| format!("{v}x"));
                        c.attributes.insert(attr.to_string(), AttrValue::Str(v));
                    }
                }
                self.store(step.arg("to").unwrap()).credentials.insert(label.to_string(), c);
            }
            "pay" => {
                let id = self.arg_instance(step, "channel")?;
                let ch = self.chain.contracts().channel(id).map_err(Failure::from)?.clone();
                let me = self.key(actor)?.address();
                if me != ch.party_a && me != ch.party_b {
                    return Err(Failure { kind: "NotParty".into(), reason: "not a channel party".into() });
                }
                let (na, nb) = match (self.name_of(&ch.party_a), self.name_of(&ch.party_b)) {
                    (Some(a), Some(b)) => (a.to_string(), b.to_string()),
                    _ => return Err(Failure::unresolved("channel parties are not actors")),
                };
                let (ka, kb) = (self.key(&na)?.clone(), self.key(&nb)?.clone());
                let mut session = self
                    .stores
                    .get(actor)
                    .and_then(|s| s.sessions.get(&id))
                    .cloned()
                    .ok_or_else(|| Failure::unresolved("no session for this channel"))?;
                let update = session.pay(me == ch.party_a, num(step, "amount").unwrap(), &ka, &kb)?;
                for party in [&na, &nb] {
                    let store = self.store(party);
                    store.sessions.insert(id, session.clone());
                    if let Some(label) = step.arg("as") {
                        store.updates.insert(label.to_string(), update.clone());
                    }
                }
            }
            other => unreachable!("`{other}` is not an off-chain verb"),
        }
        Ok(())
    }

    /// Runs one step. Expectation mismatches are returned as errors; module
    /// errors are recorded in the step record.
    pub fn step(&mut self, index: usize, step: &Step) -> Result<StepRecord, RunError> {
        let mut record = StepRecord {
            index,
            line: step.line,
            actor: None,
            verb: String::new(),
            height: 0,
            status: String::new(),
            reason: None,
            events: Vec::new(),
        };
        match &step.kind {
            StepKind::Mine(k) => {
                self.chain.mine_blocks(*k);
                record.verb = "mine".into();
                record.status = "mined".into();
            }
            StepKind::Expect(check) => {
                record.verb = format!("expect {check}");
                if let Err((expected, actual)) = self.check(check, step) {
                    return Err(RunError::ExpectationFailed { step: index, line: step.line, expected, actual });
                }
                record.status = "passed".into();
            }
            StepKind::Call { actor, verb } => {
                let spec = verbs::lookup(verb).expect("parser checked the verb");
                record.actor = Some(actor.clone());
                record.verb = verb.clone();
                let outcome = if spec.onchain {
                    self.onchain(actor, verb, step)
                } else {
                    self.offchain(actor, verb, step).map(|()| Vec::new())
                };
                match outcome {
                    Ok(events) => {
                        record.status = if spec.onchain { "ok" } else { "offchain" }.into();
                        record.events = events;
                        self.last = Some(Ok(()));
                    }
                    Err(f) => {
                        record.status = "rejected".into();
                        record.reason = Some(format!("{}: {}", f.kind, f.reason));
                        self.last = Some(Err(f));
                    }
                }
            }
        }
        record.height = self.chain.height();
        Ok(record)
    }

    fn check(&self, check: &str, step: &Step) -> Result<(), (String, String)> {
        let err = |e: Failure| ("a readable value".to_string(), format!("{}: {}", e.kind, e.reason));
        let want = |k: &str| step.arg(k).unwrap_or_default().to_string();
        let cmp = |expected: String, actual: String| {
            if expected == actual {
                Ok(())
            } else {
                Err((expected, actual))
            }
        };
        let class = || self.arg_instance(step, "class").map_err(err);
        let party = |k: &str| self.arg_party("", step, k).map_err(err);
        let core = |e: paysim_core::ContractError| err(e.into());
        match check {
            "ok" => match &self.last {
                Some(Ok(())) => Ok(()),
                Some(Err(f)) => Err(("ok".into(), format!("{}: {}", f.kind, f.reason))),
                None => Err(("ok".into(), "no previous step".into())),
            },
            "error" => match &self.last {
                Some(Err(f)) => cmp(want("kind"), f.kind.clone()),
                Some(Ok(())) => Err((want("kind"), "ok".into())),
                None => Err((want("kind"), "no previous step".into())),
            },
            "height" => cmp(want("value"), self.chain.height().to_string()),
            "balance" => {
                let b = self.chain.balance_of(class()?, &party("of")?).map_err(core)?;
                cmp(want("value"), b.to_string())
            }
            "owner" => {
                let owner = self.chain.owner_of(class()?, TokenId(num(step, "token").unwrap())).map_err(core)?;
                let expected = party("value")?;
                cmp(self.display_address(&expected), self.display_address(&owner))
            }
            "state" => {
                let s = self.chain.token_state(class()?, TokenId(num(step, "token").unwrap())).map_err(core)?;
                cmp(want("value"), s.label().to_string())
            }
            "lifecycle" => {
                let stages = self.chain.lifecycle(class()?, TokenId(num(step, "token").unwrap())).map_err(core)?;
                cmp(want("value"), stages.iter().map(|s| s.label()).collect::<Vec<_>>().join(","))
            }
            "history" => {
                let class = class()?;
                let n = match (num(step, "token"), step.arg("of")) {
                    (Some(t), _) => self.chain.history_of_token(class, TokenId(t)).map_err(core)?.len(),
                    (None, Some(_)) => self.chain.history_of_address(class, &party("of")?).map_err(core)?.len(),
                    (None, None) => self.chain.class_history(class).len(),
                };
                cmp(want("count"), n.to_string())
            }
            "supply" => {
                let s = self.chain.supply(class()?).map_err(core)?;
                let v = match step.arg("field").unwrap() {
                    "minted" => s.minted,
                    "circulating" => s.circulating,
                    "pending" => s.pending,
                    "locked" => s.locked,
                    "redeemed" => s.redeemed,
                    "burned" => s.burned(),
                    _ => s.archived,
                };
                cmp(want("value"), v.to_string())
            }
            "conserved" => {
                let s = self.chain.supply(class()?).map_err(core)?;
                cmp("conserved".into(), if s.is_conserved() { "conserved".into() } else { format!("{s:?}") })
            }
            "allowance" => {
                let a = self.chain.allowance(class()?, &party("owner")?, &party("spender")?).map_err(core)?;
                cmp(want("value"), a.to_string())
            }
            "escrow" => {
                let id = self.arg_instance(step, "escrow").map_err(err)?;
                let e = self.chain.contracts().escrow(id).map_err(core)?;
                cmp(want("value"), lower(&e.state))
            }
            "htlc" => {
                let id = self.arg_instance(step, "htlc").map_err(err)?;
                let h = self.chain.contracts().htlc(id).map_err(core)?;
                cmp(want("value"), lower(&h.state))
            }
            "channel" => {
                let id = self.arg_instance(step, "channel").map_err(err)?;
                let c = self.chain.contracts().channel(id).map_err(core)?;
                let (name, payouts) = match &c.status {
                    ChannelStatus::Open => ("open", None),
                    ChannelStatus::Settling { .. } => ("settling", None),
                    ChannelStatus::Closed { payout_a, payout_b, .. } => ("closed", Some((*payout_a, *payout_b))),
                };
                cmp(want("value"), name.into())?;
                if let (Some(a), Some(b)) = (step.arg("payout_a"), step.arg("payout_b")) {
                    let actual = payouts.map_or("none".into(), |(x, y)| format!("{x}/{y}"));
                    cmp(format!("{a}/{b}"), actual)?;
                }
                Ok(())
            }
            "authorized" => {
                let id = self.arg_instance(step, "multisig").map_err(err)?;
                let payload = self.payload(step).map_err(err)?;
                let ok = self.chain.multisig_authorized(id, &payload).map_err(core)?;
                cmp(want("value"), ok.to_string())
            }
            "oracle" => {
                let feed = self.arg_instance(step, "feed").map_err(err)?;
                let v = self.chain.oracle_read(feed, step.arg("key").unwrap()).map_err(core)?;
                cmp(want("value"), v.map_or("none".into(), |(v, _)| v))
            }
            "inbox" => {
                let n = self.chain.contracts().inbox(&party("of")?).len();
                cmp(want("count"), n.to_string())
            }
            "policy" => {
                let token = num(step, "token").map(TokenId);
                let amount = num(step, "amount").unwrap_or(u64::from(token.is_some()));
                let at = num(step, "at").unwrap_or(self.chain.height());
                let v = self
                    .chain
                    .validate_policy(class()?, token, &party("from")?, &party("to")?, amount, step.arg("category"), at)
                    .map_err(core)?;
                cmp(want("value"), if v.is_pass() { "pass".into() } else { "fail".into() })
            }
            "credential" => {
                let holder = step.arg("holder").unwrap();
                let label = step.arg("cred").unwrap();
                let Some(c) = self.stores.get(holder).and_then(|s| s.credentials.get(label)) else {
                    return Err((want("value"), format!("`{holder}` holds no credential `{label}`")));
                };
                let v = self.chain.verify_credential(c);
                cmp(want("value"), if v.is_pass() { "pass".into() } else { "fail".into() })
            }
            "scan" => {
                let who = step.arg("of").unwrap();
                let root = self.key(who).map_err(err)?.public();
                let secret = self.secret(who, step.arg("secret").unwrap()).map_err(err)?;
                let found = scan_for_payments(&self.chain, &root, &secret, class()?, num(step, "max").unwrap());
                cmp(want("count"), found.len().to_string())?;
                if let Some(t) = step.arg("total") {
                    cmp(t.to_string(), found.iter().map(|p| p.received).sum::<u64>().to_string())?;
                }
                Ok(())
            }
            "events" => {
                let mut filter = EventFilter::default();
                if let Some(e) = step.arg("emitter") {
                    filter = filter.emitter(match self.instance(e) {
                        Ok(id) => id.address(),
                        Err(_) => self.party("", e).map_err(err)?,
                    });
                }
                filter.min_height = num(step, "from");
                filter.max_height = num(step, "to");
                cmp(want("count"), self.chain.query_events(&filter).len().to_string())
            }
            other => unreachable!("unknown check `{other}`"),
        }
    }

    fn display_address(&self, a: &Address) -> String {
        self.name_of(a).map_or_else(|| a.to_hex(), str::to_string)
    }
}

/// Runs `script` from a fresh chain. `seed` overrides the script's own seed.
/// The transcript covers every step up to and including a failed expectation.
pub fn run_scenario(script: &Script, source: &str, seed: Option<u64>) -> Transcript {
    let seed = seed.unwrap_or(script.seed);
    let mut runner = Runner::new(script, seed);
    let mut steps = Vec::with_capacity(script.steps.len());
    let mut failure = None;
    for (i, step) in script.steps.iter().enumerate() {
        match runner.step(i, step) {
            Ok(record) => steps.push(record),
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    Transcript {
        header: Header::new(&script.description, seed, source),
        steps,
        final_digest: runner.chain.digest().to_hex(),
        failure,
    }
}
