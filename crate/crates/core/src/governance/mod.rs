//! Policy contracts, seller credentials and authorised spenders.

pub(crate) mod ops;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::codec;
use crate::crypto::{hash_parts, KeyPair, Signature};
use crate::error::{ContractError, Result};
use crate::ledger::{Address, ChainState, Contracts, InstanceId};
use crate::token::{Asset, TokenId};

/// Emitter address of the credential registry.
pub fn credential_registry() -> Address {
    Address(hash_parts(&[b"paysim/credential-registry"]).0)
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AttrValue {
    Str(String),
    Int(i64),
    Bool(bool),
}

impl fmt::Display for AttrValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttrValue::Str(s) => f.write_str(s),
            AttrValue::Int(i) => write!(f, "{i}"),
            AttrValue::Bool(b) => write!(f, "{b}"),
        }
    }
}

impl AttrValue {
    /// `true`/`false` become booleans, integers become `Int`, anything else a string.
    pub fn parse(s: &str) -> AttrValue {
        match s {
            "true" => AttrValue::Bool(true),
            "false" => AttrValue::Bool(false),
            _ => s.parse().map(AttrValue::Int).unwrap_or_else(|_| AttrValue::Str(s.to_string())),
        }
    }
}

/// Which side of a transfer a credential rule checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Party {
    Sender,
    Recipient,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rule {
    /// Recipient must be in the seller registry.
    EligibleSellers(InstanceId),
    /// Units per transfer; negative limits are rejected at deploy time.
    MaxTokensPerTx(i64),
    /// Transfer must be tagged with one of these categories.
    ProductCategory(BTreeSet<String>),
    /// Transfers allowed while height ≤ this block.
    ExpiryHeight(u64),
    /// `party` must hold an active credential from the policy issuer with
    /// `attributes[key] == value`.
    RequireCredential { key: String, value: AttrValue, party: Party },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    EligibleSellers,
    MaxTokensPerTx,
    ProductCategory,
    ExpiryHeight,
    RequireCredential,
}

impl Rule {
    pub fn kind(&self) -> RuleKind {
        match self {
            Rule::EligibleSellers(_) => RuleKind::EligibleSellers,
            Rule::MaxTokensPerTx(_) => RuleKind::MaxTokensPerTx,
            Rule::ProductCategory(_) => RuleKind::ProductCategory,
            Rule::ExpiryHeight(_) => RuleKind::ExpiryHeight,
            Rule::RequireCredential { .. } => RuleKind::RequireCredential,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Policy {
    pub issuer: Address,
    pub rules: Vec<Rule>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PolicyTarget {
    Class,
    Token(TokenId),
}

/// A policy bound to a class or a single voucher. `functions` selects which
/// rule kinds of the policy are enforced; empty means all of them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attachment {
    pub target: PolicyTarget,
    pub policy: InstanceId,
    pub functions: Vec<RuleKind>,
}

impl Attachment {
    fn selects(&self, rule: &Rule) -> bool {
        self.functions.is_empty() || self.functions.contains(&rule.kind())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SellerRegistry {
    pub owner: Address,
    pub sellers: BTreeSet<Address>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CredentialId(pub u64);

impl fmt::Display for CredentialId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CredentialStatus {
    Active,
    Revoked,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Credential {
    pub id: CredentialId,
    pub issuer: Address,
    pub subject: Address,
    pub attributes: BTreeMap<String, AttrValue>,
    pub issued_at: u64,
    pub status: CredentialStatus,
    pub signature: Signature,
}

/// Bytes the issuer signs: everything the issuer knows before the registry
/// assigns an id.
pub fn credential_signing_bytes(
    issuer: &Address,
    subject: &Address,
    attributes: &BTreeMap<String, AttrValue>,
) -> Vec<u8> {
    codec::encode(&("paysim/credential", issuer, subject, attributes))
}

pub fn sign_credential(issuer: &KeyPair, subject: &Address, attributes: &BTreeMap<String, AttrValue>) -> Signature {
    issuer.sign(&credential_signing_bytes(&issuer.address(), subject, attributes))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail(String),
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        *self == Verdict::Pass
    }
}

/// Read access needed by policy evaluation.
pub(crate) struct ChainLookup<'a> {
    pub contracts: &'a Contracts,
    pub accounts: &'a BTreeMap<Address, crate::ledger::Account>,
    pub height: u64,
}

impl<'a> ChainLookup<'a> {
    pub fn of(cx: &'a crate::ledger::Exec<'_>) -> Self {
        ChainLookup { contracts: cx.contracts, accounts: cx.accounts, height: cx.height }
    }

    fn signature_valid(&self, cred: &Credential) -> bool {
        match self.public_key(&cred.issuer) {
            Some(pk) => {
                pk.verify(&credential_signing_bytes(&cred.issuer, &cred.subject, &cred.attributes), &cred.signature)
            }
            None => false,
        }
    }

    fn public_key(&self, who: &Address) -> Option<crate::crypto::PublicKey> {
        self.accounts.get(who).and_then(|a| a.public_key)
    }

    fn verify_credential(&self, presented: &Credential) -> Verdict {
        let Some(stored) = self.contracts.credential(presented.id) else {
            return Verdict::Fail(format!("unknown credential {}", presented.id));
        };
        if stored.status != CredentialStatus::Active {
            return Verdict::Fail(format!("credential {} is revoked", presented.id));
        }
        if stored != presented {
            return Verdict::Fail("presented copy differs from the registry".into());
        }
        if !self.signature_valid(presented) {
            return Verdict::Fail("issuer signature does not verify".into());
        }
        Verdict::Pass
    }

    fn holds_credential(&self, subject: &Address, issuer: &Address, key: &str, value: &AttrValue) -> bool {
        self.contracts.credentials.values().any(|c| {
            c.subject == *subject
                && c.issuer == *issuer
                && c.attributes.get(key) == Some(value)
                && self.verify_credential(c).is_pass()
        })
    }

    fn check_rule(&self, issuer: &Address, rule: &Rule, t: &TransferView<'_>) -> Verdict {
        match rule {
            Rule::EligibleSellers(reg) => match self.contracts.seller_registry(*reg) {
                Ok(r) if r.sellers.contains(t.to) => Verdict::Pass,
                Ok(_) => Verdict::Fail(format!("recipient {} is not an eligible seller", short(t.to))),
                Err(_) => Verdict::Fail(format!("seller registry {reg} missing")),
            },
            Rule::MaxTokensPerTx(limit) => {
                if (t.units as i128) <= *limit as i128 {
                    Verdict::Pass
                } else {
                    Verdict::Fail(format!("{} tokens exceed per-transaction limit {limit}", t.units))
                }
            }
            Rule::ProductCategory(codes) => match t.category {
                Some(c) if codes.contains(c) => Verdict::Pass,
                Some(c) => Verdict::Fail(format!("category {c} not allowed")),
                None => Verdict::Fail("transfer carries no product category".into()),
            },
            Rule::ExpiryHeight(h) => {
                if self.height <= *h {
                    Verdict::Pass
                } else {
                    Verdict::Fail(format!("policy expired at height {h}"))
                }
            }
            Rule::RequireCredential { key, value, party } => {
                let who = match party {
                    Party::Sender => t.from,
                    Party::Recipient => t.to,
                };
                if self.holds_credential(who, issuer, key, value) {
                    Verdict::Pass
                } else {
                    Verdict::Fail(format!("{} lacks an active credential {key}={value}", short(who)))
                }
            }
        }
    }

    /// Conjunction over every rule of every attachment that applies to the
    /// class or to one of the moved vouchers.
    fn evaluate(&self, class: InstanceId, t: &TransferView<'_>) -> Result<Verdict> {
        let tc = self.contracts.token_class(class)?;
        for att in &tc.attachments {
            let applies = match att.target {
                PolicyTarget::Class => true,
                PolicyTarget::Token(id) => t.tokens.contains(&id),
            };
            if !applies {
                continue;
            }
            let policy = self.contracts.policy(att.policy)?;
            for rule in policy.rules.iter().filter(|r| att.selects(r)) {
                if let Verdict::Fail(reason) = self.check_rule(&policy.issuer, rule, t) {
                    return Ok(Verdict::Fail(reason));
                }
            }
        }
        Ok(Verdict::Pass)
    }
}

fn short(a: &Address) -> String {
    a.to_hex()[..8].to_string()
}

struct TransferView<'a> {
    from: &'a Address,
    to: &'a Address,
    units: u64,
    tokens: &'a [TokenId],
    category: Option<&'a str>,
}

/// Fails with `PolicyViolation` unless every applicable policy passes.
pub(crate) fn enforce(
    lookup: &ChainLookup<'_>,
    class: InstanceId,
    from: &Address,
    to: &Address,
    asset: &Asset,
    category: Option<&str>,
) -> Result<()> {
    let view = TransferView { from, to, units: asset.units(), tokens: asset.token_ids(), category };
    match lookup.evaluate(class, &view)? {
        Verdict::Pass => Ok(()),
        Verdict::Fail(reason) => Err(ContractError::PolicyViolation(reason)),
    }
}

/// Rule shape checks done once at deploy time.
pub(crate) fn check_rules(contracts: &Contracts, rules: &[Rule]) -> Result<()> {
    for rule in rules {
        match rule {
            Rule::MaxTokensPerTx(l) if *l < 0 => return Err(ContractError::InvalidRule(format!("negative limit {l}"))),
            Rule::EligibleSellers(reg) if contracts.seller_registry(*reg).is_err() => {
                return Err(ContractError::InvalidRule(format!("{reg} is not a seller registry")))
            }
            Rule::ProductCategory(codes) if codes.is_empty() => {
                return Err(ContractError::InvalidRule("empty category set".into()))
            }
            Rule::RequireCredential { key, .. } if key.is_empty() => {
                return Err(ContractError::InvalidRule("empty credential key".into()))
            }
            _ => {}
        }
    }
    Ok(())
}

/// Read-only governance queries.
impl ChainState {
    fn lookup(&self) -> ChainLookup<'_> {
        ChainLookup { contracts: self.contracts(), accounts: self.accounts(), height: self.height() }
    }

    /// Verdict for a hypothetical transfer at `height`. `token` narrows the
    /// check to one voucher's attachments plus the class ones.
    #[allow(clippy::too_many_arguments)]
    pub fn validate_policy(
        &self,
        class: InstanceId,
        token: Option<TokenId>,
        from: &Address,
        to: &Address,
        amount: u64,
        category: Option<&str>,
        height: u64,
    ) -> Result<Verdict> {
        let tokens: Vec<TokenId> = token.into_iter().collect();
        let view = TransferView { from, to, units: amount, tokens: &tokens, category };
        let lookup = ChainLookup { height, ..self.lookup() };
        lookup.evaluate(class, &view)
    }

    /// Passes only for a registry-backed, active, correctly signed credential
    /// identical to the registry copy.
    pub fn verify_credential(&self, presented: &Credential) -> Verdict {
        self.lookup().verify_credential(presented)
    }
}
