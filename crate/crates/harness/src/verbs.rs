//! Verb and expectation tables: argument schemas, the operation each verb
//! drives and the payment pattern it belongs to.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArgKind {
    Int,
    SignedInt,
    Bool,
    /// Comma-separated integers.
    Ints,
    /// A declared actor.
    Actor,
    /// Comma-separated declared actors.
    Actors,
    Choice(&'static [&'static str]),
    /// Label to bind.
    Name,
    /// Anything that resolves to an address at run time: an actor, a stealth
    /// label, `burn` or 64 hex digits.
    Party,
    /// A label bound by an earlier step, or `#n` for a raw instance id.
    Ref,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bind {
    None,
    /// `as=` names the step's output.
    Label,
    /// `as=` declares a new actor.
    Actor,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Pattern {
    TokenTemplate,
    TokenRegistry,
    PolicyContract,
    BurnedTokens,
    SellerCredentials,
    Escrow,
    PaymentChannel,
    StealthAddress,
    Oracle,
    Multisignature,
    TokenSwap,
    AuthorisedSpender,
}

impl Pattern {
    pub const ALL: [Pattern; 12] = [
        Pattern::TokenTemplate,
        Pattern::TokenRegistry,
        Pattern::PolicyContract,
        Pattern::BurnedTokens,
        Pattern::SellerCredentials,
        Pattern::Escrow,
        Pattern::PaymentChannel,
        Pattern::StealthAddress,
        Pattern::Oracle,
        Pattern::Multisignature,
        Pattern::TokenSwap,
        Pattern::AuthorisedSpender,
    ];
}

pub struct VerbSpec {
    pub name: &'static str,
    /// Library operation the verb drives.
    pub op: &'static str,
    pub pattern: Pattern,
    /// On-chain verbs submit a transaction; the rest only touch actor stores.
    pub onchain: bool,
    pub bind: Bind,
    pub args: &'static [(&'static str, ArgKind, bool)],
}

pub struct ExpectSpec {
    pub name: &'static str,
    /// Read operation the check goes through, if any.
    pub op: Option<&'static str>,
    pub args: &'static [(&'static str, ArgKind, bool)],
}

use ArgKind::*;
use Pattern::*;

const BURN_METHODS: &[&str] = &["burn_address", "registry_delete", "sink"];

macro_rules! verb {
    ($name:literal, $op:literal, $pat:expr, $onchain:expr, $bind:expr, [$($arg:expr),* $(,)?]) => {
        VerbSpec { name: $name, op: $op, pattern: $pat, onchain: $onchain, bind: $bind, args: &[$($arg),*] }
    };
}

const fn req(k: &'static str, kind: ArgKind) -> (&'static str, ArgKind, bool) {
    (k, kind, true)
}

const fn opt(k: &'static str, kind: ArgKind) -> (&'static str, ArgKind, bool) {
    (k, kind, false)
}

pub const VERBS: &[VerbSpec] = &[
    // token template, registry, burns
    verb!(
        "spawn",
        "spawn_token_class",
        TokenTemplate,
        true,
        Bind::Label,
        [
            req("name", Text),
            req("symbol", Text),
            opt("decimals", Int),
            opt("supply", Int),
            opt("fungibility", Choice(&["cash", "voucher"])),
            opt("mintable", Bool),
            opt("burnable", Bool),
            opt("as", Name),
        ]
    ),
    verb!(
        "mint",
        "mint",
        TokenRegistry,
        true,
        Bind::None,
        [req("class", Ref), req("to", Party), opt("amount", Int), opt("tokens", Ints),]
    ),
    verb!(
        "request_transfer",
        "request_transfer",
        TokenRegistry,
        true,
        Bind::Label,
        [
            req("class", Ref),
            req("to", Party),
            opt("amount", Int),
            opt("tokens", Ints),
            opt("category", Text),
            opt("as", Name),
        ]
    ),
    verb!(
        "confirm_transfer",
        "confirm_transfer",
        TokenRegistry,
        true,
        Bind::None,
        [req("class", Ref), req("transfer", Ref),]
    ),
    verb!(
        "reject_transfer",
        "reject_transfer",
        TokenRegistry,
        true,
        Bind::None,
        [req("class", Ref), req("transfer", Ref),]
    ),
    verb!(
        "forced_transfer",
        "forced_transfer",
        TokenRegistry,
        true,
        Bind::None,
        [req("class", Ref), req("from", Party), req("to", Party), opt("amount", Int), opt("tokens", Ints),]
    ),
    verb!(
        "burn",
        "burn",
        BurnedTokens,
        true,
        Bind::None,
        [
            req("class", Ref),
            opt("amount", Int),
            opt("tokens", Ints),
            req("method", Choice(BURN_METHODS)),
            opt("sink", Ref),
            opt("archive", Bool),
        ]
    ),
    verb!("redeem", "redeem", TokenRegistry, true, Bind::None, [req("class", Ref), req("tokens", Ints)]),
    verb!("set_frozen", "set_frozen", TokenRegistry, true, Bind::None, [req("class", Ref), req("frozen", Bool)]),
    verb!("deploy_sink", "deploy_sink", BurnedTokens, true, Bind::Label, [opt("as", Name)]),
    // policies, credentials, authorised spender
    verb!("deploy_seller_registry", "deploy_seller_registry", PolicyContract, true, Bind::Label, [opt("as", Name)]),
    verb!(
        "register_seller",
        "register_seller",
        PolicyContract,
        true,
        Bind::None,
        [req("registry", Ref), req("seller", Party),]
    ),
    verb!(
        "remove_seller",
        "remove_seller",
        PolicyContract,
        true,
        Bind::None,
        [req("registry", Ref), req("seller", Party),]
    ),
    verb!(
        "deploy_policy",
        "deploy_policy",
        PolicyContract,
        true,
        Bind::Label,
        [
            opt("eligible", Ref),
            opt("max", SignedInt),
            opt("categories", Text),
            opt("expiry", Int),
            opt("credential", Text),
            opt("party", Choice(&["sender", "recipient"])),
            opt("as", Name),
        ]
    ),
    verb!(
        "attach_policy",
        "attach_policy",
        PolicyContract,
        true,
        Bind::None,
        [req("class", Ref), req("policy", Ref), opt("token", Int), opt("functions", Text),]
    ),
    verb!(
        "detach_policy",
        "detach_policy",
        PolicyContract,
        true,
        Bind::None,
        [req("class", Ref), req("policy", Ref), opt("token", Int),]
    ),
    verb!(
        "issue_credential",
        "issue_credential",
        SellerCredentials,
        true,
        Bind::Label,
        [req("subject", Actor), req("attrs", Text), opt("as", Name),]
    ),
    verb!("revoke_credential", "revoke_credential", SellerCredentials, true, Bind::None, [req("cred", Ref)]),
    verb!(
        "present_credential",
        "present_credential",
        SellerCredentials,
        false,
        Bind::None,
        [req("cred", Name), req("to", Actor), opt("tamper", Text),]
    ),
    verb!(
        "approve",
        "approve",
        AuthorisedSpender,
        true,
        Bind::None,
        [req("class", Ref), req("spender", Party), req("amount", Int),]
    ),
    verb!(
        "transfer_from",
        "transfer_from",
        AuthorisedSpender,
        true,
        Bind::None,
        [
            req("class", Ref),
            req("owner", Party),
            req("to", Party),
            opt("amount", Int),
            opt("tokens", Ints),
            opt("category", Text),
        ]
    ),
    // escrow, multisig, oracle
    verb!(
        "open_escrow",
        "open_escrow",
        Escrow,
        true,
        Bind::Label,
        [
            req("buyer", Party),
            req("seller", Party),
            req("class", Ref),
            opt("amount", Int),
            opt("tokens", Ints),
            req("deadline", Int),
            opt("oracle", Ref),
            opt("key", Text),
            opt("expected", Text),
            opt("multisig", Ref),
            opt("as", Name),
        ]
    ),
    verb!("fund_escrow", "fund_escrow", Escrow, true, Bind::None, [req("escrow", Ref)]),
    verb!("claim_escrow", "claim_escrow", Escrow, true, Bind::None, [req("escrow", Ref)]),
    verb!(
        "create_multisig",
        "create_multisig",
        Multisignature,
        true,
        Bind::Label,
        [req("signers", Actors), req("threshold", Int), opt("as", Name),]
    ),
    verb!(
        "multisig_sign",
        "multisig_sign",
        Multisignature,
        true,
        Bind::None,
        [req("multisig", Ref), opt("escrow", Ref), opt("payload", Text),]
    ),
    verb!(
        "multisig_update_pool",
        "multisig_update_pool",
        Multisignature,
        true,
        Bind::None,
        [req("multisig", Ref), req("signers", Actors), req("threshold", Int),]
    ),
    verb!(
        "create_oracle",
        "create_oracle",
        Oracle,
        true,
        Bind::Label,
        [req("mode", Choice(&["push", "pull"])), req("attestors", Actors), opt("quorum", Int), opt("as", Name),]
    ),
    verb!(
        "oracle_push",
        "oracle_push",
        Oracle,
        true,
        Bind::None,
        [req("feed", Ref), req("key", Text), req("value", Text),]
    ),
    verb!(
        "oracle_request",
        "oracle_request",
        Oracle,
        true,
        Bind::None,
        [req("feed", Ref), req("key", Text), opt("subscribe", Bool),]
    ),
    verb!(
        "oracle_respond",
        "oracle_respond",
        Oracle,
        true,
        Bind::None,
        [req("feed", Ref), req("key", Text), req("value", Text),]
    ),
    // channels and swaps
    verb!(
        "open_channel",
        "open_channel",
        PaymentChannel,
        true,
        Bind::Label,
        [
            req("with", Actor),
            req("class", Ref),
            req("deposit_a", Int),
            opt("deposit_b", Int),
            opt("window", Int),
            opt("as", Name),
        ]
    ),
    verb!(
        "pay",
        "make_update",
        PaymentChannel,
        false,
        Bind::None,
        [req("channel", Ref), req("amount", Int), opt("as", Name),]
    ),
    verb!(
        "cooperative_settle",
        "cooperative_settle",
        PaymentChannel,
        true,
        Bind::None,
        [req("channel", Ref), opt("update", Name),]
    ),
    verb!(
        "dispute_settle",
        "dispute_settle",
        PaymentChannel,
        true,
        Bind::None,
        [req("channel", Ref), opt("update", Name),]
    ),
    verb!("challenge", "challenge", PaymentChannel, true, Bind::None, [req("channel", Ref), opt("update", Name)]),
    verb!("finalize", "finalize", PaymentChannel, true, Bind::None, [req("channel", Ref)]),
    verb!("make_secret", "make_secret", TokenSwap, false, Bind::None, [req("as", Name)]),
    verb!("share_secret", "share_secret", TokenSwap, false, Bind::None, [req("secret", Name), req("with", Actor)]),
    verb!(
        "htlc_open",
        "htlc_open",
        TokenSwap,
        true,
        Bind::Label,
        [
            req("hashlock", Text),
            req("timeout", Int),
            req("from", Party),
            req("to", Party),
            req("class", Ref),
            opt("amount", Int),
            opt("tokens", Ints),
            opt("back_class", Ref),
            opt("back_amount", Int),
            opt("back_tokens", Ints),
            opt("as", Name),
        ]
    ),
    verb!("htlc_fund", "htlc_fund", TokenSwap, true, Bind::None, [req("htlc", Ref), req("leg", Int)]),
    verb!("htlc_claim", "htlc_claim", TokenSwap, true, Bind::None, [req("htlc", Ref), opt("secret", Name)]),
    verb!("htlc_refund", "htlc_refund", TokenSwap, true, Bind::None, [req("htlc", Ref)]),
    verb!(
        "chain_open",
        "chain_open",
        TokenSwap,
        true,
        Bind::Label,
        [
            req("hashlock", Text),
            req("path", Actors),
            req("class", Ref),
            req("amount", Int),
            req("base", Int),
            req("decrement", Int),
            opt("as", Name),
        ]
    ),
    verb!(
        "chain_propagate",
        "chain_propagate",
        TokenSwap,
        true,
        Bind::None,
        [req("chain", Ref), opt("withhold", Actors),]
    ),
    // stealth addresses
    verb!(
        "derive_stealth",
        "derive_stealth_address",
        StealthAddress,
        false,
        Bind::None,
        [req("recipient", Actor), req("secret", Name), req("index", Int), req("as", Name),]
    ),
    verb!(
        "adopt_stealth",
        "derive_stealth_address",
        StealthAddress,
        false,
        Bind::Actor,
        [req("secret", Name), req("index", Int), req("as", Name),]
    ),
    verb!("next_seed", "next_seed", StealthAddress, false, Bind::None, [req("secret", Name), req("as", Name)]),
];

pub const EXPECTS: &[ExpectSpec] = &[
    ExpectSpec { name: "ok", op: None, args: &[] },
    ExpectSpec { name: "error", op: None, args: &[req("kind", Text)] },
    ExpectSpec { name: "height", op: None, args: &[req("value", Int)] },
    ExpectSpec {
        name: "balance",
        op: Some("balance_of"),
        args: &[req("class", Ref), req("of", Party), req("value", Int)],
    },
    ExpectSpec {
        name: "owner",
        op: Some("owner_of"),
        args: &[req("class", Ref), req("token", Int), req("value", Party)],
    },
    ExpectSpec { name: "state", op: None, args: &[req("class", Ref), req("token", Int), req("value", Text)] },
    ExpectSpec {
        name: "lifecycle",
        op: Some("history"),
        args: &[req("class", Ref), req("token", Int), req("value", Text)],
    },
    ExpectSpec {
        name: "history",
        op: Some("history"),
        args: &[req("class", Ref), opt("of", Party), opt("token", Int), req("count", Int)],
    },
    ExpectSpec {
        name: "supply",
        op: None,
        args: &[
            req("class", Ref),
            req("field", Choice(&["minted", "circulating", "pending", "locked", "redeemed", "burned", "archived"])),
            req("value", Int),
        ],
    },
    ExpectSpec { name: "conserved", op: None, args: &[req("class", Ref)] },
    ExpectSpec {
        name: "allowance",
        op: None,
        args: &[req("class", Ref), req("owner", Party), req("spender", Party), req("value", Int)],
    },
    ExpectSpec { name: "escrow", op: None, args: &[req("escrow", Ref), req("value", Text)] },
    ExpectSpec { name: "htlc", op: None, args: &[req("htlc", Ref), req("value", Text)] },
    ExpectSpec {
        name: "channel",
        op: None,
        args: &[req("channel", Ref), req("value", Text), opt("payout_a", Int), opt("payout_b", Int)],
    },
    ExpectSpec {
        name: "authorized",
        op: None,
        args: &[req("multisig", Ref), opt("escrow", Ref), opt("payload", Text), req("value", Bool)],
    },
    ExpectSpec {
        name: "oracle",
        op: Some("oracle_read"),
        args: &[req("feed", Ref), req("key", Text), req("value", Text)],
    },
    ExpectSpec { name: "inbox", op: None, args: &[req("of", Party), req("count", Int)] },
    ExpectSpec {
        name: "policy",
        op: Some("validate_policy"),
        args: &[
            req("class", Ref),
            req("from", Party),
            req("to", Party),
            opt("amount", Int),
            opt("token", Int),
            opt("category", Text),
            opt("at", Int),
            req("value", Choice(&["pass", "fail"])),
        ],
    },
    ExpectSpec {
        name: "credential",
        op: Some("verify_credential"),
        args: &[req("holder", Actor), req("cred", Name), req("value", Choice(&["pass", "fail"]))],
    },
    ExpectSpec {
        name: "scan",
        op: Some("scan_for_payments"),
        args: &[
            req("of", Actor),
            req("secret", Name),
            req("class", Ref),
            req("max", Int),
            req("count", Int),
            opt("total", Int),
        ],
    },
    ExpectSpec {
        name: "events",
        op: Some("query_events"),
        args: &[opt("emitter", Ref), opt("from", Int), opt("to", Int), req("count", Int)],
    },
];

pub fn lookup(verb: &str) -> Option<&'static VerbSpec> {
    VERBS.iter().find(|v| v.name == verb)
}

pub fn lookup_expect(check: &str) -> Option<&'static ExpectSpec> {
    EXPECTS.iter().find(|e| e.name == check)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn names_are_unique_and_bindings_have_as() {
        let names: BTreeSet<_> = VERBS.iter().map(|v| v.name).collect();
        assert_eq!(names.len(), VERBS.len());
        for v in VERBS {
            if v.bind != Bind::None {
                assert!(v.args.iter().any(|(k, _, _)| *k == "as"), "{}", v.name);
            }
        }
    }

    #[test]
    fn every_pattern_has_a_verb() {
        for p in Pattern::ALL {
            assert!(VERBS.iter().any(|v| v.pattern == p), "{p:?}");
        }
    }
}
