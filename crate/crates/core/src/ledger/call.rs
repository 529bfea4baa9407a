use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Address, InstanceId};
use crate::channels::{ChannelUpdate, LegSpec, Preimage};
use crate::crypto::{Hash32, Signature};
use crate::governance::{AttrValue, Credential, CredentialId, PolicyTarget, Rule, RuleKind};
use crate::settlement::{Condition, FeedMode, Trust};
use crate::token::{Asset, BurnMethod, TokenClassSpec, TransferId};

/// Where a transaction is routed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Target {
    /// The built-in factory that deploys new contract instances.
    Factory,
    Instance(InstanceId),
}

/// Method and arguments of a transaction. Variants map one-to-one onto
/// contract operations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Call {
    // token template / registry / burn
    SpawnTokenClass {
        spec: TokenClassSpec,
    },
    Mint {
        class: InstanceId,
        to: Address,
        asset: Asset,
    },
    RequestTransfer {
        class: InstanceId,
        to: Address,
        asset: Asset,
        category: Option<String>,
    },
    ConfirmTransfer {
        class: InstanceId,
        transfer: TransferId,
    },
    RejectTransfer {
        class: InstanceId,
        transfer: TransferId,
    },
    ForcedTransfer {
        class: InstanceId,
        from: Address,
        to: Address,
        asset: Asset,
    },
    Burn {
        class: InstanceId,
        asset: Asset,
        method: BurnMethod,
        archive: bool,
    },
    Redeem {
        class: InstanceId,
        asset: Asset,
    },
    SetFrozen {
        class: InstanceId,
        frozen: bool,
    },
    DeploySink,

    // policy / credential / authorised spender
    DeploySellerRegistry,
    RegisterSeller {
        registry: InstanceId,
        seller: Address,
    },
    RemoveSeller {
        registry: InstanceId,
        seller: Address,
    },
    DeployPolicy {
        rules: Vec<Rule>,
    },
    AttachPolicy {
        class: InstanceId,
        target: PolicyTarget,
        policy: InstanceId,
        functions: Vec<RuleKind>,
    },
    DetachPolicy {
        class: InstanceId,
        target: PolicyTarget,
        policy: InstanceId,
    },
    IssueCredential {
        subject: Address,
        attributes: BTreeMap<String, AttrValue>,
        signature: Signature,
    },
    RevokeCredential {
        credential: CredentialId,
    },
    Approve {
        class: InstanceId,
        spender: Address,
        amount: u64,
    },
    TransferFrom {
        class: InstanceId,
        owner: Address,
        to: Address,
        asset: Asset,
        category: Option<String>,
    },

    // escrow / multisig / oracle
    OpenEscrow {
        buyer: Address,
        seller: Address,
        class: InstanceId,
        asset: Asset,
        condition: Condition,
        deadline: u64,
    },
    FundEscrow {
        escrow: InstanceId,
    },
    ClaimEscrow {
        escrow: InstanceId,
    },
    CreateMultisig {
        signers: Vec<Address>,
        threshold: u64,
    },
    MultisigSign {
        multisig: InstanceId,
        payload: Hash32,
        signature: Signature,
    },
    MultisigUpdatePool {
        multisig: InstanceId,
        signers: Vec<Address>,
        threshold: u64,
    },
    CreateOracle {
        mode: FeedMode,
        trust: Trust,
    },
    OraclePush {
        feed: InstanceId,
        key: String,
        value: String,
    },
    OracleRequest {
        feed: InstanceId,
        key: String,
        subscribe: bool,
    },
    OracleRespond {
        feed: InstanceId,
        key: String,
        value: String,
    },

    // payment channel / token swap
    OpenChannel {
        party_b: Address,
        class: InstanceId,
        deposit_a: u64,
        deposit_b: u64,
        challenge_window: u64,
        /// Party B's signature over the opening terms; needed when B deposits.
        consent_b: Option<Signature>,
    },
    CooperativeSettle {
        channel: InstanceId,
        update: ChannelUpdate,
    },
    DisputeSettle {
        channel: InstanceId,
        update: ChannelUpdate,
    },
    Challenge {
        channel: InstanceId,
        update: ChannelUpdate,
    },
    Finalize {
        channel: InstanceId,
    },
    HtlcOpen {
        hash_lock: Hash32,
        timeout: u64,
        legs: Vec<LegSpec>,
    },
    HtlcFund {
        htlc: InstanceId,
        leg: u8,
    },
    HtlcClaim {
        htlc: InstanceId,
        preimage: Preimage,
    },
    HtlcRefund {
        htlc: InstanceId,
    },
    ChainOpen {
        hash_lock: Hash32,
        hops: Vec<LegSpec>,
        base_timeout: u64,
        decrement: u64,
    },
}

impl Call {
    pub fn target(&self) -> Target {
        use Call::*;
        let id = match self {
            SpawnTokenClass { .. }
            | DeploySink
            | DeploySellerRegistry
            | DeployPolicy { .. }
            | IssueCredential { .. }
            | RevokeCredential { .. }
            | OpenEscrow { .. }
            | CreateMultisig { .. }
            | CreateOracle { .. }
            | OpenChannel { .. }
            | HtlcOpen { .. }
            | ChainOpen { .. } => return Target::Factory,
            Mint { class, .. }
            | RequestTransfer { class, .. }
            | ConfirmTransfer { class, .. }
            | RejectTransfer { class, .. }
            | ForcedTransfer { class, .. }
            | Burn { class, .. }
            | Redeem { class, .. }
            | SetFrozen { class, .. }
            | AttachPolicy { class, .. }
            | DetachPolicy { class, .. }
            | Approve { class, .. }
            | TransferFrom { class, .. } => class,
            RegisterSeller { registry, .. } | RemoveSeller { registry, .. } => registry,
            FundEscrow { escrow } | ClaimEscrow { escrow } => escrow,
            MultisigSign { multisig, .. } | MultisigUpdatePool { multisig, .. } => multisig,
            OraclePush { feed, .. } | OracleRequest { feed, .. } | OracleRespond { feed, .. } => feed,
            CooperativeSettle { channel, .. }
            | DisputeSettle { channel, .. }
            | Challenge { channel, .. }
            | Finalize { channel } => channel,
            HtlcFund { htlc, .. } | HtlcClaim { htlc, .. } | HtlcRefund { htlc } => htlc,
        };
        Target::Instance(*id)
    }

    pub fn method(&self) -> &'static str {
        use Call::*;
        match self {
            SpawnTokenClass { .. } => "spawn_token_class",
            Mint { .. } => "mint",
            RequestTransfer { .. } => "request_transfer",
            ConfirmTransfer { .. } => "confirm_transfer",
            RejectTransfer { .. } => "reject_transfer",
            ForcedTransfer { .. } => "forced_transfer",
            Burn { .. } => "burn",
            Redeem { .. } => "redeem",
            SetFrozen { .. } => "set_frozen",
            DeploySink => "deploy_sink",
            DeploySellerRegistry => "deploy_seller_registry",
            RegisterSeller { .. } => "register_seller",
            RemoveSeller { .. } => "remove_seller",
            DeployPolicy { .. } => "deploy_policy",
            AttachPolicy { .. } => "attach_policy",
            DetachPolicy { .. } => "detach_policy",
            IssueCredential { .. } => "issue_credential",
            RevokeCredential { .. } => "revoke_credential",
            Approve { .. } => "approve",
            TransferFrom { .. } => "transfer_from",
            OpenEscrow { .. } => "open_escrow",
            FundEscrow { .. } => "fund_escrow",
            ClaimEscrow { .. } => "claim_escrow",
            CreateMultisig { .. } => "create_multisig",
            MultisigSign { .. } => "multisig_sign",
            MultisigUpdatePool { .. } => "multisig_update_pool",
            CreateOracle { .. } => "create_oracle",
            OraclePush { .. } => "oracle_push",
            OracleRequest { .. } => "oracle_request",
            OracleRespond { .. } => "oracle_respond",
            OpenChannel { .. } => "open_channel",
            CooperativeSettle { .. } => "cooperative_settle",
            DisputeSettle { .. } => "dispute_settle",
            Challenge { .. } => "challenge",
            Finalize { .. } => "finalize",
            HtlcOpen { .. } => "htlc_open",
            HtlcFund { .. } => "htlc_fund",
            HtlcClaim { .. } => "htlc_claim",
            HtlcRefund { .. } => "htlc_refund",
            ChainOpen { .. } => "chain_open",
        }
    }
}

/// Value returned by a successful transaction.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Output {
    #[default]
    None,
    Instance(InstanceId),
    Transfer(TransferId),
    /// Signed copy delivered to the subject's wallet.
    Credential(Credential),
    Chain {
        chain: InstanceId,
        hops: Vec<InstanceId>,
    },
}
