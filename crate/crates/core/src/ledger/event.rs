use serde::{Deserialize, Serialize};

use super::{Address, InstanceId};
use crate::channels::Preimage;
use crate::crypto::Hash32;
use crate::governance::{CredentialId, PolicyTarget};
use crate::token::{TokenClassSpec, TokenEvent};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub height: u64,
    pub emitter: Address,
    pub kind: EventKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    TokenClassCreated {
        class: InstanceId,
        issuer: Address,
        spec: TokenClassSpec,
    },
    ClassFrozen {
        class: InstanceId,
        frozen: bool,
    },
    /// Every mutation of a token registry. Folding these per class rebuilds
    /// the registry exactly.
    Token {
        class: InstanceId,
        event: TokenEvent,
    },
    SinkDeployed {
        sink: InstanceId,
    },
    SinkDestroyed {
        sink: InstanceId,
    },

    SellerRegistryDeployed {
        registry: InstanceId,
        owner: Address,
    },
    SellerRegistered {
        registry: InstanceId,
        seller: Address,
    },
    SellerRemoved {
        registry: InstanceId,
        seller: Address,
    },
    PolicyDeployed {
        policy: InstanceId,
        issuer: Address,
    },
    PolicyAttached {
        class: InstanceId,
        target: PolicyTarget,
        policy: InstanceId,
    },
    PolicyDetached {
        class: InstanceId,
        target: PolicyTarget,
        policy: InstanceId,
    },
    CredentialIssued {
        credential: CredentialId,
        issuer: Address,
        subject: Address,
    },
    CredentialRevoked {
        credential: CredentialId,
    },

    EscrowOpened {
        escrow: InstanceId,
        buyer: Address,
        seller: Address,
        deadline: u64,
    },
    EscrowFunded {
        escrow: InstanceId,
    },
    EscrowReleased {
        escrow: InstanceId,
        to: Address,
    },
    EscrowRefunded {
        escrow: InstanceId,
        to: Address,
    },
    MultisigCreated {
        multisig: InstanceId,
        threshold: u64,
        signers: Vec<Address>,
    },
    MultisigSigned {
        multisig: InstanceId,
        signer: Address,
        payload: Hash32,
        approvals: u64,
    },
    MultisigPoolUpdated {
        multisig: InstanceId,
        threshold: u64,
        signers: Vec<Address>,
    },
    OracleCreated {
        feed: InstanceId,
    },
    AttestationRecorded {
        feed: InstanceId,
        key: String,
        attestor: Address,
        value: String,
    },
    DataPublished {
        feed: InstanceId,
        key: String,
        value: String,
    },
    DataRequested {
        feed: InstanceId,
        key: String,
        requester: Address,
    },
    DataDelivered {
        feed: InstanceId,
        key: String,
        requester: Address,
        value: String,
    },

    ChannelOpened {
        channel: InstanceId,
        party_a: Address,
        party_b: Address,
        deposit_a: u64,
        deposit_b: u64,
    },
    DisputeOpened {
        channel: InstanceId,
        seq: u64,
        challenge_deadline: u64,
    },
    ChallengeAccepted {
        channel: InstanceId,
        seq: u64,
    },
    ChannelClosed {
        channel: InstanceId,
        seq: u64,
        payout_a: u64,
        payout_b: u64,
    },
    HtlcOpened {
        htlc: InstanceId,
        hash_lock: Hash32,
        timeout: u64,
    },
    HtlcFunded {
        htlc: InstanceId,
        leg: u8,
    },
    /// Publishes the preimage so downstream hops can claim.
    HtlcClaimed {
        htlc: InstanceId,
        hash_lock: Hash32,
        preimage: Preimage,
    },
    HtlcRefunded {
        htlc: InstanceId,
    },
    HtlcChainOpened {
        chain: InstanceId,
        hops: Vec<InstanceId>,
    },
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        use EventKind::*;
        match self {
            TokenClassCreated { .. } => "TokenClassCreated",
            ClassFrozen { .. } => "ClassFrozen",
            Token { event, .. } => event.name(),
            SinkDeployed { .. } => "SinkDeployed",
            SinkDestroyed { .. } => "SinkDestroyed",
            SellerRegistryDeployed { .. } => "SellerRegistryDeployed",
            SellerRegistered { .. } => "SellerRegistered",
            SellerRemoved { .. } => "SellerRemoved",
            PolicyDeployed { .. } => "PolicyDeployed",
            PolicyAttached { .. } => "PolicyAttached",
            PolicyDetached { .. } => "PolicyDetached",
            CredentialIssued { .. } => "CredentialIssued",
            CredentialRevoked { .. } => "CredentialRevoked",
            EscrowOpened { .. } => "EscrowOpened",
            EscrowFunded { .. } => "EscrowFunded",
            EscrowReleased { .. } => "EscrowReleased",
            EscrowRefunded { .. } => "EscrowRefunded",
            MultisigCreated { .. } => "MultisigCreated",
            MultisigSigned { .. } => "MultisigSigned",
            MultisigPoolUpdated { .. } => "MultisigPoolUpdated",
            OracleCreated { .. } => "OracleCreated",
            AttestationRecorded { .. } => "AttestationRecorded",
            DataPublished { .. } => "DataPublished",
            DataRequested { .. } => "DataRequested",
            DataDelivered { .. } => "DataDelivered",
            ChannelOpened { .. } => "ChannelOpened",
            DisputeOpened { .. } => "DisputeOpened",
            ChallengeAccepted { .. } => "ChallengeAccepted",
            ChannelClosed { .. } => "ChannelClosed",
            HtlcOpened { .. } => "HtlcOpened",
            HtlcFunded { .. } => "HtlcFunded",
            HtlcClaimed { .. } => "HtlcClaimed",
            HtlcRefunded { .. } => "HtlcRefunded",
            HtlcChainOpened { .. } => "HtlcChainOpened",
        }
    }
}

/// Filter for [`super::ChainState::query_events`]. Unset fields match
/// everything; height bounds are inclusive.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EventFilter {
    pub emitter: Option<Address>,
    pub min_height: Option<u64>,
    pub max_height: Option<u64>,
}

impl EventFilter {
    pub fn emitter(mut self, emitter: Address) -> Self {
        self.emitter = Some(emitter);
        self
    }

    pub fn heights(mut self, min: u64, max: u64) -> Self {
        self.min_height = Some(min);
        self.max_height = Some(max);
        self
    }

    pub fn matches(&self, event: &Event) -> bool {
        self.emitter.is_none_or(|e| e == event.emitter)
            && self.min_height.is_none_or(|h| event.height >= h)
            && self.max_height.is_none_or(|h| event.height <= h)
    }
}
