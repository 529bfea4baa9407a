use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Account, Address, Call, Event, EventKind, InstanceId, Output};
use crate::channels::{self, Channel, Htlc, HtlcChain};
use crate::crypto::PublicKey;
use crate::error::{ContractError, Result};
use crate::governance::{self, Credential, CredentialId, Policy, SellerRegistry};
use crate::settlement::{self, Delivery, EscrowAgreement, Multisig, OracleFeed};
use crate::token::{self, Sink, TokenClass};

/// A deployed contract instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Instance {
    TokenClass(TokenClass),
    Sink(Sink),
    SellerRegistry(SellerRegistry),
    Policy(Policy),
    Escrow(EscrowAgreement),
    Multisig(Multisig),
    Oracle(OracleFeed),
    Channel(Channel),
    Htlc(Htlc),
    HtlcChain(HtlcChain),
}

macro_rules! accessors {
    ($get:ident, $get_mut:ident, $variant:ident, $ty:ty) => {
        pub fn $get(&self, id: InstanceId) -> Result<&$ty> {
            match self.instances.get(&id) {
                Some(Instance::$variant(x)) => Ok(x),
                _ => Err(ContractError::UnknownTarget(id)),
            }
        }

        #[allow(dead_code)]
        pub(crate) fn $get_mut(&mut self, id: InstanceId) -> Result<&mut $ty> {
            match self.instances.get_mut(&id) {
                Some(Instance::$variant(x)) => Ok(x),
                _ => Err(ContractError::UnknownTarget(id)),
            }
        }
    };
}

/// All contract state, plus the singleton credential registry and the
/// oracle callback inboxes.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contracts {
    next_instance: u64,
    instances: BTreeMap<InstanceId, Instance>,
    pub(crate) next_credential: u64,
    pub(crate) credentials: BTreeMap<CredentialId, Credential>,
    pub(crate) inbox: BTreeMap<Address, Vec<Delivery>>,
}

impl Contracts {
    accessors!(token_class, token_class_mut, TokenClass, TokenClass);
    accessors!(sink, sink_mut, Sink, Sink);
    accessors!(seller_registry, seller_registry_mut, SellerRegistry, SellerRegistry);
    accessors!(policy, policy_mut, Policy, Policy);
    accessors!(escrow, escrow_mut, Escrow, EscrowAgreement);
    accessors!(multisig, multisig_mut, Multisig, Multisig);
    accessors!(oracle, oracle_mut, Oracle, OracleFeed);
    accessors!(channel, channel_mut, Channel, Channel);
    accessors!(htlc, htlc_mut, Htlc, Htlc);
    accessors!(htlc_chain, htlc_chain_mut, HtlcChain, HtlcChain);

    pub fn contains(&self, id: InstanceId) -> bool {
        self.instances.contains_key(&id)
    }

    pub fn instances(&self) -> impl Iterator<Item = (&InstanceId, &Instance)> {
        self.instances.iter()
    }

    pub fn credential(&self, id: CredentialId) -> Option<&Credential> {
        self.credentials.get(&id)
    }

    /// Oracle deliveries received by `requester`, oldest first.
    pub fn inbox(&self, requester: &Address) -> &[Delivery] {
        self.inbox.get(requester).map_or(&[], |v| v.as_slice())
    }

    pub(crate) fn deploy(&mut self, instance: Instance) -> InstanceId {
        let id = InstanceId(self.next_instance);
        self.next_instance += 1;
        self.instances.insert(id, instance);
        id
    }
}

/// Execution context for one transaction. Mutations go to a scratch copy of
/// [`Contracts`] that is discarded if the handler returns an error.
pub(crate) struct Exec<'a> {
    pub height: u64,
    pub sender: Address,
    pub nonce: u64,
    pub accounts: &'a BTreeMap<Address, Account>,
    pub contracts: &'a mut Contracts,
    pub events: Vec<Event>,
}

impl Exec<'_> {
    pub fn emit(&mut self, emitter: Address, kind: EventKind) {
        self.events.push(Event { height: self.height, emitter, kind });
    }

    pub fn public_key(&self, address: &Address) -> Option<PublicKey> {
        self.accounts.get(address).and_then(|a| a.public_key)
    }
}

pub(crate) fn dispatch(cx: &mut Exec<'_>, call: &Call) -> Result<Output> {
    use Call::*;
    match call {
        SpawnTokenClass { spec } => token::ops::spawn(cx, spec.clone()).map(Output::Instance),
        Mint { class, to, asset } => token::ops::mint(cx, *class, *to, asset).map(|_| Output::None),
        RequestTransfer { class, to, asset, category } => {
            token::ops::request_transfer(cx, *class, *to, asset, category.as_deref()).map(Output::Transfer)
        }
        ConfirmTransfer { class, transfer } => {
            token::ops::confirm_transfer(cx, *class, *transfer).map(|_| Output::None)
        }
        RejectTransfer { class, transfer } => token::ops::reject_transfer(cx, *class, *transfer).map(|_| Output::None),
        ForcedTransfer { class, from, to, asset } => {
            token::ops::forced_transfer(cx, *class, *from, *to, asset).map(|_| Output::None)
        }
        Burn { class, asset, method, archive } => {
            token::ops::burn(cx, *class, asset, *method, *archive).map(|_| Output::None)
        }
        Redeem { class, asset } => token::ops::redeem(cx, *class, asset).map(|_| Output::None),
        SetFrozen { class, frozen } => token::ops::set_frozen(cx, *class, *frozen).map(|_| Output::None),
        DeploySink => Ok(Output::Instance(token::ops::deploy_sink(cx))),

        DeploySellerRegistry => Ok(Output::Instance(governance::ops::deploy_seller_registry(cx))),
        RegisterSeller { registry, seller } => {
            governance::ops::set_seller(cx, *registry, *seller, true).map(|_| Output::None)
        }
        RemoveSeller { registry, seller } => {
            governance::ops::set_seller(cx, *registry, *seller, false).map(|_| Output::None)
        }
        DeployPolicy { rules } => governance::ops::deploy_policy(cx, rules.clone()).map(Output::Instance),
        AttachPolicy { class, target, policy, functions } => {
            governance::ops::attach_policy(cx, *class, *target, *policy, functions.clone()).map(|_| Output::None)
        }
        DetachPolicy { class, target, policy } => {
            governance::ops::detach_policy(cx, *class, *target, *policy).map(|_| Output::None)
        }
        IssueCredential { subject, attributes, signature } => {
            governance::ops::issue_credential(cx, *subject, attributes.clone(), *signature).map(Output::Credential)
        }
        RevokeCredential { credential } => governance::ops::revoke_credential(cx, *credential).map(|_| Output::None),
        Approve { class, spender, amount } => {
            governance::ops::approve(cx, *class, *spender, *amount).map(|_| Output::None)
        }
        TransferFrom { class, owner, to, asset, category } => {
            governance::ops::transfer_from(cx, *class, *owner, *to, asset, category.as_deref()).map(|_| Output::None)
        }

        OpenEscrow { buyer, seller, class, asset, condition, deadline } => {
            settlement::ops::open_escrow(cx, *buyer, *seller, *class, asset.clone(), condition.clone(), *deadline)
                .map(Output::Instance)
        }
        FundEscrow { escrow } => settlement::ops::fund_escrow(cx, *escrow).map(|_| Output::None),
        ClaimEscrow { escrow } => settlement::ops::claim_escrow(cx, *escrow).map(|_| Output::None),
        CreateMultisig { signers, threshold } => {
            settlement::ops::create_multisig(cx, signers.clone(), *threshold).map(Output::Instance)
        }
        MultisigSign { multisig, payload, signature } => {
            settlement::ops::multisig_sign(cx, *multisig, *payload, *signature).map(|_| Output::None)
        }
        MultisigUpdatePool { multisig, signers, threshold } => {
            settlement::ops::multisig_update_pool(cx, *multisig, signers.clone(), *threshold).map(|_| Output::None)
        }
        CreateOracle { mode, trust } => settlement::ops::create_oracle(cx, *mode, trust.clone()).map(Output::Instance),
        OraclePush { feed, key, value } => settlement::ops::oracle_push(cx, *feed, key, value).map(|_| Output::None),
        OracleRequest { feed, key, subscribe } => {
            settlement::ops::oracle_request(cx, *feed, key, *subscribe).map(|_| Output::None)
        }
        OracleRespond { feed, key, value } => {
            settlement::ops::oracle_respond(cx, *feed, key, value).map(|_| Output::None)
        }

        OpenChannel { party_b, class, deposit_a, deposit_b, challenge_window, consent_b } => {
            channels::ops::open_channel(cx, *party_b, *class, *deposit_a, *deposit_b, *challenge_window, *consent_b)
                .map(Output::Instance)
        }
        CooperativeSettle { channel, update } => {
            channels::ops::cooperative_settle(cx, *channel, update).map(|_| Output::None)
        }
        DisputeSettle { channel, update } => channels::ops::dispute_settle(cx, *channel, update).map(|_| Output::None),
        Challenge { channel, update } => channels::ops::challenge(cx, *channel, update).map(|_| Output::None),
        Finalize { channel } => channels::ops::finalize(cx, *channel).map(|_| Output::None),
        HtlcOpen { hash_lock, timeout, legs } => {
            channels::ops::htlc_open(cx, *hash_lock, *timeout, legs.clone()).map(Output::Instance)
        }
        HtlcFund { htlc, leg } => channels::ops::htlc_fund(cx, *htlc, *leg).map(|_| Output::None),
        HtlcClaim { htlc, preimage } => channels::ops::htlc_claim(cx, *htlc, *preimage).map(|_| Output::None),
        HtlcRefund { htlc } => channels::ops::htlc_refund(cx, *htlc).map(|_| Output::None),
        ChainOpen { hash_lock, hops, base_timeout, decrement } => {
            channels::ops::chain_open(cx, *hash_lock, hops.clone(), *base_timeout, *decrement)
                .map(|(chain, hops)| Output::Chain { chain, hops })
        }
    }
}
