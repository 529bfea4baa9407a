//! Deterministic account-model ledger.
//!
//! A single [`ChainState`] owns every account, contract instance and event.
//! Transactions execute immediately against the pending block; the only clock
//! is the block height, advanced by [`ChainState::mine_block`].

mod call;
mod event;
mod exec;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::codec;
pub use crate::crypto::Address;
use crate::crypto::{hash_parts, Hash32, KeyPair, PublicKey, Signature};
use crate::error::ContractError;

pub use call::{Call, Output, Target};
pub use event::{Event, EventFilter, EventKind};
pub(crate) use exec::Exec;
pub use exec::{Contracts, Instance};

/// Flat fee charged for every transaction that passes authentication.
pub const FLAT_FEE: u64 = 1;

/// Identifier of a deployed contract instance. Unique per chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct InstanceId(pub u64);

impl InstanceId {
    /// Ledger address of the instance, used as event emitter and as the
    /// requester address for oracle callbacks.
    pub fn address(self) -> Address {
        Address(hash_parts(&[b"paysim/instance", &self.0.to_be_bytes()]).0)
    }
}

impl fmt::Display for InstanceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Account {
    /// Learned from `create_account` or from the first signed transaction.
    pub public_key: Option<PublicKey>,
    pub nonce: u64,
    pub fees_paid: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transaction {
    pub sender: Address,
    pub public_key: PublicKey,
    pub nonce: u64,
    pub call: Call,
    pub signature: Signature,
}

impl Transaction {
    fn signing_bytes(sender: &Address, public_key: &PublicKey, nonce: u64, call: &Call) -> Vec<u8> {
        codec::encode(&("paysim/tx", sender, public_key, nonce, call))
    }

    pub fn sign(key: &KeyPair, nonce: u64, call: Call) -> Transaction {
        let sender = key.address();
        let public_key = key.public();
        let signature = key.sign(&Self::signing_bytes(&sender, &public_key, nonce, &call));
        Transaction { sender, public_key, nonce, call, signature }
    }

    pub fn target(&self) -> Target {
        self.call.target()
    }

    pub fn method(&self) -> &'static str {
        self.call.method()
    }

    pub fn hash(&self) -> Hash32 {
        codec::digest(self)
    }

    fn authentic(&self) -> bool {
        Address::from_public_key(&self.public_key) == self.sender
            && self
                .public_key
                .verify(&Self::signing_bytes(&self.sender, &self.public_key, self.nonce, &self.call), &self.signature)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TxStatus {
    Success,
    Rejected(ContractError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Receipt {
    pub status: TxStatus,
    pub events: Vec<Event>,
    pub fee: u64,
    pub output: Output,
}

impl Receipt {
    fn rejected(err: ContractError, fee: u64) -> Receipt {
        Receipt { status: TxStatus::Rejected(err), events: Vec::new(), fee, output: Output::None }
    }

    pub fn is_success(&self) -> bool {
        self.status == TxStatus::Success
    }

    pub fn error(&self) -> Option<&ContractError> {
        match &self.status {
            TxStatus::Success => None,
            TxStatus::Rejected(e) => Some(e),
        }
    }

    /// Converts into a `Result`, keeping the output on success.
    pub fn into_result(self) -> Result<Output, ContractError> {
        match self.status {
            TxStatus::Success => Ok(self.output),
            TxStatus::Rejected(e) => Err(e),
        }
    }

    pub fn instance(&self) -> Option<InstanceId> {
        match self.output {
            Output::Instance(id) => Some(id),
            _ => None,
        }
    }
}

/// The entire simulated ledger.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainState {
    height: u64,
    accounts: BTreeMap<Address, Account>,
    contracts: Contracts,
    events: Vec<Event>,
}

impl ChainState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn height(&self) -> u64 {
        self.height
    }

    pub fn contracts(&self) -> &Contracts {
        &self.contracts
    }

    pub fn accounts(&self) -> &BTreeMap<Address, Account> {
        &self.accounts
    }

    pub fn account(&self, address: &Address) -> Option<&Account> {
        self.accounts.get(address)
    }

    pub fn nonce_of(&self, address: &Address) -> u64 {
        self.accounts.get(address).map_or(0, |a| a.nonce)
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    /// Generates the keypair for `seed` and registers its address with a
    /// zero nonce. Calling twice with the same seed is a no-op.
    ///
    /// Panics if the derived address is already bound to a different public
    /// key, which would mean a SHA-256 collision.
    pub fn create_account(&mut self, seed: [u8; 32]) -> KeyPair {
        let key = KeyPair::from_seed(seed);
        self.register_key(&key);
        key
    }

    /// Registers an externally derived key (stealth keys, for instance).
    pub fn register_key(&mut self, key: &KeyPair) {
        let account = self.accounts.entry(key.address()).or_default();
        match account.public_key {
            Some(pk) => assert_eq!(pk, key.public(), "address collision: fatal"),
            None => account.public_key = Some(key.public()),
        }
    }

    pub fn submit_tx(&mut self, tx: &Transaction) -> Receipt {
        if !tx.authentic() {
            return Receipt::rejected(ContractError::BadSignature, 0);
        }
        let expected = self.nonce_of(&tx.sender);
        if tx.nonce != expected {
            return Receipt::rejected(ContractError::BadNonce { expected, got: tx.nonce }, 0);
        }
        if let Target::Instance(id) = tx.target() {
            if !self.contracts.contains(id) {
                return Receipt::rejected(ContractError::UnknownTarget(id), 0);
            }
        }

        let account = self.accounts.entry(tx.sender).or_default();
        if account.public_key.is_none() {
            account.public_key = Some(tx.public_key);
        }
        account.nonce += 1;
        account.fees_paid += FLAT_FEE;

        // Execute against a scratch copy; it replaces the live state only on success.
        let mut scratch = self.contracts.clone();
        let mut cx = Exec {
            height: self.height,
            sender: tx.sender,
            nonce: tx.nonce,
            accounts: &self.accounts,
            contracts: &mut scratch,
            events: Vec::new(),
        };
        match exec::dispatch(&mut cx, &tx.call) {
            Ok(output) => {
                let events = std::mem::take(&mut cx.events);
                self.contracts = scratch;
                self.events.extend(events.iter().cloned());
                Receipt { status: TxStatus::Success, events, fee: FLAT_FEE, output }
            }
            Err(err) => Receipt::rejected(err, FLAT_FEE),
        }
    }

    /// Signs `call` with the sender's next nonce and submits it.
    pub fn execute(&mut self, key: &KeyPair, call: Call) -> Receipt {
        let tx = Transaction::sign(key, self.nonce_of(&key.address()), call);
        self.submit_tx(&tx)
    }

    /// Seals the pending block; returns the new height.
    pub fn mine_block(&mut self) -> u64 {
        self.height += 1;
        self.height
    }

    pub fn mine_blocks(&mut self, k: u64) -> u64 {
        for _ in 0..k {
            self.mine_block();
        }
        self.height
    }

    /// Matching events in emission order.
    pub fn query_events(&self, filter: &EventFilter) -> Vec<&Event> {
        self.events.iter().filter(|e| filter.matches(e)).collect()
    }

    /// Canonical serialization of the whole state.
    pub fn encode(&self) -> Vec<u8> {
        codec::encode(self)
    }

    pub fn digest(&self) -> Hash32 {
        codec::digest(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::token::{Asset, Fungibility, TokenClassSpec};

    fn cash_spec() -> TokenClassSpec {
        TokenClassSpec {
            name: "Dollar".into(),
            symbol: "USD".into(),
            decimals: 2,
            total_supply: 0,
            fungibility: Fungibility::Cash,
            mintable: true,
            burnable: true,
        }
    }

    #[test]
    fn create_account_is_deterministic() {
        let mut chain = ChainState::new();
        let a = chain.create_account([0; 32]);
        let b = chain.create_account([0; 32]);
        assert_eq!(a.address(), b.address());
        assert_eq!(chain.account(&a.address()).unwrap().nonce, 0);
        let c = chain.create_account([1; 32]);
        assert_ne!(a.address(), c.address());
    }

    #[test]
    fn reused_nonce_is_rejected_without_state_change() {
        let mut chain = ChainState::new();
        let alice = chain.create_account([1; 32]);
        let tx = Transaction::sign(&alice, 0, Call::SpawnTokenClass { spec: cash_spec() });
        assert!(chain.submit_tx(&tx).is_success());
        let before = chain.encode();
        let again = chain.submit_tx(&tx);
        assert_eq!(again.error(), Some(&ContractError::BadNonce { expected: 1, got: 0 }));
        assert_eq!(again.fee, 0);
        assert_eq!(before, chain.encode());
    }

    #[test]
    fn forged_signature_is_rejected() {
        let mut chain = ChainState::new();
        let alice = chain.create_account([1; 32]);
        let mallory = chain.create_account([2; 32]);
        let mut tx = Transaction::sign(&mallory, 0, Call::SpawnTokenClass { spec: cash_spec() });
        tx.sender = alice.address();
        let before = chain.encode();
        assert_eq!(chain.submit_tx(&tx).error(), Some(&ContractError::BadSignature));
        assert_eq!(before, chain.encode());
    }

    #[test]
    fn unknown_target_leaves_state_unchanged() {
        let mut chain = ChainState::new();
        let alice = chain.create_account([1; 32]);
        let before = chain.encode();
        let rc =
            chain.execute(&alice, Call::Mint { class: InstanceId(99), to: alice.address(), asset: Asset::Amount(1) });
        assert_eq!(rc.error(), Some(&ContractError::UnknownTarget(InstanceId(99))));
        assert_eq!(before, chain.encode());
    }

    #[test]
    fn failing_handler_rolls_back_partial_writes() {
        let mut chain = ChainState::new();
        let issuer = chain.create_account([1; 32]);
        let mut spec = cash_spec();
        spec.fungibility = Fungibility::Voucher;
        spec.decimals = 0;
        let class = chain.execute(&issuer, Call::SpawnTokenClass { spec }).instance().unwrap();
        let contracts_before = codec::encode(chain.contracts());
        let events_before = chain.events().len();
        // token 1 and 2 are written before the duplicate 1 aborts the handler
        let rc = chain.execute(&issuer, Call::Mint { class, to: issuer.address(), asset: Asset::tokens([1, 2, 1]) });
        assert_eq!(rc.error(), Some(&ContractError::DuplicateToken(1)));
        assert_eq!(rc.fee, FLAT_FEE);
        assert_eq!(contracts_before, codec::encode(chain.contracts()));
        assert_eq!(events_before, chain.events().len());
        // nonce and fee still advance
        assert_eq!(chain.account(&issuer.address()).unwrap().nonce, 2);
        assert_eq!(chain.account(&issuer.address()).unwrap().fees_paid, 2);
    }

    #[test]
    fn mine_block_advances_height() {
        let mut chain = ChainState::new();
        assert_eq!(chain.mine_block(), 1);
        assert_eq!(chain.mine_blocks(4), 5);
    }

    #[test]
    fn query_events_by_height() {
        let mut chain = ChainState::new();
        assert!(chain.query_events(&EventFilter::default()).is_empty());
        let alice = chain.create_account([1; 32]);
        chain.mine_blocks(3);
        chain.execute(&alice, Call::SpawnTokenClass { spec: cash_spec() });
        let hits = chain.query_events(&EventFilter::default().heights(3, 3));
        assert_eq!(hits.len(), 1);
        assert!(chain.query_events(&EventFilter::default().heights(0, 2)).is_empty());
    }
}
