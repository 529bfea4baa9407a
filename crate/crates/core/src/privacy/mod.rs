//! One-time stealth addresses.
//!
//! Index `i` under shared secret `s` gets the tweak
//! `t_i = H(s || root_pub || i)`. The one-time public key is
//! `root_pub + t_i * G`, computable by anyone who knows `s` and the root
//! public key; the matching secret `root_priv + t_i` needs the root private
//! key. A sender can therefore pay to the address but never spend from it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::batch;
use crate::crypto::{hash_to_scalar, sha256, Address, Hash32, KeyPair, PublicKey};
use crate::ledger::{ChainState, EventKind, InstanceId};

/// 32-byte secret exchanged off-chain between payer and recipient.
pub type SharedSecret = Hash32;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StealthPayment {
    pub index: u64,
    pub address: Address,
    pub received: u64,
}

fn tweak(secret: &SharedSecret, root: &PublicKey, index: u64) -> k256::NonZeroScalar {
    let mut input = Vec::with_capacity(32 + 33 + 8);
    input.extend_from_slice(&secret.0);
    input.extend_from_slice(&root.0);
    input.extend_from_slice(&index.to_be_bytes());
    hash_to_scalar(b"paysim/stealth", &input)
}

pub fn derive_stealth_public(secret: &SharedSecret, root: &PublicKey, index: u64) -> PublicKey {
    let root_point = root.to_point().expect("root public key is a valid point");
    let point = root_point + k256::ProjectivePoint::GENERATOR * *tweak(secret, root, index);
    PublicKey::from_point(&point)
}

pub fn derive_stealth_address(secret: &SharedSecret, root: &PublicKey, index: u64) -> Address {
    Address::from_public_key(&derive_stealth_public(secret, root, index))
}

/// Recipient side: the signing key for index `index`.
pub fn derive_stealth_keypair(root: &KeyPair, secret: &SharedSecret, index: u64) -> KeyPair {
    let t = tweak(secret, &root.public(), index);
    let sum = **root.scalar() + *t;
    let secret = Option::<k256::NonZeroScalar>::from(k256::NonZeroScalar::new(sum))
        .expect("tweak equal to the negated root key is a hash collision");
    KeyPair::from_scalar(secret)
}

/// Next seed of a hash chain.
pub fn next_seed(seed: &Hash32) -> Hash32 {
    sha256(&seed.0)
}

/// Addresses for indices `0..=max_index`.
pub fn derive_range(secret: &SharedSecret, root: &PublicKey, max_index: u64) -> Vec<Address> {
    batch::map_range(0..max_index + 1, |i| derive_stealth_address(secret, root, i))
}

/// Everything `class` credited to the derived addresses `0..=max_index`.
/// Indices beyond `max_index` are not looked at.
pub fn scan_for_payments(
    chain: &ChainState,
    root: &PublicKey,
    secret: &SharedSecret,
    class: InstanceId,
    max_index: u64,
) -> Vec<StealthPayment> {
    let mut received: BTreeMap<Address, u64> = BTreeMap::new();
    for e in chain.events() {
        if let EventKind::Token { class: c, event } = &e.kind {
            if *c != class {
                continue;
            }
            if let Some(to) = event_recipient(event) {
                let units = event.received_by(&to).unwrap_or(0);
                *received.entry(to).or_default() += units;
            }
        }
    }
    derive_range(secret, root, max_index)
        .into_iter()
        .enumerate()
        .filter_map(|(i, address)| {
            received.get(&address).map(|&r| StealthPayment { index: i as u64, address, received: r })
        })
        .collect()
}

fn event_recipient(event: &crate::token::TokenEvent) -> Option<Address> {
    use crate::token::TokenEvent::*;
    match event {
        Minted { to, .. }
        | TransferSettled { to, .. }
        | ForcedTransfer { to, .. }
        | DelegatedTransfer { to, .. }
        | Released { to, .. } => Some(*to),
        _ => None,
    }
}
