use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::codec;
use crate::crypto::{Hash32, KeyPair, Signature};
use crate::error::{ContractError, Result};
use crate::ledger::{Address, ChainState, EventKind, Exec, Instance, InstanceId};

/// m-of-n approval counter. Approvals are tracked per payload hash.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Multisig {
    pub owner: Address,
    pub signers: BTreeSet<Address>,
    pub threshold: u64,
    pub approvals: BTreeMap<Hash32, BTreeSet<Address>>,
}

impl Multisig {
    pub fn approvals(&self, payload: &Hash32) -> u64 {
        self.approvals.get(payload).map_or(0, |s| s.intersection(&self.signers).count() as u64)
    }

    pub fn is_authorized(&self, payload: &Hash32) -> bool {
        self.approvals(payload) >= self.threshold
    }
}

pub fn multisig_signing_bytes(multisig: InstanceId, payload: &Hash32) -> Vec<u8> {
    codec::encode(&("paysim/multisig", multisig, payload))
}

pub fn sign_multisig(key: &KeyPair, multisig: InstanceId, payload: &Hash32) -> Signature {
    key.sign(&multisig_signing_bytes(multisig, payload))
}

fn check_pool(signers: &[Address], threshold: u64) -> Result<BTreeSet<Address>> {
    let pool: BTreeSet<Address> = signers.iter().copied().collect();
    let n = pool.len() as u64;
    if pool.len() != signers.len() || threshold == 0 || threshold > n {
        return Err(ContractError::InvalidThreshold { threshold, signers: n });
    }
    Ok(pool)
}

pub(crate) fn create_multisig(cx: &mut Exec<'_>, signers: Vec<Address>, threshold: u64) -> Result<InstanceId> {
    let pool = check_pool(&signers, threshold)?;
    let owner = cx.sender;
    let multisig = cx.contracts.deploy(Instance::Multisig(Multisig {
        owner,
        signers: pool.clone(),
        threshold,
        approvals: BTreeMap::new(),
    }));
    cx.emit(
        multisig.address(),
        EventKind::MultisigCreated { multisig, threshold, signers: pool.into_iter().collect() },
    );
    Ok(multisig)
}

pub(crate) fn multisig_sign(
    cx: &mut Exec<'_>,
    multisig: InstanceId,
    payload: Hash32,
    signature: Signature,
) -> Result<()> {
    let signer = cx.sender;
    let pk = cx.public_key(&signer);
    let m = cx.contracts.multisig_mut(multisig)?;
    if !m.signers.contains(&signer) {
        return Err(ContractError::NotASigner);
    }
    if !pk.is_some_and(|pk| pk.verify(&multisig_signing_bytes(multisig, &payload), &signature)) {
        return Err(ContractError::BadSignature);
    }
    m.approvals.entry(payload).or_default().insert(signer);
    let approvals = m.approvals(&payload);
    cx.emit(multisig.address(), EventKind::MultisigSigned { multisig, signer, payload, approvals });
    Ok(())
}

/// Replaces the pool and voids every collected approval.
pub(crate) fn multisig_update_pool(
    cx: &mut Exec<'_>,
    multisig: InstanceId,
    signers: Vec<Address>,
    threshold: u64,
) -> Result<()> {
    let sender = cx.sender;
    let m = cx.contracts.multisig_mut(multisig)?;
    if m.owner != sender {
        return Err(ContractError::NotIssuer);
    }
    let pool = check_pool(&signers, threshold)?;
    m.signers = pool.clone();
    m.threshold = threshold;
    m.approvals.clear();
    cx.emit(
        multisig.address(),
        EventKind::MultisigPoolUpdated { multisig, threshold, signers: pool.into_iter().collect() },
    );
    Ok(())
}

impl ChainState {
    pub fn multisig_authorized(&self, multisig: InstanceId, payload: &Hash32) -> Result<bool> {
        Ok(self.contracts().multisig(multisig)?.is_authorized(payload))
    }
}
