use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::Preimage;
use crate::crypto::{sha256, Hash32, KeyPair};
use crate::error::{ContractError, Result};
use crate::ledger::{Address, Call, ChainState, EventKind, Exec, Instance, InstanceId, Receipt};
use crate::token::ops::{lock, release};
use crate::token::{Asset, LockRef};

pub fn hash_lock(preimage: &Preimage) -> Hash32 {
    sha256(&preimage.0)
}

/// One side of a swap: `from` locks `asset` of `class`, `to` receives it on claim.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LegSpec {
    pub from: Address,
    pub to: Address,
    pub class: InstanceId,
    pub asset: Asset,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HtlcLeg {
    pub from: Address,
    pub to: Address,
    pub class: InstanceId,
    pub asset: Asset,
    pub funded: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HtlcState {
    Open,
    Swapped,
    Refunded,
}

/// A two-leg swap, or a single-leg hop of a chain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Htlc {
    pub deployer: Address,
    pub hash_lock: Hash32,
    pub timeout: u64,
    pub legs: Vec<HtlcLeg>,
    pub state: HtlcState,
}

/// Hops sharing one hash lock, with strictly decreasing timeouts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HtlcChain {
    pub hash_lock: Hash32,
    pub hops: Vec<InstanceId>,
}

fn state_name(s: HtlcState) -> String {
    format!("{s:?}").to_lowercase()
}

fn deploy(cx: &mut Exec<'_>, hash_lock: Hash32, timeout: u64, legs: Vec<LegSpec>) -> Result<InstanceId> {
    if legs.is_empty() || legs.len() > 2 {
        return Err(ContractError::WrongState("an htlc has one or two legs".into()));
    }
    for leg in &legs {
        cx.contracts.token_class(leg.class)?.registry.check_asset(&leg.asset)?;
    }
    let legs = legs
        .into_iter()
        .map(|l| HtlcLeg { from: l.from, to: l.to, class: l.class, asset: l.asset, funded: false })
        .collect();
    let deployer = cx.sender;
    let htlc = cx.contracts.deploy(Instance::Htlc(Htlc { deployer, hash_lock, timeout, legs, state: HtlcState::Open }));
    cx.emit(htlc.address(), EventKind::HtlcOpened { htlc, hash_lock, timeout });
    Ok(htlc)
}

pub(crate) fn htlc_open(cx: &mut Exec<'_>, hash_lock: Hash32, timeout: u64, legs: Vec<LegSpec>) -> Result<InstanceId> {
    if timeout <= cx.height {
        return Err(ContractError::DeadlineInPast { deadline: timeout, height: cx.height });
    }
    deploy(cx, hash_lock, timeout, legs)
}

pub(crate) fn htlc_fund(cx: &mut Exec<'_>, id: InstanceId, leg: u8) -> Result<()> {
    let h = cx.contracts.htlc(id)?;
    if h.state != HtlcState::Open {
        return Err(ContractError::WrongState(state_name(h.state)));
    }
    let l = h.legs.get(leg as usize).ok_or(ContractError::WrongParty)?.clone();
    if l.from != cx.sender {
        return Err(ContractError::WrongParty);
    }
    if cx.height > h.timeout {
        return Err(ContractError::Expired);
    }
    if l.funded {
        return Err(ContractError::WrongState("leg already funded".into()));
    }
    lock(cx, l.class, LockRef::Htlc(id, leg), l.from, &l.asset)?;
    cx.contracts.htlc_mut(id)?.legs[leg as usize].funded = true;
    cx.emit(id.address(), EventKind::HtlcFunded { htlc: id, leg });
    Ok(())
}

/// Anyone holding the preimage may trigger the swap; funds only ever go
/// to the leg recipients.
pub(crate) fn htlc_claim(cx: &mut Exec<'_>, id: InstanceId, preimage: Preimage) -> Result<()> {
    let h = cx.contracts.htlc(id)?.clone();
    if h.state != HtlcState::Open {
        return Err(ContractError::WrongState(state_name(h.state)));
    }
    if cx.height > h.timeout {
        return Err(ContractError::Expired);
    }
    if hash_lock(&preimage) != h.hash_lock {
        return Err(ContractError::BadPreimage);
    }
    if !h.legs.iter().all(|l| l.funded) {
        return Err(ContractError::BothLegsRequired);
    }
    for (i, l) in h.legs.iter().enumerate() {
        release(cx, l.class, LockRef::Htlc(id, i as u8), l.to, &l.asset)?;
    }
    cx.contracts.htlc_mut(id)?.state = HtlcState::Swapped;
    cx.emit(id.address(), EventKind::HtlcClaimed { htlc: id, hash_lock: h.hash_lock, preimage });
    Ok(())
}

pub(crate) fn htlc_refund(cx: &mut Exec<'_>, id: InstanceId) -> Result<()> {
    let h = cx.contracts.htlc(id)?.clone();
    if h.state != HtlcState::Open {
        return Err(ContractError::WrongState(state_name(h.state)));
    }
    if cx.height <= h.timeout {
        return Err(ContractError::NotExpired);
    }
    for (i, l) in h.legs.iter().enumerate().filter(|(_, l)| l.funded) {
        release(cx, l.class, LockRef::Htlc(id, i as u8), l.from, &l.asset)?;
    }
    cx.contracts.htlc_mut(id)?.state = HtlcState::Refunded;
    cx.emit(id.address(), EventKind::HtlcRefunded { htlc: id });
    Ok(())
}

/// Hop `i` gets timeout `base_timeout - i * decrement`.
pub(crate) fn chain_open(
    cx: &mut Exec<'_>,
    hash_lock: Hash32,
    hops: Vec<LegSpec>,
    base_timeout: u64,
    decrement: u64,
) -> Result<(InstanceId, Vec<InstanceId>)> {
    let n = hops.len() as u64;
    let last = n.checked_sub(1).and_then(|k| k.checked_mul(decrement)).and_then(|d| base_timeout.checked_sub(d));
    match last {
        Some(t) if decrement >= 1 && t > cx.height => {}
        _ => return Err(ContractError::TimeoutOrderingViolated),
    }
    let mut ids = Vec::with_capacity(hops.len());
    for (i, hop) in hops.into_iter().enumerate() {
        ids.push(deploy(cx, hash_lock, base_timeout - i as u64 * decrement, vec![hop])?);
    }
    let chain = cx.contracts.deploy(Instance::HtlcChain(HtlcChain { hash_lock, hops: ids.clone() }));
    cx.emit(chain.address(), EventKind::HtlcChainOpened { chain, hops: ids.clone() });
    Ok((chain, ids))
}

/// First preimage for `lock` published by any claim in the event log.
pub fn find_preimage(chain: &ChainState, lock: &Hash32) -> Option<Preimage> {
    chain.events().iter().find_map(|e| match &e.kind {
        EventKind::HtlcClaimed { hash_lock, preimage, .. } if hash_lock == lock => Some(*preimage),
        _ => None,
    })
}

/// Walks the hops from last to first and has each beneficiary claim with the
/// preimage read from the event log. Beneficiaries in `withholding` do not
/// act. Hops already settled, unfunded or without a known preimage are skipped.
pub fn chain_propagate(
    chain: &mut ChainState,
    chain_id: InstanceId,
    keys: &BTreeMap<Address, KeyPair>,
    withholding: &BTreeSet<Address>,
) -> Result<Vec<Receipt>> {
    let hops = chain.contracts().htlc_chain(chain_id)?.clone();
    let mut receipts = Vec::new();
    for hop in hops.hops.iter().rev() {
        let h = chain.contracts().htlc(*hop)?;
        let beneficiary = h.legs[0].to;
        if h.state != HtlcState::Open || !h.legs[0].funded || withholding.contains(&beneficiary) {
            continue;
        }
        let (Some(preimage), Some(key)) = (find_preimage(chain, &hops.hash_lock), keys.get(&beneficiary)) else {
            continue;
        };
        receipts.push(chain.execute(key, Call::HtlcClaim { htlc: *hop, preimage }));
    }
    Ok(receipts)
}
