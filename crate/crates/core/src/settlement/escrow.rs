use serde::{Deserialize, Serialize};

use crate::crypto::{hash_parts, Hash32};
use crate::error::{ContractError, Result};
use crate::ledger::{Address, Contracts, EventKind, Exec, Instance, InstanceId};
use crate::token::ops::{lock, release};
use crate::token::{Asset, LockRef};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    /// The feed's quorum-backed value for `key` equals `expected`.
    OracleConfirms { feed: InstanceId, key: String, expected: String },
    /// The multisig has authorised [`escrow_release_payload`] for this escrow.
    MultisigApproves(InstanceId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EscrowState {
    Created,
    Funded,
    Released,
    Refunded,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EscrowAgreement {
    pub creator: Address,
    pub buyer: Address,
    pub seller: Address,
    pub class: InstanceId,
    pub asset: Asset,
    pub condition: Condition,
    pub deadline: u64,
    pub state: EscrowState,
}

/// Payload multisig signers approve to release escrow `id`.
pub fn escrow_release_payload(escrow: InstanceId) -> Hash32 {
    hash_parts(&[b"paysim/escrow-release", &escrow.0.to_be_bytes()])
}

fn condition_met(contracts: &Contracts, escrow: InstanceId, condition: &Condition) -> Result<bool> {
    Ok(match condition {
        Condition::OracleConfirms { feed, key, expected } => {
            contracts.oracle_read(*feed, key)?.is_some_and(|(v, _)| v == *expected)
        }
        Condition::MultisigApproves(m) => contracts.multisig(*m)?.is_authorized(&escrow_release_payload(escrow)),
    })
}

pub(crate) fn open_escrow(
    cx: &mut Exec<'_>,
    buyer: Address,
    seller: Address,
    class: InstanceId,
    asset: Asset,
    condition: Condition,
    deadline: u64,
) -> Result<InstanceId> {
    let creator = cx.sender;
    if creator != buyer && creator != seller {
        return Err(ContractError::NotParty);
    }
    if deadline <= cx.height {
        return Err(ContractError::DeadlineInPast { deadline, height: cx.height });
    }
    cx.contracts.token_class(class)?.registry.check_asset(&asset)?;
    match &condition {
        Condition::OracleConfirms { feed, .. } => cx.contracts.oracle(*feed).map(|_| ())?,
        Condition::MultisigApproves(m) => cx.contracts.multisig(*m).map(|_| ())?,
    }
    let escrow = cx.contracts.deploy(Instance::Escrow(EscrowAgreement {
        creator,
        buyer,
        seller,
        class,
        asset,
        condition,
        deadline,
        state: EscrowState::Created,
    }));
    cx.emit(escrow.address(), EventKind::EscrowOpened { escrow, buyer, seller, deadline });
    Ok(escrow)
}

pub(crate) fn fund_escrow(cx: &mut Exec<'_>, escrow: InstanceId) -> Result<()> {
    let e = cx.contracts.escrow(escrow)?.clone();
    if e.state != EscrowState::Created {
        return Err(ContractError::WrongState(format!("{:?}", e.state).to_lowercase()));
    }
    if cx.sender != e.buyer {
        return Err(ContractError::NotParty);
    }
    if cx.height > e.deadline {
        return Err(ContractError::Expired);
    }
    lock(cx, e.class, LockRef::Escrow(escrow), e.buyer, &e.asset)?;
    cx.contracts.escrow_mut(escrow)?.state = EscrowState::Funded;
    cx.emit(escrow.address(), EventKind::EscrowFunded { escrow });
    Ok(())
}

/// Release while height ≤ deadline and the condition holds; refund once
/// height > deadline; `NotYet` otherwise.
pub(crate) fn claim_escrow(cx: &mut Exec<'_>, escrow: InstanceId) -> Result<()> {
    let e = cx.contracts.escrow(escrow)?.clone();
    if e.state != EscrowState::Funded {
        return Err(ContractError::WrongState(format!("{:?}", e.state).to_lowercase()));
    }
    let (to, state) = if cx.height > e.deadline {
        (e.buyer, EscrowState::Refunded)
    } else if condition_met(cx.contracts, escrow, &e.condition)? {
        (e.seller, EscrowState::Released)
    } else {
        return Err(ContractError::NotYet);
    };
    release(cx, e.class, LockRef::Escrow(escrow), to, &e.asset)?;
    cx.contracts.escrow_mut(escrow)?.state = state;
    let kind = match state {
        EscrowState::Released => EventKind::EscrowReleased { escrow, to },
        _ => EventKind::EscrowRefunded { escrow, to },
    };
    cx.emit(escrow.address(), kind);
    Ok(())
}
