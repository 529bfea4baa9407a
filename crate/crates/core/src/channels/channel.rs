use serde::{Deserialize, Serialize};

use crate::codec;
use crate::crypto::{KeyPair, Signature};
use crate::error::{ContractError, Result};
use crate::ledger::{Address, EventKind, Exec, Instance, InstanceId};
use crate::token::ops::{lock, release};
use crate::token::{Asset, Fungibility, LockRef};

pub const DEFAULT_CHALLENGE_WINDOW: u64 = 10;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChannelStatus {
    Open,
    /// Disputed close; `best` may be replaced until `deadline` inclusive.
    Settling {
        best: ChannelUpdate,
        deadline: u64,
    },
    Closed {
        seq: u64,
        payout_a: u64,
        payout_b: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Channel {
    pub party_a: Address,
    pub party_b: Address,
    pub class: InstanceId,
    pub deposit_a: u64,
    pub deposit_b: u64,
    pub challenge_window: u64,
    pub status: ChannelStatus,
}

impl Channel {
    pub fn total(&self) -> u64 {
        self.deposit_a + self.deposit_b
    }
}

/// A balance split both parties signed. Lives off-chain until a close.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelUpdate {
    pub channel: InstanceId,
    pub seq: u64,
    pub balance_a: u64,
    pub balance_b: u64,
    pub sig_a: Signature,
    pub sig_b: Signature,
}

pub fn update_signing_bytes(channel: InstanceId, seq: u64, balance_a: u64, balance_b: u64) -> Vec<u8> {
    codec::encode(&("paysim/channel-update", channel, seq, balance_a, balance_b))
}

/// Terms party B signs to let party A lock B's deposit. `nonce_a` is A's
/// transaction nonce for the open, so a consent cannot be replayed.
pub fn open_consent_bytes(
    party_a: &Address,
    party_b: &Address,
    class: InstanceId,
    deposit_a: u64,
    deposit_b: u64,
    challenge_window: u64,
    nonce_a: u64,
) -> Vec<u8> {
    codec::encode(&("paysim/channel-open", party_a, party_b, class, deposit_a, deposit_b, challenge_window, nonce_a))
}

#[allow(clippy::too_many_arguments)]
pub fn sign_open_consent(
    key_b: &KeyPair,
    party_a: &Address,
    class: InstanceId,
    deposit_a: u64,
    deposit_b: u64,
    challenge_window: u64,
    nonce_a: u64,
) -> Signature {
    key_b.sign(&open_consent_bytes(party_a, &key_b.address(), class, deposit_a, deposit_b, challenge_window, nonce_a))
}

/// Off-chain state of one channel: the latest dual-signed update.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelSession {
    pub channel: InstanceId,
    pub total: u64,
    pub latest: ChannelUpdate,
}

impl ChannelSession {
    /// Starts from the implicit seq-0 update that mirrors the deposits.
    pub fn new(channel: InstanceId, deposit_a: u64, deposit_b: u64, key_a: &KeyPair, key_b: &KeyPair) -> Self {
        let latest = sign_update(channel, 0, deposit_a, deposit_b, key_a, key_b);
        ChannelSession { channel, total: deposit_a + deposit_b, latest }
    }

    pub fn make_update(
        &mut self,
        seq: u64,
        balance_a: u64,
        balance_b: u64,
        key_a: &KeyPair,
        key_b: &KeyPair,
    ) -> Result<ChannelUpdate> {
        if balance_a.checked_add(balance_b) != Some(self.total) {
            return Err(ContractError::ConservationViolated);
        }
        if seq <= self.latest.seq {
            return Err(ContractError::NonMonotoneSeq { seq, last: self.latest.seq });
        }
        self.latest = sign_update(self.channel, seq, balance_a, balance_b, key_a, key_b);
        Ok(self.latest.clone())
    }

    /// Moves `amount` from A to B (or B to A) in a fresh update.
    pub fn pay(&mut self, a_to_b: bool, amount: u64, key_a: &KeyPair, key_b: &KeyPair) -> Result<ChannelUpdate> {
        let (a, b) = (self.latest.balance_a, self.latest.balance_b);
        let (a, b) = if a_to_b {
            (a.checked_sub(amount), b.checked_add(amount))
        } else {
            (a.checked_add(amount), b.checked_sub(amount))
        };
        match (a, b) {
            (Some(a), Some(b)) => self.make_update(self.latest.seq + 1, a, b, key_a, key_b),
            _ => Err(ContractError::ConservationViolated),
        }
    }
}

fn sign_update(channel: InstanceId, seq: u64, a: u64, b: u64, key_a: &KeyPair, key_b: &KeyPair) -> ChannelUpdate {
    let msg = update_signing_bytes(channel, seq, a, b);
    ChannelUpdate { channel, seq, balance_a: a, balance_b: b, sig_a: key_a.sign(&msg), sig_b: key_b.sign(&msg) }
}

fn check_update(cx: &Exec<'_>, id: InstanceId, ch: &Channel, u: &ChannelUpdate) -> Result<()> {
    if u.channel != id {
        return Err(ContractError::WrongState(format!("update is for channel {}", u.channel)));
    }
    if u.balance_a.checked_add(u.balance_b) != Some(ch.total()) {
        return Err(ContractError::ConservationViolated);
    }
    let msg = update_signing_bytes(id, u.seq, u.balance_a, u.balance_b);
    let signed = |who: &Address, sig: &Signature| cx.public_key(who).is_some_and(|pk| pk.verify(&msg, sig));
    if !signed(&ch.party_a, &u.sig_a) || !signed(&ch.party_b, &u.sig_b) {
        return Err(ContractError::BadSignature);
    }
    Ok(())
}

fn party_only(cx: &Exec<'_>, ch: &Channel) -> Result<()> {
    if cx.sender != ch.party_a && cx.sender != ch.party_b {
        return Err(ContractError::NotParty);
    }
    Ok(())
}

fn status_name(s: &ChannelStatus) -> &'static str {
    match s {
        ChannelStatus::Open => "open",
        ChannelStatus::Settling { .. } => "settling",
        ChannelStatus::Closed { .. } => "closed",
    }
}

pub(crate) fn open_channel(
    cx: &mut Exec<'_>,
    party_b: Address,
    class: InstanceId,
    deposit_a: u64,
    deposit_b: u64,
    challenge_window: u64,
    consent_b: Option<Signature>,
) -> Result<InstanceId> {
    let party_a = cx.sender;
    if party_a == party_b {
        return Err(ContractError::NotParty);
    }
    if cx.contracts.token_class(class)?.spec.fungibility != Fungibility::Cash {
        return Err(ContractError::InvalidAsset("channels carry cash tokens".into()));
    }
    if challenge_window == 0 {
        return Err(ContractError::WrongState("challenge window must be positive".into()));
    }
    if deposit_a.checked_add(deposit_b).is_none() {
        return Err(ContractError::InvalidAsset("deposit overflow".into()));
    }
    if deposit_b > 0 {
        let msg = open_consent_bytes(&party_a, &party_b, class, deposit_a, deposit_b, challenge_window, cx.nonce);
        let ok = match (cx.public_key(&party_b), consent_b) {
            (Some(pk), Some(sig)) => pk.verify(&msg, &sig),
            _ => false,
        };
        if !ok {
            return Err(ContractError::BadSignature);
        }
    }
    let channel = cx.contracts.deploy(Instance::Channel(Channel {
        party_a,
        party_b,
        class,
        deposit_a,
        deposit_b,
        challenge_window,
        status: ChannelStatus::Open,
    }));
    if deposit_a > 0 {
        lock(cx, class, LockRef::Channel(channel, 0), party_a, &Asset::Amount(deposit_a))?;
    }
    if deposit_b > 0 {
        lock(cx, class, LockRef::Channel(channel, 1), party_b, &Asset::Amount(deposit_b))?;
    }
    cx.emit(channel.address(), EventKind::ChannelOpened { channel, party_a, party_b, deposit_a, deposit_b });
    Ok(channel)
}

/// Pays both parties out of the two deposit locks and closes the channel.
fn pay_out(cx: &mut Exec<'_>, id: InstanceId, seq: u64, payout_a: u64, payout_b: u64) -> Result<()> {
    let ch = cx.contracts.channel(id)?.clone();
    // A is paid from A's own deposit first, then from B's; B takes the rest.
    let from_a_to_a = payout_a.min(ch.deposit_a);
    let from_b_to_a = payout_a - from_a_to_a;
    let moves = [
        (LockRef::Channel(id, 0), ch.party_a, from_a_to_a),
        (LockRef::Channel(id, 0), ch.party_b, ch.deposit_a - from_a_to_a),
        (LockRef::Channel(id, 1), ch.party_a, from_b_to_a),
        (LockRef::Channel(id, 1), ch.party_b, ch.deposit_b - from_b_to_a),
    ];
    for (lock_ref, to, amount) in moves {
        if amount > 0 {
            release(cx, ch.class, lock_ref, to, &Asset::Amount(amount))?;
        }
    }
    cx.contracts.channel_mut(id)?.status = ChannelStatus::Closed { seq, payout_a, payout_b };
    cx.emit(id.address(), EventKind::ChannelClosed { channel: id, seq, payout_a, payout_b });
    Ok(())
}

pub(crate) fn cooperative_settle(cx: &mut Exec<'_>, id: InstanceId, update: &ChannelUpdate) -> Result<()> {
    let ch = cx.contracts.channel(id)?;
    if ch.status != ChannelStatus::Open {
        return Err(ContractError::WrongState(status_name(&ch.status).into()));
    }
    party_only(cx, ch)?;
    check_update(cx, id, ch, update)?;
    pay_out(cx, id, update.seq, update.balance_a, update.balance_b)
}

pub(crate) fn dispute_settle(cx: &mut Exec<'_>, id: InstanceId, update: &ChannelUpdate) -> Result<()> {
    let ch = cx.contracts.channel(id)?;
    if ch.status != ChannelStatus::Open {
        return Err(ContractError::WrongState(status_name(&ch.status).into()));
    }
    party_only(cx, ch)?;
    check_update(cx, id, ch, update)?;
    let deadline = cx.height + ch.challenge_window;
    cx.contracts.channel_mut(id)?.status = ChannelStatus::Settling { best: update.clone(), deadline };
    cx.emit(id.address(), EventKind::DisputeOpened { channel: id, seq: update.seq, challenge_deadline: deadline });
    Ok(())
}

pub(crate) fn challenge(cx: &mut Exec<'_>, id: InstanceId, update: &ChannelUpdate) -> Result<()> {
    let ch = cx.contracts.channel(id)?;
    let ChannelStatus::Settling { best, deadline } = &ch.status else {
        return Err(ContractError::WrongState(status_name(&ch.status).into()));
    };
    if cx.height > *deadline {
        return Err(ContractError::ChallengeClosed(*deadline));
    }
    party_only(cx, ch)?;
    check_update(cx, id, ch, update)?;
    if update.seq <= best.seq {
        return Err(ContractError::StaleUpdate { seq: update.seq, best: best.seq });
    }
    let deadline = *deadline;
    cx.contracts.channel_mut(id)?.status = ChannelStatus::Settling { best: update.clone(), deadline };
    cx.emit(id.address(), EventKind::ChallengeAccepted { channel: id, seq: update.seq });
    Ok(())
}

/// Anyone may finalize once the challenge window has passed.
pub(crate) fn finalize(cx: &mut Exec<'_>, id: InstanceId) -> Result<()> {
    let ch = cx.contracts.channel(id)?;
    let ChannelStatus::Settling { best, deadline } = &ch.status else {
        return Err(ContractError::WrongState(status_name(&ch.status).into()));
    };
    if cx.height <= *deadline {
        return Err(ContractError::ChallengeOpen(*deadline));
    }
    let (seq, a, b) = (best.seq, best.balance_a, best.balance_b);
    pay_out(cx, id, seq, a, b)
}
