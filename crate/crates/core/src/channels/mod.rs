//! Payment channels and hashed timelock swaps.

mod channel;
mod htlc;

pub use channel::{
    open_consent_bytes, sign_open_consent, update_signing_bytes, Channel, ChannelSession, ChannelStatus, ChannelUpdate,
    DEFAULT_CHALLENGE_WINDOW,
};
pub use htlc::{chain_propagate, find_preimage, hash_lock, Htlc, HtlcChain, HtlcLeg, HtlcState, LegSpec};

use crate::crypto::Hash32;

/// Off-chain secret whose SHA-256 is an HTLC's hash lock.
pub type Preimage = Hash32;

pub(crate) mod ops {
    pub(crate) use super::channel::{challenge, cooperative_settle, dispute_settle, finalize, open_channel};
    pub(crate) use super::htlc::{chain_open, htlc_claim, htlc_fund, htlc_open, htlc_refund};
}
