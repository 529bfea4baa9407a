//! Escrow, multisignature authorisation and oracles.

mod escrow;
mod multisig;
mod oracle;

pub use escrow::{escrow_release_payload, Condition, EscrowAgreement, EscrowState};
pub use multisig::{multisig_signing_bytes, sign_multisig, Multisig};
pub use oracle::{Attestation, Delivery, FeedMode, OracleFeed, Record, Trust};

pub(crate) mod ops {
    pub(crate) use super::escrow::{claim_escrow, fund_escrow, open_escrow};
    pub(crate) use super::multisig::{create_multisig, multisig_sign, multisig_update_pool};
    pub(crate) use super::oracle::{create_oracle, oracle_push, oracle_request, oracle_respond};
}
