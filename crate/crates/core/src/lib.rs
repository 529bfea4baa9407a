//! Deterministic ledger simulator with blockchain payment patterns.
//!
//! [`ledger::ChainState`] is the whole chain. Pattern modules add contract
//! instances to it and are driven through signed [`ledger::Call`]s:
//!
//! - [`token`]: token template, registry with two-phase transfer, burns
//! - [`governance`]: policies, seller credentials, authorised spenders
//! - [`settlement`]: escrow, multisignature, oracles
//! - [`channels`]: payment channels, HTLC swaps and hop chains
//! - [`privacy`]: stealth addresses

pub mod batch;
pub mod channels;
pub mod codec;
pub mod crypto;
pub mod error;
pub mod governance;
pub mod ledger;
pub mod privacy;
pub mod settlement;
pub mod token;

pub use crypto::{Address, Hash32, KeyPair, PublicKey, Signature};
pub use error::{ContractError, Result};
pub use ledger::{Call, ChainState, Event, EventFilter, EventKind, InstanceId, Output, Receipt, Transaction};
