use serde::{Deserialize, Serialize};

use crate::ledger::InstanceId;

/// Reason a transaction was rejected.
///
/// Every variant leaves contract state exactly as it was before the
/// transaction; only the sender's nonce and fee counter may have moved.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
pub enum ContractError {
    // ledger
    #[error("signature does not verify for the sender")]
    BadSignature,
    #[error("bad nonce: expected {expected}, got {got}")]
    BadNonce { expected: u64, got: u64 },
    #[error("unknown target {0}")]
    UnknownTarget(InstanceId),

    // token core
    #[error("invalid token class spec: {0}")]
    InvalidSpec(String),
    #[error("asset does not match the token class: {0}")]
    InvalidAsset(String),
    #[error("caller is not the issuer")]
    NotIssuer,
    #[error("token class is not mintable")]
    NotMintable,
    #[error("token class is not burnable")]
    NotBurnable,
    #[error("token class is frozen")]
    ClassFrozen,
    #[error("token {0} already exists")]
    DuplicateToken(u64),
    #[error("insufficient balance: need {needed}, spendable {available}")]
    InsufficientBalance { needed: u64, available: u64 },
    #[error("policy violation: {0}")]
    PolicyViolation(String),
    #[error("token is not spendable (locked, pending, redeemed or burned)")]
    TokenNotSpendable,
    #[error("unknown transfer {0}")]
    UnknownTransfer(u64),
    #[error("caller is not the transfer recipient")]
    NotRecipient,
    #[error("caller does not own the token")]
    NotOwner,
    #[error("token already burned")]
    AlreadyBurned,
    #[error("unknown token {0}")]
    UnknownToken(u64),
    #[error("burn sink {0} has already self-destructed")]
    SinkDestroyed(InstanceId),

    // governance
    #[error("invalid policy rule: {0}")]
    InvalidRule(String),
    #[error("unknown policy {0}")]
    UnknownPolicy(InstanceId),
    #[error("unknown credential {0}")]
    UnknownCredential(u64),
    #[error("allowance exceeded: remaining {remaining}, requested {requested}")]
    AllowanceExceeded { remaining: u64, requested: u64 },

    // settlement
    #[error("deadline {deadline} is not after current height {height}")]
    DeadlineInPast { deadline: u64, height: u64 },
    #[error("operation not allowed in state {0}")]
    WrongState(String),
    #[error("caller is not a party to the agreement")]
    NotParty,
    #[error("condition not yet met and deadline not passed")]
    NotYet,
    #[error("caller is not in the signer pool")]
    NotASigner,
    #[error("invalid threshold {threshold} for {signers} signers")]
    InvalidThreshold { threshold: u64, signers: u64 },
    #[error("caller is not an attestor of this feed")]
    NotAttestor,
    #[error("operation requires {0} mode")]
    WrongMode(String),
    #[error("no pending request for this key")]
    NoPendingRequest,

    // channels
    #[error("update does not conserve the channel deposit")]
    ConservationViolated,
    #[error("sequence {seq} is not above last signed {last}")]
    NonMonotoneSeq { seq: u64, last: u64 },
    #[error("update sequence {seq} does not beat current best {best}")]
    StaleUpdate { seq: u64, best: u64 },
    #[error("challenge window closed at height {0}")]
    ChallengeClosed(u64),
    #[error("challenge window open until height {0}")]
    ChallengeOpen(u64),
    #[error("caller does not own this leg")]
    WrongParty,
    #[error("preimage does not match the hash lock")]
    BadPreimage,
    #[error("timelock expired")]
    Expired,
    #[error("every leg must be funded before claiming")]
    BothLegsRequired,
    #[error("timelock has not expired")]
    NotExpired,
    #[error("hop timeouts must strictly decrease and stay in the future")]
    TimeoutOrderingViolated,
}

impl ContractError {
    /// Variant name without payload, used by the scenario harness.
    pub fn kind(&self) -> &'static str {
        use ContractError::*;
        match self {
            BadSignature => "BadSignature",
            BadNonce { .. } => "BadNonce",
            UnknownTarget(_) => "UnknownTarget",
            InvalidSpec(_) => "InvalidSpec",
            InvalidAsset(_) => "InvalidAsset",
            NotIssuer => "NotIssuer",
            NotMintable => "NotMintable",
            NotBurnable => "NotBurnable",
            ClassFrozen => "ClassFrozen",
            DuplicateToken(_) => "DuplicateToken",
            InsufficientBalance { .. } => "InsufficientBalance",
            PolicyViolation(_) => "PolicyViolation",
            TokenNotSpendable => "TokenNotSpendable",
            UnknownTransfer(_) => "UnknownTransfer",
            NotRecipient => "NotRecipient",
            NotOwner => "NotOwner",
            AlreadyBurned => "AlreadyBurned",
            UnknownToken(_) => "UnknownToken",
            SinkDestroyed(_) => "SinkDestroyed",
            InvalidRule(_) => "InvalidRule",
            UnknownPolicy(_) => "UnknownPolicy",
            UnknownCredential(_) => "UnknownCredential",
            AllowanceExceeded { .. } => "AllowanceExceeded",
            DeadlineInPast { .. } => "DeadlineInPast",
            WrongState(_) => "WrongState",
            NotParty => "NotParty",
            NotYet => "NotYet",
            NotASigner => "NotASigner",
            InvalidThreshold { .. } => "InvalidThreshold",
            NotAttestor => "NotAttestor",
            WrongMode(_) => "WrongMode",
            NoPendingRequest => "NoPendingRequest",
            ConservationViolated => "ConservationViolated",
            NonMonotoneSeq { .. } => "NonMonotoneSeq",
            StaleUpdate { .. } => "StaleUpdate",
            ChallengeClosed(_) => "ChallengeClosed",
            ChallengeOpen(_) => "ChallengeOpen",
            WrongParty => "WrongParty",
            BadPreimage => "BadPreimage",
            Expired => "Expired",
            BothLegsRequired => "BothLegsRequired",
            NotExpired => "NotExpired",
            TimeoutOrderingViolated => "TimeoutOrderingViolated",
        }
    }
}

pub type Result<T, E = ContractError> = std::result::Result<T, E>;
