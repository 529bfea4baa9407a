//! Token template, token registry and burned-token patterns.
//!
//! A token class is spawned from a [`TokenClassSpec`] by the factory. Its
//! [`Registry`] is event-sourced: every mutation is a [`TokenEvent`] that is
//! both applied and logged, so folding a class's history rebuilds the
//! registry bit for bit.

pub(crate) mod ops;
mod registry;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{ContractError, Result};
use crate::governance::Attachment;
use crate::ledger::{Address, ChainState, EventKind, InstanceId};

pub use registry::{Archive, BurnTotals, Holding, PendingTransfer, Registry, Supply, Voucher};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TokenId(pub u64);

impl fmt::Display for TokenId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TransferId(pub u64);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fungibility {
    /// Divisible, unit-for-unit exchangeable.
    Cash,
    /// Unique and indivisible; always moved whole.
    Voucher,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenClassSpec {
    pub name: String,
    pub symbol: String,
    pub decimals: u8,
    /// Minted to the issuer at spawn. Fixed forever when not mintable.
    pub total_supply: u64,
    pub fungibility: Fungibility,
    pub mintable: bool,
    pub burnable: bool,
}

impl TokenClassSpec {
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.symbol.is_empty() {
            return Err(ContractError::InvalidSpec("name and symbol are required".into()));
        }
        if self.fungibility == Fungibility::Voucher && self.decimals != 0 {
            return Err(ContractError::InvalidSpec("voucher tokens must have 0 decimals".into()));
        }
        if self.decimals > 18 {
            return Err(ContractError::InvalidSpec("at most 18 decimals".into()));
        }
        Ok(())
    }
}

/// An amount of a cash class or a set of vouchers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Asset {
    Amount(u64),
    Tokens(Vec<TokenId>),
}

impl Asset {
    pub fn tokens(ids: impl IntoIterator<Item = u64>) -> Asset {
        Asset::Tokens(ids.into_iter().map(TokenId).collect())
    }

    /// Amount for cash, token count for vouchers.
    pub fn units(&self) -> u64 {
        match self {
            Asset::Amount(a) => *a,
            Asset::Tokens(ids) => ids.len() as u64,
        }
    }

    pub fn token_ids(&self) -> &[TokenId] {
        match self {
            Asset::Amount(_) => &[],
            Asset::Tokens(ids) => ids,
        }
    }
}

/// The contract holding a locked token.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LockRef {
    Escrow(InstanceId),
    Htlc(InstanceId, u8),
    Channel(InstanceId, u8),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BurnKind {
    BurnAddress,
    RegistryDelete,
    SelfDestructSink,
}

/// How to take tokens out of circulation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BurnMethod {
    /// Transfer to [`Address::BURN`], which has no private key.
    BurnAddress,
    /// Delete from the registry; supply shrinks outright.
    RegistryDelete,
    /// Send to a sink contract that self-destructs on first receipt. `None`
    /// deploys a fresh sink inside the burn transaction.
    SelfDestructSink(Option<InstanceId>),
}

impl BurnMethod {
    pub fn kind(&self) -> BurnKind {
        match self {
            BurnMethod::BurnAddress => BurnKind::BurnAddress,
            BurnMethod::RegistryDelete => BurnKind::RegistryDelete,
            BurnMethod::SelfDestructSink(_) => BurnKind::SelfDestructSink,
        }
    }
}

/// Per-voucher lifecycle state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TokenState {
    Allocated,
    Pending(TransferId),
    Locked(LockRef),
    Redeemed,
    /// Terminal.
    Burned(BurnKind),
}

impl TokenState {
    pub fn label(&self) -> &'static str {
        match self {
            TokenState::Allocated => "allocated",
            TokenState::Pending(_) => "pending",
            TokenState::Locked(_) => "locked",
            TokenState::Redeemed => "redeemed",
            TokenState::Burned(_) => "burned",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TokenEvent {
    Minted { to: Address, asset: Asset },
    TransferRequested { transfer: TransferId, from: Address, to: Address, asset: Asset },
    TransferSettled { transfer: TransferId, from: Address, to: Address, asset: Asset },
    TransferRejected { transfer: TransferId, from: Address, to: Address, asset: Asset, by: Address },
    ForcedTransfer { from: Address, to: Address, asset: Asset },
    DelegatedTransfer { spender: Address, owner: Address, to: Address, asset: Asset },
    Approval { owner: Address, spender: Address, amount: u64 },
    Locked { lock: LockRef, owner: Address, asset: Asset },
    Released { lock: LockRef, to: Address, asset: Asset },
    Burned { owner: Address, asset: Asset, method: BurnMethod, archived: bool },
    Redeemed { owner: Address, asset: Asset },
}

impl TokenEvent {
    pub fn name(&self) -> &'static str {
        match self {
            TokenEvent::Minted { .. } => "Minted",
            TokenEvent::TransferRequested { .. } => "TransferRequested",
            TokenEvent::TransferSettled { .. } => "TransferSettled",
            TokenEvent::TransferRejected { .. } => "TransferRejected",
            TokenEvent::ForcedTransfer { .. } => "ForcedTransfer",
            TokenEvent::DelegatedTransfer { .. } => "DelegatedTransfer",
            TokenEvent::Approval { .. } => "Approval",
            TokenEvent::Locked { .. } => "Locked",
            TokenEvent::Released { .. } => "Released",
            TokenEvent::Burned { .. } => "Burned",
            TokenEvent::Redeemed { .. } => "Redeemed",
        }
    }

    pub fn asset(&self) -> Option<&Asset> {
        match self {
            TokenEvent::Approval { .. } => None,
            TokenEvent::Minted { asset, .. }
            | TokenEvent::TransferRequested { asset, .. }
            | TokenEvent::TransferSettled { asset, .. }
            | TokenEvent::TransferRejected { asset, .. }
            | TokenEvent::ForcedTransfer { asset, .. }
            | TokenEvent::DelegatedTransfer { asset, .. }
            | TokenEvent::Locked { asset, .. }
            | TokenEvent::Released { asset, .. }
            | TokenEvent::Burned { asset, .. }
            | TokenEvent::Redeemed { asset, .. } => Some(asset),
        }
    }

    pub fn involves_address(&self, who: &Address) -> bool {
        match self {
            TokenEvent::Minted { to, .. } => to == who,
            TokenEvent::TransferRequested { from, to, .. }
            | TokenEvent::TransferSettled { from, to, .. }
            | TokenEvent::ForcedTransfer { from, to, .. } => from == who || to == who,
            TokenEvent::TransferRejected { from, to, by, .. } => from == who || to == who || by == who,
            TokenEvent::DelegatedTransfer { spender, owner, to, .. } => spender == who || owner == who || to == who,
            TokenEvent::Approval { owner, spender, .. } => owner == who || spender == who,
            TokenEvent::Locked { owner, .. } => owner == who,
            TokenEvent::Released { to, .. } => to == who,
            TokenEvent::Burned { owner, .. } | TokenEvent::Redeemed { owner, .. } => owner == who,
        }
    }

    pub fn involves_token(&self, token: TokenId) -> bool {
        self.asset().is_some_and(|a| a.token_ids().contains(&token))
    }

    /// Units credited to `who` by this event, if any.
    pub(crate) fn received_by(&self, who: &Address) -> Option<u64> {
        match self {
            TokenEvent::Minted { to, asset }
            | TokenEvent::TransferSettled { to, asset, .. }
            | TokenEvent::ForcedTransfer { to, asset, .. }
            | TokenEvent::DelegatedTransfer { to, asset, .. }
            | TokenEvent::Released { to, asset, .. }
                if to == who =>
            {
                Some(asset.units())
            }
            _ => None,
        }
    }
}

/// Lifecycle stage as drawn in the token lifecycle diagram.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Issued,
    Allocated,
    Transferred,
    Locked,
    Redeemed,
    Burned,
}

impl Stage {
    pub fn label(&self) -> &'static str {
        match self {
            Stage::Issued => "issued",
            Stage::Allocated => "allocated",
            Stage::Transferred => "transferred",
            Stage::Locked => "locked",
            Stage::Redeemed => "redeemed",
            Stage::Burned => "burned",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenClass {
    pub spec: TokenClassSpec,
    pub issuer: Address,
    pub attachments: Vec<Attachment>,
    pub frozen: bool,
    pub registry: Registry,
}

/// Self-destructing burn sink. Accepts exactly one burn.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sink {
    pub destroyed: bool,
    pub received: Option<(InstanceId, Asset)>,
}

/// Read-side queries.
impl ChainState {
    pub fn token_class(&self, class: InstanceId) -> Result<&TokenClass> {
        self.contracts().token_class(class)
    }

    /// Spendable balance (cash) or number of allocated vouchers owned.
    /// For [`Address::BURN`] this reports what the burn address holds.
    pub fn balance_of(&self, class: InstanceId, who: &Address) -> Result<u64> {
        Ok(self.token_class(class)?.registry.balance_of(who))
    }

    pub fn owner_of(&self, class: InstanceId, token: TokenId) -> Result<Address> {
        self.token_class(class)?.registry.voucher(token).map(|v| v.owner).ok_or(ContractError::UnknownToken(token.0))
    }

    pub fn token_state(&self, class: InstanceId, token: TokenId) -> Result<TokenState> {
        self.token_class(class)?.registry.voucher(token).map(|v| v.state).ok_or(ContractError::UnknownToken(token.0))
    }

    pub fn supply(&self, class: InstanceId) -> Result<Supply> {
        Ok(self.token_class(class)?.registry.supply())
    }

    pub fn allowance(&self, class: InstanceId, owner: &Address, spender: &Address) -> Result<u64> {
        Ok(self.token_class(class)?.registry.allowance(owner, spender))
    }

    /// Every registry event of `class` with its height, in order.
    pub fn class_history(&self, class: InstanceId) -> Vec<(u64, &TokenEvent)> {
        self.events()
            .iter()
            .filter_map(|e| match &e.kind {
                EventKind::Token { class: c, event } if *c == class => Some((e.height, event)),
                _ => None,
            })
            .collect()
    }

    pub fn history_of_address(&self, class: InstanceId, who: &Address) -> Result<Vec<(u64, &TokenEvent)>> {
        self.token_class(class)?;
        Ok(self.class_history(class).into_iter().filter(|(_, e)| e.involves_address(who)).collect())
    }

    pub fn history_of_token(&self, class: InstanceId, token: TokenId) -> Result<Vec<(u64, &TokenEvent)>> {
        self.owner_of(class, token)?;
        Ok(self.class_history(class).into_iter().filter(|(_, e)| e.involves_token(token)).collect())
    }

    /// Rebuilds the registry of `class` from its event history alone.
    pub fn replay_registry(&self, class: InstanceId) -> Result<Registry> {
        let kind = self.token_class(class)?.spec.fungibility;
        let mut reg = Registry::new(kind);
        for (_, event) in self.class_history(class) {
            reg.apply(event);
        }
        Ok(reg)
    }

    /// Lifecycle stages a voucher has passed through, derived from its history.
    pub fn lifecycle(&self, class: InstanceId, token: TokenId) -> Result<Vec<Stage>> {
        let mut stages = Vec::new();
        for (_, event) in self.history_of_token(class, token)? {
            match event {
                TokenEvent::Minted { .. } => stages.extend([Stage::Issued, Stage::Allocated]),
                TokenEvent::TransferSettled { .. }
                | TokenEvent::ForcedTransfer { .. }
                | TokenEvent::DelegatedTransfer { .. } => stages.push(Stage::Transferred),
                TokenEvent::Locked { .. } => stages.push(Stage::Locked),
                TokenEvent::Released { .. } => stages.push(Stage::Allocated),
                TokenEvent::Redeemed { .. } => stages.push(Stage::Redeemed),
                TokenEvent::Burned { .. } => stages.push(Stage::Burned),
                TokenEvent::TransferRequested { .. }
                | TokenEvent::TransferRejected { .. }
                | TokenEvent::Approval { .. } => {}
            }
        }
        Ok(stages)
    }
}
