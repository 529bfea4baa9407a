use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Asset, BurnKind, BurnMethod, Fungibility, LockRef, TokenEvent, TokenId, TokenState, TransferId};
use crate::error::{ContractError, Result};
use crate::ledger::Address;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Voucher {
    pub owner: Address,
    pub state: TokenState,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PendingTransfer {
    pub from: Address,
    pub to: Address,
    pub asset: Asset,
}

/// Tokens held by a contract on behalf of `owner`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Holding {
    pub owner: Address,
    pub asset: Asset,
}

/// Cumulative burned units, split by method.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BurnTotals {
    pub burn_address: u64,
    pub deleted: u64,
    pub sink: u64,
}

/// Read-only mirror of what an owner burned with `archive` set.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Archive {
    pub amount: u64,
    pub tokens: Vec<TokenId>,
}

/// Supply breakdown. `archived` mirrors part of the burned total and is
/// excluded from every other bucket.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Supply {
    pub minted: u64,
    pub circulating: u64,
    pub pending: u64,
    pub locked: u64,
    pub redeemed: u64,
    pub burned_address: u64,
    pub burned_deleted: u64,
    pub burned_sink: u64,
    pub archived: u64,
}

impl Supply {
    pub fn burned(&self) -> u64 {
        self.burned_address + self.burned_deleted + self.burned_sink
    }

    /// minted = circulating + pending + locked + redeemed + burned
    pub fn is_conserved(&self) -> bool {
        let accounted = self.circulating as u128
            + self.pending as u128
            + self.locked as u128
            + self.redeemed as u128
            + self.burned() as u128;
        accounted == self.minted as u128
    }
}

/// Ownership record of one token class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Registry {
    fungibility: Fungibility,
    minted: u64,
    balances: BTreeMap<Address, u64>,
    vouchers: BTreeMap<TokenId, Voucher>,
    pending: BTreeMap<TransferId, PendingTransfer>,
    next_transfer: u64,
    locks: BTreeMap<LockRef, Holding>,
    burned: BurnTotals,
    burned_by: BTreeMap<Address, u64>,
    archive: BTreeMap<Address, Archive>,
    allowances: BTreeMap<(Address, Address), u64>,
}

impl Registry {
    pub fn new(fungibility: Fungibility) -> Self {
        Registry {
            fungibility,
            minted: 0,
            balances: BTreeMap::new(),
            vouchers: BTreeMap::new(),
            pending: BTreeMap::new(),
            next_transfer: 0,
            locks: BTreeMap::new(),
            burned: BurnTotals::default(),
            burned_by: BTreeMap::new(),
            archive: BTreeMap::new(),
            allowances: BTreeMap::new(),
        }
    }

    pub fn fungibility(&self) -> Fungibility {
        self.fungibility
    }

    pub fn voucher(&self, token: TokenId) -> Option<&Voucher> {
        self.vouchers.get(&token)
    }

    pub fn vouchers(&self) -> &BTreeMap<TokenId, Voucher> {
        &self.vouchers
    }

    pub fn balances(&self) -> &BTreeMap<Address, u64> {
        &self.balances
    }

    pub fn pending(&self, transfer: TransferId) -> Option<&PendingTransfer> {
        self.pending.get(&transfer)
    }

    pub fn pending_transfers(&self) -> &BTreeMap<TransferId, PendingTransfer> {
        &self.pending
    }

    pub fn holding(&self, lock: &LockRef) -> Option<&Holding> {
        self.locks.get(lock)
    }

    pub fn locks(&self) -> &BTreeMap<LockRef, Holding> {
        &self.locks
    }

    pub fn burn_totals(&self) -> BurnTotals {
        self.burned
    }

    pub fn archive(&self, owner: &Address) -> Option<&Archive> {
        self.archive.get(owner)
    }

    pub fn allowance(&self, owner: &Address, spender: &Address) -> u64 {
        self.allowances.get(&(*owner, *spender)).copied().unwrap_or(0)
    }

    pub(crate) fn next_transfer_id(&self) -> TransferId {
        TransferId(self.next_transfer)
    }

    pub fn balance_of(&self, who: &Address) -> u64 {
        match self.fungibility {
            Fungibility::Cash if *who == Address::BURN => self.burned.burn_address,
            Fungibility::Cash => self.balances.get(who).copied().unwrap_or(0),
            Fungibility::Voucher => self
                .vouchers
                .values()
                .filter(|v| v.owner == *who)
                .filter(|v| matches!(v.state, TokenState::Allocated | TokenState::Burned(BurnKind::BurnAddress)))
                .count() as u64,
        }
    }

    pub fn supply(&self) -> Supply {
        let mut s = Supply {
            minted: self.minted,
            burned_address: self.burned.burn_address,
            burned_deleted: self.burned.deleted,
            burned_sink: self.burned.sink,
            archived: self.archive.values().map(|a| a.amount + a.tokens.len() as u64).sum(),
            ..Supply::default()
        };
        match self.fungibility {
            Fungibility::Cash => {
                s.circulating = self.balances.values().sum();
                s.pending = self.pending.values().map(|p| p.asset.units()).sum();
                s.locked = self.locks.values().map(|h| h.asset.units()).sum();
            }
            Fungibility::Voucher => {
                for v in self.vouchers.values() {
                    match v.state {
                        TokenState::Allocated => s.circulating += 1,
                        TokenState::Pending(_) => s.pending += 1,
                        TokenState::Locked(_) => s.locked += 1,
                        TokenState::Redeemed => s.redeemed += 1,
                        TokenState::Burned(_) => {}
                    }
                }
            }
        }
        s
    }

    /// Shape check: cash classes take a non-zero amount, voucher classes a
    /// non-empty list of distinct ids.
    pub(crate) fn check_asset(&self, asset: &Asset) -> Result<()> {
        match (self.fungibility, asset) {
            (Fungibility::Cash, Asset::Amount(0)) => Err(ContractError::InvalidAsset("zero amount".into())),
            (Fungibility::Cash, Asset::Amount(_)) => Ok(()),
            (Fungibility::Voucher, Asset::Tokens(ids)) => {
                if ids.is_empty() {
                    return Err(ContractError::InvalidAsset("empty token list".into()));
                }
                let mut seen = BTreeSet::new();
                for id in ids {
                    if !seen.insert(*id) {
                        return Err(ContractError::InvalidAsset(format!("token {id} listed twice")));
                    }
                }
                Ok(())
            }
            (Fungibility::Cash, Asset::Tokens(_)) => {
                Err(ContractError::InvalidAsset("cash class takes an amount".into()))
            }
            (Fungibility::Voucher, Asset::Amount(_)) => {
                Err(ContractError::InvalidAsset("voucher class takes token ids".into()))
            }
        }
    }

    pub(crate) fn check_mint(&self, asset: &Asset) -> Result<()> {
        if let Asset::Tokens(ids) = asset {
            // duplicates within the list surface as DuplicateToken, not InvalidAsset
            let mut seen = BTreeSet::new();
            for id in ids {
                if self.vouchers.contains_key(id) || !seen.insert(*id) {
                    return Err(ContractError::DuplicateToken(id.0));
                }
            }
        }
        self.check_asset(asset)?;
        if let Asset::Amount(a) = asset {
            if self.minted.checked_add(*a).is_none() {
                return Err(ContractError::InvalidAsset("supply overflow".into()));
            }
        }
        Ok(())
    }

    /// `owner` may move `asset` right now.
    pub(crate) fn check_spendable(&self, owner: &Address, asset: &Asset) -> Result<()> {
        self.check_asset(asset)?;
        match asset {
            Asset::Amount(needed) => {
                let available = self.balances.get(owner).copied().unwrap_or(0);
                if available >= *needed {
                    return Ok(());
                }
                // Units the owner has but cannot use: locked, pending, burned.
                let held_elsewhere: u64 = self
                    .locks
                    .values()
                    .filter(|h| h.owner == *owner)
                    .map(|h| h.asset.units())
                    .chain(self.pending.values().filter(|p| p.from == *owner).map(|p| p.asset.units()))
                    .chain(self.burned_by.get(owner).copied())
                    .sum();
                if available + held_elsewhere >= *needed {
                    Err(ContractError::TokenNotSpendable)
                } else {
                    Err(ContractError::InsufficientBalance { needed: *needed, available })
                }
            }
            Asset::Tokens(ids) => {
                for id in ids {
                    let v = self.vouchers.get(id).ok_or(ContractError::UnknownToken(id.0))?;
                    if v.state != TokenState::Allocated {
                        return Err(ContractError::TokenNotSpendable);
                    }
                    if v.owner != *owner {
                        return Err(ContractError::NotOwner);
                    }
                }
                Ok(())
            }
        }
    }

    pub(crate) fn check_burn(&self, owner: &Address, asset: &Asset) -> Result<()> {
        self.check_asset(asset)?;
        if let Asset::Tokens(ids) = asset {
            for id in ids {
                let v = self.vouchers.get(id).ok_or(ContractError::UnknownToken(id.0))?;
                match v.state {
                    TokenState::Burned(_) => return Err(ContractError::AlreadyBurned),
                    TokenState::Allocated | TokenState::Redeemed => {}
                    TokenState::Pending(_) | TokenState::Locked(_) => return Err(ContractError::TokenNotSpendable),
                }
                if v.owner != *owner {
                    return Err(ContractError::NotOwner);
                }
            }
            return Ok(());
        }
        self.check_spendable(owner, asset)
    }

    pub(crate) fn check_redeem(&self, owner: &Address, asset: &Asset) -> Result<()> {
        if self.fungibility != Fungibility::Voucher {
            return Err(ContractError::InvalidAsset("only vouchers are redeemed".into()));
        }
        self.check_spendable(owner, asset)
    }

    /// `lock` holds at least `asset`.
    pub(crate) fn check_release(&self, lock: &LockRef, asset: &Asset) -> Result<()> {
        let holding = self.locks.get(lock).ok_or_else(|| ContractError::WrongState("nothing locked".into()))?;
        let covered = match (&holding.asset, asset) {
            (Asset::Amount(held), Asset::Amount(a)) => a <= held,
            (Asset::Tokens(held), Asset::Tokens(ids)) => ids.iter().all(|id| held.contains(id)),
            _ => false,
        };
        if covered {
            Ok(())
        } else {
            Err(ContractError::InvalidAsset("release exceeds holding".into()))
        }
    }

    fn debit(&mut self, from: &Address, asset: &Asset) {
        if let Asset::Amount(a) = asset {
            let bal = self.balances.get_mut(from).expect("validated debit");
            *bal -= a;
            if *bal == 0 {
                self.balances.remove(from);
            }
        }
    }

    fn credit(&mut self, to: &Address, asset: &Asset) {
        match asset {
            Asset::Amount(a) => *self.balances.entry(*to).or_default() += a,
            Asset::Tokens(ids) => {
                for id in ids {
                    let v = self.vouchers.get_mut(id).expect("validated credit");
                    v.owner = *to;
                    v.state = TokenState::Allocated;
                }
            }
        }
    }

    fn set_state(&mut self, asset: &Asset, state: TokenState) {
        for id in asset.token_ids() {
            self.vouchers.get_mut(id).expect("validated voucher").state = state;
        }
    }

    /// Applies one validated event. Callers validate first; replaying a
    /// class's own history never fails.
    pub fn apply(&mut self, event: &TokenEvent) {
        match event {
            TokenEvent::Minted { to, asset } => {
                self.minted += asset.units();
                match asset {
                    Asset::Amount(a) => *self.balances.entry(*to).or_default() += a,
                    Asset::Tokens(ids) => {
                        for id in ids {
                            self.vouchers.insert(*id, Voucher { owner: *to, state: TokenState::Allocated });
                        }
                    }
                }
            }
            TokenEvent::TransferRequested { transfer, from, to, asset } => {
                self.debit(from, asset);
                self.set_state(asset, TokenState::Pending(*transfer));
                self.pending.insert(*transfer, PendingTransfer { from: *from, to: *to, asset: asset.clone() });
                self.next_transfer = self.next_transfer.max(transfer.0 + 1);
            }
            TokenEvent::TransferSettled { transfer, to, asset, .. } => {
                self.pending.remove(transfer);
                self.credit(to, asset);
            }
            TokenEvent::TransferRejected { transfer, from, asset, .. } => {
                self.pending.remove(transfer);
                self.credit(from, asset);
            }
            TokenEvent::ForcedTransfer { from, to, asset } => {
                self.debit(from, asset);
                self.credit(to, asset);
            }
            TokenEvent::DelegatedTransfer { spender, owner, to, asset } => {
                if spender != owner {
                    let key = (*owner, *spender);
                    let remaining = self.allowances.get(&key).copied().unwrap_or(0);
                    self.allowances.insert(key, remaining - asset.units());
                }
                self.debit(owner, asset);
                self.credit(to, asset);
            }
            TokenEvent::Approval { owner, spender, amount } => {
                self.allowances.insert((*owner, *spender), *amount);
            }
            TokenEvent::Locked { lock, owner, asset } => {
                self.debit(owner, asset);
                self.set_state(asset, TokenState::Locked(*lock));
                self.locks.insert(*lock, Holding { owner: *owner, asset: asset.clone() });
            }
            TokenEvent::Released { lock, to, asset } => {
                let holding = self.locks.get_mut(lock).expect("validated release");
                let empty = match (&mut holding.asset, asset) {
                    (Asset::Amount(held), Asset::Amount(a)) => {
                        *held -= a;
                        *held == 0
                    }
                    (Asset::Tokens(held), Asset::Tokens(ids)) => {
                        held.retain(|id| !ids.contains(id));
                        held.is_empty()
                    }
                    _ => unreachable!("validated release"),
                };
                if empty {
                    self.locks.remove(lock);
                }
                self.credit(to, asset);
            }
            TokenEvent::Burned { owner, asset, method, archived } => {
                let units = asset.units();
                self.debit(owner, asset);
                let kind = method.kind();
                match kind {
                    BurnKind::BurnAddress => self.burned.burn_address += units,
                    BurnKind::RegistryDelete => self.burned.deleted += units,
                    BurnKind::SelfDestructSink => self.burned.sink += units,
                }
                for id in asset.token_ids() {
                    let v = self.vouchers.get_mut(id).expect("validated burn");
                    v.state = TokenState::Burned(kind);
                    match method {
                        BurnMethod::BurnAddress => v.owner = Address::BURN,
                        BurnMethod::SelfDestructSink(Some(sink)) => v.owner = sink.address(),
                        _ => {}
                    }
                }
                *self.burned_by.entry(*owner).or_default() += units;
                if *archived {
                    let entry = self.archive.entry(*owner).or_default();
                    match asset {
                        Asset::Amount(a) => entry.amount += a,
                        Asset::Tokens(ids) => entry.tokens.extend(ids.iter().copied()),
                    }
                }
            }
            TokenEvent::Redeemed { asset, .. } => {
                self.set_state(asset, TokenState::Redeemed);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn addr(b: u8) -> Address {
        Address([b; 32])
    }

    #[test]
    fn cash_request_moves_to_pending() {
        let mut r = Registry::new(Fungibility::Cash);
        r.apply(&TokenEvent::Minted { to: addr(1), asset: Asset::Amount(100) });
        r.check_spendable(&addr(1), &Asset::Amount(30)).unwrap();
        r.apply(&TokenEvent::TransferRequested {
            transfer: TransferId(0),
            from: addr(1),
            to: addr(2),
            asset: Asset::Amount(30),
        });
        assert_eq!(r.balance_of(&addr(1)), 70);
        assert_eq!(r.balance_of(&addr(2)), 0);
        let s = r.supply();
        assert_eq!((s.circulating, s.pending), (70, 30));
        assert!(s.is_conserved());
    }

    #[test]
    fn locked_cash_is_reported_not_spendable() {
        let mut r = Registry::new(Fungibility::Cash);
        r.apply(&TokenEvent::Minted { to: addr(1), asset: Asset::Amount(10) });
        r.apply(&TokenEvent::Locked {
            lock: LockRef::Escrow(crate::ledger::InstanceId(3)),
            owner: addr(1),
            asset: Asset::Amount(10),
        });
        assert_eq!(r.check_spendable(&addr(1), &Asset::Amount(5)), Err(ContractError::TokenNotSpendable));
        assert!(matches!(
            r.check_spendable(&addr(1), &Asset::Amount(11)),
            Err(ContractError::InsufficientBalance { .. })
        ));
    }

    #[test]
    fn voucher_double_burn_is_already_burned() {
        let mut r = Registry::new(Fungibility::Voucher);
        r.apply(&TokenEvent::Minted { to: addr(1), asset: Asset::tokens([1]) });
        let burn = TokenEvent::Burned {
            owner: addr(1),
            asset: Asset::tokens([1]),
            method: BurnMethod::RegistryDelete,
            archived: false,
        };
        r.check_burn(&addr(1), &Asset::tokens([1])).unwrap();
        r.apply(&burn);
        assert_eq!(r.check_burn(&addr(1), &Asset::tokens([1])), Err(ContractError::AlreadyBurned));
        assert_eq!(r.supply().burned_deleted, 1);
    }

    #[test]
    fn asset_shape_mismatch() {
        let r = Registry::new(Fungibility::Voucher);
        assert!(matches!(r.check_asset(&Asset::Amount(3)), Err(ContractError::InvalidAsset(_))));
        let r = Registry::new(Fungibility::Cash);
        assert!(matches!(r.check_asset(&Asset::Amount(0)), Err(ContractError::InvalidAsset(_))));
    }
}
