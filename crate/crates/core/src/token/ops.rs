use super::{
    Asset, BurnMethod, Fungibility, LockRef, Registry, Sink, TokenClass, TokenClassSpec, TokenEvent, TransferId,
};
use crate::error::{ContractError, Result};
use crate::governance::{self, ChainLookup};
use crate::ledger::{Address, EventKind, Exec, Instance, InstanceId};

/// Applies a validated event to the class registry and logs it.
pub(crate) fn commit(cx: &mut Exec<'_>, class: InstanceId, event: TokenEvent) -> Result<()> {
    cx.contracts.token_class_mut(class)?.registry.apply(&event);
    cx.emit(class.address(), EventKind::Token { class, event });
    Ok(())
}

fn issuer_only<'a>(cx: &'a Exec<'_>, class: InstanceId) -> Result<&'a TokenClass> {
    let tc = cx.contracts.token_class(class)?;
    if tc.issuer != cx.sender {
        return Err(ContractError::NotIssuer);
    }
    Ok(tc)
}

fn registry<'a>(cx: &'a Exec<'_>, class: InstanceId) -> Result<&'a Registry> {
    Ok(&cx.contracts.token_class(class)?.registry)
}

pub(crate) fn not_frozen(cx: &Exec<'_>, class: InstanceId) -> Result<()> {
    if cx.contracts.token_class(class)?.frozen {
        return Err(ContractError::ClassFrozen);
    }
    Ok(())
}

pub(crate) fn spawn(cx: &mut Exec<'_>, spec: TokenClassSpec) -> Result<InstanceId> {
    spec.validate()?;
    let issuer = cx.sender;
    let initial = match spec.fungibility {
        Fungibility::Cash => Asset::Amount(spec.total_supply),
        Fungibility::Voucher => Asset::tokens(1..=spec.total_supply),
    };
    let class = cx.contracts.deploy(Instance::TokenClass(TokenClass {
        registry: Registry::new(spec.fungibility),
        spec: spec.clone(),
        issuer,
        attachments: Vec::new(),
        frozen: false,
    }));
    cx.emit(class.address(), EventKind::TokenClassCreated { class, issuer, spec });
    if initial.units() > 0 {
        commit(cx, class, TokenEvent::Minted { to: issuer, asset: initial })?;
    }
    Ok(class)
}

pub(crate) fn mint(cx: &mut Exec<'_>, class: InstanceId, to: Address, asset: &Asset) -> Result<()> {
    let tc = issuer_only(cx, class)?;
    if !tc.spec.mintable {
        return Err(ContractError::NotMintable);
    }
    tc.registry.check_mint(asset)?;
    commit(cx, class, TokenEvent::Minted { to, asset: asset.clone() })
}

pub(crate) fn request_transfer(
    cx: &mut Exec<'_>,
    class: InstanceId,
    to: Address,
    asset: &Asset,
    category: Option<&str>,
) -> Result<TransferId> {
    not_frozen(cx, class)?;
    let from = cx.sender;
    let reg = registry(cx, class)?;
    reg.check_spendable(&from, asset)?;
    let transfer = reg.next_transfer_id();
    governance::enforce(&ChainLookup::of(cx), class, &from, &to, asset, category)?;
    commit(cx, class, TokenEvent::TransferRequested { transfer, from, to, asset: asset.clone() })?;
    Ok(transfer)
}

pub(crate) fn confirm_transfer(cx: &mut Exec<'_>, class: InstanceId, transfer: TransferId) -> Result<()> {
    let p = registry(cx, class)?.pending(transfer).ok_or(ContractError::UnknownTransfer(transfer.0))?.clone();
    if p.to != cx.sender {
        return Err(ContractError::NotRecipient);
    }
    commit(cx, class, TokenEvent::TransferSettled { transfer, from: p.from, to: p.to, asset: p.asset })
}

pub(crate) fn reject_transfer(cx: &mut Exec<'_>, class: InstanceId, transfer: TransferId) -> Result<()> {
    let tc = cx.contracts.token_class(class)?;
    let p = tc.registry.pending(transfer).ok_or(ContractError::UnknownTransfer(transfer.0))?.clone();
    if p.to != cx.sender && tc.issuer != cx.sender {
        return Err(ContractError::NotRecipient);
    }
    let by = cx.sender;
    commit(cx, class, TokenEvent::TransferRejected { transfer, from: p.from, to: p.to, asset: p.asset, by })
}

pub(crate) fn forced_transfer(
    cx: &mut Exec<'_>,
    class: InstanceId,
    from: Address,
    to: Address,
    asset: &Asset,
) -> Result<()> {
    issuer_only(cx, class)?.registry.check_spendable(&from, asset)?;
    commit(cx, class, TokenEvent::ForcedTransfer { from, to, asset: asset.clone() })
}

pub(crate) fn burn(
    cx: &mut Exec<'_>,
    class: InstanceId,
    asset: &Asset,
    method: BurnMethod,
    archive: bool,
) -> Result<()> {
    let owner = cx.sender;
    let tc = cx.contracts.token_class(class)?;
    if !tc.spec.burnable {
        return Err(ContractError::NotBurnable);
    }
    tc.registry.check_burn(&owner, asset)?;
    let method = match method {
        BurnMethod::SelfDestructSink(sink) => {
            let sink = match sink {
                Some(id) => id,
                None => deploy_sink(cx),
            };
            let s = cx.contracts.sink_mut(sink)?;
            if s.destroyed {
                return Err(ContractError::SinkDestroyed(sink));
            }
            s.destroyed = true;
            s.received = Some((class, asset.clone()));
            cx.emit(sink.address(), EventKind::SinkDestroyed { sink });
            BurnMethod::SelfDestructSink(Some(sink))
        }
        m => m,
    };
    commit(cx, class, TokenEvent::Burned { owner, asset: asset.clone(), method, archived: archive })
}

pub(crate) fn redeem(cx: &mut Exec<'_>, class: InstanceId, asset: &Asset) -> Result<()> {
    let owner = cx.sender;
    registry(cx, class)?.check_redeem(&owner, asset)?;
    commit(cx, class, TokenEvent::Redeemed { owner, asset: asset.clone() })
}

pub(crate) fn set_frozen(cx: &mut Exec<'_>, class: InstanceId, frozen: bool) -> Result<()> {
    issuer_only(cx, class)?;
    cx.contracts.token_class_mut(class)?.frozen = frozen;
    cx.emit(class.address(), EventKind::ClassFrozen { class, frozen });
    Ok(())
}

pub(crate) fn deploy_sink(cx: &mut Exec<'_>) -> InstanceId {
    let sink = cx.contracts.deploy(Instance::Sink(Sink::default()));
    cx.emit(sink.address(), EventKind::SinkDeployed { sink });
    sink
}

/// Moves `asset` from `owner` into a contract lock. Locks are voluntary
/// moves, so a frozen class refuses them.
pub(crate) fn lock(cx: &mut Exec<'_>, class: InstanceId, lock: LockRef, owner: Address, asset: &Asset) -> Result<()> {
    not_frozen(cx, class)?;
    registry(cx, class)?.check_spendable(&owner, asset)?;
    commit(cx, class, TokenEvent::Locked { lock, owner, asset: asset.clone() })
}

/// Pays `asset` out of a contract lock to `to`.
pub(crate) fn release(cx: &mut Exec<'_>, class: InstanceId, lock: LockRef, to: Address, asset: &Asset) -> Result<()> {
    registry(cx, class)?.check_release(&lock, asset)?;
    commit(cx, class, TokenEvent::Released { lock, to, asset: asset.clone() })
}
