use std::collections::{BTreeMap, BTreeSet};

use super::{
    check_rules, credential_registry, credential_signing_bytes, enforce, Attachment, AttrValue, ChainLookup,
    Credential, CredentialId, CredentialStatus, Policy, PolicyTarget, Rule, RuleKind, SellerRegistry,
};
use crate::crypto::Signature;
use crate::error::{ContractError, Result};
use crate::ledger::{Address, EventKind, Exec, Instance, InstanceId};
use crate::token::ops::{commit, not_frozen};
use crate::token::{Asset, TokenEvent};

pub(crate) fn deploy_seller_registry(cx: &mut Exec<'_>) -> InstanceId {
    let owner = cx.sender;
    let registry = cx.contracts.deploy(Instance::SellerRegistry(SellerRegistry { owner, sellers: BTreeSet::new() }));
    cx.emit(registry.address(), EventKind::SellerRegistryDeployed { registry, owner });
    registry
}

pub(crate) fn set_seller(cx: &mut Exec<'_>, registry: InstanceId, seller: Address, listed: bool) -> Result<()> {
    let r = cx.contracts.seller_registry_mut(registry)?;
    if r.owner != cx.sender {
        return Err(ContractError::NotIssuer);
    }
    if listed {
        r.sellers.insert(seller);
        cx.emit(registry.address(), EventKind::SellerRegistered { registry, seller });
    } else {
        if !r.sellers.remove(&seller) {
            return Err(ContractError::WrongState("seller not registered".into()));
        }
        cx.emit(registry.address(), EventKind::SellerRemoved { registry, seller });
    }
    Ok(())
}

pub(crate) fn deploy_policy(cx: &mut Exec<'_>, rules: Vec<Rule>) -> Result<InstanceId> {
    check_rules(cx.contracts, &rules)?;
    let issuer = cx.sender;
    let policy = cx.contracts.deploy(Instance::Policy(Policy { issuer, rules }));
    cx.emit(policy.address(), EventKind::PolicyDeployed { policy, issuer });
    Ok(policy)
}

fn class_issuer_only(cx: &Exec<'_>, class: InstanceId) -> Result<()> {
    if cx.contracts.token_class(class)?.issuer != cx.sender {
        return Err(ContractError::NotIssuer);
    }
    Ok(())
}

pub(crate) fn attach_policy(
    cx: &mut Exec<'_>,
    class: InstanceId,
    target: PolicyTarget,
    policy: InstanceId,
    functions: Vec<RuleKind>,
) -> Result<()> {
    class_issuer_only(cx, class)?;
    cx.contracts.policy(policy).map_err(|_| ContractError::UnknownPolicy(policy))?;
    let tc = cx.contracts.token_class_mut(class)?;
    if let PolicyTarget::Token(id) = target {
        if tc.registry.voucher(id).is_none() {
            return Err(ContractError::UnknownToken(id.0));
        }
    }
    // re-attaching replaces the selected functions
    tc.attachments.retain(|a| !(a.target == target && a.policy == policy));
    tc.attachments.push(Attachment { target, policy, functions });
    cx.emit(class.address(), EventKind::PolicyAttached { class, target, policy });
    Ok(())
}

pub(crate) fn detach_policy(
    cx: &mut Exec<'_>,
    class: InstanceId,
    target: PolicyTarget,
    policy: InstanceId,
) -> Result<()> {
    class_issuer_only(cx, class)?;
    let tc = cx.contracts.token_class_mut(class)?;
    let before = tc.attachments.len();
    tc.attachments.retain(|a| !(a.target == target && a.policy == policy));
    if tc.attachments.len() == before {
        return Err(ContractError::UnknownPolicy(policy));
    }
    cx.emit(class.address(), EventKind::PolicyDetached { class, target, policy });
    Ok(())
}

pub(crate) fn issue_credential(
    cx: &mut Exec<'_>,
    subject: Address,
    attributes: BTreeMap<String, AttrValue>,
    signature: Signature,
) -> Result<Credential> {
    let issuer = cx.sender;
    let pk = cx.public_key(&issuer).ok_or(ContractError::BadSignature)?;
    if !pk.verify(&credential_signing_bytes(&issuer, &subject, &attributes), &signature) {
        return Err(ContractError::BadSignature);
    }
    let id = CredentialId(cx.contracts.next_credential);
    cx.contracts.next_credential += 1;
    let credential = Credential {
        id,
        issuer,
        subject,
        attributes,
        issued_at: cx.height,
        status: CredentialStatus::Active,
        signature,
    };
    cx.contracts.credentials.insert(id, credential.clone());
    cx.emit(credential_registry(), EventKind::CredentialIssued { credential: id, issuer, subject });
    Ok(credential)
}

pub(crate) fn revoke_credential(cx: &mut Exec<'_>, id: CredentialId) -> Result<()> {
    let sender = cx.sender;
    let c = cx.contracts.credentials.get_mut(&id).ok_or(ContractError::UnknownCredential(id.0))?;
    if c.issuer != sender {
        return Err(ContractError::NotIssuer);
    }
    if c.status == CredentialStatus::Revoked {
        return Err(ContractError::WrongState("credential already revoked".into()));
    }
    c.status = CredentialStatus::Revoked;
    cx.emit(credential_registry(), EventKind::CredentialRevoked { credential: id });
    Ok(())
}

pub(crate) fn approve(cx: &mut Exec<'_>, class: InstanceId, spender: Address, amount: u64) -> Result<()> {
    let owner = cx.sender;
    commit(cx, class, TokenEvent::Approval { owner, spender, amount })
}

pub(crate) fn transfer_from(
    cx: &mut Exec<'_>,
    class: InstanceId,
    owner: Address,
    to: Address,
    asset: &Asset,
    category: Option<&str>,
) -> Result<()> {
    not_frozen(cx, class)?;
    let spender = cx.sender;
    let reg = &cx.contracts.token_class(class)?.registry;
    reg.check_asset(asset)?;
    if spender != owner {
        let remaining = reg.allowance(&owner, &spender);
        if asset.units() > remaining {
            return Err(ContractError::AllowanceExceeded { remaining, requested: asset.units() });
        }
    }
    reg.check_spendable(&owner, asset)?;
    enforce(&ChainLookup::of(cx), class, &owner, &to, asset, category)?;
    commit(cx, class, TokenEvent::DelegatedTransfer { spender, owner, to, asset: asset.clone() })
}
