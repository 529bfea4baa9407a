mod common;

use common::World;
use paysim_core::token::{Asset, BurnMethod, Fungibility, TokenId, TokenState, TransferId};
use paysim_core::{Call, ContractError, InstanceId};
use proptest::prelude::*;

#[derive(Clone, Debug)]
enum Op {
    Mint(usize),
    Request { from: usize, to: usize, token: u64 },
    Confirm { pick: u64, by: usize },
    Reject { pick: u64, by: usize },
    Forced { token: u64, to: usize },
    Burn { who: usize, token: u64, method: u8 },
    Redeem { who: usize, token: u64 },
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        (0..3usize).prop_map(Op::Mint),
        (0..3usize, 0..3usize, 1..8u64).prop_map(|(from, to, token)| Op::Request { from, to, token }),
        (0..8u64, 0..3usize).prop_map(|(pick, by)| Op::Confirm { pick, by }),
        (0..8u64, 0..3usize).prop_map(|(pick, by)| Op::Reject { pick, by }),
        (1..8u64, 0..3usize).prop_map(|(token, to)| Op::Forced { token, to }),
        (0..3usize, 1..8u64, 0..3u8).prop_map(|(who, token, method)| Op::Burn { who, token, method }),
        (0..3usize, 1..8u64).prop_map(|(who, token)| Op::Redeem { who, token }),
    ]
}

fn method(m: u8) -> BurnMethod {
    [BurnMethod::BurnAddress, BurnMethod::RegistryDelete, BurnMethod::SelfDestructSink(None)][m as usize]
}

/// Runs voucher ops; returns the class and the number of vouchers minted.
fn run(ops: &[Op], mut check: impl FnMut(&World, InstanceId, &Op, bool)) -> (World, InstanceId) {
    let mut w = World::new(3);
    let class = w.spawn(0, Fungibility::Voucher, 0);
    let mut next = 1;
    for op in ops {
        let r = match *op {
            Op::Mint(to) => {
                next += 1;
                let to = w.addr(to);
                w.exec(0, Call::Mint { class, to, asset: Asset::tokens([next - 1]) })
            }
            Op::Request { from, to, token } => {
                let to = w.addr(to);
                w.exec(from, Call::RequestTransfer { class, to, asset: Asset::tokens([token]), category: None })
            }
            Op::Confirm { pick, by } => w.exec(by, Call::ConfirmTransfer { class, transfer: TransferId(pick) }),
            Op::Reject { pick, by } => w.exec(by, Call::RejectTransfer { class, transfer: TransferId(pick) }),
            Op::Forced { token, to } => {
                let from = w.chain.owner_of(class, TokenId(token)).unwrap_or(w.addr(1));
                let to = w.addr(to);
                w.exec(0, Call::ForcedTransfer { class, from, to, asset: Asset::tokens([token]) })
            }
            Op::Burn { who, token, method: m } => {
                w.exec(who, Call::Burn { class, asset: Asset::tokens([token]), method: method(m), archive: m == 0 })
            }
            Op::Redeem { who, token } => w.exec(who, Call::Redeem { class, asset: Asset::tokens([token]) }),
        };
        check(&w, class, op, r.is_success());
    }
    (w, class)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn voucher_conservation_and_fold_replay(ops in prop::collection::vec(op(), 0..30)) {
        let (w, class) = run(&ops, |w, class, _, _| {
            let s = w.chain.supply(class).unwrap();
            assert!(s.is_conserved(), "{s:?}");
            assert!(s.archived <= s.burned());
        });
        let live = &w.chain.token_class(class).unwrap().registry;
        prop_assert!(&w.chain.replay_registry(class).unwrap() == live);
    }

    #[test]
    fn burned_is_terminal(ops in prop::collection::vec(op(), 0..30)) {
        let mut burned_seen: Vec<TokenId> = Vec::new();
        run(&ops, |w, class, _, _| {
            for t in &burned_seen {
                assert!(matches!(w.chain.token_state(class, *t).unwrap(), TokenState::Burned(_)), "{t:?} left burned");
            }
            for (id, v) in w.chain.token_class(class).unwrap().registry.vouchers() {
                if matches!(v.state, TokenState::Burned(_)) && !burned_seen.contains(id) {
                    burned_seen.push(*id);
                }
            }
        });
    }

    #[test]
    fn pending_value_is_spendable_by_nobody(amount in 1..50u64, probe in 1..50u64) {
        let mut w = World::new(3);
        let class = w.spawn(0, Fungibility::Cash, 0);
        w.mint(class, 1, Asset::Amount(amount));
        let to = w.addr(2);
        w.ok(1, Call::RequestTransfer { class, to, asset: Asset::Amount(amount), category: None });
        prop_assert_eq!(w.chain.balance_of(class, &w.addr(1)).unwrap(), 0);
        prop_assert_eq!(w.chain.balance_of(class, &w.addr(2)).unwrap(), 0);
        for who in [1, 2] {
            let other = w.addr(3 - who);
            let r = w.exec(who, Call::RequestTransfer { class, to: other, asset: Asset::Amount(probe), category: None });
            prop_assert!(!r.is_success());
        }
        prop_assert_eq!(w.chain.supply(class).unwrap().pending, amount);
    }
}

#[test]
fn cash_burn_methods_update_supply_buckets() {
    let mut w = World::new(2);
    let class = w.spawn(0, Fungibility::Cash, 0);
    w.mint(class, 1, Asset::Amount(30));
    for (m, amt) in [(0u8, 5u64), (1, 7), (2, 11)] {
        w.ok(1, Call::Burn { class, asset: Asset::Amount(amt), method: method(m), archive: m == 1 });
    }
    let s = w.chain.supply(class).unwrap();
    assert_eq!((s.burned_address, s.burned_deleted, s.burned_sink, s.archived), (5, 7, 11, 7));
    assert_eq!(s.circulating, 7);
    assert!(s.is_conserved());
    let r = w.exec(1, Call::RequestTransfer { class, to: w.addr(0), asset: Asset::Amount(8), category: None });
    assert_eq!(r.error(), Some(&ContractError::TokenNotSpendable));
}

#[test]
fn sink_accepts_exactly_one_burn() {
    let mut w = World::new(2);
    let class = w.spawn(0, Fungibility::Cash, 0);
    w.mint(class, 1, Asset::Amount(10));
    let sink = w.ok(1, Call::DeploySink);
    let paysim_core::Output::Instance(sink) = sink else { panic!() };
    let burn =
        Call::Burn { class, asset: Asset::Amount(3), method: BurnMethod::SelfDestructSink(Some(sink)), archive: false };
    w.ok(1, burn.clone());
    assert_eq!(w.exec(1, burn).error(), Some(&ContractError::SinkDestroyed(sink)));
    assert_eq!(w.chain.balance_of(class, &w.addr(1)).unwrap(), 7);
}

#[test]
fn voucher_history_and_lifecycle() {
    let mut w = World::new(3);
    let class = w.spawn(0, Fungibility::Voucher, 0);
    w.mint(class, 1, Asset::tokens([9]));
    let to = w.addr(2);
    w.ok(1, Call::RequestTransfer { class, to, asset: Asset::tokens([9]), category: None });
    w.ok(2, Call::ConfirmTransfer { class, transfer: TransferId(0) });
    assert_eq!(w.chain.history_of_token(class, TokenId(9)).unwrap().len(), 3);
    assert_eq!(w.chain.owner_of(class, TokenId(9)).unwrap(), w.addr(2));
    let stages: Vec<_> = w.chain.lifecycle(class, TokenId(9)).unwrap().iter().map(|s| s.label()).collect();
    assert_eq!(stages, ["issued", "allocated", "transferred"]);
}
