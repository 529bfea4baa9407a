//! Acceptance suite. Runs every criterion and prints one PASS/FAIL line each.
//! Built with `harness = false`, so the lines show up in plain `cargo test`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::time::Instant;

use paysim_core::batch;
use paysim_core::channels::{
    chain_propagate, find_preimage, hash_lock, ChannelSession, ChannelStatus, HtlcState, LegSpec,
};
use paysim_core::codec;
use paysim_core::crypto::{hash_parts, sha256};
use paysim_core::governance::{sign_credential, AttrValue, Credential, Party, PolicyTarget, Rule, Verdict};
use paysim_core::privacy::{derive_stealth_address, derive_stealth_keypair, derive_stealth_public, scan_for_payments};
use paysim_core::settlement::{sign_multisig, Condition, EscrowState, FeedMode, Trust};
use paysim_core::token::{Asset, BurnMethod, Fungibility, Registry, TokenClassSpec, TokenEvent, TokenId, TokenState};
use paysim_core::{
    Address, Call, ChainState, ContractError, Hash32, InstanceId, KeyPair, Output, Receipt, Transaction,
};
use paysim_harness::verbs::{self, Pattern};
use paysim_harness::{parse, run_scenario, Runner, Transcript};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

type Criterion = (&'static str, fn() -> Outcome);
type SigCache = std::collections::HashMap<(Address, u64, Vec<u8>), Transaction>;

thread_local! {
    static SIGNED: std::cell::RefCell<SigCache> = Default::default();
}

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

// ---------------------------------------------------------------------------
// fixtures

#[derive(Clone)]
struct World {
    chain: ChainState,
    keys: BTreeMap<&'static str, KeyPair>,
}

impl World {
    fn new(names: &[&'static str]) -> World {
        let mut chain = ChainState::new();
        let keys =
            names.iter().map(|n| (*n, chain.create_account(hash_parts(&[b"acceptance", n.as_bytes()]).0))).collect();
        World { chain, keys }
    }

    fn key(&self, who: &str) -> &KeyPair {
        &self.keys[who]
    }

    fn addr(&self, who: &str) -> Address {
        self.keys[who].address()
    }

    /// Signs with the sender's current nonce. Signatures are memoized per
    /// (key, nonce, call) because the schedule searches resubmit the same
    /// transactions from many cloned states; verification still runs every time.
    fn exec(&mut self, who: &str, call: Call) -> Receipt {
        let key = &self.keys[who];
        let nonce = self.chain.nonce_of(&key.address());
        let tx = SIGNED.with(|cache| {
            let mut cache = cache.borrow_mut();
            cache
                .entry((key.address(), nonce, codec::encode(&call)))
                .or_insert_with(|| Transaction::sign(key, nonce, call))
                .clone()
        });
        self.chain.submit_tx(&tx)
    }

    fn ok(&mut self, who: &str, call: Call) -> Output {
        let method = call.method();
        let r = self.exec(who, call);
        match r.into_result() {
            Ok(o) => o,
            Err(e) => panic!("fixture step {method} by {who} failed: {e}"),
        }
    }

    fn deploy(&mut self, who: &str, call: Call) -> InstanceId {
        match self.ok(who, call) {
            Output::Instance(id) => id,
            other => panic!("expected an instance, got {other:?}"),
        }
    }

    fn spawn(&mut self, issuer: &str, fungibility: Fungibility, supply: u64) -> InstanceId {
        let spec = TokenClassSpec {
            name: "Test".into(),
            symbol: "TST".into(),
            decimals: 0,
            total_supply: supply,
            fungibility,
            mintable: true,
            burnable: true,
        };
        self.deploy(issuer, Call::SpawnTokenClass { spec })
    }

    fn give(&mut self, issuer: &str, class: InstanceId, to: &str, asset: Asset) {
        let to = self.addr(to);
        self.ok(issuer, Call::Mint { class, to, asset });
    }

    fn balance(&self, class: InstanceId, who: &str) -> u64 {
        self.chain.balance_of(class, &self.addr(who)).unwrap()
    }
}

fn corpus() -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let mut files: Vec<_> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "scn"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap()))
        .collect()
}

/// Independent conservation oracle over raw registry contents: minted units
/// come from the event log, the other buckets from registry maps.
fn conservation(chain: &ChainState, class: InstanceId) -> Result<(), String> {
    let minted: u64 = chain
        .class_history(class)
        .iter()
        .map(|(_, e)| match e {
            TokenEvent::Minted { asset, .. } => asset.units(),
            _ => 0,
        })
        .sum();
    let reg: &Registry = &chain.token_class(class).unwrap().registry;
    let held = match reg.fungibility() {
        Fungibility::Cash => reg.balances().values().sum::<u64>(),
        Fungibility::Voucher => {
            reg.vouchers().values().filter(|v| matches!(v.state, TokenState::Allocated | TokenState::Redeemed)).count()
                as u64
        }
    };
    let pending: u64 = reg.pending_transfers().values().map(|p| p.asset.units()).sum();
    let locked: u64 = reg.locks().values().map(|h| h.asset.units()).sum();
    let b = reg.burn_totals();
    let burned = b.burn_address + b.deleted + b.sink;
    ensure!(
        minted == held + pending + locked + burned,
        "minted {minted} != circulating {held} + pending {pending} + locked {locked} + burned {burned}"
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// 1. double-spend prevention after each burn method

fn criterion_1() -> Outcome {
    let methods = [
        ("burn address", BurnMethod::BurnAddress),
        ("registry delete", BurnMethod::RegistryDelete),
        ("self-destruct sink", BurnMethod::SelfDestructSink(None)),
    ];
    let mut attempts = 0;
    for (label, method) in methods {
        for fungibility in [Fungibility::Cash, Fungibility::Voucher] {
            let mut w = World::new(&["issuer", "holder", "other", "spender"]);
            let class = w.spawn("issuer", fungibility, 0);
            let (asset, probes) = match fungibility {
                Fungibility::Cash => (Asset::Amount(10), vec![Asset::Amount(10), Asset::Amount(1)]),
                Fungibility::Voucher => (Asset::tokens([1]), vec![Asset::tokens([1])]),
            };
            w.give("issuer", class, "holder", asset.clone());
            w.ok("holder", Call::Burn { class, asset: asset.clone(), method, archive: false });
            let ctx = format!("{label}/{fungibility:?}");
            let (holder, other, spender) = (w.addr("holder"), w.addr("other"), w.addr("spender"));
            let msig = w.deploy("other", Call::CreateMultisig { signers: vec![other], threshold: 1 });
            let mut rejected = |w: &mut World, who: &str, call: Call| -> Result<(), String> {
                let m = call.method();
                let r = w.exec(who, call);
                attempts += 1;
                ensure!(!r.is_success(), "{ctx}: post-burn {m} by {who} succeeded");
                Ok(())
            };
            for probe in probes {
                rejected(
                    &mut w,
                    "holder",
                    Call::RequestTransfer { class, to: other, asset: probe.clone(), category: None },
                )?;
                // Approving is allowed; spending through the approval is not.
                w.ok("holder", Call::Approve { class, spender, amount: 10 });
                rejected(
                    &mut w,
                    "spender",
                    Call::TransferFrom { class, owner: holder, to: other, asset: probe.clone(), category: None },
                )?;
                let h = w.chain.height();
                let escrow = w.deploy(
                    "holder",
                    Call::OpenEscrow {
                        buyer: holder,
                        seller: other,
                        class,
                        asset: probe.clone(),
                        condition: Condition::MultisigApproves(msig),
                        deadline: h + 5,
                    },
                );
                rejected(&mut w, "holder", Call::FundEscrow { escrow })?;
                let htlc = w.deploy(
                    "holder",
                    Call::HtlcOpen {
                        hash_lock: hash_lock(&sha256(b"p")),
                        timeout: h + 5,
                        legs: vec![LegSpec { from: holder, to: other, class, asset: probe.clone() }],
                    },
                );
                rejected(&mut w, "holder", Call::HtlcFund { htlc, leg: 0 })?;
                rejected(
                    &mut w,
                    "issuer",
                    Call::ForcedTransfer { class, from: holder, to: other, asset: probe.clone() },
                )?;
                rejected(
                    &mut w,
                    "issuer",
                    Call::ForcedTransfer { class, from: Address::BURN, to: other, asset: probe.clone() },
                )?;
                rejected(
                    &mut w,
                    "holder",
                    Call::Burn { class, asset: probe.clone(), method: BurnMethod::RegistryDelete, archive: false },
                )?;
                if fungibility == Fungibility::Cash {
                    rejected(
                        &mut w,
                        "holder",
                        Call::OpenChannel {
                            party_b: other,
                            class,
                            deposit_a: probe.units(),
                            deposit_b: 0,
                            challenge_window: 3,
                            consent_b: None,
                        },
                    )?;
                }
            }
            ensure!(w.balance(class, "holder") == 0, "{ctx}: holder still has a spendable balance");
            ensure!(w.balance(class, "other") == 0, "{ctx}: burned value reached another account");
            conservation(&w.chain, class).map_err(|e| format!("{ctx}: {e}"))?;
        }
    }
    Ok(format!("6 combinations, {attempts} post-burn spend attempts all rejected"))
}

// ---------------------------------------------------------------------------
// 2. conservation under randomized operation sequences

const SIM_ACTORS: [&str; 4] = ["issuer", "a", "b", "c"];

struct Sim {
    w: World,
    rng: ChaCha8Rng,
    cash: InstanceId,
    voucher: InstanceId,
    next_voucher: u64,
    msig: InstanceId,
    pending: Vec<(InstanceId, paysim_core::token::TransferId, &'static str, &'static str)>,
    escrows: Vec<InstanceId>,
    htlcs: Vec<(InstanceId, Hash32)>,
    channels: Vec<(InstanceId, &'static str, &'static str, ChannelSession)>,
    txs: usize,
}

impl Sim {
    fn new(seed: u64) -> Sim {
        let mut w = World::new(&SIM_ACTORS);
        let cash = w.spawn("issuer", Fungibility::Cash, 200);
        let voucher = w.spawn("issuer", Fungibility::Voucher, 3);
        let a = w.addr("a");
        let msig = w.deploy("a", Call::CreateMultisig { signers: vec![a], threshold: 1 });
        Sim {
            w,
            rng: ChaCha8Rng::seed_from_u64(seed),
            cash,
            voucher,
            next_voucher: 4,
            msig,
            pending: Vec::new(),
            escrows: Vec::new(),
            htlcs: Vec::new(),
            channels: Vec::new(),
            txs: 0,
        }
    }

    fn actor(&mut self) -> &'static str {
        SIM_ACTORS[self.rng.gen_range(0..SIM_ACTORS.len())]
    }

    fn class(&mut self) -> InstanceId {
        if self.rng.gen_bool(0.6) {
            self.cash
        } else {
            self.voucher
        }
    }

    fn asset(&mut self, class: InstanceId) -> Asset {
        if class == self.cash {
            Asset::Amount(self.rng.gen_range(1..=60))
        } else {
            Asset::tokens([self.rng.gen_range(1..self.next_voucher)])
        }
    }

    fn exec(&mut self, who: &str, call: Call) -> Result<Receipt, String> {
        let r = self.w.exec(who, call);
        self.txs += 1;
        conservation(&self.w.chain, self.cash)?;
        conservation(&self.w.chain, self.voucher)?;
        Ok(r)
    }

    fn step(&mut self) -> Result<(), String> {
        let h = self.w.chain.height();
        match self.rng.gen_range(0..10) {
            0 => {
                let class = self.class();
                let to = self.actor();
                let asset = if class == self.cash {
                    Asset::Amount(self.rng.gen_range(1..=50))
                } else {
                    self.next_voucher += 1;
                    Asset::tokens([self.next_voucher - 1])
                };
                let to = self.w.addr(to);
                self.exec("issuer", Call::Mint { class, to, asset })?;
            }
            1 => {
                let (class, from, to) = (self.class(), self.actor(), self.actor());
                let asset = self.asset(class);
                let to_addr = self.w.addr(to);
                let r = self.exec(from, Call::RequestTransfer { class, to: to_addr, asset, category: None })?;
                if let Output::Transfer(t) = r.output {
                    self.pending.push((class, t, from, to));
                }
            }
            2 if !self.pending.is_empty() => {
                let i = self.rng.gen_range(0..self.pending.len());
                let (class, transfer, from, to) = self.pending.swap_remove(i);
                let call = if self.rng.gen_bool(0.5) {
                    Call::ConfirmTransfer { class, transfer }
                } else {
                    Call::RejectTransfer { class, transfer }
                };
                let who = if self.rng.gen_bool(0.9) { to } else { from };
                self.exec(who, call)?;
            }
            3 => {
                let (class, who) = (self.class(), self.actor());
                let asset = self.asset(class);
                let method = match self.rng.gen_range(0..3) {
                    0 => BurnMethod::BurnAddress,
                    1 => BurnMethod::RegistryDelete,
                    _ => BurnMethod::SelfDestructSink(None),
                };
                let archive = self.rng.gen_bool(0.3);
                self.exec(who, Call::Burn { class, asset, method, archive })?;
            }
            4 => {
                if self.escrows.is_empty() || self.rng.gen_bool(0.4) {
                    let (class, buyer, seller) = (self.class(), self.actor(), self.actor());
                    let asset = self.asset(class);
                    let call = Call::OpenEscrow {
                        buyer: self.w.addr(buyer),
                        seller: self.w.addr(seller),
                        class,
                        asset,
                        condition: Condition::MultisigApproves(self.msig),
                        deadline: h + self.rng.gen_range(1..5),
                    };
                    if let Some(id) = self.exec(buyer, call)?.instance() {
                        self.escrows.push(id);
                        self.exec(buyer, Call::FundEscrow { escrow: id })?;
                    }
                } else {
                    let escrow = self.escrows[self.rng.gen_range(0..self.escrows.len())];
                    if self.rng.gen_bool(0.3) {
                        let payload = paysim_core::settlement::escrow_release_payload(escrow);
                        let signature = sign_multisig(self.w.key("a"), self.msig, &payload);
                        self.exec("a", Call::MultisigSign { multisig: self.msig, payload, signature })?;
                    }
                    let who = self.actor();
                    self.exec(who, Call::ClaimEscrow { escrow })?;
                }
            }
            5 => {
                if self.channels.is_empty() || self.rng.gen_bool(0.4) {
                    let (a, b) = (self.actor(), self.actor());
                    if a == b {
                        return Ok(());
                    }
                    let deposit_a = self.rng.gen_range(1..40);
                    let call = Call::OpenChannel {
                        party_b: self.w.addr(b),
                        class: self.cash,
                        deposit_a,
                        deposit_b: 0,
                        challenge_window: 2,
                        consent_b: None,
                    };
                    if let Some(id) = self.exec(a, call)?.instance() {
                        let s = ChannelSession::new(id, deposit_a, 0, self.w.key(a), self.w.key(b));
                        self.channels.push((id, a, b, s));
                    }
                } else {
                    let i = self.rng.gen_range(0..self.channels.len());
                    let (id, a, b, mut s) = self.channels[i].clone();
                    for _ in 0..self.rng.gen_range(0..4) {
                        let amt = self.rng.gen_range(0..10);
                        let dir = self.rng.gen_bool(0.5);
                        let _ = s.pay(dir, amt, self.w.key(a), self.w.key(b));
                    }
                    let update = s.latest.clone();
                    self.channels[i].3 = s;
                    match self.rng.gen_range(0..3) {
                        0 => {
                            self.exec(a, Call::CooperativeSettle { channel: id, update })?;
                        }
                        1 => {
                            self.exec(b, Call::DisputeSettle { channel: id, update })?;
                        }
                        _ => {
                            self.exec(a, Call::Finalize { channel: id })?;
                        }
                    }
                }
            }
            6 => {
                if self.htlcs.is_empty() || self.rng.gen_bool(0.4) {
                    let (a, b) = (self.actor(), self.actor());
                    let (ca, cb) = (self.class(), self.class());
                    let (xa, xb) = (self.asset(ca), self.asset(cb));
                    let preimage = sha256(&self.rng.gen::<[u8; 32]>());
                    let legs = vec![
                        LegSpec { from: self.w.addr(a), to: self.w.addr(b), class: ca, asset: xa },
                        LegSpec { from: self.w.addr(b), to: self.w.addr(a), class: cb, asset: xb },
                    ];
                    let timeout = h + self.rng.gen_range(1..5);
                    if let Some(id) =
                        self.exec(a, Call::HtlcOpen { hash_lock: hash_lock(&preimage), timeout, legs })?.instance()
                    {
                        self.htlcs.push((id, preimage));
                    }
                } else {
                    let (id, preimage) = self.htlcs[self.rng.gen_range(0..self.htlcs.len())];
                    let legs = self.w.chain.contracts().htlc(id).unwrap().legs.clone();
                    match self.rng.gen_range(0..4) {
                        k @ (0 | 1) => {
                            let leg = &legs[k];
                            let who = *SIM_ACTORS.iter().find(|n| self.w.addr(n) == leg.from).unwrap();
                            self.exec(who, Call::HtlcFund { htlc: id, leg: k as u8 })?;
                        }
                        2 => {
                            let who = self.actor();
                            self.exec(who, Call::HtlcClaim { htlc: id, preimage })?;
                        }
                        _ => {
                            let who = self.actor();
                            self.exec(who, Call::HtlcRefund { htlc: id })?;
                        }
                    }
                }
            }
            7 => {
                let who = self.actor();
                let token = Asset::tokens([self.rng.gen_range(1..self.next_voucher)]);
                self.exec(who, Call::Redeem { class: self.voucher, asset: token })?;
            }
            _ => {
                let k = self.rng.gen_range(1..4);
                self.w.chain.mine_blocks(k);
            }
        }
        Ok(())
    }
}

fn criterion_2() -> Outcome {
    let seeds: Vec<u64> = (0..1000).collect();
    let results = batch::map(&seeds, |&seed| -> Result<usize, String> {
        let mut sim = Sim::new(seed);
        let steps = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed).gen_range(1..=30);
        for i in 0..steps {
            sim.step().map_err(|e| format!("sequence {seed}, step {i}: {e}"))?;
        }
        Ok(sim.txs)
    });
    let mut txs = 0;
    for r in results {
        txs += r?;
    }
    Ok(format!("1000 sequences, {txs} transactions, conservation exact after every one"))
}

// ---------------------------------------------------------------------------
// 3. escrow schedules

#[derive(Clone, Copy, Debug)]
enum EscrowAction {
    Fund,
    ConditionMet,
    Mine,
    Claim,
}

#[derive(Clone, Copy, Debug, Default)]
struct EscrowModel {
    funded: bool,
    condition: bool,
    done: Option<EscrowState>,
}

const ESCROW_DEADLINE: u64 = 3;
const ESCROW_AMOUNT: u64 = 40;

fn escrow_world() -> (World, InstanceId, InstanceId) {
    let mut w = World::new(&["bank", "buyer", "seller", "oracle"]);
    let class = w.spawn("bank", Fungibility::Cash, 0);
    w.give("bank", class, "buyer", Asset::Amount(ESCROW_AMOUNT));
    let oracle = w.addr("oracle");
    let feed = w.deploy("oracle", Call::CreateOracle { mode: FeedMode::Push, trust: Trust::Centralized(oracle) });
    let (buyer, seller) = (w.addr("buyer"), w.addr("seller"));
    let escrow = w.deploy(
        "buyer",
        Call::OpenEscrow {
            buyer,
            seller,
            class,
            asset: Asset::Amount(ESCROW_AMOUNT),
            condition: Condition::OracleConfirms { feed, key: "shipment".into(), expected: "delivered".into() },
            deadline: ESCROW_DEADLINE,
        },
    );
    (w, class, escrow)
}

fn escrow_feed(w: &World, escrow: InstanceId) -> InstanceId {
    match &w.chain.contracts().escrow(escrow).unwrap().condition {
        Condition::OracleConfirms { feed, .. } => *feed,
        _ => unreachable!(),
    }
}

/// Walks the schedule tree depth first; every node is a schedule prefix.
fn escrow_walk(
    w: &World,
    class: InstanceId,
    escrow: InstanceId,
    model: EscrowModel,
    depth: usize,
    path: &mut Vec<EscrowAction>,
    nodes: &mut usize,
) -> Result<(), String> {
    use EscrowAction::*;
    if depth == 0 {
        return Ok(());
    }
    for action in [Fund, ConditionMet, Mine, Claim] {
        let mut w = w.clone();
        let mut m = model;
        path.push(action);
        *nodes += 1;
        let h = w.chain.height();
        let ok = match action {
            Fund => {
                let expected = !m.funded && m.done.is_none() && h <= ESCROW_DEADLINE;
                let ok = w.exec("buyer", Call::FundEscrow { escrow }).is_success();
                ensure!(ok == expected, "{path:?}: fund success {ok}, model says {expected}");
                m.funded |= ok;
                ok
            }
            ConditionMet => {
                let feed = escrow_feed(&w, escrow);
                let call = Call::OraclePush { feed, key: "shipment".into(), value: "delivered".into() };
                let ok = w.exec("oracle", call).is_success();
                m.condition |= ok;
                ok
            }
            Mine => {
                w.chain.mine_block();
                true
            }
            Claim => {
                let expected = match (m.funded, m.done) {
                    (true, None) if h > ESCROW_DEADLINE => Some(EscrowState::Refunded),
                    (true, None) if m.condition => Some(EscrowState::Released),
                    _ => None,
                };
                let ok = w.exec("seller", Call::ClaimEscrow { escrow }).is_success();
                ensure!(ok == expected.is_some(), "{path:?}: claim success {ok}, model says {expected:?}");
                if let Some(s) = expected {
                    m.done = Some(s);
                    let state = w.chain.contracts().escrow(escrow).unwrap().state;
                    ensure!(state == s, "{path:?}: escrow ended {state:?}, model {s:?}");
                    match s {
                        EscrowState::Released => {
                            ensure!(h <= ESCROW_DEADLINE, "{path:?}: released at {h}")
                        }
                        _ => ensure!(h > ESCROW_DEADLINE, "{path:?}: refunded at {h}"),
                    }
                }
                ok
            }
        };
        let _ = ok;
        let (b, s) = (w.balance(class, "buyer"), w.balance(class, "seller"));
        let locked = w.chain.supply(class).unwrap().locked;
        let expected = match m.done {
            Some(EscrowState::Released) => (0, ESCROW_AMOUNT, 0),
            Some(_) => (ESCROW_AMOUNT, 0, 0),
            None if m.funded => (0, 0, ESCROW_AMOUNT),
            None => (ESCROW_AMOUNT, 0, 0),
        };
        ensure!(
            (b, s, locked) == expected,
            "{path:?}: buyer/seller/locked {:?}, expected {expected:?}",
            (b, s, locked)
        );
        escrow_walk(&w, class, escrow, m, depth - 1, path, nodes)?;
        path.pop();
    }
    Ok(())
}

fn criterion_3() -> Outcome {
    let (w, class, escrow) = escrow_world();
    let mut nodes = 0;
    escrow_walk(&w, class, escrow, EscrowModel::default(), 8, &mut Vec::new(), &mut nodes)?;
    Ok(format!("{nodes} schedules of length 1..=8, every outcome pays exactly one party in full"))
}

// ---------------------------------------------------------------------------
// 4. HTLC schedules

#[derive(Clone, Copy, Debug)]
enum HtlcAction {
    FundA,
    FundB,
    Claim,
    Mine,
    Refund,
}

const HTLC_TIMEOUT: u64 = 1;
const HTLC_DEPTH: usize = 6;

#[derive(Clone, Copy, Debug, Default)]
struct HtlcModel {
    funded: [bool; 2],
    state: Option<HtlcState>,
}

fn htlc_walk(
    w: &World,
    ids: (InstanceId, InstanceId, InstanceId, Hash32),
    model: HtlcModel,
    depth: usize,
    path: &mut Vec<HtlcAction>,
    nodes: &mut usize,
) -> Result<(), String> {
    use HtlcAction::*;
    if depth == 0 {
        return Ok(());
    }
    let (gold, silver, htlc, preimage) = ids;
    for action in [FundA, FundB, Claim, Mine, Refund] {
        let mut w = w.clone();
        let mut m = model;
        path.push(action);
        *nodes += 1;
        let h = w.chain.height();
        let open = m.state.is_none();
        let (ok, expected) = match action {
            FundA | FundB => {
                let leg = matches!(action, FundB) as usize;
                let who = if leg == 0 { "alice" } else { "bob" };
                let expected = open && !m.funded[leg] && h <= HTLC_TIMEOUT;
                let ok = w.exec(who, Call::HtlcFund { htlc, leg: leg as u8 }).is_success();
                m.funded[leg] |= ok;
                (ok, expected)
            }
            Claim => {
                let expected = open && h <= HTLC_TIMEOUT && m.funded == [true, true];
                let ok = w.exec("bob", Call::HtlcClaim { htlc, preimage }).is_success();
                if ok {
                    m.state = Some(HtlcState::Swapped);
                }
                (ok, expected)
            }
            Mine => {
                w.chain.mine_block();
                (true, true)
            }
            Refund => {
                let expected = open && h > HTLC_TIMEOUT;
                let ok = w.exec("alice", Call::HtlcRefund { htlc }).is_success();
                if ok {
                    m.state = Some(HtlcState::Refunded);
                }
                (ok, expected)
            }
        };
        ensure!(ok == expected, "{path:?}: success {ok}, model says {expected}");
        let holdings =
            (w.balance(gold, "alice"), w.balance(gold, "bob"), w.balance(silver, "alice"), w.balance(silver, "bob"));
        let want = match m.state {
            Some(HtlcState::Swapped) => (0, 10, 7, 0),
            Some(_) => (10, 0, 0, 7),
            None => (if m.funded[0] { 0 } else { 10 }, 0, 0, if m.funded[1] { 0 } else { 7 }),
        };
        ensure!(holdings == want, "{path:?}: holdings {holdings:?}, expected {want:?} (mixed outcome)");
        htlc_walk(&w, ids, m, depth - 1, path, nodes)?;
        path.pop();
    }
    Ok(())
}

fn criterion_4() -> Outcome {
    let mut w = World::new(&["alice", "bob"]);
    let gold = w.spawn("alice", Fungibility::Cash, 10);
    let silver = w.spawn("bob", Fungibility::Cash, 7);
    let preimage = sha256(b"swap secret");
    let (a, b) = (w.addr("alice"), w.addr("bob"));
    let htlc = w.deploy(
        "alice",
        Call::HtlcOpen {
            hash_lock: hash_lock(&preimage),
            timeout: HTLC_TIMEOUT,
            legs: vec![
                LegSpec { from: a, to: b, class: gold, asset: Asset::Amount(10) },
                LegSpec { from: b, to: a, class: silver, asset: Asset::Amount(7) },
            ],
        },
    );
    let mut nodes = 0;
    htlc_walk(&w, (gold, silver, htlc, preimage), HtlcModel::default(), HTLC_DEPTH, &mut Vec::new(), &mut nodes)?;
    Ok(format!("{nodes} schedules of length 1..={HTLC_DEPTH}, only all-swapped or all-refunded outcomes"))
}

// ---------------------------------------------------------------------------
// 5. multi-hop chain

const PATH: [&str; 4] = ["alice", "bob", "carol", "dave"];

fn chain_world() -> (World, InstanceId, InstanceId, Vec<InstanceId>, Hash32) {
    let mut w = World::new(&PATH);
    let class = w.spawn("alice", Fungibility::Cash, 0);
    for p in &PATH[..3] {
        w.give("alice", class, p, Asset::Amount(10));
    }
    let secret = sha256(b"dave's invoice");
    let hops = PATH
        .windows(2)
        .map(|p| LegSpec { from: w.addr(p[0]), to: w.addr(p[1]), class, asset: Asset::Amount(10) })
        .collect();
    let (chain, ids) =
        match w.ok("alice", Call::ChainOpen { hash_lock: hash_lock(&secret), hops, base_timeout: 12, decrement: 3 }) {
            Output::Chain { chain, hops } => (chain, hops),
            o => panic!("{o:?}"),
        };
    for (i, hop) in ids.iter().enumerate() {
        w.ok(PATH[i], Call::HtlcFund { htlc: *hop, leg: 0 });
    }
    (w, class, chain, ids, secret)
}

fn hop_states(w: &World, hops: &[InstanceId]) -> Vec<HtlcState> {
    hops.iter().map(|h| w.chain.contracts().htlc(*h).unwrap().state).collect()
}

fn criterion_5() -> Outcome {
    let timeouts: Vec<u64> = {
        let (w, _, _, hops, _) = chain_world();
        hops.iter().map(|h| w.chain.contracts().htlc(*h).unwrap().timeout).collect()
    };
    ensure!(timeouts.windows(2).all(|t| t[0] > t[1]), "timeouts not strictly decreasing: {timeouts:?}");

    // honest propagation
    let (mut w, class, chain, hops, secret) = chain_world();
    w.ok("dave", Call::HtlcClaim { htlc: hops[2], preimage: secret });
    let keys: BTreeMap<Address, KeyPair> = w.keys.values().map(|k| (k.address(), k.clone())).collect();
    let receipts = chain_propagate(&mut w.chain, chain, &keys, &BTreeSet::new()).map_err(|e| e.to_string())?;
    ensure!(receipts.iter().all(Receipt::is_success), "honest propagation had a failed claim");
    ensure!(hop_states(&w, &hops) == vec![HtlcState::Swapped; 3], "honest: {:?}", hop_states(&w, &hops));
    let bal: Vec<u64> = PATH.iter().map(|p| w.balance(class, p)).collect();
    ensure!(bal == vec![0, 10, 10, 10], "honest balances {bal:?}");

    // withheld secret: nobody can claim, everyone refunds after their timeout
    let (mut w, class, _, hops, _) = chain_world();
    w.chain.mine_blocks(timeouts[0] + 1);
    for (i, hop) in hops.iter().enumerate() {
        w.ok(PATH[i], Call::HtlcRefund { htlc: *hop });
    }
    ensure!(hop_states(&w, &hops) == vec![HtlcState::Refunded; 3], "withheld: {:?}", hop_states(&w, &hops));
    let bal: Vec<u64> = PATH.iter().map(|p| w.balance(class, p)).collect();
    ensure!(bal == vec![10, 10, 10, 0], "withheld balances {bal:?}");

    // adversarial: dave claims and tells nobody, carol refuses to act; bob and
    // later carol still claim from the preimage published on chain
    let (mut w, class, chain, hops, secret) = chain_world();
    w.ok("dave", Call::HtlcClaim { htlc: hops[2], preimage: secret });
    let withholding: BTreeSet<Address> = [w.addr("carol")].into();
    let keys: BTreeMap<Address, KeyPair> = w.keys.values().map(|k| (k.address(), k.clone())).collect();
    chain_propagate(&mut w.chain, chain, &keys, &withholding).map_err(|e| e.to_string())?;
    let states = hop_states(&w, &hops);
    ensure!(states == vec![HtlcState::Swapped, HtlcState::Open, HtlcState::Swapped], "adversarial: {states:?}");
    let seen = find_preimage(&w.chain, &hash_lock(&secret)).ok_or("preimage not published")?;
    w.chain.mine_blocks(2);
    w.ok("carol", Call::HtlcClaim { htlc: hops[1], preimage: seen });
    ensure!(hop_states(&w, &hops) == vec![HtlcState::Swapped; 3], "late claim: {:?}", hop_states(&w, &hops));
    let bal: Vec<u64> = PATH.iter().map(|p| w.balance(class, p)).collect();
    ensure!(bal == vec![0, 10, 10, 10], "adversarial balances {bal:?}");
    Ok("honest settles all hops, withheld secret refunds all, public preimage defeats non-propagation".into())
}

// ---------------------------------------------------------------------------
// 6. channel settlement

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut tx_counts: BTreeMap<&str, BTreeSet<u64>> = BTreeMap::new();
    let trials = 24;
    for trial in 0..trials {
        let n: usize = if trial == 0 { 100 } else { rng.gen_range(1..=100) };
        let (dep_a, dep_b) = (rng.gen_range(1..200u64), rng.gen_range(0..200u64));
        // Reference split computed from the payment list alone.
        let mut payments = Vec::with_capacity(n);
        let (mut a, mut b) = (dep_a, dep_b);
        while payments.len() < n {
            let a_to_b = rng.gen_bool(0.5);
            let amt = rng.gen_range(0..=20);
            let (from, to) = if a_to_b { (&mut a, &mut b) } else { (&mut b, &mut a) };
            if *from >= amt {
                *from -= amt;
                *to += amt;
                payments.push((a_to_b, amt, a, b));
            }
        }
        for mode in ["cooperative", "dispute", "stale-then-challenge"] {
            let mut w = World::new(&["bank", "alice", "bob"]);
            let class = w.spawn("bank", Fungibility::Cash, 0);
            w.give("bank", class, "alice", Asset::Amount(dep_a));
            w.give("bank", class, "bob", Asset::Amount(dep_b.max(1)));
            let nonces = |w: &World| w.chain.nonce_of(&w.addr("alice")) + w.chain.nonce_of(&w.addr("bob"));
            let before = nonces(&w);
            let (ka, kb) = (w.key("alice").clone(), w.key("bob").clone());
            let window = 4;
            let nonce = w.chain.nonce_of(&ka.address());
            let consent = (dep_b > 0).then(|| {
                paysim_core::channels::sign_open_consent(&kb, &ka.address(), class, dep_a, dep_b, window, nonce)
            });
            let ch = w.deploy(
                "alice",
                Call::OpenChannel {
                    party_b: kb.address(),
                    class,
                    deposit_a: dep_a,
                    deposit_b: dep_b,
                    challenge_window: window,
                    consent_b: consent,
                },
            );
            let mut session = ChannelSession::new(ch, dep_a, dep_b, &ka, &kb);
            let mut updates = vec![session.latest.clone()];
            for (a_to_b, amt, ea, eb) in &payments {
                let u = session.pay(*a_to_b, *amt, &ka, &kb).map_err(|e| e.to_string())?;
                ensure!((u.balance_a, u.balance_b) == (*ea, *eb), "session diverged from the payment list");
                updates.push(u);
            }
            let last = updates.last().unwrap().clone();
            match mode {
                "cooperative" => {
                    w.ok("bob", Call::CooperativeSettle { channel: ch, update: last.clone() });
                }
                "dispute" => {
                    w.ok("bob", Call::DisputeSettle { channel: ch, update: last.clone() });
                    w.chain.mine_blocks(window + 1);
                    w.ok("alice", Call::Finalize { channel: ch });
                }
                _ => {
                    let stale = updates[rng.gen_range(0..updates.len() - 1)].clone();
                    w.ok("bob", Call::DisputeSettle { channel: ch, update: stale });
                    w.chain.mine_blocks(rng.gen_range(0..=window));
                    w.ok("alice", Call::Challenge { channel: ch, update: last.clone() });
                    w.chain.mine_blocks(window + 1);
                    w.ok("alice", Call::Finalize { channel: ch });
                }
            }
            let status = &w.chain.contracts().channel(ch).unwrap().status;
            let (a_ref, b_ref) = (payments.last().unwrap().2, payments.last().unwrap().3);
            match status {
                ChannelStatus::Closed { seq, payout_a, payout_b } => {
                    ensure!(
                        (*seq, *payout_a, *payout_b) == (n as u64, a_ref, b_ref),
                        "{mode} N={n}: closed at seq {seq} paying {payout_a}/{payout_b}, highest is {n} paying {a_ref}/{b_ref}"
                    );
                }
                s => return Err(format!("{mode} N={n}: not closed: {s:?}")),
            }
            tx_counts.entry(mode).or_default().insert(nonces(&w) - before);
        }
    }
    for (mode, counts) in &tx_counts {
        ensure!(counts.len() == 1, "{mode}: on-chain tx count varies with N: {counts:?}");
    }
    let summary: Vec<String> = tx_counts.iter().map(|(m, c)| format!("{m}={}", c.first().unwrap())).collect();
    Ok(format!("{trials} random update sequences (N up to 100), on-chain txs constant: {}", summary.join(", ")))
}

// ---------------------------------------------------------------------------
// 7. multisig exactness

fn criterion_7() -> Outcome {
    let names: [&'static str; 6] = ["s0", "s1", "s2", "s3", "s4", "outsider"];
    let mut checked = 0;
    for n in 1..=5usize {
        for m in 1..=n as u64 {
            for duplicates in [false, true] {
                let mut w = World::new(&names);
                let pool: Vec<Address> = names[..n].iter().map(|s| w.addr(s)).collect();
                let ms = w.deploy("s0", Call::CreateMultisig { signers: pool.clone(), threshold: m });
                let mut payloads = Vec::new();
                for mask in 0u32..(1 << n) {
                    let payload = sha256(format!("{n}/{m}/{duplicates}/{mask}").as_bytes());
                    let signers: Vec<&str> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| names[i]).collect();
                    for s in &signers {
                        let reps = if duplicates { 2 } else { 1 };
                        for _ in 0..reps {
                            let signature = sign_multisig(w.key(s), ms, &payload);
                            w.ok(s, Call::MultisigSign { multisig: ms, payload, signature });
                        }
                    }
                    let signature = sign_multisig(w.key("outsider"), ms, &payload);
                    let r = w.exec("outsider", Call::MultisigSign { multisig: ms, payload, signature });
                    ensure!(r.error() == Some(&ContractError::NotASigner), "outsider signature accepted");
                    let authorized = w.chain.multisig_authorized(ms, &payload).unwrap();
                    let expected = signers.len() as u64 >= m;
                    ensure!(
                        authorized == expected,
                        "n={n} m={m} dup={duplicates} signers={signers:?}: authorized={authorized}"
                    );
                    payloads.push(payload);
                    checked += 1;
                }
                w.ok("s0", Call::MultisigUpdatePool { multisig: ms, signers: pool, threshold: m });
                for p in &payloads {
                    ensure!(!w.chain.multisig_authorized(ms, p).unwrap(), "n={n} m={m}: approval survived pool update");
                }
            }
        }
    }
    Ok(format!("{checked} signer subsets over n<=5 with and without duplicates; pool update voids approvals"))
}

// ---------------------------------------------------------------------------
// 8. allowance safety

fn criterion_8() -> Outcome {
    let mut spends = 0;
    let mut over = 0;
    for seed in 0..60u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(800 + seed);
        let mut w = World::new(&["issuer", "owner", "spender", "shop"]);
        let class = w.spawn("issuer", Fungibility::Cash, 0);
        let balance = rng.gen_range(50..500);
        w.give("issuer", class, "owner", Asset::Amount(balance));
        let (owner, spender, shop) = (w.addr("owner"), w.addr("spender"), w.addr("shop"));
        let mut remaining: u64 = 0;
        let mut owner_balance = balance;
        for _ in 0..25 {
            if rng.gen_bool(0.2) {
                remaining = rng.gen_range(0..120);
                w.ok("owner", Call::Approve { class, spender, amount: remaining });
            } else {
                let amount = rng.gen_range(1..60);
                let r = w.exec(
                    "spender",
                    Call::TransferFrom { class, owner, to: shop, asset: Asset::Amount(amount), category: None },
                );
                let allowed = amount <= remaining && amount <= owner_balance;
                ensure!(
                    r.is_success() == allowed,
                    "seed {seed}: spend {amount} with {remaining} left: {:?}",
                    r.error()
                );
                spends += 1;
                if allowed {
                    remaining -= amount;
                    owner_balance -= amount;
                } else if amount > remaining {
                    over += 1;
                    ensure!(
                        matches!(r.error(), Some(ContractError::AllowanceExceeded { .. })),
                        "seed {seed}: over-allowance spend failed with {:?}",
                        r.error()
                    );
                }
            }
            let on_chain = w.chain.allowance(class, &owner, &spender).unwrap();
            ensure!(on_chain == remaining, "seed {seed}: allowance {on_chain}, oracle {remaining}");
        }
    }
    Ok(format!(
        "60 sequences, {spends} delegated spends match the subtraction oracle, {over} over-allowance spends rejected"
    ))
}

// ---------------------------------------------------------------------------
// 9. policy enforcement and credential soundness

fn criterion_9() -> Outcome {
    let mut w = World::new(&["issuer", "buyer", "seller1", "seller2", "seller3", "seller4"]);
    let class = w.spawn("issuer", Fungibility::Cash, 0);
    w.give("issuer", class, "buyer", Asset::Amount(1_000_000));
    let registry = w.deploy("issuer", Call::DeploySellerRegistry);
    let s1 = w.addr("seller1");
    w.ok("issuer", Call::RegisterSeller { registry, seller: s1 });
    let issue = |w: &mut World, to: &str, category: &str| -> Credential {
        let subject = w.addr(to);
        let attributes: BTreeMap<String, AttrValue> =
            [("category".to_string(), AttrValue::Str(category.into()))].into();
        let signature = sign_credential(w.key("issuer"), &subject, &attributes);
        match w.ok("issuer", Call::IssueCredential { subject, attributes, signature }) {
            Output::Credential(c) => c,
            o => panic!("{o:?}"),
        }
    };
    let cred1 = issue(&mut w, "seller1", "pharmacy");
    issue(&mut w, "seller3", "grocery");
    let cred4 = issue(&mut w, "seller4", "pharmacy");
    w.ok("issuer", Call::RevokeCredential { credential: cred4.id });

    let registered: BTreeSet<&str> = ["seller1"].into();
    let pharmacy: BTreeSet<&str> = ["seller1"].into();
    let (max, expiry) = (50u64, 4u64);
    let rules: Vec<(&str, Rule)> = vec![
        ("EligibleSellers", Rule::EligibleSellers(registry)),
        ("MaxTokensPerTx", Rule::MaxTokensPerTx(max as i64)),
        ("ExpiryHeight", Rule::ExpiryHeight(expiry)),
        (
            "RequireCredential",
            Rule::RequireCredential {
                key: "category".into(),
                value: AttrValue::Str("pharmacy".into()),
                party: Party::Recipient,
            },
        ),
    ];
    let oracle = |rule: &str, to: &str, amount: u64, height: u64| -> bool {
        match rule {
            "EligibleSellers" => registered.contains(to),
            "MaxTokensPerTx" => amount <= max,
            "ExpiryHeight" => height <= expiry,
            _ => pharmacy.contains(to),
        }
    };
    let sellers = ["seller1", "seller2", "seller3", "seller4"];
    let amounts = [1u64, 49, 50, 51, 400];
    let mut cases = 0;
    let mut policies = Vec::new();
    for (_, rule) in &rules {
        policies.push(w.deploy("issuer", Call::DeployPolicy { rules: vec![rule.clone()] }));
    }
    let all = w.deploy("issuer", Call::DeployPolicy { rules: rules.iter().map(|(_, r)| r.clone()).collect() });
    policies.push(all);
    let base = w.clone();
    let names: Vec<&str> = rules.iter().map(|(n, _)| *n).chain(["All"]).collect();
    for (&name, &policy) in names.iter().zip(&policies) {
        let mut w = base.clone();
        w.ok("issuer", Call::AttachPolicy { class, target: PolicyTarget::Class, policy, functions: vec![] });
        for height in 0..=expiry + 2 {
            while w.chain.height() < height {
                w.chain.mine_block();
            }
            for to in sellers {
                for amount in amounts {
                    let expected = if name == "All" {
                        rules.iter().all(|(r, _)| oracle(r, to, amount, height))
                    } else {
                        oracle(name, to, amount, height)
                    };
                    let to_addr = w.addr(to);
                    let buyer = w.addr("buyer");
                    let verdict = w
                        .chain
                        .validate_policy(class, None, &buyer, &to_addr, amount, None, height)
                        .map_err(|e| e.to_string())?;
                    ensure!(
                        verdict.is_pass() == expected,
                        "{name} to={to} amount={amount} h={height}: verdict {verdict:?}, oracle {expected}"
                    );
                    let r = w.exec(
                        "buyer",
                        Call::RequestTransfer { class, to: to_addr, asset: Asset::Amount(amount), category: None },
                    );
                    ensure!(
                        r.is_success() == expected,
                        "{name} to={to} amount={amount} h={height}: transfer {:?}, oracle {expected}",
                        r.error()
                    );
                    if !expected {
                        ensure!(
                            matches!(r.error(), Some(ContractError::PolicyViolation(_))),
                            "wrong error {:?}",
                            r.error()
                        );
                    }
                    cases += 1;
                }
            }
        }
    }

    // credential soundness
    ensure!(w.chain.verify_credential(&cred1) == Verdict::Pass, "genuine credential does not verify");
    let bytes = codec::encode(&cred1);
    let mut mutations = 0;
    for i in 0..bytes.len() {
        for flip in [0x01u8, 0x80, 0xff] {
            let mut b = bytes.clone();
            b[i] ^= flip;
            mutations += 1;
            if let Ok(c) = codec::decode::<Credential>(&b) {
                ensure!(!w.chain.verify_credential(&c).is_pass(), "mutation of byte {i} (^{flip:#x}) still verifies");
            }
        }
    }
    w.ok("issuer", Call::RevokeCredential { credential: cred1.id });
    ensure!(!w.chain.verify_credential(&cred1).is_pass(), "revoked credential still verifies");
    ensure!(!w.chain.verify_credential(&cred4).is_pass(), "credential revoked at issue still verifies");
    Ok(format!("{cases} policy cases match rule semantics; {mutations} single-byte credential mutations and revocation all fail"))
}

// ---------------------------------------------------------------------------
// 10. stealth addresses

fn criterion_10() -> Outcome {
    let mut w = World::new(&["payer", "shop"]);
    let class = w.spawn("payer", Fungibility::Cash, 100_000);
    let secret = sha256(b"payer-shop shared secret");
    let root = w.key("shop").public();
    let addrs: Vec<Address> = (0..100).map(|i| derive_stealth_address(&secret, &root, i)).collect();
    let distinct: BTreeSet<Address> = addrs.iter().copied().collect();
    ensure!(distinct.len() == 100, "only {} of 100 derived addresses are distinct", distinct.len());
    ensure!(!distinct.contains(&w.addr("shop")), "a derived address equals the root address");

    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut paid: BTreeMap<u64, u64> = BTreeMap::new();
    for _ in 0..30 {
        let i = rng.gen_range(0..100u64);
        let amount = rng.gen_range(1..100);
        let to = addrs[i as usize];
        w.ok("payer", Call::ForcedTransfer { class, from: w.addr("payer"), to, asset: Asset::Amount(amount) });
        *paid.entry(i).or_default() += amount;
    }
    // Payments to unrelated addresses must not show up.
    let decoy = derive_stealth_address(&sha256(b"other secret"), &root, 3);
    w.ok("payer", Call::ForcedTransfer { class, from: w.addr("payer"), to: decoy, asset: Asset::Amount(5) });
    let found: BTreeMap<u64, u64> =
        scan_for_payments(&w.chain, &root, &secret, class, 99).into_iter().map(|p| (p.index, p.received)).collect();
    ensure!(found == paid, "scan found {found:?}, paid {paid:?}");

    // The recipient can spend; the payer, lacking the root key, cannot.
    let (i, amount) = paid.iter().next().map(|(i, a)| (*i, *a)).unwrap();
    let key = derive_stealth_keypair(w.key("shop"), &secret, i);
    ensure!(key.address() == addrs[i as usize], "recipient key does not match the derived address");
    w.chain.register_key(&key);
    let shop = w.addr("shop");
    let mut forged = Transaction::sign(
        w.key("payer"),
        0,
        Call::RequestTransfer { class, to: w.addr("payer"), asset: Asset::Amount(amount), category: None },
    );
    forged.sender = addrs[i as usize];
    forged.public_key = derive_stealth_public(&secret, &root, i);
    let r = w.chain.submit_tx(&forged);
    ensure!(r.error() == Some(&ContractError::BadSignature), "payer-signed tx from stealth address: {:?}", r.error());
    let r =
        w.chain.execute(&key, Call::RequestTransfer { class, to: shop, asset: Asset::Amount(amount), category: None });
    ensure!(r.is_success(), "recipient could not spend from the stealth address: {:?}", r.error());
    Ok("100 distinct one-time addresses, scan exact, payer-signed spend rejected with BadSignature".into())
}

// ---------------------------------------------------------------------------
// 11. determinism of the corpus

fn criterion_11() -> Outcome {
    let files = corpus();
    ensure!(!files.is_empty(), "no scenarios found");
    let runs = batch::map(&files, |(name, text)| {
        let script = parse(text).map_err(|e| format!("{name}: {e}"))?;
        let first = run_scenario(&script, text, None);
        let second = run_scenario(&script, text, None);
        Ok::<_, String>((name.clone(), first, second))
    });
    for r in runs {
        let (name, a, b) = r?;
        ensure!(a.result().is_ok(), "{name}: {:?}", a.failure);
        ensure!(a.to_json() == b.to_json(), "{name}: transcripts differ between runs");
        ensure!(a.final_digest == b.final_digest, "{name}: digests differ");
        ensure!(a.final_digest.len() == 64, "{name}: digest is not 64 hex chars");
    }
    Ok(format!("{} scenarios, byte-identical transcripts and digests across two runs", files.len()))
}

// ---------------------------------------------------------------------------
// 12. lifecycle conformance and pattern coverage

fn stage_sequence(t: &Transcript, token: TokenId) -> Vec<&'static str> {
    let mut stages = Vec::new();
    for step in &t.steps {
        for e in &step.events {
            if let paysim_core::EventKind::Token { event, .. } = &e.kind {
                if !event.involves_token(token) {
                    continue;
                }
                match event {
                    TokenEvent::Minted { .. } => stages.extend(["issued", "allocated"]),
                    TokenEvent::TransferSettled { .. }
                    | TokenEvent::ForcedTransfer { .. }
                    | TokenEvent::DelegatedTransfer { .. } => stages.push("transferred"),
                    TokenEvent::Redeemed { .. } => stages.push("redeemed"),
                    TokenEvent::Burned { .. } => stages.push("burned"),
                    TokenEvent::Locked { .. } => stages.push("locked"),
                    TokenEvent::Released { .. } => stages.push("allocated"),
                    _ => {}
                }
            }
        }
    }
    stages
}

fn criterion_12() -> Outcome {
    let files = corpus();
    let (_, text) = files.iter().find(|(n, _)| n == "lifecycle.scn").ok_or("lifecycle.scn missing")?;
    let script = parse(text).map_err(|e| e.to_string())?;
    let t = run_scenario(&script, text, None);
    ensure!(t.result().is_ok(), "lifecycle scenario failed: {:?}", t.failure);
    let stages = stage_sequence(&t, TokenId(1));
    let want = ["issued", "allocated", "transferred", "redeemed", "burned"];
    ensure!(stages == want, "lifecycle {stages:?}, expected {want:?}");
    let mut runner = Runner::new(&script, script.seed);
    for (i, s) in script.steps.iter().enumerate() {
        runner.step(i, s).map_err(|e| e.to_string())?;
    }
    let class = runner
        .chain()
        .contracts()
        .instances()
        .find_map(|(id, inst)| matches!(inst, paysim_core::ledger::Instance::TokenClass(_)).then_some(*id))
        .ok_or("no token class")?;
    let state = runner.chain().token_state(class, TokenId(1)).map_err(|e| e.to_string())?;
    ensure!(matches!(state, TokenState::Burned(_)), "terminal state {state:?}");
    ensure!(runner.chain().supply(class).unwrap().is_conserved(), "lifecycle class not conserved");

    let mut covered = BTreeSet::new();
    for (name, text) in &files {
        let script = parse(text).map_err(|e| format!("{name}: {e}"))?;
        let t = run_scenario(&script, text, None);
        for s in t.steps.iter().filter(|s| s.status == "ok" || s.status == "offchain") {
            if let Some(v) = verbs::lookup(&s.verb) {
                covered.insert(v.pattern);
            }
        }
    }
    let missing: Vec<Pattern> = Pattern::ALL.iter().copied().filter(|p| !covered.contains(p)).collect();
    ensure!(missing.is_empty(), "patterns without a successful corpus step: {missing:?}");
    Ok("voucher passes issued, allocated, transferred, redeemed, burned; all 12 patterns covered".into())
}

// ---------------------------------------------------------------------------

fn main() {
    let criteria: [Criterion; 12] = [
        ("double-spend prevention after burn", criterion_1),
        ("conservation under random sequences", criterion_2),
        ("escrow atomicity and timeout", criterion_3),
        ("HTLC atomicity", criterion_4),
        ("multi-hop chain reaction", criterion_5),
        ("channel settlement", criterion_6),
        ("multisig exactness", criterion_7),
        ("allowance safety", criterion_8),
        ("policy enforcement and credential soundness", criterion_9),
        ("stealth address properties", criterion_10),
        ("determinism", criterion_11),
        ("lifecycle conformance and coverage", criterion_12),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !filter.is_empty() && !filter.iter().any(|a| a == &n.to_string()) {
            continue;
        }
        let start = Instant::now();
        let result = std::panic::catch_unwind(f).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {n:>2}: PASS  {name} ({detail}) [{secs:.1}s]"),
            Err(why) => {
                failed += 1;
                println!("criterion {n:>2}: FAIL  {name}: {why} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
