#![allow(dead_code)]

use paysim_core::crypto::hash_parts;
use paysim_core::token::{Asset, Fungibility, TokenClassSpec};
use paysim_core::{Address, Call, ChainState, InstanceId, KeyPair, Output, Receipt};

pub struct World {
    pub chain: ChainState,
    pub keys: Vec<KeyPair>,
}

impl World {
    pub fn new(n: usize) -> World {
        let mut chain = ChainState::new();
        let keys = (0..n).map(|i| chain.create_account(hash_parts(&[b"test-actor", &[i as u8]]).0)).collect();
        World { chain, keys }
    }

    pub fn addr(&self, i: usize) -> Address {
        self.keys[i].address()
    }

    pub fn exec(&mut self, i: usize, call: Call) -> Receipt {
        let key = self.keys[i].clone();
        self.chain.execute(&key, call)
    }

    pub fn ok(&mut self, i: usize, call: Call) -> Output {
        let m = call.method();
        self.exec(i, call).into_result().unwrap_or_else(|e| panic!("{m}: {e}"))
    }

    pub fn spawn(&mut self, issuer: usize, fungibility: Fungibility, supply: u64) -> InstanceId {
        let spec = TokenClassSpec {
            name: "T".into(),
            symbol: "T".into(),
            decimals: 0,
            total_supply: supply,
            fungibility,
            mintable: true,
            burnable: true,
        };
        match self.ok(issuer, Call::SpawnTokenClass { spec }) {
            Output::Instance(id) => id,
            o => panic!("{o:?}"),
        }
    }

    pub fn mint(&mut self, class: InstanceId, to: usize, asset: Asset) {
        let to = self.addr(to);
        self.ok(0, Call::Mint { class, to, asset });
    }
}
