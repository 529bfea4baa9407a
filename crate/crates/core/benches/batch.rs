use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use paysim_core::batch;
use paysim_core::crypto::{sha256, KeyPair};
use paysim_core::privacy::derive_stealth_address;

fn stealth_derivation(c: &mut Criterion) {
    let root = KeyPair::from_seed([3; 32]).public();
    let secret = sha256(b"bench");
    let mut group = c.benchmark_group("stealth_derive");
    for n in [64u64, 512] {
        let indices: Vec<u64> = (0..n).collect();
        group.bench_with_input(BenchmarkId::new("sequential", n), &indices, |b, xs| {
            b.iter(|| batch::seq_map(xs, |&i| derive_stealth_address(&secret, &root, i)))
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", n), &indices, |b, xs| {
            b.iter(|| batch::par_map(xs, |&i| derive_stealth_address(&secret, &root, i)))
        });
    }
    group.finish();
}

fn signature_checks(c: &mut Criterion) {
    let keys: Vec<KeyPair> = (0..256u32)
        .map(|i| {
            let mut seed = [0u8; 32];
            seed[..4].copy_from_slice(&i.to_be_bytes());
            KeyPair::from_seed(seed)
        })
        .collect();
    let signed: Vec<_> = keys.iter().map(|k| (k.public(), k.sign(b"payload"))).collect();
    let mut group = c.benchmark_group("verify");
    group.bench_function("sequential", |b| b.iter(|| batch::seq_map(&signed, |(pk, sig)| pk.verify(b"payload", sig))));
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| b.iter(|| batch::par_map(&signed, |(pk, sig)| pk.verify(b"payload", sig))));
    group.finish();
}

criterion_group!(benches, stealth_derivation, signature_checks);
criterion_main!(benches);
