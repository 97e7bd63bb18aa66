#![allow(dead_code)]

use helb::ipmatch::{CidrEntry, Ipv4};
use helb::phe::{self, KeyPair, KeygenOptions, SchemeId};
use helb::{BigUint, RandomSource};
use num_bigint::RandBigInt;
use rand::Rng;

/// Block size small enough for Benaloh's brute-force decryption.
pub const TOY_BENALOH_R: u32 = 1021;

/// Test-mode keys; Benaloh gets the toy block so `decrypt` works.
pub fn test_keys(scheme: SchemeId, bits: u64, seed: u64) -> KeyPair {
    let mut opts = KeygenOptions::test(bits);
    if scheme == SchemeId::Benaloh {
        opts.benaloh_block = Some(BigUint::from(TOY_BENALOH_R));
    }
    phe::keygen(scheme, &opts, &mut RandomSource::seeded(seed)).expect("test keygen")
}

/// Modulus that homomorphic results are reduced by (GM: none, XOR only).
pub fn modulus(kp: &KeyPair) -> Option<BigUint> {
    kp.message_modulus()
}

pub fn random_message(kp: &KeyPair, rng: &mut RandomSource) -> BigUint {
    rng.gen_biguint_below(&kp.public.message_bound())
}

/// An address inside `e`, or a uniformly random one.
pub fn random_target(entries: &[CidrEntry], rng: &mut RandomSource) -> Ipv4 {
    if !entries.is_empty() && rng.gen_bool(0.5) {
        let e = entries[rng.gen_range(0..entries.len())];
        Ipv4(e.network.0 | (rng.gen::<u32>() & !e.mask()))
    } else {
        Ipv4(rng.gen())
    }
}

/// Random CIDR list; prefixes cluster around a few lengths so groups repeat.
pub fn random_cidrs(count: usize, rng: &mut RandomSource) -> Vec<CidrEntry> {
    (0..count)
        .map(|_| {
            let prefix = [0, 8, 16, 20, 24, 24, 28, 32][rng.gen_range(0..8)];
            let prefix = if prefix == 0 && rng.gen_bool(0.9) { 24 } else { prefix };
            CidrEntry::new(Ipv4(rng.gen()), prefix).expect("valid prefix").0
        })
        .collect()
}
