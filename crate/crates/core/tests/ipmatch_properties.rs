mod common;

use helb::bfv::{BfvContext, BfvParams};
use helb::ipmatch::{
    build_store, indexed, match_ip, match_subtract, match_xor, plaintext_oracle, CidrEntry, Ipv4,
    MatchOptions, Protocol, StoredCiphertext,
};
use helb::keys::{AnyKeyPair, AnyPublicKey};
use helb::phe::SchemeId;
use helb::RandomSource;
use num_traits::ToPrimitive;
use proptest::prelude::*;

use common::{random_cidrs, random_target, test_keys};

fn phe_pair(scheme: SchemeId, seed: u64) -> (AnyKeyPair, AnyPublicKey) {
    let kp = AnyKeyPair::Phe(test_keys(scheme, 128, seed));
    let pk = kp.public();
    (kp, pk)
}

#[test]
fn every_group_holds_masked_networks() {
    let mut rng = RandomSource::seeded(1300);
    let cidrs = random_cidrs(60, &mut rng);
    for scheme in [SchemeId::Paillier, SchemeId::OkamotoUchiyama, SchemeId::GoldwasserMicali] {
        let (kp, pk) = phe_pair(scheme, 1301);
        let AnyKeyPair::Phe(keys) = &kp else { unreachable!() };
        let (store, _) = build_store(&indexed(&cidrs), &pk, false, &mut rng).unwrap();
        for (&prefix, entries) in &store.groups {
            let host_bits = if prefix == 0 { u32::MAX } else { (1u32 << (32 - prefix)).wrapping_sub(1) };
            for e in entries {
                let StoredCiphertext::Phe(ct) = &e.ciphertext else { panic!("PHE store") };
                let v = keys.decrypt(ct).unwrap().to_u32().unwrap();
                assert_eq!(v & host_bits, 0, "/{prefix} entry {v:#x}");
            }
        }
    }
}

#[test]
fn zero_and_full_prefixes() {
    let mut rng = RandomSource::seeded(1302);
    let (kp, pk) = phe_pair(SchemeId::Paillier, 1303);
    let everything = vec!["0.0.0.0/0".parse::<CidrEntry>().unwrap()];
    let (store, _) = build_store(&indexed(&everything), &pk, false, &mut rng).unwrap();
    for _ in 0..20 {
        let ip = Ipv4(rand::Rng::gen(&mut rng));
        assert!(match_ip(ip, &store, &kp, Protocol::Subtract, &MatchOptions::default(), &mut rng).unwrap().matched);
    }
    let host = vec!["198.51.100.7/32".parse::<CidrEntry>().unwrap()];
    let (store, _) = build_store(&indexed(&host), &pk, false, &mut rng).unwrap();
    let opts = MatchOptions::default();
    assert!(match_ip("198.51.100.7".parse().unwrap(), &store, &kp, Protocol::Subtract, &opts, &mut rng).unwrap().matched);
    for other in ["198.51.100.6", "198.51.100.8", "199.51.100.7"] {
        assert!(!match_ip(other.parse().unwrap(), &store, &kp, Protocol::Subtract, &opts, &mut rng).unwrap().matched);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn xor_agrees_with_subtraction(seed: u64, count in 1usize..24) {
        let mut rng = RandomSource::seeded(seed);
        let cidrs = random_cidrs(count, &mut rng);
        let (pkp, ppk) = phe_pair(SchemeId::Paillier, 1304);
        let (gkp, gpk) = phe_pair(SchemeId::GoldwasserMicali, 1305);
        let (ps, _) = build_store(&indexed(&cidrs), &ppk, false, &mut rng).unwrap();
        let (gs, _) = build_store(&indexed(&cidrs), &gpk, false, &mut rng).unwrap();
        let opts = MatchOptions::default();
        for _ in 0..8 {
            let ip = random_target(&cidrs, &mut rng);
            let sub = match_subtract(ip, &ps, &pkp, &opts, &mut rng).unwrap();
            let xor = match_xor(ip, &gs, &gkp, &opts, &mut rng).unwrap();
            prop_assert_eq!(sub.matched, plaintext_oracle(ip, &cidrs));
            prop_assert_eq!((sub.matched, sub.entry_id), (xor.matched, xor.entry_id));
        }
    }

    #[test]
    fn exhaustive_and_threads_do_not_change_verdicts(seed: u64, count in 1usize..40, threads in 1usize..5) {
        let mut rng = RandomSource::seeded(seed);
        let cidrs = random_cidrs(count, &mut rng);
        let ctx = BfvContext::new(BfvParams::for_ring_dim(64)).unwrap();
        let keys = ctx.keygen(&mut rng);
        let kp = AnyKeyPair::Bfv { context: ctx, keys };
        let (store, _) = build_store(&indexed(&cidrs), &kp.public(), false, &mut rng).unwrap();
        let ip = random_target(&cidrs, &mut rng);
        let base = match_ip(ip, &store, &kp, Protocol::Subtract, &MatchOptions::default(), &mut rng).unwrap();
        let opts = MatchOptions { exhaustive: true, threads, ..MatchOptions::default() };
        let full = match_ip(ip, &store, &kp, Protocol::Subtract, &opts, &mut rng).unwrap();
        prop_assert_eq!(base.matched, plaintext_oracle(ip, &cidrs));
        prop_assert_eq!((base.matched, base.entry_id), (full.matched, full.entry_id));
        prop_assert_eq!(full.stats.zero_tests, store.entry_count());
    }
}
