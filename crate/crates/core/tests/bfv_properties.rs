use std::sync::OnceLock;

use helb::bfv::{BfvContext, BfvParams, KeyPair, Plaintext};
use helb::RandomSource;
use proptest::prelude::*;
use rand::Rng;

const N: usize = 256;

fn setup() -> &'static (BfvContext, KeyPair) {
    static CTX: OnceLock<(BfvContext, KeyPair)> = OnceLock::new();
    CTX.get_or_init(|| {
        let ctx = BfvContext::new(BfvParams::for_ring_dim(N)).unwrap();
        let keys = ctx.keygen(&mut RandomSource::seeded(1200));
        (ctx, keys)
    })
}

fn coeffs(t: u64) -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(0..t, N)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn coefficientwise_difference_and_sum(seed: u64, a in coeffs(helb::bfv::DEFAULT_PLAINTEXT_MOD), b in coeffs(helb::bfv::DEFAULT_PLAINTEXT_MOD)) {
        let (ctx, keys) = setup();
        let t = ctx.plaintext_mod();
        let mut rng = RandomSource::seeded(seed);
        let ca = ctx.encrypt(&keys.public, &ctx.encode(&a).unwrap(), &mut rng).unwrap();
        let cb = ctx.encrypt(&keys.public, &ctx.encode(&b).unwrap(), &mut rng).unwrap();
        let diff = ctx.decrypt(&keys.secret, &ctx.eval_sub(&ca, &cb).unwrap()).unwrap();
        let sum = ctx.decrypt(&keys.secret, &ctx.eval_add(&ca, &cb).unwrap()).unwrap();
        let swapped = ctx.decrypt(&keys.secret, &ctx.eval_add(&cb, &ca).unwrap()).unwrap();
        for i in 0..N {
            prop_assert_eq!(diff.coeffs[i], (a[i] + t - b[i]) % t);
            prop_assert_eq!(sum.coeffs[i], (a[i] + b[i]) % t);
        }
        prop_assert_eq!(sum, swapped);
    }

    #[test]
    fn symmetric_encryption_round_trips(seed: u64, a in coeffs(helb::bfv::DEFAULT_PLAINTEXT_MOD)) {
        let (ctx, keys) = setup();
        let mut rng = RandomSource::seeded(seed);
        let ct = ctx.encrypt_symmetric(&keys.secret, &ctx.encode(&a).unwrap(), &mut rng).unwrap();
        prop_assert_eq!(ctx.decrypt(&keys.secret, &ct).unwrap().coeffs, a);
    }
}

/// A thousand chained additions at the default ring size stay decryptable.
#[test]
fn thousand_chained_additions_at_desk_size() {
    let ctx = BfvContext::new(BfvParams::desk()).unwrap();
    let mut rng = RandomSource::seeded(1201);
    let keys = ctx.keygen(&mut rng);
    assert!(ctx.max_additions() >= 1000);
    let t = ctx.plaintext_mod();
    let one = ctx.encrypt(&keys.public, &ctx.encode(&[1, t - 1, 7]).unwrap(), &mut rng).unwrap();
    let mut acc = ctx.encrypt(&keys.public, &ctx.encode(&[0]).unwrap(), &mut rng).unwrap();
    for _ in 0..1000 {
        acc = ctx.eval_add(&acc, &one).unwrap();
    }
    let pt = ctx.decrypt(&keys.secret, &acc).unwrap();
    assert_eq!(&pt.coeffs[..4], &[1000, t - 1000, 7000, 0]);
    let expected = Plaintext { coeffs: pt.coeffs.clone() };
    assert!(ctx.noise(&keys.secret, &acc, &expected).unwrap() <= ctx.noise_bound(&acc));
}

#[test]
fn wraparound_examples() {
    let (ctx, keys) = setup();
    let t = ctx.plaintext_mod();
    let mut rng = RandomSource::seeded(1202);
    let mut enc = |v: u64| ctx.encrypt(&keys.public, &ctx.encode(&[v]).unwrap(), &mut rng).unwrap();
    let (three, seven) = (enc(3), enc(7));
    let d = ctx.eval_sub(&three, &seven).unwrap();
    assert_eq!(ctx.decrypt_coeff(&keys.secret, &d, 0).unwrap(), t - 4);
    let x = RandomSource::seeded(1203).gen_range(1..N);
    assert_eq!(ctx.decrypt_coeff(&keys.secret, &d, x).unwrap(), 0);
}
