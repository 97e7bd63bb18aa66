//! Benaloh with block size `r`: `c = y^m u^r mod n`, decryption by a scan for
//! the discrete log of `c^(phi/r)` to base `x = y^(phi/r)`.

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::PheError;
use crate::numtheory::{
    brute_force_dlog, gcd, gen_prime, is_probable_prime, mod_inv, next_prime, random_unit,
    RandomSource, MR_ROUNDS,
};

/// Full decryption scans up to `r` powers, so it is only offered for small
/// block sizes. Larger blocks support the zero-test only.
pub const MAX_DECRYPT_BLOCK: u64 = 1 << 20;

const P_SEARCH_BUDGET: usize = 200_000;

/// Default block size: the smallest prime above 2^33, so differences of two
/// 32-bit values can never wrap to zero.
pub fn default_block_size() -> BigUint {
    next_prime(&(BigUint::one() << 33u32))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicKey {
    pub y: BigUint,
    pub r: BigUint,
    pub n: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrivateKey {
    pub p: BigUint,
    pub q: BigUint,
    pub x: BigUint,
    phi_over_r: BigUint,
}

impl PublicKey {
    pub fn encrypt(&self, m: &BigUint, rng: &mut RandomSource) -> Result<BigUint, PheError> {
        if m >= &self.r {
            return Err(PheError::MessageOutOfRange);
        }
        let u = random_unit(&self.n, rng);
        Ok(self.y.modpow(m, &self.n) * u.modpow(&self.r, &self.n) % &self.n)
    }

    pub fn add(&self, a: &BigUint, b: &BigUint) -> BigUint {
        a * b % &self.n
    }

    pub fn sub(&self, a: &BigUint, b: &BigUint) -> Result<BigUint, PheError> {
        let inv = mod_inv(b, &self.n).map_err(|_| PheError::NotInvertible)?;
        Ok(a * inv % &self.n)
    }

    pub fn scalar_mul(&self, c: &BigUint, k: &BigUint) -> BigUint {
        c.modpow(k, &self.n)
    }
}

impl PrivateKey {
    pub fn new(p: BigUint, q: BigUint, x: BigUint, r: &BigUint) -> Result<Self, PheError> {
        let phi = (&p - 1u32) * (&q - 1u32);
        let (phi_over_r, rem) = phi.div_rem(r);
        if !rem.is_zero() {
            return Err(PheError::InvalidOptions("r does not divide phi(n)".into()));
        }
        Ok(Self { p, q, x, phi_over_r })
    }

    fn project(&self, pk: &PublicKey, c: &BigUint) -> BigUint {
        c.modpow(&self.phi_over_r, &pk.n)
    }

    pub fn decrypt(&self, pk: &PublicKey, c: &BigUint) -> Result<BigUint, PheError> {
        let bound = pk
            .r
            .to_u64()
            .filter(|&r| r <= MAX_DECRYPT_BLOCK)
            .ok_or_else(|| {
                PheError::DecryptionFailure(format!(
                    "block size {} is too large for brute-force decryption (limit {MAX_DECRYPT_BLOCK}); only the zero-test is available",
                    pk.r
                ))
            })?;
        let a = self.project(pk, c);
        brute_force_dlog(&self.x, &a, &pk.n, bound)
            .map(BigUint::from)
            .map_err(|_| PheError::DecryptionFailure("discrete log not found below r".into()))
    }

    /// `c` encrypts 0 iff `c^(phi/r) = 1 mod n`; no discrete log needed.
    pub fn is_zero(&self, pk: &PublicKey, c: &BigUint) -> bool {
        self.project(pk, c).is_one()
    }
}

fn check_block_size(r: &BigUint) -> Result<(), PheError> {
    if r < &BigUint::from(3u32) || !is_probable_prime(r, MR_ROUNDS) {
        return Err(PheError::InvalidOptions(format!("block size {r} must be an odd prime")));
    }
    Ok(())
}

/// Builds keys from primes satisfying `r | p-1`, `gcd(r, (p-1)/r) = 1` and
/// `gcd(r, q-1) = 1`, choosing `y` with `y^(phi/r) != 1 mod n`.
pub fn from_primes(
    p: &BigUint,
    q: &BigUint,
    r: &BigUint,
    rng: &mut RandomSource,
) -> Result<(PublicKey, PrivateKey), PheError> {
    check_block_size(r)?;
    let p1 = p - 1u32;
    let (cofactor, rem) = p1.div_rem(r);
    if !rem.is_zero() || !gcd(r, &cofactor).is_one() || !gcd(r, &(q - 1u32)).is_one() || p == q {
        return Err(PheError::InvalidOptions(
            "primes violate the block-size divisibility constraints".into(),
        ));
    }
    let n = p * q;
    let phi_over_r = &cofactor * (q - 1u32);
    let (y, x) = loop {
        let y = random_unit(&n, rng);
        let x = y.modpow(&phi_over_r, &n);
        if !x.is_one() {
            break (y, x);
        }
    };
    let pk = PublicKey { y, r: r.clone(), n };
    let sk = PrivateKey::new(p.clone(), q.clone(), x, r)?;
    Ok((pk, sk))
}

pub fn keygen(
    bits: u64,
    block_size: Option<&BigUint>,
    rng: &mut RandomSource,
) -> Result<(PublicKey, PrivateKey), PheError> {
    let r = block_size.cloned().unwrap_or_else(default_block_size);
    check_block_size(&r)?;
    let half = (bits / 2).max(8);
    if half <= r.bits() + 1 {
        return Err(PheError::InvalidOptions(format!(
            "{half}-bit primes cannot hold a {}-bit block size",
            r.bits()
        )));
    }

    // p = r * k + 1 with r not dividing k
    let k_bits = half - r.bits();
    let p = (0..P_SEARCH_BUDGET)
        .find_map(|_| {
            let k = rng.gen_biguint(k_bits) | (BigUint::one() << (k_bits - 1));
            let k = if k.is_odd() { k + 1u32 } else { k };
            if (&k % &r).is_zero() {
                return None;
            }
            let p = &r * &k + 1u32;
            is_probable_prime(&p, MR_ROUNDS).then_some(p)
        })
        .ok_or_else(|| {
            PheError::InvalidOptions("no prime p = rk + 1 found within the retry budget".into())
        })?;

    loop {
        let q = gen_prime(bits.saturating_sub(half).max(8), rng)?;
        if let Ok(keys) = from_primes(&p, &q, &r, rng) {
            return Ok(keys);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn key_invariants() {
        let mut rng = RandomSource::seeded(17);
        let (pk, sk) = keygen(128, Some(&big(1021)), &mut rng).unwrap();
        let p1 = &sk.p - 1u32;
        assert!((&p1 % &pk.r).is_zero());
        assert!(gcd(&pk.r, &(&p1 / &pk.r)).is_one());
        assert!(gcd(&pk.r, &(&sk.q - 1u32)).is_one());
        let phi = (&sk.p - 1u32) * (&sk.q - 1u32);
        assert_eq!(sk.x, pk.y.modpow(&(phi / &pk.r), &pk.n));
        assert!(!sk.x.is_one());
    }

    #[test]
    fn toy_round_trip_and_addition() {
        let mut rng = RandomSource::seeded(5);
        let r = big(1021);
        let (pk, sk) = keygen(96, Some(&r), &mut rng).unwrap();
        for m in [0u64, 1, 500, 1020] {
            let c = pk.encrypt(&big(m), &mut rng).unwrap();
            assert_eq!(sk.decrypt(&pk, &c).unwrap(), big(m));
        }
        let c1 = pk.encrypt(&big(1000), &mut rng).unwrap();
        let c2 = pk.encrypt(&big(30), &mut rng).unwrap();
        assert_eq!(sk.decrypt(&pk, &pk.add(&c1, &c2)).unwrap(), big(1030 % 1021));
        assert_eq!(sk.decrypt(&pk, &pk.sub(&c2, &c1).unwrap()).unwrap(), big(1021 + 30 - 1000));
    }

    #[test]
    fn zero_test_agrees_with_decrypt_exhaustively() {
        // block size 13: every message, every pair difference
        let mut rng = RandomSource::seeded(8);
        let (pk, sk) = keygen(64, Some(&big(13)), &mut rng).unwrap();
        for m1 in 0..13u64 {
            for m2 in 0..13u64 {
                let c = pk
                    .sub(&pk.encrypt(&big(m1), &mut rng).unwrap(), &pk.encrypt(&big(m2), &mut rng).unwrap())
                    .unwrap();
                let plain = sk.decrypt(&pk, &c).unwrap();
                assert_eq!(plain, big((13 + m1 - m2) % 13));
                assert_eq!(sk.is_zero(&pk, &c), plain.is_zero());
            }
        }
    }

    #[test]
    fn default_block_refuses_full_decrypt_but_zero_tests() {
        let mut rng = RandomSource::seeded(12);
        let (pk, sk) = keygen(256, None, &mut rng).unwrap();
        assert_eq!(pk.r, big(8_589_934_609));
        let a = pk.encrypt(&big(0xC0A8_0000), &mut rng).unwrap();
        let b = pk.encrypt(&big(0xC0A8_0000), &mut rng).unwrap();
        let c = pk.encrypt(&big(0xC0A8_0100), &mut rng).unwrap();
        assert!(sk.is_zero(&pk, &pk.sub(&a, &b).unwrap()));
        assert!(!sk.is_zero(&pk, &pk.sub(&a, &c).unwrap()));
        // extreme 32-bit difference still nonzero mod r
        let lo = pk.encrypt(&big(0), &mut rng).unwrap();
        let hi = pk.encrypt(&big(u32::MAX as u64), &mut rng).unwrap();
        assert!(!sk.is_zero(&pk, &pk.sub(&lo, &hi).unwrap()));
        assert!(matches!(sk.decrypt(&pk, &a), Err(PheError::DecryptionFailure(_))));
    }

    #[test]
    fn rejects_bad_block_sizes() {
        let mut rng = RandomSource::seeded(1);
        assert!(keygen(128, Some(&big(15)), &mut rng).is_err());
        assert!(keygen(40, Some(&big(8_589_934_609)), &mut rng).is_err());
    }
}
