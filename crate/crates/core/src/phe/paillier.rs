//! Paillier: `c = g^m r^N mod N^2`, with `g = N + 1`.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::PheError;
use crate::numtheory::{gcd, gen_prime, lcm, mod_inv, random_unit, RandomSource};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicKey {
    pub n: BigUint,
    pub g: BigUint,
    n_squared: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrivateKey {
    pub lambda: BigUint,
    pub mu: BigUint,
}

fn l_function(x: &BigUint, n: &BigUint) -> BigUint {
    (x - 1u32) / n
}

impl PublicKey {
    pub fn new(n: BigUint, g: BigUint) -> Self {
        let n_squared = &n * &n;
        Self { n, g, n_squared }
    }

    pub fn n_squared(&self) -> &BigUint {
        &self.n_squared
    }

    pub fn encrypt(&self, m: &BigUint, rng: &mut RandomSource) -> Result<BigUint, PheError> {
        if m >= &self.n {
            return Err(PheError::MessageOutOfRange);
        }
        let r = random_unit(&self.n, rng);
        Ok(self.encrypt_with_nonce(m, &r))
    }

    pub fn encrypt_with_nonce(&self, m: &BigUint, r: &BigUint) -> BigUint {
        // (N + 1)^m = 1 + mN (mod N^2)
        let gm = if self.g == &self.n + 1u32 {
            (BigUint::one() + m * &self.n) % &self.n_squared
        } else {
            self.g.modpow(m, &self.n_squared)
        };
        gm * r.modpow(&self.n, &self.n_squared) % &self.n_squared
    }

    pub fn add(&self, a: &BigUint, b: &BigUint) -> BigUint {
        a * b % &self.n_squared
    }

    pub fn sub(&self, a: &BigUint, b: &BigUint) -> Result<BigUint, PheError> {
        let inv = mod_inv(b, &self.n_squared).map_err(|_| PheError::NotInvertible)?;
        Ok(a * inv % &self.n_squared)
    }

    pub fn scalar_mul(&self, c: &BigUint, k: &BigUint) -> BigUint {
        c.modpow(k, &self.n_squared)
    }
}

impl PrivateKey {
    pub fn decrypt(&self, pk: &PublicKey, c: &BigUint) -> Result<BigUint, PheError> {
        if c >= pk.n_squared() || c.is_zero() {
            return Err(PheError::DecryptionFailure(
                "ciphertext outside Z*_{N^2}".into(),
            ));
        }
        let u = c.modpow(&self.lambda, pk.n_squared());
        if u.is_zero() {
            return Err(PheError::DecryptionFailure("ciphertext shares a factor with N".into()));
        }
        Ok(l_function(&u, &pk.n) * &self.mu % &pk.n)
    }
}

/// Builds a key pair from two distinct primes with `g = N + 1`.
pub fn from_primes(p: &BigUint, q: &BigUint) -> Result<(PublicKey, PrivateKey), PheError> {
    if p == q {
        return Err(PheError::InvalidOptions("p and q must be distinct".into()));
    }
    let n = p * q;
    let phi = (p - 1u32) * (q - 1u32);
    if !gcd(&n, &phi).is_one() {
        return Err(PheError::InvalidOptions("gcd(pq, (p-1)(q-1)) != 1".into()));
    }
    let lambda = lcm(&(p - 1u32), &(q - 1u32));
    let pk = PublicKey::new(n.clone(), &n + 1u32);
    let u = pk.g.modpow(&lambda, pk.n_squared());
    let mu = mod_inv(&l_function(&u, &n), &n).map_err(|_| PheError::NotInvertible)?;
    Ok((pk, PrivateKey { lambda, mu }))
}

pub fn keygen(bits: u64, rng: &mut RandomSource) -> Result<(PublicKey, PrivateKey), PheError> {
    let half = (bits / 2).max(8);
    loop {
        let p = gen_prime(half, rng)?;
        let q = gen_prime(bits.saturating_sub(half).max(8), rng)?;
        if let Ok(keys) = from_primes(&p, &q) {
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
    fn toy_key_values() {
        let (pk, sk) = from_primes(&big(5), &big(7)).unwrap();
        assert_eq!(pk.n, big(35));
        assert_eq!(pk.g, big(36));
        assert_eq!(sk.lambda, big(12));
        // L(36^12 mod 1225) = 12, and 12 * 3 = 36 = 1 mod 35
        assert_eq!(sk.mu, big(3));
    }

    #[test]
    fn toy_arithmetic_against_modular_oracle() {
        let (pk, sk) = from_primes(&big(5), &big(7)).unwrap();
        let mut rng = RandomSource::seeded(5);
        let enc = |m: u64, rng: &mut RandomSource| pk.encrypt(&big(m), rng).unwrap();
        let dec = |c: &BigUint| sk.decrypt(&pk, c).unwrap();

        assert_eq!(dec(&enc(4, &mut rng)), big(4));
        assert_eq!(dec(&pk.add(&enc(2, &mut rng), &enc(3, &mut rng))), big(5));
        assert_eq!(dec(&pk.sub(&enc(7, &mut rng), &enc(3, &mut rng)).unwrap()), big(4));
        assert_eq!(dec(&pk.sub(&enc(3, &mut rng), &enc(7, &mut rng)).unwrap()), big(35 - 4));
        assert_eq!(dec(&pk.scalar_mul(&enc(4, &mut rng), &big(3))), big(12));

        // exhaustive over the toy message space
        for m1 in 0..35u64 {
            for m2 in 0..35u64 {
                let c = pk.add(&enc(m1, &mut rng), &enc(m2, &mut rng));
                assert_eq!(dec(&c), big((m1 + m2) % 35));
            }
        }
    }

    #[test]
    fn encrypt_matches_textbook_formula_for_general_g() {
        let (pk, _) = from_primes(&big(11), &big(13)).unwrap();
        let r = big(17);
        let m = big(42);
        let general = PublicKey::new(pk.n.clone(), pk.g.clone());
        let textbook =
            general.g.modpow(&m, general.n_squared()) * r.modpow(&pk.n, pk.n_squared()) % pk.n_squared();
        assert_eq!(pk.encrypt_with_nonce(&m, &r), textbook);
    }

    #[test]
    fn rejects_out_of_range() {
        let (pk, _) = from_primes(&big(5), &big(7)).unwrap();
        let mut rng = RandomSource::seeded(1);
        assert_eq!(pk.encrypt(&big(35), &mut rng), Err(PheError::MessageOutOfRange));
    }
}
