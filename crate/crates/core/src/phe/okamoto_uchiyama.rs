//! Okamoto-Uchiyama over `n = p^2 q`: `C = g^m h^r mod n`, `h = g^n mod n`.

use num_bigint::{BigUint, RandBigInt};
use num_traits::One;

use super::PheError;
use crate::numtheory::{gcd, gen_prime, mod_inv, random_unit, RandomSource};

/// Smallest accepted size of `p`: 32-bit payloads and their differences must
/// fit below `2^(k-1) < p`.
pub const MIN_PRIME_BITS: u64 = 40;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicKey {
    pub n: BigUint,
    pub g: BigUint,
    pub h: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrivateKey {
    pub p: BigUint,
    pub q: BigUint,
    p_squared: BigUint,
    g_log_inv: BigUint,
}

fn l_function(x: &BigUint, p: &BigUint) -> BigUint {
    (x - 1u32) / p
}

impl PublicKey {
    /// Bit size `k` of the secret primes, recovered from `|n| in [3k-2, 3k]`.
    pub fn prime_bits(&self) -> u64 {
        self.n.bits().div_ceil(3)
    }

    /// Messages must lie below `2^(k-1)`.
    pub fn message_bound(&self) -> BigUint {
        BigUint::one() << (self.prime_bits() - 1)
    }

    pub fn encrypt(&self, m: &BigUint, rng: &mut RandomSource) -> Result<BigUint, PheError> {
        if m >= &self.message_bound() {
            return Err(PheError::MessageOutOfRange);
        }
        let r = rng.gen_biguint_range(&BigUint::one(), &self.n);
        Ok(self.g.modpow(m, &self.n) * self.h.modpow(&r, &self.n) % &self.n)
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
    pub fn new(p: BigUint, q: BigUint, pk: &PublicKey) -> Result<Self, PheError> {
        let p_squared = &p * &p;
        let b = l_function(&pk.g.modpow(&(&p - 1u32), &p_squared), &p);
        let g_log_inv = mod_inv(&b, &p).map_err(|_| {
            PheError::InvalidOptions("g^(p-1) = 1 mod p^2; g is not a valid generator".into())
        })?;
        Ok(Self { p, q, p_squared, g_log_inv })
    }

    /// The message modulus: results of homomorphic arithmetic wrap mod `p`.
    pub fn message_modulus(&self) -> &BigUint {
        &self.p
    }

    pub fn decrypt(&self, c: &BigUint) -> Result<BigUint, PheError> {
        let x = c.modpow(&(&self.p - 1u32), &self.p_squared);
        if x.bits() == 0 {
            return Err(PheError::DecryptionFailure("ciphertext divisible by p".into()));
        }
        Ok(l_function(&x, &self.p) * &self.g_log_inv % &self.p)
    }
}

pub fn from_primes(
    p: &BigUint,
    q: &BigUint,
    rng: &mut RandomSource,
) -> Result<(PublicKey, PrivateKey), PheError> {
    if p == q {
        return Err(PheError::InvalidOptions("p and q must be distinct".into()));
    }
    let n = p * p * q;
    let p_squared = p * p;
    let g = loop {
        let g = random_unit(&n, rng);
        if !g.modpow(&(p - 1u32), &p_squared).is_one() {
            break g;
        }
    };
    let h = g.modpow(&n, &n);
    let pk = PublicKey { n, g, h };
    let sk = PrivateKey::new(p.clone(), q.clone(), &pk)?;
    Ok((pk, sk))
}

pub fn keygen(bits: u64, rng: &mut RandomSource) -> Result<(PublicKey, PrivateKey), PheError> {
    let k = (bits / 3).max(MIN_PRIME_BITS);
    loop {
        let p = gen_prime(k, rng)?;
        let q = gen_prime(k, rng)?;
        if p != q && gcd(&p, &(&q - 1u32)).is_one() && gcd(&q, &(&p - 1u32)).is_one() {
            return from_primes(&p, &q, rng);
        }
    }
}
