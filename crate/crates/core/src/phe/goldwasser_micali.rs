//! Goldwasser-Micali: one ciphertext per bit, `r^2` for 0 and `a r^2` for 1,
//! where `a` is a pseudosquare. Products of ciphertexts XOR the bits.

use num_bigint::{BigUint, RandBigInt};
use num_traits::One;

use super::PheError;
use crate::numtheory::{gen_prime, jacobi, random_unit, RandomSource};

/// Bit width used for IPv4 payloads.
pub const IP_WIDTH: u32 = 32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicKey {
    pub n: BigUint,
    pub a: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrivateKey {
    pub p: BigUint,
    pub q: BigUint,
}

impl PublicKey {
    pub fn encrypt_bit(&self, bit: bool, rng: &mut RandomSource) -> BigUint {
        let r = random_unit(&self.n, rng);
        let square = &r * &r % &self.n;
        if bit {
            square * &self.a % &self.n
        } else {
            square
        }
    }

    /// Encrypts the low `width` bits of `m`, most significant bit first.
    pub fn encrypt(
        &self,
        m: &BigUint,
        width: u32,
        rng: &mut RandomSource,
    ) -> Result<Vec<BigUint>, PheError> {
        if m.bits() > width as u64 {
            return Err(PheError::MessageOutOfRange);
        }
        Ok((0..width)
            .rev()
            .map(|i| self.encrypt_bit(m.bit(i as u64), rng))
            .collect())
    }

    pub fn xor(&self, a: &[BigUint], b: &[BigUint]) -> Result<Vec<BigUint>, PheError> {
        if a.len() != b.len() {
            return Err(PheError::WidthMismatch { left: a.len(), right: b.len() });
        }
        Ok(a.iter().zip(b).map(|(x, y)| x * y % &self.n).collect())
    }
}

impl PrivateKey {
    pub fn decrypt_bit(&self, c: &BigUint) -> Result<bool, PheError> {
        match jacobi(c, &self.p)? {
            1 => Ok(false),
            -1 => Ok(true),
            _ => Err(PheError::DecryptionFailure("bit ciphertext shares a factor with N".into())),
        }
    }

    pub fn decrypt(&self, bits: &[BigUint]) -> Result<BigUint, PheError> {
        let mut m = BigUint::default();
        for c in bits {
            m <<= 1u32;
            if self.decrypt_bit(c)? {
                m |= BigUint::one();
            }
        }
        Ok(m)
    }

    /// True iff every bit ciphertext is a quadratic residue mod `p`.
    pub fn is_zero(&self, bits: &[BigUint]) -> Result<bool, PheError> {
        for c in bits {
            if self.decrypt_bit(c)? {
                return Ok(false);
            }
        }
        Ok(true)
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
    let n = p * q;
    let two = BigUint::from(2u32);
    let a = loop {
        let a = rng.gen_biguint_range(&two, &n);
        if jacobi(&a, p)? == -1 && jacobi(&a, q)? == -1 {
            break a;
        }
    };
    Ok((PublicKey { n, a }, PrivateKey { p: p.clone(), q: q.clone() }))
}

pub fn keygen(bits: u64, rng: &mut RandomSource) -> Result<(PublicKey, PrivateKey), PheError> {
    let half = (bits / 2).max(8);
    loop {
        let p = gen_prime(half, rng)?;
        let q = gen_prime(bits.saturating_sub(half).max(8), rng)?;
        if p != q {
            return from_primes(&p, &q, rng);
        }
    }
}
