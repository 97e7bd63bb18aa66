//! Naccache-Stern knapsack over a prime `p`.
//!
//! Bit `i` of the message selects the public value `v_i = p_i^(1/s) mod p`,
//! where `p_i` is the `i`-th small prime. Raising a ciphertext to `s` turns
//! it back into `prod p_i^(e_i) mod p`; as long as that product stays below
//! `p` the exponents are read off by trial division. A fresh ciphertext has
//! every `e_i` in {0, 1}. Products of ciphertexts add exponents and
//! quotients subtract them; decryption recovers the pair
//! `prod_{e_i > 0} p_i^e_i`, `prod_{e_i < 0} p_i^-e_i` by rational
//! reconstruction and returns `sum 2^i e_i mod 2^width`. This is exact while
//! both products stay below `sqrt(p/2)`; `p` is sized so that holds for any
//! sum or difference of two messages, or a message times 2.
//!
//! Encryption is deterministic: `gcd(s, p - 1) = 1` leaves no nontrivial
//! `s`-th roots of unity to randomise with.

use num_bigint::{BigInt, BigUint, RandBigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::PheError;
use crate::numtheory::{first_primes, gcd, gen_prime, mod_inv, RandomSource};

/// Default width: one prime per bit, with a spare bit so the sum of two
/// 32-bit values still decrypts exactly.
pub const DEFAULT_WIDTH: u32 = 33;
pub const MAX_WIDTH: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicKey {
    pub p: BigUint,
    pub v: Vec<BigUint>,
    primes: Vec<BigUint>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrivateKey {
    pub s: BigUint,
}

impl PublicKey {
    pub fn new(p: BigUint, v: Vec<BigUint>) -> Result<Self, PheError> {
        let width = v.len();
        if width == 0 || width > MAX_WIDTH as usize {
            return Err(PheError::InvalidOptions(format!("width must be in 1..={MAX_WIDTH}")));
        }
        let primes = first_primes(width);
        if primes.iter().product::<BigUint>() >= p {
            return Err(PheError::InvalidOptions("product of small primes must be below p".into()));
        }
        Ok(Self { p, v, primes })
    }

    pub fn width(&self) -> u32 {
        self.v.len() as u32
    }

    /// `sigma`: product of the small primes in use.
    pub fn sigma(&self) -> BigUint {
        self.primes.iter().product()
    }

    pub fn message_modulus(&self) -> BigUint {
        BigUint::one() << self.width()
    }

    pub fn encrypt(&self, m: &BigUint) -> Result<BigUint, PheError> {
        if m.bits() > self.width() as u64 {
            return Err(PheError::MessageOutOfRange);
        }
        Ok(self
            .v
            .iter()
            .enumerate()
            .filter(|(i, _)| m.bit(*i as u64))
            .fold(BigUint::one(), |acc, (_, vi)| acc * vi % &self.p))
    }

    pub fn add(&self, a: &BigUint, b: &BigUint) -> BigUint {
        a * b % &self.p
    }

    pub fn sub(&self, a: &BigUint, b: &BigUint) -> Result<BigUint, PheError> {
        let inv = mod_inv(b, &self.p).map_err(|_| PheError::NotInvertible)?;
        Ok(a * inv % &self.p)
    }

    pub fn scalar_mul(&self, c: &BigUint, k: &BigUint) -> BigUint {
        c.modpow(k, &self.p)
    }

    /// Exponent of each small prime in `value`, or `None` if it does not
    /// factor completely over them.
    fn exponents(&self, value: &BigUint) -> Option<Vec<u64>> {
        let mut rest = value.clone();
        let exps = self
            .primes
            .iter()
            .map(|pi| {
                let mut e = 0u64;
                loop {
                    let (q, r) = rest.div_rem(pi);
                    if !r.is_zero() {
                        break;
                    }
                    rest = q;
                    e += 1;
                }
                e
            })
            .collect();
        rest.is_one().then_some(exps)
    }

    fn assemble(&self, exps: impl Iterator<Item = i128>) -> BigUint {
        let modulus = BigInt::from_biguint(Sign::Plus, self.message_modulus());
        let total: BigInt = exps
            .enumerate()
            .map(|(i, e)| BigInt::from(e) << i)
            .sum();
        total.mod_floor(&modulus).to_biguint().unwrap_or_default()
    }
}

impl PrivateKey {
    pub fn decrypt(&self, pk: &PublicKey, c: &BigUint) -> Result<BigUint, PheError> {
        let x = c.modpow(&self.s, &pk.p);
        let (num, den) = rational_reconstruction(&x, &pk.p).ok_or_else(overflow)?;
        let up = pk.exponents(&num).ok_or_else(overflow)?;
        let down = pk.exponents(&den).ok_or_else(overflow)?;
        Ok(pk.assemble(up.iter().zip(&down).map(|(&a, &b)| a as i128 - b as i128)))
    }

    /// Zero iff `c^s = 1 mod p`. Sound for any difference of two fresh
    /// encryptions, even past additive capacity: distinct products of
    /// distinct small primes below `p` cannot agree mod `p`.
    pub fn is_zero(&self, pk: &PublicKey, c: &BigUint) -> bool {
        c.modpow(&self.s, &pk.p).is_one()
    }
}

fn overflow() -> PheError {
    PheError::DecryptionFailure("plaintext exceeds Naccache-Stern capacity".into())
}

/// Finds `num, den < sqrt(p/2)` with `x = num / den mod p`.
fn rational_reconstruction(x: &BigUint, p: &BigUint) -> Option<(BigUint, BigUint)> {
    let bound = BigInt::from_biguint(Sign::Plus, (p >> 1u32).sqrt());
    let (mut r0, mut r1) = (
        BigInt::from_biguint(Sign::Plus, p.clone()),
        BigInt::from_biguint(Sign::Plus, x.clone()),
    );
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        r0 = std::mem::replace(&mut r1, r2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || t1.abs() > bound {
        return None;
    }
    let (num, den) = if t1.is_negative() { (-r1, -t1) } else { (r1, t1) };
    if !num.is_positive() {
        return None;
    }
    Some((num.to_biguint()?, den.to_biguint()?))
}

/// Prime size used for a given width: at least the requested security and
/// large enough that `sigma^2 < sqrt(p/2)`.
pub fn prime_bits(security_bits: u64, width: u32) -> u64 {
    let sigma: BigUint = first_primes(width as usize).iter().product();
    security_bits.max(4 * sigma.bits() + 4)
}

pub fn from_prime(
    p: &BigUint,
    width: u32,
    rng: &mut RandomSource,
) -> Result<(PublicKey, PrivateKey), PheError> {
    let primes = first_primes(width as usize);
    let p1 = p - 1u32;
    let s = loop {
        let s = rng.gen_biguint_range(&BigUint::from(3u32), &p1);
        if gcd(&s, &p1).is_one() {
            break s;
        }
    };
    let s_inv = mod_inv(&s, &p1).map_err(|_| PheError::NotInvertible)?;
    let v = primes.iter().map(|pi| pi.modpow(&s_inv, p)).collect();
    Ok((PublicKey::new(p.clone(), v)?, PrivateKey { s }))
}

pub fn keygen(
    security_bits: u64,
    width: u32,
    rng: &mut RandomSource,
) -> Result<(PublicKey, PrivateKey), PheError> {
    if width == 0 || width > MAX_WIDTH {
        return Err(PheError::InvalidOptions(format!("width must be in 1..={MAX_WIDTH}")));
    }
    let p = gen_prime(prime_bits(security_bits, width), rng)?;
    from_prime(&p, width, rng)
}
