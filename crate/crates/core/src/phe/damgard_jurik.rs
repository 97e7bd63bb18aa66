//! Damgård-Jurik: Paillier generalised to the message space `Z_{n^s}`,
//! `c = g^m r^{n^s} mod n^{s+1}` with `g = n + 1`.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};

use super::PheError;
use crate::numtheory::{gcd, gen_prime, lcm, mod_inv, random_unit, RandomSource};

pub const MAX_S: u32 = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicKey {
    pub n: BigUint,
    pub g: BigUint,
    pub s: u32,
    n_pow_s: BigUint,
    n_pow_s1: BigUint,
}

/// `d` satisfies `d = 0 mod lambda` and `d = 1 mod n^s`, so that
/// `c^d = (1 + n)^m mod n^{s+1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrivateKey {
    pub lambda: BigUint,
    pub d: BigUint,
}

impl PublicKey {
    pub fn new(n: BigUint, g: BigUint, s: u32) -> Result<Self, PheError> {
        if s == 0 || s > MAX_S {
            return Err(PheError::InvalidOptions(format!("s must be in 1..={MAX_S}")));
        }
        let n_pow_s = n.pow(s);
        let n_pow_s1 = &n_pow_s * &n;
        Ok(Self { n, g, s, n_pow_s, n_pow_s1 })
    }

    /// The message modulus `n^s`.
    pub fn message_modulus(&self) -> &BigUint {
        &self.n_pow_s
    }

    pub fn ciphertext_modulus(&self) -> &BigUint {
        &self.n_pow_s1
    }

    pub fn encrypt(&self, m: &BigUint, rng: &mut RandomSource) -> Result<BigUint, PheError> {
        if m >= &self.n_pow_s {
            return Err(PheError::MessageOutOfRange);
        }
        let r = random_unit(&self.n, rng);
        let gm = self.g.modpow(m, &self.n_pow_s1);
        Ok(gm * r.modpow(&self.n_pow_s, &self.n_pow_s1) % &self.n_pow_s1)
    }

    pub fn add(&self, a: &BigUint, b: &BigUint) -> BigUint {
        a * b % &self.n_pow_s1
    }

    pub fn sub(&self, a: &BigUint, b: &BigUint) -> Result<BigUint, PheError> {
        let inv = mod_inv(b, &self.n_pow_s1).map_err(|_| PheError::NotInvertible)?;
        Ok(a * inv % &self.n_pow_s1)
    }

    pub fn scalar_mul(&self, c: &BigUint, k: &BigUint) -> BigUint {
        c.modpow(k, &self.n_pow_s1)
    }
}

impl PrivateKey {
    pub fn decrypt(&self, pk: &PublicKey, c: &BigUint) -> Result<BigUint, PheError> {
        if c.is_zero() || c >= pk.ciphertext_modulus() {
            return Err(PheError::DecryptionFailure(
                "ciphertext outside Z*_{n^(s+1)}".into(),
            ));
        }
        let a = c.modpow(&self.d, pk.ciphertext_modulus());
        extract_exponent(&a, &pk.n, pk.s)
    }
}

/// Recovers `i` from `a = (1 + n)^i mod n^{s+1}`, one base-`n` digit of
/// precision per pass, using the binomial expansion of `(1 + n)^i`.
pub fn extract_exponent(a: &BigUint, n: &BigUint, s: u32) -> Result<BigUint, PheError> {
    let n_int = BigInt::from_biguint(Sign::Plus, n.clone());
    let mut i = BigInt::zero();
    let mut factorials = vec![BigInt::one()];
    for k in 1..=s as u64 {
        let prev = factorials.last().cloned().unwrap_or_else(BigInt::one);
        factorials.push(prev * k);
    }

    for j in 1..=s {
        let nj = n.pow(j);
        let nj_int = BigInt::from_biguint(Sign::Plus, nj.clone());
        let a_mod = a % (&nj * n);
        if a_mod.is_zero() {
            return Err(PheError::DecryptionFailure("not a power of 1 + n".into()));
        }
        let l = (a_mod - 1u32) / n;
        let mut t1 = BigInt::from_biguint(Sign::Plus, l);
        let mut t2 = i.clone();
        for k in 2..=j {
            i -= 1;
            t2 = (&t2 * &i).mod_floor(&nj_int);
            let fact = factorials[k as usize].mod_floor(&nj_int).to_biguint().unwrap_or_default();
            let fact_inv = mod_inv(&fact, &nj).map_err(|_| PheError::NotInvertible)?;
            let term = &t2 * n_int.pow(k - 1) * BigInt::from_biguint(Sign::Plus, fact_inv);
            t1 = (t1 - term).mod_floor(&nj_int);
        }
        i = t1;
    }
    i.to_biguint()
        .ok_or_else(|| PheError::DecryptionFailure("negative exponent".into()))
}

pub fn from_primes(p: &BigUint, q: &BigUint, s: u32) -> Result<(PublicKey, PrivateKey), PheError> {
    if p == q {
        return Err(PheError::InvalidOptions("p and q must be distinct".into()));
    }
    let n = p * q;
    let lambda = lcm(&(p - 1u32), &(q - 1u32));
    if !gcd(&n, &lambda).is_one() {
        return Err(PheError::InvalidOptions("gcd(n, lambda) != 1".into()));
    }
    let pk = PublicKey::new(n.clone(), &n + 1u32, s)?;
    let lambda_inv = mod_inv(&lambda, pk.message_modulus()).map_err(|_| PheError::NotInvertible)?;
    let d = &lambda * lambda_inv;
    Ok((pk, PrivateKey { lambda, d }))
}

pub fn keygen(bits: u64, s: u32, rng: &mut RandomSource) -> Result<(PublicKey, PrivateKey), PheError> {
    if s == 0 || s > MAX_S {
        return Err(PheError::InvalidOptions(format!("s must be in 1..={MAX_S}")));
    }
    let half = (bits / 2).max(8);
    loop {
        let p = gen_prime(half, rng)?;
        let q = gen_prime(bits.saturating_sub(half).max(8), rng)?;
        if let Ok(keys) = from_primes(&p, &q, s) {
            return Ok(keys);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phe::paillier;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn extraction_matches_brute_force() {
        // n = 11 * 13; brute force over the whole exponent range for s = 1..3
        let n = big(143);
        for s in 1..=3u32 {
            let ns = n.pow(s);
            let modulus = &ns * &n;
            let base = &n + 1u32;
            let mut acc = BigUint::one();
            let mut i = BigUint::zero();
            while i < ns {
                assert_eq!(extract_exponent(&acc, &n, s).unwrap(), i, "s={s}");
                acc = acc * &base % &modulus;
                i += 1u32;
                if s == 3 && i > big(20_000) {
                    break;
                }
            }
        }
    }

    #[test]
    fn round_trip_for_every_s() {
        let mut rng = RandomSource::seeded(9);
        for s in 1..=MAX_S {
            let (pk, sk) = keygen(64, s, &mut rng).unwrap();
            for _ in 0..50 {
                let m = num_bigint::RandBigInt::gen_biguint_below(&mut rng, pk.message_modulus());
                let c = pk.encrypt(&m, &mut rng).unwrap();
                assert_eq!(sk.decrypt(&pk, &c).unwrap(), m);
            }
        }
    }

    #[test]
    fn s1_agrees_with_paillier() {
        let (p, q) = (big(1_000_003), big(1_000_033));
        let (dj_pk, dj_sk) = from_primes(&p, &q, 1).unwrap();
        let (pa_pk, pa_sk) = paillier::from_primes(&p, &q).unwrap();
        assert_eq!(dj_pk.n, pa_pk.n);
        let r = big(123_456_789);
        for m in [0u64, 1, 42, 999_999_999] {
            let c = pa_pk.encrypt_with_nonce(&big(m), &r);
            assert_eq!(dj_sk.decrypt(&dj_pk, &c).unwrap(), pa_sk.decrypt(&pa_pk, &c).unwrap());
        }
    }

    #[test]
    fn homomorphic_ops_wrap_mod_n_pow_s() {
        let mut rng = RandomSource::seeded(3);
        let (pk, sk) = keygen(64, 2, &mut rng).unwrap();
        let m = pk.message_modulus().clone();
        let c3 = pk.encrypt(&big(3), &mut rng).unwrap();
        let c7 = pk.encrypt(&big(7), &mut rng).unwrap();
        assert_eq!(sk.decrypt(&pk, &pk.sub(&c3, &c7).unwrap()).unwrap(), &m - 4u32);
        assert_eq!(sk.decrypt(&pk, &pk.add(&c3, &c7)).unwrap(), big(10));
        assert_eq!(sk.decrypt(&pk, &pk.scalar_mul(&c7, &big(5))).unwrap(), big(35));
    }

    #[test]
    fn rejects_bad_s() {
        assert!(PublicKey::new(big(35), big(36), 0).is_err());
        assert!(PublicKey::new(big(35), big(36), MAX_S + 1).is_err());
    }
}
