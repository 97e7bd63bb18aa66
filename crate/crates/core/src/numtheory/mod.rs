//! Multiprecision number theory shared by every scheme.
//!
//! Arbitrary-precision integers come from `num-bigint`; everything on top of
//! them (primality, inverses, Jacobi symbols, the discrete-log scan used by
//! Benaloh decryption) lives here.

mod prime;
mod rng;

use num_bigint::{BigInt, BigUint, RandBigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

pub use prime::{first_primes, gen_prime, is_prime_u64, is_probable_prime, next_prime, MR_ROUNDS};
pub use rng::RandomSource;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumError {
    #[error("prime size must be at least 8 bits, got {0}")]
    TooFewBits(u64),
    #[error("value is not invertible modulo the given modulus")]
    NotInvertible,
    #[error("modulus must be odd and at least 3")]
    InvalidModulus,
    #[error("no exponent below the search bound")]
    NotFound,
}

pub fn gcd(a: &BigUint, b: &BigUint) -> BigUint {
    a.gcd(b)
}

pub fn lcm(a: &BigUint, b: &BigUint) -> BigUint {
    if a.is_zero() || b.is_zero() {
        return BigUint::zero();
    }
    a / a.gcd(b) * b
}

/// Inverse of `a` modulo `m` via the extended Euclidean algorithm.
pub fn mod_inv(a: &BigUint, m: &BigUint) -> Result<BigUint, NumError> {
    if m < &BigUint::from(2u32) {
        return Err(NumError::InvalidModulus);
    }
    let a = BigInt::from_biguint(Sign::Plus, a % m);
    let m = BigInt::from_biguint(Sign::Plus, m.clone());
    let ext = a.extended_gcd(&m);
    if !ext.gcd.is_one() {
        return Err(NumError::NotInvertible);
    }
    Ok(ext.x.mod_floor(&m).to_biguint().expect("mod_floor is nonnegative"))
}

/// Jacobi symbol `(a / n)` for odd `n >= 3`, by quadratic reciprocity.
pub fn jacobi(a: &BigUint, n: &BigUint) -> Result<i8, NumError> {
    if n.is_even() || n < &BigUint::from(3u32) {
        return Err(NumError::InvalidModulus);
    }
    let mut a = a % n;
    let mut n = n.clone();
    let mut sign = 1i8;
    while !a.is_zero() {
        let twos = a.trailing_zeros().unwrap_or(0);
        if twos > 0 {
            a >>= twos;
            let n_mod_8 = (&n % 8u32).to_u32_digits().first().copied().unwrap_or(0);
            if twos % 2 == 1 && (n_mod_8 == 3 || n_mod_8 == 5) {
                sign = -sign;
            }
        }
        if (&a % 4u32) == BigUint::from(3u32) && (&n % 4u32) == BigUint::from(3u32) {
            sign = -sign;
        }
        std::mem::swap(&mut a, &mut n);
        a %= &n;
    }
    Ok(if n.is_one() { sign } else { 0 })
}

/// Smallest `e` in `[0, bound)` with `base^e = target (mod modulus)`,
/// found by stepping through successive powers.
pub fn brute_force_dlog(
    base: &BigUint,
    target: &BigUint,
    modulus: &BigUint,
    bound: u64,
) -> Result<u64, NumError> {
    let target = target % modulus;
    let base = base % modulus;
    let mut acc = BigUint::one() % modulus;
    for e in 0..bound {
        if acc == target {
            return Ok(e);
        }
        acc = (&acc * &base) % modulus;
    }
    Err(NumError::NotFound)
}

/// Uniform element of `[1, n)` coprime to `n`.
pub fn random_unit(n: &BigUint, rng: &mut RandomSource) -> BigUint {
    let one = BigUint::one();
    loop {
        let r = rng.gen_biguint_range(&one, n);
        if r.gcd(n).is_one() {
            return r;
        }
    }
}
