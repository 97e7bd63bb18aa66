use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::{NumError, RandomSource};

/// Rounds used for every probable-prime test in key generation.
pub const MR_ROUNDS: u32 = 40;

/// Bases 2..=41 are a deterministic Miller-Rabin witness set below this bound.
const DETERMINISTIC_LIMIT: u128 = 3_317_044_064_679_887_385_961_981;
const DETERMINISTIC_BASES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

const SMALL_PRIMES: [u32; 54] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
    101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193,
    197, 199, 211, 223, 227, 229, 233, 239, 241, 251,
];

/// Miller-Rabin probable-prime test.
///
/// Below ~3.3e24 the fixed witness set makes the answer exact. Above it,
/// `rounds` witnesses are drawn from a stream keyed on `n` itself, so the
/// function stays pure and a composite passes with probability at most
/// `4^-rounds`.
pub fn is_probable_prime(n: &BigUint, rounds: u32) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    for &p in SMALL_PRIMES.iter() {
        if (n % p).is_zero() {
            return false;
        }
    }

    let one = BigUint::one();
    let n_minus_one = n - &one;
    let twos = n_minus_one.trailing_zeros().unwrap_or(0);
    let d = &n_minus_one >> twos;

    let witness = |a: &BigUint| -> bool {
        let mut x = a.modpow(&d, n);
        if x == one || x == n_minus_one {
            return true;
        }
        for _ in 1..twos {
            x = (&x * &x) % n;
            if x == n_minus_one {
                return true;
            }
            if x == one {
                return false;
            }
        }
        false
    };

    if n.to_u128().is_some_and(|v| v < DETERMINISTIC_LIMIT) {
        return DETERMINISTIC_BASES
            .iter()
            .all(|&a| witness(&BigUint::from(a)));
    }

    let mut seed = [0u8; 32];
    for (dst, src) in seed.iter_mut().zip(n.to_bytes_le()) {
        *dst = src;
    }
    let mut bases = ChaCha20Rng::from_seed(seed);
    let two = BigUint::from(2u32);
    let upper = n - &one;
    (0..rounds.max(1)).all(|_| witness(&bases.gen_biguint_range(&two, &upper)))
}

/// Deterministic primality for machine words (witness set valid for all u64).
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let pow = |mut base: u64, mut exp: u64| {
        let mut acc = 1u64;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = mul(acc, base);
            }
            base = mul(base, base);
            exp >>= 1;
        }
        acc
    };
    let twos = (n - 1).trailing_zeros();
    let d = (n - 1) >> twos;
    'outer: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..twos {
            x = mul(x, x);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Random odd probable prime with exactly `bits` bits.
pub fn gen_prime(bits: u64, rng: &mut RandomSource) -> Result<BigUint, NumError> {
    if bits < 8 {
        return Err(NumError::TooFewBits(bits));
    }
    let top = BigUint::one() << (bits - 1);
    loop {
        let candidate = rng.gen_biguint(bits) | &top | BigUint::one();
        if SMALL_PRIMES[1..]
            .iter()
            .any(|&p| (&candidate % p).is_zero() && candidate != BigUint::from(p))
        {
            continue;
        }
        if is_probable_prime(&candidate, MR_ROUNDS) {
            return Ok(candidate);
        }
    }
}

/// Smallest prime strictly greater than `n`.
pub fn next_prime(n: &BigUint) -> BigUint {
    let two = BigUint::from(2u32);
    if n < &two {
        return two;
    }
    let mut c = n + 1u32;
    if c.is_even() {
        c += 1u32;
    }
    while !is_probable_prime(&c, MR_ROUNDS) {
        c += 2u32;
    }
    c
}

/// The first `count` primes in ascending order, starting at 2.
pub fn first_primes(count: usize) -> Vec<BigUint> {
    let mut out: Vec<u64> = Vec::with_capacity(count);
    let mut c = 2u64;
    while out.len() < count {
        if out.iter().take_while(|&&p| p * p <= c).all(|&p| !c.is_multiple_of(p)) {
            out.push(c);
        }
        c += 1;
    }
    out.into_iter().map(BigUint::from).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_division(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn small_values() {
        assert!(is_probable_prime(&BigUint::from(7u32), 40));
        assert!(is_probable_prime(&BigUint::from(2u32), 40));
        assert!(!is_probable_prime(&BigUint::from(561u32), 40));
        assert!(!is_probable_prime(&BigUint::zero(), 40));
        assert!(!is_probable_prime(&BigUint::one(), 40));
        assert!(!is_probable_prime(&BigUint::from(1u64 << 40), 40));
    }

    #[test]
    fn agrees_with_trial_division() {
        for n in 0..5000u64 {
            assert_eq!(is_prime_u64(n), trial_division(n), "n = {n}");
        }
        // Carmichael numbers and strong pseudoprimes to small bases
        for n in [561u64, 1105, 1729, 2465, 2821, 6601, 3215031751, 3825123056546413051] {
            assert!(!is_prime_u64(n), "{n}");
        }
    }

    #[test]
    fn large_values() {
        // 2^127 - 1 is prime, 2^128 + 1 is not
        let m127 = (BigUint::one() << 127u32) - 1u32;
        assert!(is_probable_prime(&m127, 40));
        let f7 = (BigUint::one() << 128u32) + 1u32;
        assert!(!is_probable_prime(&f7, 40));
        // product of two 80-bit primes sits above the deterministic window
        let p = next_prime(&(BigUint::one() << 80u32));
        let q = next_prime(&p);
        assert!(!is_probable_prime(&(&p * &q), 40));
    }

    #[test]
    fn gen_prime_contract() {
        let mut rng = RandomSource::seeded(1);
        let p = gen_prime(8, &mut rng).unwrap();
        assert!(p >= BigUint::from(128u32) && p <= BigUint::from(255u32));
        assert!(is_probable_prime(&p, 40));

        let a = gen_prime(64, &mut RandomSource::seeded(42)).unwrap();
        let b = gen_prime(64, &mut RandomSource::seeded(42)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.bits(), 64);

        let big = gen_prime(512, &mut RandomSource::crypto()).unwrap();
        assert_eq!(big.bits(), 512);
        assert!(is_probable_prime(&big, 40));

        assert_eq!(gen_prime(7, &mut rng), Err(NumError::TooFewBits(7)));
    }

    #[test]
    fn first_primes_prefix() {
        assert_eq!(first_primes(1), vec![BigUint::from(2u32)]);
        let four: Vec<BigUint> = [2u32, 3, 5, 7].iter().map(|&p| BigUint::from(p)).collect();
        assert_eq!(first_primes(4), four);
    }

    #[test]
    fn primorial_covers_32_bit_messages() {
        let limit = BigUint::one() << 32u32;
        // independent oracle: primes by trial division, multiplied directly
        let oracle: Vec<u64> = (2u64..).filter(|&n| trial_division(n)).take(33).collect();
        let direct = |k: usize| -> BigUint { oracle[..k].iter().map(|&p| BigUint::from(p)).product() };
        let p33: BigUint = first_primes(33).iter().product();
        let p32: BigUint = first_primes(32).iter().product();
        assert_eq!(p33, direct(33));
        assert_eq!(p32, direct(32));
        assert!(p33 > limit);
        assert!(p32 > limit);
        assert_eq!(p33.bits(), 176);
    }

    #[test]
    fn next_prime_above_2_pow_33() {
        let r = next_prime(&(BigUint::one() << 33u32));
        assert_eq!(r, BigUint::from(8_589_934_609u64));
    }
}
