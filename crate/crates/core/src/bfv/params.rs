use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use super::ntt::ntt_primes;
use crate::numtheory::is_prime_u64;

/// A prime `≡ 1 mod 32768`, valid for every ring dimension up to 16384.
pub const DEFAULT_PLAINTEXT_MOD: u64 = 35_184_372_744_193;
pub const DEFAULT_SIGMA: f64 = 3.2;
/// Minimum `log2(q / t)`.
pub const MIN_RATIO_BITS: u32 = 20;
/// Ciphertext moduli must stay below `2^126` so coefficient sums fit a `u128`.
pub const MAX_MODULUS_BITS: u32 = 126;
pub const MAX_RING_DIM: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq)]
pub struct BfvParams {
    pub ring_dim: usize,
    pub plaintext_mod: u64,
    /// Distinct primes whose product is the ciphertext modulus `q`.
    pub moduli: Vec<u64>,
    pub err_stddev: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamViolation {
    #[error("ring dimension {0} is not a power of two in 2..={MAX_RING_DIM}")]
    RingDim(usize),
    #[error("plaintext modulus {0} is not prime")]
    PlaintextNotPrime(u64),
    #[error("plaintext modulus {t} is not 1 mod {two_n}")]
    PlaintextNotCongruent { t: u64, two_n: u64 },
    #[error("ciphertext modulus has no prime factors")]
    NoCiphertextModulus,
    #[error("ciphertext modulus factor {0} is not prime")]
    FactorNotPrime(u64),
    #[error("ciphertext modulus factor {0} is repeated or equals t")]
    FactorRepeated(u64),
    #[error("ciphertext modulus exceeds {MAX_MODULUS_BITS} bits")]
    ModulusTooLarge,
    #[error("q/t is about 2^{log2_ratio:.1}; at least 2^{MIN_RATIO_BITS} is required")]
    RatioTooSmall { log2_ratio: f64 },
    #[error("q leaves no rounding headroom for t")]
    NoNoiseBudget,
    #[error("error standard deviation {0} is not a positive finite number")]
    Sigma(f64),
}

impl BfvParams {
    /// Default plaintext modulus and error, `q` the product of the two
    /// largest 62-bit primes `≡ 1 mod 2n`.
    pub fn for_ring_dim(n: usize) -> Self {
        Self {
            ring_dim: n,
            plaintext_mod: DEFAULT_PLAINTEXT_MOD,
            moduli: ntt_primes(n, 62, 2),
            err_stddev: DEFAULT_SIGMA,
        }
    }

    pub fn desk() -> Self {
        Self::for_ring_dim(4096)
    }

    pub fn full() -> Self {
        Self::for_ring_dim(16384)
    }

    /// `q`, or `None` if the product overflows 128 bits.
    pub fn ciphertext_mod(&self) -> Option<u128> {
        self.moduli.iter().try_fold(1u128, |acc, &p| acc.checked_mul(p as u128))
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_ok()
    }

    /// Checks every parameter constraint and reports all violations.
    pub fn validate(&self) -> Result<(), Vec<ParamViolation>> {
        let mut errs = Vec::new();
        let n = self.ring_dim;
        let t = self.plaintext_mod;
        if !n.is_power_of_two() || !(2..=MAX_RING_DIM).contains(&n) {
            errs.push(ParamViolation::RingDim(n));
        }
        if !is_prime_u64(t) {
            errs.push(ParamViolation::PlaintextNotPrime(t));
        }
        let two_n = 2 * n as u64;
        if two_n == 0 || t == 0 || !(t - 1).is_multiple_of(two_n) {
            errs.push(ParamViolation::PlaintextNotCongruent { t, two_n });
        }
        if !(self.err_stddev.is_finite() && self.err_stddev > 0.0) {
            errs.push(ParamViolation::Sigma(self.err_stddev));
        }

        if self.moduli.is_empty() {
            errs.push(ParamViolation::NoCiphertextModulus);
        }
        for (i, &p) in self.moduli.iter().enumerate() {
            if !is_prime_u64(p) {
                errs.push(ParamViolation::FactorNotPrime(p));
            }
            if p == t || self.moduli[..i].contains(&p) {
                errs.push(ParamViolation::FactorRepeated(p));
            }
        }
        match self.ciphertext_mod() {
            Some(q) if q >> MAX_MODULUS_BITS == 0 => {
                if !self.moduli.is_empty() && t > 1 {
                    let log2_ratio = (q as f64).log2() - (t as f64).log2();
                    if (q / t as u128) >> MIN_RATIO_BITS == 0 {
                        errs.push(ParamViolation::RatioTooSmall { log2_ratio });
                    } else if noise_budget(q, t) == 0 {
                        errs.push(ParamViolation::NoNoiseBudget);
                    }
                }
            }
            _ => errs.push(ParamViolation::ModulusTooLarge),
        }

        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }
}

/// Largest noise magnitude that still decrypts correctly for every message:
/// `|t v - (q mod t) m| < q/2` for all `m < t`.
pub(crate) fn noise_budget(q: u128, t: u64) -> u128 {
    let t = t as u128;
    let slack = 2 * (q % t) * (t - 1) + 1;
    if q <= slack {
        return 0;
    }
    (q - slack) / (2 * t)
}

/// Named parameter sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BfvProfile {
    /// `n = 4096`: fast enough for interactive use.
    #[default]
    Desk,
    /// `n = 16384`, the ring size used in the reference configuration.
    Full,
}

impl BfvProfile {
    pub fn params(self) -> BfvParams {
        match self {
            BfvProfile::Desk => BfvParams::desk(),
            BfvProfile::Full => BfvParams::full(),
        }
    }
}

impl fmt::Display for BfvProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BfvProfile::Desk => "desk",
            BfvProfile::Full => "full",
        })
    }
}

impl FromStr for BfvProfile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "desk" => Ok(BfvProfile::Desk),
            "full" => Ok(BfvProfile::Full),
            _ => Err(format!("unknown BFV profile '{s}' (expected desk or full)")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_plaintext_modulus_is_ntt_friendly_to_16384() {
        assert!(is_prime_u64(DEFAULT_PLAINTEXT_MOD));
        assert_eq!((DEFAULT_PLAINTEXT_MOD - 1) % 32768, 0);
        assert_eq!(64 - DEFAULT_PLAINTEXT_MOD.leading_zeros(), 46);
    }

    #[test]
    fn reference_parameter_sets_validate() {
        assert_eq!(BfvParams::full().validate(), Ok(()));
        assert_eq!(BfvParams::desk().validate(), Ok(()));
        let small_t = BfvParams { plaintext_mod: 65537, ..BfvParams::desk() };
        assert_eq!(small_t.validate(), Ok(()));
    }

    #[test]
    fn composite_plaintext_rejected() {
        let p = BfvParams { plaintext_mod: 65536, ..BfvParams::desk() };
        let errs = p.validate().unwrap_err();
        assert!(errs.contains(&ParamViolation::PlaintextNotPrime(65536)));
    }

    #[test]
    fn single_word_modulus_is_too_small_for_default_t() {
        let p = BfvParams { moduli: ntt_primes(4096, 62, 1), ..BfvParams::desk() };
        let errs = p.validate().unwrap_err();
        assert!(matches!(errs[..], [ParamViolation::RatioTooSmall { .. }]), "{errs:?}");
    }

    #[test]
    fn reports_every_violation() {
        let p = BfvParams { ring_dim: 1000, plaintext_mod: 4, moduli: vec![15, 15], err_stddev: -1.0 };
        let errs = p.validate().unwrap_err();
        assert!(errs.contains(&ParamViolation::RingDim(1000)));
        assert!(errs.contains(&ParamViolation::PlaintextNotPrime(4)));
        assert!(errs.contains(&ParamViolation::Sigma(-1.0)));
        assert!(errs.contains(&ParamViolation::FactorNotPrime(15)));
        assert!(errs.contains(&ParamViolation::FactorRepeated(15)));
    }

    #[test]
    fn overflowing_modulus_rejected() {
        let p = BfvParams { moduli: ntt_primes(4096, 62, 3), ..BfvParams::desk() };
        assert!(p.validate().unwrap_err().contains(&ParamViolation::ModulusTooLarge));
    }

    #[test]
    fn budget_formula_small_cases() {
        // q = 97, t = 5: q mod t = 2, slack = 2*2*4 + 1 = 17, (97 - 17) / 10 = 8
        assert_eq!(noise_budget(97, 5), 8);
        assert_eq!(noise_budget(17, 5), 0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn rejects_t_not_one_mod_2n(half in 1u64..(1u64 << 40)) {
            let t = 2 * half + 1;
            let p = BfvParams { plaintext_mod: t, ..BfvParams::desk() };
            let congruent = (t - 1) % 8192 == 0;
            let flagged = p.validate().err().is_some_and(|e| {
                e.iter().any(|v| matches!(v, ParamViolation::PlaintextNotCongruent { .. }))
            });
            prop_assert_eq!(flagged, !congruent);
        }
    }
}
