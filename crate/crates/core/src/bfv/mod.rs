//! Depth-0 BFV over `Z_q[x]/(x^n + 1)`: key generation, public- and
//! secret-key encryption, decryption, and ciphertext addition/subtraction.
//!
//! Plaintexts use coefficient encoding: value `i` is coefficient `i`.
//! Addition and subtraction act coefficientwise, which is all the matching
//! protocols need.

pub mod ntt;
mod params;
pub mod ring;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use thiserror::Error;

pub use params::{
    BfvParams, BfvProfile, ParamViolation, DEFAULT_PLAINTEXT_MOD, DEFAULT_SIGMA, MAX_RING_DIM,
    MIN_RATIO_BITS,
};
pub use ring::{Ring, RingPoly};

use crate::numtheory::RandomSource;
use ring::{sample_gaussian, sample_ternary};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BfvError {
    #[error("invalid BFV parameters: {}", join(.0))]
    InvalidParams(Vec<ParamViolation>),
    #[error("{given} values do not fit in {capacity} coefficients")]
    TooManyValues { given: usize, capacity: usize },
    #[error("plaintext value {value} is not below t = {t}")]
    ValueOutOfRange { value: u64, t: u64 },
    #[error("ciphertext or key does not match the parameter set")]
    ParamMismatch,
}

fn join(v: &[ParamViolation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// Plaintext polynomial with coefficients mod `t`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Plaintext {
    pub coeffs: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecretKey {
    /// Ternary coefficients in {-1, 0, 1}.
    pub s: Vec<i8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicKey {
    pub pk0: RingPoly,
    pub pk1: RingPoly,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyPair {
    pub public: PublicKey,
    pub secret: SecretKey,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ciphertext {
    pub c0: RingPoly,
    pub c1: RingPoly,
    /// Homomorphic operations folded into this ciphertext (0 when fresh).
    pub ops: u32,
}

/// Validated parameters with their precomputed ring.
#[derive(Debug, Clone)]
pub struct BfvContext {
    params: BfvParams,
    ring: Ring,
    delta: u128,
    err_bound: i64,
}

impl BfvContext {
    pub fn new(params: BfvParams) -> Result<Self, BfvError> {
        params.validate().map_err(BfvError::InvalidParams)?;
        let ring = Ring::new(params.ring_dim, &params.moduli);
        let delta = ring.modulus() / params.plaintext_mod as u128;
        let err_bound = (6.0 * params.err_stddev).floor() as i64;
        Ok(Self { params, ring, delta, err_bound })
    }

    pub fn params(&self) -> &BfvParams {
        &self.params
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn ring_dim(&self) -> usize {
        self.params.ring_dim
    }

    pub fn plaintext_mod(&self) -> u64 {
        self.params.plaintext_mod
    }

    pub fn ciphertext_mod(&self) -> u128 {
        self.ring.modulus()
    }

    /// `floor(q / t)`, the scaling applied to plaintext coefficients.
    pub fn delta(&self) -> u128 {
        self.delta
    }

    /// Largest coefficient magnitude of a sampled error term (`6 sigma`).
    pub fn error_bound(&self) -> i64 {
        self.err_bound
    }

    /// Noise bound `B0` of a fresh public-key encryption, plus `t` of slack
    /// for the plaintext wrap a subtraction can introduce.
    pub fn fresh_noise_bound(&self) -> u128 {
        (2 * self.ring_dim() as u128 + 1) * self.err_bound as u128 + self.plaintext_mod() as u128
    }

    /// Largest noise magnitude that still decrypts correctly.
    pub fn noise_budget(&self) -> u128 {
        params::noise_budget(self.ciphertext_mod(), self.plaintext_mod())
    }

    /// Conservative noise bound after `ct.ops` additions or subtractions.
    pub fn noise_bound(&self, ct: &Ciphertext) -> u128 {
        (ct.ops as u128 + 1) * self.fresh_noise_bound()
    }

    /// Fresh ciphertexts that can be summed before the bound exceeds the budget.
    pub fn max_additions(&self) -> u128 {
        (self.noise_budget() / self.fresh_noise_bound()).saturating_sub(1)
    }

    pub fn keygen(&self, rng: &mut RandomSource) -> KeyPair {
        let n = self.ring_dim();
        let s = sample_ternary(n, rng);
        let a = self.ring.sample_uniform(rng);
        let e = self.ring.from_signed(&sample_gaussian(n, self.params.err_stddev, self.err_bound, rng));
        let a_s = self.ring.mul(&a, &self.ternary_poly(&s));
        let pk0 = self.ring.neg(&self.ring.add(&a_s, &e));
        KeyPair { public: PublicKey { pk0, pk1: a }, secret: SecretKey { s } }
    }

    fn ternary_poly(&self, s: &[i8]) -> RingPoly {
        self.ring.from_signed(&s.iter().map(|&v| v as i64).collect::<Vec<_>>())
    }

    fn gaussian(&self, rng: &mut RandomSource) -> RingPoly {
        self.ring
            .from_signed(&sample_gaussian(self.ring_dim(), self.params.err_stddev, self.err_bound, rng))
    }

    /// Coefficient encoding; unused coefficients are zero.
    pub fn encode(&self, values: &[u64]) -> Result<Plaintext, BfvError> {
        let n = self.ring_dim();
        if values.len() > n {
            return Err(BfvError::TooManyValues { given: values.len(), capacity: n });
        }
        let t = self.plaintext_mod();
        if let Some(&value) = values.iter().find(|&&v| v >= t) {
            return Err(BfvError::ValueOutOfRange { value, t });
        }
        let mut coeffs = values.to_vec();
        coeffs.resize(n, 0);
        Ok(Plaintext { coeffs })
    }

    pub fn decode(&self, pt: &Plaintext) -> Vec<u64> {
        pt.coeffs.clone()
    }

    fn check_plaintext(&self, pt: &Plaintext) -> Result<(), BfvError> {
        if pt.coeffs.len() != self.ring_dim() {
            return Err(BfvError::ParamMismatch);
        }
        let t = self.plaintext_mod();
        match pt.coeffs.iter().find(|&&v| v >= t) {
            Some(&value) => Err(BfvError::ValueOutOfRange { value, t }),
            None => Ok(()),
        }
    }

    fn scaled(&self, pt: &Plaintext) -> RingPoly {
        RingPoly { coeffs: pt.coeffs.iter().map(|&m| self.delta * m as u128).collect() }
    }

    fn check_poly(&self, p: &RingPoly) -> Result<(), BfvError> {
        let q = self.ciphertext_mod();
        if p.coeffs.len() != self.ring_dim() || p.coeffs.iter().any(|&c| c >= q) {
            return Err(BfvError::ParamMismatch);
        }
        Ok(())
    }

    pub fn check_ciphertext(&self, ct: &Ciphertext) -> Result<(), BfvError> {
        self.check_poly(&ct.c0)?;
        self.check_poly(&ct.c1)
    }

    pub fn check_public_key(&self, pk: &PublicKey) -> Result<(), BfvError> {
        self.check_poly(&pk.pk0)?;
        self.check_poly(&pk.pk1)
    }

    pub fn check_secret_key(&self, sk: &SecretKey) -> Result<(), BfvError> {
        if sk.s.len() != self.ring_dim() || sk.s.iter().any(|v| !(-1..=1).contains(v)) {
            return Err(BfvError::ParamMismatch);
        }
        Ok(())
    }

    /// Public-key encryption: `(pk0 u + e1 + Δm, pk1 u + e2)`.
    pub fn encrypt(
        &self,
        pk: &PublicKey,
        pt: &Plaintext,
        rng: &mut RandomSource,
    ) -> Result<Ciphertext, BfvError> {
        self.check_plaintext(pt)?;
        self.check_public_key(pk)?;
        let u = self.ternary_poly(&sample_ternary(self.ring_dim(), rng));
        let e1 = self.gaussian(rng);
        let e2 = self.gaussian(rng);
        let r = &self.ring;
        let c0 = r.add(&r.add(&r.mul(&pk.pk0, &u), &e1), &self.scaled(pt));
        let c1 = r.add(&r.mul(&pk.pk1, &u), &e2);
        Ok(Ciphertext { c0, c1, ops: 0 })
    }

    /// Secret-key encryption: `(Δm + a s + e, -a)`.
    pub fn encrypt_symmetric(
        &self,
        sk: &SecretKey,
        pt: &Plaintext,
        rng: &mut RandomSource,
    ) -> Result<Ciphertext, BfvError> {
        self.check_plaintext(pt)?;
        self.check_secret_key(sk)?;
        let r = &self.ring;
        let a = r.sample_uniform(rng);
        let a_s = r.mul(&a, &self.ternary_poly(&sk.s));
        let c0 = r.add(&r.add(&self.scaled(pt), &a_s), &self.gaussian(rng));
        Ok(Ciphertext { c0, c1: r.neg(&a), ops: 0 })
    }

    pub fn eval_add(&self, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext, BfvError> {
        self.check_ciphertext(a)?;
        self.check_ciphertext(b)?;
        Ok(Ciphertext {
            c0: self.ring.add(&a.c0, &b.c0),
            c1: self.ring.add(&a.c1, &b.c1),
            ops: a.ops.saturating_add(b.ops).saturating_add(1),
        })
    }

    pub fn eval_sub(&self, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext, BfvError> {
        self.check_ciphertext(a)?;
        self.check_ciphertext(b)?;
        Ok(Ciphertext {
            c0: self.ring.sub(&a.c0, &b.c0),
            c1: self.ring.sub(&a.c1, &b.c1),
            ops: a.ops.saturating_add(b.ops).saturating_add(1),
        })
    }

    /// `c0 + c1 s mod q`.
    fn phase(&self, sk: &SecretKey, ct: &Ciphertext) -> RingPoly {
        let r = &self.ring;
        r.add(&ct.c0, &r.mul(&ct.c1, &self.ternary_poly(&sk.s)))
    }

    /// `round(t x / q) mod t`.
    fn round_coeff(&self, x: u128) -> u64 {
        let q = BigUint::from(self.ciphertext_mod());
        let t = self.plaintext_mod();
        let num = BigUint::from(x) * (2 * t) + &q;
        let m = num / (q << 1u32) % t;
        m.to_u64().expect("reduced mod t")
    }

    pub fn decrypt(&self, sk: &SecretKey, ct: &Ciphertext) -> Result<Plaintext, BfvError> {
        self.check_secret_key(sk)?;
        self.check_ciphertext(ct)?;
        let phase = self.phase(sk, ct);
        Ok(Plaintext { coeffs: phase.coeffs.iter().map(|&x| self.round_coeff(x)).collect() })
    }

    /// Decrypts coefficient `idx` alone in `O(n)`.
    pub fn decrypt_coeff(&self, sk: &SecretKey, ct: &Ciphertext, idx: usize) -> Result<u64, BfvError> {
        self.check_secret_key(sk)?;
        self.check_ciphertext(ct)?;
        if idx >= self.ring_dim() {
            return Err(BfvError::ParamMismatch);
        }
        let x = self.ring.add_coeff(ct.c0.coeffs[idx], self.ring.mul_ternary_coeff(&ct.c1, &sk.s, idx));
        Ok(self.round_coeff(x))
    }

    /// Largest centered coefficient of `c0 + c1 s - Δm`, the noise carried by
    /// `ct` relative to the plaintext `expected`.
    pub fn noise(&self, sk: &SecretKey, ct: &Ciphertext, expected: &Plaintext) -> Result<u128, BfvError> {
        self.check_secret_key(sk)?;
        self.check_ciphertext(ct)?;
        self.check_plaintext(expected)?;
        let v = self.ring.sub(&self.phase(sk, ct), &self.scaled(expected));
        Ok(v.coeffs.iter().map(|&c| self.ring.centered(c).unsigned_abs()).max().unwrap_or(0))
    }

    /// `pk0 + pk1 s`, which equals `-e` for a well-formed key pair.
    pub fn public_key_residual(&self, keys: &KeyPair) -> Vec<i128> {
        let r = &self.ring;
        let v = r.add(&keys.public.pk0, &r.mul(&keys.public.pk1, &self.ternary_poly(&keys.secret.s)));
        v.coeffs.iter().map(|&c| r.centered(c)).collect()
    }
}
