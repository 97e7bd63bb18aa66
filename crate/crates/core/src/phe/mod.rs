//! Partially homomorphic schemes behind one capability interface.
//!
//! Each scheme lives in its own module with plain `BigUint` ciphertexts;
//! [`PublicKey`], [`KeyPair`] and [`Ciphertext`] wrap them with a scheme tag
//! so callers (the matching protocols, the CLI) can stay scheme-agnostic.

pub mod benaloh;
pub mod damgard_jurik;
pub mod goldwasser_micali;
pub mod naccache_stern;
pub mod okamoto_uchiyama;
pub mod paillier;

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Zero};
use thiserror::Error;

use crate::numtheory::{random_unit, NumError, RandomSource};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PheError {
    #[error("message outside the scheme's message space")]
    MessageOutOfRange,
    #[error("{scheme} does not support {op}")]
    CapabilityUnsupported { scheme: SchemeId, op: &'static str },
    #[error("ciphertext scheme {found} does not match key scheme {expected}")]
    SchemeMismatch { expected: SchemeId, found: SchemeId },
    #[error("bit widths differ ({left} vs {right})")]
    WidthMismatch { left: usize, right: usize },
    #[error("ciphertext is not invertible; it is malformed")]
    NotInvertible,
    #[error("decryption failed: {0}")]
    DecryptionFailure(String),
    #[error("invalid key generation options: {0}")]
    InvalidOptions(String),
    #[error("seeded randomness is only allowed in test mode")]
    SeededOutsideTestMode,
    #[error("{bits}-bit keys are below the minimum of {min} bits")]
    KeyTooSmall { bits: u64, min: u64 },
    #[error(transparent)]
    Num(#[from] NumError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeId {
    Paillier,
    DamgardJurik,
    OkamotoUchiyama,
    Benaloh,
    NaccacheStern,
    GoldwasserMicali,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Capabilities {
    pub add: bool,
    pub sub: bool,
    pub scalar_mul: bool,
    pub xor: bool,
}

impl SchemeId {
    pub const ALL: [SchemeId; 6] = [
        SchemeId::Paillier,
        SchemeId::DamgardJurik,
        SchemeId::OkamotoUchiyama,
        SchemeId::NaccacheStern,
        SchemeId::Benaloh,
        SchemeId::GoldwasserMicali,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeId::Paillier => "paillier",
            SchemeId::DamgardJurik => "damgard-jurik",
            SchemeId::OkamotoUchiyama => "okamoto-uchiyama",
            SchemeId::Benaloh => "benaloh",
            SchemeId::NaccacheStern => "naccache-stern",
            SchemeId::GoldwasserMicali => "goldwasser-micali",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SchemeId::Paillier => "Paillier",
            SchemeId::DamgardJurik => "Damgard-Jurik",
            SchemeId::OkamotoUchiyama => "Okamoto-Uchiyama",
            SchemeId::Benaloh => "Benaloh",
            SchemeId::NaccacheStern => "Naccache-Stern",
            SchemeId::GoldwasserMicali => "Goldwasser-Micali",
        }
    }

    pub fn capabilities(self) -> Capabilities {
        let additive = self != SchemeId::GoldwasserMicali;
        Capabilities {
            add: additive,
            sub: additive,
            scalar_mul: additive,
            xor: !additive,
        }
    }

    pub fn is_additive(self) -> bool {
        self.capabilities().sub
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.to_ascii_lowercase().replace(['_', ' '], "-");
        SchemeId::ALL
            .into_iter()
            .find(|id| {
                id.name() == key
                    || matches!(
                        (id, key.as_str()),
                        (SchemeId::DamgardJurik, "dj")
                            | (SchemeId::OkamotoUchiyama, "ou")
                            | (SchemeId::NaccacheStern, "ns")
                            | (SchemeId::GoldwasserMicali, "gm")
                    )
            })
            .ok_or_else(|| format!("unknown scheme '{s}'"))
    }
}

/// Key generation settings shared by all schemes; scheme-specific fields
/// are ignored by the others.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeygenOptions {
    /// Modulus size in bits (`N`, `n`, or `p` for Naccache-Stern).
    pub security_bits: u64,
    /// Allows seeded randomness and key sizes below 512 bits.
    pub test_mode: bool,
    /// Damgård-Jurik exponent `s`.
    pub dj_s: u32,
    /// Benaloh block size `r`; defaults to the smallest prime above 2^33.
    pub benaloh_block: Option<BigUint>,
    /// Naccache-Stern message width in bits (one small prime per bit).
    pub ns_width: u32,
}

pub const MIN_SECURE_BITS: u64 = 512;
pub const MIN_TEST_BITS: u64 = 16;

impl Default for KeygenOptions {
    fn default() -> Self {
        Self {
            security_bits: 2048,
            test_mode: false,
            dj_s: 1,
            benaloh_block: None,
            ns_width: naccache_stern::DEFAULT_WIDTH,
        }
    }
}

impl KeygenOptions {
    pub fn secure(bits: u64) -> Self {
        Self { security_bits: bits, ..Self::default() }
    }

    pub fn test(bits: u64) -> Self {
        Self { security_bits: bits, test_mode: true, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PublicKey {
    Paillier(paillier::PublicKey),
    DamgardJurik(damgard_jurik::PublicKey),
    OkamotoUchiyama(okamoto_uchiyama::PublicKey),
    Benaloh(benaloh::PublicKey),
    NaccacheStern(naccache_stern::PublicKey),
    GoldwasserMicali(goldwasser_micali::PublicKey),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrivateKey {
    Paillier(paillier::PrivateKey),
    DamgardJurik(damgard_jurik::PrivateKey),
    OkamotoUchiyama(okamoto_uchiyama::PrivateKey),
    Benaloh(benaloh::PrivateKey),
    NaccacheStern(naccache_stern::PrivateKey),
    GoldwasserMicali(goldwasser_micali::PrivateKey),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyPair {
    pub public: PublicKey,
    pub private: PrivateKey,
}

/// A scheme-tagged ciphertext. Additive schemes carry one group element;
/// Goldwasser-Micali carries one element per bit, most significant first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ciphertext {
    pub scheme: SchemeId,
    pub payload: Vec<BigUint>,
}

impl Ciphertext {
    fn single(scheme: SchemeId, c: BigUint) -> Self {
        Self { scheme, payload: vec![c] }
    }

    fn element(&self) -> Result<&BigUint, PheError> {
        match self.payload.as_slice() {
            [c] => Ok(c),
            _ => Err(PheError::DecryptionFailure(format!(
                "{} ciphertext must hold one element, found {}",
                self.scheme,
                self.payload.len()
            ))),
        }
    }
}

pub fn keygen(
    scheme: SchemeId,
    opts: &KeygenOptions,
    rng: &mut RandomSource,
) -> Result<KeyPair, PheError> {
    if rng.is_seeded() && !opts.test_mode {
        return Err(PheError::SeededOutsideTestMode);
    }
    let min = if opts.test_mode { MIN_TEST_BITS } else { MIN_SECURE_BITS };
    if opts.security_bits < min {
        return Err(PheError::KeyTooSmall { bits: opts.security_bits, min });
    }
    let bits = opts.security_bits;
    let (public, private) = match scheme {
        SchemeId::Paillier => {
            let (pk, sk) = paillier::keygen(bits, rng)?;
            (PublicKey::Paillier(pk), PrivateKey::Paillier(sk))
        }
        SchemeId::DamgardJurik => {
            let (pk, sk) = damgard_jurik::keygen(bits, opts.dj_s, rng)?;
            (PublicKey::DamgardJurik(pk), PrivateKey::DamgardJurik(sk))
        }
        SchemeId::OkamotoUchiyama => {
            let (pk, sk) = okamoto_uchiyama::keygen(bits, rng)?;
            (PublicKey::OkamotoUchiyama(pk), PrivateKey::OkamotoUchiyama(sk))
        }
        SchemeId::Benaloh => {
            let (pk, sk) = benaloh::keygen(bits, opts.benaloh_block.as_ref(), rng)?;
            (PublicKey::Benaloh(pk), PrivateKey::Benaloh(sk))
        }
        SchemeId::NaccacheStern => {
            let (pk, sk) = naccache_stern::keygen(bits, opts.ns_width, rng)?;
            (PublicKey::NaccacheStern(pk), PrivateKey::NaccacheStern(sk))
        }
        SchemeId::GoldwasserMicali => {
            let (pk, sk) = goldwasser_micali::keygen(bits, rng)?;
            (PublicKey::GoldwasserMicali(pk), PrivateKey::GoldwasserMicali(sk))
        }
    };
    Ok(KeyPair { public, private })
}

impl PublicKey {
    pub fn scheme(&self) -> SchemeId {
        match self {
            PublicKey::Paillier(_) => SchemeId::Paillier,
            PublicKey::DamgardJurik(_) => SchemeId::DamgardJurik,
            PublicKey::OkamotoUchiyama(_) => SchemeId::OkamotoUchiyama,
            PublicKey::Benaloh(_) => SchemeId::Benaloh,
            PublicKey::NaccacheStern(_) => SchemeId::NaccacheStern,
            PublicKey::GoldwasserMicali(_) => SchemeId::GoldwasserMicali,
        }
    }

    /// Modulus that homomorphic results wrap around, when it is public.
    /// Okamoto-Uchiyama wraps mod the secret `p`; see
    /// [`KeyPair::message_modulus`].
    pub fn message_modulus(&self) -> Option<BigUint> {
        match self {
            PublicKey::Paillier(pk) => Some(pk.n.clone()),
            PublicKey::DamgardJurik(pk) => Some(pk.message_modulus().clone()),
            PublicKey::Benaloh(pk) => Some(pk.r.clone()),
            PublicKey::NaccacheStern(pk) => Some(pk.message_modulus()),
            PublicKey::OkamotoUchiyama(_) | PublicKey::GoldwasserMicali(_) => None,
        }
    }

    /// Exclusive upper bound on messages accepted by [`encrypt`](Self::encrypt).
    pub fn message_bound(&self) -> BigUint {
        match self {
            PublicKey::Paillier(pk) => pk.n.clone(),
            PublicKey::DamgardJurik(pk) => pk.message_modulus().clone(),
            PublicKey::OkamotoUchiyama(pk) => pk.message_bound(),
            PublicKey::Benaloh(pk) => pk.r.clone(),
            PublicKey::NaccacheStern(pk) => pk.message_modulus(),
            PublicKey::GoldwasserMicali(_) => {
                BigUint::from(1u64) << goldwasser_micali::IP_WIDTH
            }
        }
    }

    fn check(&self, ct: &Ciphertext) -> Result<(), PheError> {
        if ct.scheme != self.scheme() {
            return Err(PheError::SchemeMismatch { expected: self.scheme(), found: ct.scheme });
        }
        Ok(())
    }

    fn unsupported(&self, op: &'static str) -> PheError {
        PheError::CapabilityUnsupported { scheme: self.scheme(), op }
    }

    /// Encrypts `m`; Goldwasser-Micali uses the 32-bit IPv4 width.
    pub fn encrypt(&self, m: &BigUint, rng: &mut RandomSource) -> Result<Ciphertext, PheError> {
        self.encrypt_with_width(m, goldwasser_micali::IP_WIDTH, rng)
    }

    /// Like [`encrypt`](Self::encrypt) with an explicit Goldwasser-Micali
    /// bit width (ignored by the other schemes).
    pub fn encrypt_with_width(
        &self,
        m: &BigUint,
        gm_width: u32,
        rng: &mut RandomSource,
    ) -> Result<Ciphertext, PheError> {
        let scheme = self.scheme();
        let c = match self {
            PublicKey::Paillier(pk) => pk.encrypt(m, rng)?,
            PublicKey::DamgardJurik(pk) => pk.encrypt(m, rng)?,
            PublicKey::OkamotoUchiyama(pk) => pk.encrypt(m, rng)?,
            PublicKey::Benaloh(pk) => pk.encrypt(m, rng)?,
            PublicKey::NaccacheStern(pk) => pk.encrypt(m)?,
            PublicKey::GoldwasserMicali(pk) => {
                return Ok(Ciphertext { scheme, payload: pk.encrypt(m, gm_width, rng)? })
            }
        };
        Ok(Ciphertext::single(scheme, c))
    }

    pub fn add(&self, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext, PheError> {
        self.check(a)?;
        self.check(b)?;
        if let PublicKey::GoldwasserMicali(_) = self {
            return Err(self.unsupported("add"));
        }
        let (x, y) = (a.element()?, b.element()?);
        let c = match self {
            PublicKey::Paillier(pk) => pk.add(x, y),
            PublicKey::DamgardJurik(pk) => pk.add(x, y),
            PublicKey::OkamotoUchiyama(pk) => pk.add(x, y),
            PublicKey::Benaloh(pk) => pk.add(x, y),
            PublicKey::NaccacheStern(pk) => pk.add(x, y),
            PublicKey::GoldwasserMicali(_) => unreachable!("rejected above"),
        };
        Ok(Ciphertext::single(self.scheme(), c))
    }

    pub fn sub(&self, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext, PheError> {
        self.check(a)?;
        self.check(b)?;
        if let PublicKey::GoldwasserMicali(_) = self {
            return Err(self.unsupported("sub"));
        }
        let (x, y) = (a.element()?, b.element()?);
        let c = match self {
            PublicKey::Paillier(pk) => pk.sub(x, y)?,
            PublicKey::DamgardJurik(pk) => pk.sub(x, y)?,
            PublicKey::OkamotoUchiyama(pk) => pk.sub(x, y)?,
            PublicKey::Benaloh(pk) => pk.sub(x, y)?,
            PublicKey::NaccacheStern(pk) => pk.sub(x, y)?,
            PublicKey::GoldwasserMicali(_) => unreachable!("rejected above"),
        };
        Ok(Ciphertext::single(self.scheme(), c))
    }

    pub fn scalar_mul(&self, ct: &Ciphertext, k: &BigUint) -> Result<Ciphertext, PheError> {
        self.check(ct)?;
        if let PublicKey::GoldwasserMicali(_) = self {
            return Err(self.unsupported("scalar_mul"));
        }
        let x = ct.element()?;
        let c = match self {
            PublicKey::Paillier(pk) => pk.scalar_mul(x, k),
            PublicKey::DamgardJurik(pk) => pk.scalar_mul(x, k),
            PublicKey::OkamotoUchiyama(pk) => pk.scalar_mul(x, k),
            PublicKey::Benaloh(pk) => pk.scalar_mul(x, k),
            PublicKey::NaccacheStern(pk) => pk.scalar_mul(x, k),
            PublicKey::GoldwasserMicali(_) => unreachable!("rejected above"),
        };
        Ok(Ciphertext::single(self.scheme(), c))
    }

    pub fn xor(&self, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext, PheError> {
        self.check(a)?;
        self.check(b)?;
        match self {
            PublicKey::GoldwasserMicali(pk) => Ok(Ciphertext {
                scheme: SchemeId::GoldwasserMicali,
                payload: pk.xor(&a.payload, &b.payload)?,
            }),
            _ => Err(self.unsupported("xor")),
        }
    }

    /// Multiplies the plaintext by a fresh random nonzero factor so that a
    /// later decryption reveals only whether it was zero. Schemes whose
    /// zero-test never decrypts (Benaloh, Naccache-Stern, Goldwasser-Micali)
    /// are returned unchanged.
    pub fn blind(&self, ct: &Ciphertext, rng: &mut RandomSource) -> Result<Ciphertext, PheError> {
        self.check(ct)?;
        // k must be invertible mod the message modulus so nonzero stays nonzero
        let k = match self {
            PublicKey::Paillier(pk) => random_unit(&pk.n, rng),
            PublicKey::DamgardJurik(pk) => random_unit(&pk.n, rng),
            PublicKey::OkamotoUchiyama(pk) => {
                rng.gen_biguint_range(&BigUint::one(), &pk.message_bound())
            }
            _ => return Ok(ct.clone()),
        };
        self.scalar_mul(ct, &k)
    }
}

impl KeyPair {
    pub fn scheme(&self) -> SchemeId {
        self.public.scheme()
    }

    /// Modulus that homomorphic results wrap around (needs the private key
    /// for Okamoto-Uchiyama). `None` for Goldwasser-Micali.
    pub fn message_modulus(&self) -> Option<BigUint> {
        match &self.private {
            PrivateKey::OkamotoUchiyama(sk) => Some(sk.message_modulus().clone()),
            _ => self.public.message_modulus(),
        }
    }

    pub fn decrypt(&self, ct: &Ciphertext) -> Result<BigUint, PheError> {
        self.public.check(ct)?;
        match (&self.public, &self.private) {
            (PublicKey::GoldwasserMicali(_), PrivateKey::GoldwasserMicali(sk)) => {
                sk.decrypt(&ct.payload)
            }
            (PublicKey::Paillier(pk), PrivateKey::Paillier(sk)) => sk.decrypt(pk, ct.element()?),
            (PublicKey::DamgardJurik(pk), PrivateKey::DamgardJurik(sk)) => {
                sk.decrypt(pk, ct.element()?)
            }
            (PublicKey::OkamotoUchiyama(_), PrivateKey::OkamotoUchiyama(sk)) => {
                sk.decrypt(ct.element()?)
            }
            (PublicKey::Benaloh(pk), PrivateKey::Benaloh(sk)) => sk.decrypt(pk, ct.element()?),
            (PublicKey::NaccacheStern(pk), PrivateKey::NaccacheStern(sk)) => {
                sk.decrypt(pk, ct.element()?)
            }
            _ => Err(PheError::DecryptionFailure("public and private key schemes differ".into())),
        }
    }

    /// Whether `ct` encrypts zero. Benaloh, Naccache-Stern and
    /// Goldwasser-Micali answer without recovering the plaintext.
    pub fn is_zero(&self, ct: &Ciphertext) -> Result<bool, PheError> {
        self.public.check(ct)?;
        match (&self.public, &self.private) {
            (PublicKey::Benaloh(pk), PrivateKey::Benaloh(sk)) => Ok(sk.is_zero(pk, ct.element()?)),
            (PublicKey::NaccacheStern(pk), PrivateKey::NaccacheStern(sk)) => {
                Ok(sk.is_zero(pk, ct.element()?))
            }
            (PublicKey::GoldwasserMicali(_), PrivateKey::GoldwasserMicali(sk)) => {
                sk.is_zero(&ct.payload)
            }
            _ => Ok(self.decrypt(ct)?.is_zero()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    fn toy_keys(scheme: SchemeId, rng: &mut RandomSource) -> KeyPair {
        let mut opts = KeygenOptions::test(128);
        opts.benaloh_block = Some(big(1021));
        keygen(scheme, &opts, rng).unwrap()
    }

    #[test]
    fn scheme_names_round_trip() {
        for id in SchemeId::ALL {
            assert_eq!(id.name().parse::<SchemeId>().unwrap(), id);
        }
        assert_eq!("GM".parse::<SchemeId>().unwrap(), SchemeId::GoldwasserMicali);
        assert!("rsa".parse::<SchemeId>().is_err());
    }

    #[test]
    fn capability_sets() {
        for id in SchemeId::ALL {
            let caps = id.capabilities();
            let additive = id != SchemeId::GoldwasserMicali;
            assert_eq!((caps.add, caps.sub, caps.scalar_mul, caps.xor), (additive, additive, additive, !additive));
        }
    }

    #[test]
    fn keygen_policy() {
        let mut seeded = RandomSource::seeded(1);
        assert_eq!(
            keygen(SchemeId::Paillier, &KeygenOptions::secure(512), &mut seeded),
            Err(PheError::SeededOutsideTestMode)
        );
        let mut crypto = RandomSource::crypto();
        assert_eq!(
            keygen(SchemeId::Paillier, &KeygenOptions::secure(256), &mut crypto),
            Err(PheError::KeyTooSmall { bits: 256, min: 512 })
        );
        assert!(matches!(
            keygen(SchemeId::Paillier, &KeygenOptions::test(8), &mut seeded),
            Err(PheError::KeyTooSmall { .. })
        ));
        assert!(keygen(SchemeId::Paillier, &KeygenOptions::test(16), &mut seeded).is_ok());
    }

    #[test]
    fn zero_message_for_every_scheme() {
        let mut rng = RandomSource::seeded(50);
        for id in SchemeId::ALL {
            let keys = toy_keys(id, &mut rng);
            let c = keys.public.encrypt(&BigUint::zero(), &mut rng).unwrap();
            assert_eq!(keys.decrypt(&c).unwrap(), BigUint::zero(), "{id}");
            assert!(keys.is_zero(&c).unwrap(), "{id}");
        }
    }

    #[test]
    fn capability_errors() {
        let mut rng = RandomSource::seeded(51);
        let gm = toy_keys(SchemeId::GoldwasserMicali, &mut rng);
        let c = gm.public.encrypt(&big(5), &mut rng).unwrap();
        assert!(matches!(gm.public.add(&c, &c), Err(PheError::CapabilityUnsupported { .. })));
        assert!(matches!(gm.public.sub(&c, &c), Err(PheError::CapabilityUnsupported { .. })));
        assert!(matches!(
            gm.public.scalar_mul(&c, &big(2)),
            Err(PheError::CapabilityUnsupported { .. })
        ));
        let pa = toy_keys(SchemeId::Paillier, &mut rng);
        let d = pa.public.encrypt(&big(5), &mut rng).unwrap();
        assert!(matches!(pa.public.xor(&d, &d), Err(PheError::CapabilityUnsupported { .. })));
        assert!(matches!(pa.public.sub(&d, &c), Err(PheError::SchemeMismatch { .. })));
    }

    #[test]
    fn blinding_preserves_zero_and_hides_value() {
        let mut rng = RandomSource::seeded(52);
        for id in [SchemeId::Paillier, SchemeId::DamgardJurik, SchemeId::OkamotoUchiyama] {
            let keys = toy_keys(id, &mut rng);
            let a = keys.public.encrypt(&big(1000), &mut rng).unwrap();
            let b = keys.public.encrypt(&big(1000), &mut rng).unwrap();
            let c = keys.public.encrypt(&big(1001), &mut rng).unwrap();
            let same = keys.public.blind(&keys.public.sub(&a, &b).unwrap(), &mut rng).unwrap();
            let diff = keys.public.blind(&keys.public.sub(&c, &a).unwrap(), &mut rng).unwrap();
            assert!(keys.is_zero(&same).unwrap());
            assert!(!keys.is_zero(&diff).unwrap());
            assert_ne!(keys.decrypt(&diff).unwrap(), big(1), "{id} leaked the raw difference");
        }
    }
}
