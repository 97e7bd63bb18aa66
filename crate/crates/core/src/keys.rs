//! Key material for any supported scheme, PHE or BFV.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::bfv::{self, BfvContext, BfvError, BfvParams};
use crate::numtheory::RandomSource;
use crate::phe::{self, KeygenOptions, PheError, SchemeId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KeyError {
    #[error(transparent)]
    Phe(#[from] PheError),
    #[error(transparent)]
    Bfv(#[from] BfvError),
}

/// Every scheme a key or store can belong to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    Phe(SchemeId),
    Bfv,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 7] = [
        SchemeKind::Phe(SchemeId::Paillier),
        SchemeKind::Phe(SchemeId::DamgardJurik),
        SchemeKind::Phe(SchemeId::OkamotoUchiyama),
        SchemeKind::Phe(SchemeId::NaccacheStern),
        SchemeKind::Phe(SchemeId::Benaloh),
        SchemeKind::Phe(SchemeId::GoldwasserMicali),
        SchemeKind::Bfv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Phe(id) => id.name(),
            SchemeKind::Bfv => "bfv",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SchemeKind::Phe(id) => id.label(),
            SchemeKind::Bfv => "BFV",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("bfv") {
            return Ok(SchemeKind::Bfv);
        }
        s.parse::<SchemeId>().map(SchemeKind::Phe).map_err(|_| {
            let names: Vec<_> = SchemeKind::ALL.iter().map(|k| k.name()).collect();
            format!("unknown scheme '{s}' (expected one of: {})", names.join(", "))
        })
    }
}

#[derive(Debug, Clone)]
pub enum AnyPublicKey {
    Phe(phe::PublicKey),
    Bfv { context: BfvContext, public: bfv::PublicKey },
}

#[derive(Debug, Clone)]
pub enum AnyKeyPair {
    Phe(phe::KeyPair),
    Bfv { context: BfvContext, keys: bfv::KeyPair },
}

impl AnyPublicKey {
    pub fn kind(&self) -> SchemeKind {
        match self {
            AnyPublicKey::Phe(pk) => SchemeKind::Phe(pk.scheme()),
            AnyPublicKey::Bfv { .. } => SchemeKind::Bfv,
        }
    }
}

impl AnyKeyPair {
    pub fn kind(&self) -> SchemeKind {
        match self {
            AnyKeyPair::Phe(kp) => SchemeKind::Phe(kp.scheme()),
            AnyKeyPair::Bfv { .. } => SchemeKind::Bfv,
        }
    }

    /// Generates a key pair. `bfv` is used only for [`SchemeKind::Bfv`], where
    /// building the context counts as part of key setup.
    pub fn generate(
        kind: SchemeKind,
        opts: &KeygenOptions,
        bfv: &BfvParams,
        rng: &mut RandomSource,
    ) -> Result<Self, KeyError> {
        match kind {
            SchemeKind::Phe(id) => Ok(AnyKeyPair::Phe(phe::keygen(id, opts, rng)?)),
            SchemeKind::Bfv => {
                if rng.is_seeded() && !opts.test_mode {
                    return Err(PheError::SeededOutsideTestMode.into());
                }
                let context = BfvContext::new(bfv.clone())?;
                let keys = context.keygen(rng);
                Ok(AnyKeyPair::Bfv { context, keys })
            }
        }
    }

    pub fn public(&self) -> AnyPublicKey {
        match self {
            AnyKeyPair::Phe(kp) => AnyPublicKey::Phe(kp.public.clone()),
            AnyKeyPair::Bfv { context, keys } => {
                AnyPublicKey::Bfv { context: context.clone(), public: keys.public.clone() }
            }
        }
    }
}
