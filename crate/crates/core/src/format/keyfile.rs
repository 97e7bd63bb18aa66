//! Text key files:
//!
//! ```text
//! HELB-KEY v1
//! scheme = paillier
//! part = private
//! n = 9f3c...
//! ```
//!
//! Integers are lowercase hex, lists are comma-separated. Private files
//! repeat the public fields so either file can be used to encrypt.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use super::{bad, FormatError};
use crate::bfv::{self, BfvContext, BfvParams, RingPoly};
use crate::keys::{AnyKeyPair, AnyPublicKey, SchemeKind};
use crate::phe::{
    benaloh, damgard_jurik, goldwasser_micali, naccache_stern, okamoto_uchiyama, paillier,
    KeyPair, PrivateKey, PublicKey,
};

pub const KEY_HEADER: &str = "HELB-KEY v1";

type Field = (&'static str, String);

fn hex(v: &BigUint) -> String {
    format!("{v:x}")
}

fn hex_list<'a>(vs: impl IntoIterator<Item = &'a BigUint>) -> String {
    vs.into_iter().map(hex).collect::<Vec<_>>().join(",")
}

fn poly_hex(p: &RingPoly) -> String {
    p.coeffs.iter().map(|c| format!("{c:x}")).collect::<Vec<_>>().join(",")
}

fn public_fields(pk: &AnyPublicKey) -> Vec<Field> {
    match pk {
        AnyPublicKey::Phe(PublicKey::Paillier(k)) => vec![("n", hex(&k.n)), ("g", hex(&k.g))],
        AnyPublicKey::Phe(PublicKey::DamgardJurik(k)) => {
            vec![("n", hex(&k.n)), ("g", hex(&k.g)), ("s", format!("{:x}", k.s))]
        }
        AnyPublicKey::Phe(PublicKey::OkamotoUchiyama(k)) => {
            vec![("n", hex(&k.n)), ("g", hex(&k.g)), ("h", hex(&k.h))]
        }
        AnyPublicKey::Phe(PublicKey::Benaloh(k)) => {
            vec![("y", hex(&k.y)), ("r", hex(&k.r)), ("n", hex(&k.n))]
        }
        AnyPublicKey::Phe(PublicKey::NaccacheStern(k)) => vec![("p", hex(&k.p)), ("v", hex_list(&k.v))],
        AnyPublicKey::Phe(PublicKey::GoldwasserMicali(k)) => vec![("n", hex(&k.n)), ("a", hex(&k.a))],
        AnyPublicKey::Bfv { context, public } => {
            let p = context.params();
            vec![
                ("ring_dim", format!("{:x}", p.ring_dim)),
                ("plaintext_mod", format!("{:x}", p.plaintext_mod)),
                (
                    "ciphertext_mod",
                    p.moduli.iter().map(|m| format!("{m:x}")).collect::<Vec<_>>().join(","),
                ),
                ("sigma", format!("{}", p.err_stddev)),
                ("pk0", poly_hex(&public.pk0)),
                ("pk1", poly_hex(&public.pk1)),
            ]
        }
    }
}

fn private_fields(kp: &AnyKeyPair) -> Vec<Field> {
    match kp {
        AnyKeyPair::Phe(KeyPair { private, .. }) => match private {
            PrivateKey::Paillier(k) => vec![("lambda", hex(&k.lambda)), ("mu", hex(&k.mu))],
            PrivateKey::DamgardJurik(k) => vec![("lambda", hex(&k.lambda)), ("d", hex(&k.d))],
            PrivateKey::OkamotoUchiyama(k) => vec![("p", hex(&k.p)), ("q", hex(&k.q))],
            PrivateKey::Benaloh(k) => vec![("p", hex(&k.p)), ("q", hex(&k.q)), ("x", hex(&k.x))],
            PrivateKey::NaccacheStern(k) => vec![("s", hex(&k.s))],
            PrivateKey::GoldwasserMicali(k) => vec![("p", hex(&k.p)), ("q", hex(&k.q))],
        },
        AnyKeyPair::Bfv { context, keys } => {
            let s = keys
                .secret
                .s
                .iter()
                .map(|&v| format!("{:x}", context.ring().reduce_signed(v as i128)))
                .collect::<Vec<_>>()
                .join(",");
            vec![("s", s)]
        }
    }
}

fn render(kind: SchemeKind, private: bool, fields: &[Field]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{KEY_HEADER}");
    let _ = writeln!(out, "scheme = {}", kind.name());
    let _ = writeln!(out, "part = {}", if private { "private" } else { "public" });
    for (name, value) in fields {
        let _ = writeln!(out, "{name} = {value}");
    }
    out
}

pub fn public_key_to_string(pk: &AnyPublicKey) -> String {
    render(pk.kind(), false, &public_fields(pk))
}

pub fn key_pair_to_string(kp: &AnyKeyPair) -> String {
    let mut fields = public_fields(&kp.public());
    fields.extend(private_fields(kp));
    render(kp.kind(), true, &fields)
}

struct Fields {
    map: HashMap<String, String>,
}

impl Fields {
    fn raw(&self, name: &'static str) -> Result<&str, FormatError> {
        self.map.get(name).map(String::as_str).ok_or(FormatError::MissingField(name))
    }

    fn big(&self, name: &'static str) -> Result<BigUint, FormatError> {
        parse_hex(name, self.raw(name)?)
    }

    /// Hex integer that must be at least `min`.
    fn big_min(&self, name: &'static str, min: u32) -> Result<BigUint, FormatError> {
        let v = self.big(name)?;
        if v < BigUint::from(min) {
            return Err(bad(name, format!("must be at least {min}")));
        }
        Ok(v)
    }

    fn big_list(&self, name: &'static str) -> Result<Vec<BigUint>, FormatError> {
        self.raw(name)?.split(',').map(|s| parse_hex(name, s)).collect()
    }

    fn u64(&self, name: &'static str) -> Result<u64, FormatError> {
        self.big(name)?.to_u64().ok_or_else(|| bad(name, "does not fit in 64 bits"))
    }
}

fn parse_hex(field: &str, s: &str) -> Result<BigUint, FormatError> {
    let s = s.trim();
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(bad(field, "expected a hexadecimal integer"));
    }
    BigUint::parse_bytes(s.as_bytes(), 16).ok_or_else(|| bad(field, "expected a hexadecimal integer"))
}

fn parse_poly(field: &'static str, f: &Fields, context: &BfvContext) -> Result<RingPoly, FormatError> {
    let q = context.ciphertext_mod();
    let coeffs = f
        .raw(field)?
        .split(',')
        .map(|s| {
            parse_hex(field, s)?
                .to_u128()
                .filter(|&c| c < q)
                .ok_or_else(|| bad(field, "coefficient not below the ciphertext modulus"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if coeffs.len() != context.ring_dim() {
        return Err(bad(field, format!("expected {} coefficients, found {}", context.ring_dim(), coeffs.len())));
    }
    Ok(RingPoly { coeffs })
}

fn public_names(kind: SchemeKind) -> &'static [&'static str] {
    use crate::phe::SchemeId::*;
    match kind {
        SchemeKind::Phe(Paillier) => &["n", "g"],
        SchemeKind::Phe(DamgardJurik) => &["n", "g", "s"],
        SchemeKind::Phe(OkamotoUchiyama) => &["n", "g", "h"],
        SchemeKind::Phe(Benaloh) => &["y", "r", "n"],
        SchemeKind::Phe(NaccacheStern) => &["p", "v"],
        SchemeKind::Phe(GoldwasserMicali) => &["n", "a"],
        SchemeKind::Bfv => &["ring_dim", "plaintext_mod", "ciphertext_mod", "sigma", "pk0", "pk1"],
    }
}

fn private_names(kind: SchemeKind) -> &'static [&'static str] {
    use crate::phe::SchemeId::*;
    match kind {
        SchemeKind::Phe(Paillier) => &["lambda", "mu"],
        SchemeKind::Phe(DamgardJurik) => &["lambda", "d"],
        SchemeKind::Phe(OkamotoUchiyama) | SchemeKind::Phe(GoldwasserMicali) => &["p", "q"],
        SchemeKind::Phe(Benaloh) => &["p", "q", "x"],
        SchemeKind::Phe(NaccacheStern) | SchemeKind::Bfv => &["s"],
    }
}

/// Splits a key file into its scheme, part, and remaining fields.
fn parse_text(text: &str) -> Result<(SchemeKind, bool, Fields), FormatError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('#')
    });
    match lines.next() {
        Some((_, l)) if l.trim() == KEY_HEADER => {}
        _ => return Err(FormatError::BadHeader),
    }
    let mut map = HashMap::new();
    for (i, line) in lines {
        let (name, value) = line.split_once('=').ok_or(FormatError::BadLine { line: i + 1 })?;
        let name = name.trim().to_string();
        if name.is_empty() {
            return Err(FormatError::BadLine { line: i + 1 });
        }
        if map.insert(name.clone(), value.trim().to_string()).is_some() {
            return Err(FormatError::DuplicateField(name));
        }
    }
    let scheme = map.remove("scheme").ok_or(FormatError::MissingField("scheme"))?;
    let kind: SchemeKind = scheme.parse().map_err(|_| FormatError::UnknownScheme(scheme.clone()))?;
    let private = match map.remove("part").as_deref() {
        Some("public") => false,
        Some("private") => true,
        Some(other) => return Err(bad("part", format!("expected public or private, found '{other}'"))),
        None => return Err(FormatError::MissingField("part")),
    };
    let mut allowed: HashSet<&str> = public_names(kind).iter().copied().collect();
    if private {
        allowed.extend(private_names(kind));
    }
    if let Some(unknown) = map.keys().find(|k| !allowed.contains(k.as_str())) {
        return Err(FormatError::UnknownField(unknown.clone()));
    }
    Ok((kind, private, Fields { map }))
}

fn build_public(kind: SchemeKind, f: &Fields) -> Result<AnyPublicKey, FormatError> {
    use crate::phe::SchemeId::*;
    let phe = |e: crate::phe::PheError| bad("key", e.to_string());
    let pk = match kind {
        SchemeKind::Phe(Paillier) => PublicKey::Paillier(paillier::PublicKey::new(f.big_min("n", 3)?, f.big_min("g", 1)?)),
        SchemeKind::Phe(DamgardJurik) => {
            let s = f.u64("s")?.try_into().map_err(|_| bad("s", "out of range"))?;
            PublicKey::DamgardJurik(
                damgard_jurik::PublicKey::new(f.big_min("n", 3)?, f.big_min("g", 1)?, s).map_err(phe)?,
            )
        }
        SchemeKind::Phe(OkamotoUchiyama) => PublicKey::OkamotoUchiyama(okamoto_uchiyama::PublicKey {
            n: f.big_min("n", 8)?,
            g: f.big_min("g", 1)?,
            h: f.big_min("h", 1)?,
        }),
        SchemeKind::Phe(Benaloh) => PublicKey::Benaloh(benaloh::PublicKey {
            y: f.big_min("y", 1)?,
            r: f.big_min("r", 3)?,
            n: f.big_min("n", 3)?,
        }),
        SchemeKind::Phe(NaccacheStern) => PublicKey::NaccacheStern(
            naccache_stern::PublicKey::new(f.big_min("p", 3)?, f.big_list("v")?).map_err(phe)?,
        ),
        SchemeKind::Phe(GoldwasserMicali) => PublicKey::GoldwasserMicali(goldwasser_micali::PublicKey {
            n: f.big_min("n", 3)?,
            a: f.big_min("a", 1)?,
        }),
        SchemeKind::Bfv => {
            let ring_dim = f.u64("ring_dim")?.try_into().map_err(|_| bad("ring_dim", "out of range"))?;
            let moduli = f
                .big_list("ciphertext_mod")?
                .iter()
                .map(|m| m.to_u64().ok_or_else(|| bad("ciphertext_mod", "factor exceeds 64 bits")))
                .collect::<Result<Vec<_>, _>>()?;
            let sigma: f64 = f.raw("sigma")?.parse().map_err(|_| bad("sigma", "expected a decimal number"))?;
            let params = BfvParams { ring_dim, plaintext_mod: f.u64("plaintext_mod")?, moduli, err_stddev: sigma };
            let context = BfvContext::new(params).map_err(|e| bad("params", e.to_string()))?;
            let public = bfv::PublicKey { pk0: parse_poly("pk0", f, &context)?, pk1: parse_poly("pk1", f, &context)? };
            return Ok(AnyPublicKey::Bfv { context, public });
        }
    };
    Ok(AnyPublicKey::Phe(pk))
}

/// Reads the public part of a public or private key file.
pub fn parse_public_key(text: &str) -> Result<AnyPublicKey, FormatError> {
    let (kind, _, fields) = parse_text(text)?;
    build_public(kind, &fields)
}

/// Reads a private key file into a full key pair.
pub fn parse_key_pair(text: &str) -> Result<AnyKeyPair, FormatError> {
    let (kind, private, f) = parse_text(text)?;
    if !private {
        return Err(FormatError::NotPrivate);
    }
    let phe = |e: crate::phe::PheError| bad("key", e.to_string());
    let (public, pk) = match build_public(kind, &f)? {
        AnyPublicKey::Phe(pk) => (pk.clone(), pk),
        AnyPublicKey::Bfv { context, public } => {
            let q = context.ciphertext_mod();
            let s = parse_poly("s", &f, &context)?
                .coeffs
                .iter()
                .map(|&c| match c {
                    0 => Ok(0i8),
                    1 => Ok(1),
                    c if c == q - 1 => Ok(-1),
                    _ => Err(bad("s", "secret coefficients must be 0, 1 or q-1")),
                })
                .collect::<Result<Vec<_>, _>>()?;
            let keys = bfv::KeyPair { public, secret: bfv::SecretKey { s } };
            return Ok(AnyKeyPair::Bfv { context, keys });
        }
    };
    let private = match &pk {
        PublicKey::Paillier(_) => PrivateKey::Paillier(paillier::PrivateKey {
            lambda: f.big_min("lambda", 1)?,
            mu: f.big_min("mu", 1)?,
        }),
        PublicKey::DamgardJurik(_) => PrivateKey::DamgardJurik(damgard_jurik::PrivateKey {
            lambda: f.big_min("lambda", 1)?,
            d: f.big_min("d", 1)?,
        }),
        PublicKey::OkamotoUchiyama(k) => {
            let (p, q) = (f.big_min("p", 3)?, f.big_min("q", 3)?);
            if (&p * &p * &q) != k.n {
                return Err(bad("p", "p^2 q does not equal n"));
            }
            PrivateKey::OkamotoUchiyama(okamoto_uchiyama::PrivateKey::new(p, q, k).map_err(phe)?)
        }
        PublicKey::Benaloh(k) => {
            let (p, q) = (f.big_min("p", 3)?, f.big_min("q", 3)?);
            if (&p * &q) != k.n {
                return Err(bad("p", "p q does not equal n"));
            }
            PrivateKey::Benaloh(benaloh::PrivateKey::new(p, q, f.big_min("x", 2)?, &k.r).map_err(phe)?)
        }
        PublicKey::NaccacheStern(_) => {
            PrivateKey::NaccacheStern(naccache_stern::PrivateKey { s: f.big_min("s", 1)? })
        }
        PublicKey::GoldwasserMicali(k) => {
            let (p, q) = (f.big_min("p", 3)?, f.big_min("q", 3)?);
            if (&p * &q) != k.n || !(&p & BigUint::one()).is_one() {
                return Err(bad("p", "p and q must be odd with p q = n"));
            }
            PrivateKey::GoldwasserMicali(goldwasser_micali::PrivateKey { p, q })
        }
    };
    Ok(AnyKeyPair::Phe(KeyPair { public, private }))
}
