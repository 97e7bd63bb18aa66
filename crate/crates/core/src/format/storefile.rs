//! Binary store files. All integers are big-endian.
//!
//! ```text
//! "HELB" | version u8 | scheme u8 | group count u32
//! per group:  prefix u8 | entry count u32
//! per entry:  id u64 | element count u32 | elements
//! element:    length u32 | magnitude bytes (zero is empty)
//! ```
//!
//! Scheme bytes 1-6 are the PHE schemes, 7 is BFV and 8 packed BFV. A BFV
//! entry's elements are the `c0` coefficients followed by `c1`; a packed
//! entry starts with its slot count `k` and the `k - 1` ids after the first.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use super::FormatError;
use crate::bfv::{self, RingPoly};
use crate::ipmatch::{EncryptedStore, StoreEntry, StoreKind, StoredCiphertext};
use crate::phe::{self, SchemeId};

pub const STORE_MAGIC: &[u8; 4] = b"HELB";
pub const STORE_VERSION: u8 = 1;

fn scheme_byte(kind: StoreKind) -> u8 {
    match kind {
        StoreKind::Phe(SchemeId::Paillier) => 1,
        StoreKind::Phe(SchemeId::DamgardJurik) => 2,
        StoreKind::Phe(SchemeId::OkamotoUchiyama) => 3,
        StoreKind::Phe(SchemeId::Benaloh) => 4,
        StoreKind::Phe(SchemeId::NaccacheStern) => 5,
        StoreKind::Phe(SchemeId::GoldwasserMicali) => 6,
        StoreKind::Bfv => 7,
        StoreKind::BfvPacked => 8,
    }
}

fn kind_from_byte(b: u8) -> Result<StoreKind, FormatError> {
    Ok(match b {
        1 => StoreKind::Phe(SchemeId::Paillier),
        2 => StoreKind::Phe(SchemeId::DamgardJurik),
        3 => StoreKind::Phe(SchemeId::OkamotoUchiyama),
        4 => StoreKind::Phe(SchemeId::Benaloh),
        5 => StoreKind::Phe(SchemeId::NaccacheStern),
        6 => StoreKind::Phe(SchemeId::GoldwasserMicali),
        7 => StoreKind::Bfv,
        8 => StoreKind::BfvPacked,
        _ => return Err(FormatError::UnknownSchemeByte(b)),
    })
}

fn put_u32(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(&u32::try_from(v).expect("count fits in u32").to_be_bytes());
}

fn put_element(out: &mut Vec<u8>, bytes: &[u8]) {
    put_u32(out, bytes.len());
    out.extend_from_slice(bytes);
}

fn put_big(out: &mut Vec<u8>, v: &BigUint) {
    if v.bits() == 0 {
        put_element(out, &[]);
    } else {
        put_element(out, &v.to_bytes_be());
    }
}

fn put_u128(out: &mut Vec<u8>, v: u128) {
    let bytes = v.to_be_bytes();
    let skip = bytes.iter().take_while(|&&b| b == 0).count();
    put_element(out, &bytes[skip..]);
}

pub fn write_store(store: &EncryptedStore) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(STORE_MAGIC);
    out.push(STORE_VERSION);
    out.push(scheme_byte(store.kind));
    put_u32(&mut out, store.groups.len());
    for (&prefix, entries) in &store.groups {
        out.push(prefix);
        put_u32(&mut out, entries.len());
        for entry in entries {
            out.extend_from_slice(&entry.ids[0].to_be_bytes());
            match &entry.ciphertext {
                StoredCiphertext::Phe(ct) => {
                    put_u32(&mut out, ct.payload.len());
                    ct.payload.iter().for_each(|v| put_big(&mut out, v));
                }
                StoredCiphertext::Bfv(ct) => {
                    let n = ct.c0.coeffs.len();
                    let header = if store.kind == StoreKind::BfvPacked { entry.ids.len() } else { 0 };
                    put_u32(&mut out, header + 2 * n);
                    if store.kind == StoreKind::BfvPacked {
                        put_u128(&mut out, entry.ids.len() as u128);
                        entry.ids[1..].iter().for_each(|&id| put_u128(&mut out, id as u128));
                    }
                    ct.c0.coeffs.iter().chain(&ct.c1.coeffs).for_each(|&c| put_u128(&mut out, c));
                }
            }
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], FormatError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or(FormatError::Truncated)?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, FormatError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<usize, FormatError> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]) as usize)
    }

    fn u64(&mut self) -> Result<u64, FormatError> {
        let b = self.take(8)?;
        Ok(u64::from_be_bytes(b.try_into().expect("8 bytes")))
    }

    fn element(&mut self) -> Result<&'a [u8], FormatError> {
        let len = self.u32()?;
        let bytes = self.take(len)?;
        if bytes.first() == Some(&0) {
            return Err(FormatError::Malformed("element has a leading zero byte".into()));
        }
        Ok(bytes)
    }

    fn big(&mut self) -> Result<BigUint, FormatError> {
        Ok(BigUint::from_bytes_be(self.element()?))
    }

    fn u128(&mut self) -> Result<u128, FormatError> {
        let bytes = self.element()?;
        if bytes.len() > 16 {
            return Err(FormatError::Malformed("BFV coefficient exceeds 128 bits".into()));
        }
        Ok(bytes.iter().fold(0u128, |acc, &b| acc << 8 | b as u128))
    }

    /// Counts are bounded by the bytes left so a corrupt header cannot
    /// trigger a huge allocation.
    fn count(&mut self, min_bytes_each: usize) -> Result<usize, FormatError> {
        let n = self.u32()?;
        if n.saturating_mul(min_bytes_each) > self.buf.len() - self.pos {
            return Err(FormatError::Truncated);
        }
        Ok(n)
    }
}

pub fn read_store(bytes: &[u8]) -> Result<EncryptedStore, FormatError> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(4).map_err(|_| FormatError::BadMagic)? != STORE_MAGIC {
        return Err(FormatError::BadMagic);
    }
    let version = r.u8()?;
    if version != STORE_VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }
    let kind = kind_from_byte(r.u8()?)?;
    let group_count = r.count(5)?;
    let mut groups = BTreeMap::new();
    for _ in 0..group_count {
        let prefix = r.u8()?;
        if prefix > 32 {
            return Err(FormatError::Malformed(format!("prefix length {prefix}")));
        }
        let entry_count = r.count(12)?;
        let mut entries = Vec::with_capacity(entry_count);
        for _ in 0..entry_count {
            let id = r.u64()?;
            let elements = r.count(4)?;
            entries.push(read_entry(&mut r, kind, id, elements)?);
        }
        if groups.insert(prefix, entries).is_some() {
            return Err(FormatError::Malformed(format!("prefix group {prefix} repeated")));
        }
    }
    if r.pos != bytes.len() {
        return Err(FormatError::TrailingBytes(bytes.len() - r.pos));
    }
    Ok(EncryptedStore { kind, groups })
}

fn read_entry(r: &mut Reader<'_>, kind: StoreKind, id: u64, elements: usize) -> Result<StoreEntry, FormatError> {
    let mut ids = vec![id];
    let ciphertext = match kind {
        StoreKind::Phe(scheme) => {
            let expected_one = scheme != SchemeId::GoldwasserMicali;
            if elements == 0 || (expected_one && elements != 1) {
                return Err(FormatError::Malformed(format!("{scheme} entry with {elements} elements")));
            }
            let payload = (0..elements).map(|_| r.big()).collect::<Result<Vec<_>, _>>()?;
            StoredCiphertext::Phe(phe::Ciphertext { scheme, payload })
        }
        StoreKind::Bfv | StoreKind::BfvPacked => {
            let mut rest = elements;
            if kind == StoreKind::BfvPacked {
                let k = r.u128()?.to_usize().filter(|&k| k >= 1 && k <= elements).ok_or_else(|| {
                    FormatError::Malformed("packed slot count out of range".into())
                })?;
                for _ in 1..k {
                    let extra = r.u128()?.to_u64().ok_or_else(|| FormatError::Malformed("entry id exceeds 64 bits".into()))?;
                    ids.push(extra);
                }
                rest -= k;
            }
            if rest == 0 || !rest.is_multiple_of(2) {
                return Err(FormatError::Malformed(format!("BFV entry with {rest} coefficients")));
            }
            let coeffs = (0..rest).map(|_| r.u128()).collect::<Result<Vec<_>, _>>()?;
            let (c0, c1) = coeffs.split_at(rest / 2);
            StoredCiphertext::Bfv(bfv::Ciphertext {
                c0: RingPoly { coeffs: c0.to_vec() },
                c1: RingPoly { coeffs: c1.to_vec() },
                ops: 0,
            })
        }
    };
    Ok(StoreEntry { ids, ciphertext })
}
