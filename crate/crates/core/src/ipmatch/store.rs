use std::collections::{BTreeMap, HashSet};
use std::fmt;

use num_bigint::BigUint;

use super::{CidrEntry, MatchError};
use crate::bfv::{self, BfvContext};
use crate::keys::{AnyPublicKey, SchemeKind};
use crate::numtheory::RandomSource;
use crate::phe::{self, SchemeId};

/// Values compared by the protocols are 32-bit addresses; message spaces
/// must hold them and their differences without wrapping to zero.
const ADDRESS_SPACE: u64 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StoreKind {
    Phe(SchemeId),
    /// One BFV ciphertext per entry, the network in coefficient 0.
    Bfv,
    /// Up to `n` entries of one prefix group per BFV ciphertext.
    BfvPacked,
}

impl StoreKind {
    pub fn scheme(self) -> SchemeKind {
        match self {
            StoreKind::Phe(id) => SchemeKind::Phe(id),
            StoreKind::Bfv | StoreKind::BfvPacked => SchemeKind::Bfv,
        }
    }
}

impl fmt::Display for StoreKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StoreKind::Phe(id) => f.write_str(id.name()),
            StoreKind::Bfv => f.write_str("bfv"),
            StoreKind::BfvPacked => f.write_str("bfv (packed)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StoredCiphertext {
    Phe(phe::Ciphertext),
    Bfv(bfv::Ciphertext),
}

/// One stored ciphertext and the entry ids it covers, in slot order.
/// Unpacked entries cover exactly one id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoreEntry {
    pub ids: Vec<u64>,
    pub ciphertext: StoredCiphertext,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncryptedStore {
    pub kind: StoreKind,
    /// Prefix length to entries, in input order within each group.
    pub groups: BTreeMap<u8, Vec<StoreEntry>>,
}

impl EncryptedStore {
    /// Logical entries (packed ciphertexts count each slot in use).
    pub fn entry_count(&self) -> usize {
        self.groups.values().flatten().map(|e| e.ids.len()).sum()
    }

    pub fn ciphertext_count(&self) -> usize {
        self.groups.values().map(Vec::len).sum()
    }

    pub fn group_sizes(&self) -> BTreeMap<u8, usize> {
        self.groups.iter().map(|(&p, es)| (p, es.iter().map(|e| e.ids.len()).sum())).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BuildReport {
    pub input: usize,
    pub stored: usize,
    /// Ids of entries dropped as repeats of an earlier `(network, prefix)`.
    pub duplicate_ids: Vec<u64>,
    pub group_sizes: BTreeMap<u8, usize>,
}

pub(crate) fn check_phe_capacity(pk: &phe::PublicKey) -> Result<(), MatchError> {
    if pk.message_bound() < BigUint::from(ADDRESS_SPACE) {
        return Err(MatchError::MessageSpaceTooSmall { scheme: SchemeKind::Phe(pk.scheme()) });
    }
    Ok(())
}

pub(crate) fn check_bfv_capacity(ctx: &BfvContext) -> Result<(), MatchError> {
    // t - 1 serves as the padding sentinel and must lie outside the address range
    if ctx.plaintext_mod() <= ADDRESS_SPACE {
        return Err(MatchError::MessageSpaceTooSmall { scheme: SchemeKind::Bfv });
    }
    Ok(())
}

/// Masks, deduplicates, groups and encrypts `entries` (id, CIDR).
pub fn build_store(
    entries: &[(u64, CidrEntry)],
    key: &AnyPublicKey,
    packed: bool,
    rng: &mut RandomSource,
) -> Result<(EncryptedStore, BuildReport), MatchError> {
    if entries.is_empty() {
        return Err(MatchError::EmptyStore);
    }
    let mut seen = HashSet::new();
    let mut report = BuildReport { input: entries.len(), ..BuildReport::default() };
    let mut plain: BTreeMap<u8, Vec<(u64, u32)>> = BTreeMap::new();
    for &(id, entry) in entries {
        let network = entry.network.0 & entry.mask();
        if seen.insert((network, entry.prefix_len)) {
            plain.entry(entry.prefix_len).or_default().push((id, network));
        } else {
            report.duplicate_ids.push(id);
        }
    }
    report.stored = seen.len();
    report.group_sizes = plain.iter().map(|(&p, v)| (p, v.len())).collect();

    let kind = match (key, packed) {
        (AnyPublicKey::Phe(pk), false) => StoreKind::Phe(pk.scheme()),
        (AnyPublicKey::Bfv { .. }, false) => StoreKind::Bfv,
        (AnyPublicKey::Bfv { .. }, true) => StoreKind::BfvPacked,
        (AnyPublicKey::Phe(_), true) => return Err(MatchError::PackingRequiresBfv),
    };

    let mut groups = BTreeMap::new();
    for (prefix, items) in plain {
        let stored = match key {
            AnyPublicKey::Phe(pk) => {
                check_phe_capacity(pk)?;
                items
                    .iter()
                    .map(|&(id, net)| {
                        let ct = pk.encrypt(&BigUint::from(net), rng)?;
                        Ok(StoreEntry { ids: vec![id], ciphertext: StoredCiphertext::Phe(ct) })
                    })
                    .collect::<Result<Vec<_>, MatchError>>()?
            }
            AnyPublicKey::Bfv { context, public } => {
                check_bfv_capacity(context)?;
                let per_ct = if packed { context.ring_dim() } else { 1 };
                let sentinel = context.plaintext_mod() - 1;
                items
                    .chunks(per_ct)
                    .map(|chunk| {
                        let mut values: Vec<u64> = chunk.iter().map(|&(_, net)| net as u64).collect();
                        if packed {
                            values.resize(context.ring_dim(), sentinel);
                        }
                        let ct = context.encrypt(public, &context.encode(&values)?, rng)?;
                        Ok(StoreEntry {
                            ids: chunk.iter().map(|&(id, _)| id).collect(),
                            ciphertext: StoredCiphertext::Bfv(ct),
                        })
                    })
                    .collect::<Result<Vec<_>, MatchError>>()?
            }
        };
        groups.insert(prefix, stored);
    }
    Ok((EncryptedStore { kind, groups }, report))
}

/// Assigns ids `0..len` in input order.
pub fn indexed(entries: &[CidrEntry]) -> Vec<(u64, CidrEntry)> {
    entries.iter().enumerate().map(|(i, &e)| (i as u64, e)).collect()
}
