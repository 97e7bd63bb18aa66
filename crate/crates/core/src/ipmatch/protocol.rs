use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::thread;

use num_bigint::BigUint;

use super::store::{check_bfv_capacity, check_phe_capacity};
use super::{EncryptedStore, Ipv4, MatchError, StoreEntry, StoreKind, StoredCiphertext};
use crate::bfv::{self, BfvContext};
use crate::keys::AnyKeyPair;
use crate::numtheory::RandomSource;
use crate::phe::{self, PheError, SchemeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Protocol {
    /// Encrypted subtraction and zero-test (additive schemes, BFV).
    #[default]
    Subtract,
    /// Bitwise encrypted XOR and all-zero test (Goldwasser-Micali).
    Xor,
}

impl FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sub" | "subtract" => Ok(Protocol::Subtract),
            "xor" => Ok(Protocol::Xor),
            _ => Err(format!("unknown protocol '{s}' (expected sub or xor)")),
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::Subtract => "sub",
            Protocol::Xor => "xor",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchOptions {
    /// Test every entry instead of stopping at the first match.
    pub exhaustive: bool,
    /// Randomise differences before the zero-test (PHE schemes that decrypt).
    pub blind: bool,
    /// Record the decrypted difference of every entry tested.
    pub debug: bool,
    pub threads: usize,
}

impl Default for MatchOptions {
    fn default() -> Self {
        Self { exhaustive: false, blind: false, debug: false, threads: 1 }
    }
}

/// Work performed by a match, counted as it happens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MatchStats {
    /// Masked targets encrypted (one per prefix group scanned).
    pub target_encryptions: usize,
    /// Ciphertext subtractions or XORs.
    pub homomorphic_ops: usize,
    /// Entries (or packed slots) zero-tested.
    pub zero_tests: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntryDifference {
    pub entry_id: u64,
    pub prefix_len: u8,
    /// `None` when the scheme can only zero-test (large-block Benaloh).
    pub value: Option<BigUint>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchResult {
    pub matched: bool,
    /// First matching entry: longest prefix group first, store order within it.
    pub entry_id: Option<u64>,
    pub prefix_len: Option<u8>,
    pub stats: MatchStats,
    /// Present only with [`MatchOptions::debug`].
    pub differences: Option<Vec<EntryDifference>>,
}

/// Outcome of testing one stored ciphertext.
#[derive(Default)]
struct Eval {
    hit: Option<u64>,
    ops: usize,
    zero_tests: usize,
    diffs: Vec<EntryDifference>,
}

/// Runs `protocol` against any store kind; packed stores use the batch path.
pub fn match_ip(
    ip: Ipv4,
    store: &EncryptedStore,
    keys: &AnyKeyPair,
    protocol: Protocol,
    opts: &MatchOptions,
    rng: &mut RandomSource,
) -> Result<MatchResult, MatchError> {
    match (protocol, store.kind) {
        (Protocol::Subtract, StoreKind::BfvPacked) => match_batch_bfv(ip, store, keys, opts, rng),
        (Protocol::Subtract, _) => match_subtract(ip, store, keys, opts, rng),
        (Protocol::Xor, _) => match_xor(ip, store, keys, opts, rng),
    }
}

fn check_kind(store: &EncryptedStore, keys: &AnyKeyPair) -> Result<(), MatchError> {
    if store.kind.scheme() != keys.kind() {
        return Err(MatchError::SchemeMismatch { store: store.kind, key: keys.kind() });
    }
    Ok(())
}

fn phe_ct(entry: &StoreEntry) -> Result<&phe::Ciphertext, MatchError> {
    match &entry.ciphertext {
        StoredCiphertext::Phe(c) => Ok(c),
        StoredCiphertext::Bfv(_) => Err(MatchError::MalformedStore("BFV ciphertext in PHE store".into())),
    }
}

fn bfv_ct(entry: &StoreEntry) -> Result<&bfv::Ciphertext, MatchError> {
    match &entry.ciphertext {
        StoredCiphertext::Bfv(c) => Ok(c),
        StoredCiphertext::Phe(_) => Err(MatchError::MalformedStore("PHE ciphertext in BFV store".into())),
    }
}

fn single_id(entry: &StoreEntry) -> Result<u64, MatchError> {
    match entry.ids[..] {
        [id] => Ok(id),
        _ => Err(MatchError::MalformedStore(format!(
            "unpacked entry covers {} ids",
            entry.ids.len()
        ))),
    }
}

/// Subtraction match for additive PHE schemes and unpacked BFV stores.
pub fn match_subtract(
    ip: Ipv4,
    store: &EncryptedStore,
    keys: &AnyKeyPair,
    opts: &MatchOptions,
    rng: &mut RandomSource,
) -> Result<MatchResult, MatchError> {
    check_kind(store, keys)?;
    match (store.kind, keys) {
        (StoreKind::Phe(id), AnyKeyPair::Phe(kp)) => {
            if !id.is_additive() {
                return Err(PheError::CapabilityUnsupported { scheme: id, op: "sub" }.into());
            }
            check_phe_capacity(&kp.public)?;
            let pk = &kp.public;
            scan(
                store,
                opts,
                rng,
                |prefix, rng| Ok(pk.encrypt(&BigUint::from(ip.masked(prefix).0), rng)?),
                |target, entry, prefix, rng| {
                    let id = single_id(entry)?;
                    let diff = pk.sub(target, phe_ct(entry)?)?;
                    let tested = if opts.blind { pk.blind(&diff, rng)? } else { diff.clone() };
                    let zero = kp.is_zero(&tested)?;
                    let diffs = if opts.debug {
                        vec![EntryDifference { entry_id: id, prefix_len: prefix, value: kp.decrypt(&diff).ok() }]
                    } else {
                        Vec::new()
                    };
                    Ok(Eval { hit: zero.then_some(id), ops: 1, zero_tests: 1, diffs })
                },
            )
        }
        (StoreKind::Bfv, AnyKeyPair::Bfv { context, keys }) => {
            check_bfv_capacity(context)?;
            scan(
                store,
                opts,
                rng,
                |prefix, rng| bfv_target(context, keys, ip.masked(prefix).0, 1, rng),
                |target, entry, prefix, _| {
                    let id = single_id(entry)?;
                    let diff = context.eval_sub(target, bfv_ct(entry)?)?;
                    let v = context.decrypt_coeff(&keys.secret, &diff, 0)?;
                    let diffs = if opts.debug {
                        vec![EntryDifference { entry_id: id, prefix_len: prefix, value: Some(v.into()) }]
                    } else {
                        Vec::new()
                    };
                    Ok(Eval { hit: (v == 0).then_some(id), ops: 1, zero_tests: 1, diffs })
                },
            )
        }
        (StoreKind::BfvPacked, _) => Err(MatchError::PackedStoreNeedsBatch),
        _ => Err(MatchError::SchemeMismatch { store: store.kind, key: keys.kind() }),
    }
}

fn bfv_target(
    context: &BfvContext,
    keys: &bfv::KeyPair,
    value: u32,
    copies: usize,
    rng: &mut RandomSource,
) -> Result<bfv::Ciphertext, MatchError> {
    let pt = context.encode(&vec![value as u64; copies])?;
    Ok(context.encrypt(&keys.public, &pt, rng)?)
}

/// Bitwise XOR match for Goldwasser-Micali stores.
pub fn match_xor(
    ip: Ipv4,
    store: &EncryptedStore,
    keys: &AnyKeyPair,
    opts: &MatchOptions,
    rng: &mut RandomSource,
) -> Result<MatchResult, MatchError> {
    check_kind(store, keys)?;
    let kp = match (store.kind, keys) {
        (StoreKind::Phe(SchemeId::GoldwasserMicali), AnyKeyPair::Phe(kp)) => kp,
        (StoreKind::Phe(id), _) => {
            return Err(PheError::CapabilityUnsupported { scheme: id, op: "xor" }.into())
        }
        _ => return Err(MatchError::XorRequiresGm),
    };
    let pk = &kp.public;
    scan(
        store,
        opts,
        rng,
        |prefix, rng| Ok(pk.encrypt(&BigUint::from(ip.masked(prefix).0), rng)?),
        |target, entry, prefix, _| {
            let id = single_id(entry)?;
            let x = pk.xor(target, phe_ct(entry)?)?;
            let zero = kp.is_zero(&x)?;
            let diffs = if opts.debug {
                vec![EntryDifference { entry_id: id, prefix_len: prefix, value: kp.decrypt(&x).ok() }]
            } else {
                Vec::new()
            };
            Ok(Eval { hit: zero.then_some(id), ops: 1, zero_tests: 1, diffs })
        },
    )
}

/// Packed BFV match: one subtraction per packed ciphertext against the
/// masked target replicated across every coefficient.
pub fn match_batch_bfv(
    ip: Ipv4,
    store: &EncryptedStore,
    keys: &AnyKeyPair,
    opts: &MatchOptions,
    rng: &mut RandomSource,
) -> Result<MatchResult, MatchError> {
    check_kind(store, keys)?;
    let (context, keys) = match (store.kind, keys) {
        (StoreKind::BfvPacked, AnyKeyPair::Bfv { context, keys }) => (context, keys),
        _ => return Err(MatchError::BatchRequiresPackedStore),
    };
    check_bfv_capacity(context)?;
    scan(
        store,
        opts,
        rng,
        |prefix, rng| bfv_target(context, keys, ip.masked(prefix).0, context.ring_dim(), rng),
        |target, entry, prefix, _| {
            if entry.ids.is_empty() || entry.ids.len() > context.ring_dim() {
                return Err(MatchError::MalformedStore("packed entry slot count out of range".into()));
            }
            let diff = context.eval_sub(target, bfv_ct(entry)?)?;
            let pt = context.decrypt(&keys.secret, &diff)?;
            let slots = &pt.coeffs[..entry.ids.len()];
            let hit = slots.iter().position(|&v| v == 0).map(|i| entry.ids[i]);
            let diffs = if opts.debug {
                entry
                    .ids
                    .iter()
                    .zip(slots)
                    .map(|(&id, &v)| EntryDifference { entry_id: id, prefix_len: prefix, value: Some(v.into()) })
                    .collect()
            } else {
                Vec::new()
            };
            Ok(Eval { hit, ops: 1, zero_tests: slots.len(), diffs })
        },
    )
}

/// Scans prefix groups longest first. Results are independent of the
/// thread count: in first-match mode, work past the winning entry of a
/// parallel scan is discarded before it is counted.
fn scan<T, M, E>(
    store: &EncryptedStore,
    opts: &MatchOptions,
    rng: &mut RandomSource,
    mut make_target: M,
    eval: E,
) -> Result<MatchResult, MatchError>
where
    T: Sync,
    M: FnMut(u8, &mut RandomSource) -> Result<T, MatchError>,
    E: Fn(&T, &StoreEntry, u8, &mut RandomSource) -> Result<Eval, MatchError> + Sync,
{
    let mut result = MatchResult {
        matched: false,
        entry_id: None,
        prefix_len: None,
        stats: MatchStats::default(),
        differences: opts.debug.then(Vec::new),
    };
    for (&prefix, entries) in store.groups.iter().rev() {
        if entries.is_empty() {
            continue;
        }
        let target = make_target(prefix, rng)?;
        result.stats.target_encryptions += 1;
        let evals = if opts.threads > 1 && entries.len() > 1 {
            scan_parallel(entries, &target, prefix, opts, rng, &eval)?
        } else {
            let mut out = Vec::new();
            for entry in entries {
                let ev = eval(&target, entry, prefix, rng)?;
                let stop = ev.hit.is_some() && !opts.exhaustive;
                out.push(ev);
                if stop {
                    break;
                }
            }
            out
        };
        for ev in evals {
            result.stats.homomorphic_ops += ev.ops;
            result.stats.zero_tests += ev.zero_tests;
            if let Some(d) = result.differences.as_mut() {
                d.extend(ev.diffs);
            }
            if let (Some(id), false) = (ev.hit, result.matched) {
                result.matched = true;
                result.entry_id = Some(id);
                result.prefix_len = Some(prefix);
            }
        }
        if result.matched && !opts.exhaustive {
            break;
        }
    }
    Ok(result)
}

fn scan_parallel<T, E>(
    entries: &[StoreEntry],
    target: &T,
    prefix: u8,
    opts: &MatchOptions,
    rng: &mut RandomSource,
    eval: &E,
) -> Result<Vec<Eval>, MatchError>
where
    T: Sync,
    E: Fn(&T, &StoreEntry, u8, &mut RandomSource) -> Result<Eval, MatchError> + Sync,
{
    let workers = opts.threads.min(entries.len());
    let chunk = entries.len().div_ceil(workers);
    let first_hit = AtomicUsize::new(usize::MAX);
    let rngs: Vec<RandomSource> = (0..workers).map(|_| rng.fork()).collect();
    let mut indexed: Vec<(usize, Eval)> = thread::scope(|s| {
        let handles: Vec<_> = entries
            .chunks(chunk)
            .zip(rngs)
            .enumerate()
            .map(|(ci, (part, mut wrng))| {
                let first_hit = &first_hit;
                s.spawn(move || -> Result<Vec<(usize, Eval)>, MatchError> {
                    let mut out = Vec::new();
                    for (j, entry) in part.iter().enumerate() {
                        let idx = ci * chunk + j;
                        if !opts.exhaustive && idx > first_hit.load(Ordering::Relaxed) {
                            break;
                        }
                        let ev = eval(target, entry, prefix, &mut wrng)?;
                        if ev.hit.is_some() {
                            first_hit.fetch_min(idx, Ordering::Relaxed);
                        }
                        out.push((idx, ev));
                    }
                    Ok(out)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("match worker panicked"))
            .collect::<Result<Vec<_>, _>>()
            .map(|parts| parts.into_iter().flatten().collect())
    })?;
    indexed.sort_by_key(|(i, _)| *i);
    if !opts.exhaustive {
        let cut = first_hit.into_inner();
        indexed.retain(|(i, _)| *i <= cut);
    }
    Ok(indexed.into_iter().map(|(_, ev)| ev).collect())
}

