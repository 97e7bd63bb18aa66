//! IPv4/CIDR parsing, encrypted blacklist stores and the matching protocols.
//!
//! A store groups masked network values by prefix length. To test an
//! address, each group's mask is applied to it, the result is encrypted once,
//! and it is compared against every entry of the group: by subtraction and a
//! zero-test for additive schemes and BFV, by bitwise XOR for
//! Goldwasser-Micali.

mod addr;
mod protocol;
mod store;

use thiserror::Error;

pub use addr::{
    parse_cidr, parse_cidr_list, parse_ipv4, plaintext_oracle, prefix_to_mask, AddrError,
    CidrEntry, Ipv4, ListedCidr,
};
pub use protocol::{
    match_batch_bfv, match_ip, match_subtract, match_xor, EntryDifference, MatchOptions,
    MatchResult, MatchStats, Protocol,
};
pub use store::{
    build_store, indexed, BuildReport, EncryptedStore, StoreEntry, StoreKind, StoredCiphertext,
};

use crate::bfv::BfvError;
use crate::keys::SchemeKind;
use crate::phe::PheError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatchError {
    #[error("cannot build a store from an empty entry list")]
    EmptyStore,
    #[error("store scheme {store} does not match key scheme {key}")]
    SchemeMismatch { store: StoreKind, key: SchemeKind },
    #[error("{scheme} keys cannot hold 32-bit addresses and their differences")]
    MessageSpaceTooSmall { scheme: SchemeKind },
    #[error("packed stores require BFV keys")]
    PackingRequiresBfv,
    #[error("packed BFV stores are matched with the batch protocol")]
    PackedStoreNeedsBatch,
    #[error("batch matching requires a packed BFV store")]
    BatchRequiresPackedStore,
    #[error("the xor protocol requires a goldwasser-micali store")]
    XorRequiresGm,
    #[error("malformed store: {0}")]
    MalformedStore(String),
    #[error(transparent)]
    Phe(#[from] PheError),
    #[error(transparent)]
    Bfv(#[from] BfvError),
}
