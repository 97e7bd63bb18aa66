//! Privacy-preserving IPv4 blacklist matching.
//!
//! An address is tested against a list of CIDR networks without either side
//! appearing in the clear at the matching step: the masked networks and the
//! masked target are encrypted, subtracted (or XORed) homomorphically, and
//! only the zero-test of the result is revealed to the key holder.
//!
//! Supported schemes:
//!
//! * [`bfv`]: a depth-0 BFV instance over `Z_q[x]/(x^n + 1)`.
//! * [`phe`]: Paillier, Damgård-Jurik, Okamoto-Uchiyama, Benaloh,
//!   Naccache-Stern and Goldwasser-Micali.
//!
//! [`ipmatch`] builds encrypted stores and runs the matching protocols,
//! [`format`] reads and writes key and store files, and [`bench`] times the
//! whole pipeline.

pub mod bench;
pub mod bfv;
pub mod format;
pub mod ipmatch;
pub mod keys;
pub mod numtheory;
pub mod phe;

pub use num_bigint::BigUint;
pub use numtheory::RandomSource;
