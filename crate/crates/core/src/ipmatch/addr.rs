use std::fmt;
use std::net::Ipv4Addr;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AddrError {
    #[error("invalid IPv4 address '{0}'")]
    InvalidAddress(String),
    #[error("invalid prefix length '{0}' (expected 0-32)")]
    InvalidPrefix(String),
    #[error("line {line}: {error}")]
    Line { line: usize, error: Box<AddrError> },
}

/// An IPv4 address as a big-endian 32-bit value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ipv4(pub u32);

impl Ipv4 {
    pub fn from_octets(o: [u8; 4]) -> Self {
        Ipv4(u32::from_be_bytes(o))
    }

    pub fn octets(self) -> [u8; 4] {
        self.0.to_be_bytes()
    }

    pub fn value(self) -> u32 {
        self.0
    }

    pub fn masked(self, prefix_len: u8) -> Ipv4 {
        Ipv4(self.0 & prefix_to_mask(prefix_len).unwrap_or(u32::MAX))
    }
}

/// Dotted-quad only: exactly four decimal octets, each at most 255.
pub fn parse_ipv4(text: &str) -> Result<Ipv4, AddrError> {
    let text = text.trim();
    Ipv4Addr::from_str(text)
        .map(|a| Ipv4::from_octets(a.octets()))
        .map_err(|_| AddrError::InvalidAddress(text.to_string()))
}

impl FromStr for Ipv4 {
    type Err = AddrError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_ipv4(s)
    }
}

impl fmt::Display for Ipv4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Ipv4Addr::from(self.0).fmt(f)
    }
}

pub fn prefix_to_mask(prefix_len: u8) -> Result<u32, AddrError> {
    match prefix_len {
        0 => Ok(0),
        1..=32 => Ok(u32::MAX << (32 - prefix_len)),
        _ => Err(AddrError::InvalidPrefix(prefix_len.to_string())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CidrEntry {
    pub network: Ipv4,
    pub prefix_len: u8,
}

impl CidrEntry {
    /// Builds a normalized entry; the flag reports whether host bits were cleared.
    pub fn new(addr: Ipv4, prefix_len: u8) -> Result<(Self, bool), AddrError> {
        let mask = prefix_to_mask(prefix_len)?;
        let network = Ipv4(addr.0 & mask);
        Ok((Self { network, prefix_len }, network != addr))
    }

    pub fn mask(&self) -> u32 {
        prefix_to_mask(self.prefix_len).unwrap_or(u32::MAX)
    }

    pub fn contains(&self, ip: Ipv4) -> bool {
        ip.0 & self.mask() == self.network.0
    }
}

impl fmt::Display for CidrEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.network, self.prefix_len)
    }
}

/// Parses `a.b.c.d/p`; a bare address is read as `/32`. Returns the
/// normalized entry and whether host bits had to be cleared.
pub fn parse_cidr(text: &str) -> Result<(CidrEntry, bool), AddrError> {
    let text = text.trim();
    let (addr, prefix) = match text.split_once('/') {
        Some((a, p)) => {
            let p = p.trim();
            let len = if p.is_empty() || !p.bytes().all(|b| b.is_ascii_digit()) {
                None
            } else {
                p.parse::<u8>().ok().filter(|&v| v <= 32)
            };
            (a, len.ok_or_else(|| AddrError::InvalidPrefix(p.to_string()))?)
        }
        None => (text, 32),
    };
    CidrEntry::new(parse_ipv4(addr)?, prefix)
}

impl FromStr for CidrEntry {
    type Err = AddrError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_cidr(s).map(|(e, _)| e)
    }
}

/// One entry of a CIDR list file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ListedCidr {
    /// 1-based line number in the source text.
    pub line: usize,
    pub entry: CidrEntry,
    pub normalized: bool,
}

/// One CIDR per line; `#` starts a comment, blank lines are skipped.
pub fn parse_cidr_list(text: &str) -> Result<Vec<ListedCidr>, AddrError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (entry, normalized) = parse_cidr(body)
            .map_err(|e| AddrError::Line { line: i + 1, error: Box::new(e) })?;
        out.push(ListedCidr { line: i + 1, entry, normalized });
    }
    Ok(out)
}

/// Plaintext reference verdict: does any entry contain `ip`?
pub fn plaintext_oracle(ip: Ipv4, entries: &[CidrEntry]) -> bool {
    entries.iter().any(|e| ip.0 & e.mask() == e.network.0)
}
