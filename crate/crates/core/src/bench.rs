//! Timing harness for per-scheme operation costs and store scaling.
//!
//! Absolute numbers depend entirely on the host. Published reference timings
//! for this protocol were taken on an AWS t3.medium instance and are not
//! targets here; compare the shape of the results (row order, ratios,
//! growth with store size), never the milliseconds. Every report carries a
//! [`HardwareInfo`] block for that reason.

use std::collections::HashSet;
use std::fmt::{self, Write as _};
use std::time::Instant;

use num_bigint::BigUint;
use rand::Rng;
use thiserror::Error;

use crate::bfv::{BfvError, BfvParams};
use crate::ipmatch::{build_store, indexed, match_ip, CidrEntry, Ipv4, MatchError, MatchOptions, Protocol};
use crate::keys::{AnyKeyPair, AnyPublicKey, KeyError, SchemeKind};
use crate::numtheory::RandomSource;
use crate::phe::{KeygenOptions, PheError, SchemeId};

/// Store sizes timed by default.
pub const DEFAULT_COUNTS: [usize; 5] = [50, 100, 200, 400, 800];

pub const TIMING_NOTE: &str = "Timings are specific to this machine. Published reference figures \
(AWS t3.medium) are not reproduction targets; compare relative costs and scaling only.";

pub const SEARCH_NOTE: &str = "search_total_s is the time to scan the entire store exhaustively, \
not the time to the first match.";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BenchError {
    #[error("iterations must be at least 1")]
    NoIterations,
    #[error("no store sizes given")]
    NoCounts,
    #[error("store size {0} is too large for distinct /24 networks")]
    CountTooLarge(usize),
    #[error("{0} produced a wrong match result")]
    WrongResult(SchemeKind),
    #[error(transparent)]
    Key(#[from] KeyError),
    #[error(transparent)]
    Phe(#[from] PheError),
    #[error(transparent)]
    Bfv(#[from] BfvError),
    #[error(transparent)]
    Match(#[from] MatchError),
}

/// Mean and population standard deviation, in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Timing {
    pub mean_ms: f64,
    pub stddev_ms: f64,
}

impl Timing {
    pub fn from_samples(samples: &[f64]) -> Self {
        if samples.is_empty() {
            return Self::default();
        }
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
        Self { mean_ms: mean, stddev_ms: var.sqrt() }
    }
}

/// One scheme's cost of a single address comparison, split into its phases.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub scheme: SchemeKind,
    pub iterations: usize,
    pub keypair: Timing,
    /// Encrypting both operands: the masked address and one network.
    pub encrypt: Timing,
    /// Subtraction (XOR for Goldwasser-Micali) followed by the zero-test.
    pub op_decrypt: Timing,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub schemes: Vec<SchemeKind>,
    pub iterations: usize,
    pub phe: KeygenOptions,
    pub bfv: BfvParams,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            schemes: SchemeKind::ALL.to_vec(),
            iterations: 5,
            phe: KeygenOptions::secure(1024),
            bfv: BfvParams::desk(),
        }
    }
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Times one full comparison. Returns (keygen, encrypt, op+decrypt) in ms.
fn time_once(
    kind: SchemeKind,
    cfg: &BenchConfig,
    rng: &mut RandomSource,
) -> Result<[f64; 3], BenchError> {
    // A /24 hit: the stored network equals the masked address.
    let ip: u32 = rng.gen();
    let (entry, _) = CidrEntry::new(Ipv4(ip), 24).expect("valid prefix");
    let network = entry.network.0;
    let masked = ip & entry.mask();

    let start = Instant::now();
    let keys = AnyKeyPair::generate(kind, &cfg.phe, &cfg.bfv, rng)?;
    let keygen = elapsed_ms(start);

    let (encrypt, op, is_match) = match &keys {
        AnyKeyPair::Phe(kp) => {
            let start = Instant::now();
            let a = kp.public.encrypt(&BigUint::from(masked), rng)?;
            let b = kp.public.encrypt(&BigUint::from(network), rng)?;
            let encrypt = elapsed_ms(start);
            let start = Instant::now();
            let diff = if kind == SchemeKind::Phe(SchemeId::GoldwasserMicali) {
                kp.public.xor(&a, &b)?
            } else {
                kp.public.sub(&a, &b)?
            };
            let zero = kp.is_zero(&diff)?;
            (encrypt, elapsed_ms(start), zero)
        }
        AnyKeyPair::Bfv { context, keys } => {
            let start = Instant::now();
            let a = context.encrypt(&keys.public, &context.encode(&[masked as u64])?, rng)?;
            let b = context.encrypt(&keys.public, &context.encode(&[network as u64])?, rng)?;
            let encrypt = elapsed_ms(start);
            let start = Instant::now();
            let diff = context.eval_sub(&a, &b)?;
            let zero = context.decrypt_coeff(&keys.secret, &diff, 0)? == 0;
            (encrypt, elapsed_ms(start), zero)
        }
    };
    if !is_match {
        return Err(BenchError::WrongResult(kind));
    }
    Ok([keygen, encrypt, op])
}

/// Times every configured scheme. One warm-up round per scheme is discarded.
pub fn run_bench(cfg: &BenchConfig, rng: &mut RandomSource) -> Result<Vec<BenchRow>, BenchError> {
    if cfg.iterations == 0 {
        return Err(BenchError::NoIterations);
    }
    cfg.schemes
        .iter()
        .map(|&kind| {
            time_once(kind, cfg, rng)?;
            let mut cols: [Vec<f64>; 3] = Default::default();
            for _ in 0..cfg.iterations {
                let t = time_once(kind, cfg, rng)?;
                for (col, v) in cols.iter_mut().zip(t) {
                    col.push(v);
                }
            }
            Ok(BenchRow {
                scheme: kind,
                iterations: cfg.iterations,
                keypair: Timing::from_samples(&cols[0]),
                encrypt: Timing::from_samples(&cols[1]),
                op_decrypt: Timing::from_samples(&cols[2]),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaleRow {
    pub n_addresses: usize,
    pub encrypt_total_s: f64,
    pub search_total_s: f64,
}

#[derive(Debug, Clone)]
pub struct ScaleConfig {
    pub counts: Vec<usize>,
    pub scheme: SchemeKind,
    pub packed: bool,
    /// Draw prefix lengths from 8..=32 instead of fixing them at /24.
    pub random_prefixes: bool,
    pub threads: usize,
    /// Timed searches per store size, after one discarded warm-up; the median is reported.
    pub search_repeats: usize,
    pub phe: KeygenOptions,
    pub bfv: BfvParams,
}

impl Default for ScaleConfig {
    fn default() -> Self {
        Self {
            counts: DEFAULT_COUNTS.to_vec(),
            scheme: SchemeKind::Bfv,
            packed: false,
            random_prefixes: false,
            threads: 1,
            search_repeats: 5,
            phe: KeygenOptions::secure(1024),
            bfv: BfvParams::desk(),
        }
    }
}

/// `count` distinct networks.
pub fn random_cidrs(count: usize, random_prefixes: bool, rng: &mut RandomSource) -> Vec<CidrEntry> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let prefix = if random_prefixes { rng.gen_range(8..=32) } else { 24 };
        let (entry, _) = CidrEntry::new(Ipv4(rng.gen()), prefix).expect("prefix in range");
        if seen.insert(entry) {
            out.push(entry);
        }
    }
    out
}

/// Builds a store of each size and times an exhaustive search for an address
/// inside the last entry. Keys are generated once, outside the timings.
/// Store builds are timed once; searches report the median of `search_repeats` runs.
pub fn run_scale(cfg: &ScaleConfig, rng: &mut RandomSource) -> Result<Vec<ScaleRow>, BenchError> {
    if cfg.counts.is_empty() {
        return Err(BenchError::NoCounts);
    }
    if cfg.search_repeats == 0 {
        return Err(BenchError::NoIterations);
    }
    if let Some(&too_big) = cfg.counts.iter().find(|&&n| n > 1 << 24) {
        return Err(BenchError::CountTooLarge(too_big));
    }
    let keys = AnyKeyPair::generate(cfg.scheme, &cfg.phe, &cfg.bfv, rng)?;
    let public: AnyPublicKey = keys.public();
    let protocol = if cfg.scheme == SchemeKind::Phe(SchemeId::GoldwasserMicali) {
        Protocol::Xor
    } else {
        Protocol::Subtract
    };
    let opts = MatchOptions { exhaustive: true, threads: cfg.threads.max(1), ..MatchOptions::default() };

    cfg.counts
        .iter()
        .map(|&n| {
            let cidrs = random_cidrs(n, cfg.random_prefixes, rng);
            let last = cidrs[n - 1];
            let target = Ipv4(last.network.0 | (rng.gen::<u32>() & !last.mask()));

            let start = Instant::now();
            let (store, _) = build_store(&indexed(&cidrs), &public, cfg.packed, rng)?;
            let encrypt_total_s = start.elapsed().as_secs_f64();

            let mut search = || -> Result<f64, BenchError> {
                let start = Instant::now();
                let result = match_ip(target, &store, &keys, protocol, &opts, rng)?;
                let secs = start.elapsed().as_secs_f64();
                if !result.matched {
                    return Err(BenchError::WrongResult(cfg.scheme));
                }
                Ok(secs)
            };
            search()?;
            let mut samples = (0..cfg.search_repeats).map(|_| search()).collect::<Result<Vec<_>, _>>()?;
            samples.sort_by(f64::total_cmp);
            let mid = samples.len() / 2;
            let search_total_s =
                if samples.len() % 2 == 0 { (samples[mid - 1] + samples[mid]) / 2.0 } else { samples[mid] };
            Ok(ScaleRow { n_addresses: n, encrypt_total_s, search_total_s })
        })
        .collect()
}

/// Least-squares line `y = slope * x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Some(LinearFit { slope, intercept, r_squared })
}

/// Fit of search time against store size.
pub fn search_fit(rows: &[ScaleRow]) -> Option<LinearFit> {
    let xs: Vec<f64> = rows.iter().map(|r| r.n_addresses as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.search_total_s).collect();
    linear_fit(&xs, &ys)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HardwareInfo {
    pub cpu_model: String,
    pub logical_cpus: usize,
    pub os: &'static str,
    pub arch: &'static str,
    pub debug_assertions: bool,
}

impl HardwareInfo {
    pub fn detect() -> Self {
        let cpu_model = std::fs::read_to_string("/proc/cpuinfo")
            .ok()
            .and_then(|info| {
                info.lines()
                    .find(|l| l.starts_with("model name"))
                    .and_then(|l| l.split_once(':'))
                    .map(|(_, v)| v.trim().to_string())
            })
            .unwrap_or_else(|| "unknown".to_string());
        Self {
            cpu_model,
            logical_cpus: std::thread::available_parallelism().map_or(1, |n| n.get()),
            os: std::env::consts::OS,
            arch: std::env::consts::ARCH,
            debug_assertions: cfg!(debug_assertions),
        }
    }
}

impl fmt::Display for HardwareInfo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# cpu: {}", self.cpu_model)?;
        writeln!(f, "# logical cpus: {}", self.logical_cpus)?;
        writeln!(f, "# os/arch: {}/{}", self.os, self.arch)?;
        writeln!(f, "# debug assertions: {}", if self.debug_assertions { "on" } else { "off" })
    }
}

/// Report preamble: hardware block and the timing disclaimer, as `#` lines.
pub fn preamble(hw: &HardwareInfo, notes: &[&str]) -> String {
    let mut out = hw.to_string();
    for note in notes {
        let _ = writeln!(out, "# {note}");
    }
    out
}

pub const BENCH_HEADER: [&str; 8] = [
    "scheme",
    "iterations",
    "keypair_ms",
    "keypair_sd_ms",
    "encrypt_ms",
    "encrypt_sd_ms",
    "op_decrypt_ms",
    "op_decrypt_sd_ms",
];

pub const SCALE_HEADER: [&str; 3] = ["n_addresses", "encrypt_total_s", "search_total_s"];

fn csv_string(header: &[&str], records: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in records {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    csv_string(
        &BENCH_HEADER,
        rows.iter().map(|r| {
            vec![
                r.scheme.label().to_string(),
                r.iterations.to_string(),
                r.keypair.mean_ms.to_string(),
                r.keypair.stddev_ms.to_string(),
                r.encrypt.mean_ms.to_string(),
                r.encrypt.stddev_ms.to_string(),
                r.op_decrypt.mean_ms.to_string(),
                r.op_decrypt.stddev_ms.to_string(),
            ]
        }),
    )
}

pub fn scale_csv(rows: &[ScaleRow]) -> String {
    csv_string(
        &SCALE_HEADER,
        rows.iter().map(|r| {
            vec![r.n_addresses.to_string(), r.encrypt_total_s.to_string(), r.search_total_s.to_string()]
        }),
    )
}

fn cell(t: Timing) -> String {
    format!("{:.3} ± {:.3}", t.mean_ms, t.stddev_ms)
}

fn render_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let widths: Vec<usize> = (0..header.len())
        .map(|i| rows.iter().map(|r| r[i].chars().count()).chain([header[i].len()]).max().unwrap_or(0))
        .collect();
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, &w))| {
                let pad = w - c.chars().count();
                if i == 0 { format!("{c}{}", " ".repeat(pad)) } else { format!("{}{c}", " ".repeat(pad)) }
            })
            .collect();
        padded.join("  ").trim_end().to_string()
    };
    let mut out = line(header.to_vec());
    out.push('\n');
    out.push_str(&widths.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>().join("  "));
    out.push('\n');
    for r in rows {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
        out.push('\n');
    }
    out
}

/// Aligned text table; means and deviations rounded to microseconds.
pub fn bench_table(rows: &[BenchRow]) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.scheme.label().to_string(),
                cell(r.keypair),
                cell(r.encrypt),
                cell(r.op_decrypt),
            ]
        })
        .collect();
    render_table(&["scheme", "keypair (ms)", "encrypt (ms)", "op+decrypt (ms)"], &body)
}

pub fn scale_table(rows: &[ScaleRow]) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.n_addresses.to_string(),
                format!("{:.4}", r.encrypt_total_s),
                format!("{:.4}", r.search_total_s),
            ]
        })
        .collect();
    render_table(&["addresses", "encrypt (s)", "search (s)"], &body)
}
