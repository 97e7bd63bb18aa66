use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use helb::bench::{
    self, BenchConfig, HardwareInfo, ScaleConfig, DEFAULT_COUNTS, SEARCH_NOTE, TIMING_NOTE,
};
use helb::bfv::{BfvParams, BfvProfile};
use helb::format::{
    key_pair_to_string, parse_key_pair, parse_public_key, public_key_to_string, read_store,
    write_store,
};
use helb::ipmatch::{
    build_store, match_ip, parse_cidr_list, parse_ipv4, MatchOptions, Protocol,
};
use helb::keys::{AnyKeyPair, SchemeKind};
use helb::phe::KeygenOptions;
use helb::{BigUint, RandomSource};

/// Privacy-preserving IPv4 blacklist matching with homomorphic encryption.
#[derive(Parser)]
#[command(name = "helb", version)]
struct Cli {
    /// Deterministic randomness; also enables test mode (small keys allowed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a key pair: writes <out>.pub and <out>.key.
    Keygen(KeygenArgs),
    /// Blacklist operations.
    Blacklist {
        #[command(subcommand)]
        command: BlacklistCommand,
    },
    /// Test an address against an encrypted store. Exit 0 match, 1 no match, 2 error.
    Match(MatchArgs),
    /// Time keygen, encryption and op+decrypt per scheme.
    Bench(BenchCommand),
}

#[derive(Subcommand)]
enum BlacklistCommand {
    /// Encrypt a CIDR list into a store file.
    Encrypt(EncryptArgs),
}

#[derive(Args, Clone)]
struct KeyOpts {
    /// Modulus size in bits for the PHE schemes.
    #[arg(long, default_value_t = 2048)]
    bits: u64,
    /// BFV parameter set.
    #[arg(long, default_value_t = BfvProfile::Desk)]
    profile: BfvProfile,
    /// BFV ring dimension, overriding the profile.
    #[arg(long)]
    ring_dim: Option<usize>,
    /// Damgård-Jurik exponent s.
    #[arg(long, default_value_t = 1)]
    dj_s: u32,
    /// Benaloh block size r (a prime).
    #[arg(long)]
    benaloh_r: Option<u64>,
    /// Naccache-Stern message width in bits.
    #[arg(long)]
    ns_width: Option<u32>,
}

impl KeyOpts {
    fn phe(&self, test_mode: bool) -> KeygenOptions {
        let mut opts = if test_mode {
            KeygenOptions::test(self.bits)
        } else {
            KeygenOptions::secure(self.bits)
        };
        opts.dj_s = self.dj_s;
        opts.benaloh_block = self.benaloh_r.map(BigUint::from);
        if let Some(w) = self.ns_width {
            opts.ns_width = w;
        }
        opts
    }

    fn bfv(&self) -> BfvParams {
        self.ring_dim.map_or_else(|| self.profile.params(), BfvParams::for_ring_dim)
    }
}

#[derive(Args)]
struct KeygenArgs {
    #[arg(long)]
    scheme: SchemeKind,
    #[command(flatten)]
    key: KeyOpts,
    /// Output path prefix.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EncryptArgs {
    /// Public (or private) key file.
    #[arg(long)]
    key: PathBuf,
    /// CIDR list: one entry per line, '#' comments.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Pack up to ring-dimension networks per BFV ciphertext.
    #[arg(long)]
    packed: bool,
}

#[derive(Args)]
struct MatchArgs {
    /// Private key file.
    #[arg(long)]
    key: PathBuf,
    #[arg(long)]
    store: PathBuf,
    #[arg(long)]
    ip: String,
    #[arg(long, default_value_t = Protocol::Subtract)]
    protocol: Protocol,
    /// Test every entry instead of stopping at the first match.
    #[arg(long)]
    exhaustive: bool,
    /// Randomise differences before decryption.
    #[arg(long)]
    blind: bool,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Treat the store as an allow list: report ALLOWED/DENIED.
    #[arg(long)]
    whitelist: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Copy, Clone, ValueEnum)]
enum OutputFormat {
    Table,
    Csv,
}

#[derive(Args)]
#[command(args_conflicts_with_subcommands = true)]
struct BenchCommand {
    #[command(subcommand)]
    scale: Option<BenchSub>,
    #[command(flatten)]
    args: BenchArgs,
}

#[derive(Subcommand)]
enum BenchSub {
    /// Time store builds and exhaustive searches for growing store sizes.
    Scale(ScaleArgs),
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated scheme names, or "all".
    #[arg(long, default_value = "all")]
    schemes: String,
    #[arg(long, default_value_t = 5)]
    iterations: usize,
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    format: OutputFormat,
    #[command(flatten)]
    key: BenchKeyOpts,
}

/// Key options with a bench-sized default modulus.
#[derive(Args)]
struct BenchKeyOpts {
    #[arg(long, default_value_t = 1024)]
    bits: u64,
    #[arg(long, default_value_t = BfvProfile::Desk)]
    profile: BfvProfile,
    #[arg(long)]
    ring_dim: Option<usize>,
}

impl BenchKeyOpts {
    fn key_opts(&self) -> KeyOpts {
        KeyOpts {
            bits: self.bits,
            profile: self.profile,
            ring_dim: self.ring_dim,
            dj_s: 1,
            benaloh_r: None,
            ns_width: None,
        }
    }
}

#[derive(Args)]
struct ScaleArgs {
    /// Comma-separated store sizes.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_COUNTS)]
    counts: Vec<usize>,
    #[arg(long, default_value = "bfv")]
    scheme: SchemeKind,
    #[arg(long)]
    packed: bool,
    /// Draw prefix lengths at random instead of fixing /24.
    #[arg(long)]
    random_prefixes: bool,
    /// Searches per store size; the median is reported.
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    format: OutputFormat,
    #[command(flatten)]
    key: BenchKeyOpts,
}

fn rng_for(seed: Option<u64>) -> RandomSource {
    seed.map_or_else(RandomSource::crypto, RandomSource::seeded)
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_private(path: &Path, text: &str) -> Result<()> {
    let mut opts = fs::OpenOptions::new();
    opts.write(true).create(true).truncate(true);
    #[cfg(unix)]
    {
        use std::os::unix::fs::OpenOptionsExt;
        opts.mode(0o600);
    }
    let mut file = opts.open(path).with_context(|| format!("creating {}", path.display()))?;
    file.write_all(text.as_bytes())?;
    Ok(())
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn keygen(args: KeygenArgs, seed: Option<u64>) -> Result<()> {
    let mut rng = rng_for(seed);
    let opts = args.key.phe(seed.is_some());
    let kp = AnyKeyPair::generate(args.scheme, &opts, &args.key.bfv(), &mut rng)?;
    let pub_path = with_suffix(&args.out, ".pub");
    let key_path = with_suffix(&args.out, ".key");
    fs::write(&pub_path, public_key_to_string(&kp.public()))
        .with_context(|| format!("writing {}", pub_path.display()))?;
    write_private(&key_path, &key_pair_to_string(&kp))?;
    println!("{} key pair", args.scheme.label());
    println!("public:  {}", pub_path.display());
    println!("private: {}", key_path.display());
    Ok(())
}

fn blacklist_encrypt(args: EncryptArgs, seed: Option<u64>) -> Result<()> {
    let key = parse_public_key(&read_text(&args.key)?)
        .with_context(|| format!("loading key {}", args.key.display()))?;
    let listed = parse_cidr_list(&read_text(&args.input)?)
        .with_context(|| format!("parsing {}", args.input.display()))?;
    if listed.is_empty() {
        bail!("{} contains no CIDR entries", args.input.display());
    }
    for l in listed.iter().filter(|l| l.normalized) {
        eprintln!("line {}: host bits cleared, stored as {}", l.line, l.entry);
    }
    let entries: Vec<_> = listed.iter().map(|l| (l.line as u64, l.entry)).collect();
    let (store, report) = build_store(&entries, &key, args.packed, &mut rng_for(seed))?;
    fs::write(&args.out, write_store(&store))
        .with_context(|| format!("writing {}", args.out.display()))?;
    println!("read {} entries, stored {}", report.input, report.stored);
    if !report.duplicate_ids.is_empty() {
        let lines: Vec<_> = report.duplicate_ids.iter().map(u64::to_string).collect();
        println!("duplicates dropped: {} (lines {})", report.duplicate_ids.len(), lines.join(", "));
    }
    for (prefix, count) in report.group_sizes.iter().rev() {
        println!("  /{prefix}: {count}");
    }
    println!("ciphertexts: {}", store.ciphertext_count());
    println!("wrote {}", args.out.display());
    Ok(())
}

/// Returns whether the address matched.
fn run_match(args: MatchArgs, seed: Option<u64>) -> Result<bool> {
    let keys = parse_key_pair(&read_text(&args.key)?)
        .with_context(|| format!("loading key {}", args.key.display()))?;
    let bytes = fs::read(&args.store).with_context(|| format!("reading {}", args.store.display()))?;
    let store = read_store(&bytes).with_context(|| format!("loading store {}", args.store.display()))?;
    let ip = parse_ipv4(&args.ip)?;
    let opts = MatchOptions {
        exhaustive: args.exhaustive,
        blind: args.blind,
        debug: false,
        threads: args.threads.max(1),
    };
    let result = match_ip(ip, &store, &keys, args.protocol, &opts, &mut rng_for(seed))?;
    if args.json {
        let out = json!({
            "ip": ip.to_string(),
            "matched": result.matched,
            "entry_id": result.entry_id,
            "prefix_len": result.prefix_len,
            "scheme": keys.kind().name(),
            "protocol": args.protocol.to_string(),
            "list": if args.whitelist { "whitelist" } else { "blacklist" },
            "stats": {
                "target_encryptions": result.stats.target_encryptions,
                "homomorphic_ops": result.stats.homomorphic_ops,
                "zero_tests": result.stats.zero_tests,
            },
        });
        println!("{out}");
    } else {
        let (hit, miss) = if args.whitelist { ("ALLOWED", "DENIED") } else { ("MATCH", "NO-MATCH") };
        match (result.entry_id, result.prefix_len) {
            (Some(id), Some(prefix)) => println!("{hit} {ip} entry {id} (/{prefix})"),
            _ => println!("{miss} {ip}"),
        }
    }
    Ok(result.matched)
}

fn parse_schemes(list: &str) -> Result<Vec<SchemeKind>> {
    if list.eq_ignore_ascii_case("all") {
        return Ok(SchemeKind::ALL.to_vec());
    }
    list.split(',').map(|s| s.trim().parse::<SchemeKind>().map_err(anyhow::Error::msg)).collect()
}

fn print_report(format: OutputFormat, preamble: &str, table: String, csv: String) {
    match format {
        OutputFormat::Table => print!("{preamble}\n{table}"),
        OutputFormat::Csv => {
            eprint!("{preamble}");
            print!("{csv}");
        }
    }
}

fn run_bench(cmd: BenchCommand, seed: Option<u64>) -> Result<()> {
    let hw = HardwareInfo::detect();
    let mut rng = rng_for(seed);
    match cmd.scale {
        None => {
            let args = cmd.args;
            let key = args.key.key_opts();
            let cfg = BenchConfig {
                schemes: parse_schemes(&args.schemes)?,
                iterations: args.iterations,
                phe: key.phe(seed.is_some()),
                bfv: key.bfv(),
            };
            let rows = bench::run_bench(&cfg, &mut rng)?;
            let mut preamble = bench::preamble(&hw, &[TIMING_NOTE]);
            preamble.push_str(&format!(
                "# {} iterations after one warm-up; PHE moduli {} bits; BFV n = {}\n",
                cfg.iterations, cfg.phe.security_bits, cfg.bfv.ring_dim
            ));
            print_report(args.format, &preamble, bench::bench_table(&rows), bench::bench_csv(&rows));
        }
        Some(BenchSub::Scale(args)) => {
            let key = args.key.key_opts();
            let cfg = ScaleConfig {
                counts: args.counts,
                scheme: args.scheme,
                packed: args.packed,
                random_prefixes: args.random_prefixes,
                threads: args.threads,
                search_repeats: args.repeats,
                phe: key.phe(seed.is_some()),
                bfv: key.bfv(),
            };
            let rows = bench::run_scale(&cfg, &mut rng)?;
            let mut preamble = bench::preamble(&hw, &[TIMING_NOTE, SEARCH_NOTE]);
            preamble.push_str(&format!(
                "# scheme {}{}; search median of {} runs\n",
                cfg.scheme,
                if cfg.packed { " (packed)" } else { "" },
                cfg.search_repeats
            ));
            if let Some(fit) = bench::search_fit(&rows) {
                preamble.push_str(&format!(
                    "# search time vs addresses: slope {:.3e} s/address, R^2 {:.4}\n",
                    fit.slope, fit.r_squared
                ));
            }
            print_report(args.format, &preamble, bench::scale_table(&rows), bench::scale_csv(&rows));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let seed = cli.seed;
    let outcome = match cli.command {
        Command::Keygen(args) => keygen(args, seed).map(|()| true),
        Command::Blacklist { command: BlacklistCommand::Encrypt(args) } => {
            blacklist_encrypt(args, seed).map(|()| true)
        }
        Command::Match(args) => run_match(args, seed),
        Command::Bench(cmd) => run_bench(cmd, seed).map(|()| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
