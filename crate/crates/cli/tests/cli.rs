use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use helb::format::{parse_key_pair, parse_public_key};
use helb::ipmatch::{plaintext_oracle, CidrEntry, Ipv4};
use helb::keys::{AnyKeyPair, SchemeKind};
use helb::{BigUint, RandomSource};
use rand::Rng;
use tempfile::TempDir;

fn helb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_helb")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Setup {
    dir: TempDir,
}

impl Setup {
    fn new() -> Self {
        Self { dir: TempDir::new().unwrap() }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn write(&self, name: &str, text: &str) -> PathBuf {
        let p = self.path(name);
        fs::write(&p, text).unwrap();
        p
    }

    fn keygen(&self, scheme: &str, extra: &[&str]) -> (PathBuf, PathBuf) {
        let prefix = self.path(scheme);
        let mut args = vec!["--seed", "7", "keygen", "--scheme", scheme, "--out", s(&prefix)];
        args.extend_from_slice(extra);
        let o = helb(&args);
        assert!(o.status.success(), "{}", stderr(&o));
        (self.path(&format!("{scheme}.pub")), self.path(&format!("{scheme}.key")))
    }

    fn encrypt(&self, key: &Path, list: &Path, store: &str, extra: &[&str]) -> (PathBuf, Output) {
        let out = self.path(store);
        let mut args = vec!["--seed", "8", "blacklist", "encrypt", "--key", s(key), "--input", s(list), "--out", s(&out)];
        args.extend_from_slice(extra);
        (out.clone(), helb(&args))
    }
}

#[test]
fn paillier_2048_keys_load_and_round_trip() {
    let env = Setup::new();
    let (pub_path, key_path) = env.keygen("paillier", &["--bits", "2048"]);
    let public = parse_public_key(&fs::read_to_string(&pub_path).unwrap()).unwrap();
    let AnyKeyPair::Phe(kp) = parse_key_pair(&fs::read_to_string(&key_path).unwrap()).unwrap() else {
        panic!("expected a PHE key");
    };
    assert_eq!(public.kind(), SchemeKind::Phe(kp.public.scheme()));
    let mut rng = RandomSource::seeded(1);
    let m = BigUint::from(0xdead_beefu32);
    let ct = kp.public.encrypt(&m, &mut rng).unwrap();
    assert_eq!(kp.decrypt(&ct).unwrap(), m);
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        assert_eq!(fs::metadata(&key_path).unwrap().permissions().mode() & 0o777, 0o600);
    }
}

#[test]
fn bfv_default_profile_revalidates() {
    let env = Setup::new();
    let (_, key_path) = env.keygen("bfv", &[]);
    let AnyKeyPair::Bfv { context, .. } = parse_key_pair(&fs::read_to_string(&key_path).unwrap()).unwrap() else {
        panic!("expected a BFV key");
    };
    assert_eq!(context.ring_dim(), 4096);
    assert!(context.params().is_valid());
}

#[test]
fn unknown_scheme_is_a_usage_error() {
    let env = Setup::new();
    let o = helb(&["keygen", "--scheme", "rsa", "--out", s(&env.path("x"))]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("unknown scheme 'rsa'"));
}

#[test]
fn small_keys_need_test_mode() {
    let env = Setup::new();
    let o = helb(&["keygen", "--scheme", "paillier", "--bits", "128", "--out", s(&env.path("x"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn encrypt_reports_counts_and_line_errors() {
    let env = Setup::new();
    let (pub_path, _) = env.keygen("paillier", &["--bits", "512"]);
    let three = env.write("three.txt", "10.0.0.0/8\n# comment\n192.168.1.0/24\n\n203.0.113.7\n");
    let (_, o) = env.encrypt(&pub_path, &three, "three.helb", &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("read 3 entries, stored 3"), "{}", stdout(&o));

    let dups = env.write("dups.txt", "10.0.0.0/8\n10.0.0.0/8\n10.9.9.9/8\n1.2.3.0/24\n");
    let (_, o) = env.encrypt(&pub_path, &dups, "dups.helb", &[]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("read 4 entries, stored 2") && out.contains("duplicates dropped: 2"), "{out}");

    let bad = env.write("bad.txt", "10.0.0.0/8\n1.2.3.4/24\n300.1.1.1/8\n");
    let (_, o) = env.encrypt(&pub_path, &bad, "bad.helb", &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn match_exit_codes_and_json() {
    let env = Setup::new();
    let (pub_path, key_path) = env.keygen("paillier", &["--bits", "512"]);
    let list = env.write("list.txt", "192.168.1.0/24\n10.0.0.0/8\n");
    let (store, o) = env.encrypt(&pub_path, &list, "s.helb", &[]);
    assert!(o.status.success());
    let run = |ip: &str, extra: &[&str]| {
        let mut args = vec!["match", "--key", s(&key_path), "--store", s(&store), "--ip", ip];
        args.extend_from_slice(extra);
        helb(&args)
    };
    let hit = run("192.168.1.77", &[]);
    assert_eq!(hit.status.code(), Some(0));
    assert!(stdout(&hit).starts_with("MATCH 192.168.1.77 entry 1 (/24)"));
    let miss = run("8.8.8.8", &[]);
    assert_eq!(miss.status.code(), Some(1));
    assert!(stdout(&miss).starts_with("NO-MATCH"));

    let j = run("10.200.0.1", &["--json", "--exhaustive", "--blind"]);
    assert_eq!(j.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&j)).unwrap();
    assert_eq!(v["matched"], true);
    assert_eq!(v["entry_id"], 2);
    assert_eq!(v["prefix_len"], 8);
    assert_eq!(v["stats"]["zero_tests"], 2);

    let allowed = run("192.168.1.5", &["--whitelist"]);
    assert_eq!(allowed.status.code(), Some(0));
    assert!(stdout(&allowed).starts_with("ALLOWED 192.168.1.5 entry 1"));
    let denied = run("8.8.8.8", &["--whitelist"]);
    assert_eq!(denied.status.code(), Some(1));
    assert!(stdout(&denied).starts_with("DENIED 8.8.8.8"));

    assert_eq!(run("not-an-ip", &[]).status.code(), Some(2));
    let public_only = helb(&["match", "--key", s(&pub_path), "--store", s(&store), "--ip", "8.8.8.8"]);
    assert_eq!(public_only.status.code(), Some(2));
}

#[test]
fn goldwasser_micali_needs_xor() {
    let env = Setup::new();
    let (pub_path, key_path) = env.keygen("goldwasser-micali", &["--bits", "256"]);
    let list = env.write("list.txt", "172.16.0.0/12\n");
    let (store, _) = env.encrypt(&pub_path, &list, "gm.helb", &[]);
    let base = ["match", "--key", s(&key_path), "--store", s(&store), "--ip", "172.20.1.1"];
    assert_eq!(helb(&base).status.code(), Some(2));
    let mut xor = base.to_vec();
    xor.extend(["--protocol", "xor"]);
    assert_eq!(helb(&xor).status.code(), Some(0));
}

#[test]
fn key_and_store_schemes_must_agree() {
    let env = Setup::new();
    let (pub_path, _) = env.keygen("paillier", &["--bits", "512"]);
    let (_, ou_key) = env.keygen("okamoto-uchiyama", &["--bits", "512"]);
    let list = env.write("list.txt", "1.0.0.0/8\n");
    let (store, _) = env.encrypt(&pub_path, &list, "p.helb", &[]);
    let o = helb(&["match", "--key", s(&ou_key), "--store", s(&store), "--ip", "1.1.1.1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("does not match"), "{}", stderr(&o));
}

/// 100 random addresses against random lists; exit codes follow the oracle.
#[test]
fn exit_code_contract_randomized() {
    let env = Setup::new();
    let (pub_path, key_path) = env.keygen("paillier", &["--bits", "512"]);
    let (bfv_pub, bfv_key) = env.keygen("bfv", &["--ring-dim", "256"]);
    let mut rng = RandomSource::seeded(4242);
    let mut stores = Vec::new();
    for (i, (pk, sk, packed)) in
        [(&pub_path, &key_path, false), (&bfv_pub, &bfv_key, false), (&bfv_pub, &bfv_key, true)].into_iter().enumerate()
    {
        let entries: Vec<CidrEntry> = (0..12)
            .map(|_| CidrEntry::new(Ipv4(rng.gen()), rng.gen_range(4..=28)).unwrap().0)
            .collect();
        let text: String = entries.iter().map(|e| format!("{e}\n")).collect();
        let list = env.write(&format!("list{i}.txt"), &text);
        let flags: &[&str] = if packed { &["--packed"] } else { &[] };
        let (store, o) = env.encrypt(pk, &list, &format!("s{i}.helb"), flags);
        assert!(o.status.success(), "{}", stderr(&o));
        stores.push((store, sk.clone(), entries));
    }
    for trial in 0..100 {
        let (store, key, entries) = &stores[trial % stores.len()];
        let ip = if rng.gen_bool(0.5) {
            let e = entries[rng.gen_range(0..entries.len())];
            Ipv4(e.network.0 | (rng.gen::<u32>() & !e.mask()))
        } else {
            Ipv4(rng.gen())
        };
        let expected = if plaintext_oracle(ip, entries) { 0 } else { 1 };
        let o = helb(&["match", "--key", s(key), "--store", s(store), "--ip", &ip.to_string()]);
        assert_eq!(o.status.code(), Some(expected), "trial {trial} ip {ip}: {}", stderr(&o));
    }
}

fn table_rows(out: &str) -> Vec<&str> {
    out.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()).skip(2).collect()
}

#[test]
fn bench_shape_and_csv_consistency() {
    let common = ["--seed", "11", "bench", "--bits", "256", "--iterations", "1", "--ring-dim", "256"];
    let table = helb(&common);
    assert!(table.status.success(), "{}", stderr(&table));
    let out = stdout(&table);
    assert!(out.contains("# cpu: ") && out.contains("t3.medium"));
    let rows = table_rows(&out);
    assert_eq!(rows.len(), 7);
    for r in &rows {
        assert_eq!(r.matches('±').count(), 3, "{r}");
    }

    let mut csv_args = common.to_vec();
    csv_args.extend(["--format", "csv"]);
    let csv = helb(&csv_args);
    assert!(csv.status.success());
    assert!(stderr(&csv).contains("# cpu: "));
    let text = stdout(&csv);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "scheme,iterations,keypair_ms,keypair_sd_ms,encrypt_ms,encrypt_sd_ms,op_decrypt_ms,op_decrypt_sd_ms"
    );
    let records: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(records.len(), 7);
    for r in &records {
        for col in [2, 4, 6] {
            assert!(r[col].parse::<f64>().unwrap() > 0.0);
        }
    }
    let names: Vec<&str> = records.iter().map(|r| r[0]).collect();
    assert!(rows.iter().zip(&names).all(|(row, name)| row.starts_with(name)));
}

#[test]
fn bench_scale_default_counts() {
    let o = helb(&["--seed", "12", "bench", "scale", "--ring-dim", "256", "--repeats", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("R^2") && out.contains("t3.medium"));
    let counts: Vec<&str> = table_rows(&out).iter().map(|r| r.split_whitespace().next().unwrap()).collect();
    assert_eq!(counts, ["50", "100", "200", "400", "800"]);
}
