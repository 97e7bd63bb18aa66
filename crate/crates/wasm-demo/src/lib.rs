//! Browser bindings for the demo page in `www/`. Each export takes plain
//! strings and numbers and returns a JSON document for the page to render.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use helb::bfv::{BfvContext, BfvParams, Plaintext};
use helb::ipmatch::{build_store, match_ip, parse_cidr_list, parse_ipv4, MatchOptions, Protocol};
use helb::keys::{AnyKeyPair, SchemeKind};
use helb::numtheory::jacobi;
use helb::phe::{self, KeygenOptions, PrivateKey, SchemeId};
use helb::{BigUint, RandomSource};
use rand::Rng;

/// Key size for the PHE schemes: large enough for crypto-mode keygen,
/// small enough to stay interactive.
const DEMO_BITS: u64 = 512;
const DEMO_RING_DIM: usize = 1024;
const MAX_ADDITIONS: u32 = 1000;

fn rng_for(seed: Option<u64>) -> RandomSource {
    seed.map_or_else(RandomSource::crypto, RandomSource::seeded)
}

fn keygen_opts(seeded: bool) -> KeygenOptions {
    if seeded {
        KeygenOptions::test(DEMO_BITS)
    } else {
        KeygenOptions::secure(DEMO_BITS)
    }
}

fn short_hex(v: &BigUint) -> String {
    let s = format!("{v:x}");
    if s.len() > 16 {
        format!("{}…{}", &s[..8], &s[s.len() - 8..])
    } else {
        s
    }
}

pub fn match_report(blacklist: &str, ip: &str, scheme: &str, seed: Option<u64>) -> Result<Value, String> {
    let kind: SchemeKind = scheme.parse()?;
    let ip = parse_ipv4(ip.trim()).map_err(|e| e.to_string())?;
    let listed = parse_cidr_list(blacklist).map_err(|e| e.to_string())?;
    if listed.is_empty() {
        return Err("the blacklist is empty".into());
    }
    let mut rng = rng_for(seed);
    let keys = AnyKeyPair::generate(kind, &keygen_opts(seed.is_some()), &BfvParams::for_ring_dim(DEMO_RING_DIM), &mut rng)
        .map_err(|e| e.to_string())?;
    let entries: Vec<_> = listed.iter().map(|l| (l.line as u64, l.entry)).collect();
    let (store, report) = build_store(&entries, &keys.public(), false, &mut rng).map_err(|e| e.to_string())?;
    let protocol = if kind == SchemeKind::Phe(SchemeId::GoldwasserMicali) { Protocol::Xor } else { Protocol::Subtract };
    let opts = MatchOptions { exhaustive: true, debug: true, ..MatchOptions::default() };
    let result = match_ip(ip, &store, &keys, protocol, &opts, &mut rng).map_err(|e| e.to_string())?;

    let differences: Vec<Value> = result
        .differences
        .unwrap_or_default()
        .iter()
        .map(|d| {
            let cidr = listed.iter().find(|l| l.line as u64 == d.entry_id).map(|l| l.entry.to_string());
            json!({
                "line": d.entry_id,
                "cidr": cidr,
                "prefix_len": d.prefix_len,
                "value": d.value.as_ref().map(|v| v.to_string()),
                "zero": d.value.as_ref().map(|v| v.bits() == 0),
            })
        })
        .collect();
    Ok(json!({
        "scheme": kind.label(),
        "protocol": protocol.to_string(),
        "ip": ip.to_string(),
        "matched": result.matched,
        "entry_line": result.entry_id,
        "prefix_len": result.prefix_len,
        "stored": report.stored,
        "duplicates": report.duplicate_ids.len(),
        "groups": report.group_sizes.iter().map(|(p, n)| json!({"prefix_len": p, "entries": n})).collect::<Vec<_>>(),
        "ciphertexts": store.ciphertext_count(),
        "stats": {
            "target_encryptions": result.stats.target_encryptions,
            "homomorphic_ops": result.stats.homomorphic_ops,
            "zero_tests": result.stats.zero_tests,
        },
        "differences": differences,
    }))
}

pub fn gm_xor_report(a: u32, b: u32, width: u32, seed: Option<u64>) -> Result<Value, String> {
    if !(1..=32).contains(&width) {
        return Err("bit width must be between 1 and 32".into());
    }
    let mut rng = rng_for(seed);
    let kp = phe::keygen(SchemeId::GoldwasserMicali, &keygen_opts(seed.is_some()), &mut rng).map_err(|e| e.to_string())?;
    let PrivateKey::GoldwasserMicali(sk) = &kp.private else { unreachable!() };
    let enc = |m: u32, rng: &mut RandomSource| kp.public.encrypt_with_width(&BigUint::from(m), width, rng);
    let ca = enc(a, &mut rng).map_err(|e| e.to_string())?;
    let cb = enc(b, &mut rng).map_err(|e| e.to_string())?;
    let cx = kp.public.xor(&ca, &cb).map_err(|e| e.to_string())?;
    let result = kp.decrypt(&cx).map_err(|e| e.to_string())?;
    let bits: Vec<Value> = (0..width as usize)
        .map(|i| {
            let residue = jacobi(&cx.payload[i], &sk.p).map(|j| j == 1).unwrap_or(false);
            json!({
                "a": (a >> (width as usize - 1 - i)) & 1 == 1,
                "b": (b >> (width as usize - 1 - i)) & 1 == 1,
                "ct_a": short_hex(&ca.payload[i]),
                "ct_b": short_hex(&cb.payload[i]),
                "ct_xor": short_hex(&cx.payload[i]),
                "quadratic_residue": residue,
            })
        })
        .collect();
    Ok(json!({
        "a": a,
        "b": b,
        "width": width,
        "xor": result.to_string(),
        "expected": a ^ b,
        "modulus_bits": match &kp.public { phe::PublicKey::GoldwasserMicali(pk) => pk.n.bits(), _ => 0 },
        "bits": bits,
    }))
}

pub fn bfv_noise_report(ring_dim: usize, additions: u32, seed: Option<u64>) -> Result<Value, String> {
    if !(1..=MAX_ADDITIONS).contains(&additions) {
        return Err(format!("additions must be between 1 and {MAX_ADDITIONS}"));
    }
    let ctx = BfvContext::new(BfvParams::for_ring_dim(ring_dim)).map_err(|e| e.to_string())?;
    let mut rng = rng_for(seed);
    let keys = ctx.keygen(&mut rng);
    let t = ctx.plaintext_mod();
    let n = ctx.ring_dim();
    let mut expected = vec![0u64; n];
    let mut acc = ctx
        .encrypt(&keys.public, &ctx.encode(&expected).map_err(|e| e.to_string())?, &mut rng)
        .map_err(|e| e.to_string())?;
    let log2 = |v: u128| if v == 0 { 0.0 } else { (v as f64).log2() };
    let mut steps = Vec::new();
    for k in 1..=additions {
        let vals: Vec<u64> = (0..n).map(|_| rng.gen_range(0..t)).collect();
        let ct = ctx
            .encrypt(&keys.public, &ctx.encode(&vals).map_err(|e| e.to_string())?, &mut rng)
            .map_err(|e| e.to_string())?;
        acc = ctx.eval_add(&acc, &ct).map_err(|e| e.to_string())?;
        for (e, v) in expected.iter_mut().zip(&vals) {
            *e = (*e + v) % t;
        }
        let noise = ctx
            .noise(&keys.secret, &acc, &Plaintext { coeffs: expected.clone() })
            .map_err(|e| e.to_string())?;
        steps.push(json!({
            "additions": k,
            "noise_log2": log2(noise),
            "bound_log2": log2(ctx.noise_bound(&acc)),
        }));
    }
    let decrypted = ctx.decrypt(&keys.secret, &acc).map_err(|e| e.to_string())?;
    Ok(json!({
        "ring_dim": n,
        "plaintext_mod": t.to_string(),
        "ciphertext_mod_log2": log2(ctx.ciphertext_mod()),
        "fresh_bound_log2": log2(ctx.fresh_noise_bound()),
        "budget_log2": log2(ctx.noise_budget()),
        "max_additions": ctx.max_additions().to_string(),
        "steps": steps,
        "exact": decrypted.coeffs == expected,
    }))
}

fn to_js(r: Result<Value, String>) -> Result<String, JsValue> {
    r.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e))
}

/// Encrypts `blacklist` under fresh keys and tests `ip` against every entry.
#[wasm_bindgen(js_name = matchDemo)]
pub fn match_demo(blacklist: &str, ip: &str, scheme: &str) -> Result<String, JsValue> {
    to_js(match_report(blacklist, ip, scheme, None))
}

/// Goldwasser-Micali: encrypts two values bit by bit and XORs them.
#[wasm_bindgen(js_name = gmXorDemo)]
pub fn gm_xor_demo(a: u32, b: u32, width: u32) -> Result<String, JsValue> {
    to_js(gm_xor_report(a, b, width, None))
}

/// Tracks BFV noise across a chain of encrypted additions.
#[wasm_bindgen(js_name = bfvNoiseDemo)]
pub fn bfv_noise_demo(ring_dim: usize, additions: u32) -> Result<String, JsValue> {
    to_js(bfv_noise_report(ring_dim, additions, None))
}
