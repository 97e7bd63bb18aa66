//! Negacyclic number-theoretic transform over a word-sized prime `p ≡ 1 mod 2n`.
//!
//! Forward is Cooley-Tukey with bit-reversed powers of a primitive `2n`-th root
//! `psi`, inverse is Gentleman-Sande with powers of `psi^-1`; twiddle products
//! use Shoup precomputation. Pointwise products in the transformed domain
//! correspond to multiplication in `Z_p[x]/(x^n + 1)`.

use crate::numtheory::is_prime_u64;

pub(crate) fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Inverse modulo a prime via Fermat.
pub(crate) fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

#[derive(Debug, Clone, Copy)]
struct Twiddle {
    w: u64,
    shoup: u64,
}

impl Twiddle {
    fn new(w: u64, p: u64) -> Self {
        Self { w, shoup: (((w as u128) << 64) / p as u128) as u64 }
    }

    /// `x * w mod p` for `x < p`.
    #[inline]
    fn mul(self, x: u64, p: u64) -> u64 {
        let q = ((x as u128 * self.shoup as u128) >> 64) as u64;
        let r = x.wrapping_mul(self.w).wrapping_sub(q.wrapping_mul(p));
        if r >= p {
            r - p
        } else {
            r
        }
    }
}

#[derive(Debug, Clone)]
pub struct NttTables {
    p: u64,
    n: usize,
    psi_rev: Vec<Twiddle>,
    inv_psi_rev: Vec<Twiddle>,
    n_inv: Twiddle,
}

fn bit_reverse(mut i: usize, bits: u32) -> usize {
    let mut r = 0;
    for _ in 0..bits {
        r = (r << 1) | (i & 1);
        i >>= 1;
    }
    r
}

/// A primitive `2n`-th root of unity mod `p`, if `p` is a prime `≡ 1 mod 2n`.
pub fn primitive_root_2n(n: usize, p: u64) -> Option<u64> {
    let two_n = 2 * n as u64;
    if !n.is_power_of_two() || p < 3 || !(p - 1).is_multiple_of(two_n) || !is_prime_u64(p) {
        return None;
    }
    // psi^n = -1 forces order exactly 2n since 2n is a power of two
    (2..p).map(|g| pow_mod(g, (p - 1) / two_n, p)).find(|&psi| pow_mod(psi, n as u64, p) == p - 1)
}

/// Largest `count` primes below `2^bits` that are `≡ 1 mod 2n`, descending.
pub fn ntt_primes(n: usize, bits: u32, count: usize) -> Vec<u64> {
    let step = 2 * n as u64;
    let top = (1u64 << bits) - 2;
    let mut c = top / step * step + 1;
    let mut out = Vec::with_capacity(count);
    while out.len() < count && c > step {
        if is_prime_u64(c) {
            out.push(c);
        }
        c -= step;
    }
    out
}

impl NttTables {
    /// Tables for `Z_p[x]/(x^n + 1)`; `None` if `p` is not NTT-friendly for `n`.
    pub fn new(n: usize, p: u64) -> Option<Self> {
        let psi = primitive_root_2n(n, p)?;
        let psi_inv = inv_mod(psi, p);
        let bits = n.trailing_zeros();
        let mut psi_rev = vec![Twiddle::new(0, p); n];
        let mut inv_psi_rev = vec![Twiddle::new(0, p); n];
        let (mut pw, mut ipw) = (1u64, 1u64);
        for i in 0..n {
            let r = bit_reverse(i, bits);
            psi_rev[r] = Twiddle::new(pw, p);
            inv_psi_rev[r] = Twiddle::new(ipw, p);
            pw = mul_mod(pw, psi, p);
            ipw = mul_mod(ipw, psi_inv, p);
        }
        let n_inv = Twiddle::new(inv_mod(n as u64 % p, p), p);
        Some(Self { p, n, psi_rev, inv_psi_rev, n_inv })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn forward(&self, a: &mut [u64]) {
        debug_assert_eq!(a.len(), self.n);
        let p = self.p;
        let mut t = self.n;
        let mut m = 1;
        while m < self.n {
            t >>= 1;
            for i in 0..m {
                let s = self.psi_rev[m + i];
                let j1 = 2 * i * t;
                for j in j1..j1 + t {
                    let u = a[j];
                    let v = s.mul(a[j + t], p);
                    a[j] = if u + v >= p { u + v - p } else { u + v };
                    a[j + t] = if u >= v { u - v } else { u + p - v };
                }
            }
            m <<= 1;
        }
    }

    pub fn inverse(&self, a: &mut [u64]) {
        debug_assert_eq!(a.len(), self.n);
        let p = self.p;
        let mut t = 1;
        let mut m = self.n;
        while m > 1 {
            let h = m >> 1;
            let mut j1 = 0;
            for i in 0..h {
                let s = self.inv_psi_rev[h + i];
                for j in j1..j1 + t {
                    let u = a[j];
                    let v = a[j + t];
                    a[j] = if u + v >= p { u + v - p } else { u + v };
                    a[j + t] = s.mul(if u >= v { u - v } else { u + p - v }, p);
                }
                j1 += 2 * t;
            }
            t <<= 1;
            m = h;
        }
        for x in a.iter_mut() {
            *x = self.n_inv.mul(*x, p);
        }
    }

    /// Negacyclic product of two polynomials with coefficients below `p`.
    pub fn multiply(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let (mut fa, mut fb) = (a.to_vec(), b.to_vec());
        self.forward(&mut fa);
        self.forward(&mut fb);
        for (x, y) in fa.iter_mut().zip(&fb) {
            *x = mul_mod(*x, *y, self.p);
        }
        self.inverse(&mut fa);
        fa
    }
}

/// Reference negacyclic product, `O(n^2)`.
pub fn multiply_schoolbook(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len();
    let mut out = vec![0u64; n];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            let prod = mul_mod(x, y, p);
            let k = i + j;
            if k < n {
                out[k] = (out[k] + prod) % p;
            } else {
                out[k - n] = (out[k - n] + p - prod) % p;
            }
        }
    }
    out
}
