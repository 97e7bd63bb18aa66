//! Arithmetic in `Z_q[x]/(x^n + 1)` for `q` a product of word-sized primes.
//!
//! Coefficients are kept as canonical `u128` residues mod `q`. Products are
//! computed per prime factor (NTT when the factor allows it, schoolbook
//! otherwise) and recombined with Garner's algorithm.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::ntt::{inv_mod, multiply_schoolbook, NttTables};
use crate::numtheory::RandomSource;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RingPoly {
    pub coeffs: Vec<u128>,
}

#[derive(Debug, Clone)]
struct Factor {
    p: u64,
    ntt: Option<NttTables>,
    /// Product of the preceding factors, and its inverse mod `p`.
    prefix: u128,
    prefix_inv: u64,
}

#[derive(Debug, Clone)]
pub struct Ring {
    n: usize,
    q: u128,
    factors: Vec<Factor>,
}

impl Ring {
    /// `moduli` must be distinct primes whose product is below `2^126`; the
    /// parameter validation in [`super::BfvParams`] enforces that.
    pub fn new(n: usize, moduli: &[u64]) -> Self {
        let mut prefix = 1u128;
        let factors = moduli
            .iter()
            .map(|&p| {
                let f = Factor {
                    p,
                    ntt: NttTables::new(n, p),
                    prefix,
                    prefix_inv: inv_mod((prefix % p as u128) as u64, p),
                };
                prefix *= p as u128;
                f
            })
            .collect();
        Self { n, q: prefix, factors }
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn modulus(&self) -> u128 {
        self.q
    }

    /// Whether every prime factor supports the NTT.
    pub fn is_ntt_friendly(&self) -> bool {
        self.factors.iter().all(|f| f.ntt.is_some())
    }

    pub fn zero(&self) -> RingPoly {
        RingPoly { coeffs: vec![0; self.n] }
    }

    pub fn from_signed(&self, values: &[i64]) -> RingPoly {
        let mut coeffs: Vec<u128> = values.iter().map(|&v| self.reduce_signed(v as i128)).collect();
        coeffs.resize(self.n, 0);
        RingPoly { coeffs }
    }

    pub fn reduce_signed(&self, v: i128) -> u128 {
        if v >= 0 {
            v as u128 % self.q
        } else {
            let r = v.unsigned_abs() % self.q;
            if r == 0 {
                0
            } else {
                self.q - r
            }
        }
    }

    /// Centered representative in `(-q/2, q/2]`.
    pub fn centered(&self, x: u128) -> i128 {
        if x > self.q / 2 {
            -((self.q - x) as i128)
        } else {
            x as i128
        }
    }

    pub fn add_coeff(&self, a: u128, b: u128) -> u128 {
        let s = a + b;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }

    pub fn sub_coeff(&self, a: u128, b: u128) -> u128 {
        if a >= b {
            a - b
        } else {
            a + self.q - b
        }
    }

    pub fn add(&self, a: &RingPoly, b: &RingPoly) -> RingPoly {
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(&x, &y)| self.add_coeff(x, y)).collect();
        RingPoly { coeffs }
    }

    pub fn sub(&self, a: &RingPoly, b: &RingPoly) -> RingPoly {
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(&x, &y)| self.sub_coeff(x, y)).collect();
        RingPoly { coeffs }
    }

    pub fn neg(&self, a: &RingPoly) -> RingPoly {
        let coeffs = a.coeffs.iter().map(|&x| if x == 0 { 0 } else { self.q - x }).collect();
        RingPoly { coeffs }
    }

    /// `x^k * a`; wrapping past degree `n` negates.
    pub fn mul_monomial(&self, a: &RingPoly, k: usize) -> RingPoly {
        let n = self.n;
        let mut out = self.zero();
        for (i, &c) in a.coeffs.iter().enumerate() {
            let e = (i + k) % (2 * n);
            if e < n {
                out.coeffs[e] = c;
            } else {
                out.coeffs[e - n] = if c == 0 { 0 } else { self.q - c };
            }
        }
        out
    }

    pub fn mul(&self, a: &RingPoly, b: &RingPoly) -> RingPoly {
        let residues: Vec<Vec<u64>> = self
            .factors
            .iter()
            .map(|f| {
                let ra = Self::residues(a, f.p);
                let rb = Self::residues(b, f.p);
                match &f.ntt {
                    Some(t) => t.multiply(&ra, &rb),
                    None => multiply_schoolbook(&ra, &rb, f.p),
                }
            })
            .collect();
        self.combine(&residues)
    }

    /// Product computed without the NTT, for cross-checking.
    pub fn mul_schoolbook(&self, a: &RingPoly, b: &RingPoly) -> RingPoly {
        let residues: Vec<Vec<u64>> = self
            .factors
            .iter()
            .map(|f| multiply_schoolbook(&Self::residues(a, f.p), &Self::residues(b, f.p), f.p))
            .collect();
        self.combine(&residues)
    }

    /// `a * s` for a ternary `s`, coefficient `idx` only: `O(n)`.
    pub fn mul_ternary_coeff(&self, a: &RingPoly, s: &[i8], idx: usize) -> u128 {
        let n = self.n;
        let mut acc = 0u128;
        for (j, &sj) in s.iter().enumerate() {
            if sj == 0 {
                continue;
            }
            // x^j * a contributes a[idx - j], negated when idx < j
            let (c, negate) =
                if j <= idx { (a.coeffs[idx - j], false) } else { (a.coeffs[n + idx - j], true) };
            acc = if (sj > 0) != negate { self.add_coeff(acc, c) } else { self.sub_coeff(acc, c) };
        }
        acc
    }

    fn residues(a: &RingPoly, p: u64) -> Vec<u64> {
        a.coeffs.iter().map(|&c| (c % p as u128) as u64).collect()
    }

    fn combine(&self, residues: &[Vec<u64>]) -> RingPoly {
        let coeffs = (0..self.n)
            .map(|i| {
                let mut x = 0u128;
                for (f, r) in self.factors.iter().zip(residues) {
                    let p = f.p as u128;
                    let cur = (x % p) as u64;
                    let diff = (r[i] as u128 + p - cur as u128) % p;
                    let digit = diff * f.prefix_inv as u128 % p;
                    x += f.prefix * digit;
                }
                x
            })
            .collect();
        RingPoly { coeffs }
    }

    pub fn sample_uniform(&self, rng: &mut RandomSource) -> RingPoly {
        RingPoly { coeffs: (0..self.n).map(|_| rng.gen_range(0..self.q)).collect() }
    }
}

pub fn sample_ternary(n: usize, rng: &mut RandomSource) -> Vec<i8> {
    (0..n).map(|_| rng.gen_range(-1i8..=1)).collect()
}

/// Rounded Gaussian with standard deviation `sigma`, resampled beyond
/// `bound` so every coefficient satisfies `|e| <= bound`.
pub fn sample_gaussian(n: usize, sigma: f64, bound: i64, rng: &mut RandomSource) -> Vec<i64> {
    let normal = Normal::new(0.0, sigma).expect("sigma validated positive");
    (0..n)
        .map(|_| loop {
            let e = normal.sample(rng).round() as i64;
            if e.abs() <= bound {
                break e;
            }
        })
        .collect()
}
