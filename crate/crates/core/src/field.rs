//! Prime fields, characters, Gauss sums and the multiplicative (Mellin) transform.

use std::f64::consts::TAU;
use std::ops::Deref;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::dft::{dft, dft_conj};
use crate::error::{Error, Result};

/// Default bound on `p` for operations that allocate O(p) tables.
pub const DEFAULT_CAP: u64 = 1 << 26;

/// Environment variable overriding [`DEFAULT_CAP`].
pub const CAP_ENV: &str = "TRACE_FORMS_CAP";

const DLOG_SENTINEL: u32 = u32::MAX;

/// The active cap: `TRACE_FORMS_CAP` when set to a positive integer, else 2^26.
pub fn field_cap() -> u64 {
    std::env::var(CAP_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<u64>().ok())
        .filter(|&c| c > 0)
        .unwrap_or(DEFAULT_CAP)
}

/// `e(num/den) = exp(2πi·num/den)` with `num` already reduced mod `den`.
#[inline]
pub fn e_frac(num: u64, den: u64) -> Complex64 {
    let ang = TAU * (num as f64) / (den as f64);
    Complex64::new(ang.cos(), ang.sin())
}

/// Deterministic trial-division primality test; fine below 2^40.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Distinct prime factors in increasing order.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

#[inline]
pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = ((acc as u128 * base as u128) % m as u128) as u64;
        }
        base = ((base as u128 * base as u128) % m as u128) as u64;
        exp >>= 1;
    }
    acc
}

/// Which index set a [`ComplexTable`] is laid out over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableDomain {
    /// Residues `0..p`.
    Residues,
    /// Character indices `0..p-1`.
    Characters,
}

/// Complex values over residues or character indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexTable {
    pub domain: TableDomain,
    pub values: Vec<Complex64>,
}

impl Deref for ComplexTable {
    type Target = [Complex64];
    fn deref(&self) -> &[Complex64] {
        &self.values
    }
}

/// A prime field `F_p` with a primitive root and its discrete-log table.
///
/// Immutable after construction apart from the lazily built inverse table,
/// so it can be shared freely between threads.
#[derive(Debug)]
pub struct FieldContext {
    p: u32,
    g: u32,
    dlog: Vec<u32>,
    powers: Vec<u32>,
    inv: OnceLock<Vec<u32>>,
}

/// Builds `F_p` under the cap returned by [`field_cap`].
pub fn make_field(p: u64) -> Result<FieldContext> {
    FieldContext::with_cap(p, field_cap())
}

impl FieldContext {
    pub fn new(p: u64) -> Result<Self> {
        make_field(p)
    }

    pub fn with_cap(p: u64, cap: u64) -> Result<Self> {
        if p < 3 {
            return Err(Error::EvenOrTooSmall(p));
        }
        if p > cap || p > u32::MAX as u64 / 2 {
            return Err(Error::TooLarge { p, cap });
        }
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let g = smallest_primitive_root(p);
        let n = p as usize;
        let mut dlog = vec![DLOG_SENTINEL; n];
        let mut powers = Vec::with_capacity(n - 1);
        let mut x = 1u64;
        for t in 0..(n - 1) {
            powers.push(x as u32);
            dlog[x as usize] = t as u32;
            x = x * g % p;
        }
        debug_assert_eq!(x, 1);
        Ok(FieldContext { p: p as u32, g: g as u32, dlog, powers, inv: OnceLock::new() })
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    /// The smallest primitive root mod p.
    #[inline]
    pub fn generator(&self) -> u32 {
        self.g
    }

    /// Order of the multiplicative group, `p − 1`.
    #[inline]
    pub fn group_order(&self) -> usize {
        self.p as usize - 1
    }

    /// `dlog(a)` for nonzero `a`.
    #[inline]
    pub fn dlog(&self, a: u32) -> Result<u32> {
        let d = self.dlog[(a % self.p) as usize];
        if d == DLOG_SENTINEL {
            Err(Error::ZeroArgument)
        } else {
            Ok(d)
        }
    }

    /// Raw discrete-log table; entry 0 holds `u32::MAX`.
    pub fn dlog_table(&self) -> &[u32] {
        &self.dlog
    }

    /// `g^t mod p` for `0 ≤ t < p − 1`.
    #[inline]
    pub fn gpow(&self, t: usize) -> u32 {
        self.powers[t % self.powers.len()]
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        ((a as u64 + b as u64) % self.p as u64) as u32
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        let a = a % self.p;
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    /// Table of modular inverses (entry 0 is 0), built on first use.
    pub fn inverses(&self) -> &[u32] {
        self.inv.get_or_init(|| {
            let n = self.p as usize;
            let mut inv = vec![0u32; n];
            for a in 1..n {
                let t = self.dlog[a] as usize;
                inv[a] = self.powers[(n - 1 - t) % (n - 1)];
            }
            inv
        })
    }

    pub fn inv(&self, a: u32) -> Result<u32> {
        if a.is_multiple_of(self.p) {
            return Err(Error::ZeroArgument);
        }
        Ok(self.inverses()[(a % self.p) as usize])
    }

    /// `e(x/p)`.
    #[inline]
    pub fn additive_char(&self, x: u32) -> Complex64 {
        e_frac((x % self.p) as u64, self.p as u64)
    }

    /// `χ_j(a) = e(j·dlog(a)/(p−1))`.
    pub fn mult_char(&self, j: usize, a: u32) -> Result<Complex64> {
        let q = self.group_order() as u64;
        let t = self.dlog(a)? as u64;
        Ok(e_frac((j as u64 % q) * t % q, q))
    }

    /// `τ(χ_j) = Σ_{x≠0} χ_j(x)e(x/p)` for every `j`, as one length-(p−1) transform.
    pub fn gauss_sums(&self) -> ComplexTable {
        let seq: Vec<Complex64> = self.powers.iter().map(|&x| self.additive_char(x)).collect();
        ComplexTable { domain: TableDomain::Characters, values: dft(&seq) }
    }

    /// Forward Mellin transform `f̂(χ_j) = Σ_{a≠0} f(a)χ_j(a)`.
    ///
    /// `f` is indexed by residue; entry 0 is ignored.
    pub fn mellin(&self, f: &[Complex64]) -> ComplexTable {
        assert_eq!(f.len(), self.p as usize, "mellin input must be indexed by residues");
        let seq: Vec<Complex64> = self.powers.iter().map(|&x| f[x as usize]).collect();
        ComplexTable { domain: TableDomain::Characters, values: dft(&seq) }
    }

    /// Inverse Mellin transform `f(a) = (p−1)^{-1} Σ_j f̂(χ_j)·conj(χ_j(a))`.
    ///
    /// Returns a residue-indexed table with entry 0 set to 0.
    pub fn mellin_inverse(&self, hat: &[Complex64]) -> ComplexTable {
        let q = self.group_order();
        assert_eq!(hat.len(), q, "mellin_inverse input must be indexed by characters");
        let seq = dft_conj(hat);
        let scale = 1.0 / q as f64;
        let mut out = vec![Complex64::new(0.0, 0.0); self.p as usize];
        for (t, v) in seq.into_iter().enumerate() {
            out[self.powers[t] as usize] = v * scale;
        }
        ComplexTable { domain: TableDomain::Residues, values: out }
    }

    /// Modular reduction of a signed integer.
    #[inline]
    pub fn reduce_i128(&self, v: i128) -> u32 {
        v.rem_euclid(self.p as i128) as u32
    }
}

fn smallest_primitive_root(p: u64) -> u64 {
    let q = p - 1;
    let factors = prime_factors(q);
    (2..p)
        .find(|&g| factors.iter().all(|&f| pow_mod(g, q / f, p) != 1))
        .unwrap_or(1) // p = 3 is covered by g = 2; p − 1 = 1 never occurs
}
