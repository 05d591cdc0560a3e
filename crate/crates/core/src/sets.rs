//! Subsets of `F_p` and coefficient vectors supported on them.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

/// A subset of `F_p` stored as a strictly increasing list of residues.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetFp {
    p: u32,
    elements: Vec<u32>,
}

impl SubsetFp {
    /// Builds the set from arbitrary residues; duplicates are merged, values
    /// must already lie in `[0, p)`.
    pub fn new(p: u32, mut elements: Vec<u32>) -> Result<Self> {
        if let Some(&bad) = elements.iter().find(|&&x| x >= p) {
            return Err(Error::InvalidInput(format!("residue {bad} not in [0, {p})")));
        }
        elements.sort_unstable();
        elements.dedup();
        Ok(SubsetFp { p, elements })
    }

    /// Reduces arbitrary integers mod p first.
    pub fn from_integers(p: u32, values: &[i64]) -> Self {
        let elements = values.iter().map(|&v| v.rem_euclid(p as i64) as u32).collect();
        SubsetFp::new(p, elements).expect("reduced residues are in range")
    }

    pub fn full(p: u32) -> Self {
        SubsetFp { p, elements: (0..p).collect() }
    }

    /// `F_p^×`.
    pub fn units(p: u32) -> Self {
        SubsetFp { p, elements: (1..p).collect() }
    }

    pub fn interval(p: u32, start: u32, len: u32) -> Self {
        SubsetFp::new(p, (0..len.min(p)).map(|i| ((start as u64 + i as u64) % p as u64) as u32).collect())
            .expect("reduced residues are in range")
    }

    /// The first `size` entries of a seeded shuffle of `0..p`.
    pub fn random<R: Rng + ?Sized>(p: u32, size: usize, rng: &mut R) -> Result<Self> {
        if size > p as usize {
            return Err(Error::InvalidInput(format!("cannot draw {size} residues from F_{p}")));
        }
        let mut all: Vec<u32> = (0..p).collect();
        all.shuffle(rng);
        all.truncate(size);
        SubsetFp::new(p, all)
    }

    /// Like [`SubsetFp::random`] but drawn from `F_p^×`.
    pub fn random_units<R: Rng + ?Sized>(p: u32, size: usize, rng: &mut R) -> Result<Self> {
        if size + 1 > p as usize {
            return Err(Error::InvalidInput(format!("cannot draw {size} units from F_{p}")));
        }
        let mut all: Vec<u32> = (1..p).collect();
        all.shuffle(rng);
        all.truncate(size);
        SubsetFp::new(p, all)
    }

    /// Parses newline-delimited decimal integers; blank lines and `#` comments are skipped.
    pub fn parse_lines(p: u32, text: &str) -> Result<Self> {
        let mut vals = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let s = line.trim();
            if s.is_empty() || s.starts_with('#') {
                continue;
            }
            let v: i64 = s
                .parse()
                .map_err(|_| Error::InvalidInput(format!("line {}: `{s}` is not an integer", i + 1)))?;
            vals.push(v);
        }
        Ok(SubsetFp::from_integers(p, &vals))
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn elements(&self) -> &[u32] {
        &self.elements
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, x: u32) -> bool {
        self.elements.binary_search(&x).is_ok()
    }

    /// Membership bitmap of length p.
    pub fn indicator(&self) -> Vec<bool> {
        let mut bits = vec![false; self.p as usize];
        for &x in &self.elements {
            bits[x as usize] = true;
        }
        bits
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.elements.iter().copied()
    }

    pub fn check_same_field(&self, other: &SubsetFp) -> Result<()> {
        if self.p != other.p {
            return Err(Error::FieldMismatch(self.p, other.p));
        }
        Ok(())
    }
}

/// Complex weights aligned with a support set.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffVec {
    support: SubsetFp,
    weights: Vec<Complex64>,
}

impl CoeffVec {
    pub fn new(support: SubsetFp, weights: Vec<Complex64>) -> Result<Self> {
        if support.len() != weights.len() {
            return Err(Error::InvalidInput(format!(
                "{} weights for a support of size {}",
                weights.len(),
                support.len()
            )));
        }
        Ok(CoeffVec { support, weights })
    }

    /// All weights equal to 1.
    pub fn unit(support: SubsetFp) -> Self {
        let weights = vec![Complex64::new(1.0, 0.0); support.len()];
        CoeffVec { support, weights }
    }

    /// Weights uniform on the unit disc's boundary times a uniform modulus in `[0, 1]`.
    pub fn random<R: Rng + ?Sized>(support: SubsetFp, rng: &mut R) -> Self {
        let weights = (0..support.len())
            .map(|_| Complex64::from_polar(rng.gen_range(0.0..1.0), rng.gen_range(0.0..std::f64::consts::TAU)))
            .collect();
        CoeffVec { support, weights }
    }

    #[inline]
    pub fn support(&self) -> &SubsetFp {
        &self.support
    }

    #[inline]
    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.support.p()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, Complex64)> + '_ {
        self.support.iter().zip(self.weights.iter().copied())
    }

    /// `‖·‖_q` for finite `q ≥ 1`; `f64::INFINITY` gives the sup norm.
    pub fn norm(&self, q: f64) -> f64 {
        if q.is_infinite() {
            return self.weights.iter().map(|w| w.norm()).fold(0.0, f64::max);
        }
        assert!(q >= 1.0, "norm exponent must be >= 1");
        // scale by the sup norm so large exponents do not overflow
        let sup = self.norm(f64::INFINITY);
        if sup == 0.0 {
            return 0.0;
        }
        let s: f64 = self.weights.iter().map(|w| (w.norm() / sup).powf(q)).sum();
        sup * s.powf(1.0 / q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn construction_sorts_and_dedups() {
        let s = SubsetFp::new(11, vec![5, 3, 5, 0]).unwrap();
        assert_eq!(s.elements(), &[0, 3, 5]);
        assert!(SubsetFp::new(11, vec![11]).is_err());
        assert_eq!(SubsetFp::from_integers(7, &[-1, 8, 15]).elements(), &[1, 6]);
    }

    #[test]
    fn seeded_draws_are_reproducible() {
        let a = SubsetFp::random(101, 20, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = SubsetFp::random(101, 20, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 20);
        let u = SubsetFp::random_units(101, 100, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(u, SubsetFp::units(101));
    }

    #[test]
    fn parse_lines() {
        let s = SubsetFp::parse_lines(101, "1\n\n# c\n2\n 3 \n-1\n").unwrap();
        assert_eq!(s.elements(), &[1, 2, 3, 100]);
        assert!(SubsetFp::parse_lines(101, "x").is_err());
    }

    #[test]
    fn norms_of_unit_weights() {
        let v = CoeffVec::unit(SubsetFp::interval(101, 0, 16));
        assert!((v.norm(1.0) - 16.0).abs() < 1e-12);
        assert!((v.norm(2.0) - 4.0).abs() < 1e-12);
        assert!((v.norm(4.0) - 2.0).abs() < 1e-12);
        assert!((v.norm(4.0 / 3.0) - 16f64.powf(0.75)).abs() < 1e-9);
        assert_eq!(v.norm(f64::INFINITY), 1.0);
    }
}
