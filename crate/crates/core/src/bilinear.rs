//! Bilinear forms `Σ_m Σ_n α_m β_n K(mn)`, their Hölder moments, the bound
//! shapes they are compared against, and the correlation sums over
//! `PGL_2(F_p)` tuples.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::e_frac;
use crate::sets::{CoeffVec, SubsetFp};
use crate::trace::{sym_eval, AngleTable, TraceTable};

/// Largest `p` accepted by [`kms_pi`].
pub const KMS_MAX_P: u32 = 2000;

fn same_p(a: u32, b: u32) -> Result<()> {
    if a != b {
        return Err(Error::FieldMismatch(a, b));
    }
    Ok(())
}

#[inline]
fn mulmod(a: u32, b: u32, p: u32) -> u32 {
    ((a as u64 * b as u64) % p as u64) as u32
}

/// `B(α, β; K) = Σ_{m∈M} Σ_{n∈N} α_m β_n K(mn)`.
pub fn bilinear_form(alpha: &CoeffVec, beta: &CoeffVec, k: &TraceTable) -> Result<Complex64> {
    same_p(alpha.p(), beta.p())?;
    same_p(alpha.p(), k.p)?;
    let p = k.p;
    let rows: Vec<Complex64> = alpha
        .support()
        .elements()
        .par_iter()
        .zip(alpha.weights().par_iter())
        .map(|(&m, &am)| am * beta.iter().map(|(n, bn)| bn * k.get(mulmod(m, n, p))).sum::<Complex64>())
        .collect();
    Ok(rows.into_iter().sum())
}

/// `‖K‖_∞ ‖α‖_2 ‖β‖_2 (|M||N|)^{1/2}`.
pub fn trivial_bound(alpha: &CoeffVec, beta: &CoeffVec, k: &TraceTable) -> f64 {
    k.sup_norm() * alpha.norm(2.0) * beta.norm(2.0) * ((alpha.len() * beta.len()) as f64).sqrt()
}

/// The two terms of the arbitrary-support bound (implied constant 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupportBound {
    pub term1: f64,
    pub term2: f64,
    pub total: f64,
}

/// `‖α‖_{2r/(2r−1)} (p^{1/2r} |N|^{1/2−1/2r} ‖β‖_{2r} + p^{1/4r} ‖β‖_1)`.
pub fn support_bound(r: u32, alpha: &CoeffVec, beta: &CoeffVec, p: u32) -> SupportBound {
    assert!(r >= 1, "r must be >= 1");
    let rf = r as f64;
    let a_norm = alpha.norm(2.0 * rf / (2.0 * rf - 1.0));
    let pf = p as f64;
    let n = beta.len() as f64;
    let term1 = a_norm * pf.powf(1.0 / (2.0 * rf)) * n.powf(0.5 - 1.0 / (2.0 * rf)) * beta.norm(2.0 * rf);
    let term2 = a_norm * pf.powf(1.0 / (4.0 * rf)) * beta.norm(1.0);
    SupportBound { term1, term2, total: term1 + term2 }
}

/// [`support_bound`] for unit weights on sets of sizes `m`, `n`.
pub fn support_bound_unit(r: u32, m: usize, n: usize, p: u32) -> SupportBound {
    let rf = r as f64;
    let (mf, nf, pf) = (m as f64, n as f64, p as f64);
    let a_norm = mf.powf((2.0 * rf - 1.0) / (2.0 * rf));
    let term1 = a_norm * pf.powf(1.0 / (2.0 * rf)) * nf.powf(0.5 - 1.0 / (2.0 * rf)) * nf.powf(1.0 / (2.0 * rf));
    let term2 = a_norm * pf.powf(1.0 / (4.0 * rf)) * nf;
    SupportBound { term1, term2, total: term1 + term2 }
}

/// Right-hand side of the small-doubling bound for hyper-Kloosterman sums
/// (implied constant 1):
///
/// `‖α‖_∞‖β‖_2 |M||N|^{1/2} {|M|^{−1/2} + (p^{3+9λ/4r} γ_1γ_2 / (|M|⁴|N|³))^{1/8r} (log p)^{1/2r}}`
/// with `γ_1 = |N|^{3/2}p^{−1} + 1` and `γ_2 = |N|^{3/2}p^{−1−9λ/4r} + 1`.
pub fn doubling_bound(r: u32, lambda: f64, sizes: (usize, usize), norms: (f64, f64), p: u32) -> f64 {
    assert!(r >= 1 && lambda >= 1.0, "need r >= 1 and lambda >= 1");
    let rf = r as f64;
    let (m, n) = (sizes.0 as f64, sizes.1 as f64);
    let (alpha_inf, beta_2) = norms;
    let lp = (p as f64).ln();
    let shift = 9.0 * lambda / (4.0 * rf);
    let gamma1 = (1.5 * n.ln() - lp).exp() + 1.0;
    let gamma2 = (1.5 * n.ln() - (1.0 + shift) * lp).exp() + 1.0;
    let log_inner = (3.0 + shift) * lp + gamma1.ln() + gamma2.ln() - 4.0 * m.ln() - 3.0 * n.ln();
    let second = (log_inner / (8.0 * rf)).exp() * lp.powf(1.0 / (2.0 * rf));
    alpha_inf * beta_2 * m * n.sqrt() * (m.powf(-0.5) + second)
}

fn inner_sums(beta: &CoeffVec, k: &TraceTable, ms: &[u32]) -> Vec<Complex64> {
    let p = k.p;
    ms.par_iter()
        .map(|&m| beta.iter().map(|(n, bn)| bn * k.get(mulmod(m, n, p))).sum())
        .collect()
}

fn moment_from(inner: &[Complex64], r: u32) -> f64 {
    inner.iter().map(|z| z.norm_sqr().powi(r as i32)).sum()
}

/// `𝓑 = Σ_{m∈M} |Σ_{n∈N} β_n K(mn)|^{2r}`.
pub fn moment_b(r: u32, beta: &CoeffVec, k: &TraceTable, m_set: &SubsetFp) -> Result<f64> {
    assert!(r >= 1, "r must be >= 1");
    same_p(beta.p(), k.p)?;
    same_p(m_set.p(), k.p)?;
    Ok(moment_from(&inner_sums(beta, k, m_set.elements()), r))
}

/// [`moment_b`] with the `m`-sum completed to all of `F_p`.
pub fn complete_moment(r: u32, beta: &CoeffVec, k: &TraceTable) -> Result<f64> {
    assert!(r >= 1, "r must be >= 1");
    same_p(beta.p(), k.p)?;
    let all: Vec<u32> = (0..k.p).collect();
    Ok(moment_from(&inner_sums(beta, k, &all), r))
}

/// `‖α‖_{2r/(2r−1)} 𝓑^{1/2r}` with `𝓑` summed over the support of `α`.
pub fn holder_bound(r: u32, alpha: &CoeffVec, beta: &CoeffVec, k: &TraceTable) -> Result<f64> {
    let rf = r as f64;
    let b = moment_b(r, beta, k, alpha.support())?;
    Ok(alpha.norm(2.0 * rf / (2.0 * rf - 1.0)) * b.powf(1.0 / (2.0 * rf)))
}

/// An element of `PGL_2(F_p)`, stored with its first nonzero entry scaled to 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Pgl2 {
    p: u32,
    m: [u32; 4],
}

impl Pgl2 {
    /// `(a b; c d)`; fails when `ad − bc ≡ 0`.
    pub fn new(a: u32, b: u32, c: u32, d: u32, p: u32) -> Result<Self> {
        let mut m = [a % p, b % p, c % p, d % p];
        let det = (mulmod(m[0], m[3], p) + p - mulmod(m[1], m[2], p)) % p;
        if det == 0 {
            return Err(Error::InvalidInput(format!("singular matrix ({a} {b}; {c} {d}) mod {p}")));
        }
        let lead = *m.iter().find(|&&x| x != 0).expect("nonsingular has a nonzero entry");
        let s = crate::field::pow_mod(lead as u64, p as u64 - 2, p as u64) as u32;
        for x in m.iter_mut() {
            *x = mulmod(*x, s, p);
        }
        Ok(Pgl2 { p, m })
    }

    pub fn identity(p: u32) -> Self {
        Pgl2 { p, m: [1, 0, 0, 1] }
    }

    /// `diag(n, 1)`, acting as `x ↦ nx`.
    pub fn diag(n: u32, p: u32) -> Result<Self> {
        Pgl2::new(n, 0, 0, 1, p)
    }

    pub fn entries(&self) -> [u32; 4] {
        self.m
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// `(ax + b)/(cx + d)`, or `None` for ∞.
    #[inline]
    pub fn act(&self, x: u32) -> Option<u32> {
        let p = self.p;
        let [a, b, c, d] = self.m;
        let num = (mulmod(a, x, p) + b) % p;
        let den = (mulmod(c, x, p) + d) % p;
        if den == 0 {
            return None;
        }
        if den == 1 {
            return Some(num);
        }
        let inv = crate::field::pow_mod(den as u64, p as u64 - 2, p as u64) as u32;
        Some(mulmod(num, inv, p))
    }

    /// Images of every `x ∈ F_p`.
    pub fn image_table(&self) -> Vec<Option<u32>> {
        (0..self.p).map(|x| self.act(x)).collect()
    }
}

/// `γ · x`.
pub fn pgl2_act(g: &Pgl2, x: u32) -> Option<u32> {
    g.act(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sigma {
    Identity,
    Conjugate,
}

/// A tuple `(γ⃗, σ⃗)` indexing a sum of products.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SignedTuple {
    gammas: Vec<Pgl2>,
    sigmas: Vec<Sigma>,
}

impl SignedTuple {
    pub fn new(gammas: Vec<Pgl2>, sigmas: Vec<Sigma>) -> Result<Self> {
        if gammas.len() != sigmas.len() {
            return Err(Error::InvalidInput(format!(
                "{} matrices but {} conjugation flags",
                gammas.len(),
                sigmas.len()
            )));
        }
        if let Some(g) = gammas.first() {
            if gammas.iter().any(|h| h.p() != g.p()) {
                return Err(Error::InvalidInput("matrices over different fields".into()));
            }
        }
        Ok(SignedTuple { gammas, sigmas })
    }

    pub fn gammas(&self) -> &[Pgl2] {
        &self.gammas
    }

    pub fn sigmas(&self) -> &[Sigma] {
        &self.sigmas
    }

    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }
}

/// Normality of a tuple. A tuple may be both normal and r-normal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TupleClass {
    pub normal: bool,
    /// `None` when no `r ≥ 3` was supplied.
    pub r_normal: Option<bool>,
}

impl TupleClass {
    pub fn label(&self) -> &'static str {
        if self.normal {
            "normal"
        } else if self.r_normal == Some(true) {
            "r-normal"
        } else {
            "neither"
        }
    }
}

/// Normal: some `γ` occurs an odd number of times.
/// r-normal (`r ≥ 3`): some occurring `γ` has identity count ≢ conjugate count mod r.
pub fn classify_tuple(t: &SignedTuple, r: Option<u32>) -> TupleClass {
    let mut counts: HashMap<Pgl2, (u32, u32)> = HashMap::new();
    for (g, s) in t.gammas.iter().zip(&t.sigmas) {
        let e = counts.entry(*g).or_default();
        match s {
            Sigma::Identity => e.0 += 1,
            Sigma::Conjugate => e.1 += 1,
        }
    }
    let normal = counts.values().any(|&(i, c)| (i + c) % 2 == 1);
    let r_normal = r.filter(|&r| r >= 3).map(|r| counts.values().any(|&(i, c)| i % r != c % r));
    TupleClass { normal, r_normal }
}

/// `𝔖(K; γ⃗, σ⃗) = Σ_x ∏_i K(γ_i·x)^{σ_i}`; `x` with some `γ_i·x = ∞` are skipped.
pub fn sum_of_products(k: &TraceTable, t: &SignedTuple) -> Result<Complex64> {
    if let Some(g) = t.gammas.first() {
        same_p(g.p(), k.p)?;
    }
    let terms: Vec<Complex64> = (0..k.p)
        .into_par_iter()
        .map(|x| {
            let mut acc = Complex64::new(1.0, 0.0);
            for (g, s) in t.gammas.iter().zip(&t.sigmas) {
                let Some(y) = g.act(x) else {
                    return Complex64::new(0.0, 0.0);
                };
                let v = k.get(y);
                acc *= match s {
                    Sigma::Identity => v,
                    Sigma::Conjugate => v.conj(),
                };
            }
            acc
        })
        .collect();
    Ok(terms.into_iter().sum())
}

/// `𝔄(k⃗, γ⃗; h) = Σ_x ∏_j sym_{k_j}(θ(γ_j·x)) e(hx/p)`.
///
/// `x` is skipped when some `γ_j·x` is ∞ or outside the angle domain.
pub fn correlation_a(angles: &AngleTable, kvec: &[usize], gammas: &[Pgl2], h: u32) -> Result<Complex64> {
    if kvec.len() != gammas.len() {
        return Err(Error::InvalidInput(format!("{} degrees but {} matrices", kvec.len(), gammas.len())));
    }
    for g in gammas {
        same_p(g.p(), angles.p)?;
    }
    let p = angles.p;
    let terms: Vec<Complex64> = (0..p)
        .into_par_iter()
        .map(|x| {
            let mut prod = 1.0;
            for (&kj, g) in kvec.iter().zip(gammas) {
                match g.act(x).and_then(|y| angles.angle(y)) {
                    Some(theta) => prod *= sym_eval(kj, theta),
                    None => return Complex64::new(0.0, 0.0),
                }
            }
            e_frac(((h as u64 % p as u64) * x as u64) % p as u64, p as u64) * prod
        })
        .collect();
    Ok(terms.into_iter().sum())
}

/// The shift vector `b ∈ F_p^{2r}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KmsTuple {
    r: usize,
    b: Vec<u32>,
}

impl KmsTuple {
    pub fn new(r: usize, b: Vec<u32>) -> Result<Self> {
        if r == 0 || b.len() != 2 * r {
            return Err(Error::InvalidInput(format!("need 2r = {} shifts, got {}", 2 * r, b.len())));
        }
        Ok(KmsTuple { r, b })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn shifts(&self) -> &[u32] {
        &self.b
    }
}

/// `Π(K, b) = Σ_y |Σ_x A(y, x)|²` with
/// `A(y, x) = ∏_{j≤r} K(x(y + b_j)) · conj(K(x(y + b_{j+r})))`.
///
/// This equals the triple sum over `(x_1, x_2, y)` and costs `O(p²r)`.
pub fn kms_pi(k: &TraceTable, b: &KmsTuple) -> Result<Complex64> {
    let p = k.p;
    if p > KMS_MAX_P {
        return Err(Error::CostCapExceeded { what: "kms_pi p", cost: p as u128, cap: KMS_MAX_P as u128 });
    }
    let r = b.r;
    let shifts: Vec<u32> = b.b.iter().map(|&s| s % p).collect();
    let per_y: Vec<f64> = (0..p)
        .into_par_iter()
        .map(|y| {
            let ys: Vec<u32> = shifts.iter().map(|&s| (y + s) % p).collect();
            let mut inner = Complex64::new(0.0, 0.0);
            for x in 0..p {
                let mut a = Complex64::new(1.0, 0.0);
                for j in 0..r {
                    a *= k.get(mulmod(x, ys[j], p)) * k.get(mulmod(x, ys[j + r], p)).conj();
                }
                inner += a;
            }
            inner.norm_sqr()
        })
        .collect();
    Ok(Complex64::new(per_y.into_iter().sum(), 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;
    use crate::trace::{kl_angles, kl_bulk};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn one(p: u32) -> TraceTable {
        TraceTable::constant(p, Complex64::new(1.0, 0.0))
    }

    #[test]
    fn unit_everything() {
        let m = CoeffVec::unit(SubsetFp::interval(101, 3, 10));
        let n = CoeffVec::unit(SubsetFp::interval(101, 40, 7));
        let b = bilinear_form(&m, &n, &one(101)).unwrap();
        assert!((b - 70.0).norm() < 1e-12);
        assert!((trivial_bound(&m, &n, &one(101)) - 70.0).abs() < 1e-12);
        let two = TraceTable::constant(101, Complex64::new(2.0, 0.0));
        let m10 = CoeffVec::unit(SubsetFp::interval(101, 0, 10));
        assert!((trivial_bound(&m10, &m10, &two) - 200.0).abs() < 1e-12);
    }

    #[test]
    fn full_group_kloosterman() {
        let f = make_field(101).unwrap();
        let kl = kl_bulk(&f, 2, None).unwrap();
        let u = CoeffVec::unit(SubsetFp::units(101));
        let b = bilinear_form(&u, &u, &kl).unwrap();
        let expected = 100.0 / 101f64.sqrt();
        assert!((b.re - expected).abs() / expected < 1e-6 && b.im.abs() < 1e-6);
    }

    #[test]
    fn field_mismatch() {
        let a = CoeffVec::unit(SubsetFp::units(7));
        let b = CoeffVec::unit(SubsetFp::units(11));
        assert_eq!(bilinear_form(&a, &b, &one(7)), Err(Error::FieldMismatch(7, 11)));
    }

    #[test]
    fn support_bound_unit_weights() {
        let (m, n, p) = (100usize, 10usize, 1009u32);
        let r1 = support_bound_unit(1, m, n, p);
        // r = 1: term1 = |M|^{1/2} p^{1/2} |N|^{1/2}, term2 = |M|^{1/2} p^{1/4} |N|
        assert!((r1.term1 - 10.0 * 1009f64.sqrt() * 10f64.sqrt()).abs() < 1e-9);
        assert!((r1.term2 - 10.0 * 1009f64.powf(0.25) * 10.0).abs() < 1e-9);
        let alpha = CoeffVec::unit(SubsetFp::interval(p, 0, m as u32));
        let beta = CoeffVec::unit(SubsetFp::interval(p, 500, n as u32));
        for r in 1..5 {
            let a = support_bound(r, &alpha, &beta, p);
            let b = support_bound_unit(r, m, n, p);
            assert!((a.total - b.total).abs() / b.total < 1e-12);
        }
    }

    #[test]
    fn support_bound_monotone_when_m_below_sqrt_p() {
        // both terms are nonincreasing in r exactly when |M| <= sqrt(p) (and |M| <= p)
        for &p in &[1009u32, 10007, 100003] {
            let root = (p as f64).sqrt() as usize;
            for m in [2usize, root / 4, root / 2, root] {
                for n in [1usize, 10, 100, (p - 1) as usize] {
                    let mut prev = f64::INFINITY;
                    for r in 1..=12 {
                        let t = support_bound_unit(r, m, n, p).total;
                        assert!(t <= prev * (1.0 + 1e-12), "p={p} m={m} n={n} r={r}");
                        prev = t;
                    }
                }
            }
        }
        // and can increase once |M| > sqrt(p)
        let t_big = support_bound_unit(40, 1000, 10, 10007).total;
        assert!(t_big > support_bound_unit(2, 1000, 10, 10007).total);
    }

    fn doubling_bound_direct(r: f64, l: f64, m: f64, n: f64, a: f64, b: f64, p: f64) -> f64 {
        let g1 = n.powf(1.5) / p + 1.0;
        let g2 = n.powf(1.5) * p.powf(-1.0 - 9.0 * l / (4.0 * r)) + 1.0;
        let inner = p.powf(3.0 + 9.0 * l / (4.0 * r)) * g1 * g2 / (m.powi(4) * n.powi(3));
        a * b * m * n.sqrt() * (m.powf(-0.5) + inner.powf(1.0 / (8.0 * r)) * p.ln().powf(1.0 / (2.0 * r)))
    }

    #[test]
    fn doubling_bound_closed_forms() {
        for &(r, l, m, n, p) in &[(2u32, 1.0, 1000usize, 1000usize, 100_000u32), (4, 2.0, 100, 100, 10_000), (3, 1.0, 1, 50, 10_007)] {
            let got = doubling_bound(r, l, (m, n), (1.0, (n as f64).sqrt()), p);
            let want = doubling_bound_direct(r as f64, l, m as f64, n as f64, 1.0, (n as f64).sqrt(), p as f64);
            assert!((got - want).abs() / want < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn moments() {
        let p = 101;
        let beta = CoeffVec::unit(SubsetFp::interval(p, 5, 9));
        let b = moment_b(1, &beta, &one(p), &SubsetFp::full(p)).unwrap();
        assert!((b - 101.0 * 81.0).abs() < 1e-9);
        let f = make_field(101).unwrap();
        let kl = kl_bulk(&f, 2, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let m = SubsetFp::random(p, 30, &mut rng).unwrap();
            let beta = CoeffVec::random(SubsetFp::random(p, 15, &mut rng).unwrap(), &mut rng);
            for r in 1..4 {
                assert!(complete_moment(r, &beta, &kl).unwrap() >= moment_b(r, &beta, &kl, &m).unwrap());
            }
        }
    }

    #[test]
    fn pgl2_basics() {
        let p = 101;
        let id = Pgl2::identity(p);
        let w = Pgl2::new(0, 1, 1, 0, p).unwrap();
        assert_eq!(pgl2_act(&id, 17), Some(17));
        assert_eq!(pgl2_act(&w, 0), None);
        assert_eq!(pgl2_act(&Pgl2::diag(5, p).unwrap(), 30), Some(150 % 101));
        assert_eq!(Pgl2::new(2, 0, 0, 2, p).unwrap(), id);
        assert_eq!(Pgl2::new(6, 3, 9, 12, p).unwrap(), Pgl2::new(2, 1, 3, 4, p).unwrap());
        assert!(Pgl2::new(1, 2, 2, 4, p).is_err());
    }

    #[test]
    fn classification() {
        let p = 101;
        let g = Pgl2::diag(3, p).unwrap();
        let h = Pgl2::diag(7, p).unwrap();
        let idn = Sigma::Identity;
        let pair = SignedTuple::new(vec![g, g], vec![idn, idn]).unwrap();
        let c = classify_tuple(&pair, Some(3));
        assert!(!c.normal);
        assert_eq!(c.r_normal, Some(true));
        assert_eq!(c.label(), "r-normal");
        let mixed = SignedTuple::new(vec![g, g], vec![idn, Sigma::Conjugate]).unwrap();
        assert_eq!(classify_tuple(&mixed, Some(3)).label(), "neither");
        let three = SignedTuple::new(vec![g, h, h], vec![idn; 3]).unwrap();
        assert_eq!(classify_tuple(&three, None).label(), "normal");
        assert!(SignedTuple::new(vec![g], vec![]).is_err());
    }

    #[test]
    fn second_moment_product() {
        let f = make_field(7).unwrap();
        let kl = kl_bulk(&f, 2, None).unwrap();
        let id = Pgl2::identity(7);
        let t = SignedTuple::new(vec![id, id], vec![Sigma::Identity, Sigma::Conjugate]).unwrap();
        let s = sum_of_products(&kl, &t).unwrap();
        assert!((s.re - 41.0 / 7.0).abs() < 1e-8 && s.im.abs() < 1e-8);
    }

    #[test]
    fn correlation_trivial_degree() {
        let f = make_field(101).unwrap();
        let kl = kl_bulk(&f, 2, None).unwrap();
        let ang = kl_angles(&kl).unwrap();
        let id = Pgl2::identity(101);
        for h in 1..101 {
            let a = correlation_a(&ang, &[0], &[id], h).unwrap();
            assert!((a + 1.0).norm() <= 1.0);
            assert!((a + 1.0).norm() < 1e-9);
        }
        assert!(correlation_a(&ang, &[0, 1], &[id], 1).is_err());
    }

    fn pi_triple(k: &TraceTable, b: &[u32], r: usize) -> Complex64 {
        let p = k.p;
        let mut s = Complex64::new(0.0, 0.0);
        for x1 in 0..p {
            for x2 in 0..p {
                for y in 0..p {
                    let mut prod = Complex64::new(1.0, 0.0);
                    for j in 0..r {
                        let u = (y + b[j]) % p;
                        let v = (y + b[j + r]) % p;
                        prod *= k.get(mulmod(x1, u, p))
                            * k.get(mulmod(x2, u, p)).conj()
                            * k.get(mulmod(x1, v, p)).conj()
                            * k.get(mulmod(x2, v, p));
                    }
                    s += prod;
                }
            }
        }
        s
    }

    #[test]
    fn kms_factorization_matches_triple_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for &p in &[7u64, 13, 31] {
            let f = make_field(p).unwrap();
            for k in [2usize, 3] {
                let kl = kl_bulk(&f, k, None).unwrap();
                for r in 1..=2usize {
                    let b: Vec<u32> = (0..2 * r).map(|_| rng.gen_range(0..p as u32)).collect();
                    let fast = kms_pi(&kl, &KmsTuple::new(r, b.clone()).unwrap()).unwrap();
                    let slow = pi_triple(&kl, &b, r);
                    assert!((fast - slow).norm() <= 1e-9 * slow.norm().max(1.0), "p={p} k={k} r={r}");
                }
            }
        }
    }

    #[test]
    fn kms_trivial_cases() {
        assert_eq!(
            kms_pi(&TraceTable::constant(31, Complex64::new(0.0, 0.0)), &KmsTuple::new(1, vec![1, 2]).unwrap()).unwrap(),
            Complex64::new(0.0, 0.0)
        );
        assert!(KmsTuple::new(2, vec![1, 2, 3]).is_err());
        let big = TraceTable::constant(2003, Complex64::new(1.0, 0.0));
        assert!(matches!(kms_pi(&big, &KmsTuple::new(1, vec![0, 0]).unwrap()), Err(Error::CostCapExceeded { .. })));
    }
}
