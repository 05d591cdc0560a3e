//! Trace functions: hyper-Kloosterman sums, symmetric powers of `Kl_2`, and
//! elliptic Frobenius traces.
//!
//! Every table is indexed by the residues `0..p`. Kloosterman tables store
//! the normalized sum
//!
//! ```text
//! Kl_k(a) = p^{(1-k)/2} Σ_{x_1⋯x_k = a} χ_1(x_1)⋯χ_k(x_k) e((x_1+⋯+x_k)/p)
//! ```
//!
//! with `Kl_k(0) = 0`. Angles follow `Kl_2(a) = 2cos θ(a)` and
//! `a_p(t)/√p = 2cos θ̃(t)`.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{e_frac, FieldContext};
use crate::report::fmt_f64;
use crate::sets::SubsetFp;

/// Largest `p^{k-1}` that [`kl_direct`] will enumerate.
pub const DIRECT_LIMIT: u128 = 100_000_000;

/// Largest `|T|·p` that [`elliptic_traces`] will accept.
pub const ELLIPTIC_COST_CAP: u128 = 1_000_000_000;

const ANGLE_CLAMP_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceKind {
    HyperKloosterman { k: usize, a_scale: u32, twist: Option<Vec<usize>> },
    SymPowerKl { k: usize },
    EllipticSymPower { k: usize, family: String },
}

impl TraceKind {
    pub fn name(&self) -> &'static str {
        match self {
            TraceKind::HyperKloosterman { .. } => "hyper_kloosterman",
            TraceKind::SymPowerKl { .. } => "sym_power_kl",
            TraceKind::EllipticSymPower { .. } => "elliptic_sym_power",
        }
    }

    pub fn k(&self) -> usize {
        match self {
            TraceKind::HyperKloosterman { k, .. }
            | TraceKind::SymPowerKl { k }
            | TraceKind::EllipticSymPower { k, .. } => *k,
        }
    }
}

/// Values `K(a)` of one trace function for every `a ∈ F_p`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceTable {
    pub kind: TraceKind,
    pub p: u32,
    pub values: Vec<Complex64>,
    pub meta: String,
}

impl TraceTable {
    /// Table over `F_p` with constant value, mostly for tests and sanity runs.
    pub fn constant(p: u32, value: Complex64) -> Self {
        TraceTable {
            kind: TraceKind::SymPowerKl { k: 0 },
            p,
            values: vec![value; p as usize],
            meta: "constant".into(),
        }
    }

    #[inline]
    pub fn get(&self, a: u32) -> Complex64 {
        self.values[(a % self.p) as usize]
    }

    /// `‖K‖_∞`.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `K(a·x)` as a new table.
    pub fn dilate(&self, a: u32) -> Self {
        let p = self.p as u64;
        let values = (0..p).map(|x| self.values[((x * a as u64) % p) as usize]).collect();
        TraceTable { kind: self.kind.clone(), p: self.p, values, meta: format!("{}; dilated by {a}", self.meta) }
    }

    /// CSV export: one `# kind=…,p=…,k=…` line, the column header, then one row per residue.
    pub fn to_csv(&self, angles: Option<&AngleTable>) -> String {
        let mut out = String::with_capacity(self.values.len() * 48);
        let _ = writeln!(out, "# kind={},p={},k={}", self.kind.name(), self.p, self.kind.k());
        if angles.is_some() {
            out.push_str("a,re,im,angle\n");
        } else {
            out.push_str("a,re,im\n");
        }
        for (a, z) in self.values.iter().enumerate() {
            let _ = write!(out, "{a},{},{}", fmt_f64(z.re), fmt_f64(z.im));
            if let Some(ang) = angles {
                match ang.angle(a as u32) {
                    Some(t) => {
                        let _ = write!(out, ",{}", fmt_f64(t));
                    }
                    None => out.push(','),
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Where an [`AngleTable`] came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleSource {
    Kloosterman,
    Elliptic(String),
}

/// Angles `θ(a) ∈ [0, π]` on a domain of residues.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleTable {
    pub p: u32,
    pub source: AngleSource,
    pub angles: Vec<f64>,
    pub domain: Vec<bool>,
}

impl AngleTable {
    #[inline]
    pub fn angle(&self, a: u32) -> Option<f64> {
        let i = (a % self.p) as usize;
        self.domain[i].then(|| self.angles[i])
    }

    pub fn domain_size(&self) -> usize {
        self.domain.iter().filter(|&&b| b).count()
    }

    /// Angles on the domain in increasing residue order.
    pub fn domain_angles(&self) -> Vec<f64> {
        self.angles.iter().zip(&self.domain).filter(|(_, &d)| d).map(|(&t, _)| t).collect()
    }
}

/// Direct enumeration of `Kl_k(a, p)` over `(x_1, …, x_{k-1}) ∈ (F_p^×)^{k-1}`.
pub fn kl_direct(ctx: &FieldContext, a: u32, k: usize) -> Result<Complex64> {
    if k < 2 {
        return Err(Error::InvalidInput(format!("Kloosterman rank k = {k} must be >= 2")));
    }
    let p = ctx.p() as u64;
    let work = (p as u128).checked_pow(k as u32 - 1).unwrap_or(u128::MAX);
    if work > DIRECT_LIMIT {
        return Err(Error::OracleTooLarge(work));
    }
    let a = a % ctx.p();
    if a == 0 {
        return Err(Error::ZeroArgument);
    }
    let inv = ctx.inverses();
    // histogram of x_1 + … + x_k mod p, then one pass of e(s/p)
    let mut counts = vec![0u64; p as usize];
    fn walk(depth: usize, prod: u64, sum: u64, p: u64, a: u64, inv: &[u32], counts: &mut [u64]) {
        if depth == 0 {
            let last = a * inv[prod as usize] as u64 % p;
            counts[((sum + last) % p) as usize] += 1;
            return;
        }
        for x in 1..p {
            walk(depth - 1, prod * x % p, (sum + x) % p, p, a, inv, counts);
        }
    }
    walk(k - 1, 1, 0, p, a as u64, inv, &mut counts);
    let s: Complex64 = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(s, &c)| e_frac(s as u64, p) * c as f64)
        .sum();
    Ok(s * (p as f64).powf((1.0 - k as f64) / 2.0))
}

/// All values of `Kl_k(·, χ⃗; p)` through two length-(p−1) transforms.
///
/// The Mellin transform of the unnormalized sum is `∏_i τ(χ·χ_i)`; `twist`
/// lists the character indices of `χ_1, …, χ_k` (untwisted when `None`).
pub fn kl_bulk(ctx: &FieldContext, k: usize, twist: Option<&[usize]>) -> Result<TraceTable> {
    if k < 2 {
        return Err(Error::InvalidInput(format!("Kloosterman rank k = {k} must be >= 2")));
    }
    if let Some(t) = twist {
        if t.len() != k {
            return Err(Error::InvalidInput(format!("twist has {} characters, expected {k}", t.len())));
        }
    }
    let q = ctx.group_order();
    let sqrt_p = (ctx.p() as f64).sqrt();
    let tau: Vec<Complex64> = ctx.gauss_sums().values.into_iter().map(|z| z / sqrt_p).collect();
    let hat: Vec<Complex64> = match twist {
        None => tau.iter().map(|z| z.powi(k as i32)).collect(),
        Some(t) => (0..q).map(|j| t.iter().map(|&ji| tau[(j + ji) % q]).product()).collect(),
    };
    let mut values = ctx.mellin_inverse(&hat).values;
    for v in values.iter_mut() {
        *v *= sqrt_p;
    }
    values[0] = Complex64::new(0.0, 0.0);
    let normalized_twist = twist.map(|t| t.iter().map(|&j| j % q).collect());
    Ok(TraceTable {
        kind: TraceKind::HyperKloosterman { k, a_scale: 1, twist: normalized_twist },
        p: ctx.p(),
        values,
        meta: "normalized by p^((1-k)/2); K(0) = 0".into(),
    })
}

/// Untwisted `Kl_k(a·x)` for a fixed scale `a ∈ F_p^×`.
pub fn kl_scaled(ctx: &FieldContext, k: usize, a: u32) -> Result<TraceTable> {
    if a.is_multiple_of(ctx.p()) {
        return Err(Error::ZeroArgument);
    }
    let base = kl_bulk(ctx, k, None)?;
    let mut t = base.dilate(a);
    t.kind = TraceKind::HyperKloosterman { k, a_scale: a % ctx.p(), twist: None };
    t.meta = base.meta;
    Ok(t)
}

/// `θ_p(a) = arccos(Kl_2(a)/2)` on `F_p^×`.
pub fn kl_angles(table: &TraceTable) -> Result<AngleTable> {
    match &table.kind {
        TraceKind::HyperKloosterman { k: 2, twist: None, .. } => {}
        other => {
            return Err(Error::InvalidInput(format!("angles need an untwisted Kl_2 table, got {other:?}")))
        }
    }
    let n = table.p as usize;
    let mut angles = vec![0.0; n];
    let mut domain = vec![false; n];
    for a in 1..n {
        let z = table.values[a];
        if z.im.abs() > ANGLE_CLAMP_TOL {
            return Err(Error::NonRealValue { a: a as u32, im: z.im });
        }
        angles[a] = clamped_arccos(z.re / 2.0)?;
        domain[a] = true;
    }
    Ok(AngleTable { p: table.p, source: AngleSource::Kloosterman, angles, domain })
}

fn clamped_arccos(c: f64) -> Result<f64> {
    if c.abs() > 1.0 + ANGLE_CLAMP_TOL || c.is_nan() {
        return Err(Error::OutOfRange(2.0 * c));
    }
    Ok(c.clamp(-1.0, 1.0).acos())
}

/// `sym_k(θ) = sin((k+1)θ)/sin θ`, evaluated as the Chebyshev value `U_k(cos θ)`.
pub fn sym_eval(k: usize, theta: f64) -> f64 {
    let x = theta.cos();
    chebyshev_u(k, x)
}

/// `U_k(x)` by the three-term recurrence.
pub fn chebyshev_u(k: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * x);
    if k == 0 {
        return prev;
    }
    for _ in 1..k {
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `sym_k(θ(a))` on the angle domain, 0 elsewhere.
pub fn sym_power_table(angles: &AngleTable, k: usize) -> TraceTable {
    let values = angles
        .angles
        .iter()
        .zip(&angles.domain)
        .map(|(&t, &d)| Complex64::new(if d { sym_eval(k, t) } else { 0.0 }, 0.0))
        .collect();
    let kind = match &angles.source {
        AngleSource::Kloosterman => TraceKind::SymPowerKl { k },
        AngleSource::Elliptic(id) => TraceKind::EllipticSymPower { k, family: id.clone() },
    };
    TraceTable { kind, p: angles.p, values, meta: "sym_k of angle table; 0 off the domain".into() }
}

/// Integer polynomial, coefficients from the constant term upward.
pub type IntPoly = Vec<i128>;

fn trim(mut v: IntPoly) -> IntPoly {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

fn poly_mul(a: &[i128], b: &[i128]) -> Result<IntPoly> {
    if a.is_empty() || b.is_empty() {
        return Ok(Vec::new());
    }
    let mut out = vec![0i128; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            let t = x.checked_mul(y).ok_or(Error::CoefficientOverflow)?;
            out[i + j] = out[i + j].checked_add(t).ok_or(Error::CoefficientOverflow)?;
        }
    }
    Ok(trim(out))
}

fn poly_lincomb(ca: i128, a: &[i128], cb: i128, b: &[i128]) -> Result<IntPoly> {
    let n = a.len().max(b.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let x = a.get(i).copied().unwrap_or(0).checked_mul(ca).ok_or(Error::CoefficientOverflow)?;
        let y = b.get(i).copied().unwrap_or(0).checked_mul(cb).ok_or(Error::CoefficientOverflow)?;
        out.push(x.checked_add(y).ok_or(Error::CoefficientOverflow)?);
    }
    Ok(trim(out))
}

/// Weierstrass family `y² = x³ + a(t)x + b(t)` with integer polynomial coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EllipticFamily {
    a_poly: Vec<i64>,
    b_poly: Vec<i64>,
    a_cubed: IntPoly,
    delta_poly: IntPoly,
    r_delta: usize,
}

impl EllipticFamily {
    /// Fails with `ZeroDiscriminantPoly` when `Δ(t) = −16(4a³ + 27b²)` vanishes identically.
    pub fn new(a_poly: Vec<i64>, b_poly: Vec<i64>) -> Result<Self> {
        let a: IntPoly = trim(a_poly.iter().map(|&c| c as i128).collect());
        let b: IntPoly = trim(b_poly.iter().map(|&c| c as i128).collect());
        let a2 = poly_mul(&a, &a)?;
        let a_cubed = poly_mul(&a2, &a)?;
        let b2 = poly_mul(&b, &b)?;
        let inner = poly_lincomb(4, &a_cubed, 27, &b2)?;
        let delta_poly = poly_lincomb(-16, &inner, 0, &[])?;
        if delta_poly.is_empty() {
            return Err(Error::ZeroDiscriminantPoly);
        }
        let r_delta = distinct_root_count(&delta_poly);
        Ok(EllipticFamily { a_poly, b_poly, a_cubed, delta_poly, r_delta })
    }

    pub fn a_poly(&self) -> &[i64] {
        &self.a_poly
    }

    pub fn b_poly(&self) -> &[i64] {
        &self.b_poly
    }

    pub fn delta_poly(&self) -> &[i128] {
        &self.delta_poly
    }

    /// Number of distinct complex roots of `Δ`.
    pub fn r_delta(&self) -> usize {
        self.r_delta
    }

    /// Short identifier such as `a=[0,1];b=[1]`.
    pub fn id(&self) -> String {
        format!("a={:?};b={:?}", self.a_poly, self.b_poly).replace(' ', "")
    }

    /// `j(t)` is non-constant iff `a³` and `Δ` are not proportional over `Q`.
    pub fn j_nonconstant(&self) -> bool {
        if self.a_cubed.is_empty() {
            return false;
        }
        primitive_part(&self.a_cubed) != primitive_part(&self.delta_poly)
    }

    /// `(a(t), b(t), Δ(t))` reduced mod p.
    pub fn eval_mod(&self, t: u32, p: u32) -> (u64, u64, u64) {
        let a = eval_i64_mod(&self.a_poly, t, p);
        let b = eval_i64_mod(&self.b_poly, t, p);
        let pm = p as u64;
        let a3 = a * a % pm * a % pm;
        let inner = (4 * a3 + 27 * (b * b % pm)) % pm;
        let delta = (pm - (16 * inner) % pm) % pm;
        (a, b, delta)
    }
}

/// Divides out the content and makes the leading coefficient positive.
fn primitive_part(v: &[i128]) -> IntPoly {
    fn gcd(a: u128, b: u128) -> u128 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    let g = v.iter().fold(0u128, |acc, &c| gcd(acc, c.unsigned_abs())) as i128;
    let sign = if v.last().copied().unwrap_or(0) < 0 { -1 } else { 1 };
    v.iter().map(|&c| sign * (c / g)).collect()
}

fn eval_i64_mod(poly: &[i64], t: u32, p: u32) -> u64 {
    let pm = p as i128;
    let mut acc: i128 = 0;
    for &c in poly.iter().rev() {
        acc = (acc * t as i128 + c as i128).rem_euclid(pm);
    }
    acc as u64
}

/// `deg Δ − deg gcd(Δ, Δ')`, with the gcd taken modulo several large primes.
fn distinct_root_count(poly: &[i128]) -> usize {
    let deg = poly.len() - 1;
    if deg == 0 {
        return 0;
    }
    const PRIMES: [u64; 4] = [2_305_843_009_213_693_951, 4_611_686_018_427_387_847, 1_000_000_000_000_000_003, 998_244_353];
    let deriv: IntPoly = poly.iter().enumerate().skip(1).map(|(i, &c)| c * i as i128).collect();
    let mut best = deg;
    for &q in &PRIMES {
        let lead = poly[deg].rem_euclid(q as i128) as u64;
        if lead == 0 || (deg as u64).is_multiple_of(q) {
            continue;
        }
        let f: Vec<u64> = poly.iter().map(|&c| c.rem_euclid(q as i128) as u64).collect();
        let g: Vec<u64> = deriv.iter().map(|&c| c.rem_euclid(q as i128) as u64).collect();
        let gdeg = modpoly::gcd_degree(f, g, q);
        best = best.min(gdeg);
    }
    deg - best
}

mod modpoly {
    fn mulm(a: u64, b: u64, q: u64) -> u64 {
        ((a as u128 * b as u128) % q as u128) as u64
    }

    fn inv(a: u64, q: u64) -> u64 {
        crate::field::pow_mod(a, q - 2, q)
    }

    fn trim(v: &mut Vec<u64>) {
        while v.last() == Some(&0) {
            v.pop();
        }
    }

    fn rem(mut a: Vec<u64>, b: &[u64], q: u64) -> Vec<u64> {
        let db = b.len() - 1;
        let lead_inv = inv(b[db], q);
        trim(&mut a);
        while a.len() > db {
            let da = a.len() - 1;
            let c = mulm(a[da], lead_inv, q);
            for (i, &bi) in b.iter().enumerate() {
                let idx = da - db + i;
                a[idx] = (a[idx] + q - mulm(c, bi, q)) % q;
            }
            trim(&mut a);
        }
        a
    }

    /// Degree of gcd(f, g) over F_q.
    pub fn gcd_degree(mut f: Vec<u64>, mut g: Vec<u64>, q: u64) -> usize {
        trim(&mut f);
        trim(&mut g);
        while !g.is_empty() {
            let r = rem(f, &g, q);
            f = g;
            g = r;
        }
        f.len().saturating_sub(1)
    }
}

/// Frobenius traces along a family.
#[derive(Debug, Clone)]
pub struct EllipticTraces {
    /// `a_p(t)/√p` on unmasked `t ∈ T`, 0 elsewhere.
    pub table: TraceTable,
    pub angles: AngleTable,
    /// Exact `a_p(t)`; `None` off `T` or where `Δ(t) ≡ 0`.
    pub ap: Vec<Option<i64>>,
    /// Residues of `T` with `Δ(t) ≡ 0 mod p`.
    pub masked: Vec<u32>,
}

/// Quadratic character table: 1 on nonzero squares, −1 on non-squares, 0 at 0.
pub fn legendre_table(p: u32) -> Vec<i8> {
    let mut chi = vec![-1i8; p as usize];
    chi[0] = 0;
    let pm = p as u64;
    for x in 1..=(pm / 2) {
        chi[(x * x % pm) as usize] = 1;
    }
    chi
}

/// `a_p(t) = −Σ_x χ_2(x³ + a(t)x + b(t))` for every `t ∈ T` with `Δ(t) ≢ 0`.
pub fn elliptic_traces(ctx: &FieldContext, fam: &EllipticFamily, t_set: &SubsetFp) -> Result<EllipticTraces> {
    let p = ctx.p();
    if t_set.p() != p {
        return Err(Error::FieldMismatch(t_set.p(), p));
    }
    if !fam.j_nonconstant() {
        return Err(Error::ConstantJInvariant);
    }
    let cost = t_set.len() as u128 * p as u128;
    if cost > ELLIPTIC_COST_CAP {
        return Err(Error::CostCapExceeded { what: "elliptic point counting |T|·p", cost, cap: ELLIPTIC_COST_CAP });
    }
    let chi = legendre_table(p);
    let pm = p as u64;
    let cubes: Vec<u64> = (0..pm).map(|x| x * x % pm * x % pm).collect();
    let per_t: Vec<(u32, Option<i64>)> = t_set
        .elements()
        .par_iter()
        .map(|&t| {
            let (a, b, delta) = fam.eval_mod(t, p);
            if delta == 0 {
                return (t, None);
            }
            let mut s: i64 = 0;
            let mut ax = b; // a·x + b, updated incrementally
            for x in 0..pm as usize {
                let v = cubes[x] + ax;
                let v = if v >= pm { v - pm } else { v };
                s += chi[v as usize] as i64;
                ax += a;
                if ax >= pm {
                    ax -= pm;
                }
            }
            (t, Some(-s))
        })
        .collect();

    let n = p as usize;
    let sqrt_p = (p as f64).sqrt();
    let mut values = vec![Complex64::new(0.0, 0.0); n];
    let mut angles = vec![0.0; n];
    let mut domain = vec![false; n];
    let mut ap = vec![None; n];
    let mut masked = Vec::new();
    for (t, v) in per_t {
        match v {
            None => masked.push(t),
            Some(apt) => {
                let x = apt as f64 / sqrt_p;
                values[t as usize] = Complex64::new(x, 0.0);
                angles[t as usize] = clamped_arccos(x / 2.0)?;
                domain[t as usize] = true;
                ap[t as usize] = Some(apt);
            }
        }
    }
    let id = fam.id();
    Ok(EllipticTraces {
        table: TraceTable {
            kind: TraceKind::EllipticSymPower { k: 1, family: id.clone() },
            p,
            values,
            meta: "a_p(t)/sqrt(p) on unmasked t in T".into(),
        },
        angles: AngleTable { p, source: AngleSource::Elliptic(id), angles, domain },
        ap,
        masked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn kl2_at_one_mod_seven() {
        let f = make_field(7).unwrap();
        let z = kl_direct(&f, 1, 2).unwrap();
        let expected = (4.0 * (2.0 * PI / 7.0).cos() + 2.0 * (4.0 * PI / 7.0).cos()) / 7f64.sqrt();
        assert!((z.re - expected).abs() < 1e-12 && z.im.abs() < 1e-12);
        assert!((z.re - 0.77442).abs() < 1e-5);
        for a in 1..7 {
            assert!(kl_direct(&f, a, 2).unwrap().norm() <= 2.0);
        }
    }

    #[test]
    fn kl3_conjugate_symmetry() {
        let f = make_field(11).unwrap();
        for a in 1..11 {
            let z = kl_direct(&f, a, 3).unwrap();
            let w = kl_direct(&f, f.neg(a), 3).unwrap();
            assert!((z.conj() - w).norm() < 1e-12);
        }
    }

    #[test]
    fn direct_rejects() {
        let f = make_field(10007).unwrap();
        assert!(matches!(kl_direct(&f, 1, 3), Err(Error::OracleTooLarge(_))));
        assert_eq!(kl_direct(&f, 0, 2), Err(Error::ZeroArgument));
        assert!(kl_bulk(&f, 1, None).is_err());
        assert!(kl_bulk(&f, 2, Some(&[1])).is_err());
    }

    #[test]
    fn bulk_matches_direct_including_twists() {
        let f = make_field(11).unwrap();
        for twist in [None, Some(vec![1usize, 3]), Some(vec![0, 5])] {
            let t = kl_bulk(&f, 2, twist.as_deref()).unwrap();
            for a in 1..11u32 {
                let direct = twisted_direct(&f, a, twist.as_deref().unwrap_or(&[0, 0]));
                assert!((t.get(a) - direct).norm() < 1e-10, "twist {twist:?} a={a}");
            }
            assert_eq!(t.get(0), Complex64::new(0.0, 0.0));
        }
    }

    fn twisted_direct(f: &FieldContext, a: u32, twist: &[usize]) -> Complex64 {
        let p = f.p();
        let mut s = Complex64::new(0.0, 0.0);
        for x in 1..p {
            let y = f.mul(a, f.inv(x).unwrap());
            s += f.mult_char(twist[0], x).unwrap()
                * f.mult_char(twist[1], y).unwrap()
                * f.additive_char(f.add(x, y));
        }
        s / (p as f64).sqrt()
    }

    #[test]
    fn angles() {
        let f = make_field(7).unwrap();
        let t = kl_bulk(&f, 2, None).unwrap();
        let ang = kl_angles(&t).unwrap();
        assert!((ang.angle(1).unwrap() - 0.38721f64.acos()).abs() < 1e-4);
        assert!((ang.angle(1).unwrap() - 1.17310).abs() < 1e-4);
        assert_eq!(ang.angle(0), None);
        for a in 1..7 {
            assert!((2.0 * ang.angle(a).unwrap().cos() - t.get(a).re).abs() < 1e-9);
        }
        let mut fake = t.clone();
        fake.values[1] = Complex64::new(2.0, 0.0);
        fake.values[2] = Complex64::new(0.0, 0.0);
        let a2 = kl_angles(&fake).unwrap();
        assert_eq!(a2.angle(1), Some(0.0));
        assert!((a2.angle(2).unwrap() - FRAC_PI_2).abs() < 1e-15);
        fake.values[3] = Complex64::new(0.1, 1e-3);
        assert!(matches!(kl_angles(&fake), Err(Error::NonRealValue { a: 3, .. })));
        fake.values[3] = Complex64::new(2.1, 0.0);
        assert!(matches!(kl_angles(&fake), Err(Error::OutOfRange(_))));
        let k3 = kl_bulk(&f, 3, None).unwrap();
        assert!(kl_angles(&k3).is_err());
    }

    #[test]
    fn sym_values() {
        for &theta in &[0.0, 0.3, 1.0, FRAC_PI_2, 2.5, PI] {
            assert_eq!(sym_eval(0, theta), 1.0);
            assert!((sym_eval(1, theta) - 2.0 * theta.cos()).abs() < 1e-14);
        }
        assert!((sym_eval(2, FRAC_PI_2) + 1.0).abs() < 1e-14);
        for k in 0..12 {
            assert_eq!(sym_eval(k, 0.0), (k + 1) as f64);
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert!((sym_eval(k, PI) - sign * (k + 1) as f64).abs() < 1e-9);
            for &theta in &[0.2, 0.9, 1.7, 2.9] {
                let ratio = ((k + 1) as f64 * theta).sin() / theta.sin();
                assert!((sym_eval(k, theta) - ratio).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn sym_power_tables() {
        let f = make_field(101).unwrap();
        let kl = kl_bulk(&f, 2, None).unwrap();
        let ang = kl_angles(&kl).unwrap();
        let s0 = sym_power_table(&ang, 0);
        let s1 = sym_power_table(&ang, 1);
        let s2 = sym_power_table(&ang, 2);
        for a in 1..101u32 {
            assert!((s1.get(a).re - kl.get(a).re).abs() < 1e-9);
            assert!((s1.get(a).re.powi(2) - s2.get(a).re - s0.get(a).re).abs() < 1e-9);
        }
        for k in 0..8 {
            let t = sym_power_table(&ang, k);
            assert!(t.sup_norm() <= (k + 1) as f64 + 1e-12);
            assert_eq!(t.get(0).re, 0.0);
        }
    }

    #[test]
    fn j_invariant_checks() {
        assert!(EllipticFamily::new(vec![0, 1], vec![1]).unwrap().j_nonconstant());
        assert!(!EllipticFamily::new(vec![1], vec![1]).unwrap().j_nonconstant());
        assert!(!EllipticFamily::new(vec![0], vec![0, 1]).unwrap().j_nonconstant());
        // a = t, b = t: a³ = t³, Δ = −16(4t³ + 27t²) not proportional
        assert!(EllipticFamily::new(vec![0, 1], vec![0, 1]).unwrap().j_nonconstant());
        // a = t², b = t³: Δ = −16·31·t⁶ ∝ a³ = t⁶
        assert!(!EllipticFamily::new(vec![0, 0, 1], vec![0, 0, 0, 1]).unwrap().j_nonconstant());
        assert_eq!(EllipticFamily::new(vec![], vec![]).unwrap_err(), Error::ZeroDiscriminantPoly);
    }

    #[test]
    fn discriminant_root_counts() {
        // Δ = −16(4t³ + 27): three simple roots
        assert_eq!(EllipticFamily::new(vec![0, 1], vec![1]).unwrap().r_delta(), 3);
        // Δ = −432 t²: one root
        assert_eq!(EllipticFamily::new(vec![0], vec![0, 1]).unwrap().r_delta(), 1);
        // constant Δ
        assert_eq!(EllipticFamily::new(vec![1], vec![1]).unwrap().r_delta(), 0);
        // a = −3t², b = 2t³: 4a³ + 27b² = −108t⁶ + 108t⁶ = 0
        assert!(EllipticFamily::new(vec![0, 0, -3], vec![0, 0, 0, 2]).is_err());
    }

    #[test]
    fn curve_at_p5() {
        let f = make_field(5).unwrap();
        let fam = EllipticFamily::new(vec![0, 1], vec![1]).unwrap();
        let tr = elliptic_traces(&f, &fam, &SubsetFp::new(5, vec![1]).unwrap()).unwrap();
        assert_eq!(tr.ap[1], Some(-3));
    }

    #[test]
    fn elliptic_rejects_constant_j() {
        let f = make_field(101).unwrap();
        let fam = EllipticFamily::new(vec![1], vec![1]).unwrap();
        assert_eq!(elliptic_traces(&f, &fam, &SubsetFp::full(101)).unwrap_err(), Error::ConstantJInvariant);
    }

    #[test]
    fn csv_layout() {
        let f = make_field(7).unwrap();
        let t = kl_bulk(&f, 2, None).unwrap();
        let ang = kl_angles(&t).unwrap();
        let csv = t.to_csv(Some(&ang));
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# kind=hyper_kloosterman,p=7,k=2");
        assert_eq!(lines[1], "a,re,im,angle");
        assert_eq!(lines.len(), 2 + 7);
        assert!(lines[2].starts_with("0,") && lines[2].ends_with(','));
    }
}
