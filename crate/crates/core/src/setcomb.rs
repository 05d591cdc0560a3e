//! Additive combinatorics over `F_p`: sumsets, multiplicative energy, the
//! eight-fold count `D(A)`, generalized arithmetic progressions, and the
//! counting quantities `Π_1`, `Π_2` built from `σ(x_1, x_2, y)`.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dft::{dft, dft_conj};
use crate::error::{Error, Result};
use crate::field::FieldContext;
use crate::sets::SubsetFp;

/// Largest progression volume [`gap_enumerate`] will walk.
pub const GAP_VOLUME_CAP: u128 = 10_000_000;

/// Largest `|M|²|N_0||N_2|` accepted by [`burgess_quantities`].
pub const BURGESS_COST_CAP: u128 = 20_000_000;

/// Rounding drift tolerated when a convolution result is snapped to integers.
pub const MAX_DRIFT: f64 = 0.4;

/// Below this many pairs the difference counts are tallied directly.
const DIRECT_PAIR_LIMIT: usize = 20_000_000;

/// `A + B` mod p.
pub fn sumset(a: &SubsetFp, b: &SubsetFp) -> Result<SubsetFp> {
    a.check_same_field(b)?;
    let p = a.p();
    let mut hit = vec![false; p as usize];
    for x in a.iter() {
        for y in b.iter() {
            let s = x + y;
            hit[(if s >= p { s - p } else { s }) as usize] = true;
        }
    }
    let elems = (0..p).filter(|&i| hit[i as usize]).collect();
    SubsetFp::new(p, elems)
}

/// `|A + A| / |A|`.
pub fn doubling(a: &SubsetFp) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(sumset(a, a)?.len() as f64 / a.len() as f64)
}

/// `E(A, B) = #{a_1 b_1 = a_2 b_2}` from the product-frequency table.
pub fn mult_energy(a: &SubsetFp, b: &SubsetFp) -> Result<u128> {
    a.check_same_field(b)?;
    let p = a.p() as u64;
    let n = p as usize;
    let freq = a
        .elements()
        .par_chunks(256)
        .fold(
            || vec![0u64; n],
            |mut acc, chunk| {
                for &x in chunk {
                    for y in b.iter() {
                        acc[(x as u64 * y as u64 % p) as usize] += 1;
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; n],
            |mut l, r| {
                for (x, y) in l.iter_mut().zip(r) {
                    *x += y;
                }
                l
            },
        );
    Ok(freq.iter().map(|&c| c as u128 * c as u128).sum())
}

fn snap(values: &[Complex64], scale: f64) -> Result<Vec<u64>> {
    let mut worst = 0.0f64;
    let out = values
        .iter()
        .map(|z| {
            let x = z.re * scale;
            let r = x.round();
            worst = worst.max((x - r).abs()).max((z.im * scale).abs());
            r.max(0.0) as u64
        })
        .collect();
    if worst >= MAX_DRIFT {
        return Err(Error::RoundingDriftExceeded(worst));
    }
    Ok(out)
}

/// `r(t) = #{(x, y) ∈ A² : x − y ≡ t}`.
pub fn difference_counts(a: &SubsetFp) -> Result<Vec<u64>> {
    let p = a.p() as usize;
    if a.len().saturating_mul(a.len()) <= DIRECT_PAIR_LIMIT {
        let mut r = vec![0u64; p];
        for x in a.iter() {
            for y in a.iter() {
                let t = if x >= y { x - y } else { x + a.p() - y };
                r[t as usize] += 1;
            }
        }
        return Ok(r);
    }
    // r(t) = p^{-1} Σ_j |Â(j)|² e(−jt/p)
    let ind: Vec<Complex64> =
        a.indicator().into_iter().map(|b| Complex64::new(if b { 1.0 } else { 0.0 }, 0.0)).collect();
    let power: Vec<Complex64> = dft(&ind).into_iter().map(|z| Complex64::new(z.norm_sqr(), 0.0)).collect();
    snap(&dft_conj(&power), 1.0 / p as f64)
}

/// `D(A) = #{(a_1,…,a_8) : (a_1−a_2)(a_3−a_4) = (a_5−a_6)(a_7−a_8)}`.
///
/// Computed as `Σ_u s(u)²` where `s(u) = Σ_{t_1 t_2 = u} r(t_1) r(t_2)`; the
/// `u ≠ 0` part is a multiplicative convolution done through the Mellin
/// transform, `s(0)` is counted directly.
pub fn quad_d(ctx: &FieldContext, a: &SubsetFp) -> Result<u128> {
    if a.p() != ctx.p() {
        return Err(Error::FieldMismatch(a.p(), ctx.p()));
    }
    if a.is_empty() {
        return Ok(0);
    }
    let r = difference_counts(a)?;
    let total = (a.len() as u128).pow(2);
    let r0 = r[0] as u128;
    let s0 = 2 * r0 * total - r0 * r0;

    let q = ctx.group_order();
    let seq: Vec<Complex64> = (0..q).map(|t| Complex64::new(r[ctx.gpow(t) as usize] as f64, 0.0)).collect();
    let hat: Vec<Complex64> = dft(&seq).into_iter().map(|z| z * z).collect();
    let conv = snap(&dft_conj(&hat), 1.0 / q as f64)?;
    let nonzero: u128 = conv.iter().map(|&s| s as u128 * s as u128).sum();
    Ok(s0 * s0 + nonzero)
}

/// `D(A)·p / |A|⁸`.
pub fn shkredov_ratio(ctx: &FieldContext, a: &SubsetFp) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    let d = quad_d(ctx, a)? as f64;
    Ok(d * ctx.p() as f64 / (a.len() as f64).powi(8))
}

/// `{a_0 + Σ x_j ω_j : 0 ≤ x_j < N_j}` in `F_p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GaProgression {
    p: u32,
    a0: u32,
    omegas: Vec<u32>,
    bounds: Vec<u64>,
}

impl GaProgression {
    pub fn new(p: u32, a0: u32, omegas: Vec<u32>, bounds: Vec<u64>) -> Result<Self> {
        if omegas.is_empty() || omegas.len() != bounds.len() {
            return Err(Error::InvalidInput(format!(
                "progression needs d >= 1 generators with matching bounds (got {} and {})",
                omegas.len(),
                bounds.len()
            )));
        }
        if bounds.contains(&0) {
            return Err(Error::InvalidInput("progression bounds must be >= 1".into()));
        }
        let omegas = omegas.into_iter().map(|w| w % p).collect();
        Ok(GaProgression { p, a0: a0 % p, omegas, bounds })
    }

    pub fn dimension(&self) -> usize {
        self.omegas.len()
    }

    pub fn volume(&self) -> u128 {
        self.bounds.iter().map(|&n| n as u128).product()
    }

    pub fn p(&self) -> u32 {
        self.p
    }
}

/// Value set of a progression and whether it is proper.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GapEnumeration {
    pub set: SubsetFp,
    pub is_proper: bool,
    pub volume: u128,
}

pub fn gap_enumerate(gap: &GaProgression) -> Result<GapEnumeration> {
    let volume = gap.volume();
    if volume > GAP_VOLUME_CAP {
        return Err(Error::VolumeCapExceeded(volume));
    }
    let p = gap.p as u64;
    let d = gap.dimension();
    let mut hit = vec![false; p as usize];
    let mut distinct = 0u128;
    let mut idx = vec![0u64; d];
    let mut value = gap.a0 as u64;
    loop {
        if !hit[value as usize] {
            hit[value as usize] = true;
            distinct += 1;
        }
        // odometer step, keeping `value` in sync
        let mut j = 0;
        loop {
            if j == d {
                let set = SubsetFp::new(gap.p, (0..gap.p).filter(|&x| hit[x as usize]).collect())?;
                return Ok(GapEnumeration { set, is_proper: distinct == volume, volume });
            }
            let w = gap.omegas[j] as u64;
            if idx[j] + 1 < gap.bounds[j] {
                idx[j] += 1;
                value = (value + w) % p;
                break;
            }
            // wrap coordinate j back to 0
            value = (value + p - (idx[j] % p) * w % p) % p;
            idx[j] = 0;
            j += 1;
        }
    }
}

/// Containment check of `A` in a user-supplied progression.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapContainment {
    pub contained: bool,
    pub proper: bool,
    pub dimension: usize,
    /// `|P| / |A|` with `|P|` the number of distinct values.
    pub size_ratio: f64,
    /// Whether `d ≤ λ − 1` for the doubling constant `λ` of `A`.
    pub dimension_within_doubling: bool,
    pub doubling: f64,
}

pub fn verify_gap_containment(a: &SubsetFp, gap: &GaProgression) -> Result<GapContainment> {
    if a.p() != gap.p {
        return Err(Error::FieldMismatch(a.p(), gap.p));
    }
    let lambda = doubling(a)?;
    let en = gap_enumerate(gap)?;
    let contained = a.iter().all(|x| en.set.contains(x));
    Ok(GapContainment {
        contained,
        proper: en.is_proper,
        dimension: gap.dimension(),
        size_ratio: en.set.len() as f64 / a.len() as f64,
        dimension_within_doubling: gap.dimension() as f64 <= lambda - 1.0,
        doubling: lambda,
    })
}

/// `E(P)` against `16^d (|P|⁴/p + |P|^{5/2} log²|P|)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChangEnergy {
    pub size: usize,
    pub dimension: usize,
    #[serde(serialize_with = "crate::report::ser_u128")]
    pub energy: u128,
    pub bound: f64,
    pub ratio: f64,
}

pub fn chang_energy_ratio(gap: &GaProgression) -> Result<ChangEnergy> {
    let en = gap_enumerate(gap)?;
    let size = en.set.len();
    let energy = mult_energy(&en.set, &en.set)?;
    let s = size as f64;
    let d = gap.dimension();
    let bound = 16f64.powi(d as i32) * (s.powi(4) / gap.p as f64 + s.powf(2.5) * s.ln().powi(2));
    Ok(ChangEnergy { size, dimension: d, energy, bound, ratio: energy as f64 / bound })
}

/// `Π_1 = Σ σ` and `Π_2 = Σ σ²` over `(x_1, x_2, y) ∈ F_p³`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BurgessQuantities {
    #[serde(serialize_with = "crate::report::ser_u128")]
    pub pi1: u128,
    #[serde(serialize_with = "crate::report::ser_u128")]
    pub pi2: u128,
    /// Number of triples with `σ > 0`.
    pub support: u64,
}

/// `σ(x_1, x_2, y)` counts `(m_1 ≠ m_2, n, a) ∈ M² × N_2 × N_0^×` with
/// `m_1 a = x_1`, `m_2 a = x_2`, `n = a y`.
///
/// `a = 0` is left out: then `n = ay` has no solution `y` for `n ≠ 0`.
pub fn burgess_quantities(m: &SubsetFp, n0: &SubsetFp, n2: &SubsetFp) -> Result<BurgessQuantities> {
    m.check_same_field(n0)?;
    m.check_same_field(n2)?;
    let mm = m.len() as u128;
    let cost = mm * mm * n0.len() as u128 * n2.len() as u128;
    if cost > BURGESS_COST_CAP {
        return Err(Error::CostCapExceeded { what: "|M|^2 |N0| |N2|", cost, cap: BURGESS_COST_CAP });
    }
    let p = m.p() as u64;
    let mut sigma: HashMap<(u32, u32, u32), u64> = HashMap::new();
    for a in n0.iter().filter(|&a| a != 0) {
        let a = a as u64;
        let a_inv = crate::field::pow_mod(a, p - 2, p);
        for m1 in m.iter() {
            let x1 = (m1 as u64 * a % p) as u32;
            for m2 in m.iter().filter(|&m2| m2 != m1) {
                let x2 = (m2 as u64 * a % p) as u32;
                for n in n2.iter() {
                    let y = (n as u64 * a_inv % p) as u32;
                    *sigma.entry((x1, x2, y)).or_default() += 1;
                }
            }
        }
    }
    let pi1 = sigma.values().map(|&s| s as u128).sum();
    let pi2 = sigma.values().map(|&s| s as u128 * s as u128).sum();
    Ok(BurgessQuantities { pi1, pi2, support: sigma.len() as u64 })
}

/// Counts for one set, serialized by the `energy` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyReport {
    pub p: u32,
    pub size: usize,
    pub sumset_size: usize,
    pub doubling: f64,
    #[serde(serialize_with = "crate::report::ser_u128")]
    pub energy: u128,
    /// `E(A)/|A|³`, equal to 1 when every product is a coset of `F_p^×`.
    pub energy_ratio: f64,
    /// `D(A)` as a decimal string; it can exceed 64 bits.
    pub d_value: String,
    /// `D(A) p / |A|⁸`.
    pub d_ratio: f64,
}

pub fn energy_report(ctx: &FieldContext, a: &SubsetFp) -> Result<EnergyReport> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    let ss = sumset(a, a)?;
    let e = mult_energy(a, a)?;
    let d = quad_d(ctx, a)?;
    let s = a.len() as f64;
    Ok(EnergyReport {
        p: a.p(),
        size: a.len(),
        sumset_size: ss.len(),
        doubling: ss.len() as f64 / s,
        energy: e,
        energy_ratio: e as f64 / s.powi(3),
        d_value: d.to_string(),
        d_ratio: d as f64 * a.p() as f64 / s.powi(8),
    })
}
