//! Sato–Tate statistics: the semicircle CDF, Weyl sums of `sym_k`, the Weyl
//! level fit and Kolmogorov–Smirnov discrepancy of trace samples.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::FieldContext;
use crate::report::fmt_f64;
use crate::sets::SubsetFp;
use crate::trace::{elliptic_traces, kl_angles, kl_bulk, AngleTable, EllipticFamily};

pub const DEFAULT_K_MAX: usize = 10;
pub const DEFAULT_A: f64 = 2.0;
pub const HIST_BINS: usize = 64;

/// `F(x) = 1/2 + (x√(4−x²)/2 + 2 arcsin(x/2)) / 2π`.
pub fn st_cdf(x: f64) -> Result<f64> {
    if !(-2.0..=2.0).contains(&x) {
        return Err(Error::OutOfRange(x));
    }
    Ok(st_cdf_clamped(x))
}

fn st_cdf_clamped(x: f64) -> f64 {
    let x = x.clamp(-2.0, 2.0);
    let v = 0.5 + (x * (4.0 - x * x).max(0.0).sqrt() / 2.0 + 2.0 * (x / 2.0).asin()) / (2.0 * PI);
    v.clamp(0.0, 1.0)
}

/// Semicircle density `√(4−x²)/2π`.
pub fn st_density(x: f64) -> f64 {
    if x.abs() >= 2.0 {
        return 0.0;
    }
    (4.0 - x * x).sqrt() / (2.0 * PI)
}

/// `S_k = Σ_n sym_k(θ_n)` for `k = 1..=k_max`.
pub fn weyl_sums(angles: &[f64], k_max: usize) -> Vec<f64> {
    let pairs: Vec<(f64, u64)> = angles.iter().map(|&t| (t, 1)).collect();
    weyl_sums_weighted(&pairs, k_max)
}

/// Weyl sums over angles with integer multiplicities.
pub fn weyl_sums_weighted(angles: &[(f64, u64)], k_max: usize) -> Vec<f64> {
    let zero = || vec![0.0; k_max];
    angles
        .par_chunks(4096)
        .map(|chunk| {
            let mut s = zero();
            for &(theta, w) in chunk {
                let x = theta.cos();
                let w = w as f64;
                // U_k(x) by recurrence, accumulating every k on the way
                let (mut prev, mut cur) = (1.0, 2.0 * x);
                for (k, slot) in s.iter_mut().enumerate() {
                    if k > 0 {
                        let next = 2.0 * x * cur - prev;
                        prev = cur;
                        cur = next;
                    }
                    *slot += w * cur;
                }
            }
            s
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(zero(), |mut acc, s| {
            for (a, b) in acc.iter_mut().zip(s) {
                *a += b;
            }
            acc
        })
}

/// Smallest `Δ` with `|S_k| ≤ k^A N Δ` for every computed `k`.
pub fn fit_weyl_level(s: &[f64], n: u64, a: f64) -> f64 {
    assert!(n >= 1, "sample count must be positive");
    s.iter()
        .enumerate()
        .map(|(i, &sk)| sk.abs() / (((i + 1) as f64).powf(a) * n as f64))
        .fold(0.0, f64::max)
}

/// `|M|^{−1/2r} (p^{1/2r} |N|^{−1/2} + p^{1/4r})`.
pub fn theoretical_level(m: usize, n: usize, p: u32, r: u32) -> f64 {
    let (m, n, p, r) = (m as f64, n as f64, p as f64, r as f64);
    m.powf(-1.0 / (2.0 * r)) * (p.powf(1.0 / (2.0 * r)) / n.sqrt() + p.powf(1.0 / (4.0 * r)))
}

/// KS distance between the empirical CDF and the semicircle law.
pub fn discrepancy(samples: &[f64]) -> f64 {
    let pairs: Vec<(f64, u64)> = samples.iter().map(|&x| (x, 1)).collect();
    discrepancy_weighted(&pairs)
}

/// KS distance for samples with integer multiplicities.
pub fn discrepancy_weighted(samples: &[(f64, u64)]) -> f64 {
    let mut v: Vec<(f64, u64)> = samples.iter().filter(|s| s.1 > 0).copied().collect();
    let total: u64 = v.iter().map(|s| s.1).sum();
    assert!(total >= 1, "discrepancy needs at least one sample");
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = total as f64;
    let mut below = 0u64;
    let mut worst = 0.0f64;
    let mut i = 0;
    while i < v.len() {
        let x = v[i].0;
        let mut here = 0u64;
        while i < v.len() && v[i].0 == x {
            here += v[i].1;
            i += 1;
        }
        let f = st_cdf_clamped(x);
        worst = worst.max((below as f64 / n - f).abs());
        below += here;
        worst = worst.max((below as f64 / n - f).abs());
    }
    worst
}

/// Which trace function an experiment samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EquidistKind {
    Kloosterman,
    Elliptic(EllipticFamily),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StReport {
    pub kind: String,
    pub p: u32,
    pub a: u32,
    pub m_size: usize,
    pub n_size: usize,
    /// Pairs `(m, n)` whose product lands outside the trace domain.
    pub masked_pairs: u64,
    /// Sample count `N` after masking.
    pub samples: u64,
    pub weyl_sums: Vec<f64>,
    pub exponent_a: f64,
    pub level: f64,
    /// Level from the `|M|, |N|, p` formula, minimized over `r`.
    pub theoretical_level: Option<f64>,
    pub theoretical_r: Option<u32>,
    pub discrepancy: f64,
    /// `Δ^{1/(A+1)}` with constant 1.
    pub predicted: f64,
    pub ratio: f64,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub histogram: Vec<u64>,
}

/// Samples `2cos θ(a m n)` over `(m, n) ∈ M × N` and summarizes them.
pub fn equidist_experiment(
    ctx: &FieldContext,
    kind: &EquidistKind,
    a: u32,
    m: &SubsetFp,
    n: &SubsetFp,
    k_max: usize,
    exponent_a: f64,
) -> Result<StReport> {
    let p = ctx.p();
    for s in [m, n] {
        if s.p() != p {
            return Err(Error::FieldMismatch(s.p(), p));
        }
    }
    if a.is_multiple_of(p) {
        return Err(Error::ZeroArgument);
    }
    if k_max == 0 {
        return Err(Error::InvalidInput("k_max must be >= 1".into()));
    }
    let mut warnings = Vec::new();
    let pf = p as f64;
    if (m.len() as f64) <= pf.sqrt() {
        warnings.push(format!("|M| = {} is not above p^(1/2) = {:.1}", m.len(), pf.sqrt()));
    }
    if n.len() <= 1 {
        warnings.push(format!("|N| = {} is not above p^eps", n.len()));
    }

    // multiplicity of each product t = a m n
    let pm = p as u64;
    let counts = n
        .elements()
        .par_iter()
        .fold(
            || vec![0u64; p as usize],
            |mut acc, &nv| {
                let an = a as u64 * nv as u64 % pm;
                for mv in m.iter() {
                    acc[(an * mv as u64 % pm) as usize] += 1;
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; p as usize],
            |mut l, r| {
                for (x, y) in l.iter_mut().zip(r) {
                    *x += y;
                }
                l
            },
        );

    let (angles, name): (AngleTable, String) = match kind {
        EquidistKind::Kloosterman => (kl_angles(&kl_bulk(ctx, 2, None)?)?, "kloosterman".into()),
        EquidistKind::Elliptic(fam) => {
            let hit: Vec<u32> = (0..p).filter(|&t| counts[t as usize] > 0).collect();
            let t_set = SubsetFp::new(p, hit)?;
            (elliptic_traces(ctx, fam, &t_set)?.angles, format!("elliptic {}", fam.id()))
        }
    };

    let mut weighted = Vec::new();
    let mut masked_pairs = 0u64;
    for (t, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        match angles.angle(t as u32) {
            Some(theta) => weighted.push((theta, c)),
            None => masked_pairs += c,
        }
    }
    let samples: u64 = weighted.iter().map(|w| w.1).sum();
    if samples == 0 {
        return Err(Error::EmptySet);
    }
    let s = weyl_sums_weighted(&weighted, k_max);
    let level = fit_weyl_level(&s, samples, exponent_a);
    let values: Vec<(f64, u64)> = weighted.iter().map(|&(t, c)| (2.0 * t.cos(), c)).collect();
    let d = discrepancy_weighted(&values);
    let predicted = level.powf(1.0 / (exponent_a + 1.0));

    let (theoretical_level, theoretical_r) = match kind {
        EquidistKind::Kloosterman => {
            let best = (1..=16u32)
                .map(|r| (theoretical_level(m.len(), n.len(), p, r), r))
                .min_by(|x, y| x.0.total_cmp(&y.0))
                .expect("nonempty range");
            (Some(best.0), Some(best.1))
        }
        EquidistKind::Elliptic(_) => (None, None),
    };

    Ok(StReport {
        kind: name,
        p,
        a,
        m_size: m.len(),
        n_size: n.len(),
        masked_pairs,
        samples,
        weyl_sums: s,
        exponent_a,
        level,
        theoretical_level,
        theoretical_r,
        discrepancy: d,
        predicted,
        ratio: if predicted > 0.0 { d / predicted } else { f64::INFINITY },
        warnings,
        histogram: histogram(&values),
    })
}

/// Weighted counts in 64 equal bins on `[−2, 2]`.
pub fn histogram(values: &[(f64, u64)]) -> Vec<u64> {
    let mut h = vec![0u64; HIST_BINS];
    for &(x, c) in values {
        let b = (((x + 2.0) / 4.0) * HIST_BINS as f64).floor();
        let b = (b.max(0.0) as usize).min(HIST_BINS - 1);
        h[b] += c;
    }
    h
}

fn bin_edges(i: usize) -> (f64, f64) {
    let w = 4.0 / HIST_BINS as f64;
    (-2.0 + i as f64 * w, -2.0 + (i + 1) as f64 * w)
}

/// `lo,hi,count,expected` per bin, expected from the semicircle law.
pub fn histogram_csv(hist: &[u64]) -> String {
    let total: u64 = hist.iter().sum();
    let mut out = String::from("lo,hi,count,expected\n");
    for (i, &c) in hist.iter().enumerate() {
        let (lo, hi) = bin_edges(i);
        let expected = total as f64 * (st_cdf_clamped(hi) - st_cdf_clamped(lo));
        let _ = writeln!(out, "{},{},{},{}", fmt_f64(lo), fmt_f64(hi), c, fmt_f64(expected));
    }
    out
}

/// Static SVG: normalized histogram bars with the semicircle density on top.
pub fn histogram_svg(hist: &[u64]) -> String {
    let (w, h, pad) = (640.0, 360.0, 30.0);
    let total: u64 = hist.iter().sum::<u64>().max(1);
    let bin_w = 4.0 / hist.len() as f64;
    let dens: Vec<f64> = hist.iter().map(|&c| c as f64 / total as f64 / bin_w).collect();
    let y_max = dens.iter().copied().fold(1.0 / PI, f64::max) * 1.1;
    let sx = |x: f64| pad + (x + 2.0) / 4.0 * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - y / y_max * (h - 2.0 * pad);
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    for (i, &d) in dens.iter().enumerate() {
        let (lo, hi) = bin_edges(i);
        let _ = writeln!(
            out,
            r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#9ab" stroke="#567" stroke-width="0.5"/>"##,
            sx(lo),
            sy(d),
            sx(hi) - sx(lo),
            sy(0.0) - sy(d)
        );
    }
    let pts: Vec<String> = (0..=400)
        .map(|i| {
            let x = -2.0 + 4.0 * i as f64 / 400.0;
            format!("{:.2},{:.2}", sx(x), sy(st_density(x)))
        })
        .collect();
    let _ = writeln!(out, r##"<polyline fill="none" stroke="#c33" stroke-width="2" points="{}"/>"##, pts.join(" "));
    let _ = writeln!(
        out,
        r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black"/>"##,
        sx(-2.0),
        sy(0.0),
        sx(2.0),
        sy(0.0)
    );
    for x in [-2.0, -1.0, 0.0, 1.0, 2.0] {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">{x}</text>"#,
            sx(x),
            h - pad / 3.0
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;
    use crate::trace::sym_eval;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};

    #[test]
    fn cdf_endpoints() {
        assert!(st_cdf(-2.0).unwrap().abs() < 1e-15);
        assert!((st_cdf(2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((st_cdf(0.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(st_cdf(2.5), Err(Error::OutOfRange(_))));
        assert!(st_cdf(f64::NAN).is_err());
    }

    #[test]
    fn cdf_at_one_by_quadrature() {
        // Simpson's rule on the density over [0, 1]
        let n = 20_000;
        let h = 1.0 / n as f64;
        let mut s = st_density(0.0) + st_density(1.0);
        for i in 1..n {
            s += st_density(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let want = 0.5 + s * h / 3.0;
        assert!((st_cdf(1.0).unwrap() - want).abs() < 1e-12);
        assert!((want - 0.80450).abs() < 5e-6);
    }

    #[test]
    fn weyl_examples() {
        let s = weyl_sums(&[FRAC_PI_2; 7], 3);
        assert!(s[0].abs() < 1e-12);
        let s = weyl_sums(&[FRAC_PI_3], 2);
        assert!((s[0] - 1.0).abs() < 1e-12);
        assert!(s[1].abs() < 1e-12);
        let thetas = [0.3, 1.1, 2.9];
        let s = weyl_sums(&thetas, 6);
        for k in 1..=6 {
            let want: f64 = thetas.iter().map(|&t| sym_eval(k, t)).sum();
            assert!((s[k - 1] - want).abs() < 1e-10);
        }
    }

    #[test]
    fn level_fit() {
        assert_eq!(fit_weyl_level(&[0.0; 5], 10, 2.0), 0.0);
        assert!(fit_weyl_level(&[10.0, 0.0], 10, 7.0) >= 1.0);
        assert!((fit_weyl_level(&[1.0, 8.0], 2, 2.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn discrepancy_examples() {
        assert!((discrepancy(&[0.0]) - 0.5).abs() < 1e-15);
        // stratified placement at F^{-1}((i - 1/2)/N)
        let n = 100;
        let inv = |u: f64| {
            let (mut lo, mut hi) = (-2.0, 2.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if st_cdf_clamped(mid) < u {
                    lo = mid
                } else {
                    hi = mid
                }
            }
            0.5 * (lo + hi)
        };
        let xs: Vec<f64> = (1..=n).map(|i| inv((i as f64 - 0.5) / n as f64)).collect();
        assert!((discrepancy(&xs) - 0.005).abs() < 1e-9);
        let doubled: Vec<(f64, u64)> = xs.iter().map(|&x| (x, 2)).collect();
        assert!((discrepancy_weighted(&doubled) - 0.005).abs() < 1e-9);
    }

    #[test]
    fn full_orbit_matches_single_orbit() {
        let f = make_field(101).unwrap();
        let u = SubsetFp::units(101);
        let rep = equidist_experiment(&f, &EquidistKind::Kloosterman, 1, &u, &u, 4, 2.0).unwrap();
        let ang = kl_angles(&kl_bulk(&f, 2, None).unwrap()).unwrap();
        let single: Vec<f64> = ang.domain_angles().iter().map(|t| 2.0 * t.cos()).collect();
        assert!((rep.discrepancy - discrepancy(&single)).abs() < 1e-12);
        assert_eq!(rep.samples, 100 * 100);
        assert_eq!(rep.masked_pairs, 0);
        assert_eq!(rep.histogram.iter().sum::<u64>(), rep.samples);
    }

    #[test]
    fn elliptic_masking() {
        let f = make_field(1009).unwrap();
        let fam = EllipticFamily::new(vec![0, 1], vec![1]).unwrap();
        let u = SubsetFp::units(1009);
        let rep = equidist_experiment(&f, &EquidistKind::Elliptic(fam.clone()), 1, &u, &u, 4, 2.0).unwrap();
        let roots = (1..1009).filter(|&t| fam.eval_mod(t, 1009).2 == 0).count() as u64;
        assert!(roots <= 3);
        assert_eq!(rep.masked_pairs, roots * 1008);
        let constant = EllipticFamily::new(vec![1], vec![1]).unwrap();
        assert_eq!(
            equidist_experiment(&f, &EquidistKind::Elliptic(constant), 1, &u, &u, 4, 2.0),
            Err(Error::ConstantJInvariant)
        );
    }

    #[test]
    fn histogram_outputs() {
        let h = histogram(&[(-2.0, 1), (2.0, 3), (0.0, 2)]);
        assert_eq!(h[0], 1);
        assert_eq!(h[HIST_BINS - 1], 3);
        assert_eq!(h[HIST_BINS / 2], 2);
        let csv = histogram_csv(&h);
        assert_eq!(csv.lines().count(), HIST_BINS + 1);
        assert!(histogram_svg(&h).starts_with("<svg"));
    }
}
