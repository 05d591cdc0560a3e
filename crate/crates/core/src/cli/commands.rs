//! The six subcommands. Each reads its keys from the config, seeds a
//! ChaCha8 generator from `seed`, and returns JSON plus companion files.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::{Config, Outcome};
use crate::bilinear::{
    bilinear_form, classify_tuple, correlation_a, holder_bound, kms_pi, sum_of_products, support_bound, trivial_bound,
    KmsTuple, Pgl2, Sigma, SignedTuple,
};
use crate::error::{Error, Result};
use crate::field::{make_field, FieldContext};
use crate::report::fmt_f64;
use crate::sato_tate::{equidist_experiment, histogram_csv, histogram_svg, EquidistKind, DEFAULT_A, DEFAULT_K_MAX};
use crate::setcomb::{chang_energy_ratio, energy_report, verify_gap_containment, GaProgression};
use crate::sets::{CoeffVec, SubsetFp};
use crate::trace::{kl_angles, kl_bulk, kl_scaled, EllipticFamily};

fn field(cfg: &mut Config) -> Result<FieldContext> {
    make_field(cfg.u64("p", None)?)
}

fn rng(cfg: &mut Config) -> Result<ChaCha8Rng> {
    Ok(ChaCha8Rng::seed_from_u64(cfg.u64("seed", Some(0))?))
}

fn cplx(z: Complex64) -> Value {
    json!({"re": z.re, "im": z.im})
}

/// Table of `Kl_k` plus the first and second moment identities and the
/// Deligne bound as residuals.
pub fn kloosterman(cfg: &mut Config) -> Result<Outcome> {
    let ctx = field(cfg)?;
    let p = ctx.p();
    let k = cfg.usize("k", Some(2))?;
    let a = cfg.u32("a", Some(1))?;
    let twist = cfg.optional_u64_list("twist")?.map(|t| t.into_iter().map(|j| j as usize).collect::<Vec<_>>());
    let table = match &twist {
        Some(t) => kl_bulk(&ctx, k, Some(t))?,
        None => kl_scaled(&ctx, k, a)?,
    };
    let angles = if k == 2 && twist.is_none() { Some(kl_angles(&table)?) } else { None };

    let units = &table.values[1..];
    let first: Complex64 = units.iter().sum();
    let second: f64 = units.iter().map(|z| z.norm_sqr()).sum();
    let max_abs = table.sup_norm();
    let pf = p as f64;
    let kf = k as f64;
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    let first_expected = sign * pf.powf((1.0 - kf) / 2.0);
    // Σ_{a≠0} |Kl_k(a)|² = p^{1−k} (1 + (p−2) p^k) / (p−1), written to avoid p^k overflow
    let second_expected = (pf.powf(1.0 - kf) + (pf - 2.0) * pf) / (pf - 1.0);

    let mut residuals = json!({ "deligne_excess": (max_abs - kf).max(0.0) });
    if twist.is_none() {
        residuals["first_moment"] = json!((first - first_expected).norm());
        residuals["second_moment"] = json!((second - second_expected).abs());
        residuals["second_moment_relative"] = json!((second - second_expected).abs() / second_expected);
    }
    let results = json!({
        "p": p,
        "k": k,
        "rows": p,
        "max_abs": max_abs,
        "deligne_bound": kf,
        "first_moment": cplx(first),
        "first_moment_expected": if twist.is_none() { json!(first_expected) } else { Value::Null },
        "second_moment": second,
        "second_moment_expected": if twist.is_none() { json!(second_expected) } else { Value::Null },
    });
    Ok(Outcome { results, residuals, files: vec![("kloosterman.csv".into(), table.to_csv(angles.as_ref()))] })
}

/// `M` or `N` from `<prefix>_size` and `<prefix>_mode`; all of `F_p^×` when no size is given.
fn unit_set(cfg: &mut Config, prefix: &str, p: u32, rng: &mut ChaCha8Rng) -> Result<SubsetFp> {
    let size_key = format!("{prefix}_size");
    if !cfg.has(&size_key) {
        return Ok(SubsetFp::units(p));
    }
    let size = cfg.usize(&size_key, None)?;
    draw_set(cfg, &format!("{prefix}_mode"), p, size, rng)
}

fn draw_set(cfg: &mut Config, mode_key: &str, p: u32, size: usize, rng: &mut ChaCha8Rng) -> Result<SubsetFp> {
    match cfg.string(mode_key, Some("random"))?.as_str() {
        "random" => SubsetFp::random_units(p, size, rng),
        "interval" => {
            if size + 1 > p as usize {
                return Err(Error::InvalidInput(format!("interval of {size} units does not fit in F_{p}")));
            }
            Ok(SubsetFp::interval(p, 1, size as u32))
        }
        other => Err(Error::InvalidInput(format!("`{mode_key}` must be random or interval, got `{other}`"))),
    }
}

/// Equidistribution of `Kl_2(amn)` or `a_p(amn)/√p` over `M × N`.
pub fn satotate(cfg: &mut Config) -> Result<Outcome> {
    let ctx = field(cfg)?;
    let p = ctx.p();
    let mut rng = rng(cfg)?;
    let kind = match cfg.string("kind", Some("kloosterman"))?.as_str() {
        "kloosterman" => EquidistKind::Kloosterman,
        "elliptic" => {
            let fa = cfg.i64_list("family_a", Some(vec![0, 1]))?;
            let fb = cfg.i64_list("family_b", Some(vec![1]))?;
            EquidistKind::Elliptic(EllipticFamily::new(fa, fb)?)
        }
        other => return Err(Error::InvalidInput(format!("`kind` must be kloosterman or elliptic, got `{other}`"))),
    };
    let a = cfg.u32("a", Some(1))?;
    let m = unit_set(cfg, "m", p, &mut rng)?;
    let n = unit_set(cfg, "n", p, &mut rng)?;
    let k_max = cfg.usize("k_max", Some(DEFAULT_K_MAX))?;
    let exponent_a = cfg.f64("exponent_a", Some(DEFAULT_A))?;
    let svg = cfg.bool("svg", Some(false))?;
    let report = equidist_experiment(&ctx, &kind, a, &m, &n, k_max, exponent_a)?;
    let mut files = vec![("satotate_hist.csv".to_string(), histogram_csv(&report.histogram))];
    if svg {
        files.push(("satotate.svg".into(), histogram_svg(&report.histogram)));
    }
    let residuals = json!({
        "discrepancy": report.discrepancy,
        "discrepancy_over_predicted": report.ratio,
    });
    let results = serde_json::to_value(&report).map_err(|e| Error::InvalidInput(e.to_string()))?;
    Ok(Outcome { results, residuals, files })
}

/// Grid of `|B(α, β; Kl_k)|` against the trivial, Hölder and arbitrary-set bounds.
pub fn bilinear(cfg: &mut Config) -> Result<Outcome> {
    let ctx = field(cfg)?;
    let p = ctx.p();
    let mut rng = rng(cfg)?;
    let k = cfg.usize("k", Some(2))?;
    let m_sizes = cfg.u64_list("m_sizes", Some(vec![10, 100]))?;
    let n_sizes = cfg.u64_list("n_sizes", Some(vec![10, 100]))?;
    let r_values = cfg.u64_list("r_values", Some(vec![1, 2, 3]))?;
    let weights = cfg.string("weights", Some("unit"))?;
    if r_values.iter().any(|&r| r == 0 || r > 64) {
        return Err(Error::InvalidInput("`r_values` entries must lie in 1..=64".into()));
    }
    let kl = kl_bulk(&ctx, k, None)?;
    let mut rows = Vec::new();
    let mut csv = String::from("m,n,r,value,trivial,ratio_trivial,holder,bound,ratio_bound\n");
    let mut max_ratio = 0.0f64;
    let mut holder_violations = 0u64;
    for &ms in &m_sizes {
        for &ns in &n_sizes {
            let m_set = draw_set(cfg, "set_mode", p, ms as usize, &mut rng)?;
            let n_set = draw_set(cfg, "set_mode", p, ns as usize, &mut rng)?;
            let (alpha, beta) = match weights.as_str() {
                "unit" => (CoeffVec::unit(m_set), CoeffVec::unit(n_set)),
                "random" => (CoeffVec::random(m_set, &mut rng), CoeffVec::random(n_set, &mut rng)),
                other => return Err(Error::InvalidInput(format!("`weights` must be unit or random, got `{other}`"))),
            };
            let value = bilinear_form(&alpha, &beta, &kl)?.norm();
            let trivial = trivial_bound(&alpha, &beta, &kl);
            let ratio = if trivial > 0.0 { value / trivial } else { 0.0 };
            max_ratio = max_ratio.max(ratio);
            for &r in &r_values {
                let r = r as u32;
                let holder = holder_bound(r, &alpha, &beta, &kl)?;
                if value > holder * (1.0 + 1e-9) + 1e-9 {
                    holder_violations += 1;
                }
                let bound = support_bound(r, &alpha, &beta, p).total;
                let ratio_bound = if bound > 0.0 { value / bound } else { 0.0 };
                let _ = writeln!(
                    csv,
                    "{ms},{ns},{r},{},{},{},{},{},{}",
                    fmt_f64(value),
                    fmt_f64(trivial),
                    fmt_f64(ratio),
                    fmt_f64(holder),
                    fmt_f64(bound),
                    fmt_f64(ratio_bound)
                );
                rows.push(json!({
                    "m": ms, "n": ns, "r": r, "value": value, "trivial": trivial, "ratio_trivial": ratio,
                    "holder": holder, "bound": bound, "ratio_bound": ratio_bound,
                }));
            }
        }
    }
    let residuals = json!({ "max_ratio_trivial": max_ratio, "holder_violations": holder_violations });
    Ok(Outcome { results: json!({ "p": p, "k": k, "rows": rows }), residuals, files: vec![("bilinear.csv".into(), csv)] })
}

/// The set for `energy`: `set`, `set_file`, `interval_len` or a random `size`.
fn energy_set(cfg: &mut Config, p: u32, base: &Path) -> Result<SubsetFp> {
    if cfg.has("set") {
        let v = cfg.i64_list("set", None)?;
        return Ok(SubsetFp::from_integers(p, &v));
    }
    if cfg.has("set_file") {
        let rel = cfg.string("set_file", None)?;
        let path = base.join(&rel);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        return SubsetFp::parse_lines(p, &text);
    }
    if cfg.has("interval_len") {
        let len = cfg.u32("interval_len", None)?;
        let start = cfg.u32("interval_start", Some(0))?;
        return Ok(SubsetFp::interval(p, start, len));
    }
    let size = cfg.usize("size", Some(100.min(p as usize)))?;
    let mut rng = rng(cfg)?;
    SubsetFp::random(p, size, &mut rng)
}

/// Energy, `D(A)`, doubling and optional progression checks for one set.
pub fn energy(cfg: &mut Config, base: &Path) -> Result<Outcome> {
    let ctx = field(cfg)?;
    let p = ctx.p();
    let a = energy_set(cfg, p, base)?;
    let rep = energy_report(&ctx, &a)?;
    let s = a.len() as f64;
    let mut csv = String::from("quantity,value,bound,ratio\n");
    let _ = writeln!(csv, "mult_energy,{},{},{}", rep.energy, fmt_f64(s.powi(3)), fmt_f64(rep.energy_ratio));
    let _ = writeln!(csv, "quad_d,{},{},{}", rep.d_value, fmt_f64(s.powi(8) / p as f64), fmt_f64(rep.d_ratio));
    let mut results = json!({ "report": rep });
    if cfg.has("gap_omegas") {
        let omegas = cfg.u64_list("gap_omegas", None)?.into_iter().map(|w| (w % p as u64) as u32).collect();
        let bounds = cfg.u64_list("gap_bounds", None)?;
        let a0 = cfg.u32("gap_a0", Some(0))?;
        let gap = GaProgression::new(p, a0 % p, omegas, bounds)?;
        let cont = verify_gap_containment(&a, &gap)?;
        let chang = chang_energy_ratio(&gap)?;
        let _ = writeln!(csv, "chang,{},{},{}", chang.energy, fmt_f64(chang.bound), fmt_f64(chang.ratio));
        results["gap"] = json!({ "containment": cont, "chang": chang });
    }
    let residuals = json!({
        "energy_minus_square": (rep.energy as f64) - s * s,
        "d_minus_diagonal": rep.d_ratio - 1.0,
    });
    Ok(Outcome { results, residuals, files: vec![("energy.csv".into(), csv)] })
}

/// A uniformly random element of `PGL_2(F_p)`.
pub fn random_pgl2<R: Rng + ?Sized>(p: u32, rng: &mut R) -> Pgl2 {
    loop {
        let [a, b, c, d] = [0; 4].map(|_: u32| rng.gen_range(0..p));
        if let Ok(g) = Pgl2::new(a, b, c, d, p) {
            return g;
        }
    }
}

/// Seeded tuple draw: `len` entries from a pool of `pool` random matrices
/// with random conjugation flags.
pub fn random_tuple<R: Rng + ?Sized>(p: u32, len: usize, pool: usize, rng: &mut R) -> SignedTuple {
    let elems: Vec<Pgl2> = (0..pool.max(1)).map(|_| random_pgl2(p, rng)).collect();
    let gammas: Vec<Pgl2> = (0..len).map(|_| elems[rng.gen_range(0..elems.len())]).collect();
    let sigmas = (0..len).map(|_| if rng.gen::<bool>() { Sigma::Conjugate } else { Sigma::Identity }).collect();
    SignedTuple::new(gammas, sigmas).expect("lengths match")
}

/// Sums of products and correlation sums of `Kl_2` over seeded tuples.
pub fn correlate(cfg: &mut Config) -> Result<Outcome> {
    let ctx = field(cfg)?;
    let p = ctx.p();
    let mut rng = rng(cfg)?;
    let samples = cfg.usize("samples", Some(100))?;
    let len = cfg.usize("tuple_len", Some(4))?;
    let pool = cfg.usize("pool", Some(3))?;
    let k_max = cfg.usize("k_max", Some(3))?;
    let r = if cfg.has("r") { Some(cfg.u32("r", None)?) } else { None };
    if len == 0 || k_max == 0 {
        return Err(Error::InvalidInput("`tuple_len` and `k_max` must be >= 1".into()));
    }
    let kl = kl_bulk(&ctx, 2, None)?;
    let angles = kl_angles(&kl)?;
    let sqrt_p = (p as f64).sqrt();
    let mut rows = Vec::new();
    let mut csv = String::from("index,class,s_over_sqrt_p,a_over_sqrt_p,h\n");
    let (mut max_s, mut max_a) = (0.0f64, 0.0f64);
    let mut rejected = 0u64;
    let cap = samples.saturating_mul(100).max(1000);
    let mut attempts = 0usize;
    while rows.len() < samples {
        attempts += 1;
        if attempts > cap {
            return Err(Error::CostCapExceeded { what: "tuple draws", cost: attempts as u128, cap: cap as u128 });
        }
        let t = random_tuple(p, len, pool, &mut rng);
        let class = classify_tuple(&t, r);
        let kvec: Vec<usize> = (0..len).map(|_| rng.gen_range(1..=k_max)).collect();
        let h = rng.gen_range(1..p);
        if !class.normal {
            rejected += 1;
            continue;
        }
        let s = sum_of_products(&kl, &t)?.norm() / sqrt_p;
        let a = correlation_a(&angles, &kvec, t.gammas(), h)?.norm() / sqrt_p;
        max_s = max_s.max(s);
        max_a = max_a.max(a);
        let _ = writeln!(csv, "{},{},{},{},{h}", rows.len(), class.label(), fmt_f64(s), fmt_f64(a));
        rows.push(json!({
            "tuple": t, "class": class.label(), "k": kvec, "h": h,
            "s_over_sqrt_p": s, "a_over_sqrt_p": a,
        }));
    }
    let results = json!({ "p": p, "normal_tuples": rows.len(), "non_normal_draws": rejected, "rows": rows });
    let residuals = json!({ "max_s_over_sqrt_p": max_s, "max_a_over_sqrt_p": max_a });
    Ok(Outcome { results, residuals, files: vec![("correlate.csv".into(), csv)] })
}

fn is_diagonal(b: &[u32], r: usize) -> bool {
    let mut x = b[..r].to_vec();
    let mut y = b[r..].to_vec();
    x.sort_unstable();
    y.sort_unstable();
    x == y
}

/// `Π(Kl_k, b)` over seeded shift vectors.
pub fn kmspi(cfg: &mut Config) -> Result<Outcome> {
    let ctx = field(cfg)?;
    let p = ctx.p();
    let mut rng = rng(cfg)?;
    let r = cfg.usize("r", Some(2))?;
    let k = cfg.usize("k", Some(2))?;
    let samples = cfg.usize("samples", Some(200))?;
    let kl = kl_bulk(&ctx, k, None)?;
    let p2 = (p as f64).powi(2);
    let mut rows = Vec::new();
    let mut csv = String::from("index,diagonal,value,ratio_p2\n");
    let mut offdiag_max = 0.0f64;
    for i in 0..samples {
        let b: Vec<u32> = (0..2 * r).map(|_| rng.gen_range(0..p)).collect();
        let diag = is_diagonal(&b, r);
        let value = kms_pi(&kl, &KmsTuple::new(r, b.clone())?)?.re;
        let ratio = value / p2;
        if !diag {
            offdiag_max = offdiag_max.max(ratio);
        }
        let _ = writeln!(csv, "{i},{diag},{},{}", fmt_f64(value), fmt_f64(ratio));
        rows.push(json!({ "b": b, "diagonal": diag, "value": value, "ratio_p2": ratio }));
    }
    let mut residuals = json!({ "max_offdiagonal_ratio_p2": offdiag_max });
    if k == 2 {
        // r = 1, b_1 = b_2 has the closed form (p−1)(p−1−1/p)²
        let pf = p as f64;
        let want = (pf - 1.0) * (pf - 1.0 - 1.0 / pf).powi(2);
        let got = kms_pi(&kl, &KmsTuple::new(1, vec![1, 1])?)?.re;
        residuals["diagonal_identity_relative"] = json!((got - want).abs() / want);
    }
    Ok(Outcome { results: json!({ "p": p, "r": r, "k": k, "rows": rows }), residuals, files: vec![("kmspi.csv".into(), csv)] })
}
