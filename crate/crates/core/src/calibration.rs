//! Empirically frozen constants for the checks whose implied constants are
//! not known in closed form. Each value was fixed from seeded oracle runs
//! and is checked again by the integration tests in `tests/`.

/// `max |𝔖(Kl_2; γ⃗, σ⃗)| / √p` over seeded normal tuples at `p = 499`.
pub const SUM_OF_PRODUCTS_C: f64 = 20.0;

/// `max |𝔄(k⃗, γ⃗; h)| / √p` for `h ≠ 0`, same sampling.
pub const CORRELATION_C: f64 = 10.0;

/// `|Π(Kl_2, b)| / p²` for `r = 2` and seeded random shifts, at least 90% of samples below.
pub const KMS_R2_C: f64 = 2.0;

/// Bound on `E(P) / (16^d (|P|⁴/p + |P|^{5/2} log²|P|))` for proper progressions.
pub const CHANG_C: f64 = 1.0;

/// Window for `D(A) p / |A|⁸` on seeded random `A` with `|A| = ⌈p^{0.85}⌉`.
pub const SHKREDOV_WINDOW: (f64, f64) = (0.5, 2.0);

/// KS discrepancy of the full Kloosterman angle set at `p = 100003`.
pub const KS_FULL_ORBIT: f64 = 0.05;

/// KS discrepancy in the sparse-set Kloosterman and elliptic experiments.
pub const KS_SPARSE: f64 = 0.1;
