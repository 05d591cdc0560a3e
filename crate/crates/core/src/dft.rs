//! Arbitrary-length discrete Fourier transforms.
//!
//! Conventions: [`dft`] computes `v̂[j] = Σ_t v[t]·e(jt/L)` with `e(z) = exp(2πiz)`,
//! and [`dft_conj`] the same sum with `e(−jt/L)`. Neither is normalized.
//! Lengths that are not smooth go through rustfft's Bluestein/Rader plans.

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

/// Largest supported transform length.
pub const MAX_LEN: usize = 1 << 26;

fn transform(values: &[Complex64], direction: FftDirection) -> Vec<Complex64> {
    assert!(
        !values.is_empty() && values.len() <= MAX_LEN,
        "transform length {} outside 1..=2^26",
        values.len()
    );
    let mut buf = values.to_vec();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft(buf.len(), direction);
    fft.process(&mut buf);
    buf
}

/// `v̂[j] = Σ_t v[t]·e(jt/L)`.
pub fn dft(values: &[Complex64]) -> Vec<Complex64> {
    // rustfft's inverse direction carries the positive exponent
    transform(values, FftDirection::Inverse)
}

/// `Σ_t v[t]·e(−jt/L)`.
pub fn dft_conj(values: &[Complex64]) -> Vec<Complex64> {
    transform(values, FftDirection::Forward)
}
