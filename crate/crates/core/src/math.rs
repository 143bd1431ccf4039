//! Scalar and vector kernels shared by the statistics and the network code.
//!
//! Transcendentals go through `libm` so results are identical with and
//! without `std`.

use crate::error::{Error, Result};

/// Lower clamp applied to probabilities before taking logs in cross-entropy.
pub const PROB_FLOOR: f64 = 1e-12;

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn tanh(x: f64) -> f64 {
    libm::tanh(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + exp(-x))
    } else {
        let e = exp(x);
        e / (1.0 + e)
    }
}

/// Dot product with eight independent accumulators so the loop vectorizes.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    (acc[0] + acc[4]) + (acc[1] + acc[5]) + (acc[2] + acc[6]) + (acc[3] + acc[7]) + tail
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + ln(xs.iter().map(|x| exp(x - max)).sum::<f64>())
}

/// In-place softmax. Entries equal to `-inf` receive exactly zero mass.
pub fn softmax_in_place(xs: &mut [f64]) {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for x in xs.iter_mut() {
        *x = if *x == f64::NEG_INFINITY {
            0.0
        } else {
            exp(*x - max)
        };
        total += *x;
    }
    for x in xs.iter_mut() {
        *x /= total;
    }
}

pub fn softmax(xs: &[f64]) -> alloc::vec::Vec<f64> {
    let mut out = xs.to_vec();
    softmax_in_place(&mut out);
    out
}

/// Shannon entropy in nats; zero-probability entries contribute nothing.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| x * ln(x))
        .sum::<f64>()
}

/// Cross-entropy `-sum_k t_k log q_k` between a predicted simplex `q` and a
/// target simplex `t`, with `q` clamped below at [`PROB_FLOOR`].
pub fn cross_entropy_dist(q: &[f64], t: &[f64]) -> Result<f64> {
    if q.len() != t.len() {
        return Err(Error::DimensionMismatch {
            expected: t.len(),
            got: q.len(),
        });
    }
    Ok(-q
        .iter()
        .zip(t)
        .map(|(&qk, &tk)| tk * ln(qk.max(PROB_FLOOR)))
        .sum::<f64>())
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// Uniform distribution over `k` outcomes.
pub fn uniform(k: usize) -> alloc::vec::Vec<f64> {
    alloc::vec![1.0 / k as f64; k]
}

/// FNV-1a over the bit patterns of a parameter slice; used for freeze checks.
pub fn checksum_f64(state: u64, xs: &[f64]) -> u64 {
    let mut h = state;
    for x in xs {
        for b in x.to_bits().to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

pub const CHECKSUM_SEED: u64 = 0xcbf2_9ce4_8422_2325;
