//! Gradient reversal: identity forward, `-lambda * g` backward.

use alloc::vec::Vec;

/// Default reversal strength.
pub const DEFAULT_LAMBDA: f64 = 0.2;

pub fn grl_forward(v: &[f64]) -> Vec<f64> {
    v.to_vec()
}

pub fn grl_transform(upstream: &[f64], lambda: f64) -> Vec<f64> {
    upstream.iter().map(|g| -lambda * g).collect()
}
