use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::math::{axpy, checksum_f64, dot, CHECKSUM_SEED};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn uniform<R: Rng>(rows: usize, cols: usize, r: f64, rng: &mut R) -> Self {
        Matrix {
            rows,
            cols,
            data: uniform_vec(rows * cols, r, rng),
        }
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// `out = self * x + bias`
    pub fn affine(&self, x: &[f64], bias: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        for (r, o) in out.iter_mut().enumerate().take(self.rows) {
            *o = dot(self.row(r), x) + bias[r];
        }
    }

    /// Backward of `y = W x + b`: accumulates `dW += dy x^T` (when a
    /// gradient is given) and `dx += W^T dy`.
    pub fn affine_backward(
        &self,
        x: &[f64],
        dy: &[f64],
        dx: &mut [f64],
        grad: Option<(&mut Matrix, &mut [f64])>,
    ) {
        match grad {
            Some((gw, gb)) => {
                for (r, &d) in dy.iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    axpy(d, self.row(r), dx);
                    axpy(d, x, gw.row_mut(r));
                    gb[r] += d;
                }
            }
            None => {
                for (r, &d) in dy.iter().enumerate() {
                    if d != 0.0 {
                        axpy(d, self.row(r), dx);
                    }
                }
            }
        }
    }
}

pub(crate) fn uniform_vec<R: Rng>(n: usize, r: f64, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-r..=r)).collect()
}

/// A fixed collection of parameter tensors with matching gradient layout.
pub trait Parameters: Clone {
    fn tensors(&self) -> Vec<&[f64]>;
    fn tensors_mut(&mut self) -> Vec<&mut [f64]>;

    /// Same shapes, all zeros.
    fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.fill(0.0);
        z
    }

    fn fill(&mut self, value: f64) {
        for t in self.tensors_mut() {
            t.iter_mut().for_each(|x| *x = value);
        }
    }

    fn num_params(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    /// `self += alpha * other`
    fn add_scaled(&mut self, other: &Self, alpha: f64) {
        for (a, b) in self.tensors_mut().into_iter().zip(other.tensors()) {
            axpy(alpha, b, a);
        }
    }

    fn scale(&mut self, alpha: f64) {
        for t in self.tensors_mut() {
            t.iter_mut().for_each(|x| *x *= alpha);
        }
    }

    /// Bit-exact fingerprint of all values.
    fn checksum(&self) -> u64 {
        self.tensors().into_iter().fold(CHECKSUM_SEED, checksum_f64)
    }

    fn all_finite(&self) -> bool {
        self.tensors()
            .iter()
            .all(|t| t.iter().all(|x| x.is_finite()))
    }

    /// All values flattened in tensor order.
    fn flatten(&self) -> Vec<f64> {
        self.tensors().concat()
    }

    fn get_flat(&self, mut i: usize) -> f64 {
        for t in self.tensors() {
            if i < t.len() {
                return t[i];
            }
            i -= t.len();
        }
        panic!("parameter index out of range")
    }

    fn set_flat(&mut self, mut i: usize, value: f64) {
        for t in self.tensors_mut() {
            if i < t.len() {
                t[i] = value;
                return;
            }
            i -= t.len();
        }
        panic!("parameter index out of range")
    }
}
