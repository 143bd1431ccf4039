use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tensor::{Matrix, Parameters};
use crate::math::{sigmoid, sqrt, tanh};

/// One LSTM direction. Gate rows are stacked as input, forget, cell, output;
/// columns are `[x; h_prev]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmParams {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

impl Parameters for LstmParams {
    fn tensors(&self) -> Vec<&[f64]> {
        vec![&self.weights.data, &self.bias]
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        vec![&mut self.weights.data, &mut self.bias]
    }
}

/// Activations of one pass, kept for backpropagation.
#[derive(Debug, Clone)]
pub(crate) struct LstmTrace {
    /// `[x; h_prev]` per step
    xh: Vec<f64>,
    /// post-activation gates per step
    gates: Vec<f64>,
    c: Vec<f64>,
    tanh_c: Vec<f64>,
    pub h: Vec<f64>,
    steps: usize,
}

impl LstmParams {
    pub fn init<R: Rng>(input: usize, hidden: usize, rng: &mut R) -> Self {
        let r = 1.0 / sqrt((input + hidden) as f64);
        LstmParams {
            weights: Matrix::uniform(4 * hidden, input + hidden, r, rng),
            bias: super::tensor::uniform_vec(4 * hidden, r, rng),
        }
    }

    pub fn hidden(&self) -> usize {
        self.weights.rows / 4
    }

    pub fn input(&self) -> usize {
        self.weights.cols - self.hidden()
    }

    /// Runs over `inputs` in the given order from a zero state.
    pub(crate) fn forward<'a, I>(&self, inputs: I, steps: usize) -> LstmTrace
    where
        I: Iterator<Item = &'a [f64]>,
    {
        let hd = self.hidden();
        let width = self.weights.cols;
        let mut tr = LstmTrace {
            xh: vec![0.0; steps * width],
            gates: vec![0.0; steps * 4 * hd],
            c: vec![0.0; steps * hd],
            tanh_c: vec![0.0; steps * hd],
            h: vec![0.0; steps * hd],
            steps,
        };
        let mut z = vec![0.0; 4 * hd];
        for (t, x) in inputs.enumerate().take(steps) {
            let xh = &mut tr.xh[t * width..(t + 1) * width];
            xh[..x.len()].copy_from_slice(x);
            if t > 0 {
                xh[x.len()..].copy_from_slice(&tr.h[(t - 1) * hd..t * hd]);
            }
            self.weights.affine(xh, &self.bias, &mut z);
            let g = &mut tr.gates[t * 4 * hd..(t + 1) * 4 * hd];
            for j in 0..hd {
                g[j] = sigmoid(z[j]);
                g[hd + j] = sigmoid(z[hd + j]);
                g[2 * hd + j] = tanh(z[2 * hd + j]);
                g[3 * hd + j] = sigmoid(z[3 * hd + j]);
            }
            for j in 0..hd {
                let c_prev = if t > 0 { tr.c[(t - 1) * hd + j] } else { 0.0 };
                let c = g[hd + j] * c_prev + g[j] * g[2 * hd + j];
                let tc = tanh(c);
                tr.c[t * hd + j] = c;
                tr.tanh_c[t * hd + j] = tc;
                tr.h[t * hd + j] = g[3 * hd + j] * tc;
            }
        }
        tr
    }

    /// Backpropagation through time. `dh` holds the loss gradient w.r.t.
    /// each step's output; returns the gradient w.r.t. each step's input.
    pub(crate) fn backward(
        &self,
        tr: &LstmTrace,
        dh: &[f64],
        mut grad: Option<&mut LstmParams>,
    ) -> Vec<f64> {
        let hd = self.hidden();
        let input = self.input();
        let width = self.weights.cols;
        let mut dx = vec![0.0; tr.steps * input];
        let mut dh_next = vec![0.0; hd];
        let mut dc_next = vec![0.0; hd];
        let mut dz = vec![0.0; 4 * hd];
        let mut dxh = vec![0.0; width];
        for t in (0..tr.steps).rev() {
            let g = &tr.gates[t * 4 * hd..(t + 1) * 4 * hd];
            for j in 0..hd {
                let dht = dh[t * hd + j] + dh_next[j];
                let (i, f, gg, o) = (g[j], g[hd + j], g[2 * hd + j], g[3 * hd + j]);
                let tc = tr.tanh_c[t * hd + j];
                let dc = dht * o * (1.0 - tc * tc) + dc_next[j];
                let c_prev = if t > 0 { tr.c[(t - 1) * hd + j] } else { 0.0 };
                dz[j] = dc * gg * i * (1.0 - i);
                dz[hd + j] = dc * c_prev * f * (1.0 - f);
                dz[2 * hd + j] = dc * i * (1.0 - gg * gg);
                dz[3 * hd + j] = dht * tc * o * (1.0 - o);
                dc_next[j] = dc * f;
            }
            dxh.iter_mut().for_each(|v| *v = 0.0);
            let xh = &tr.xh[t * width..(t + 1) * width];
            match grad.as_deref_mut() {
                Some(gp) => self.weights.affine_backward(
                    xh,
                    &dz,
                    &mut dxh,
                    Some((&mut gp.weights, &mut gp.bias)),
                ),
                None => self.weights.affine_backward(xh, &dz, &mut dxh, None),
            }
            dx[t * input..(t + 1) * input].copy_from_slice(&dxh[..input]);
            dh_next.copy_from_slice(&dxh[input..]);
        }
        dx
    }
}
