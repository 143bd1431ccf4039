use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::lstm::{LstmParams, LstmTrace};
use super::tensor::{Matrix, Parameters};
use crate::corpus::{MAX_SEQUENCE_LEN, PAD, RESERVED};
use crate::error::{Error, Result};
use crate::math::{dot, softmax_in_place, sqrt, tanh};

/// Embeddings, a bidirectional LSTM and additive attention pooling.
///
/// Attention scores are `v . tanh(W s_i + b)` over the concatenated
/// per-token states `s_i`; the document vector is the attention-weighted sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderParams {
    pub embedding: Matrix,
    pub forward: LstmParams,
    pub backward: LstmParams,
    pub attention_proj: Matrix,
    pub attention_bias: Vec<f64>,
    pub attention_context: Vec<f64>,
}

impl Parameters for EncoderParams {
    fn tensors(&self) -> Vec<&[f64]> {
        let mut t: Vec<&[f64]> = vec![&self.embedding.data];
        t.extend(self.forward.tensors());
        t.extend(self.backward.tensors());
        t.extend([
            self.attention_proj.data.as_slice(),
            &self.attention_bias,
            &self.attention_context,
        ]);
        t
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut t: Vec<&mut [f64]> = vec![&mut self.embedding.data];
        t.extend(self.forward.tensors_mut());
        t.extend(self.backward.tensors_mut());
        t.extend([
            self.attention_proj.data.as_mut_slice(),
            &mut self.attention_bias,
            &mut self.attention_context,
        ]);
        t
    }
}

/// Forward activations of one document.
#[derive(Debug, Clone)]
pub struct EncoderTrace {
    /// Input length before truncation.
    input_len: usize,
    /// Positions (into the input) of the tokens the encoder actually read.
    positions: Vec<usize>,
    ids: Vec<u32>,
    fwd: LstmTrace,
    bwd: LstmTrace,
    /// `[step][2H]` concatenated states
    states: Vec<f64>,
    /// `[step][A]` tanh projections
    proj: Vec<f64>,
    attention: Vec<f64>,
    pub representation: Vec<f64>,
}

impl EncoderTrace {
    /// Attention weights aligned with the input (zero at PAD and truncated positions).
    pub fn attention(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.input_len];
        for (p, a) in self.positions.iter().zip(&self.attention) {
            out[*p] = *a;
        }
        out
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn input_len(&self) -> usize {
        self.input_len
    }
}

impl EncoderParams {
    pub fn init<R: Rng>(vocab: usize, embed: usize, hidden: usize, rng: &mut R) -> Self {
        let state = 2 * hidden;
        let r_att = 1.0 / sqrt(state as f64);
        // one-hot lookup: fan-in of a single input
        let mut embedding = Matrix::uniform(vocab, embed, 1.0, rng);
        for id in 0..RESERVED.min(vocab) {
            embedding.row_mut(id).fill(0.0);
        }
        EncoderParams {
            embedding,
            forward: LstmParams::init(embed, hidden, rng),
            backward: LstmParams::init(embed, hidden, rng),
            attention_proj: Matrix::uniform(state, state, r_att, rng),
            attention_bias: super::tensor::uniform_vec(state, r_att, rng),
            attention_context: super::tensor::uniform_vec(state, r_att, rng),
        }
    }

    pub fn vocab_size(&self) -> usize {
        self.embedding.rows
    }

    pub fn embed_dim(&self) -> usize {
        self.embedding.cols
    }

    pub fn hidden_dim(&self) -> usize {
        self.forward.hidden()
    }

    /// Width of the document representation (`2 * hidden`).
    pub fn output_dim(&self) -> usize {
        2 * self.hidden_dim()
    }

    pub fn forward(&self, ids: &[u32]) -> Result<EncoderTrace> {
        self.forward_with(ids, |id| self.embedding.row(id as usize))
    }

    /// Forward pass with a custom embedding lookup (used by gradient checks).
    pub(crate) fn forward_with<'a, F>(&'a self, ids: &[u32], lookup: F) -> Result<EncoderTrace>
    where
        F: Fn(u32) -> &'a [f64],
    {
        if ids.is_empty() {
            return Err(Error::EmptyInput);
        }
        let v = self.vocab_size();
        if let Some(&id) = ids.iter().find(|&&id| id as usize >= v) {
            return Err(Error::TokenOutOfRange { id, size: v });
        }
        let positions: Vec<usize> = ids
            .iter()
            .enumerate()
            .take(MAX_SEQUENCE_LEN)
            .filter(|(_, &id)| id != PAD)
            .map(|(i, _)| i)
            .collect();
        if positions.is_empty() {
            return Err(Error::EmptyInput);
        }
        let used: Vec<u32> = positions.iter().map(|&p| ids[p]).collect();
        let n = used.len();
        let hd = self.hidden_dim();
        let sd = 2 * hd;

        let fwd = self.forward.forward(used.iter().map(|&id| lookup(id)), n);
        let bwd = self
            .backward
            .forward(used.iter().rev().map(|&id| lookup(id)), n);

        let mut states = vec![0.0; n * sd];
        for t in 0..n {
            let s = &mut states[t * sd..(t + 1) * sd];
            s[..hd].copy_from_slice(&fwd.h[t * hd..(t + 1) * hd]);
            let rt = n - 1 - t;
            s[hd..].copy_from_slice(&bwd.h[rt * hd..(rt + 1) * hd]);
        }

        let mut proj = vec![0.0; n * sd];
        let mut scores = vec![0.0; n];
        for t in 0..n {
            let u = &mut proj[t * sd..(t + 1) * sd];
            self.attention_proj
                .affine(&states[t * sd..(t + 1) * sd], &self.attention_bias, u);
            u.iter_mut().for_each(|x| *x = tanh(*x));
            scores[t] = dot(&self.attention_context, u);
        }
        softmax_in_place(&mut scores);

        let mut representation = vec![0.0; sd];
        for t in 0..n {
            crate::math::axpy(
                scores[t],
                &states[t * sd..(t + 1) * sd],
                &mut representation,
            );
        }
        Ok(EncoderTrace {
            input_len: ids.len(),
            positions,
            ids: used,
            fwd,
            bwd,
            states,
            proj,
            attention: scores,
            representation,
        })
    }

    /// Backpropagates `d_repr` (gradient w.r.t. the document vector).
    ///
    /// Accumulates parameter gradients into `grad` when given and returns
    /// the gradient w.r.t. each read token's embedding, `[step][embed]`.
    pub fn backward(
        &self,
        tr: &EncoderTrace,
        d_repr: &[f64],
        mut grad: Option<&mut EncoderParams>,
    ) -> Vec<f64> {
        let n = tr.ids.len();
        let hd = self.hidden_dim();
        let sd = 2 * hd;
        let ed = self.embed_dim();

        // attention pooling
        let mut d_states = vec![0.0; n * sd];
        let mut d_att = vec![0.0; n];
        for t in 0..n {
            let s = &tr.states[t * sd..(t + 1) * sd];
            d_att[t] = dot(d_repr, s);
            crate::math::axpy(tr.attention[t], d_repr, &mut d_states[t * sd..(t + 1) * sd]);
        }
        let mean: f64 = tr.attention.iter().zip(&d_att).map(|(a, d)| a * d).sum();
        let mut dz = vec![0.0; sd];
        for t in 0..n {
            let d_score = tr.attention[t] * (d_att[t] - mean);
            let u = &tr.proj[t * sd..(t + 1) * sd];
            for j in 0..sd {
                dz[j] = d_score * self.attention_context[j] * (1.0 - u[j] * u[j]);
            }
            let s = &tr.states[t * sd..(t + 1) * sd];
            let ds = &mut d_states[t * sd..(t + 1) * sd];
            match grad.as_deref_mut() {
                Some(g) => {
                    crate::math::axpy(d_score, u, &mut g.attention_context);
                    self.attention_proj.affine_backward(
                        s,
                        &dz,
                        ds,
                        Some((&mut g.attention_proj, &mut g.attention_bias)),
                    );
                }
                None => self.attention_proj.affine_backward(s, &dz, ds, None),
            }
        }

        // split into the two directions; the backward LSTM saw the reversed sequence
        let mut dh_f = vec![0.0; n * hd];
        let mut dh_b = vec![0.0; n * hd];
        for t in 0..n {
            dh_f[t * hd..(t + 1) * hd].copy_from_slice(&d_states[t * sd..t * sd + hd]);
            let rt = n - 1 - t;
            dh_b[rt * hd..(rt + 1) * hd].copy_from_slice(&d_states[t * sd + hd..(t + 1) * sd]);
        }
        let (dx_f, dx_b) = match grad.as_deref_mut() {
            Some(g) => (
                self.forward.backward(&tr.fwd, &dh_f, Some(&mut g.forward)),
                self.backward
                    .backward(&tr.bwd, &dh_b, Some(&mut g.backward)),
            ),
            None => (
                self.forward.backward(&tr.fwd, &dh_f, None),
                self.backward.backward(&tr.bwd, &dh_b, None),
            ),
        };
        let mut dx = dx_f;
        for t in 0..n {
            let rt = n - 1 - t;
            crate::math::axpy(
                1.0,
                &dx_b[rt * ed..(rt + 1) * ed],
                &mut dx[t * ed..(t + 1) * ed],
            );
        }
        if let Some(g) = grad {
            for (t, &id) in tr.ids.iter().enumerate() {
                crate::math::axpy(
                    1.0,
                    &dx[t * ed..(t + 1) * ed],
                    g.embedding.row_mut(id as usize),
                );
            }
        }
        dx
    }
}
