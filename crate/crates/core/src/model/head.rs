use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tensor::{Matrix, Parameters};
use crate::error::{Error, Result};
use crate::math::{softmax_in_place, sqrt, tanh};

/// Two affine layers with tanh in between and a softmax output. Used both
/// for the label classifier and for adversaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadParams {
    pub hidden_weights: Matrix,
    pub hidden_bias: Vec<f64>,
    pub output_weights: Matrix,
    pub output_bias: Vec<f64>,
}

impl Parameters for HeadParams {
    fn tensors(&self) -> Vec<&[f64]> {
        vec![
            &self.hidden_weights.data,
            &self.hidden_bias,
            &self.output_weights.data,
            &self.output_bias,
        ]
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        vec![
            &mut self.hidden_weights.data,
            &mut self.hidden_bias,
            &mut self.output_weights.data,
            &mut self.output_bias,
        ]
    }
}

#[derive(Debug, Clone)]
pub struct HeadTrace {
    input: Vec<f64>,
    hidden: Vec<f64>,
    pub probs: Vec<f64>,
}

impl HeadParams {
    pub fn init<R: Rng>(input: usize, hidden: usize, output: usize, rng: &mut R) -> Self {
        let r1 = 1.0 / sqrt(input as f64);
        let r2 = 1.0 / sqrt(hidden as f64);
        HeadParams {
            hidden_weights: Matrix::uniform(hidden, input, r1, rng),
            hidden_bias: super::tensor::uniform_vec(hidden, r1, rng),
            output_weights: Matrix::uniform(output, hidden, r2, rng),
            output_bias: super::tensor::uniform_vec(output, r2, rng),
        }
    }

    pub fn zeros(input: usize, hidden: usize, output: usize) -> Self {
        HeadParams {
            hidden_weights: Matrix::zeros(hidden, input),
            hidden_bias: vec![0.0; hidden],
            output_weights: Matrix::zeros(output, hidden),
            output_bias: vec![0.0; output],
        }
    }

    pub fn input_dim(&self) -> usize {
        self.hidden_weights.cols
    }

    pub fn output_dim(&self) -> usize {
        self.output_weights.rows
    }

    pub fn logits(&self, h: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        if h.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: h.len(),
            });
        }
        let mut hidden = vec![0.0; self.hidden_weights.rows];
        self.hidden_weights
            .affine(h, &self.hidden_bias, &mut hidden);
        hidden.iter_mut().for_each(|x| *x = tanh(*x));
        let mut logits = vec![0.0; self.output_dim()];
        self.output_weights
            .affine(&hidden, &self.output_bias, &mut logits);
        Ok((hidden, logits))
    }

    pub fn forward(&self, h: &[f64]) -> Result<HeadTrace> {
        let (hidden, mut probs) = self.logits(h)?;
        softmax_in_place(&mut probs);
        Ok(HeadTrace {
            input: h.to_vec(),
            hidden,
            probs,
        })
    }

    /// Returns the gradient w.r.t. the input given `d_logits`.
    pub fn backward(
        &self,
        tr: &HeadTrace,
        d_logits: &[f64],
        grad: Option<&mut HeadParams>,
    ) -> Vec<f64> {
        let mut d_hidden = vec![0.0; self.hidden_weights.rows];
        let mut d_input = vec![0.0; self.input_dim()];
        match grad {
            Some(g) => {
                self.output_weights.affine_backward(
                    &tr.hidden,
                    d_logits,
                    &mut d_hidden,
                    Some((&mut g.output_weights, &mut g.output_bias)),
                );
                for (d, a) in d_hidden.iter_mut().zip(&tr.hidden) {
                    *d *= 1.0 - a * a;
                }
                self.hidden_weights.affine_backward(
                    &tr.input,
                    &d_hidden,
                    &mut d_input,
                    Some((&mut g.hidden_weights, &mut g.hidden_bias)),
                );
            }
            None => {
                self.output_weights
                    .affine_backward(&tr.hidden, d_logits, &mut d_hidden, None);
                for (d, a) in d_hidden.iter_mut().zip(&tr.hidden) {
                    *d *= 1.0 - a * a;
                }
                self.hidden_weights
                    .affine_backward(&tr.input, &d_hidden, &mut d_input, None);
            }
        }
        d_input
    }
}

/// Class probabilities of a document representation.
pub fn classify(h: &[f64], head: &HeadParams) -> Result<Vec<f64>> {
    Ok(head.forward(h)?.probs)
}

/// Gradient of `CE(softmax(z), t)` w.r.t. the logits `z`, scaled.
pub(crate) fn ce_logit_grad(probs: &[f64], target: &[f64], scale: f64) -> Vec<f64> {
    let mass: f64 = target.iter().sum();
    probs
        .iter()
        .zip(target)
        .map(|(p, t)| scale * (p * mass - t))
        .collect()
}
